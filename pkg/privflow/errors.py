from __future__ import annotations


class PrivflowError(Exception):
    pass


class ScenarioError(PrivflowError):
    pass


class Infeasible(PrivflowError):
    pass


class NonConvergence(PrivflowError):
    pass


class NotFound(PrivflowError):
    pass


class OutOfBounds(PrivflowError):
    pass


class BudgetOutOfRange(PrivflowError):
    pass


class DegenerateStats(PrivflowError):
    pass


class InsufficientData(PrivflowError):
    pass


class SingularDesign(PrivflowError):
    pass


class SlopeOutOfRange(PrivflowError):
    pass


class EmptyInput(PrivflowError):
    pass


class NoData(PrivflowError):
    pass


class Oversaturated(PrivflowError):
    pass


class InfeasibleMinGreen(PrivflowError):
    pass
