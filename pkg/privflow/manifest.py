from __future__ import annotations

import hashlib
import json
import time
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

MANIFEST_NAME = "manifest.json"
TRACKED_PACKAGES = ("privflow", "numpy", "scipy", "pandas", "matplotlib", "pydantic", "pyyaml", "typer")


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat().replace("+00:00", "Z")


def json_text(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def atomic_write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_suffix(path.suffix + ".tmp")
    tmp_path.write_text(text, encoding="utf-8", newline="\n")
    tmp_path.replace(path)
    return path


def atomic_write_json(path: Path, data: Any) -> Path:
    return atomic_write_text(path, json_text(data))


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    digest.update(path.read_bytes())
    return digest.hexdigest()


def package_versions(names: tuple[str, ...] = TRACKED_PACKAGES) -> dict[str, str]:
    versions = {}
    for name in names:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


class RunManifest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: str
    scenario_path: str | None = None
    scenario_sha256: str | None = None
    base_seed: int | None = None
    outputs: list[str] = Field(default_factory=list)
    started_at: str
    duration_s: float = 0.0
    versions: dict[str, str] = Field(default_factory=dict)
    distortion: list[str] = Field(default_factory=list)


class ManifestRecorder:
    """Collects what a command wrote and finishes with manifest.json in the same directory."""

    def __init__(self, command: str, out_dir: Path, scenario_path: Path | None = None, base_seed: int | None = None):
        self.out_dir = out_dir
        self._start = time.perf_counter()
        self.manifest = RunManifest(
            command=command,
            scenario_path=str(scenario_path) if scenario_path else None,
            scenario_sha256=file_sha256(scenario_path) if scenario_path else None,
            base_seed=base_seed,
            started_at=utc_timestamp(),
            versions=package_versions(),
        )

    def add(self, *paths: Path) -> None:
        for path in paths:
            self.manifest.outputs.append(path.name)

    def finish(self) -> Path:
        missing = [name for name in self.manifest.outputs if not (self.out_dir / name).exists()]
        if missing:
            raise FileNotFoundError(f"outputs listed in the manifest are missing: {missing}")
        self.manifest.duration_s = round(time.perf_counter() - self._start, 6)
        path = self.out_dir / MANIFEST_NAME
        atomic_write_json(path, self.manifest.model_dump(mode="json"))
        return path
