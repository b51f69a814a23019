from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from privflow.privacy.models import FoQDataset

FOQ_COLUMNS = ["movement_id", "owner_id", "t_s", "h_m"]


def foq_frame(datasets: Sequence[FoQDataset]) -> pd.DataFrame:
    frames = [
        pd.DataFrame(
            {
                "movement_id": [ds.movement_id] * len(ds),
                "owner_id": [ds.owner_id] * len(ds),
                "t_s": ds.t,
                "h_m": ds.h,
            }
        )
        for ds in datasets
    ]
    if not frames:
        return pd.DataFrame(columns=FOQ_COLUMNS)
    return pd.concat(frames, ignore_index=True)[FOQ_COLUMNS]


def write_foq_csv(datasets: Sequence[FoQDataset], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    foq_frame(datasets).to_csv(path, index=False, lineterminator="\n", float_format="%.12g")
    return path


def read_foq_csv(path: Path) -> list[FoQDataset]:
    frame = pd.read_csv(path, dtype={"movement_id": str, "owner_id": int})
    missing = [c for c in FOQ_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"FoQ CSV {path} lacks columns: {', '.join(missing)}")
    datasets = []
    for (movement_id, owner_id), group in frame.groupby(["movement_id", "owner_id"], sort=True):
        datasets.append(
            FoQDataset(
                t=group["t_s"].to_numpy(dtype=float),
                h=np.minimum(group["h_m"].to_numpy(dtype=float), 0.0),
                movement_id=str(movement_id),
                owner_id=int(owner_id),
            )
        )
    return datasets
