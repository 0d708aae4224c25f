"""Benchmark datasets used by the demos and the acceptance suite.

``crabs`` and ``wine`` ship with the package:

* crabs - Campbell & Mahon's Leptograpsus crabs (R package MASS): five body
  measurements on 200 crabs; the group is colour form x sex (4 groups).
* wine  - the UCI Italian wine recognition data (also in R package gclus):
  13 chemical measurements on 178 wines from three cultivars.

``banknote`` (Flury & Riedwyl's Swiss bank notes, 200 x 6) and ``coffee``
(Streuli's coffee data, 43 samples, two species) are not redistributable from
any package index available at build time.  Drop ``banknote.csv`` /
``coffee.csv`` into ``$VSCC_DATA_DIR`` (or the package ``data`` directory) with a
header row and a label column named as below and they load the same way.
"""

from __future__ import annotations

import os
from pathlib import Path

from .data_model import Dataset, Partition

DATA_DIR = Path(__file__).parent / "data"

LABEL_COLUMNS = {
    "crabs": "group",
    "wine": "cultivar",
    "banknote": "Status",
    "coffee": "Variety",
}

# columns in the raw files that are neither measurements nor the class label
DROP_COLUMNS = {
    "coffee": ("Country",),
}


def find(name: str) -> Path:
    """Locate ``<name>.csv``, preferring ``$VSCC_DATA_DIR`` over the bundled copy."""
    candidates = []
    env = os.environ.get("VSCC_DATA_DIR")
    if env:
        candidates.append(Path(env) / f"{name}.csv")
    candidates.append(DATA_DIR / f"{name}.csv")
    for path in candidates:
        if path.exists():
            return path
    raise FileNotFoundError(
        f"dataset {name!r} not found; looked in: " + ", ".join(str(c) for c in candidates)
    )


def available(name: str) -> bool:
    try:
        find(name)
    except FileNotFoundError:
        return False
    return True


def load(name: str) -> tuple[Dataset, Partition]:
    """Return the measurements and the true grouping of a benchmark dataset."""
    from .io import ingest_csv

    ds, known = ingest_csv(find(name), LABEL_COLUMNS[name], drop=DROP_COLUMNS.get(name, ()))
    return ds, Partition(known.labels, known.G)
