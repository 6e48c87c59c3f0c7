"""Recording and annotation file I/O.

Recording files are plain text: ``#`` lines carry metadata
(``# rate_hz=500``, ``# units=mV``) followed by one decimal value per
line.  Annotation files hold one R-peak sample index per line.
"""

from __future__ import annotations

import os

import numpy as np

from .signals import BeatTruth, TimeSeries, Units


def write_recording(path: str | os.PathLike, ts: TimeSeries) -> None:
    with open(path, "w") as fh:
        fh.write(f"# rate_hz={ts.rate_hz:g}\n")
        fh.write(f"# units={ts.units.value}\n")
        for v in ts.values:
            fh.write(repr(float(v)) + "\n")


def read_recording(path: str | os.PathLike) -> TimeSeries:
    meta: dict[str, str] = {}
    values: list[float] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    meta[key.strip()] = val.strip()
                continue
            values.append(float(line))
    if "rate_hz" not in meta:
        raise ValueError(f"{path}: missing '# rate_hz=' metadata line")
    units = Units.from_tag(meta.get("units", "mV"))
    return TimeSeries(np.array(values), float(meta["rate_hz"]), units)


def write_annotations(path: str | os.PathLike, truth: BeatTruth) -> None:
    with open(path, "w") as fh:
        for idx in truth.r_indices:
            fh.write(f"{int(idx)}\n")


def read_annotations(path: str | os.PathLike) -> BeatTruth:
    indices = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                indices.append(int(line))
    return BeatTruth(np.array(indices, dtype=np.int64))
