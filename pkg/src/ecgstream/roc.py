"""Threshold calibration: sweep, ROC points, and the averaged optimum.

Candidates are every local maximum of the normalized detection function
above a low floor; a threshold sweep then classifies each candidate by
height.  Negatives are defined over the candidate set itself (rejected
candidates that match no true beat count as true negatives), which makes
the TNR of an event detector countable.  The final threshold averages,
across subjects, the midpoint of each subject's perfect interval — the
contiguous range of thresholds where both TPR and TNR reach 100 %.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .signals import BeatTruth

CANDIDATE_FLOOR = 0.01
MATCH_WINDOW_MS = 50.0


@dataclass(frozen=True)
class Candidate:
    sample_index: int
    height: float


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    tpr: float
    tnr: float
    tp: int
    fp: int
    fn: int
    tn: int
    flagged: bool = False  # set when truth was empty and tpr is undefined


@dataclass(frozen=True)
class CalibrationResult:
    threshold: float
    midpoints: list[float]
    failed_subjects: list[int] = field(default_factory=list)

    @property
    def subjects_ok(self) -> int:
        return len(self.midpoints)

    def summary(self) -> str:
        return (
            f"optimal_threshold={self.threshold:.6g} "
            f"subjects_ok={self.subjects_ok} subjects_failed={len(self.failed_subjects)}"
        )


def candidates(norm_values, floor: float = CANDIDATE_FLOOR) -> list[Candidate]:
    """All strict local maxima with height >= floor (no refractory)."""
    x = np.asarray(norm_values, dtype=np.float64)
    if x.size < 3:
        return []
    mid = x[1:-1]
    is_peak = (x[:-2] < mid) & (mid >= x[2:]) & (mid >= floor)
    return [Candidate(int(i) + 1, float(x[i + 1])) for i in np.nonzero(is_peak)[0]]


def _greedy_match(accepted: np.ndarray, truth: np.ndarray, window: int) -> int:
    """In-order one-to-one matches between sorted index arrays."""
    tp = 0
    j = 0
    for a in accepted:
        while j < len(truth) and truth[j] < a - window:
            j += 1
        if j < len(truth) and abs(int(truth[j]) - int(a)) <= window:
            tp += 1
            j += 1
    return tp


def score_threshold(
    cands: list[Candidate],
    truth: BeatTruth,
    threshold: float,
    rate_hz: float,
    match_ms: float = MATCH_WINDOW_MS,
) -> RocPoint:
    """Confusion counts for one threshold over the candidate set."""
    if not (0.0 <= threshold <= 1.0):
        raise ValueError("threshold must lie in [0, 1]")
    window = int(round(match_ms * rate_hz / 1000.0))
    idx = np.array([c.sample_index for c in cands], dtype=np.int64)
    heights = np.array([c.height for c in cands])
    accept = heights >= threshold
    truth_idx = truth.r_indices

    tp = _greedy_match(idx[accept], truth_idx, window)
    fp = int(np.count_nonzero(accept)) - tp
    fn = len(truth_idx) - tp

    rejected = idx[~accept]
    if len(truth_idx):
        j = np.searchsorted(truth_idx, rejected)
        near_lo = (j > 0) & (rejected - truth_idx[np.maximum(j - 1, 0)] <= window)
        near_hi = (j < len(truth_idx)) & (
            truth_idx[np.minimum(j, len(truth_idx) - 1)] - rejected <= window
        )
        tn = int(np.count_nonzero(~(near_lo | near_hi)))
    else:
        tn = len(rejected)

    flagged = len(truth_idx) == 0
    tpr = float("nan") if flagged else (tp / (tp + fn) if tp + fn else float("nan"))
    tnr = tn / (tn + fp) if tn + fp else 1.0  # no negatives: vacuously specific
    return RocPoint(threshold, tpr, tnr, tp, fp, fn, tn, flagged)


def default_grid() -> np.ndarray:
    return np.round(np.arange(101) / 100.0, 2)


def sweep(
    cands: list[Candidate],
    truth: BeatTruth,
    thresholds=None,
    rate_hz: float = 500.0,
    match_ms: float = MATCH_WINDOW_MS,
) -> list[RocPoint]:
    """One RocPoint per threshold, ascending; tpr falls and tnr rises along it."""
    grid = default_grid() if thresholds is None else np.asarray(thresholds, dtype=np.float64)
    if np.any(np.diff(grid) < 0):
        raise ValueError("threshold grid must be sorted ascending")
    return [score_threshold(cands, truth, float(t), rate_hz, match_ms) for t in grid]


def perfect_interval(curve: list[RocPoint]) -> tuple[float, float] | None:
    """Threshold range with tpr == tnr == 1, or None when empty."""
    perfect = [p.threshold for p in curve if not p.flagged and p.tpr == 1.0 and p.tnr == 1.0]
    if not perfect:
        return None
    return min(perfect), max(perfect)


def optimal_threshold(curves: list[list[RocPoint]]) -> CalibrationResult:
    """Average of per-subject perfect-interval midpoints.

    Subjects without a perfect threshold are excluded and reported in
    ``failed_subjects``; calibration fails outright only when no subject
    has a perfect interval.
    """
    midpoints: list[float] = []
    failed: list[int] = []
    for i, curve in enumerate(curves):
        interval = perfect_interval(curve)
        if interval is None:
            failed.append(i)
        else:
            midpoints.append((interval[0] + interval[1]) / 2.0)
    if not midpoints:
        raise ValueError("no subject has a threshold with perfect TPR and TNR")
    return CalibrationResult(float(np.mean(midpoints)), midpoints, failed)


def save_roc_csv(path: str | os.PathLike, curve: list[RocPoint]) -> None:
    with open(path, "w") as fh:
        fh.write("threshold,tpr,tnr,tp,fp,fn,tn\n")
        for p in curve:
            fh.write(
                f"{p.threshold!r},{p.tpr!r},{p.tnr!r},{p.tp},{p.fp},{p.fn},{p.tn}\n"
            )
