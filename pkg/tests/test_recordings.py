import numpy as np
import pytest

from ecgstream.recordings import (
    read_annotations,
    read_recording,
    write_annotations,
    write_recording,
)
from ecgstream.signals import BeatTruth, TimeSeries, Units


def test_recording_round_trip(tmp_path):
    ts = TimeSeries(np.array([0.0, -1.25, 3.5e-7, 2.0]), 500.0, Units.MILLIVOLT)
    path = tmp_path / "r.csv"
    write_recording(path, ts)
    back = read_recording(path)
    assert np.array_equal(back.values, ts.values)  # repr round-trip is exact
    assert back.rate_hz == 500.0
    assert back.units is Units.MILLIVOLT


def test_recording_header_layout(tmp_path):
    path = tmp_path / "r.csv"
    write_recording(path, TimeSeries(np.array([1.5]), 500.0, Units.VOLT))
    lines = path.read_text().splitlines()
    assert lines[0] == "# rate_hz=500"
    assert lines[1] == "# units=V"
    assert lines[2] == "1.5"


def test_missing_rate_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1.0\n2.0\n")
    with pytest.raises(ValueError, match="rate_hz"):
        read_recording(path)


def test_annotation_round_trip(tmp_path):
    truth = BeatTruth(np.array([150, 650, 1150]))
    path = tmp_path / "r.ann"
    write_annotations(path, truth)
    assert np.array_equal(read_annotations(path).r_indices, truth.r_indices)


def test_empty_annotations(tmp_path):
    path = tmp_path / "r.ann"
    write_annotations(path, BeatTruth())
    assert len(read_annotations(path)) == 0
