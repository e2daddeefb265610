import json
import math

import numpy as np

from troposim import records
from troposim.records import DiagnosticSample, TrajectoryRecord


def make_record():
    rng = np.random.default_rng(0)
    samples = [DiagnosticSample(0.1 * i, *rng.random(5), energy_residual=math.nan if i == 0
                                else float(rng.standard_normal()) * 1e-9)
               for i in range(6)]
    return TrajectoryRecord(samples=samples)


def test_csv_header_and_roundtrip(tmp_path):
    rec = make_record()
    path = tmp_path / "d.csv"
    records.write_diagnostics_csv(path, rec)
    lines = path.read_text().splitlines()
    assert lines[0] == "# troposim diagnostics schema_version=1"
    assert lines[1] == ",".join(records.CSV_COLUMNS)
    back = records.read_diagnostics_csv(path)
    for a, b in zip(rec.samples, back):
        for col in records.CSV_COLUMNS:
            x, y = getattr(a, col), getattr(b, col)
            assert (math.isnan(x) and math.isnan(y)) or x == y


def test_csv_is_deterministic():
    assert records.diagnostics_csv(make_record()) == records.diagnostics_csv(make_record())


def test_columns_and_extras():
    rec = TrajectoryRecord(samples=[DiagnosticSample(0.0, 4.0, 1, 1, 1, 1, extras={"e": 2.0}),
                                    DiagnosticSample(1.0, 9.0, 1, 1, 1, 1)])
    np.testing.assert_array_equal(rec.times, [0.0, 1.0])
    np.testing.assert_array_equal(rec.l2_norm, [2.0, 3.0])
    e = rec.column("e")
    assert e[0] == 2.0 and math.isnan(e[1])


def test_json_handles_numpy(tmp_path):
    records.write_json(tmp_path / "r.json", {"b": np.float64(1.5), "a": np.arange(3)})
    text = (tmp_path / "r.json").read_text()
    assert json.loads(text) == {"a": [0, 1, 2], "b": 1.5}
    assert text.index('"a"') < text.index('"b"')
