import copy
import json
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from euler3body import (DomainError, EnergyParams, MassTriple, OrbitRecord, SchemaError,
                        geometry_for, integrate, random_loop, read_orbit, write_orbit)
from euler3body.certify import verify_record, verified
from euler3body.dynamics import OrbitTimeSeries, initial_state
from euler3body.orbit_io import CSV_HEADER, emit_csv, emit_svg, record_from_json

DATA = Path(__file__).parent / "data"
FIXTURES = sorted(DATA.glob("*.json"))

sys.path.insert(0, str(DATA))
from regenerate import circular_series  # noqa: E402


def _doc(name="kepler.json"):
    return json.loads((DATA / name).read_text())


def _record(K=3, seed=0):
    m = MassTriple(1.0, 2.0, 3.0)
    loop = random_loop(K, seed, 0.7, T=4.0)
    solver = {"kind": "minimizer", "eps": 0.0, "h": -1.5, "omega": 1.0, "iterations": 7,
              "gradientNorm": 3.1e-9}
    diag = {"f": 1.0, "f1": 2.0, "phiEps": 3.0, "centralConfigResidual": 1e-16,
            "eomResidualUnperturbed": 1e-9, "eomResidualPerturbed": 1e-9,
            "energyResidual": 0.0, "closureError": 1e-7, "separationVariation": 0.2,
            "windingNumber": None}
    return OrbitRecord(m, loop.T, geometry_for(m).lambda0, loop.coeffs, solver, diag)


@pytest.mark.parametrize("path", FIXTURES, ids=lambda p: p.name)
def test_fixture_round_trip_is_byte_exact(path, tmp_path):
    record = read_orbit(path)
    out = tmp_path / "copy.json"
    write_orbit(record, out)
    assert out.read_bytes() == path.read_bytes()
    again = read_orbit(out)
    assert again == record
    assert again.coeffs.tobytes() == record.coeffs.tobytes()


@given(st.integers(1, 12), st.integers(0, 2**31 - 1))
def test_random_record_round_trip(tmp_path_factory, K, seed):
    record = _record(K, seed)
    path = tmp_path_factory.mktemp("rt") / "r.json"
    write_orbit(record, path)
    back = read_orbit(path)
    assert back == record
    np.testing.assert_array_equal(back.coeffs, record.coeffs)
    assert back.period == record.period and back.lambda0 == record.lambda0


def test_even_harmonic_rejected_with_field_path():
    doc = _doc()
    doc["harmonics"][1]["k"] = 4
    with pytest.raises(SchemaError) as info:
        record_from_json(doc)
    assert info.value.path == "harmonics[1].k"


def test_non_increasing_harmonics_rejected():
    doc = _doc()
    doc["harmonics"][2]["k"] = 1
    with pytest.raises(SchemaError, match="increasing"):
        record_from_json(doc)


@pytest.mark.parametrize("block,key", [("diagnostics", "f1"), ("diagnostics", "closureError"),
                                       ("solver", "omega"), ("solver", "kind")])
def test_missing_field_rejected(block, key):
    doc = _doc()
    del doc[block][key]
    with pytest.raises(SchemaError) as info:
        record_from_json(doc)
    assert info.value.path == f"{block}.{key}"


@pytest.mark.parametrize("mutate,path", [
    (lambda d: d.update(schema="other/2"), "schema"),
    (lambda d: d.update(masses=[1, -1, 1]), "masses"),
    (lambda d: d.update(masses=[1, 1]), "masses"),
    (lambda d: d.update(period=0.0), "period"),
    (lambda d: d.update(lambda0=1.5), "lambda0"),
    (lambda d: d["harmonics"][0].update(cos=[1, 2]), "harmonics[0].cos"),
    (lambda d: d["harmonics"][0].update(sin=[1, "x", 2]), "harmonics[0].sin[1]"),
    (lambda d: d["solver"].update(kind="maximizer"), "solver.kind"),
    (lambda d: d["solver"].update(iterations=2.5), "solver.iterations"),
    (lambda d: d["diagnostics"].update(f1=None), "diagnostics.f1"),
    (lambda d: d.pop("harmonics"), "harmonics"),
])
def test_schema_errors_name_the_field(mutate, path):
    doc = _doc()
    mutate(doc)
    with pytest.raises(SchemaError) as info:
        record_from_json(doc)
    assert info.value.path == path


def test_null_winding_number_allowed():
    doc = _doc()
    doc["diagnostics"]["windingNumber"] = None
    assert record_from_json(doc).diagnostics["windingNumber"] is None


def test_invalid_json_is_schema_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SchemaError):
        read_orbit(bad)


def test_record_is_immutable():
    record = read_orbit(DATA / "kepler.json")
    with pytest.raises(ValueError):
        record.coeffs[0, 0, 0] = 1.0


def test_input_document_not_modified():
    doc = _doc()
    before = copy.deepcopy(doc)
    record_from_json(doc)
    assert doc == before


def test_csv_rows_and_header(equal, circular_orbit, tmp_path):
    m, g = equal
    series = integrate(initial_state(circular_orbit, g, m), m, None, 2, circular_orbit.T)
    out = tmp_path / "s.csv"
    emit_csv(series, out)
    lines = out.read_text().splitlines()
    assert len(lines) == 4 and lines[0] == CSV_HEADER
    assert len(lines[0].split(",")) == 19
    row = [float(x) for x in lines[1].split(",")]
    np.testing.assert_array_equal(row[1:], series.states[0].phase_vector())


def test_csv_values_round_trip(equal, circular_orbit, tmp_path):
    m, g = equal
    series = integrate(initial_state(circular_orbit, g, m), m, None, 5, circular_orbit.T)
    out = tmp_path / "s.csv"
    emit_csv(series, out)
    table = np.loadtxt(out, delimiter=",", skiprows=1)
    np.testing.assert_array_equal(table[:, 0], series.times)
    np.testing.assert_array_equal(table[:, 1:], series.phase_array())
    assert "-0," not in out.read_text()


def test_csv_empty_series_is_header_only(tmp_path):
    out = tmp_path / "e.csv"
    emit_csv(OrbitTimeSeries([], []), out)
    assert out.read_text() == CSV_HEADER + "\n"


def test_csv_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        emit_csv(OrbitTimeSeries([], []), tmp_path / "missing" / "e.csv")


def test_csv_golden(tmp_path):
    out = tmp_path / "circular.csv"
    emit_csv(circular_series(), out)
    assert out.read_bytes() == (DATA / "circular.csv").read_bytes()


@pytest.mark.parametrize("source,golden,plane", [("kepler.json", "kepler.svg", "xy"),
                                                 ("saddle_jitter.json", "saddle_jitter.svg", "xz")])
def test_svg_golden(source, golden, plane, tmp_path):
    out = tmp_path / golden
    emit_svg(read_orbit(DATA / source), out, plane)
    assert out.read_bytes() == (DATA / golden).read_bytes()


def test_svg_structure(tmp_path):
    out = tmp_path / "k.svg"
    emit_svg(read_orbit(DATA / "kepler.json"), out)
    text = out.read_text()
    assert text.startswith("<svg") and text.rstrip().endswith("</svg>")
    assert text.count("<polyline") == 4 and text.count("<circle") == 3
    assert "lambda0 = 0.5" in text and "-0.000" not in text


def test_svg_rejects_unknown_plane(tmp_path):
    with pytest.raises(DomainError):
        emit_svg(read_orbit(DATA / "kepler.json"), tmp_path / "x.svg", "xw")


@pytest.mark.parametrize("path", FIXTURES, ids=lambda p: p.name)
def test_shipped_fixtures_verify(path):
    assert verified(verify_record(read_orbit(path)))


def test_corrupted_coefficient_fails_verification():
    doc = _doc()
    doc["harmonics"][0]["cos"][0] *= 1.001
    checks = verify_record(record_from_json(doc))
    assert not verified(checks)
    failed = {c.name for c in checks if not c.passed}
    assert "f1" in failed and "closureError threshold" in failed


def test_unequal_mass_saddle_is_not_an_exact_orbit():
    # With unequal masses the collinear ratio balances only the Newtonian
    # term, so the reduced critical loop leaves an O(eps) force defect.
    from euler3body.certify import saddle_record
    from euler3body.optimize import SolverOptions, continuation_in_eps
    m = MassTriple(1.0, 2.0, 3.0)
    g = geometry_for(m)
    residuals = []
    for eps in (1e-3, 1e-4):
        params = EnergyParams(-g.s / 4, eps)
        stage, = continuation_in_eps([eps], params, g, m, SolverOptions(tol=1e-8), T=2 * np.pi, K=4)
        record = saddle_record(stage.loop, g, m, stage.params, stage.report, steps=256)
        residuals.append(record.diagnostics["eomResidualPerturbed"])
        assert record.diagnostics["eomResidualUnperturbed"] > 10 * residuals[-1]
    assert residuals[0] > 1e-5
    assert residuals[0] / residuals[1] == pytest.approx(10, rel=0.05)
