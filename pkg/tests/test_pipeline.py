from dataclasses import replace

import numpy as np
import pytest

from cqednet.analysis import analyze
from cqednet.config import preset
from cqednet.pipeline import (CSV_COLUMNS, StageError, format_csv, read_csv, series_from_rows,
                              simulate)
from cqednet.states import ROW_FIELDS, TwoQubitXState


def small(name="fig3-cold", **kw):
    return replace(preset(name), samples=31, t_max=1.5, gqd_starts=4, **kw)


@pytest.fixture(scope="module")
def result():
    return simulate(small())


def test_csv_layout(result):
    header, rows = read_csv(result.csv_text())
    assert header["preset"] == "fig3-cold"
    assert header["config_sha256"] == result.config.fingerprint()
    assert header["mode"] == "cascade"
    assert {"numpy", "scipy", "python", "package", "rates_fingerprint"} <= set(header)
    first = result.csv_text().splitlines()[len(header)]
    assert tuple(first.split(",")) == CSV_COLUMNS
    assert len(rows) == 31
    for col in ("t", "p_vac", "MI", "CC", "QD", "GQD_B_norm", "GQD_B_raw", "REE", "GE"):
        assert all(np.isfinite(r[col]) for r in rows)
    np.testing.assert_allclose([r["t"] for r in rows], result.config.times())


def test_rows_rebuild_states(result):
    _, rows = read_csv(result.csv_text())
    for r, x in zip(rows, result.xstates):
        back = TwoQubitXState.from_row([r[k] for k in ROW_FIELDS])
        np.testing.assert_allclose(back.matrix(), x.matrix(), atol=1e-15)


def test_csv_reanalysis_matches_report(result):
    _, rows = read_csv(result.csv_text())
    again = analyze(series_from_rows(rows), result.config.detection)
    assert again.to_json() == result.report.to_json()


def test_measure_relations(result):
    v = result.series.values
    np.testing.assert_allclose(v["MI"], v["CC"] + v["QD"], atol=1e-12)
    assert np.all(v["QD"] >= -1e-9) and np.all(v["CC"] >= -1e-9)
    assert np.all(result.p_vac <= 1 + 1e-12) and np.all(result.p_vac > 0)
    assert result.p_vac[0] == pytest.approx(1.0)


def test_initial_state_is_bell_diagonal(result):
    x = result.xstates[0]
    c = result.config.c
    assert x.d1 + x.d4 == pytest.approx((1 + c[2]) / 2)
    assert abs(x.a14) == pytest.approx(abs(c[0] - c[1]) / 4)
    assert abs(x.a23) == pytest.approx(abs(c[0] + c[1]) / 4)


def test_determinism(result):
    again = simulate(small())
    assert again.csv_text() == result.csv_text()
    assert again.report_json() == result.report_json()


def test_workers_do_not_change_output():
    cfg = small(measures=("CC", "QD", "GQD"))
    assert simulate(cfg, workers=2).csv_text() == simulate(cfg).csv_text()


def test_zero_coupling_is_constant():
    cfg = small("fig1b", measures=("CC", "QD", "GQD", "REE", "GE"))
    cfg = replace(cfg, system=replace(cfg.system, g1=0.0, g2=0.0, nu=0.0), samples=21)
    res = simulate(cfg)
    for name, v in res.series.values.items():
        assert np.ptp(v) < 1e-6, name
    assert np.ptp(res.p_vac) == 0.0


def test_stage_errors_name_the_stage():
    bad = replace(preset("fig1b"), c=(1.0, 1.0, 1.0), measures=("CC",))
    with pytest.raises(StageError) as exc:
        simulate(bad)
    assert exc.value.stage == "state-io"
    bad = replace(preset("fig1b"), samples=1)
    with pytest.raises(StageError) as exc:
        simulate(bad)
    assert exc.value.stage == "config"
    assert "config" in str(exc.value)


def test_cross_check(tmp_path):
    res = simulate(replace(small(), measures=("CC",)), cross_check=True)
    assert res.diagnostics["rk_max_deviation"] < 1e-7
    assert res.diagnostics["trace_error"] < 1e-9
    res.write(tmp_path / "a.csv", tmp_path / "a.json")
    assert (tmp_path / "a.csv").read_text() == res.csv_text()
    assert '"rk_max_deviation"' in (tmp_path / "a.json").read_text()


def test_format_csv_cells():
    text = format_csv([{"t": 0.1, "CC": None, "QD": float("nan"), "p_vac": 1}], {"k": "v"},
                      ("t", "p_vac", "CC", "QD"))
    assert text == "# k: v\nt,p_vac,CC,QD\n0.1,1,,nan\n"
