import copy
import csv
import io
import json
import math

import pytest
import yaml
from hypothesis import HealthCheck, given, settings, strategies as st

from sfrcov import cli
from sfrcov.analytic import NumericalError
from sfrcov.cli import (
    CSV_HEADER,
    EXIT_CONFIG,
    EXIT_MISMATCH,
    EXIT_NUMERIC,
    EXIT_OK,
    TABLE1_DOCUMENT,
    compare,
    compare_text,
    load_config,
    main,
    plan_from_document,
    run,
    write_config,
)
from sfrcov.model import ConfigError


def small_doc(**sweep):
    doc = copy.deepcopy(TABLE1_DOCUMENT)
    doc["sim"]["trials"] = 300
    doc["sweep"].update(sweep)
    return doc


def dump(tmp_path, doc, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(doc))
    return p


def test_preset_table1():
    plan = load_config("table1")
    c = plan.config
    assert c.k == 2
    assert c.densities.tolist() == [0.25, 0.5]
    assert c.tiers[0].power / c.tiers[1].power == 100
    assert [t.alpha for t in c.tiers] == [3.5, 3.5]
    assert (c.fading.mu_z, c.fading.sigma_z) == (-7.3683, 8.0)
    assert plan.noise_defaulted and c.noise_power == 0.0


def test_preset_command_prints_loadable_yaml(tmp_path, capsys):
    assert main(["preset", "table1"]) == EXIT_OK
    doc = yaml.safe_load(capsys.readouterr().out)
    assert doc == TABLE1_DOCUMENT
    out = tmp_path / "t1.yaml"
    assert main(["preset", "table1", "--out", str(out)]) == EXIT_OK
    assert load_config(out) == load_config("table1")


def test_epsilon_out_of_range_names_field(tmp_path, capsys):
    doc = small_doc()
    doc["tiers"][1]["epsilon"] = 1.5
    with pytest.raises(ConfigError, match=r"tiers\[1\]\.epsilon"):
        plan_from_document(doc)
    assert main(["analyze", "--config", str(dump(tmp_path, doc))]) == EXIT_CONFIG
    assert "tiers[1].epsilon" in capsys.readouterr().err


def test_missing_snr_defaults_to_interference_limited(tmp_path):
    out = tmp_path / "res.csv"
    doc = small_doc(values=[0.0], modes=["CEU"])
    assert main(["analyze", "--config", str(dump(tmp_path, doc)), "--out", str(out)]) == EXIT_OK
    man = json.loads((tmp_path / "res.csv.manifest.json").read_text())
    assert man["noise"] == "interference-limited (default)"
    for key in ("config", "quadrature", "seed", "region_radius", "version", "timestamp"):
        assert key in man


def test_explicit_snr_recorded(tmp_path):
    doc = small_doc(values=[0.0], modes=["CEU"])
    doc["noise"] = {"snr_ref_db": 10.0}
    plan = plan_from_document(doc)
    assert not plan.noise_defaulted
    assert cli.manifest(plan, None, ("analytic",))["noise"] == 10.0


def test_empty_sweep_values_exit_2(tmp_path):
    doc = small_doc(values=[])
    assert main(["analyze", "--config", str(dump(tmp_path, doc))]) == EXIT_CONFIG


@pytest.mark.parametrize("where", ["root", "tier", "sim"])
def test_unknown_keys_rejected(where):
    doc = small_doc()
    if where == "root":
        doc["extra"] = 1
    elif where == "tier":
        doc["tiers"][0]["lamda"] = 0.1
    else:
        doc["sim"]["threads"] = 4
    with pytest.raises(ConfigError, match="unknown key"):
        plan_from_document(doc)


def test_parse_error_reports_position(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("tiers:\n  - lambda: 0.25\n    power: [1, 2\n")
    with pytest.raises(ConfigError, match=r"line \d+, column \d+"):
        load_config(p)


def test_missing_file_exit_2(tmp_path):
    assert main(["analyze", "--config", str(tmp_path / "nope.yaml")]) == EXIT_CONFIG
    assert main(["analyze"]) == EXIT_CONFIG


def test_all_errors_listed():
    doc = small_doc()
    doc["tiers"][0]["alpha"] = 2.0
    doc["tiers"][1]["epsilon"] = 0.0
    doc["sweep"]["variable"] = "power"
    with pytest.raises(ConfigError) as exc:
        plan_from_document(doc)
    msg = str(exc.value)
    assert "tiers[0].alpha" in msg and "tiers[1].epsilon" in msg and "sweep.variable" in msg


def test_invalid_sweep_value_rejected():
    with pytest.raises(ConfigError, match="sweep value"):
        plan_from_document(small_doc(variable="epsilon_vector", values=[[0.1, 0.2], [0.5, 1.2]]))


def test_overrides_apply():
    plan = load_config("table1", {"seed": 5, "trials": 1234, "hermite_order": 30, "legendre_order": 60})
    assert (plan.sim.master_seed, plan.sim.trials) == (5, 1234)
    assert plan.rules.hermite.order == 30 and plan.rules.legendre.order == 60


tier_docs = st.fixed_dictionaries({
    "lambda": st.floats(0.01, 5.0),
    "power": st.floats(0.1, 1000.0),
    "delta": st.integers(1, 6),
    "phi": st.floats(1.0, 10.0),
    "epsilon": st.floats(0.01, 1.0),
    "t_classify_db": st.floats(-20, 20),
    "t_cover_db": st.floats(-20, 20),
})


@st.composite
def documents(draw):
    alpha = draw(st.floats(2.1, 6.0))
    tiers = [dict(t, alpha=alpha) for t in draw(st.lists(tier_docs, min_size=1, max_size=4))]
    doc = {
        "tiers": tiers,
        "fading": {"sigma_z_db": draw(st.floats(0.0, 12.0))},
        "sim": {"trials": draw(st.integers(100, 10 ** 6)), "seed": draw(st.integers(0, 2 ** 63)),
                "workers": draw(st.integers(1, 8))},
        "sweep": {"variable": "t_cover_db",
                  "values": draw(st.lists(st.floats(-20, 20), min_size=1, max_size=5)),
                  "modes": draw(st.lists(st.sampled_from(["CEU", "CCU", "RandomUser"]), min_size=1, unique=True)),
                  "engines": draw(st.sampled_from([["both"], ["analytic"], ["simulate"]]))},
    }
    if draw(st.booleans()):
        doc["noise"] = {"snr_ref_db": draw(st.floats(-10, 60))}
    if draw(st.booleans()):
        doc["fading"]["mu_z_db"] = draw(st.floats(-10, 0))
    if draw(st.booleans()):
        doc["sim"]["region_radius"] = draw(st.floats(1.0, 100.0))
    return doc


@settings(deadline=None, max_examples=60, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(doc=documents())
def test_config_round_trip(doc, tmp_path):
    plan = plan_from_document(doc)
    p = tmp_path / "rt.yaml"
    p.write_text(write_config(plan))
    again = load_config(p)
    assert again == plan
    assert again.config == plan.config
    assert again.sim == plan.sim
    assert again.sweep == plan.sweep


def _parse(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_run_rows_and_format():
    plan = plan_from_document(small_doc())
    text = run(plan)
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    rows = _parse(text)
    assert len(rows) == 3 * 2 * 5
    order = [(r["mode"], r["engine"]) for r in rows]
    assert order == [(m, e) for m in ("CEU", "CCU", "RandomUser") for e in ("analytic", "simulate") for _ in range(5)]
    for r in rows:
        p = float(r["p"])
        assert 0 <= p <= 1
        if r["engine"] == "analytic":
            digits = r["p"].lstrip("0.").replace(".", "").split("e")[0]
            assert len(digits) >= 6
            assert r["trials"] == "0" and r["std_err"] == "0"
        else:
            assert r["trials"] == "300" and r["seed"] == "20160101"
            n = 300
            assert float(r["std_err"]) == pytest.approx(math.sqrt(p * (1 - p) / n), rel=1e-9)


def test_fmt_significant_digits():
    assert cli._fmt(0.12345678901) == "0.123456789"
    assert cli._fmt(1 / 3) == "0.3333333333"
    assert cli._fmt([0.1, 0.2]) == "0.1;0.2"


@pytest.mark.parametrize("variable,values", [
    ("phi", [1.0, 4.0]),
    ("epsilon_vector", [[0.1, 0.2], [0.2, 0.6]]),
    ("delta", [1, 3]),
])
def test_other_sweep_variables(variable, values):
    plan = plan_from_document(small_doc(variable=variable, values=values, modes=["CEU"], engines=["analytic"]))
    rows = _parse(run(plan))
    assert [r["sweep_var"] for r in rows] == [variable] * 2
    assert float(rows[0]["p"]) != float(rows[1]["p"])


def test_simulate_byte_identical(tmp_path):
    cfg = dump(tmp_path, small_doc(modes=["CEU", "RandomUser"]))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--config", str(cfg), "--seed", "7", "--out", str(a)]) == EXIT_OK
    assert main(["simulate", "--config", str(cfg), "--seed", "7", "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    assert main(["simulate", "--config", str(cfg), "--seed", "8", "--out", str(c)]) == EXIT_OK
    assert a.read_bytes() != c.read_bytes()


def test_simulate_workers_identical(tmp_path):
    doc = small_doc(modes=["CCU"])
    one = dump(tmp_path, doc, "one.yaml")
    doc["sim"]["workers"] = 8
    eight = dump(tmp_path, doc, "eight.yaml")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--config", str(one), "--out", str(a)]) == EXIT_OK
    assert main(["simulate", "--config", str(eight), "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def _pair_csv(analytic, simulated, se):
    return (",".join(CSV_HEADER) + "\n"
            f"CEU,analytic,t_cover_db,0,all,{analytic},0,0,\n"
            f"CEU,simulate,t_cover_db,0,all,{simulated},{se},10000,1\n")


def test_compare_matching_pairs():
    code, report = compare_text(_pair_csv(0.5, 0.501, 0.005))
    assert code == EXIT_OK
    assert "max diff/SE = 0.20" in report


def test_compare_injected_discrepancy(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text(_pair_csv(0.5, 0.55, 0.005))
    code, report = compare(p)
    assert code != 0 and code == EXIT_MISMATCH
    assert "FAIL" in report
    assert main(["compare", "--csv", str(p)]) == EXIT_MISMATCH


def test_compare_missing_pair(tmp_path):
    text = _pair_csv(0.5, 0.5, 0.005).splitlines()
    p = tmp_path / "half.csv"
    p.write_text("\n".join(text[:2]) + "\n")
    assert main(["compare", "--csv", str(p)]) == EXIT_CONFIG
    assert main(["compare", "--csv", str(tmp_path / "absent.csv")]) == EXIT_CONFIG


def test_compare_run_small(tmp_path, capsys):
    cfg = dump(tmp_path, small_doc(values=[0.0], modes=["CEU"]))
    code = main(["compare", "--config", str(cfg), "--trials", "4000"])
    out = capsys.readouterr().out
    assert code == EXIT_OK, out
    assert "0 of 1 pairs outside" in out


def test_numerical_failure_exit_3(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise NumericalError("forced")
    monkeypatch.setattr(cli, "average_coverage", boom)
    cfg = dump(tmp_path, small_doc(values=[0.0], modes=["CEU"]))
    assert main(["analyze", "--config", str(cfg)]) == EXIT_NUMERIC


def test_unequal_alpha_analytic_rejected(tmp_path):
    doc = small_doc(values=[0.0], modes=["CEU"])
    doc["tiers"][1]["alpha"] = 4.0
    cfg = dump(tmp_path, doc)
    assert main(["analyze", "--config", str(cfg)]) == EXIT_CONFIG
    assert main(["simulate", "--config", str(cfg)]) == EXIT_OK


def test_bad_quadrature_order_exit_2():
    assert main(["analyze", "--config", "table1", "--hermite-order", "200"]) == EXIT_CONFIG
