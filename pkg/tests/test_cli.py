import json

import numpy as np
import pytest

from netintervene.cli import main
from netintervene.io import read_instance, read_matrix, write_matrix


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_graph_and_weights(tmp_path, capsys):
    g = tmp_path / "g.csv"
    assert run(capsys, "gen-graph", "--model", "PA", "--n", 20, "--seed", 1, "--out", g)[0] == 0
    w = tmp_path / "w.csv"
    assert run(capsys, "weights", "--kind", "fj-steps", "--W", g, "--steps", 3, "--out", w)[0] == 0
    np.testing.assert_allclose(read_matrix(w).sum(axis=1), 1.0)
    code, out, _ = run(capsys, "gen-graph", "--model", "ER", "--n", 5, "--p", 1.0, "--sparse")
    assert code == 0 and out.startswith("i,j,w\n") and len(out.splitlines()) == 21


def test_weights_exit_codes(tmp_path, capsys):
    periodic = tmp_path / "p.csv"
    write_matrix(periodic, np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert run(capsys, "weights", "--kind", "degroot", "--W", periodic)[0] == 3
    asym = tmp_path / "a.csv"
    write_matrix(asym, np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert run(capsys, "weights", "--kind", "fj", "--W", asym)[0] == 2
    assert run(capsys, "weights", "--kind", "fj", "--W", tmp_path / "missing.csv")[0] == 2


def test_fixture_optimize_evaluate(tmp_path, capsys):
    inst = tmp_path / "fx.json"
    assert run(capsys, "fixture", "adversarial", "--n", 5, "--variant", 1, "--out", inst,
               "--wbar-out", tmp_path / "fx.csv")[0] == 0
    trace = tmp_path / "trace.csv"
    plan = tmp_path / "plan.json"
    code, _, _ = run(capsys, "optimize", "--instance", inst, "--k", 2, "--trace", trace, "--out", plan)
    assert code == 0
    doc = json.loads(plan.read_text())
    assert doc["S"][0] in (2, 3)
    assert doc["gain_egal"] == pytest.approx(3.5)
    assert trace.read_text().splitlines()[0] == "step,chosen,marginal,cumulative"
    code, out, _ = run(capsys, "evaluate", "--instance", inst, "--plan", plan)
    assert code == 0 and json.loads(out)["gain_egal"] == pytest.approx(3.5)


def test_optimize_variants(tmp_path, capsys):
    inst = tmp_path / "i.json"
    assert run(capsys, "gen-instance", "--model", "WS", "--n", 12, "--seed", 2, "--out", inst)[0] == 0
    code, out, _ = run(capsys, "optimize", "--objective", "agg", "--instance", inst, "--k", 2)
    assert code == 0 and json.loads(out)["gain_closed"] == pytest.approx(json.loads(out)["gain_direct"])
    code, out, _ = run(capsys, "optimize", "--method", "appx-ind", "--instance", inst, "--k", 2)
    assert code == 0 and "delta_ind" in json.loads(out)
    code, out, _ = run(capsys, "optimize", "--method", "brute-force", "--instance", inst, "--k", 2)
    assert code == 0 and json.loads(out)["opt"] >= 0
    group = tmp_path / "g.json"
    wbar = tmp_path / "w.csv"
    write_matrix(wbar, read_instance(inst).wbar)
    assert run(capsys, "gen-group", "--wbar", wbar, "--out", group, "--instance-out", tmp_path / "gi.json")[0] == 0
    code, out, _ = run(capsys, "optimize", "--method", "appx-group", "--wbar", wbar, "--group", group, "--k", 2)
    assert code == 0 and len(json.loads(out)["S"]) == 2


def test_guard_and_validation_exit_codes(tmp_path, capsys):
    inst = tmp_path / "i.json"
    run(capsys, "gen-instance", "--model", "RandomW", "--n", 60, "--out", inst)
    assert run(capsys, "optimize", "--method", "brute-force", "--instance", inst, "--k", 30)[0] == 4
    assert run(capsys, "optimize", "--instance", inst, "--k", 0)[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(capsys, "evaluate", "--instance", bad, "--plan", bad)[0] == 2


def test_sweep_is_byte_identical(tmp_path, capsys):
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        code, _, _ = run(capsys, "sweep", "--model", "PA", "--n", 32, "--seeds", "0-1", "--threads", 2,
                         "--out", path, "--summary", tmp_path / f"{name}.json")
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    lines = outs[0].decode().splitlines()
    assert lines[0] == "method,seed,k,gain,acc,wall_ms"
    assert len(lines) == 1 + 2 * 6 * 5
    summary = json.loads((tmp_path / "a.csv.json").read_text())
    assert "acc_at_k5" in summary


def test_sweep_json_with_timing(tmp_path, capsys):
    inst = tmp_path / "i.json"
    run(capsys, "fixture", "adversarial", "--n", 3, "--out", inst)
    code, out, _ = run(capsys, "sweep", "--instance", inst, "--methods", "Egal,Degree", "--k-max", 2,
                       "--format", "json", "--timing")
    rows = json.loads(out)
    assert code == 0 and len(rows) == 4
    assert all(r["wall_ms"] is not None for r in rows)
    assert run(capsys, "sweep", "--instance", inst, "--methods", "Bogus")[0] == 2
