import json

import numpy as np
import pytest

from otspaces import formats
from otspaces.cli import bench_rows, run
from otspaces.errors import NegativeWeight, ParseError
from otspaces.measures import DiscreteMeasure


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def report(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def test_parse_measure_examples(tmp_path):
    mu = formats.parse_measure(write(tmp_path, "a.json", {"points": [[0], [3]]}))
    assert mu.n == 2 and np.array_equal(mu.weights, [0.5, 0.5])
    mu = formats.parse_measure(write(tmp_path, "b.csv", "x,y\n0,0\n1,1\n"))
    assert mu.support.shape == (2, 2) and np.allclose(mu.weights, 0.5)
    mu = formats.parse_measure(write(tmp_path, "c.csv", "x,w\n0,1\n1,3\n"))
    assert np.allclose(mu.weights, [0.25, 0.75])
    with pytest.raises(NegativeWeight):
        formats.parse_measure(write(tmp_path, "d.json", {"points": [[0]], "weights": [-1]}))
    with pytest.raises(ParseError):
        formats.parse_measure(write(tmp_path, "e.json", "{not json"))


def test_parse_graph_examples(tmp_path):
    doc = {"nodes": [{"label": 0}, {"label": 1}, {"label": 0}], "edges": [[0, 1], [1, 2]]}
    g = formats.parse_graph(write(tmp_path, "g.json", doc))
    assert np.array_equal(g.structure, [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    with pytest.raises(ParseError):
        formats.parse_graph(write(tmp_path, "h.json", {**doc, "edges": [[0, 5]]}))
    g = formats.parse_graph(write(tmp_path, "i.json", {**doc, "structure": "adjacency"}))
    assert np.array_equal(g.structure, [[0, 1, 0], [1, 0, 1], [0, 1, 0]])


def test_json_round_trip_bit_exact(tmp_path, rng):
    mu = DiscreteMeasure(rng.standard_normal((7, 3)), rng.random(7))
    path = tmp_path / "m.json"
    formats.write_measure(mu, path)
    back = formats.parse_measure(path)
    assert np.array_equal(back.support, mu.support) and np.array_equal(back.weights, mu.weights)


def test_coupling_csv(tmp_path):
    P = np.array([[0.5, 1e-16], [0.0, 0.5]])
    path = tmp_path / "p.csv"
    assert formats.write_coupling(P, path) == 2
    assert path.read_text().splitlines()[0] == "i,j,mass"
    assert np.array_equal(formats.read_coupling(path, (2, 2)), [[0.5, 0], [0, 0.5]])


def test_w_two_diracs(tmp_path, capsys):
    a = write(tmp_path, "a.json", {"points": [[0]]})
    b = write(tmp_path, "b.json", {"points": [[3]]})
    assert run(["w", a, b, "--solver", "exact"]) == 0
    rep = report(capsys)
    assert rep["cost"] == 9.0 and rep["command"] == "w" and rep["runtime_ms"] >= 0


def test_fgw_alpha_zero_matches_w(tmp_path, capsys, rng):
    F1, F2 = rng.standard_normal((4, 2)), rng.standard_normal((4, 2))
    g1 = {"nodes": [{"features": list(f)} for f in F1], "edges": [[0, 1], [1, 2], [2, 3]]}
    g2 = {"nodes": [{"features": list(f)} for f in F2], "edges": [[0, 1], [0, 2], [0, 3]]}
    assert run(["fgw", write(tmp_path, "g1.json", g1), write(tmp_path, "g2.json", g2), "--alpha", "0"]) == 0
    c_fgw = report(capsys)["cost"]
    a = write(tmp_path, "a.json", {"points": F1.tolist()})
    b = write(tmp_path, "b.json", {"points": F2.tolist()})
    assert run(["w", a, b]) == 0
    assert abs(report(capsys)["cost"] - c_fgw) <= 1e-8


def test_exit_codes(tmp_path, capsys):
    a = write(tmp_path, "a.json", {"points": [[0]], "weights": [-1]})
    b = write(tmp_path, "b.json", {"points": [[1]]})
    assert run(["w", a, b]) == 2
    assert run(["w", write(tmp_path, "bad.json", "{"), b]) == 2
    assert run(["w", str(tmp_path / "missing.json"), b]) == 2


def test_emit_coupling_and_json(tmp_path, capsys):
    a = write(tmp_path, "a.json", {"points": [[0], [1]]})
    b = write(tmp_path, "b.json", {"points": [[0], [2]]})
    cp, js = tmp_path / "p.csv", tmp_path / "r.json"
    assert run(["w", a, b, "--emit-coupling", str(cp), "--emit-json", str(js)]) == 0
    rep = report(capsys)
    assert rep["coupling_path"] == str(cp)
    assert np.allclose(formats.read_coupling(cp, (2, 2)), np.eye(2) / 2)
    assert json.loads(js.read_text())["cost"] == rep["cost"]


def test_gen_sbm_deterministic(tmp_path, capsys):
    args = ["gen", "sbm", "--communities", "4", "--nodes", "30", "--seed", "1"]
    assert run(args) == 0
    first = capsys.readouterr().out
    assert run(args) == 0
    assert capsys.readouterr().out == first
    g = formats.parse_graph(write(tmp_path, "g.json", first))
    assert g.n == 30


def test_gen_examples(tmp_path, capsys):
    assert run(["gen", "blocks", "--n", "12", "--d", "9", "--g", "3", "--m", "3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    X, rows, cols = np.array(doc["matrix"]), np.array(doc["row_labels"]), np.array(doc["col_labels"])
    means = np.array(doc["block_means"])
    assert np.array_equal(X, means[rows][:, cols])
    assert run(["gen", "sbm", "--communities", "1", "--nodes", "8"]) == 0
    assert set(n["label"] for n in json.loads(capsys.readouterr().out)["nodes"]) == {0}
    for dim in (2, 3):
        assert run(["gen", "spiral", "--n", "100", "--dim", str(dim)]) == 0
        assert np.array(json.loads(capsys.readouterr().out)["points"]).shape == (100, dim)
    assert run(["gen", "blocks", "--g", "0"]) == 2


def test_solver_commands(tmp_path, capsys, rng):
    a = write(tmp_path, "a.json", {"points": rng.standard_normal((6, 2)).tolist()})
    b = write(tmp_path, "b.json", {"points": rng.standard_normal((6, 3)).tolist()})
    for cmd in (["gw", a, b], ["gw", a, b, "--solver", "entropic", "--epsilon", "5"], ["sgw", a, b],
                ["risgw", a, b], ["inner-gw", a, b], ["sq-gw", a, b], ["lgm", a, b],
                ["sinkhorn", a, b.replace("b.json", "a.json"), "--epsilon", "1.0"], ["barycenter", a, a, "--k", "3"]):
        assert run(cmd) == 0, cmd
        assert np.isfinite(report(capsys)["cost"])
    m = write(tmp_path, "m.json", {"matrix": rng.standard_normal((8, 4)).tolist()})
    for cmd in (["coot", m, m], ["cocluster", m, "--g", "2", "--m", "2"]):
        assert run(cmd) == 0
        assert np.isfinite(report(capsys)["cost"])


def test_bench_rows():
    rows = bench_rows("sgw", [1000, 10000], seed=3)
    assert [r[:2] for r in rows] == [("sgw", 1000), ("sgw", 10000)]
    assert [r[3] for r in rows] == [r[3] for r in bench_rows("sgw", [1000, 10000], seed=3)]
    rows = bench_rows("gw", [100], seed=0)
    assert {r[0] for r in rows} == {"fw", "entropic"} and all(np.isfinite(r[3]) for r in rows)


def test_bench_cli(capsys):
    assert run(["bench", "sgw", "--sizes", "100,200"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "solver,n,runtime_ms,cost" and len(lines) == 3
    assert run(["bench", "gw", "--sizes", "1000"]) == 2
