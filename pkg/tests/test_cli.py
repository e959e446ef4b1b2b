import json

import networkx as nx
import pytest

from treesos.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_matches_networkx(capsys):
    code, out, _ = run(capsys, "gen", "--kind", "balanced-bipartite", "--k", "4")
    assert code == 0
    assert out.strip() == nx.to_graph6_bytes(nx.complete_bipartite_graph(3, 3), header=False).decode().strip()


def test_embed_report(tmp_path, capsys):
    path = tmp_path / "g.txt"
    main(["gen", "--kind", "clique", "--k", "6", "--format", "edgelist"])
    path.write_text(capsys.readouterr().out)
    code, out, _ = run(capsys, "embed", "--graph", str(path), "--k", "5", "--Delta", "5")
    rep = json.loads(out)
    assert code == 0 and rep["all_ok"] and len(rep["results"]) == 6
    assert "mapping" not in rep["results"][0]


def test_embed_failure_exit_code(tmp_path, capsys):
    path = tmp_path / "g.txt"
    main(["gen", "--kind", "clique", "--k", "5"])
    path.write_text(capsys.readouterr().out)
    code, out, _ = run(capsys, "embed", "--graph", str(path), "--k", "5", "--Delta", "2")
    assert code == 1 and not json.loads(out)["all_ok"]


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["embed", "--graph", "/nonexistent", "--k", "3", "--Delta", "3"],
    ["verify", "--nmax", "9"],
    ["ramsey", "--ell", "1", "--k", "3", "--Delta", "2"],
    ["embed", "--graph", "-", "--eps", "0"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 2


def test_bad_graph_input(tmp_path, capsys):
    path = tmp_path / "bad.g6"
    path.write_text("not a graph\n")
    assert main(["embed", "--graph", str(path), "--k", "2", "--Delta", "2"]) == 2


def test_reports_are_byte_identical(capsys):
    argvs = [["verify", "--nmax", "5"], ["ramsey", "--ell", "2", "--k", "3", "--Delta", "2", "--samples", "20"],
             ["selftest", "--instances", "10"]]
    for argv in argvs:
        first = run(capsys, *argv)
        second = run(capsys, *argv)
        assert first == second
        assert first[0] == 0


def test_timing_is_opt_in(capsys):
    _, out, _ = run(capsys, "verify", "--nmax", "3")
    assert "runtime" not in json.loads(out)
    _, out, _ = run(capsys, "verify", "--nmax", "3", "--timing")
    assert float(json.loads(out)["runtime"]) >= 0
