import csv
import io

import pytest

from conftest import MESH_LINKS, LADDER_LINKS
from slickpackets.cli import main


def edge_file(tmp_path, links, name="g.txt"):
    p = tmp_path / name
    p.write_text("".join(f"{u} {v}\n" for u, v in links))
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_trace_no_failure(tmp_path, capsys):
    topo = edge_file(tmp_path, MESH_LINKS)
    code, out, _ = run(capsys, "--topo", topo, "trace", "0", "6")
    assert code == 0
    assert "path: 0 1 2 5 6" in out
    assert "delivered at 6 latency=4" in out


def test_trace_mesh_switch(tmp_path, capsys):
    topo = edge_file(tmp_path, MESH_LINKS)
    for fmt in ("default", "direct"):
        code, out, _ = run(capsys, "--topo", topo, "--format", fmt, "trace", "0", "6", "--fail", "2-5")
        assert code == 0
        lines = out.splitlines()
        assert lines[2].startswith("hop 2 -> 4") and lines[2].endswith("mode=alternate")
        assert "path: 0 1 2 4 5 6" in out


def test_trace_pointer(tmp_path, capsys):
    topo = edge_file(tmp_path, LADDER_LINKS)
    code, out, _ = run(capsys, "--topo", topo, "forward", "0", "5", "--fail", "2-4", "--pointer")
    assert code == 0 and "latency=6" in out
    code, _, err = run(capsys, "--topo", topo, "--format", "direct", "forward", "0", "5", "--pointer")
    assert code == 2


@pytest.mark.parametrize("fails,at", [(["0-1", "2-1"], "2"), (["0-1", "0-3"], "0")])
def test_trace_drop(tmp_path, capsys, fails, at):
    topo = edge_file(tmp_path, [(0, 1), (1, 2), (2, 3), (3, 0)])
    code, out, _ = run(capsys, "--topo", topo, "trace", "0", "1", "--fail", *fails)
    assert code == 1
    assert f"dropped at {at}:" in out


def test_trace_bad_tokens(tmp_path, capsys):
    topo = edge_file(tmp_path, MESH_LINKS)
    assert run(capsys, "--topo", topo, "trace", "0", "6", "--fail", "05")[0] == 3
    assert run(capsys, "--topo", topo, "trace", "0", "6", "--fail", "0-6")[0] == 3
    assert run(capsys, "--topo", topo, "trace", "0", "6", "--fail-node", "6")[0] == 3
    assert run(capsys, "--topo", topo, "trace", "0", "99")[0] == 3


def test_usage_errors(tmp_path, capsys):
    assert run(capsys, "trace", "0", "1")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    assert run(capsys, "--topo", str(tmp_path / "missing.txt"), "fs", "0", "1")[0] == 3


def test_fs_command(tmp_path, capsys):
    topo = edge_file(tmp_path, LADDER_LINKS)
    code, out, _ = run(capsys, "fs", "0", "5", "--topo", topo)
    assert code == 0 and "1'" in out


def test_global_flags_before_and_after(tmp_path, capsys):
    topo = edge_file(tmp_path, LADDER_LINKS)
    _, before, _ = run(capsys, "--format", "direct", "--topo", topo, "encode", "0", "5")
    _, after, _ = run(capsys, "encode", "0", "5", "--topo", topo, "--format", "direct")
    assert before == after and "format: direct" in before and "bits: 64" in before


def test_encode_decode_golden(tmp_path, capsys):
    topo = edge_file(tmp_path, LADDER_LINKS)
    gold = tmp_path / "ladder.golden"
    code, out, _ = run(capsys, "--topo", topo, "encode", "0", "5", "--golden", str(gold))
    assert code == 0 and "bits: 51" in out and "bytes: 7" in out
    code, out, _ = run(capsys, "decode", "--golden", str(gold))
    assert code == 0
    assert "header_length: 34" in out
    assert "1: primary=01 alternate=10 1 10" in out
    assert "2: primary=1 alternate=0 10 1 10" in out
    hexline = [l for l in gold.read_text().splitlines() if l.startswith("hex:")][0].split()[1]
    code, out2, _ = run(capsys, "--topo", topo, "decode", "0", "--hex", hexline)
    assert code == 0 and out2.splitlines()[2:] == out.splitlines()[2:]


def test_decode_errors(tmp_path, capsys):
    topo = edge_file(tmp_path, LADDER_LINKS)
    assert run(capsys, "--topo", topo, "decode", "0")[0] == 2
    assert run(capsys, "--topo", topo, "decode", "0", "--hex", "zz")[0] == 3
    assert run(capsys, "--topo", topo, "decode", "0", "--hex", "07ff")[0] == 3


def test_sizes_triangle(triangle_file, capsys):
    code, out, _ = run(capsys, "--topo", str(triangle_file), "eval", "sizes")
    assert code == 0
    rows = list(csv.DictReader(l for l in out.splitlines() if not l.startswith("#")))
    assert len(rows) == 6
    for r in rows:
        assert int(r["default_bytes"]) >= 3
        assert int(r["fs_edges"]) >= int(r["lb_edges"])


def test_stretch_csv_deterministic(tmp_path, capsys):
    topo = edge_file(tmp_path, [(i, (i + 1) % 6) for i in range(6)] + [(0, 3)])
    outs = []
    for i in range(2):
        path = tmp_path / f"s{i}.csv"
        code, _, _ = run(capsys, "--topo", topo, "--seed", "5", "--preset", "flat",
                         "eval", "stretch", "--out", str(path))
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    rows = list(csv.DictReader(io.StringIO("\n".join(
        l for l in outs[0].decode().splitlines() if not l.startswith("#")))))
    fast = [r["mean_stretch"] for r in rows if r["scheme"] == "fast-sp"]
    flooded = [r["mean_stretch"] for r in rows if r["scheme"] == "flooded-sp"]
    assert fast == flooded
    assert all(float(r["max_stretch"]) <= 3 for r in rows if r["scheme"] != "fast-vsr")


def test_stretch_warnings(tmp_path, capsys):
    line = edge_file(tmp_path, [(0, 1), (1, 2)])
    code, out, err = run(capsys, "--topo", line, "eval", "stretch")
    assert code == 0 and "no qualified triples" in err
    ring = edge_file(tmp_path, [(i, (i + 1) % 5) for i in range(5)], "ring.txt")
    code, out, err = run(capsys, "--topo", ring, "eval", "stretch", "--horizon", "3")
    assert code == 0 and "horizon below" in err and "# warning:" in out


def test_stretch_param_override(tmp_path, capsys):
    ring = edge_file(tmp_path, [(i, (i + 1) % 5) for i in range(5)])
    code, out, _ = run(capsys, "--topo", ring, "eval", "stretch", "--t0", "3", "--D", "1/2", "--d-r", "0")
    assert code == 0 and "t0=3 D=1/2 d_r=0" in out
    with pytest.raises(SystemExit):
        main(["--topo", ring, "eval", "stretch", "--D", "-1"])


def test_bounds_command(tmp_path, capsys):
    g = tmp_path / "w.txt"
    code, out, _ = run(capsys, "bounds", "4", "--emit-graph", str(g))
    assert code == 0 and "weighted_bound: 9" in out and "tight: yes" in out
    code, out, _ = run(capsys, "bounds", "3", "--unweighted")
    assert "unweighted_bound: 8" in out and "witness_fs_edges: 8" in out
    code, out, _ = run(capsys, "--topo", str(g), "fs", "0", "4")
    assert code == 0
    assert run(capsys, "bounds", "0")[0] == 2
