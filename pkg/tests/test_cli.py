"""Command line contract: exit codes, determinism, config precedence."""

import json

import pytest

from freewalk import CheckResult, WeightedGraph
from freewalk.cli import main
from freewalk.config import RunConfig, load_config, merge_config
from freewalk.verify import SUITES


@pytest.fixture()
def k4_file(tmp_path):
    g = WeightedGraph(4, [(u, v, 1.0) for u in range(4)
                          for v in range(u + 1, 4)])
    p = tmp_path / "k4.json"
    p.write_text(json.dumps(g.to_json()))
    return str(p)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestConfig:
    def test_load_and_merge(self, tmp_path):
        p = tmp_path / "run.toml"
        p.write_text('graph = "regular_tree"\nlevel = 5\nseed = 3\n'
                     '[params]\nb = 3\n')
        cfg = load_config(p)
        assert cfg.graph == "regular_tree"
        assert cfg.level == 5
        merged = merge_config(cfg, {"level": 2, "seed": None,
                                    "params": {"b": 4}})
        # Explicit overrides win; None overrides are dropped.
        assert merged.level == 2
        assert merged.seed == 3
        assert merged.params == {"b": 4}

    def test_unknown_keys_rejected(self, tmp_path):
        p = tmp_path / "run.toml"
        p.write_text('graf = "typo"\n')
        with pytest.raises(ValueError, match="unknown"):
            load_config(p)
        with pytest.raises(ValueError, match="unknown"):
            merge_config(RunConfig(), {"graf": 1})

    def test_validation(self):
        with pytest.raises(ValueError):
            RunConfig(level=0)
        with pytest.raises(ValueError):
            RunConfig(rate_growth=-1.0)
        with pytest.raises(ValueError):
            RunConfig(hm_level=0)


class TestExitCodes:
    def test_usage_errors_exit_one(self, capsys):
        assert main(["walk", "simulate", "--graph", "binary_tree",
                     "--start", "1", "--stop-steps", "5"]) == 1  # no seed
        capsys.readouterr()
        assert main(["nonsense"]) == 1
        capsys.readouterr()
        assert main(["harmonic", "--graph", "no_such_family",
                     "--targets", "1", "--viewpoints", "2"]) == 1
        capsys.readouterr()
        assert main(["embed", "--map", "dodecahedron"]) == 1
        capsys.readouterr()

    def test_numerical_failure_exits_two(self, capsys):
        # Harmonic measure on the recurrent plane never settles.
        from freewalk import zoo_oracle
        o = zoo_oracle("lattice_zd", d=2)
        r, nbr = o.root, [int(k) for k in o.neighbors(o.root)[0]]
        code, _, err = run(["harmonic", "--graph", "lattice_zd",
                            "--param", "d=2",
                            "--targets", f"{r},{nbr[0]}",
                            "--viewpoints", str(nbr[1])], capsys)
        assert code == 2
        assert "numerical failure" in err

    def test_verification_failure_exits_three(self, capsys, monkeypatch):
        def doomed(seed):
            return [CheckResult("doomed", "always-fails", False, 1.0, 0.0,
                                "<=", "synthetic", 0.0)]

        monkeypatch.setitem(SUITES, "doomed", doomed)
        code, out, _ = run(["verify", "--seed", "1", "--suite", "doomed"],
                           capsys)
        assert code == 3
        assert "[FAIL] doomed/always-fails" in out

    def test_success_exits_zero(self, capsys):
        code, out, _ = run(["zoo"], capsys)
        assert code == 0
        assert "regular_tree" in out


class TestCommands:
    def test_forest_exact_lists_sixteen_trees(self, k4_file, capsys):
        code, out, _ = run(["forest", "exact", "--graph", k4_file], capsys)
        assert code == 0
        data = json.loads(out)
        assert data["n_trees"] == 16
        assert len(data["trees"]) == 16
        assert all(len(t["edges"]) == 3 for t in data["trees"])
        assert sum(t["prob"] for t in data["trees"]) == pytest.approx(1.0)

    def test_harmonic_row(self, capsys):
        code, out, _ = run(["harmonic", "--graph", "regular_tree",
                            "--param", "b=3", "--targets", "2,3,9",
                            "--viewpoints", "4"], capsys)
        assert code == 0
        row = json.loads(out)["rows"]["4"]
        assert row == pytest.approx([0.2, 0.2, 0.6], abs=1e-9)

    def test_walk_simulate_emits_json_lines(self, capsys):
        code, out, _ = run(["walk", "simulate", "--graph", "binary_tree",
                            "--level", "3", "--start", "1",
                            "--stop-steps", "8", "--seed", "5"], capsys)
        assert code == 0
        lines = [json.loads(l) for l in out.splitlines()]
        assert lines[-1]["type"] == "summary"
        assert lines[-1]["transitions"] == 8
        assert all(l["type"] in ("visit", "pass", "summary") for l in lines)

    def test_gff_csv_shape(self, capsys):
        code, out, _ = run(["gff", "--graph", "binary_tree",
                            "--absorbing", "1", "--window", "2,3",
                            "--replicas", "5", "--seed", "2"], capsys)
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "v2,v3"
        assert len(lines) == 6

    def test_verify_reports_are_deterministic(self, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for path in (a, b):
            code, _, _ = run(["verify", "--seed", "7", "--suite",
                              "tutte-embedding", "--output", str(path)],
                             capsys)
            assert code == 0
        assert a.read_bytes() == b.read_bytes()
        report = json.loads(a.read_text())
        assert report["seed"] == 7
        assert all("seconds" not in r for r in report["results"])

    def test_thread_count_does_not_change_output(self, tmp_path, capsys):
        outs = []
        for threads in ("1", "3"):
            code, out, _ = run(["forest", "sample", "--graph", "binary_tree",
                                "--level", "3", "--seed", "11",
                                "--replicas", "9", "--threads", threads],
                               capsys)
            assert code == 0
            outs.append(out)
        assert outs[0] == outs[1]

    def test_embed_svg_bytes_stable(self, tmp_path, capsys):
        svgs = []
        for name in ("a.svg", "b.svg"):
            path = tmp_path / name
            code, _, _ = run(["embed", "--map", "wheel:8", "--svg", str(path),
                              "--output", str(tmp_path / "e.json")], capsys)
            assert code == 0
            svgs.append(path.read_bytes())
        assert svgs[0] == svgs[1]

    def test_lattice_kernel_needs_pinned_truncation(self, tmp_path, capsys):
        # Without hm_level the shell-row escalation on Z^3 cannot reach
        # tolerance; the flag (or config key) pins it.
        args = ["forest", "sample", "--graph", "lattice_zd", "--param", "d=3",
                "--level", "1", "--replicas", "2", "--seed", "8"]
        code, out, _ = run(args + ["--hm-level", "4"], capsys)
        assert code == 0
        lines = [json.loads(l) for l in out.splitlines()]
        assert len(lines) == 2
        assert all(l["n_components"] == 1 + len(l["via_infinity"])
                   for l in lines)
        cfgfile = tmp_path / "lat.toml"
        cfgfile.write_text('hm_level = 4\n')
        code, out2, _ = run(args + ["--config", str(cfgfile)], capsys)
        assert code == 0
        assert out2 == out

    def test_config_file_with_flag_override(self, tmp_path, capsys):
        p = tmp_path / "cfg.toml"
        p.write_text('graph = "regular_tree"\n[params]\nb = 3\n')
        code, out, _ = run(["harmonic", "--config", str(p),
                            "--targets", "2,3,9", "--viewpoints", "4"],
                           capsys)
        assert code == 0
        assert json.loads(out)["rows"]["4"] == pytest.approx([0.2, 0.2, 0.6])
