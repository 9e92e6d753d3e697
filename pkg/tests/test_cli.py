"""CLI subcommands, config plumbing, artifacts and exit codes."""

import math

import numpy as np
import pytest

from qagent import cli, defaults, pqc


def run(argv):
    return cli.main(argv)


class TestTrainCommand:
    def test_artifacts_and_determinism(self, tmp_path, capsys):
        argv = ["train", "chsh", "--out", str(tmp_path),
                "epochs=5", "seed=3", "init_scale=0.2"]
        assert run(argv) == 0
        out1 = capsys.readouterr().out
        assert "final_reward=" in out1
        log = (tmp_path / "chsh.log").read_text()
        assert log.splitlines()[0].startswith("epoch=0 reward=")
        assert len(log.splitlines()) == 6
        params = (tmp_path / "chsh.params").read_text()
        assert len(params.split()) == defaults.get("chsh").build().n_params
        summary = (tmp_path / "chsh.summary").read_text()
        assert "task=chsh" in summary and "payoff_a=" in summary
        for part in ("shared", "alice", "bob"):
            assert (tmp_path / f"chsh.{part}.circuit").exists()

        # identical run produces identical bytes
        first = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
        assert run(argv) == 0
        second = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
        assert first == second

    def test_config_file_and_override(self, tmp_path, capsys):
        cfgfile = tmp_path / "c.cfg"
        cfgfile.write_text("epochs=4\nseed=9  # comment\n")
        assert run(["train", "chsh", "--out", str(tmp_path / "r"),
                    "--config", str(cfgfile), "seed=2"]) == 0
        capsys.readouterr()
        summary = (tmp_path / "r" / "chsh.summary").read_text()
        assert "epochs=4" in summary
        assert "seed=2" in summary  # command line wins over file

    def test_unknown_task_exit_2(self, capsys):
        assert run(["train", "nope", "epochs=1"]) == 2

    def test_bad_key_exit_2(self, tmp_path, capsys):
        assert run(["train", "chsh", "--out", str(tmp_path),
                    "banana=1"]) == 2

    def test_bad_value_exit_2(self, tmp_path, capsys):
        assert run(["train", "chsh", "--out", str(tmp_path),
                    "epochs=soon"]) == 2


class TestEvalCommand:
    def test_eval_roundtrip(self, tmp_path, capsys):
        run(["train", "chsh", "--out", str(tmp_path), "epochs=3"])
        capsys.readouterr()
        assert run(["eval", "chsh", "--params",
                    str(tmp_path / "chsh.params")]) == 0
        out = capsys.readouterr().out
        assert "reward=" in out and "payoff_a=" in out

    def test_length_mismatch_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "p.txt"
        bad.write_text("0.0 0.0\n")
        assert run(["eval", "chsh", "--params", str(bad)]) == 2

    def test_missing_file_exit_1(self, tmp_path, capsys):
        assert run(["eval", "chsh", "--params",
                    str(tmp_path / "absent.txt")]) == 1


class TestReportCommand:
    def test_table(self, tmp_path, capsys):
        run(["train", "chsh", "--out", str(tmp_path), "epochs=3"])
        capsys.readouterr()
        assert run(["report", "--dir", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        assert "task" in out and "optimal" in out
        assert "chsh" in out and "payoff_a" in out

    def test_empty_dir_exit_1(self, tmp_path, capsys):
        assert run(["report", "--dir", str(tmp_path)]) == 1


class TestAnalyzeCommand:
    def test_qft_analysis(self, tmp_path, capsys):
        from qagent import analysis
        c = analysis.general_qft_circuit(3)
        f = tmp_path / "qft.circuit"
        f.write_text(pqc.render(c, np.zeros(0)))
        assert run(["analyze", "--circuit", str(f), "--target", "qft",
                    "--qasm", str(tmp_path / "out.qasm")]) == 0
        out = capsys.readouterr().out
        fid = [l for l in out.splitlines()
               if l.startswith("mean_basis_fidelity=")][0]
        assert float(fid.split("=")[1]) == pytest.approx(1.0, abs=1e-10)
        qasm_text = (tmp_path / "out.qasm").read_text()
        assert qasm_text.startswith("OPENQASM 2.0;")

    def test_prune_roundtrip(self, tmp_path, capsys):
        c = pqc.build_policy(2)
        f = tmp_path / "c.circuit"
        f.write_text(pqc.render(c, np.zeros(c.n_params)))
        out_f = tmp_path / "pruned.circuit"
        assert run(["analyze", "--circuit", str(f), "--prune", "1e-3",
                    "--out", str(out_f)]) == 0
        pruned, pp = pqc.parse(out_f.read_text())
        assert len(pruned.gates) == 0

    def test_missing_circuit_exit_1(self, tmp_path, capsys):
        assert run(["analyze", "--circuit", str(tmp_path / "x")]) == 1


class TestDefaultsCommand:
    def test_single_task(self, capsys):
        assert run(["defaults", "qft4"]) == 0
        out = capsys.readouterr().out
        assert "epochs=300" in out and "learning_rate=0.3" in out

    def test_all_tasks(self, capsys):
        assert run(["defaults"]) == 0
        out = capsys.readouterr().out
        for name in defaults.TASKS:
            assert f"# {name}:" in out

    def test_unknown_task(self, capsys):
        assert run(["defaults", "zzz"]) == 2
