"""CLI behaviour and the exit-code contract (0 ok, 1 violation, 2 usage)."""

import shutil
from pathlib import Path

import pytest

from fieldcalc.cli import main
from fieldcalc.corpus import corpus_dir


@pytest.fixture
def workdir(tmp_path):
    return tmp_path


def fc_path(name: str) -> str:
    return str(corpus_dir() / f"{name}.fc")


def scen_path(name: str) -> str:
    return str(corpus_dir() / f"{name}.scenario.yaml")


class TestParse:
    def test_valid_file_prints_core_form(self, capsys):
        assert main(["parse", fc_path("hopcount")]) == 0
        out = capsys.readouterr().out
        assert "def hopcount(source)" in out
        assert "rep (infinity)" in out

    def test_syntax_error_exits_2(self, workdir, capsys):
        bad = workdir / "bad.fc"
        bad.write_text("def f(x){x} 1 +")
        assert main(["parse", str(bad)]) == 2
        assert "syntax" in capsys.readouterr().err

    def test_missing_file_exits_2(self, workdir):
        assert main(["parse", str(workdir / "absent.fc")]) == 2

    def test_desugared_output(self, workdir, capsys):
        src = workdir / "p.fc"
        src.write_text("let x = 1 in [x, 2]")
        assert main(["parse", str(src)]) == 0
        out = capsys.readouterr().out
        assert "_let0" in out and "Tuple" in out


class TestRun:
    def test_writes_trace(self, workdir):
        out = workdir / "trace.txt"
        code = main(["run", "--scenario", scen_path("hopcount"),
                     "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines, "trace must not be empty"
        assert all(len(line.split("\t")) == 5 for line in lines)

    def test_byte_identical_reruns(self, workdir):
        a, b = workdir / "a.txt", workdir / "b.txt"
        for target in (a, b):
            assert main(["run", "--scenario", scen_path("longest-chain"),
                         "--out", str(target)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_seed_override_changes_loss_outcomes_not_exit_code(self, workdir):
        a, b = workdir / "a.txt", workdir / "b.txt"
        assert main(["run", "--scenario", scen_path("longest-chain"),
                     "--seed", "101", "--out", str(a)]) == 0
        assert main(["run", "--scenario", scen_path("longest-chain"),
                     "--seed", "202", "--out", str(b)]) == 0
        assert a.read_bytes() != b.read_bytes()

    def test_dump_events(self, workdir):
        out = workdir / "t.txt"
        assert main(["run", "--scenario", scen_path("hopcount"),
                     "--out", str(out), "--dump-events"]) == 0
        events = Path(str(out) + ".events").read_text().splitlines()
        assert any(line.startswith("event\t") for line in events)
        assert any(line.startswith("edge\t") for line in events)

    def test_dump_exports(self, workdir):
        out = workdir / "t.txt"
        assert main(["run", "--scenario", scen_path("hopcount"),
                     "--out", str(out), "--dump-exports"]) == 0
        exports = Path(str(out) + ".exports").read_text().splitlines()
        assert all(line.startswith("export\t") for line in exports)
        assert len(exports) == 4 * 8  # four devices, eight rounds

    def test_text_format(self, workdir, capsys):
        assert main(["run", "--scenario", scen_path("hopcount"),
                     "--format", "text"]) == 0
        out = capsys.readouterr().out
        assert "round" in out

    def test_bad_scenario_exits_2(self, workdir, capsys):
        bad = workdir / "bad.yaml"
        bad.write_text("topology: {type: grid, width: 2, height: 1}\n")
        assert main(["run", "--scenario", str(bad)]) == 2

    def test_rounds_override(self, workdir):
        out = workdir / "t.txt"
        assert main(["run", "--scenario", scen_path("hopcount"),
                     "--rounds", "2", "--out", str(out)]) == 0
        fires = [l for l in out.read_text().splitlines() if "\tfire\t" in l]
        assert len(fires) == 8  # four devices, two rounds each

    def test_set_override(self, workdir, capsys):
        src = workdir / "p.fc"
        src.write_text("K + J")
        scen = workdir / "s.yaml"
        scen.write_text(f"""
program: {src}
seed: 1
stop: {{rounds: 1}}
topology: {{type: grid, width: 1, height: 1}}
constants: {{K: 1, J: 1}}
""")
        assert main(["run", "--scenario", str(scen),
                     "--set", "K=40", "--set", "J=2"]) == 0
        assert "\t42" in capsys.readouterr().out

    def test_hopcount_line_trace_ends_with_distances(self, capsys):
        assert main(["run", "--scenario", scen_path("hopcount"),
                     "--rounds", "6"]) == 0
        out = capsys.readouterr().out
        finals = {}
        for line in out.splitlines():
            cols = line.split("\t")
            if cols[3] == "fire":
                finals[cols[1]] = cols[4]
        assert finals == {"@0": "0", "@1": "1", "@2": "2", "@3": "3"}


class TestCheck:
    def test_passing_entry_exit_0(self, capsys):
        assert main(["check", "hopcount"]) == 0
        assert "verdict\tpass" in capsys.readouterr().out

    def test_mutated_entry_exit_1(self, workdir, capsys):
        # mutate minHood to maxHood and check via an explicit metadata path
        name = "hopcount"
        for suffix in (".fc", ".scenario.yaml", ".meta.yaml"):
            shutil.copy(corpus_dir() / f"{name}{suffix}",
                        workdir / f"{name}{suffix}")
        mutated = (workdir / f"{name}.fc").read_text().replace(
            "minHood", "maxHood", 1)
        (workdir / f"{name}.fc").write_text(mutated)
        code = main(["check", str(workdir / f"{name}.meta.yaml")])
        assert code == 1
        out = capsys.readouterr().out
        assert "verdict\tfail" in out
        assert "first-divergence" in out

    def test_unknown_entry_exit_2(self, capsys):
        assert main(["check", "nonexistent-entry"]) == 2

    def test_usage_error_exit_2(self):
        assert main(["frobnicate"]) == 2
