import io
import re

import pytest

from vecgp.archive import generation_files, read_kv
from vecgp.cli import (EXIT_DATA, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, InvalidValue, MissingData,
                       Mode, UnknownFlag, main, parse_args)
from vecgp.core import Backend, Config
from vecgp.evolve import run_evolution
from vecgp.interactive import interactive_loop


def test_defaults_with_only_data():
    cmd = parse_args(["--data", "iris"])
    assert cmd.mode is Mode.RUN and cmd.data == "iris"
    c = cmd.config
    assert (c.tree_depth_base, c.tree_depth_max, c.min_nodes, c.tree_pop_max,
            c.tournament_size, c.generation_max, c.precision) == (5, 5, 3, 100, 10, 30, 4)
    assert (c.op_reproduction, c.op_mutation, c.op_crossover) == (0.1, 0.2, 0.7)


def test_bad_fraction_sum_names_the_flags():
    with pytest.raises(InvalidValue) as err:
        parse_args(["--data", "iris", "--repro", "0.5", "--mutate", "0.5", "--cross", "0.5"])
    assert "--cross" in err.value.flag


def test_backend_and_workers():
    cmd = parse_args(["--backend", "vector", "--workers", "1", "--data", "d.csv"])
    assert cmd.config.backend is Backend.VECTOR and cmd.config.workers == 1


def test_modes():
    assert parse_args(["bench", "--data", "x", "--runs", "3"]).mode is Mode.BENCH
    assert parse_args(["run", "--interactive", "--data", "x"]).mode is Mode.INTERACTIVE
    with pytest.raises(InvalidValue):
        parse_args(["bench", "--interactive", "--data", "x"])


def test_unknown_flag_and_missing_data():
    with pytest.raises(UnknownFlag):
        parse_args(["--data", "x", "--bogus"])
    with pytest.raises(MissingData):
        parse_args(["--pop", "10"])
    with pytest.raises(InvalidValue):
        parse_args(["--data", "x", "--pop", "ten"])
    with pytest.raises(InvalidValue):
        parse_args(["--data", "x", "--tourn", "0"])


def test_main_exit_codes(tmp_path, capsys):
    archive = str(tmp_path / "runs")
    assert main(["--data", "kepler", "--pop", "10", "--gens", "2", "--tourn", "3",
                 "--seed", "1", "--archive", archive]) == EXIT_OK
    out = capsys.readouterr().out
    assert re.search(r"best fitness: \S+", out) and "best expression:" in out
    assert len(list((tmp_path / "runs").iterdir())) == 1

    assert main(["--data", str(tmp_path / "missing.csv")]) == EXIT_DATA
    bad = tmp_path / "bad.csv"
    bad.write_text("a,s\n1,2\n3\n")
    assert main(["--data", str(bad)]) == EXIT_DATA
    assert main(["--data", "kepler", "--bogus"]) == EXIT_USAGE
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert main(["--data", "kepler", "--gens", "1", "--pop", "10", "--tourn", "2",
                 "--archive", str(blocker / "x")]) == EXIT_RUNTIME


def test_main_bench_writes_report(tmp_path, capsys):
    rc = main(["bench", "--data", "kepler", "--runs", "2", "--pop", "10", "--gens", "2",
               "--tourn", "3", "--seed", "3", "--archive", str(tmp_path)])
    assert rc == EXIT_OK
    assert (tmp_path / "report.csv").exists() and (tmp_path / "report.md").exists()
    assert "scalar/1" in capsys.readouterr().out


# -- interactive ------------------------------------------------------------

def cfg(tmp_path, name, **kw):
    base = dict(tree_pop_max=12, tournament_size=3, generation_max=6, rng_seed=21,
                archive_dir=str(tmp_path / name))
    base.update(kw)
    return Config(**base)


def scripted(lines):
    feed = iter(lines)

    def input_fn(prompt):
        try:
            return next(feed)
        except StopIteration:
            raise EOFError from None
    return input_fn


def archive_bytes(result):
    return [p.read_bytes() for p in generation_files(result.archive.root_dir)]


def test_quit_keeps_archive(tmp_path, kepler):
    result = interactive_loop(cfg(tmp_path, "q", generation_max=30), kepler,
                              input_fn=scripted(["c 4", "q"]), out=io.StringIO())
    assert len(generation_files(result.archive.root_dir)) == 5
    assert read_kv(result.archive.manifest_file)["status"] == "quit"


def test_raising_generation_max_continues(tmp_path, kepler):
    result = interactive_loop(cfg(tmp_path, "g", generation_max=3), kepler,
                              input_fn=scripted(["c", "g 5", "c", "c"]), out=io.StringIO())
    assert len(generation_files(result.archive.root_dir)) == 5
    assert Config.load(result.archive.config_file).generation_max == 5


def test_rejected_edit_keeps_config(tmp_path, kepler):
    out = io.StringIO()
    result = interactive_loop(cfg(tmp_path, "o"), kepler,
                              input_fn=scripted(["o 0.5 0.5 0.5", "t 0", "c"]), out=out)
    assert out.getvalue().count("rejected") == 2
    assert result.config == cfg(tmp_path, "o")


@pytest.mark.parametrize("script", [
    [],  # EOF immediately: unattended fallback
    ["c"],
    ["d silent", "c 2", "d full", "c 1", "d debug", "b", "p", "d timer", "c"],
])
def test_display_and_pauses_do_not_change_results(tmp_path, kepler, script):
    server = run_evolution(cfg(tmp_path, "server"), kepler)
    attended = interactive_loop(cfg(tmp_path, "menu"), kepler,
                                input_fn=scripted(script), out=io.StringIO())
    assert archive_bytes(attended) == archive_bytes(server)
    assert [t.root for t in attended.population] == [t.root for t in server.population]


def test_terminal_failure_falls_back(tmp_path, kepler):
    def broken(prompt):
        raise OSError("terminal gone")
    result = interactive_loop(cfg(tmp_path, "b"), kepler, input_fn=broken, out=io.StringIO())
    assert result.population.generation == 6
    assert read_kv(result.archive.manifest_file)["status"] == "complete"
