import numpy as np
import pytest

from vecgp.archive import (GEN_HEADER, format_fitness, generation_files, init_run_dir,
                           read_generation, read_kv, write_generation)
from vecgp.compiler import parse_expression, tree_from_expression
from vecgp.core import Config
from vecgp.errors import IoFailure
from vecgp.evolve import RunRngs, resolve_kernel, score_trees
from vecgp.generate import Population, gen_population


def test_two_runs_same_second_get_distinct_dirs(tmp_path):
    config = Config(archive_dir=str(tmp_path))
    a = init_run_dir(config, "abc")
    b = init_run_dir(config, "abc")
    assert a.root_dir != b.root_dir
    assert a.root_dir.parent == b.root_dir.parent == tmp_path


def test_config_snapshot_round_trip(tmp_path):
    config = Config(kernel="c", rng_seed=3, archive_dir=str(tmp_path), backend="scalar")
    archive = init_run_dir(config, "f00", seed=3, dataset_label="iris")
    assert Config.load(archive.config_file) == config
    manifest = read_kv(archive.manifest_file)
    assert manifest["seed"] == "3" and manifest["backend"] == "scalar"
    assert manifest["dataset_fingerprint"] == "f00" and manifest["start"]


def test_unwritable_archive_fails_fast(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(IoFailure):
        init_run_dir(Config(archive_dir=str(blocker / "sub")), "abc")


def test_fitness_formatting():
    assert format_fitness(3.0, 4) == "3.0000"
    assert format_fitness(0.1235, 4) == "0.1235"
    assert format_fitness(12.0, 0) == "12"


@pytest.fixture()
def scored_population(iris):
    config = Config(kernel="c", rng_seed=1)
    kernel = resolve_kernel("c", iris)
    pop = gen_population(config, iris.feature_names, RunRngs.from_seed(1).init)
    return config, Population(1, score_trees(pop.trees, iris, kernel, config))


def test_generation_file(tmp_path, iris, scored_population):
    config, pop = scored_population
    archive = init_run_dir(config.replace(archive_dir=str(tmp_path)), iris.fingerprint())
    archive = write_generation(archive, pop, config.precision)
    (path,) = archive.generation_files
    assert path.name == "gen_001.csv"
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(GEN_HEADER) and len(lines) == 101
    rows = read_generation(path)
    for row, tree in zip(rows, pop.trees):
        parse_expression(row["expression"], iris.feature_names)
        assert row["fitness"].split(".")[1].__len__() == 4
        assert int(row["id"]) == tree.id and int(row["depth"]) == tree.depth
    assert generation_files(archive.root_dir) == [path]
    assert archive.manifest["generations"] == "1"


def test_expression_quoting(tmp_path):
    tree = tree_from_expression("a*b", ("a", "b")).with_fitness(1.0)
    archive = init_run_dir(Config(archive_dir=str(tmp_path)), "x")
    archive = write_generation(archive, Population(1, (tree,)), 2)
    text = archive.generation_files[0].read_text()
    assert text.splitlines()[1] == '0,1,1,3,1.00,"(a)*(b)"'
