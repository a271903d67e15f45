import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from moswarm.config import TrainConfig  # noqa: E402
from moswarm.trainer import train  # noqa: E402


@pytest.fixture(scope="session")
def trained():
    """The default-config training run (3 robots, 20,000 evaluations, seed 0)."""
    cfg = TrainConfig()
    return cfg, train(cfg)


@pytest.fixture(scope="session")
def trained_genome_file(trained, tmp_path_factory):
    from moswarm.trainer import save_genome

    cfg, res = trained
    path = tmp_path_factory.mktemp("genome") / "genome.json"
    save_genome(path, res.best_genome, cfg.network, res.best_fitness)
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
