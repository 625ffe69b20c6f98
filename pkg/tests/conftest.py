"""Shared fixtures: tiny corpora on disk and a once-trained small workspace."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from synth import make_planted_corpus  # noqa: E402

from geocross import stages  # noqa: E402

TINY_LINES = [
    "1407000000\t34.05\t-118.25\tbeach sunset beach",
    "1407000100\t34.05\t-118.25\tbeach volleyball",
    "1407003600\t34.40\t-118.60\thome dinner",
    "1407003700\t34.40\t-118.60\thome coffee dinner",
    "1407007200\t34.05\t-118.25\tsunset surf",
    "not-a-time\t34.0\t-118.0\tbroken",
    "1407000000\t95.0\t-118.0\tbad latitude",
]


@pytest.fixture
def tiny_corpus(tmp_path: Path) -> Path:
    path = tmp_path / "tiny.tsv"
    path.write_text("\n".join(TINY_LINES) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def stopword_file(tmp_path: Path) -> Path:
    path = tmp_path / "stop.txt"
    path.write_text("the\nand\na\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def small_planted(tmp_path_factory) -> object:
    """A small planted corpus written once per session."""
    root = tmp_path_factory.mktemp("planted-small")
    return make_planted_corpus(
        root / "corpus.tsv",
        n_records=1500,
        n_loc=3,
        n_time=2,
        n_noise_words=30,
        n_signal_words=6,
        seed=777,
    )


@pytest.fixture(scope="session")
def trained_workspace(tmp_path_factory, small_planted) -> dict:
    """Full pipeline over the small planted corpus, shared by query/service/CLI tests."""
    workdir = tmp_path_factory.mktemp("workspace")
    outcome = stages.stage_pipeline(
        small_planted.path,
        workdir,
        vocab_k=100,
        min_freq=1,
        loc_bandwidth=0.05,
        time_bandwidth=1000.0,
        metapath="W-W-L-W-W",
        num_walks=8,
        walk_length=15,
        dim=16,
        window=5,
        negatives=4,
        epochs=3,
        seed=11,
    )
    return {"outcome": outcome, "files": outcome.files, "corpus": small_planted}
