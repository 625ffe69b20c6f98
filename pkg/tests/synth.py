"""Synthetic planted-pattern corpora for end-to-end tests.

Records are drawn from a grid of (location blob, time blob) cells. Signal
words appear exclusively inside their own cell; noise words are uniform over
everything. Retrieval quality on the signal words is then known ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

BASE_EPOCH = 1_400_000_000 - (1_400_000_000 % 86400)  # midnight-aligned


@dataclass(frozen=True)
class PlantedCorpus:
    path: str
    loc_centers: np.ndarray  # (n_loc, 2) lat/lon
    time_centers: np.ndarray  # (n_time,) seconds within the day
    signal_words: dict[str, tuple[int, int]]  # word -> (loc blob, time blob)
    loc_of_blob: dict[int, tuple[float, float]]


def _loc_grid(n_loc: int) -> np.ndarray:
    # lat/lon grid with 0.4 degree spacing, comfortably > 5 * 0.05 bandwidth
    cols = int(np.ceil(np.sqrt(n_loc)))
    centers = []
    for i in range(n_loc):
        centers.append((34.0 + 0.4 * (i // cols), -118.6 + 0.4 * (i % cols)))
    return np.array(centers)


def make_planted_corpus(
    path: str | Path,
    n_records: int = 10000,
    n_loc: int = 5,
    n_time: int = 4,
    n_noise_words: int = 180,
    n_signal_words: int = 20,
    signal_prob: float = 0.8,
    noise_per_record: int = 3,
    loc_sigma: float = 0.01,
    time_sigma: float = 900.0,
    seed: int = 12345,
) -> PlantedCorpus:
    """Corpus over n_loc x n_time cells with one signal word per chosen cell."""
    rng = np.random.default_rng(seed)
    loc_centers = _loc_grid(n_loc)
    time_centers = np.linspace(0, 86400, n_time, endpoint=False) + 10800.0  # 3h, then evenly
    noise = [f"zz{i:03d}" for i in range(n_noise_words)]
    cells = [(i, j) for i in range(n_loc) for j in range(n_time)]
    signal_words = {f"sig{c[0]}x{c[1]}": c for c in cells[:n_signal_words]}
    by_cell = {c: w for w, c in signal_words.items()}

    lines = []
    for _ in range(n_records):
        i = int(rng.integers(0, n_loc))
        j = int(rng.integers(0, n_time))
        lat, lon = loc_centers[i] + rng.normal(0, loc_sigma, 2)
        tod = (time_centers[j] + rng.normal(0, time_sigma)) % 86400
        day = int(rng.integers(0, 90))
        ts = BASE_EPOCH + day * 86400 + int(tod)
        words = [noise[k] for k in rng.choice(n_noise_words, noise_per_record, replace=False)]
        sig = by_cell.get((i, j))
        if sig is not None and rng.random() < signal_prob:
            words.append(sig)
        lines.append(f"{ts}\t{lat:.6f}\t{lon:.6f}\t{' '.join(words)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return PlantedCorpus(
        path=str(path),
        loc_centers=loc_centers,
        time_centers=time_centers,
        signal_words=signal_words,
        loc_of_blob={i: tuple(loc_centers[i]) for i in range(n_loc)},
    )


@dataclass(frozen=True)
class PairedCorpus:
    path: str
    loc_centers: np.ndarray
    time_centers: np.ndarray
    signal_words: dict[str, int]  # word -> loc blob
    partner: dict[int, int]  # loc blob -> time-linked partner blob
    time_of_blob: dict[int, int]  # loc blob -> time blob


def make_time_linked_corpus(
    path: str | Path,
    n_records: int = 10000,
    n_pairs: int = 3,
    words_per_blob: int = 4,
    n_noise_words: int = 120,
    signal_prob: float = 0.8,
    noise_per_record: int = 3,
    loc_sigma: float = 0.01,
    time_sigma: float = 900.0,
    seed: int = 54321,
) -> PairedCorpus:
    """Location blobs in pairs, each pair sharing one exclusive time cluster.

    Signal words are exclusive to a single location blob; the time cluster is
    the only thing linking a blob to its partner.
    """
    rng = np.random.default_rng(seed)
    n_loc = 2 * n_pairs
    loc_centers = _loc_grid(n_loc)
    time_centers = np.linspace(0, 86400, n_pairs, endpoint=False) + 10800.0
    partner = {}
    time_of_blob = {}
    for p in range(n_pairs):
        a, b = 2 * p, 2 * p + 1
        partner[a], partner[b] = b, a
        time_of_blob[a] = time_of_blob[b] = p
    noise = [f"zz{i:03d}" for i in range(n_noise_words)]
    signal_words = {}
    for i in range(n_loc):
        for s in range(words_per_blob):
            signal_words[f"sig{i}w{s}"] = i
    by_blob: dict[int, list[str]] = {i: [] for i in range(n_loc)}
    for w, i in signal_words.items():
        by_blob[i].append(w)

    lines = []
    for _ in range(n_records):
        i = int(rng.integers(0, n_loc))
        j = time_of_blob[i]
        lat, lon = loc_centers[i] + rng.normal(0, loc_sigma, 2)
        tod = (time_centers[j] + rng.normal(0, time_sigma)) % 86400
        day = int(rng.integers(0, 90))
        ts = BASE_EPOCH + day * 86400 + int(tod)
        words = [noise[k] for k in rng.choice(n_noise_words, noise_per_record, replace=False)]
        if rng.random() < signal_prob:
            words.append(by_blob[i][int(rng.integers(0, words_per_blob))])
        lines.append(f"{ts}\t{lat:.6f}\t{lon:.6f}\t{' '.join(words)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return PairedCorpus(
        path=str(path),
        loc_centers=loc_centers,
        time_centers=time_centers,
        signal_words=signal_words,
        partner=partner,
        time_of_blob=time_of_blob,
    )
