"""Record parsing, tokenization, and vocabulary construction.

Input files are UTF-8, one record per line:
``epoch_seconds<TAB>latitude<TAB>longitude<TAB>text``.
"""

from __future__ import annotations

import logging
import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import RecordParseError

logger = logging.getLogger(__name__)

# Tokens are maximal runs of letters/digits; whitespace, punctuation and
# underscores are boundaries.
_TOKEN_RE = re.compile(r"[^\W_]+")

REJECT_FIELD_COUNT = "field_count"
REJECT_TIMESTAMP = "bad_timestamp"
REJECT_COORDINATE = "bad_coordinate"
REJECT_RANGE = "coordinate_out_of_range"


@dataclass(frozen=True)
class Record:
    """One geo/time-tagged post.

    ``tokens`` is the raw lowercased token list (duplicates kept, needed for
    frequency counting). ``keywords`` is the deduplicated, vocabulary-restricted
    set, filled in by :func:`restrict_record`.
    """

    timestamp: int
    lat: float
    lon: float
    tokens: tuple[str, ...]
    keywords: tuple[str, ...] | None = None


def tokenize(text: str, stopwords: Iterable[str] = ()) -> list[str]:
    """Split on whitespace/punctuation boundaries, lowercase, drop stopwords.

    Duplicates are retained; deduplication happens per record at vocabulary
    restriction time.
    """
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else set(stopwords)
    return [t for t in _TOKEN_RE.findall(text.lower()) if t not in stop]


def parse_record(line: str, stopwords: Iterable[str] = ()) -> Record:
    """Parse one tab-separated input line into a Record.

    Raises RecordParseError with a machine-readable reason on malformed input;
    callers count rejects and keep going.
    """
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 4:
        raise RecordParseError(
            REJECT_FIELD_COUNT, f"expected 4 tab-separated fields, got {len(parts)}"
        )
    try:
        timestamp = int(parts[0])
    except ValueError:
        raise RecordParseError(REJECT_TIMESTAMP, repr(parts[0])) from None
    try:
        lat = float(parts[1])
        lon = float(parts[2])
    except ValueError:
        raise RecordParseError(REJECT_COORDINATE, f"{parts[1]!r}, {parts[2]!r}") from None
    if not (math.isfinite(lat) and math.isfinite(lon)):
        raise RecordParseError(REJECT_COORDINATE, "non-finite coordinate")
    if not -90.0 <= lat <= 90.0:
        raise RecordParseError(REJECT_RANGE, f"latitude {lat}")
    if not -180.0 <= lon <= 180.0:
        raise RecordParseError(REJECT_RANGE, f"longitude {lon}")
    return Record(timestamp, lat, lon, tuple(tokenize(parts[3], stopwords)))


class Vocabulary:
    """Frequency-ranked word list with O(1) membership and rank lookup."""

    def __init__(self, words: Iterable[tuple[str, int]]):
        self.words: tuple[tuple[str, int], ...] = tuple((str(w), int(c)) for w, c in words)
        self.index: dict[str, int] = {w: i for i, (w, _) in enumerate(self.words)}

    def __contains__(self, word: object) -> bool:
        return word in self.index

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self.words == other.words

    def rank(self, word: str) -> int:
        return self.index[word]

    def __repr__(self) -> str:
        return f"Vocabulary({len(self)} words)"


def build_vocabulary(
    records: Iterable[Record],
    k: int,
    stopwords: Iterable[str] = (),
    min_freq: int = 1,
) -> Vocabulary:
    """Top-k most frequent tokens with frequency >= min_freq.

    Ties at equal frequency break by ascending lexicographic order, so the
    result is deterministic for a given corpus.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if min_freq < 1:
        raise ValueError("min_freq must be >= 1")
    counts: Counter[str] = Counter()
    for record in records:
        counts.update(record.tokens)
    stop = set(stopwords)
    eligible = [(w, c) for w, c in counts.items() if c >= min_freq and w not in stop]
    eligible.sort(key=lambda wc: (-wc[1], wc[0]))
    return Vocabulary(eligible[:k])


def restrict_record(record: Record, vocab: Vocabulary) -> Record:
    """Replace the raw token list's view with the in-vocabulary keyword set."""
    keywords = tuple(sorted({t for t in record.tokens if t in vocab}))
    return Record(record.timestamp, record.lat, record.lon, record.tokens, keywords)


def read_stopwords(path: str | Path) -> frozenset[str]:
    """Load a stopword file: one word per line, lowercased, blanks ignored."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip().lower()
            if word:
                words.add(word)
    return frozenset(words)


def iter_records(
    path: str | Path,
    stopwords: Iterable[str] = (),
    rejects: Counter | None = None,
) -> Iterator[Record]:
    """Stream records from a file, counting (not raising on) malformed lines."""
    stop = stopwords if isinstance(stopwords, frozenset) else frozenset(stopwords)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield parse_record(line, stop)
            except RecordParseError as exc:
                if rejects is not None:
                    rejects[exc.reason] += 1
                logger.debug("rejected line %d: %s", lineno, exc)
