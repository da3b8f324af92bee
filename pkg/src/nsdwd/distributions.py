"""Heavy-tailed class-proportion vectors, synthetic or counted from a corpus.

The data model is a sorted probability vector over ``d`` classes. Synthetic
vectors follow the rank power law ``p_k = (1/k) / H_d`` with the harmonic
normalizer ``H_d``; corpus vectors come from whitespace token counts.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import BinaryIO

import numpy as np

from .errors import EmptyCorpusError

SUM_TOLERANCE = 1e-12


class DistributionSource(Enum):
    POWER_LAW = "power_law"
    CORPUS = "corpus"


@dataclass(frozen=True, eq=False)
class TokenDistribution:
    """Sorted class proportions over a vocabulary of ``d`` tokens.

    Invariants checked on construction: ``probs`` sums to one within 1e-12,
    every entry is strictly positive, and entries are non-increasing.
    ``token_labels`` is populated only for corpus-derived distributions.
    """

    d: int
    probs: np.ndarray
    source: DistributionSource
    token_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64)
        if self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d}")
        if probs.shape != (self.d,):
            raise ValueError(f"probs must have shape ({self.d},), got {probs.shape}")
        if abs(math.fsum(probs.tolist()) - 1.0) > SUM_TOLERANCE:
            raise ValueError("probs must sum to 1 within 1e-12")
        if not np.all(probs > 0.0):
            raise ValueError("every probability must be strictly positive")
        if np.any(np.diff(probs) > 0.0):
            raise ValueError("probs must be sorted non-increasing")
        if self.token_labels is not None and len(self.token_labels) != self.d:
            raise ValueError("token_labels length must equal d")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)


def power_law_distribution(d: int) -> TokenDistribution:
    """Proportions ``p_k = (1/k) / H_d`` for ranks ``k = 1..d``."""
    if d < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    ranks = np.arange(1, d + 1, dtype=np.float64)
    weights = 1.0 / ranks
    harmonic = math.fsum(weights.tolist())
    return TokenDistribution(d=d, probs=weights / harmonic, source=DistributionSource.POWER_LAW)


def ingest_corpus(stream: BinaryIO | bytes, max_vocab: int | None = None) -> TokenDistribution:
    """Count whitespace-delimited, lowercased tokens from a UTF-8 byte stream.

    Tokens are sorted by decreasing count with lexicographic tie-breaking,
    so identical bytes always yield an identical distribution. When
    ``max_vocab`` is given, only the most frequent tokens are kept and the
    proportions are renormalized over them.

    Raises ``EmptyCorpusError`` for a token-free stream and
    ``UnicodeDecodeError`` for bytes that are not valid UTF-8.
    """
    if max_vocab is not None and max_vocab < 1:
        raise ValueError(f"max_vocab must be positive, got {max_vocab}")
    data = stream if isinstance(stream, bytes) else stream.read()
    text = data.decode("utf-8")
    tokens = [tok.lower() for tok in text.split()]
    if not tokens:
        raise EmptyCorpusError("corpus contains no tokens")

    counts = Counter(tokens)
    ordered = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    if max_vocab is not None:
        ordered = ordered[:max_vocab]

    labels = tuple(token for token, _ in ordered)
    kept = np.array([count for _, count in ordered], dtype=np.float64)
    probs = kept / math.fsum(kept.tolist())
    return TokenDistribution(
        d=len(ordered), probs=probs, source=DistributionSource.CORPUS, token_labels=labels
    )


def ingest_corpus_path(path: str | Path, max_vocab: int | None = None) -> TokenDistribution:
    """`ingest_corpus` over the bytes of a file."""
    return ingest_corpus(Path(path).read_bytes(), max_vocab=max_vocab)


def zipf_fit_exponent(dist: TokenDistribution) -> float:
    """Least-squares power-law exponent of ``probs`` against rank.

    Fits ``log p_k`` on ``log k`` and returns the negated slope, so data with
    ``p_k proportional to 1/k^a`` yields ``a``.
    """
    if dist.d < 2:
        raise ValueError(f"need at least 2 classes to fit an exponent, got d={dist.d}")
    x = np.log(np.arange(1, dist.d + 1, dtype=np.float64))
    y = np.log(dist.probs)
    slope = float(np.polyfit(x, y, 1)[0])
    return -slope


def write_distribution_csv(dist: TokenDistribution, target: str | Path | io.TextIOBase) -> None:
    """Write ``rank,probability[,token]`` rows, rank 1-indexed."""
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="") as handle:
            write_distribution_csv(dist, handle)
        return
    writer = csv.writer(target)
    has_tokens = dist.token_labels is not None
    writer.writerow(["rank", "probability", "token"] if has_tokens else ["rank", "probability"])
    for idx in range(dist.d):
        row = [str(idx + 1), repr(float(dist.probs[idx]))]
        if has_tokens:
            row.append(dist.token_labels[idx])
        writer.writerow(row)


def read_distribution_csv(
    path: str | Path, source: DistributionSource | None = None
) -> TokenDistribution:
    """Read a distribution CSV written by `write_distribution_csv`.

    Unless ``source`` is given, rows with a token column are tagged as corpus
    data and rows without one as power-law data.
    """
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or header[:2] != ["rank", "probability"]:
            raise ValueError(f"{path}: expected header rank,probability[,token]")
        has_tokens = len(header) == 3 and header[2] == "token"
        probs: list[float] = []
        labels: list[str] = []
        for i, row in enumerate(reader):
            if int(row[0]) != i + 1:
                raise ValueError(f"{path}: ranks must be 1-indexed and consecutive")
            probs.append(float(row[1]))
            if has_tokens:
                labels.append(row[2])
    if source is None:
        source = DistributionSource.CORPUS if has_tokens else DistributionSource.POWER_LAW
    return TokenDistribution(
        d=len(probs),
        probs=np.array(probs),
        source=source,
        token_labels=tuple(labels) if has_tokens else None,
    )
