"""Pretrained word vectors: loading, cosine similarity and prior-goal ranking."""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass
from importlib import resources
from typing import Iterable

import numpy as np


class EmbeddingError(ValueError):
    """Malformed vector file or degenerate vector."""


class OutOfVocabulary(LookupError):
    def __init__(self, word):
        super().__init__(f"word not in embedding vocabulary: {word!r}")
        self.word = word


@dataclass(frozen=True)
class EmbeddingVector:
    word: str
    values: np.ndarray

    def __len__(self):
        return len(self.values)


class EmbeddingStore:
    """Immutable word -> vector map with a single shared dimension."""

    def __init__(self, words: Iterable[str], matrix: np.ndarray):
        words = tuple(words)
        matrix = np.array(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != len(words) or matrix.shape[1] < 1:
            raise EmbeddingError(f"matrix of shape {matrix.shape} does not match {len(words)} words")
        if not np.all(np.isfinite(matrix)):
            raise EmbeddingError("embedding contains non-finite values")
        if len(set(words)) != len(words):
            raise EmbeddingError("duplicate words in embedding")
        matrix.setflags(write=False)
        self._words = words
        self._matrix = matrix
        self._index = {w: i for i, w in enumerate(words)}

    @property
    def dimension(self) -> int:
        return self._matrix.shape[1]

    @property
    def words(self) -> tuple:
        return self._words

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def __len__(self):
        return len(self._words)

    def __contains__(self, word):
        return word in self._index

    def vector(self, word: str) -> EmbeddingVector:
        try:
            i = self._index[word]
        except KeyError:
            raise OutOfVocabulary(word) from None
        return EmbeddingVector(word, self._matrix[i])

    def scaled(self, factor: float) -> "EmbeddingStore":
        return EmbeddingStore(self._words, self._matrix * factor)

    def __eq__(self, other):
        if not isinstance(other, EmbeddingStore):
            return NotImplemented
        return self._words == other._words and np.array_equal(self._matrix, other._matrix)

    def __repr__(self):
        return f"EmbeddingStore({len(self)} words, dimension={self.dimension})"


def vector(store: EmbeddingStore, word: str) -> EmbeddingVector:
    return store.vector(word)


def load_embeddings(source, expected_dim: int | None = None) -> EmbeddingStore:
    """Parse the flat ``word v1 ... vd`` text format.

    ``source`` may be a path, raw bytes, or a text/binary file object. Blank
    lines and ``#`` comment lines are skipped.
    """
    text = _read_text(source)
    words, rows = [], []
    dim = None
    seen = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        word, tokens = parts[0], parts[1:]
        if not tokens:
            raise EmbeddingError(f"line {lineno}: no vector values for {word!r}")
        try:
            values = [float(t) for t in tokens]
        except ValueError:
            raise EmbeddingError(f"line {lineno}: non-numeric value in vector for {word!r}") from None
        if not all(math.isfinite(v) for v in values):
            raise EmbeddingError(f"line {lineno}: non-finite value in vector for {word!r}")
        if dim is None:
            dim = len(values)
        elif len(values) != dim:
            raise EmbeddingError(f"line {lineno}: expected {dim} values, found {len(values)}")
        if word in seen:
            raise EmbeddingError(f"line {lineno}: duplicate word {word!r} (first on line {seen[word]})")
        seen[word] = lineno
        words.append(word)
        rows.append(values)
    if not words:
        raise EmbeddingError("embedding file contains no vectors")
    if expected_dim is not None and expected_dim != dim:
        raise EmbeddingError(f"expected dimension {expected_dim}, file has {dim}")
    return EmbeddingStore(words, np.array(rows, dtype=np.float64))


def dump_embeddings(store: EmbeddingStore, sink=None) -> str:
    """Write ``store`` in the text format; values round-trip exactly."""
    lines = [w + " " + " ".join(repr(float(v)) for v in row)
             for w, row in zip(store.words, store.matrix)]
    text = "\n".join(lines) + "\n"
    if sink is not None:
        sink.write(text)
    return text


def default_store() -> EmbeddingStore:
    """The bundled 300-d vectors for the ten apartment objects."""
    ref = resources.files("lexnav") / "data" / "object_vectors.txt"
    return load_embeddings(io.StringIO(ref.read_text(encoding="utf-8")))


def _read_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return fh.read()
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data


def _values(v) -> np.ndarray:
    if isinstance(v, EmbeddingVector):
        return v.values
    return np.asarray(v, dtype=np.float64)


def cosine(a, b) -> float:
    a, b = _values(a), _values(b)
    if a.shape != b.shape:
        raise EmbeddingError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise EmbeddingError("cosine undefined for a zero-norm vector")
    c = float(np.dot(a, b) / (na * nb))
    return min(1.0, max(-1.0, c))


@dataclass(frozen=True)
class SimilarityReport:
    target: str
    rankings: tuple  # ((word, score), ...) best first

    def format_table(self) -> str:
        width = max(len(w) for w, _ in self.rankings)
        lines = [f"target: {self.target}"]
        lines += [f"  {w:<{width}}  {s: .6f}" for w, s in self.rankings]
        return "\n".join(lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("word,score\n")
        for w, s in self.rankings:
            buf.write(f"{w},{s!r}\n")
        return buf.getvalue()


def similarity_report(store: EmbeddingStore, target: str, priors: Iterable[str]) -> SimilarityReport:
    priors = sorted(set(priors))
    if not priors:
        raise EmbeddingError("prior set is empty")
    if target in priors:
        raise EmbeddingError(f"target {target!r} is also listed as a prior")
    t = store.vector(target)
    scored = [(w, cosine(t, store.vector(w))) for w in priors]
    # descending score, ties in lexicographic order
    scored.sort(key=lambda ws: (-ws[1], ws[0]))
    return SimilarityReport(target, tuple(scored))


def nearest_prior(store: EmbeddingStore, target: str, priors: Iterable[str]) -> tuple:
    """The prior with the highest cosine similarity to ``target``."""
    return similarity_report(store, target, priors).rankings[0]


def similarity_matrix(store: EmbeddingStore, rows, cols) -> np.ndarray:
    return np.array([[cosine(store.vector(r), store.vector(c)) for c in cols] for r in rows])
