"""Input pattern streams for the familiarity benchmark.

Random-pattern streams are generated on the fly; feature-file streams are
built by projecting precomputed feature vectors onto their top principal
components and binarizing each dimension at its median.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IngestionError, InvalidInputError
from .linalg import eig_sym, top_components

FVEC_MAGIC = b"FVEC"


@dataclass(frozen=True)
class PatternStream:
    """Ordered +/-1 patterns plus optional per-age probe pairs."""

    patterns: np.ndarray  # (T, N) int8 of +/-1
    source: str = "random"
    rng_seed: int | None = None
    probe_pairs: dict[int, tuple[np.ndarray, np.ndarray]] | None = None

    def __post_init__(self):
        p = self.patterns
        if p.ndim != 2 or p.size == 0:
            raise InvalidInputError("patterns must be a non-empty (T, N) array")
        if not np.all(np.abs(p) == 1):
            raise InvalidInputError("pattern entries must be +/-1")

    @property
    def length(self) -> int:
        return int(self.patterns.shape[0])

    @property
    def width(self) -> int:
        return int(self.patterns.shape[1])


def make_random_stream(n: int, t: int, seed: int) -> PatternStream:
    """T independent uniform +/-1 vectors of length N, reproducible per seed."""
    if n < 1 or t < 1:
        raise InvalidInputError("stream needs n >= 1 and t >= 1")
    rng = np.random.default_rng(seed)
    pats = (rng.integers(0, 2, size=(t, n), dtype=np.int8) * 2 - 1).astype(np.int8)
    return PatternStream(patterns=pats, source="random", rng_seed=seed)


def write_feature_file(path, matrix: np.ndarray, binary: bool = True) -> None:
    """Write a feature matrix as FVEC binary (default) or CSV text."""
    x = np.asarray(matrix, dtype=np.float32)
    if x.ndim != 2:
        raise InvalidInputError("feature matrix must be 2-D")
    path = Path(path)
    if binary:
        header = FVEC_MAGIC + struct.pack("<III", x.shape[0], x.shape[1], 0)
        path.write_bytes(header + x.astype("<f4").tobytes())
    else:
        np.savetxt(path, x, delimiter=",", fmt="%.8g")


def read_feature_file(path) -> np.ndarray:
    """Load a feature matrix from CSV or the 16-byte-header FVEC format."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise IngestionError(f"cannot read feature file {path}: {exc}") from exc
    if raw[:4] == FVEC_MAGIC:
        if len(raw) < 16:
            raise IngestionError("FVEC header truncated")
        rows, cols, _reserved = struct.unpack("<III", raw[4:16])
        expected = 16 + 4 * rows * cols
        if len(raw) != expected:
            raise IngestionError(
                f"FVEC payload size mismatch: expected {expected} bytes, got {len(raw)}"
            )
        data = np.frombuffer(raw[16:], dtype="<f4").reshape(rows, cols)
        return data.astype(float)
    try:
        mat = np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float))
    except ValueError as exc:
        raise IngestionError(f"malformed CSV feature file {path}: {exc}") from exc
    return mat


def ingest_features(source, n: int) -> PatternStream:
    """Project feature rows onto their top-n principal components and
    binarize each projected dimension at its median (+1 above, -1 otherwise).
    """
    if isinstance(source, (str, Path)):
        mat = read_feature_file(source)
        origin = str(source)
    else:
        mat = np.asarray(source, dtype=float)
        origin = "array"
    if mat.ndim != 2 or mat.shape[0] < 2:
        raise InvalidInputError("feature matrix needs at least two rows")
    if mat.shape[1] < n:
        raise InvalidInputError(f"need >= {n} feature columns, got {mat.shape[1]}")
    centered = mat - mat.mean(axis=0)
    cov = centered.T @ centered / (mat.shape[0] - 1)
    cov = 0.5 * (cov + cov.T)
    usable = int(np.sum(eig_sym(cov).eigenvalues > 1e-10 * max(1.0, np.max(np.abs(cov)))))
    if usable < n:
        raise InvalidInputError(
            f"rank deficiency: only {usable} usable components for n={n}"
        )
    proj = centered @ top_components(cov, n)
    med = np.median(proj, axis=0)
    pats = np.where(proj > med, 1, -1).astype(np.int8)
    return PatternStream(patterns=pats, source=f"feature-file:{origin}")
