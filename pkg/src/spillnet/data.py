"""Datasets, exposure mappings, and counterfactual-exposure arithmetic.

Two dataset shapes are supported.  ``PairDataset`` holds one potential
partner per focal unit; ``NetworkDataset`` holds a peer group of size
``n_peers[i]`` per focal unit, with the first peer acting as the
instrument peer.  Both are immutable after construction and validated
hard at construction time: downstream formulas assume binary treatments
and a consistent exposure count, so violations raise :class:`DataError`
instead of warning.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DataError, MissingLinksError

__all__ = [
    "ExposureMap",
    "PairDataset",
    "NetworkDataset",
    "spillover_pair",
    "exposure",
    "counterfactual_exposure",
]


def _as_float_vector(name: str, x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise DataError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return arr


def _as_binary_vector(name: str, x) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise DataError(f"{name} must be one-dimensional, got shape {arr.shape}")
    out = arr.astype(np.int8, copy=True)
    if not np.array_equal(out, arr):
        raise DataError(f"{name} must be integer-coded")
    if out.size and not np.isin(out, (0, 1)).all():
        raise DataError(f"{name} takes values outside {{0, 1}}")
    return out


def _as_int_vector(name: str, x) -> np.ndarray:
    arr = np.asarray(x)
    out = arr.astype(np.int64, copy=True)
    if arr.ndim != 1 or not np.array_equal(out, arr):
        raise DataError(f"{name} must be a one-dimensional integer vector")
    return out


def _freeze(arr: np.ndarray | None) -> np.ndarray | None:
    if arr is not None:
        arr.setflags(write=False)
    return arr


class ExposureMap(Enum):
    """Known non-decreasing transformations of the treated-peer count."""

    IDENTITY = "identity"
    FRACTION = "fraction"
    ANY_TREATED = "any"
    PER_DEGREE = "perdegree"

    @property
    def needs_degree(self) -> bool:
        return self is ExposureMap.PER_DEGREE

    def apply(
        self,
        r: np.ndarray,
        n_peers: np.ndarray,
        degree: np.ndarray | None = None,
    ) -> np.ndarray:
        """Vectorized map value for exposure counts ``r``.

        ``degree`` (number of effective links) is required only by
        ``PER_DEGREE``; a zero degree maps to 0 so that unreachable
        units never propagate NaN.
        """
        r = np.asarray(r, dtype=np.float64)
        if self is ExposureMap.IDENTITY:
            return r.copy()
        if self is ExposureMap.FRACTION:
            return r / np.asarray(n_peers, dtype=np.float64)
        if self is ExposureMap.ANY_TREATED:
            return (r > 0).astype(np.float64)
        if degree is None:
            raise MissingLinksError("per-degree exposure needs link counts (degree)")
        deg = np.asarray(degree, dtype=np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(deg > 0, r / np.maximum(deg, 1.0), 0.0)
        return out

    @classmethod
    def parse(cls, token: str) -> "ExposureMap":
        for m in cls:
            if m.value == token:
                return m
        raise DataError(f"unknown exposure map {token!r}")


def spillover_pair(a: int, d_j: int) -> int:
    """Effective spillover indicator: the partner is treated *and* linked."""
    if a not in (0, 1) or d_j not in (0, 1):
        raise DataError("spillover_pair expects binary inputs")
    return a * d_j


def exposure(r: int, n_i: int, a_bar: int, exposure_map: ExposureMap) -> float:
    """Scalar exposure-map value with bounds validation.

    Rejects ``r`` or ``a_bar`` above the peer-group size as malformed.
    """
    if n_i < 1:
        raise DataError("peer group size must be positive")
    if not 0 <= r <= n_i:
        raise DataError(f"exposure count {r} outside [0, {n_i}]")
    if not 0 <= a_bar <= n_i:
        raise DataError(f"degree {a_bar} outside [0, {n_i}]")
    out = exposure_map.apply(
        np.array([r]), np.array([n_i]), degree=np.array([a_bar])
    )
    return float(out[0])


def counterfactual_exposure(r, a1, d1, d):
    """Exposure after forcing the instrument peer's treatment to ``d``.

    Works elementwise on arrays.  Satisfies ``R(1) - R(0) == a1``: the
    exposure responds to the instrument exactly for linked-first-peer
    units.
    """
    return r - a1 * (d1 - d)


@dataclass(frozen=True)
class PairDataset:
    """Per-unit outcome, own treatment, partner treatment, optional link."""

    y: np.ndarray
    d: np.ndarray
    d_j: np.ndarray
    a: np.ndarray | None = None

    def __post_init__(self):
        y = _as_float_vector("y", self.y)
        d = _as_binary_vector("d", self.d)
        d_j = _as_binary_vector("d_j", self.d_j)
        if y.size < 1:
            raise DataError("dataset is empty")
        if not (y.size == d.size == d_j.size):
            raise DataError("y, d, d_j have mismatched lengths")
        a = None
        if self.a is not None:
            a = _as_binary_vector("a", self.a)
            if a.size != y.size:
                raise DataError("a has mismatched length")
        object.__setattr__(self, "y", _freeze(y))
        object.__setattr__(self, "d", _freeze(d))
        object.__setattr__(self, "d_j", _freeze(d_j))
        object.__setattr__(self, "a", _freeze(a))

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def s(self) -> np.ndarray:
        """Effective spillover ``a * d_j``; needs the link column."""
        if self.a is None:
            raise MissingLinksError("spillover needs the link indicator a")
        return (self.a * self.d_j).astype(np.int8)

    def as_network(self) -> "NetworkDataset":
        """View the pair data as a one-peer network dataset."""
        a1 = self.a
        r = self.s if a1 is not None else self.d_j.astype(np.int64)
        kwargs = {}
        if a1 is not None:
            kwargs = {
                "a1": a1,
                "d_peers": self.d_j.reshape(-1, 1),
                "a_peers": a1.reshape(-1, 1),
            }
        return NetworkDataset(
            y=self.y,
            d=self.d,
            d1=self.d_j,
            r=np.asarray(r, dtype=np.int64),
            n_peers=np.ones(self.n, dtype=np.int64),
            **kwargs,
        )


@dataclass(frozen=True)
class NetworkDataset:
    """Per-unit outcome, own treatment, instrument-peer treatment, exposure.

    ``d1`` is the first entry of the peer treatment vector by convention;
    ingestion preserves file order, so the caller controls which peer
    plays the instrument role.  When the full link vector ``a_peers`` is
    present, the exposure ``r`` is recomputed from it and never trusted.
    """

    y: np.ndarray
    d: np.ndarray
    d1: np.ndarray
    r: np.ndarray
    n_peers: np.ndarray
    a1: np.ndarray | None = None
    d_peers: np.ndarray | None = None
    a_peers: np.ndarray | None = None
    degree: np.ndarray | None = field(default=None, init=False)

    def __post_init__(self):
        y = _as_float_vector("y", self.y)
        n = y.size
        if n < 1:
            raise DataError("dataset is empty")
        d = _as_binary_vector("d", self.d)
        d1 = _as_binary_vector("d1", self.d1)
        r = _as_int_vector("r", self.r)
        n_peers = _as_int_vector("n_peers", self.n_peers)
        for name, arr in (("d", d), ("d1", d1), ("r", r), ("n_peers", n_peers)):
            if arr.size != n:
                raise DataError(f"{name} has mismatched length")
        if np.any(n_peers < 1):
            raise DataError("every unit needs at least one potential peer")
        if np.any(r < 0) or np.any(r > n_peers):
            raise DataError("exposure r outside [0, n_peers]")

        a1 = None
        if self.a1 is not None:
            a1 = _as_binary_vector("a1", self.a1)
            if a1.size != n:
                raise DataError("a1 has mismatched length")
            if np.any(r < a1 * d1):
                raise DataError("r below the first peer's own contribution a1*d1")

        d_peers = self._check_peer_matrix("d_peers", self.d_peers, n, n_peers)
        a_peers = self._check_peer_matrix("a_peers", self.a_peers, n, n_peers)
        degree = None
        if d_peers is not None and not np.array_equal(d_peers[:, 0], d1):
            raise DataError("d_peers[:, 0] disagrees with d1")
        if a_peers is not None:
            if d_peers is None:
                raise DataError("a_peers without d_peers: exposure cannot be verified")
            if a1 is None:
                a1 = a_peers[:, 0].copy()
            elif not np.array_equal(a_peers[:, 0], a1):
                raise DataError("a_peers[:, 0] disagrees with a1")
            recomputed = (a_peers * d_peers).sum(axis=1).astype(np.int64)
            if not np.array_equal(recomputed, r):
                raise DataError("stored exposure r disagrees with sum(a_peers * d_peers)")
            degree = a_peers.sum(axis=1).astype(np.int64)
            if np.any(r > degree):
                raise DataError("exposure r exceeds the number of effective links")

        object.__setattr__(self, "y", _freeze(y))
        object.__setattr__(self, "d", _freeze(d))
        object.__setattr__(self, "d1", _freeze(d1))
        object.__setattr__(self, "r", _freeze(r))
        object.__setattr__(self, "n_peers", _freeze(n_peers))
        object.__setattr__(self, "a1", _freeze(a1))
        object.__setattr__(self, "d_peers", _freeze(d_peers))
        object.__setattr__(self, "a_peers", _freeze(a_peers))
        object.__setattr__(self, "degree", _freeze(degree))

    @staticmethod
    def _check_peer_matrix(name, mat, n, n_peers) -> np.ndarray | None:
        if mat is None:
            return None
        arr = np.asarray(mat)
        if arr.ndim != 2 or arr.shape[0] != n:
            raise DataError(f"{name} must have shape (n, k_max)")
        if arr.shape[1] < int(n_peers.max()):
            raise DataError(f"{name} has fewer columns than the largest peer group")
        out = arr.astype(np.int8, copy=True)
        if not np.array_equal(out, arr):
            raise DataError(f"{name} must be integer-coded")
        valid = np.arange(arr.shape[1])[None, :] < n_peers[:, None]
        if not np.isin(out[valid], (0, 1)).all():
            raise DataError(f"{name} takes values outside {{0, 1}}")
        out[~valid] = 0  # padding is never data
        return out

    @property
    def n(self) -> int:
        return self.y.size

    def exposure_values(self, exposure_map: ExposureMap) -> np.ndarray:
        """Observed regressor M(r) under ``exposure_map``."""
        return exposure_map.apply(self.r, self.n_peers, self.degree)
