"""Seeded data-generating processes for the simulation studies.

Every random variable is drawn from its own counter-based (Philox)
stream keyed by ``(seed, variable tag)``, so generation is deterministic,
order-independent, and embarrassingly parallel across replications.
Sampling transforms are numpy's defaults (uniforms from the bit stream,
normals via ziggurat); ports to other ecosystems should match moments,
not bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import NetworkDataset, PairDataset
from .errors import InvalidConfigError

__all__ = [
    "PairDgpConfig",
    "NetworkDgpConfig",
    "gen_pair",
    "gen_network",
    "gen_pair_homogeneous",
]

# Stable variable tags; reordering draws does not change any stream.
_TAGS = {
    "own_treatment": 0,
    "peer_treatments": 1,
    "noise_focal": 2,
    "noise_peers": 3,
    "outcome_shift": 4,
    "intercept_noise": 5,
    "direct_coef": 6,
    "spill_coef_base": 7,
    "spill_coef_link": 8,
    "links": 9,
}


def _rng(seed: int, tag: str) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(_TAGS[tag],))
    return np.random.Generator(np.random.Philox(ss))


def _bernoulli(rng: np.random.Generator, p: float, size) -> np.ndarray:
    return (rng.random(size) < p).astype(np.int8)


def _check_prob(name: str, p: float):
    if not 0.0 < p < 1.0:
        raise InvalidConfigError(f"{name} must lie strictly inside (0, 1)")


@dataclass(frozen=True)
class PairDgpConfig:
    """Pair model with endogenous link formation and no treatment effects."""

    n: int
    p_own: float = 0.5
    p_partner: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n < 4:
            raise InvalidConfigError("pair DGP needs n >= 4")
        _check_prob("p_own", self.p_own)
        _check_prob("p_partner", self.p_partner)


@dataclass(frozen=True)
class NetworkDgpConfig:
    """Network model with quartered peer-group sizes {1, 3, 6, 9}.

    ``h`` switches the spillover effects on (the complier-average effect
    is then 1.5); ``c`` is the link-formation threshold, with larger
    values producing sparser effective links.
    """

    n: int
    h: int
    c: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 8 or self.n % 4 != 0:
            raise InvalidConfigError("network DGP needs n >= 8 divisible by 4")
        if self.h not in (0, 1):
            raise InvalidConfigError("h must be 0 or 1")
        _check_prob("c", self.c)


def gen_pair(config: PairDgpConfig) -> PairDataset:
    """Draw a pair dataset where links, not effects, drive the outcome.

    The focal noise enters both the outcome and the link threshold, so
    linked units have systematically higher baseline outcomes.
    """
    n, seed = config.n, config.seed
    d = _bernoulli(_rng(seed, "own_treatment"), config.p_own, n)
    d_j = _bernoulli(_rng(seed, "peer_treatments"), config.p_partner, n)
    u_i = _rng(seed, "noise_focal").uniform(-1.0, 1.0, n)
    u_j = _rng(seed, "noise_peers").uniform(-1.0, 1.0, n)
    # logistic(u_i + u_j) > 1/2  <=>  u_i + u_j > 0
    a = (u_i + u_j > 0.0).astype(np.int8)
    xi = _rng(seed, "outcome_shift").normal(1.0, 1.0, n)
    y = xi + u_i
    return PairDataset(y=y, d=d, d_j=d_j, a=a)


_PEER_SIZES = (1, 3, 6, 9)


def gen_network(config: NetworkDgpConfig) -> NetworkDataset:
    """Draw a network dataset with heterogeneous effects and full links.

    Peer-group sizes are fixed in quarters: the first quarter of units
    has 1 potential peer, the second 3, then 6, then 9.  Each link forms
    when logistic(u_i + u_peer) exceeds ``c``; the same focal noise u_i
    feeds the outcome, which is the endogeneity channel.

    Intercepts carry a block level (3 for small peer groups, 1 for
    large) plus a normal shift common to the dataset; the direct-effect
    coefficient is likewise a single N(0, 4) draw per dataset.  Both are
    absorbed by the fitted coefficients, so the irreducible noise is the
    block contrast plus u_i.  Spillover coefficients are unit-level,
    uniform on (0, 2) plus an independent uniform (0, 1) bonus, all
    scaled by ``h``: the complier-average effect is exactly 1.5 h and
    the coefficient mean carries no link dependence.
    """
    n, h, c, seed = config.n, config.h, config.c, config.seed
    quarter = n // 4
    n_peers = np.repeat(np.array(_PEER_SIZES, dtype=np.int64), quarter)
    kmax = max(_PEER_SIZES)
    valid = np.arange(kmax)[None, :] < n_peers[:, None]

    d = _bernoulli(_rng(seed, "own_treatment"), 0.5, n)
    d_peers = _bernoulli(_rng(seed, "peer_treatments"), 0.5, (n, kmax))
    u_i = _rng(seed, "noise_focal").normal(0.0, 1.0, n)
    u_peers = _rng(seed, "noise_peers").normal(0.0, 1.0, (n, kmax))
    # logistic(u) > c  <=>  u > log(c / (1 - c))
    threshold = np.log(c / (1.0 - c))
    a_peers = ((u_i[:, None] + u_peers > threshold) & valid).astype(np.int8)
    d_peers = np.where(valid, d_peers, 0).astype(np.int8)

    beta0 = np.where(n_peers <= 3, 3.0, 1.0) + _rng(seed, "intercept_noise").normal()
    beta_d = _rng(seed, "direct_coef").normal(0.0, 2.0)  # variance 4
    base = _rng(seed, "spill_coef_base").uniform(0.0, 2.0, n)
    bonus = _rng(seed, "spill_coef_link").uniform(0.0, 1.0, n)
    beta_s = h * (base + bonus)

    r = (a_peers * d_peers).sum(axis=1).astype(np.int64)
    y = beta0 + beta_d * d + beta_s * r + u_i
    return NetworkDataset(
        y=y,
        d=d,
        d1=d_peers[:, 0],
        r=r,
        n_peers=n_peers,
        a_peers=a_peers,
        d_peers=d_peers,
    )


def gen_pair_homogeneous(
    n: int,
    p_link: float,
    beta: tuple[float, float, float] = (1.0, 2.0, 1.5),
    noise_sd: float = 1.0,
    p_own: float = 0.5,
    p_partner: float = 0.5,
    seed: int = 0,
) -> PairDataset:
    """Homogeneous-effects pair fixture with exogenous links.

    Links are drawn independently of the homoskedastic outcome noise, so
    the three estimands coincide and the complier-weighted fit is more
    efficient than plain IV exactly by a factor of ``p_link``.
    """
    if n < 4:
        raise InvalidConfigError("need n >= 4")
    for name, p in (("p_link", p_link), ("p_own", p_own), ("p_partner", p_partner)):
        _check_prob(name, p)
    d = _bernoulli(_rng(seed, "own_treatment"), p_own, n)
    d_j = _bernoulli(_rng(seed, "peer_treatments"), p_partner, n)
    a = _bernoulli(_rng(seed, "links"), p_link, n)
    eps = _rng(seed, "noise_focal").normal(0.0, noise_sd, n)
    b0, bd, bs = beta
    s = a * d_j
    y = b0 + bd * d + bs * s + eps
    return PairDataset(y=y, d=d, d_j=d_j, a=a)
