"""Exact population verification of the estimand characterizations.

Population specs describe finite discrete joint laws of potential
outcomes and links, plus Bernoulli treatment probabilities.  Every
estimand is then an exact finite sum: ``pair_enumerate`` and
``network_enumerate`` solve the population least-squares problems
directly, while ``pair_closed_forms`` and ``network_theorem_values``
evaluate the closed-form characterizations (complier averages,
selection-bias terms, and the two weighting schemes) from the same
primitives.  Agreement between the two routes certifies both.

Nothing here integrates: continuous generating processes must be
discretized to atoms before they can be checked.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .data import ExposureMap, NetworkDataset, PairDataset
from .errors import DataError, SingularDesignError

__all__ = [
    "PairUnitType",
    "PairPopulationSpec",
    "NetworkUnitAtom",
    "NetworkUnitSpec",
    "NetworkPopulationSpec",
    "EstimandReport",
    "pair_enumerate",
    "pair_closed_forms",
    "network_enumerate",
    "network_theorem_values",
    "random_pair_spec",
    "random_network_spec",
    "sample_pair",
    "sample_network",
    "pair_endogeneity_demo_spec",
    "negative_weight_demo_spec",
]

_SINGULAR_TOL = 1e-12


def _check_prob(name, p):
    if not 0.0 <= p <= 1.0:
        raise DataError(f"{name} must lie in [0, 1]")


def _check_strict_prob(name, p):
    if not 0.0 < p < 1.0:
        raise DataError(f"{name} must lie strictly inside (0, 1)")


@dataclass(frozen=True)
class PairUnitType:
    """One atom of the pair-model joint law.

    ``y[d, s]`` is the potential outcome table; ``p_link`` the
    type-specific link probability.  Correlation between outcomes and
    links is encoded by letting ``p_link`` vary across types.
    """

    weight: float
    y: np.ndarray
    p_link: float

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.float64)
        if y.shape != (2, 2):
            raise DataError("pair outcome table must have shape (2, 2)")
        object.__setattr__(self, "y", y)
        _check_prob("weight", self.weight)
        _check_prob("p_link", self.p_link)


@dataclass(frozen=True)
class PairPopulationSpec:
    types: tuple[PairUnitType, ...]
    p_treat_own: float
    p_treat_partner: float

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(self.types))
        if not self.types:
            raise DataError("spec needs at least one type")
        total = sum(t.weight for t in self.types)
        if abs(total - 1.0) > 1e-9:
            raise DataError(f"type weights sum to {total}, not 1")
        _check_strict_prob("p_treat_own", self.p_treat_own)
        _check_strict_prob("p_treat_partner", self.p_treat_partner)

    @property
    def p_link(self) -> float:
        return sum(t.weight * t.p_link for t in self.types)


@dataclass(frozen=True)
class NetworkUnitAtom:
    """One atom of a unit's joint (potential outcomes, link vector) law."""

    weight: float
    y: np.ndarray
    a_vec: tuple[int, ...]

    def __post_init__(self):
        a_vec = tuple(int(v) for v in self.a_vec)
        if any(v not in (0, 1) for v in a_vec):
            raise DataError("link vector entries must be binary")
        y = np.asarray(self.y, dtype=np.float64)
        if y.shape != (2, len(a_vec) + 1):
            raise DataError("outcome table must have shape (2, n_peers + 1)")
        object.__setattr__(self, "a_vec", a_vec)
        object.__setattr__(self, "y", y)
        _check_prob("weight", self.weight)


@dataclass(frozen=True)
class NetworkUnitSpec:
    n_peers: int
    atoms: tuple[NetworkUnitAtom, ...]

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if not 1 <= self.n_peers <= 3:
            raise DataError("peer-group size must be in 1..3")
        if not self.atoms:
            raise DataError("unit needs at least one atom")
        total = sum(a.weight for a in self.atoms)
        if abs(total - 1.0) > 1e-9:
            raise DataError(f"atom weights sum to {total}, not 1")
        for atom in self.atoms:
            if len(atom.a_vec) != self.n_peers:
                raise DataError("atom link vector length disagrees with n_peers")


@dataclass(frozen=True)
class NetworkPopulationSpec:
    units: tuple[NetworkUnitSpec, ...]
    p_treat_own: float
    p_treat_partner: float

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(self.units))
        if not self.units:
            raise DataError("spec needs at least one unit")
        _check_strict_prob("p_treat_own", self.p_treat_own)
        _check_strict_prob("p_treat_partner", self.p_treat_partner)


@dataclass(frozen=True)
class EstimandReport:
    """Enumerated coefficients next to their closed-form characterization."""

    method: str
    enumerated: tuple[float, float, float]
    closed_form: dict[str, float]
    gaps: dict[str, float]
    decomposition: dict[str, object] | None = None
    max_abs_gap: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "max_abs_gap", max(self.gaps.values()) if self.gaps else 0.0
        )


def _solve_population(gram: np.ndarray, rhs: np.ndarray, context: str) -> np.ndarray:
    scale = np.sqrt(np.abs(np.diag(gram)))
    if np.any(scale == 0):
        raise SingularDesignError(f"{context}: degenerate moment matrix")
    scaled = gram / np.outer(scale, scale)
    if abs(np.linalg.det(scaled)) < _SINGULAR_TOL:
        raise SingularDesignError(f"{context}: moment matrix is singular")
    return np.linalg.solve(gram, rhs)


def _pair_joint(spec: PairPopulationSpec):
    """Yield (prob, type, a, d, d_j) over the exact finite joint law."""
    p1i, p1j = spec.p_treat_own, spec.p_treat_partner
    for t in spec.types:
        if t.weight == 0.0:
            continue
        for a in (0, 1):
            pa = t.p_link if a else 1.0 - t.p_link
            if pa == 0.0:
                continue
            for d in (0, 1):
                pd = p1i if d else 1.0 - p1i
                for dj in (0, 1):
                    pj = p1j if dj else 1.0 - p1j
                    yield t.weight * pa * pd * pj, t, a, d, dj


def _iv_triple_from_moments(ezx, ezy, context):
    """Ratio-form spillover coefficient plus the first two normal equations.

    ``ezx``/``ezy`` are moments of instruments (1, d, z) against
    regressors (1, d, m) and the outcome.  The spillover coefficient is
    the cross-moment ratio of instrument residuals; the intercept and
    direct coefficient solve the remaining 2x2 system given it.
    """
    # Projection of z on (1, d) from the pooled moments.
    g = np.array([[ezx[0, 0], ezx[0, 1]], [ezx[1, 0], ezx[1, 1]]])
    rhs = np.array([ezx[2, 0], ezx[2, 1]])
    gamma = _solve_population(g, rhs, context + " (instrument projection)")
    num = ezy[2] - gamma[0] * ezy[0] - gamma[1] * ezy[1]
    den = ezx[2, 2] - gamma[0] * ezx[0, 2] - gamma[1] * ezx[1, 2]
    if abs(den) < _SINGULAR_TOL:
        raise SingularDesignError(f"{context}: instrument does not move the exposure")
    beta_s = num / den
    rhs2 = np.array([ezy[0] - beta_s * ezx[0, 2], ezy[1] - beta_s * ezx[1, 2]])
    b0, bd = _solve_population(g, rhs2, context)
    return float(b0), float(bd), float(beta_s)


def pair_enumerate(spec: PairPopulationSpec):
    """Population OLS / 2SLS / WLS triples by exact enumeration."""
    exx = np.zeros((3, 3))
    exy = np.zeros(3)
    ezx = np.zeros((3, 3))
    ezy = np.zeros(3)
    euu = np.zeros((3, 3))
    euy = np.zeros(3)
    for p, t, a, d, dj in _pair_joint(spec):
        s = a * dj
        yv = t.y[d, s]
        x = np.array([1.0, d, s])
        z = np.array([1.0, d, dj])
        exx += p * np.outer(x, x)
        exy += p * x * yv
        ezx += p * np.outer(z, x)
        ezy += p * z * yv
        if a:
            euu += p * np.outer(z, z)
            euy += p * z * yv
    ols = tuple(float(v) for v in _solve_population(exx, exy, "pair OLS"))
    tsls = _iv_triple_from_moments(ezx, ezy, "pair 2SLS")
    wls = tuple(float(v) for v in _solve_population(euu, euy, "pair WLS"))
    return ols, tsls, wls


def _pair_primitives(spec: PairPopulationSpec) -> dict[str, float]:
    p1i = spec.p_treat_own
    p1j = spec.p_treat_partner
    p1a = spec.p_link
    p0a = 1.0 - p1a
    if p1a < _SINGULAR_TOL:
        raise SingularDesignError("no linked units: complier averages undefined")

    late = 0.0  # E[tau_bar | linked]
    direct_linked = 0.0  # E[delta_bar | linked]
    direct0_unlinked = 0.0  # E[delta(0) | unlinked]
    y0_linked = np.zeros(2)  # E[y(d, 0) | linked], indexed by d
    y0_unlinked = np.zeros(2)
    for t in spec.types:
        w1 = t.weight * t.p_link / p1a
        tau = {d: t.y[d, 1] - t.y[d, 0] for d in (0, 1)}
        delta = {s: t.y[1, s] - t.y[0, s] for s in (0, 1)}
        late += w1 * (tau[1] * p1i + tau[0] * (1.0 - p1i))
        direct_linked += w1 * (delta[1] * p1j + delta[0] * (1.0 - p1j))
        for d in (0, 1):
            y0_linked[d] += w1 * t.y[d, 0]
        if p0a > _SINGULAR_TOL:
            w0 = t.weight * (1.0 - t.p_link) / p0a
            direct0_unlinked += w0 * delta[0]
            for d in (0, 1):
                y0_unlinked[d] += w0 * t.y[d, 0]
    if p0a > _SINGULAR_TOL:
        eta = y0_linked - y0_unlinked
        eta_bar = eta[1] * p1i + eta[0] * (1.0 - p1i)
    else:
        eta_bar = 0.0  # weightless when everyone is linked
    return {
        "p1a": p1a,
        "p0a": p0a,
        "late": late,
        "direct_linked": direct_linked,
        "direct0_unlinked": direct0_unlinked,
        "eta_bar": eta_bar,
    }


def pair_closed_forms(spec: PairPopulationSpec) -> dict[str, EstimandReport]:
    """Closed-form characterizations checked against enumeration."""
    ols, tsls, wls = pair_enumerate(spec)
    prim = _pair_primitives(spec)
    p1j = spec.p_treat_partner
    bias = prim["eta_bar"] * prim["p0a"] / (1.0 - prim["p1a"] * p1j)
    ols_bd = prim["direct_linked"] * prim["p1a"] + prim["direct0_unlinked"] * prim["p0a"]
    ols_bs = prim["late"] + bias

    reports = {
        "ols": EstimandReport(
            method="ols",
            enumerated=ols,
            closed_form={"beta_d": ols_bd, "beta_s": ols_bs},
            gaps={
                "beta_d": abs(ols_bd - ols[1]),
                "beta_s": abs(ols_bs - ols[2]),
            },
            decomposition={
                "late_term": prim["late"],
                "selection_bias_term": bias,
            },
        ),
        "tsls": EstimandReport(
            method="tsls",
            enumerated=tsls,
            closed_form={"beta_d": ols_bd, "beta_s": prim["late"]},
            gaps={
                "beta_d": abs(ols_bd - tsls[1]),
                "beta_s": abs(prim["late"] - tsls[2]),
            },
        ),
        "wls": EstimandReport(
            method="wls",
            enumerated=wls,
            closed_form={"beta_d": prim["direct_linked"], "beta_s": prim["late"]},
            gaps={
                "beta_d": abs(prim["direct_linked"] - wls[1]),
                "beta_s": abs(prim["late"] - wls[2]),
            },
        ),
    }
    return reports


def _peer_draws(n_peers: int, p1j: float):
    """All peer-treatment vectors with their probabilities."""
    out = []
    for dvec in itertools.product((0, 1), repeat=n_peers):
        p = 1.0
        for dj in dvec:
            p *= p1j if dj else 1.0 - p1j
        out.append((p, dvec))
    return out


def _map_value(exposure_map: ExposureMap, r: int, n_peers: int, a_bar: int) -> float:
    return float(
        exposure_map.apply(
            np.array([r], dtype=np.int64),
            np.array([n_peers], dtype=np.int64),
            degree=np.array([a_bar], dtype=np.int64),
        )[0]
    )


def network_enumerate(spec: NetworkPopulationSpec, exposure_map: ExposureMap):
    """Population OLS / 2SLS / WLS triples for the unit-sum objectives."""
    p1i = spec.p_treat_own
    exx = np.zeros((3, 3))
    exy = np.zeros(3)
    ezx = np.zeros((3, 3))
    ezy = np.zeros(3)
    ewzx = np.zeros((3, 3))
    ewzy = np.zeros(3)
    n = len(spec.units)
    for unit in spec.units:
        draws = _peer_draws(unit.n_peers, spec.p_treat_partner)
        for atom in unit.atoms:
            if atom.weight == 0.0:
                continue
            a = np.asarray(atom.a_vec)
            a_bar = int(a.sum())
            for pd_vec, dvec in draws:
                r = int(a @ np.asarray(dvec))
                m = _map_value(exposure_map, r, unit.n_peers, a_bar)
                for d in (0, 1):
                    p = atom.weight * pd_vec * (p1i if d else 1.0 - p1i) / n
                    yv = atom.y[d, r]
                    x = np.array([1.0, d, m])
                    z = np.array([1.0, d, dvec[0]])
                    exx += p * np.outer(x, x)
                    exy += p * x * yv
                    zx = np.outer(z, x)
                    ezx += p * zx
                    ezy += p * z * yv
                    if atom.a_vec[0]:
                        ewzx += p * zx
                        ewzy += p * z * yv
    ols = tuple(float(v) for v in _solve_population(exx, exy, "network OLS"))
    tsls = _iv_triple_from_moments(ezx, ezy, "network 2SLS")
    wls = _iv_triple_from_moments(ewzx, ewzy, "network WLS")
    return ols, tsls, wls


def network_theorem_values(
    spec: NetworkPopulationSpec, exposure_map: ExposureMap
) -> dict[str, EstimandReport]:
    """Weighted-sum characterizations checked against enumeration.

    The spillover decomposition keeps the full per-(exposure, link
    vector) weight list so the zero-sum and sign diagnostics can be
    inspected; the complier weights are reported per (unit, exposure
    level) and are nonnegative by construction.
    """
    ols, tsls, wls = network_enumerate(spec, exposure_map)
    p1i = spec.p_treat_own
    p0i = 1.0 - p1i
    n = len(spec.units)

    # Pooled exposure moments for the OLS weights.
    em_sum = 0.0
    em2_sum = 0.0
    for unit in spec.units:
        draws = _peer_draws(unit.n_peers, spec.p_treat_partner)
        for atom in unit.atoms:
            a = np.asarray(atom.a_vec)
            a_bar = int(a.sum())
            for pd_vec, dvec in draws:
                m = _map_value(exposure_map, int(a @ np.asarray(dvec)), unit.n_peers, a_bar)
                em_sum += atom.weight * pd_vec * m
                em2_sum += atom.weight * pd_vec * m * m
    mu = em_sum / n
    kappa = em2_sum / n - mu * mu
    if kappa < _SINGULAR_TOL:
        raise SingularDesignError("exposure has zero pooled variance")

    # Direct effect: joint sum over (atom, peer draw), averaged over own t.
    direct_sum = 0.0
    direct_linked_sum = 0.0
    p_linked_sum = 0.0
    # Spillover, OLS route: per (r, a_vec) weights against conditional means.
    pi_weights: list[tuple[int, int, tuple[int, ...], float]] = []
    causal_term = 0.0
    bias_term = 0.0
    # Spillover, IV route: complier weights per exposure level.
    omega_weights: list[tuple[int, int, float]] = []
    iv_numerator = 0.0
    dm_sum = 0.0

    per_unit = []
    for idx, unit in enumerate(spec.units):
        draws = _peer_draws(unit.n_peers, spec.p_treat_partner)
        rest_draws = _peer_draws(unit.n_peers - 1, spec.p_treat_partner)
        groups: dict[tuple[int, ...], list[NetworkUnitAtom]] = {}
        for atom in unit.atoms:
            groups.setdefault(atom.a_vec, []).append(atom)
        per_unit.append((idx, unit, draws, rest_draws, groups))

    for idx, unit, draws, rest_draws, groups in per_unit:
        for atom in unit.atoms:
            a = np.asarray(atom.a_vec)
            for pd_vec, dvec in draws:
                r = int(a @ np.asarray(dvec))
                delta = atom.y[1, r] - atom.y[0, r]
                direct_sum += atom.weight * pd_vec * delta
                if atom.a_vec[0]:
                    direct_linked_sum += atom.weight * pd_vec * delta
            if atom.a_vec[0]:
                p_linked_sum += atom.weight

        for a_vec, atoms in groups.items():
            a = np.asarray(a_vec)
            a_bar = int(a.sum())
            prob_a = sum(at.weight for at in atoms)
            if prob_a == 0.0:
                continue
            # Conditional means given the link vector.
            tau0_bar = np.zeros(unit.n_peers + 1)
            y0_bar = 0.0
            for at in atoms:
                w = at.weight / prob_a
                for r in range(unit.n_peers + 1):
                    tau0 = (at.y[1, r] - at.y[1, 0]) * p1i + (at.y[0, r] - at.y[0, 0]) * p0i
                    tau0_bar[r] += w * tau0
                y0_bar += w * (at.y[1, 0] * p1i + at.y[0, 0] * p0i)
            pr_r = np.zeros(unit.n_peers + 1)
            for pd_vec, dvec in draws:
                pr_r[int(a @ np.asarray(dvec))] += pd_vec
            for r in range(unit.n_peers + 1):
                if pr_r[r] == 0.0:
                    continue
                m = _map_value(exposure_map, r, unit.n_peers, a_bar)
                pi = (m - mu) * prob_a * pr_r[r] / kappa
                pi_weights.append((idx, r, a_vec, pi))
                causal_term += pi * tau0_bar[r]
                bias_term += pi * y0_bar

        # Complier route: first peer forced treated vs untreated.
        unit_prob = np.zeros(unit.n_peers + 1)
        unit_num = np.zeros(unit.n_peers + 1)
        for atom in unit.atoms:
            a_rest = np.asarray(atom.a_vec[1:])
            a_bar = int(sum(atom.a_vec))
            a1 = atom.a_vec[0]
            for pd_rest, dvec_rest in rest_draws:
                r_rest = int(a_rest @ np.asarray(dvec_rest)) if dvec_rest else 0
                m_lo = _map_value(exposure_map, r_rest, unit.n_peers, a_bar)
                m_hi = _map_value(exposure_map, r_rest + a1, unit.n_peers, a_bar)
                dm_sum += atom.weight * pd_rest * (m_hi - m_lo)
                if a1:
                    r = r_rest + 1
                    tau1 = (atom.y[1, r] - atom.y[1, r - 1]) * p1i + (
                        atom.y[0, r] - atom.y[0, r - 1]
                    ) * p0i
                    unit_prob[r] += atom.weight * pd_rest
                    unit_num[r] += atom.weight * pd_rest * tau1
        for r in range(1, unit.n_peers + 1):
            if unit_prob[r] > 0.0:
                omega_weights.append((idx, r, unit_prob[r]))
        iv_numerator += unit_num.sum()

    thm1_bd = direct_sum / n
    thm1_bs = (causal_term + bias_term) / n
    dm_mean = dm_sum / n
    if dm_mean < _SINGULAR_TOL:
        raise SingularDesignError("instrument does not move the exposure map")
    thm2_bs = iv_numerator / n / dm_mean
    pi_a = p_linked_sum / n
    if pi_a < _SINGULAR_TOL:
        raise SingularDesignError("no unit has a linked first peer")
    thm3_bd = direct_linked_sum / n / pi_a
    thm3_bs = thm2_bs

    omega = [(i, r, p / dm_mean) for i, r, p in omega_weights]
    omega_sum = sum(w for _, _, w in omega) / n
    pi_values = np.array([w for _, _, _, w in pi_weights])
    ols_decomp = {
        "causal_term": causal_term / n,
        "selection_bias_term": bias_term / n,
        "pi_weights": tuple(pi_weights),
        "pi_sum": float(pi_values.sum() / n),
        "pi_min": float(pi_values.min()),
    }
    iv_decomp = {
        "omega_weights": tuple(omega),
        "omega_sum": float(omega_sum),
        "omega_min": float(min((w for _, _, w in omega), default=0.0)),
        "exposure_shift_mean": dm_mean,
    }
    return {
        "ols": EstimandReport(
            method="ols",
            enumerated=ols,
            closed_form={"beta_d": thm1_bd, "beta_s": thm1_bs},
            gaps={
                "beta_d": abs(thm1_bd - ols[1]),
                "beta_s": abs(thm1_bs - ols[2]),
            },
            decomposition=ols_decomp,
        ),
        "tsls": EstimandReport(
            method="tsls",
            enumerated=tsls,
            closed_form={"beta_d": thm1_bd, "beta_s": thm2_bs},
            gaps={
                "beta_d": abs(thm1_bd - tsls[1]),
                "beta_s": abs(thm2_bs - tsls[2]),
            },
            decomposition=iv_decomp,
        ),
        "wls": EstimandReport(
            method="wls",
            enumerated=wls,
            closed_form={"beta_d": thm3_bd, "beta_s": thm3_bs},
            gaps={
                "beta_d": abs(thm3_bd - wls[1]),
                "beta_s": abs(thm3_bs - wls[2]),
            },
            decomposition=iv_decomp,
        ),
    }


def _normalized_weights(rng: np.random.Generator, k: int) -> np.ndarray:
    w = rng.uniform(1.0, 2.0, k)
    return w / w.sum()


def random_pair_spec(rng: np.random.Generator) -> PairPopulationSpec:
    """Random spec inside bounds that keep designs well-conditioned."""
    k = int(rng.integers(2, 5))
    weights = _normalized_weights(rng, k)
    types = tuple(
        PairUnitType(
            weight=float(weights[i]),
            y=rng.uniform(-5.0, 5.0, (2, 2)),
            p_link=float(rng.uniform(0.1, 0.9)),
        )
        for i in range(k)
    )
    return PairPopulationSpec(
        types=types,
        p_treat_own=float(rng.uniform(0.1, 0.9)),
        p_treat_partner=float(rng.uniform(0.1, 0.9)),
    )


def random_network_spec(
    rng: np.random.Generator, max_units: int = 8, max_atoms: int = 3
) -> NetworkPopulationSpec:
    n_units = int(rng.integers(2, max_units + 1))
    units = []
    for _ in range(n_units):
        n_peers = int(rng.integers(1, 4))
        k = int(rng.integers(1, max_atoms + 1))
        weights = _normalized_weights(rng, k)
        atoms = []
        for j in range(k):
            atoms.append(
                NetworkUnitAtom(
                    weight=float(weights[j]),
                    y=rng.uniform(-5.0, 5.0, (2, n_peers + 1)),
                    a_vec=tuple(int(v) for v in rng.integers(0, 2, n_peers)),
                )
            )
        units.append(NetworkUnitSpec(n_peers=n_peers, atoms=tuple(atoms)))
    # The IV needs at least one linked first peer somewhere.
    if not any(a.a_vec[0] for u in units for a in u.atoms):
        u0 = units[0]
        a0 = u0.atoms[0]
        fixed = NetworkUnitAtom(
            weight=a0.weight, y=a0.y, a_vec=(1,) + a0.a_vec[1:]
        )
        units[0] = NetworkUnitSpec(n_peers=u0.n_peers, atoms=(fixed,) + u0.atoms[1:])
    return NetworkPopulationSpec(
        units=tuple(units),
        p_treat_own=float(rng.uniform(0.1, 0.9)),
        p_treat_partner=float(rng.uniform(0.1, 0.9)),
    )


def sample_pair(spec: PairPopulationSpec, n: int, seed: int = 0) -> PairDataset:
    """Draw an i.i.d. sample from the pair population law."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    weights = np.array([t.weight for t in spec.types])
    p_link = np.array([t.p_link for t in spec.types])
    tables = np.stack([t.y for t in spec.types])
    idx = rng.choice(len(spec.types), size=n, p=weights)
    a = (rng.random(n) < p_link[idx]).astype(np.int8)
    d = (rng.random(n) < spec.p_treat_own).astype(np.int8)
    d_j = (rng.random(n) < spec.p_treat_partner).astype(np.int8)
    s = a * d_j
    y = tables[idx, d.astype(np.int64), s.astype(np.int64)]
    return PairDataset(y=y, d=d, d_j=d_j, a=a)


def sample_network(
    spec: NetworkPopulationSpec, copies: int, seed: int = 0
) -> NetworkDataset:
    """Draw ``copies`` independent realizations of the whole finite population."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    kmax = max(u.n_peers for u in spec.units)
    ys, ds, d_peers, a_peers, sizes = [], [], [], [], []
    for unit in spec.units:
        weights = np.array([a.weight for a in unit.atoms])
        tables = np.stack([a.y for a in unit.atoms])
        links = np.stack([np.asarray(a.a_vec) for a in unit.atoms])
        idx = rng.choice(len(unit.atoms), size=copies, p=weights)
        d = (rng.random(copies) < spec.p_treat_own).astype(np.int8)
        dv = (rng.random((copies, unit.n_peers)) < spec.p_treat_partner).astype(np.int8)
        av = links[idx].astype(np.int8)
        r = (av * dv).sum(axis=1)
        y = tables[idx, d.astype(np.int64), r]
        pad = kmax - unit.n_peers
        ys.append(y)
        ds.append(d)
        d_peers.append(np.pad(dv, ((0, 0), (0, pad))))
        a_peers.append(np.pad(av, ((0, 0), (0, pad))))
        sizes.append(np.full(copies, unit.n_peers, dtype=np.int64))
    d_peers_all = np.concatenate(d_peers)
    a_peers_all = np.concatenate(a_peers)
    return NetworkDataset(
        y=np.concatenate(ys),
        d=np.concatenate(ds),
        d1=d_peers_all[:, 0],
        r=(a_peers_all * d_peers_all).sum(axis=1).astype(np.int64),
        n_peers=np.concatenate(sizes),
        d_peers=d_peers_all,
        a_peers=a_peers_all,
    )


def pair_endogeneity_demo_spec() -> PairPopulationSpec:
    """Discretized endogenous-links population: no effects, biased OLS.

    Five equally likely baseline levels; higher-baseline units are more
    likely to be linked, so the OLS spillover coefficient is positive
    while both IV estimands are exactly zero.
    """
    grid = (-0.8, -0.4, 0.0, 0.4, 0.8)
    types = tuple(
        PairUnitType(
            weight=1.0 / len(grid),
            y=np.full((2, 2), 1.0 + u),
            p_link=(1.0 + u) / 2.0,
        )
        for u in grid
    )
    return PairPopulationSpec(types=types, p_treat_own=0.5, p_treat_partner=0.5)


def negative_weight_demo_spec() -> NetworkPopulationSpec:
    """Two-unit population with strong outcome-link correlation.

    Every potential-outcome table is flat in exposure (all spillover
    effects are zero), yet linked units sit on a higher baseline.  The
    OLS decomposition shows a nonzero selection-bias term and negative
    exposure weights; the complier-weighted value stays at the true
    zero.
    """

    def flat(n_peers, level, direct):
        y = np.empty((2, n_peers + 1))
        y[0, :] = level
        y[1, :] = level + direct
        return y

    unit1 = NetworkUnitSpec(
        n_peers=1,
        atoms=(
            NetworkUnitAtom(weight=0.5, y=flat(1, 2.0, 0.5), a_vec=(1,)),
            NetworkUnitAtom(weight=0.5, y=flat(1, 0.0, 0.5), a_vec=(0,)),
        ),
    )
    unit2 = NetworkUnitSpec(
        n_peers=2,
        atoms=(
            NetworkUnitAtom(weight=0.4, y=flat(2, 3.0, 1.0), a_vec=(1, 1)),
            NetworkUnitAtom(weight=0.6, y=flat(2, -1.0, 1.0), a_vec=(0, 1)),
        ),
    )
    return NetworkPopulationSpec(
        units=(unit1, unit2), p_treat_own=0.5, p_treat_partner=0.5
    )
