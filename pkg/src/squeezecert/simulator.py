"""Exact small-N collective-spin engine and Monte Carlo oracle.

Everything lives in the maximal-spin symmetric sector, so an N-spin
state is an (N+1)-component amplitude vector over |J=N/2, m> with m
ascending from -N/2 to N/2 (normalized outcome q = 2m/N ascending from
-1 to 1). States are rotated onto arbitrary measurement axes by exact
Hermitian diagonalization of the collective spin operator, which keeps
the accuracy testable through the commutation relations.

Sampling uses counter-based substreams: the uniforms of trial t are a
pure function of (seed, t), so results are bit-identical for a fixed
seed regardless of how trials are chunked across workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import beta as _beta_dist

from .errors import (
    BlockingError,
    DivisionError,
    DomainError,
    NullViolation,
    SizeError,
    ValidationError,
)
from .model import MeasurementBatch, TangentPoint

DEFAULT_N_MAX = 64

AXIS_X = (1.0, 0.0, 0.0)
AXIS_Y = (0.0, 1.0, 0.0)
AXIS_Z = (0.0, 0.0, 1.0)
#: (mean-spin axis, low-variance axis) used when no axes are given.
DEFAULT_AXES = (AXIS_X, AXIS_Z)

_NORM_TOL = 1e-12
_PROB_SUM_TOL = 1e-10
_NULL_TOL = 1e-12
_Z99 = 2.5758293035489004  # two-sided 99% normal quantile
_BATCH_STREAM = 1 << 63  # substream index reserved for single-batch sampling
_CHUNK_TARGET = 1 << 22  # uniforms drawn per work chunk (not per worker)


def _unit_axis(axis) -> np.ndarray:
    arr = np.asarray(axis, dtype=float).reshape(3)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0 or not np.all(np.isfinite(arr)):
        raise ValidationError(f"axis must be a nonzero finite 3-vector, got {axis!r}")
    out = arr / norm
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class SymmetricState:
    """Pure state of the (N+1)-dimensional symmetric sector."""

    n_spins: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        n = int(self.n_spins)
        if n < 1:
            raise ValidationError(f"n_spins must be >= 1, got {self.n_spins!r}")
        amps = np.array(self.amplitudes, dtype=complex, copy=True)
        if amps.shape != (n + 1,):
            raise ValidationError(
                f"amplitudes must have length n_spins + 1 = {n + 1}, got {amps.shape}"
            )
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > _NORM_TOL:
            raise ValidationError(f"state norm**2 = {norm_sq!r} deviates from 1")
        amps.flags.writeable = False
        object.__setattr__(self, "n_spins", n)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(self.n_spins + 1) - self.n_spins / 2.0


@dataclass(frozen=True, eq=False)
class StateMixture:
    """Convex mixture of symmetric-sector states (same particle number)."""

    components: tuple[tuple[float, SymmetricState], ...]

    def __post_init__(self) -> None:
        comps = tuple((float(w), s) for w, s in self.components)
        if not comps:
            raise ValidationError("mixture needs at least one component")
        if any(w < -1e-15 for w, _ in comps):
            raise ValidationError("mixture weights must be nonnegative")
        total = sum(w for w, _ in comps)
        if abs(total - 1.0) > _NORM_TOL:
            raise ValidationError(f"mixture weights sum to {total!r}, expected 1")
        sizes = {s.n_spins for _, s in comps}
        if len(sizes) != 1:
            raise ValidationError(f"mixture mixes different system sizes: {sorted(sizes)}")
        object.__setattr__(self, "components", comps)

    @property
    def n_spins(self) -> int:
        return self.components[0][1].n_spins


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """Born probabilities of the normalized collective spin along one axis."""

    axis: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "axis", _unit_axis(self.axis))
        probs = np.array(self.probabilities, dtype=float, copy=True)
        if probs.ndim != 1 or probs.size < 2:
            raise ValidationError("probabilities must be a vector of length N + 1 >= 2")
        if np.any(probs < -_PROB_SUM_TOL):
            raise ValidationError("probabilities must be nonnegative")
        total = float(probs.sum())
        if abs(total - 1.0) > _PROB_SUM_TOL:
            raise ValidationError(f"probabilities sum to {total!r}, expected 1")
        np.clip(probs, 0.0, None, out=probs)
        probs.flags.writeable = False
        object.__setattr__(self, "probabilities", probs)

    @property
    def n_spins(self) -> int:
        return int(self.probabilities.size - 1)

    @property
    def q_values(self) -> np.ndarray:
        n = self.n_spins
        return (2.0 * np.arange(n + 1) - n) / n

    def moment(self, order: int) -> float:
        return float(np.sum(self.probabilities * self.q_values**order))

    def mean(self) -> float:
        return self.moment(1)

    def variance(self) -> float:
        m1 = self.moment(1)
        return self.moment(2) - m1 * m1


def _check_size(n_spins: int, n_max: int) -> int:
    n = int(n_spins)
    if not 1 <= n <= n_max:
        raise SizeError(f"n_spins must lie in [1, {n_max}] for exact simulation, got {n}")
    return n


def spin_operators(n_spins: int, n_max: int = DEFAULT_N_MAX):
    """Collective spin matrices (J_x, J_y, J_z) on the symmetric sector.

    Basis order follows m ascending, so J_z is diag(-N/2, ..., N/2) and
    the returned matrices satisfy [J_x, J_y] = i J_z to machine accuracy.
    """
    n = _check_size(n_spins, n_max)
    j = n / 2.0
    m = np.arange(n + 1) - j
    jz = np.diag(m).astype(complex)
    ladder = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1.0))
    jplus = np.zeros((n + 1, n + 1), dtype=complex)
    jplus[np.arange(1, n + 1), np.arange(n)] = ladder
    jx = (jplus + jplus.conj().T) / 2.0
    jy = (jplus - jplus.conj().T) / 2.0j
    return jx, jy, jz


def collective_operator(n_spins: int, axis, n_max: int = DEFAULT_N_MAX) -> np.ndarray:
    """J along a unit axis: ax*Jx + ay*Jy + az*Jz."""
    ax = _unit_axis(axis)
    jx, jy, jz = spin_operators(n_spins, n_max)
    return ax[0] * jx + ax[1] * jy + ax[2] * jz


def _is_plus_z(axis: np.ndarray) -> bool:
    return axis[0] == 0.0 and axis[1] == 0.0 and axis[2] == 1.0


def _is_minus_z(axis: np.ndarray) -> bool:
    return axis[0] == 0.0 and axis[1] == 0.0 and axis[2] == -1.0


def css_state(n_spins: int, axis, n_max: int = DEFAULT_N_MAX) -> SymmetricState:
    """Coherent spin state: every spin aligned with ``axis``.

    Built as the top eigenvector of the collective spin along the axis
    (eigenvalue N/2, nondegenerate), with the phase fixed so that the
    largest amplitude is real and positive.
    """
    n = _check_size(n_spins, n_max)
    ax = _unit_axis(axis)
    amps = np.zeros(n + 1, dtype=complex)
    if _is_plus_z(ax):
        amps[-1] = 1.0
        return SymmetricState(n, amps)
    if _is_minus_z(ax):
        amps[0] = 1.0
        return SymmetricState(n, amps)
    op = collective_operator(n, ax, n_max)
    _, vecs = np.linalg.eigh(op)
    top = vecs[:, -1]
    k = int(np.argmax(np.abs(top)))
    top = top * (top[k].conjugate() / abs(top[k]))
    top = top / np.linalg.norm(top)
    return SymmetricState(n, top)


def one_axis_twist(state: SymmetricState, theta: float) -> SymmetricState:
    """Apply the twisting phase exp(-i * theta * m**2) per Dicke component."""
    phases = np.exp(-1j * float(theta) * state.m_values**2)
    return SymmetricState(state.n_spins, state.amplitudes * phases)


def measure_distribution(obj, axis, n_max: int = DEFAULT_N_MAX) -> OutcomeDistribution:
    """Exact outcome distribution of Q = 2 J_axis / N.

    Mixtures average their component distributions by weight, which
    also realizes independent per-measurement component draws when
    sampling (the component label is never recorded).
    """
    ax = _unit_axis(axis)
    if isinstance(obj, StateMixture):
        probs = None
        for w, state in obj.components:
            p = measure_distribution(state, ax, n_max).probabilities
            probs = w * p if probs is None else probs + w * p
        return OutcomeDistribution(ax, probs)
    state = obj
    n = _check_size(state.n_spins, n_max)
    if _is_plus_z(ax):
        probs = np.abs(state.amplitudes) ** 2
    elif _is_minus_z(ax):
        probs = np.abs(state.amplitudes[::-1]) ** 2
    else:
        op = collective_operator(n, ax, n_max)
        _, vecs = np.linalg.eigh(op)
        probs = np.abs(vecs.conj().T @ state.amplitudes) ** 2
    return OutcomeDistribution(ax, probs)


def exact_moments(obj, axis, n_max: int = DEFAULT_N_MAX) -> tuple[float, float]:
    """(mean, second moment) of Q along an axis via matrix elements."""
    if isinstance(obj, StateMixture):
        m1 = m2 = 0.0
        for w, state in obj.components:
            s1, s2 = exact_moments(state, axis, n_max)
            m1 += w * s1
            m2 += w * s2
        return m1, m2
    state = obj
    n = _check_size(state.n_spins, n_max)
    op = collective_operator(n, axis, n_max)
    applied = op @ state.amplitudes
    mean_j = float(np.real(np.vdot(state.amplitudes, applied)))
    mean_j2 = float(np.real(np.vdot(applied, applied)))
    return 2.0 * mean_j / n, 4.0 * mean_j2 / (n * n)


def exact_variance(obj, axis, n_max: int = DEFAULT_N_MAX) -> float:
    m1, m2 = exact_moments(obj, axis, n_max)
    return m2 - m1 * m1


def exact_wineland(obj, n_axis=AXIS_X, perp_axis=AXIS_Z, n_max: int = DEFAULT_N_MAX) -> float:
    """Squeezing parameter from exact moments along the two axes."""
    n = obj.n_spins
    mean_par, _ = exact_moments(obj, n_axis, n_max)
    if mean_par == 0.0:
        raise DivisionError("state has zero mean spin along the reference axis")
    return n * exact_variance(obj, perp_axis, n_max) / (mean_par * mean_par)


def exact_gamma_linear(obj, n_axis=AXIS_X, perp_axis=AXIS_Z, n_max: int = DEFAULT_N_MAX) -> float:
    """Exact linear witness N * Var(Q_perp) - <Q_par>**2."""
    mean_par, _ = exact_moments(obj, n_axis, n_max)
    return obj.n_spins * exact_variance(obj, perp_axis, n_max) - mean_par * mean_par


def exact_gamma_c(
    obj, c: TangentPoint, n_axis=AXIS_X, perp_axis=AXIS_Z, n_max: int = DEFAULT_N_MAX
) -> float:
    """Exact tangent-plane witness of a state (affine in its moments)."""
    n = obj.n_spins
    mean_perp, sq_perp = exact_moments(obj, perp_axis, n_max)
    mean_par, _ = exact_moments(obj, n_axis, n_max)
    a, b = c.alpha, c.beta
    return n * sq_perp - 2.0 * a * n * mean_perp - 2.0 * b * mean_par + n * a * a + b * b


def _perp_frame(n_axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    helper = np.array(AXIS_Z) if abs(n_axis[2]) < 0.9 else np.array(AXIS_X)
    u = np.cross(helper, n_axis)
    u = u / np.linalg.norm(u)
    v = np.cross(n_axis, u)
    return u, v


def min_variance_perp_axis(
    obj, n_axis=AXIS_X, n_max: int = DEFAULT_N_MAX
) -> tuple[np.ndarray, float]:
    """Axis orthogonal to ``n_axis`` with minimal Q variance, plus that variance.

    The variance in the orthogonal plane is a sinusoid in the doubled
    angle, so the minimizer comes from the 2x2 covariance block in
    closed form rather than a numeric scan.
    """
    ax = _unit_axis(n_axis)
    u, v = _perp_frame(ax)
    mu_u, m2_u = exact_moments(obj, u, n_max)
    mu_v, m2_v = exact_moments(obj, v, n_max)
    var_u = m2_u - mu_u * mu_u
    var_v = m2_v - mu_v * mu_v
    cov = _symmetrized_cov(obj, u, v, n_max) - mu_u * mu_v
    half_diff = 0.5 * (var_u - var_v)
    amplitude = math.hypot(half_diff, cov)
    phi = 0.5 * (math.atan2(cov, half_diff) + math.pi)
    best_axis = math.cos(phi) * u + math.sin(phi) * v
    best_axis.flags.writeable = False
    return best_axis, 0.5 * (var_u + var_v) - amplitude


def _symmetrized_cov(obj, axis_a, axis_b, n_max: int) -> float:
    """<(Q_a Q_b + Q_b Q_a) / 2> from matrix elements."""
    if isinstance(obj, StateMixture):
        return sum(w * _symmetrized_cov(s, axis_a, axis_b, n_max) for w, s in obj.components)
    n = obj.n_spins
    op_a = collective_operator(n, axis_a, n_max)
    op_b = collective_operator(n, axis_b, n_max)
    lhs = op_a @ obj.amplitudes
    rhs = op_b @ obj.amplitudes
    return 4.0 * float(np.real(np.vdot(lhs, rhs))) / (n * n)


def nonsqueezed_mixture(
    chi: SymmetricState, r: float, perp_axis=AXIS_Z, n_max: int = DEFAULT_N_MAX
) -> StateMixture:
    """Squeezed component with weight r plus an equal split of the two
    fully polarized product states along the low-variance axis."""
    r = float(r)
    if not 0.0 <= r <= 1.0:
        raise ValidationError(f"mixture weight r must lie in [0, 1], got {r!r}")
    ax = _unit_axis(perp_axis)
    up = css_state(chi.n_spins, ax, n_max)
    down = css_state(chi.n_spins, -ax, n_max)
    return StateMixture(((r, chi), ((1.0 - r) / 2.0, up), ((1.0 - r) / 2.0, down)))


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _substream(seed: int, index: int) -> np.random.Generator:
    key = np.array([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index) & 0xFFFFFFFFFFFFFFFF],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _inverse_cdf(dist: OutcomeDistribution) -> tuple[np.ndarray, np.ndarray]:
    cdf = np.cumsum(dist.probabilities)
    return cdf, dist.q_values


def _draw(cdf: np.ndarray, q: np.ndarray, u: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(cdf, u, side="right")
    np.clip(idx, 0, q.size - 1, out=idx)
    return q[idx]


def sample_batch(
    obj,
    axes=DEFAULT_AXES,
    rounds: int = 1,
    seed: int = 0,
    n_max: int = DEFAULT_N_MAX,
) -> MeasurementBatch:
    """Draw i.i.d. rounds; each round measures once along each axis.

    ``axes`` is (mean-spin axis, low-variance axis). Mixture components
    are drawn independently per measurement, which is equivalent to
    sampling the weight-averaged outcome distribution.
    """
    rounds = int(rounds)
    if rounds < 1:
        raise ValidationError(f"rounds must be >= 1, got {rounds!r}")
    dist_par = measure_distribution(obj, axes[0], n_max)
    dist_perp = measure_distribution(obj, axes[1], n_max)
    cdf_p, q_p = _inverse_cdf(dist_perp)
    cdf_n, q_n = _inverse_cdf(dist_par)
    u = _substream(seed, _BATCH_STREAM).random((rounds, 2))
    return MeasurementBatch(
        n_spins=obj.n_spins,
        q_perp=_draw(cdf_p, q_p, u[:, 0]),
        q_par=_draw(cdf_n, q_n, u[:, 1]),
    )


def _statistic_samples(
    obj,
    axes,
    m_total: int,
    trials: int,
    seed: int,
    statistic: Callable[[np.ndarray, np.ndarray], np.ndarray],
    workers: int,
    n_max: int,
) -> np.ndarray:
    m_total = int(m_total)
    if m_total < 2 or m_total % 2 != 0:
        raise ValidationError(f"total count M must be even and >= 2, got {m_total!r}")
    trials = int(trials)
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials!r}")
    rounds = m_total // 2
    dist_par = measure_distribution(obj, axes[0], n_max)
    dist_perp = measure_distribution(obj, axes[1], n_max)
    cdf_p, q_p = _inverse_cdf(dist_perp)
    cdf_n, q_n = _inverse_cdf(dist_par)

    def run_chunk(bounds: tuple[int, int]) -> np.ndarray:
        t0, t1 = bounds
        u = np.empty((t1 - t0, rounds, 2))
        for i, t in enumerate(range(t0, t1)):
            u[i] = _substream(seed, t).random((rounds, 2))
        qp = _draw(cdf_p, q_p, u[:, :, 0])
        qn = _draw(cdf_n, q_n, u[:, :, 1])
        return statistic(qp, qn)

    # chunk size is independent of the worker count, so the per-trial
    # substreams make the result identical for any parallelism degree
    chunk = max(1, _CHUNK_TARGET // max(rounds, 1))
    tasks = [(t0, min(t0 + chunk, trials)) for t0 in range(0, trials, chunk)]
    if workers <= 1 or len(tasks) == 1:
        parts = [run_chunk(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            parts = list(pool.map(run_chunk, tasks))
    return np.concatenate(parts)


def gamma_c_mean_samples(
    obj,
    c: TangentPoint,
    m_total: int,
    trials: int,
    seed: int,
    *,
    axes=DEFAULT_AXES,
    workers: int = 1,
    n_max: int = DEFAULT_N_MAX,
) -> np.ndarray:
    """Per-trial means of the tangent-plane statistic over M/2 rounds."""
    n = obj.n_spins
    a, b = c.alpha, c.beta
    const = n * a * a + b * b

    def statistic(qp: np.ndarray, qn: np.ndarray) -> np.ndarray:
        return (
            n * np.mean(np.square(qp), axis=1)
            - 2.0 * a * n * np.mean(qp, axis=1)
            - 2.0 * b * np.mean(qn, axis=1)
            + const
        )

    return _statistic_samples(obj, axes, m_total, trials, seed, statistic, workers, n_max)


def gamma_tilde_samples(
    obj,
    m_total: int,
    trials: int,
    seed: int,
    *,
    axes=DEFAULT_AXES,
    workers: int = 1,
    n_max: int = DEFAULT_N_MAX,
) -> np.ndarray:
    """Per-trial values of the plug-in witness (sample variance route)."""
    if m_total < 4:
        raise ValidationError("the plug-in witness needs at least 2 rounds (M >= 4)")
    n = obj.n_spins

    def statistic(qp: np.ndarray, qn: np.ndarray) -> np.ndarray:
        var_perp = np.var(qp, axis=1, ddof=1)
        second = np.mean(np.square(qn), axis=1) - np.var(qn, axis=1, ddof=1)
        return n * var_perp - second

    return _statistic_samples(obj, axes, m_total, trials, seed, statistic, workers, n_max)


def gamma_prime_samples(
    obj,
    m_total: int,
    trials: int,
    seed: int,
    *,
    axes=DEFAULT_AXES,
    workers: int = 1,
    n_max: int = DEFAULT_N_MAX,
) -> np.ndarray:
    """Per-trial values of the pair-block witness (mean over M/4 blocks)."""
    if int(m_total) % 4 != 0:
        raise BlockingError(f"pair blocks need a total count divisible by 4, got M={m_total}")
    n = obj.n_spins

    def statistic(qp: np.ndarray, qn: np.ndarray) -> np.ndarray:
        qp2 = qp.reshape(qp.shape[0], -1, 2)
        qn2 = qn.reshape(qn.shape[0], -1, 2)
        blocks = 0.5 * n * np.square(qp2[:, :, 0] - qp2[:, :, 1]) - qn2[:, :, 0] * qn2[:, :, 1]
        return np.mean(blocks, axis=1)

    return _statistic_samples(obj, axes, m_total, trials, seed, statistic, workers, n_max)


def binomial_halfwidth(successes: int, trials: int, confidence: float = 0.99) -> float:
    """Two-sided binomial confidence half-width for an empirical frequency.

    Normal approximation in the bulk; exact Clopper-Pearson when either
    tail count is below 10 (where the normal width is untrustworthy).
    """
    successes = int(successes)
    trials = int(trials)
    if trials < 1 or not 0 <= successes <= trials:
        raise ValidationError(f"invalid counts: {successes}/{trials}")
    alpha = 1.0 - float(confidence)
    if min(successes, trials - successes) < 10:
        lo = 0.0 if successes == 0 else float(
            _beta_dist.ppf(alpha / 2.0, successes, trials - successes + 1)
        )
        hi = 1.0 if successes == trials else float(
            _beta_dist.ppf(1.0 - alpha / 2.0, successes + 1, trials - successes)
        )
        return (hi - lo) / 2.0
    freq = successes / trials
    if confidence != 0.99:
        from scipy.stats import norm as _norm

        z = float(_norm.ppf(1.0 - alpha / 2.0))
    else:
        z = _Z99
    return z * math.sqrt(freq * (1.0 - freq) / trials)


def empirical_tail(
    obj,
    c: TangentPoint,
    gamma_c: float,
    m_total: int,
    trials: int,
    seed: int,
    *,
    axes=DEFAULT_AXES,
    workers: int = 1,
    check_null: bool = True,
    n_max: int = DEFAULT_N_MAX,
) -> tuple[float, float]:
    """Empirical frequency of {mean tangent statistic <= gamma_c}.

    The Monte Carlo oracle for the tangent-plane Bernstein bound.
    With ``check_null`` the state's exact witness must be nonnegative
    (a genuine null state), otherwise :class:`NullViolation` is raised.
    Returns (frequency, 99% binomial confidence half-width).
    """
    if not float(gamma_c) < 0.0:
        raise DomainError(f"threshold gamma_c must be negative, got {gamma_c!r}")
    if check_null:
        exact = exact_gamma_c(obj, c, axes[0], axes[1], n_max)
        if exact < -_NULL_TOL:
            raise NullViolation(
                f"state has exact witness {exact!r} < 0 and cannot serve as a null oracle"
            )
    samples = gamma_c_mean_samples(
        obj, c, m_total, trials, seed, axes=axes, workers=workers, n_max=n_max
    )
    successes = int(np.sum(samples <= float(gamma_c)))
    return successes / trials, binomial_halfwidth(successes, trials)


def empirical_tail_linear(
    obj,
    gamma: float,
    m_total: int,
    trials: int,
    seed: int,
    *,
    axes=DEFAULT_AXES,
    workers: int = 1,
    check_null: bool = True,
    n_max: int = DEFAULT_N_MAX,
) -> tuple[float, float]:
    """Empirical tail of the plug-in witness (oracle for the McDiarmid bound)."""
    if not float(gamma) < 0.0:
        raise DomainError(f"threshold gamma must be negative, got {gamma!r}")
    if check_null:
        exact = exact_gamma_linear(obj, axes[0], axes[1], n_max)
        if exact < -_NULL_TOL:
            raise NullViolation(
                f"state has exact linear witness {exact!r} < 0; not a null state"
            )
    samples = gamma_tilde_samples(
        obj, m_total, trials, seed, axes=axes, workers=workers, n_max=n_max
    )
    successes = int(np.sum(samples <= float(gamma)))
    return successes / trials, binomial_halfwidth(successes, trials)


def empirical_tail_blocks(
    obj,
    gamma: float,
    m_total: int,
    trials: int,
    seed: int,
    *,
    axes=DEFAULT_AXES,
    workers: int = 1,
    check_null: bool = True,
    n_max: int = DEFAULT_N_MAX,
) -> tuple[float, float]:
    """Empirical tail of the pair-block witness (oracle for its Bernstein bound)."""
    if not float(gamma) < 0.0:
        raise DomainError(f"threshold gamma must be negative, got {gamma!r}")
    if check_null:
        exact = exact_gamma_linear(obj, axes[0], axes[1], n_max)
        if exact < -_NULL_TOL:
            raise NullViolation(
                f"state has exact linear witness {exact!r} < 0; not a null state"
            )
    samples = gamma_prime_samples(
        obj, m_total, trials, seed, axes=axes, workers=workers, n_max=n_max
    )
    successes = int(np.sum(samples <= float(gamma)))
    return successes / trials, binomial_halfwidth(successes, trials)


def statistic_sigma_per_round(
    obj, c: TangentPoint, *, axes=DEFAULT_AXES, n_max: int = DEFAULT_N_MAX
) -> float:
    """Exact standard deviation of the per-round tangent statistic."""
    n = obj.n_spins
    a, b = c.alpha, c.beta
    dist_perp = measure_distribution(obj, axes[1], n_max)
    dist_par = measure_distribution(obj, axes[0], n_max)
    m1, m2, m3, m4 = (dist_perp.moment(k) for k in (1, 2, 3, 4))
    var_sq = m4 - m2 * m2
    cov_sq_lin = m3 - m2 * m1
    var_lin = m2 - m1 * m1
    var_perp_part = (
        n * n * var_sq
        - 4.0 * a * n * n * cov_sq_lin
        + 4.0 * a * a * n * n * var_lin
    )
    var_par_part = 4.0 * b * b * dist_par.variance()
    return math.sqrt(max(0.0, var_perp_part + var_par_part))


def default_gamma_grid(
    obj,
    c: TangentPoint,
    m_total: int,
    *,
    axes=DEFAULT_AXES,
    count: int = 5,
    n_max: int = DEFAULT_N_MAX,
) -> list[float]:
    """Negative thresholds spanning the sampling scale of the mean statistic.

    Spaced at {0.5, 1, ..., 3} standard errors of the per-round mean and
    clamped above the statistic's exact minimum, so the tail frequencies
    range from moderate to rare without becoming impossible events.
    """
    from .bounds import gamma_c_extrema  # local import to avoid a cycle

    if count < 1:
        raise ValidationError(f"count must be >= 1, got {count!r}")
    sigma = statistic_sigma_per_round(obj, c, axes=axes, n_max=n_max)
    rounds = max(1, int(m_total) // 2)
    scale = sigma / math.sqrt(rounds)
    gamma0 = gamma_c_extrema(obj.n_spins, c).gamma0
    lo = max(0.98 * gamma0, -3.0 * scale)
    hi = -0.5 * scale
    if hi <= lo:
        # degenerate scale (zero or beyond the statistic's range): fall back
        # to fixed fractions of the exact minimum
        lo, hi = 0.98 * gamma0, 0.098 * gamma0
    grid = np.linspace(lo, hi, count)
    out = sorted(float(g) for g in grid)
    if not all(g < 0.0 for g in out) or len(set(out)) != count:
        raise ValidationError("could not build a negative threshold grid")
    return out
