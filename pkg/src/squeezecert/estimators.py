"""Statistics computed from measured data.

The central object is the per-round tangent-plane statistic

    g_c(qp, qn) = N*qp**2 - 2*alpha*N*qp - 2*beta*qn + N*alpha**2 + beta**2

for a tangent point c = (alpha, beta). Its mean over rounds is the
observed value of the linear squeezing witness used by the Bernstein
bound; the classic sample-variance / second-moment route and its
pair-block variant are provided as baselines.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BlockingError, DivisionError, EmptyBatch, TooFewSamples, ValidationError
from .model import MeasurementBatch, SummaryStats, TangentPoint


@dataclass(frozen=True)
class GammaCExtrema:
    """Largest and smallest value the per-round statistic can take.

    For outcomes in [-1, 1]^2 the statistic g_c ranges over
    [gamma0, gamma1] with

        gamma1 = N*(1 + |alpha|)**2 + (1 + |beta|)**2 - 1
        gamma0 = (1 - |beta|)**2 - 1

    so gamma0 <= 0 <= gamma1 always.
    """

    gamma1: float
    gamma0: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma1", float(self.gamma1))
        object.__setattr__(self, "gamma0", float(self.gamma0))
        if not (self.gamma0 <= 0.0 <= self.gamma1):
            raise ValidationError(
                f"extrema must straddle zero: gamma0={self.gamma0!r}, gamma1={self.gamma1!r}"
            )

    @property
    def spread(self) -> float:
        return self.gamma1 - self.gamma0


def wineland_xi2(stats: SummaryStats) -> float:
    """Squeezing parameter N * s_perp / mu_par**2 (dimensionless, >= 0)."""
    if stats.mu_par == 0.0:
        raise DivisionError("mu_par is zero, squeezing parameter undefined")
    return stats.n_spins * stats.s_perp / (stats.mu_par * stats.mu_par)


def gamma_linear(stats: SummaryStats) -> float:
    """Linearized witness N * s_perp - mu_par**2; negative iff squeezed."""
    return stats.n_spins * stats.s_perp - stats.mu_par * stats.mu_par


def tangent_plane(x, y, n_spins: int, c: TangentPoint):
    """Tangent plane of h(x, y) = N x**2 + y**2 at (alpha, beta).

    Affine lower bound of h on the whole plane, with equality exactly at
    the tangency point. Accepts scalars or numpy arrays.
    """
    a, b = c.alpha, c.beta
    return 2.0 * a * n_spins * x + 2.0 * b * y - n_spins * a * a - b * b


def gamma_c_point(q_perp, q_par, n_spins: int, c: TangentPoint):
    """Per-round tangent-plane statistic; vectorizes over outcome arrays."""
    a, b = c.alpha, c.beta
    return (
        n_spins * np.square(q_perp)
        - 2.0 * a * n_spins * q_perp
        - 2.0 * b * q_par
        + n_spins * a * a
        + b * b
    )


def gamma_c_observed(batch: MeasurementBatch, c: TangentPoint) -> float:
    """Mean of the per-round statistic over all rounds of a batch."""
    if batch.n_rounds == 0:
        raise EmptyBatch("cannot average the witness over an empty batch")
    return float(np.mean(gamma_c_point(batch.q_perp, batch.q_par, batch.n_spins, c)))


def gamma_c_from_summary(
    stats: SummaryStats, c: TangentPoint, include_mu_perp: bool = True
) -> float:
    """Observed tangent-plane witness reconstructed from summary statistics.

    The full form is

        N*(s_perp + mu_perp**2) - 2*alpha*N*mu_perp - 2*beta*mu_par
            + N*alpha**2 + beta**2

    which equals the batch mean exactly when ``s_perp`` was computed
    with the biased divisor M/2. With ``include_mu_perp=False`` the
    reduced form drops the transverse mean (sets alpha = 0, mu_perp = 0),
    the conservative choice when mu_perp was never reported.
    """
    n, b = stats.n_spins, c.beta
    if include_mu_perp:
        a, mp = c.alpha, stats.mu_perp
        return (
            n * (stats.s_perp + mp * mp)
            - 2.0 * a * n * mp
            - 2.0 * b * stats.mu_par
            + n * a * a
            + b * b
        )
    return n * stats.s_perp - 2.0 * b * stats.mu_par + b * b


def sample_variance(values) -> float:
    """Unbiased sample variance (divisor M - 1)."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        raise TooFewSamples(f"sample variance needs >= 2 values, got {arr.size}")
    return float(np.var(arr, ddof=1))


def second_moment_estimate(values) -> float:
    """Unbiased estimate of the squared mean: mean of squares minus sample variance.

    Equivalently the average of all cross products q_i * q_j over i != j,
    so the estimate can legitimately be negative.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        raise TooFewSamples(f"second-moment estimate needs >= 2 values, got {arr.size}")
    return float(np.mean(np.square(arr)) - np.var(arr, ddof=1))


def gamma_tilde(batch: MeasurementBatch) -> float:
    """Unbiased plug-in witness: N * var(q_perp) - squared-mean estimate of q_par."""
    if batch.n_rounds < 2:
        raise TooFewSamples("gamma_tilde needs at least 2 rounds")
    return batch.n_spins * sample_variance(batch.q_perp) - second_moment_estimate(batch.q_par)


def gamma_prime_blocks(batch: MeasurementBatch) -> float:
    """Pair-block witness: mean over blocks of two consecutive rounds.

    Block i combines rounds 2i-1 and 2i into

        (N/2) * (qp1 - qp2)**2 - qn1 * qn2

    which is an unbiased single-block estimate of the linear witness;
    the return value is the mean over the M/4 blocks.
    """
    if batch.total_count % 4 != 0:
        raise BlockingError(
            f"pair blocks need a total count divisible by 4, got M={batch.total_count}"
        )
    if batch.n_rounds == 0:
        raise EmptyBatch("cannot form blocks from an empty batch")
    qp = batch.q_perp.reshape(-1, 2)
    qn = batch.q_par.reshape(-1, 2)
    blocks = 0.5 * batch.n_spins * np.square(qp[:, 0] - qp[:, 1]) - qn[:, 0] * qn[:, 1]
    return float(np.mean(blocks))


def gamma_provider_from_batch(batch: MeasurementBatch) -> Callable[[TangentPoint], float]:
    """Observed-witness function c -> gamma_c for a raw batch."""
    if batch.n_rounds == 0:
        raise EmptyBatch("cannot build a witness provider from an empty batch")
    return lambda c: gamma_c_observed(batch, c)


def gamma_provider_from_summary(
    stats: SummaryStats, include_mu_perp: bool = True
) -> Callable[[TangentPoint], float]:
    """Observed-witness function c -> gamma_c for summary statistics."""
    return lambda c: gamma_c_from_summary(stats, c, include_mu_perp=include_mu_perp)
