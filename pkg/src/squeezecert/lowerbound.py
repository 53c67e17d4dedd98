"""p-value lower bounds from an explicit non-squeezed mixture.

Mixing a squeezed state (weight r) with an equal-weight pair of fully
polarized product states along the low-variance axis keeps the
squeezing parameter at or above 1 for every r up to a closed-form
r_max. Since all M measurements hit only the squeezed component with
probability r**M, no test can reject the non-squeezed hypothesis with a
p-value below r_max**M. Inverting gives the minimum number of
measurements any certification needs.

The arithmetic is dtype-preserving: passing ``np.longdouble`` inputs
keeps extended precision end to end, which matters for the closure
identity at extreme (N, contrast) corners.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivisionError, DomainError, ValidationError


def rho_moments(r, chi_q_par, chi_q_perp_sq, n_spins: int):
    """First and second moments of the mixture with squeezed weight ``r``.

    Returns ``(q_par_mean, var_perp)`` where

        q_par_mean = r * <Q_par>_chi
        var_perp   = r * <Q_perp**2>_chi + 1 - r

    The transverse mean vanishes by construction (the squeezed component
    has none and the polarized pair cancels), and each polarized product
    state contributes a full unit of transverse second moment.
    """
    if not 0.0 <= float(r) <= 1.0:
        raise ValidationError(f"mixture weight r must lie in [0, 1], got {r!r}")
    if n_spins < 1:
        raise ValidationError(f"n_spins must be >= 1, got {n_spins!r}")
    return r * chi_q_par, r * chi_q_perp_sq + 1 - r


def r_max(xi2_chi, q_par_sq_chi, n_spins: int):
    """Largest squeezed weight that keeps the mixture non-squeezed.

    Solves r**2 + (N/q**2 - xi2) r - N/q**2 = 0 for its positive root,
    written in the cancellation-free form

        r_max = (2 N / q**2) / (sqrt(kappa**2 + 4 N / q**2) - kappa)

    with kappa = xi2 - N/q**2. Values above 1 (possible when the input
    state is not squeezed to begin with) are returned as is.
    """
    if n_spins < 1:
        raise ValidationError(f"n_spins must be >= 1, got {n_spins!r}")
    if not float(q_par_sq_chi) > 0.0:
        raise DivisionError(f"q_par_sq_chi must be positive, got {q_par_sq_chi!r}")
    if float(xi2_chi) < 0.0:
        raise ValidationError(f"xi2_chi must be nonnegative, got {xi2_chi!r}")
    u = n_spins / q_par_sq_chi
    kappa = xi2_chi - u
    s = 4 * u
    return s / (2 * (np.sqrt(kappa * kappa + s) - kappa))


def kappa(xi2_chi, q_par_sq_chi, n_spins: int):
    """The shift xi2 - N / q**2 appearing in the r_max closed form."""
    if not float(q_par_sq_chi) > 0.0:
        raise DivisionError(f"q_par_sq_chi must be positive, got {q_par_sq_chi!r}")
    return xi2_chi - n_spins / q_par_sq_chi


def r_max_floor(n_spins: int):
    """Universal minimum of r_max over all squeezed inputs.

    Attained at xi2 = 0 with unit contrast:

        (sqrt(N**2 + 4N) - N) / 2 = 2 / (sqrt(1 + 4/N) + 1)

    which approaches 1 - 1/N for large N.
    """
    if n_spins < 1:
        raise ValidationError(f"n_spins must be >= 1, got {n_spins!r}")
    return 2.0 / (np.sqrt(1.0 + 4.0 / n_spins) + 1.0)


def p_star(r, m: int):
    """r**m computed in log space (m may be ~1e8 without underflow tricks)."""
    if not 0.0 < float(r) < 1.0:
        raise DomainError(f"weight r must lie in (0, 1), got {r!r}")
    if m < 0:
        raise ValidationError(f"measurement count m must be >= 0, got {m!r}")
    return np.exp(m * np.log(r))


def min_m_lower(p_target: float, r_max_value) -> int:
    """Smallest M with r_max**M <= p_target.

    This is the necessary (not sufficient) measurement count: below it,
    the explicit non-squeezed mixture reproduces any observation with
    probability above ``p_target``.
    """
    p_target = float(p_target)
    if not 0.0 < p_target < 1.0:
        raise DomainError(f"p_target must lie in (0, 1), got {p_target!r}")
    r = float(r_max_value)
    if r >= 1.0:
        raise DomainError(
            f"r_max = {r!r} >= 1: the mixture is never squeezed, no finite M suffices"
        )
    if r <= 0.0:
        raise DomainError(f"r_max must be positive, got {r!r}")
    return int(math.ceil(math.log(p_target) / math.log(r)))


def necessary_m_asymptote(n_spins: int, p_target: float = 0.05) -> float:
    """Large-N behavior of the universal necessary count: -N * ln(p_target)."""
    p_target = float(p_target)
    if not 0.0 < p_target < 1.0:
        raise DomainError(f"p_target must lie in (0, 1), got {p_target!r}")
    return -n_spins * math.log(p_target)


@dataclass(frozen=True)
class LowerBoundModel:
    """The non-squeezed mixture fitted to observed squeezed-state values."""

    n_spins: int
    xi2_chi: float
    q_par_sq_chi: float
    r_max: float
    kappa: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.xi2_chi:
            raise ValidationError(f"xi2_chi must be nonnegative, got {self.xi2_chi!r}")
        if not 0.0 < self.q_par_sq_chi <= 1.0:
            raise ValidationError(
                f"q_par_sq_chi must lie in (0, 1], got {self.q_par_sq_chi!r}"
            )
        if not 0.0 < self.r_max:
            raise ValidationError(f"r_max must be positive, got {self.r_max!r}")

    @classmethod
    def from_observables(
        cls, xi2_chi: float, q_par_sq_chi: float, n_spins: int
    ) -> "LowerBoundModel":
        return cls(
            n_spins=int(n_spins),
            xi2_chi=float(xi2_chi),
            q_par_sq_chi=float(q_par_sq_chi),
            r_max=float(r_max(xi2_chi, q_par_sq_chi, n_spins)),
            kappa=float(kappa(xi2_chi, q_par_sq_chi, n_spins)),
        )

    def min_m(self, p_target: float = 0.05) -> int:
        return min_m_lower(p_target, self.r_max)
