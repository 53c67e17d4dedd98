"""Domain types shared by every module.

All types are immutable after construction and safe to share across
threads. Numeric payloads are plain floats and read-only numpy arrays,
so serialize/deserialize round-trips are exact (integers bit-exact,
reals at full repr precision).
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace
from typing import Any, Iterable

import numpy as np

from .errors import (
    LatticeError,
    PairingError,
    ParseError,
    RangeError,
    TooFewSamples,
    ValidationError,
)

LATTICE_TOL = 1e-9
BHATIA_DAVIS_TOL = 1e-9

BATCH_CSV_FIELDS = ("round", "q_perp", "q_par")

BERNSTEIN_GAMMA_C = "bernstein_gamma_c"
MCDIARMID = "mcdiarmid"
BERNSTEIN_GAMMA_PRIME = "bernstein_gamma_prime"
LOWER_MIXED_STATE = "lower_mixed_state"
BOUND_METHODS = frozenset(
    {BERNSTEIN_GAMMA_C, MCDIARMID, BERNSTEIN_GAMMA_PRIME, LOWER_MIXED_STATE}
)


def _as_readonly_floats(values: Any, name: str) -> np.ndarray:
    try:
        arr = np.array(values, dtype=float, copy=True)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} must be a sequence of reals") from exc
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    arr.flags.writeable = False
    return arr


def _check_positive_int(value: Any, name: str, minimum: int = 1) -> int:
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
        raise ValidationError(f"{name} must be an integer")
    value = int(value)
    if value < minimum:
        raise ValidationError(f"{name} must be >= {minimum}, got {value}")
    return value


@dataclass(frozen=True, eq=False)
class MeasurementBatch:
    """Paired normalized collective-spin outcomes along two orthogonal axes.

    ``q_perp[i]`` and ``q_par[i]`` are the round-``i`` outcomes along the
    low-variance axis and along the mean-spin axis. Pairing is by input
    order; the total measurement count is ``2 * len(q_perp)`` (one
    measurement per axis per round).
    """

    n_spins: int
    q_perp: np.ndarray
    q_par: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_spins", _check_positive_int(self.n_spins, "n_spins"))
        qp = _as_readonly_floats(self.q_perp, "q_perp")
        qn = _as_readonly_floats(self.q_par, "q_par")
        if qp.shape != qn.shape:
            raise PairingError(
                f"axis counts differ: {qp.size} perp outcomes vs {qn.size} parallel"
            )
        object.__setattr__(self, "q_perp", qp)
        object.__setattr__(self, "q_par", qn)

    @property
    def n_rounds(self) -> int:
        return int(self.q_perp.size)

    @property
    def total_count(self) -> int:
        """Total number of single measurements M (always even)."""
        return 2 * self.n_rounds

    @property
    def rounds(self) -> list[tuple[float, float]]:
        return list(zip(self.q_perp.tolist(), self.q_par.tolist()))

    @classmethod
    def from_rounds(cls, n_spins: int, rounds: Iterable[tuple[float, float]]) -> "MeasurementBatch":
        pairs = list(rounds)
        qp = [p[0] for p in pairs]
        qn = [p[1] for p in pairs]
        return cls(n_spins=n_spins, q_perp=np.array(qp, float), q_par=np.array(qn, float))

    def to_dict(self) -> dict[str, Any]:
        return {"n_spins": self.n_spins, "rounds": [[a, b] for a, b in self.rounds]}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "MeasurementBatch":
        try:
            return cls.from_rounds(data["n_spins"], [tuple(r) for r in data["rounds"]])
        except KeyError as exc:
            raise ParseError(f"batch record is missing field {exc}") from exc

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(BATCH_CSV_FIELDS)
        for i, (qp, qn) in enumerate(self.rounds, start=1):
            writer.writerow([i, repr(qp), repr(qn)])
        return buf.getvalue()


def outcome_lattice(n_spins: int) -> np.ndarray:
    """The N+1 possible normalized outcomes {-1, -1+2/N, ..., 1}."""
    return (2.0 * np.arange(n_spins + 1) - n_spins) / n_spins


def validate_batch(batch: MeasurementBatch, lattice_strict: bool = False) -> MeasurementBatch:
    """Check physical ranges (and optionally the outcome lattice).

    Returns the batch unchanged when every outcome lies in [-1, 1] and,
    in strict mode, sits within ``LATTICE_TOL`` of the N-spin lattice.
    Raises :class:`RangeError` or :class:`LatticeError` otherwise.
    """
    for name, values in (("q_perp", batch.q_perp), ("q_par", batch.q_par)):
        bad = np.flatnonzero(np.abs(values) > 1.0)
        if bad.size:
            i = int(bad[0])
            raise RangeError(
                f"{name}[{i}] = {values[i]!r} lies outside [-1, 1]"
            )
    if lattice_strict:
        half_n = batch.n_spins / 2.0
        for name, values in (("q_perp", batch.q_perp), ("q_par", batch.q_par)):
            k = (values + 1.0) * half_n
            dist = np.abs(k - np.round(k)) / half_n
            bad = np.flatnonzero(dist > LATTICE_TOL)
            if bad.size:
                i = int(bad[0])
                raise LatticeError(
                    f"{name}[{i}] = {values[i]!r} is off the N={batch.n_spins} lattice"
                )
    return batch


def batch_from_csv_text(text: str, n_spins: int) -> MeasurementBatch:
    """Parse the raw-data CSV format (header ``round,q_perp,q_par``)."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty CSV input") from None
    if [h.strip() for h in header] != list(BATCH_CSV_FIELDS):
        raise ParseError(
            f"expected header {','.join(BATCH_CSV_FIELDS)!r}, got {','.join(header)!r}"
        )
    q_perp: list[float] = []
    q_par: list[float] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 3 or not row[1].strip() or not row[2].strip():
            raise PairingError(f"line {lineno}: round is missing one of the paired outcomes")
        try:
            q_perp.append(float(row[1]))
            q_par.append(float(row[2]))
        except ValueError as exc:
            raise ParseError(f"line {lineno}: non-numeric outcome {row[1:3]!r}") from exc
    return MeasurementBatch(n_spins=n_spins, q_perp=np.array(q_perp), q_par=np.array(q_par))


def load_batch_csv(path: str, n_spins: int, lattice_strict: bool = False) -> MeasurementBatch:
    with open(path, "r", encoding="utf-8") as fh:
        batch = batch_from_csv_text(fh.read(), n_spins)
    return validate_batch(batch, lattice_strict=lattice_strict)


def save_batch_csv(batch: MeasurementBatch, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(batch.to_csv_text())


@dataclass(frozen=True)
class SummaryStats:
    """Published-style summary statistics of a two-axis experiment.

    ``s_perp`` is the sample variance along the low-variance axis,
    ``mu_par``/``mu_perp`` the sample means along the mean-spin axis and
    the low-variance axis, and ``m_par``/``m_perp`` the per-axis counts.
    """

    n_spins: int
    s_perp: float
    mu_par: float
    mu_perp: float
    m_par: int
    m_perp: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_spins", _check_positive_int(self.n_spins, "n_spins"))
        object.__setattr__(self, "m_par", _check_positive_int(self.m_par, "m_par", minimum=2))
        object.__setattr__(self, "m_perp", _check_positive_int(self.m_perp, "m_perp", minimum=2))
        for name in ("s_perp", "mu_par", "mu_perp"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not math.isfinite(self.s_perp) or self.s_perp < 0:
            raise ValidationError(f"s_perp must be a nonnegative real, got {self.s_perp!r}")
        for name in ("mu_par", "mu_perp"):
            value = getattr(self, name)
            if not math.isfinite(value) or abs(value) > 1.0:
                raise RangeError(f"{name} = {value!r} lies outside [-1, 1]")
        # Variance of a [-1, 1]-bounded variable with mean mu cannot exceed
        # (1 - mu)(1 + mu); reject summaries that are internally impossible.
        cap = (1.0 - self.mu_perp) * (1.0 + self.mu_perp)
        if self.s_perp > cap + BHATIA_DAVIS_TOL:
            raise ValidationError(
                f"s_perp = {self.s_perp!r} exceeds the variance cap "
                f"(1 - mu_perp)(1 + mu_perp) = {cap!r}"
            )

    @property
    def total_count(self) -> int:
        return self.m_par + self.m_perp

    def with_mu_perp(self, mu_perp: float) -> "SummaryStats":
        return replace(self, mu_perp=float(mu_perp))

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_spins": self.n_spins,
            "s_perp": self.s_perp,
            "mu_par": self.mu_par,
            "mu_perp": self.mu_perp,
            "m_par": self.m_par,
            "m_perp": self.m_perp,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SummaryStats":
        required = ("n_spins", "s_perp", "mu_par", "m_par", "m_perp")
        missing = [k for k in required if k not in data]
        if missing:
            raise ParseError(f"summary record is missing field(s): {', '.join(missing)}")
        return cls(
            n_spins=data["n_spins"],
            s_perp=data["s_perp"],
            mu_par=data["mu_par"],
            mu_perp=data.get("mu_perp", 0.0),
            m_par=data["m_par"],
            m_perp=data["m_perp"],
        )


def summary_from_batch(batch: MeasurementBatch, ddof: int = 0) -> SummaryStats:
    """Condense a batch into :class:`SummaryStats`.

    ``ddof=0`` (the default) uses the divisor M/2, which makes the
    summary reproduce the batch's tangent-plane witness exactly and
    keeps the variance cap invariant satisfied for every valid batch;
    ``ddof=1`` gives the unbiased convention used when quoting results.
    """
    if batch.n_rounds < 2:
        raise TooFewSamples("need at least 2 rounds to summarize a batch")
    return SummaryStats(
        n_spins=batch.n_spins,
        s_perp=float(np.var(batch.q_perp, ddof=ddof)),
        mu_par=float(np.mean(batch.q_par)),
        mu_perp=float(np.mean(batch.q_perp)),
        m_par=batch.n_rounds,
        m_perp=batch.n_rounds,
    )


@dataclass(frozen=True)
class TangentPoint:
    """One member c = (alpha, beta) of the tangent-plane witness family."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta"):
            value = float(getattr(self, name))
            object.__setattr__(self, name, value)
            if not math.isfinite(value) or abs(value) > 1.0:
                raise RangeError(f"{name} = {value!r} lies outside [-1, 1]")

    def to_dict(self) -> dict[str, float]:
        return {"alpha": self.alpha, "beta": self.beta}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TangentPoint":
        try:
            return cls(alpha=data["alpha"], beta=data["beta"])
        except KeyError as exc:
            raise ParseError(f"tangent record is missing field {exc}") from exc


@dataclass(frozen=True)
class BoundReport:
    """One p-value bound together with the statistic it was computed from.

    ``log10_p`` carries the bound's magnitude even when the p-value
    underflows double precision (catalog-scale sample sizes reach
    M ~ 1e8, where the bound itself is far below the smallest float).
    """

    method: str
    p_bound: float
    gamma_value: float
    m_used: int
    tangent: TangentPoint | None = None
    log10_p: float | None = None

    def __post_init__(self) -> None:
        if self.method not in BOUND_METHODS:
            raise ValidationError(f"unknown bound method {self.method!r}")
        object.__setattr__(self, "p_bound", float(self.p_bound))
        object.__setattr__(self, "gamma_value", float(self.gamma_value))
        object.__setattr__(self, "m_used", int(self.m_used))
        if not 0.0 < self.p_bound <= 1.0:
            raise ValidationError(f"p_bound must lie in (0, 1], got {self.p_bound!r}")
        has_tangent = self.tangent is not None
        if has_tangent != (self.method == BERNSTEIN_GAMMA_C):
            raise ValidationError(
                "tangent must be present exactly when method is "
                f"{BERNSTEIN_GAMMA_C!r} (method={self.method!r})"
            )
        if self.log10_p is not None:
            object.__setattr__(self, "log10_p", float(self.log10_p))

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "p_bound": self.p_bound,
            "gamma_value": self.gamma_value,
            "m_used": self.m_used,
            "tangent": None if self.tangent is None else self.tangent.to_dict(),
            "log10_p": self.log10_p,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "BoundReport":
        try:
            tangent = data.get("tangent")
            return cls(
                method=data["method"],
                p_bound=data["p_bound"],
                gamma_value=data["gamma_value"],
                m_used=data["m_used"],
                tangent=None if tangent is None else TangentPoint.from_dict(tangent),
                log10_p=data.get("log10_p"),
            )
        except KeyError as exc:
            raise ParseError(f"bound record is missing field {exc}") from exc


@dataclass(frozen=True)
class ExperimentEntry:
    """One experiment record: size, reported statistics, sample-size columns."""

    name: str
    citation_key: str
    n_spins: int
    m_reported: int
    summary: SummaryStats | None = None
    m_required_mu0: int | None = None
    m_required_mu01: int | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.name, str) or not self.name:
            raise ValidationError("name must be a nonempty string")
        if not isinstance(self.citation_key, str) or not self.citation_key:
            raise ValidationError("citation_key must be a nonempty string")
        object.__setattr__(self, "n_spins", _check_positive_int(self.n_spins, "n_spins", minimum=2))
        object.__setattr__(
            self, "m_reported", _check_positive_int(self.m_reported, "m_reported", minimum=2)
        )
        for name in ("m_required_mu0", "m_required_mu01"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, _check_positive_int(value, name, minimum=2))

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "citation_key": self.citation_key,
            "n_spins": self.n_spins,
            "m_reported": self.m_reported,
            "summary": None if self.summary is None else self.summary.to_dict(),
            "m_required_mu0": self.m_required_mu0,
            "m_required_mu01": self.m_required_mu01,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentEntry":
        if not isinstance(data, dict):
            raise ParseError(f"catalog entry must be an object, got {type(data).__name__}")
        missing = [k for k in ("name", "citation_key", "n_spins", "m_reported") if k not in data]
        if missing:
            raise ParseError(f"catalog entry is missing field(s): {', '.join(missing)}")
        for key in ("n_spins", "m_reported"):
            if isinstance(data[key], bool) or not isinstance(data[key], (int, np.integer)):
                raise ParseError(f"field {key!r} must be an integer, got {data[key]!r}")
        summary = data.get("summary")
        return cls(
            name=data["name"],
            citation_key=data["citation_key"],
            n_spins=data["n_spins"],
            m_reported=data["m_reported"],
            summary=None if summary is None else SummaryStats.from_dict(summary),
            m_required_mu0=data.get("m_required_mu0"),
            m_required_mu01=data.get("m_required_mu01"),
        )


def dumps_entries(entries: Iterable[ExperimentEntry]) -> str:
    return json.dumps([e.to_dict() for e in entries], indent=2) + "\n"
