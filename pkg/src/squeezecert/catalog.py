"""Machine-readable records of published squeezing experiments.

The builtin catalog carries, per experiment, the system size, the
number of measurements actually reported, and the sample sizes that the
tangent-plane Bernstein bound requires for a 5% significance level
under the two standard transverse-mean assumptions (0 and 0.1). The
per-experiment summary statistics behind those columns were never
published, so builtin entries deliberately carry no ``summary`` field;
recomputation needs user-supplied summaries.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import MissingField, ParseError, ValidationError
from .model import ExperimentEntry, dumps_entries

# (name, citation_key, n_spins, m_reported, m_required_mu0, m_required_mu01)
_BUILTIN_ROWS = (
    ("Meyer et al. (2001), N=2", "meyer2001", 2, 10000, 21200, 23320),
    ("Bornet et al. (2023), N=4", "Bornet2023", 4, 400, 3260, 3668),
    ("Bornet et al. (2023), N=9", "Bornet2023", 9, 400, 4160, 4840),
    ("Franke et al. (2023), N=12", "Franke2023", 12, 1200, 728, 842),
    ("Bornet et al. (2023), N=16", "Bornet2023", 16, 400, 5420, 6420),
    ("Bohnet et al. (2016), N=21", "Bohnet2016", 21, 400, 8800, 10460),
    ("Bornet et al. (2023), N=36", "Bornet2023", 36, 400, 6760, 8080),
    ("Bohnet et al. (2016), N=58", "Bohnet2016", 58, 400, 5340, 6400),
    ("Bornet et al. (2023), N=64", "Bornet2023", 64, 400, 10900, 13040),
    ("Bohnet et al. (2016), N=100", "Bohnet2016", 100, 400, 15600, 18800),
    ("Strobel et al. (2014), N=144", "Strobel2014", 144, 2180, 13000, 15600),
    ("Strobel et al. (2014), N=470", "Strobel2014", 470, 32500, 19970, 24120),
    ("Riedel et al. (2010), N=1250", "Riedel2010", 1250, 740, 113800, 137400),
    ("Ockeloen et al. (2013), N=1400", "Ockeloen2013", 1400, 240, 145800, 176400),
    ("Schleier-Smith et al. (2010), N=33000", "SchleierSmith2010", 33000, 200, 2204400, 2670400),
    ("Leroux et al. (2010), N=50000", "Leroux2010", 50000, 200, 1710400, 2070400),
    ("Louchet-Chauvet et al. (2010), N=90000", "LouchetChauvet2010", 90000, 9600, 8504400, 10270400),
    ("Bohnet et al. (2014), N=480000", "Bohnet2014", 480000, 200, 21070400, 25470400),
    ("Sewell et al. (2012), N=740000", "Sewell2012", 740000, 2180, 118504400, 144070400),
)


def builtin_catalog() -> list[ExperimentEntry]:
    """The 19 bundled experiment records (immutable constants)."""
    return [
        ExperimentEntry(
            name=name,
            citation_key=key,
            n_spins=n,
            m_reported=m_rep,
            m_required_mu0=m0,
            m_required_mu01=m01,
        )
        for name, key, n, m_rep, m0, m01 in _BUILTIN_ROWS
    ]


def load_catalog(path: str) -> list[ExperimentEntry]:
    """Read and validate a catalog JSON file (array of entry objects)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, list):
        raise ParseError(f"{path}: catalog must be a JSON array of entries")
    entries = []
    for i, item in enumerate(data):
        try:
            entries.append(ExperimentEntry.from_dict(item))
        except (ParseError, ValidationError) as exc:
            raise type(exc)(f"{path}: entry {i}: {exc}") from exc
    return entries


def save_catalog(entries: list[ExperimentEntry], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_entries(entries))


@dataclass(frozen=True)
class DeficitRow:
    """How far an experiment fell short of (or exceeded) the required count."""

    name: str
    n_spins: int
    m_reported: int
    m_required: int
    ratio: float


def deficit_report(entries: list[ExperimentEntry], p_target: float = 0.05) -> list[DeficitRow]:
    """Required-vs-reported measurement counts, ratio = required / reported.

    Uses the tabulated mu_perp = 0 column when present, otherwise
    recomputes it from the entry's summary statistics. Ratios above 1
    mean the experiment did not collect enough data for the stated
    significance level.
    """
    rows = []
    for entry in entries:
        m_required = entry.m_required_mu0
        if m_required is None and entry.summary is not None:
            from .bounds import required_m_bernstein_c
            from .estimators import gamma_provider_from_summary

            m_required = required_m_bernstein_c(
                p_target,
                gamma_provider_from_summary(entry.summary, include_mu_perp=True),
                entry.n_spins,
            )
        if m_required is None:
            raise MissingField(
                f"entry {entry.name!r} has neither m_required_mu0 nor summary statistics"
            )
        rows.append(
            DeficitRow(
                name=entry.name,
                n_spins=entry.n_spins,
                m_reported=entry.m_reported,
                m_required=int(m_required),
                ratio=m_required / entry.m_reported,
            )
        )
    return rows
