"""Command-line front end.

Subcommands: ``analyze``, ``required-m``, ``lower-bound``, ``validate``,
``report``. Data goes to stdout (or ``--output``); diagnostics go to
stderr. Exit codes: 0 success (for ``analyze``: null hypothesis
rejected), 2 analysis ran but the bound stayed above the target,
3 infeasible data (no tangent point with a negative witness),
10 file errors, 11 parse errors, 12 validation/domain errors.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from typing import Any, Callable, Sequence

import click

from . import bounds, catalog, estimators, lowerbound, simulator
from .errors import (
    BlockingError,
    DivisionError,
    DomainError,
    InfeasibleError,
    MissingField,
    NullViolation,
    ParseError,
    PairingError,
    SizeError,
    SqueezecertError,
    TooFewSamples,
    ValidationError,
)
from .model import (
    BERNSTEIN_GAMMA_C,
    BERNSTEIN_GAMMA_PRIME,
    MCDIARMID,
    SummaryStats,
    TangentPoint,
    load_batch_csv,
)

EXIT_REJECTED = 0
EXIT_NOT_REJECTED = 2
EXIT_INFEASIBLE = 3
EXIT_FILE_ERROR = 10
EXIT_PARSE_ERROR = 11
EXIT_VALIDATION_ERROR = 12

_VALIDATION_ERRORS = (
    ValidationError,
    TooFewSamples,
    BlockingError,
    DomainError,
    SizeError,
    NullViolation,
    MissingField,
    DivisionError,
)


def _fail(exc: BaseException, code: int) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def _run(body: Callable[[], int]) -> None:
    try:
        code = body()
    except InfeasibleError as exc:
        _fail(exc, EXIT_INFEASIBLE)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        _fail(exc, EXIT_FILE_ERROR)
    except (ParseError, json.JSONDecodeError) as exc:
        _fail(exc, EXIT_PARSE_ERROR)
    except _VALIDATION_ERRORS as exc:
        _fail(exc, EXIT_VALIDATION_ERROR)
    except SqueezecertError as exc:
        _fail(exc, EXIT_VALIDATION_ERROR)
    else:
        sys.exit(code)


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _emit(rows: Sequence[dict[str, Any]], fieldnames: Sequence[str], fmt: str,
          output: str | None) -> None:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_cell(row.get(name)) for name in fieldnames])
        text = buf.getvalue()
    else:
        text = json.dumps([{name: row.get(name) for name in fieldnames} for row in rows],
                          indent=2) + "\n"
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
        click.echo(f"wrote {output}", err=True)
    else:
        click.echo(text, nl=False)


def _load_summary(path: str) -> tuple[SummaryStats, bool]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: summary must be a JSON object")
    had_mu_perp = "mu_perp" in data
    return SummaryStats.from_dict(data), had_mu_perp


def _parse_int_list(text: str, name: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ParseError(f"{name} must be a comma-separated integer list, got {text!r}") from exc
    if not values:
        raise ParseError(f"{name} list is empty")
    return values


def _parse_float_list(text: str, name: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ParseError(f"{name} must be a comma-separated list of reals, got {text!r}") from exc
    if not values:
        raise ParseError(f"{name} list is empty")
    return values


def _check_p_target(p_target: float) -> float:
    if not 0.0 < p_target < 1.0:
        raise ValidationError(f"--p-target must lie in (0, 1), got {p_target!r}")
    return p_target


@click.group()
@click.version_option(version="0.1.0", prog_name="squeezecert")
def cli() -> None:
    """Finite-statistics certification of spin squeezing.

    Upper-bound the p-value of measured data, plan sample sizes, compute
    the universal lower bound from an explicit non-squeezed mixture, and
    validate every analytic bound against an exact Monte Carlo oracle.
    """


ANALYZE_FIELDS = ("method", "p_bound", "log10_p", "gamma_value", "alpha", "beta", "m_used")


@cli.command()
@click.option("--data", "data_path", type=click.Path(), default=None,
              help="Raw data CSV with header round,q_perp,q_par.")
@click.option("--summary", "summary_path", type=click.Path(), default=None,
              help="Summary statistics JSON.")
@click.option("--n-spins", type=int, default=None, help="System size (required with --data).")
@click.option("--p-target", type=float, default=0.05, show_default=True)
@click.option("--lattice-strict", is_flag=True,
              help="Reject outcomes off the N-spin lattice.")
@click.option("--grid", "grid_resolution", type=int, default=101, show_default=True,
              help="Tangent-square grid resolution per axis.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
@click.option("--output", "-o", type=click.Path(), default=None)
def analyze(data_path, summary_path, n_spins, p_target, lattice_strict, grid_resolution,
            fmt, output):
    """Compute p-value upper bounds for measured data.

    Reports the tangent-optimized Bernstein bound plus the McDiarmid and
    pair-block baselines. Exit code 0 when the optimized bound is at or
    below the target (squeezing certified), 2 otherwise, 3 when no
    tangent point makes the observed witness negative.
    """

    def body() -> int:
        _check_p_target(p_target)
        if (data_path is None) == (summary_path is None):
            raise ValidationError("provide exactly one of --data or --summary")
        if data_path is not None:
            if n_spins is None:
                raise ValidationError("--n-spins is required with --data")
            batch = load_batch_csv(data_path, n_spins, lattice_strict=lattice_strict)
            if batch.n_rounds < 2:
                raise TooFewSamples("need at least 2 rounds to analyze a batch")
            n = batch.n_spins
            m_total = batch.total_count
            m_par = m_perp = batch.n_rounds
            provider = estimators.gamma_provider_from_batch(batch)
            gamma_plug = estimators.gamma_tilde(batch)
            gamma_blocks = (
                estimators.gamma_prime_blocks(batch) if m_total % 4 == 0 else None
            )
        else:
            stats, had_mu_perp = _load_summary(summary_path)
            if not had_mu_perp:
                click.echo("note: summary has no mu_perp; assuming 0 (reduced form)", err=True)
            if stats.m_par != stats.m_perp:
                raise PairingError(
                    "unbalanced designs are rejected: the tangent-plane witness "
                    f"needs equal per-axis counts, got {stats.m_par} vs {stats.m_perp}"
                )
            n = stats.n_spins
            m_total = stats.total_count
            m_par, m_perp = stats.m_par, stats.m_perp
            provider = estimators.gamma_provider_from_summary(stats, include_mu_perp=True)
            gamma_plug = estimators.gamma_linear(stats)
            gamma_blocks = gamma_plug if m_total % 4 == 0 else None

        rows: list[dict[str, Any]] = []
        infeasible: InfeasibleError | None = None
        result = None
        try:
            result = bounds.optimize_tangent(
                provider, m_total, n, grid_resolution=grid_resolution
            )
            rows.append({
                "method": BERNSTEIN_GAMMA_C,
                "p_bound": result.p_bound,
                "log10_p": result.log10_p,
                "gamma_value": result.gamma_c_at_best,
                "alpha": result.best_c.alpha,
                "beta": result.best_c.beta,
                "m_used": m_total,
            })
        except InfeasibleError as exc:
            infeasible = exc
            click.echo(f"note: {exc}", err=True)

        if gamma_plug < 0.0:
            p_mcd = bounds.mcdiarmid_pvalue(gamma_plug, n, m_par, m_perp)
            log10_mcd = bounds.log_mcdiarmid_pvalue(gamma_plug, n, m_par, m_perp) / math.log(10)
        else:
            p_mcd, log10_mcd = 1.0, 0.0
        rows.append({
            "method": MCDIARMID,
            "p_bound": p_mcd,
            "log10_p": log10_mcd,
            "gamma_value": gamma_plug,
            "alpha": None,
            "beta": None,
            "m_used": m_total,
        })

        if m_total % 4 != 0:
            click.echo("note: M is not divisible by 4; pair-block baseline skipped", err=True)
        elif gamma_blocks is not None:
            if gamma_blocks < 0.0:
                p_blk = bounds.bernstein_prime_pvalue(gamma_blocks, m_total, n)
                log10_blk = (
                    bounds.log_bernstein_prime_pvalue(gamma_blocks, m_total, n) / math.log(10)
                )
            else:
                p_blk, log10_blk = 1.0, 0.0
            rows.append({
                "method": BERNSTEIN_GAMMA_PRIME,
                "p_bound": p_blk,
                "log10_p": log10_blk,
                "gamma_value": gamma_blocks,
                "alpha": None,
                "beta": None,
                "m_used": m_total,
            })

        _emit(rows, ANALYZE_FIELDS, fmt, output)
        if infeasible is not None:
            raise infeasible
        return EXIT_REJECTED if result.p_bound <= p_target else EXIT_NOT_REJECTED

    _run(body)


REQUIRED_M_FIELDS = ("method", "mu_perp", "required_m")


@cli.command("required-m")
@click.option("--summary", "summary_path", type=click.Path(), default=None,
              help="Summary statistics JSON.")
@click.option("--n-spins", type=int, default=None,
              help="System size (with --gamma instead of --summary).")
@click.option("--gamma", type=float, default=None,
              help="Hypothesized negative witness value (with --n-spins).")
@click.option("--p-target", type=float, default=0.05, show_default=True)
@click.option("--grid", "grid_resolution", type=int, default=101, show_default=True)
@click.option("--mu-perp-sweep", "sweep", is_flag=True,
              help="Also sweep the hypothesized transverse mean over [-0.1, 0.1].")
@click.option("--sweep-steps", type=int, default=21, show_default=True)
@click.option("--figure", "figure_path", type=click.Path(), default=None,
              help="Render the sweep to an image file (requires --mu-perp-sweep).")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
@click.option("--output", "-o", type=click.Path(), default=None)
def required_m(summary_path, n_spins, gamma, p_target, grid_resolution, sweep, sweep_steps,
               figure_path, fmt, output):
    """Sample sizes required to reach the target significance level.

    Reports the tangent-optimized Bernstein requirement plus the
    McDiarmid and pair-block baselines, either from a summary file or
    from a hypothesized witness value.
    """

    def body() -> int:
        _check_p_target(p_target)
        summary_mode = summary_path is not None
        if summary_mode == (gamma is not None or n_spins is not None):
            raise ValidationError(
                "provide either --summary or the pair --n-spins/--gamma, not both"
            )
        rows: list[dict[str, Any]] = []
        sweep_points: list[dict[str, Any]] = []
        if summary_mode:
            stats, _ = _load_summary(summary_path)
            n = stats.n_spins
            provider = estimators.gamma_provider_from_summary(stats, include_mu_perp=True)
            m_gc = bounds.required_m_bernstein_c(
                p_target, provider, n, grid_resolution=grid_resolution
            )
            gamma_plug = estimators.gamma_linear(stats)
        else:
            if n_spins is None or gamma is None:
                raise ValidationError("--n-spins and --gamma must be given together")
            n = int(n_spins)
            m_gc = bounds.required_m_bernstein_c_fixed_gamma(
                p_target, gamma, n, grid_resolution=grid_resolution
            )
            gamma_plug = float(gamma)
        rows.append({"method": BERNSTEIN_GAMMA_C, "mu_perp": None, "required_m": m_gc})

        if gamma_plug < 0.0:
            m_mcd = bounds.required_m_mcdiarmid(p_target, gamma_plug, n)
            m_blk = bounds.required_m_bernstein_prime(p_target, gamma_plug, n)
        else:
            click.echo("note: plug-in witness is nonnegative; baselines have no "
                       "finite requirement", err=True)
            m_mcd = m_blk = None
        rows.append({"method": MCDIARMID, "mu_perp": None, "required_m": m_mcd})
        rows.append({"method": BERNSTEIN_GAMMA_PRIME, "mu_perp": None, "required_m": m_blk})

        if sweep:
            if not summary_mode:
                raise ValidationError("--mu-perp-sweep needs --summary input")
            for point in bounds.mu_perp_sweep(
                stats, p_target, steps=sweep_steps, grid_resolution=grid_resolution
            ):
                entry = {
                    "method": BERNSTEIN_GAMMA_C,
                    "mu_perp": point.mu_perp,
                    "required_m": point.m_required,
                }
                rows.append(entry)
                sweep_points.append(entry)
        if figure_path is not None:
            if not sweep_points:
                raise ValidationError("--figure needs --mu-perp-sweep results to draw")
            from . import plotting

            plotting.save_sweep_figure(
                [{"mu_perp": p["mu_perp"], "m_required": p["required_m"]}
                 for p in sweep_points],
                figure_path,
            )
            click.echo(f"wrote {figure_path}", err=True)
        _emit(rows, REQUIRED_M_FIELDS, fmt, output)
        return 0

    _run(body)


LOWER_BOUND_FIELDS = (
    "n_spins", "xi2_chi", "q_par_sq_chi", "kappa", "r_max", "m_min",
    "r_max_floor", "m_min_floor", "m_asymptote",
)


@cli.command("lower-bound")
@click.option("--xi2", type=float, required=True,
              help="Observed squeezing parameter of the squeezed component (in [0, 1)).")
@click.option("--q-par-sq", type=float, required=True,
              help="Observed squared mean spin contrast (in (0, 1]).")
@click.option("--n-spins", type=int, required=True)
@click.option("--p-target", type=float, default=0.05, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
@click.option("--output", "-o", type=click.Path(), default=None)
def lower_bound(xi2, q_par_sq, n_spins, p_target, fmt, output):
    """Minimum measurements any test needs, from the explicit mixture.

    Below the reported M, a non-squeezed mixture reproduces the observed
    squeezing parameter and contrast with probability above the target.
    The floor columns give the input-independent worst case, which grows
    like -N * ln(p-target) for large N.
    """

    def body() -> int:
        _check_p_target(p_target)
        if not 0.0 <= xi2 < 1.0:
            raise ValidationError(
                f"--xi2 must lie in [0, 1) for a squeezing claim, got {xi2!r}"
            )
        if not 0.0 < q_par_sq <= 1.0:
            raise ValidationError(f"--q-par-sq must lie in (0, 1], got {q_par_sq!r}")
        model = lowerbound.LowerBoundModel.from_observables(xi2, q_par_sq, n_spins)
        floor = float(lowerbound.r_max_floor(n_spins))
        row = {
            "n_spins": int(n_spins),
            "xi2_chi": float(xi2),
            "q_par_sq_chi": float(q_par_sq),
            "kappa": model.kappa,
            "r_max": model.r_max,
            "m_min": model.min_m(p_target),
            "r_max_floor": floor,
            "m_min_floor": lowerbound.min_m_lower(p_target, floor),
            "m_asymptote": lowerbound.necessary_m_asymptote(n_spins, p_target),
        }
        _emit([row], LOWER_BOUND_FIELDS, fmt, output)
        return 0

    _run(body)


VALIDATE_FIELDS = (
    "method", "n_spins", "m", "alpha", "beta", "gamma", "frequency", "halfwidth",
    "bound", "log10_bound", "sound",
)


@cli.command()
@click.option("--n-spins", type=int, required=True)
@click.option("--state", type=click.Choice(["css", "twisted"]), default="css",
              show_default=True, help="Null state preparation.")
@click.option("--theta", type=float, default=0.0, show_default=True,
              help="Twisting angle used with --state twisted.")
@click.option("--m", "m_list", type=str, default="20,200,2000", show_default=True,
              help="Comma-separated total counts.")
@click.option("--gammas", type=str, default="auto", show_default=True,
              help="Comma-separated negative thresholds, or 'auto'.")
@click.option("--c", "c_text", type=str, default="0,1", show_default=True,
              help="Tangent point alpha,beta.")
@click.option("--methods", type=str, default="bernstein_gamma_c", show_default=True,
              help="Comma-separated subset of bernstein_gamma_c,mcdiarmid,bernstein_gamma_prime.")
@click.option("--trials", type=int, default=10000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--figure", "figure_path", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
@click.option("--output", "-o", type=click.Path(), default=None)
def validate(n_spins, state, theta, m_list, gammas, c_text, methods, trials, seed, workers,
             figure_path, fmt, output):
    """Validate analytic bounds against the exact Monte Carlo oracle.

    Simulates a null state, estimates tail frequencies of each method's
    statistic, and checks them against the analytic bounds. A row is
    sound when frequency <= bound + 3 half-widths.
    """

    def body() -> int:
        if trials < 1:
            raise ValidationError(f"--trials must be >= 1, got {trials!r}")
        if workers < 1:
            raise ValidationError(f"--workers must be >= 1, got {workers!r}")
        m_values = _parse_int_list(m_list, "--m")
        method_names = [name.strip() for name in methods.split(",") if name.strip()]
        valid = {BERNSTEIN_GAMMA_C, MCDIARMID, BERNSTEIN_GAMMA_PRIME}
        unknown = set(method_names) - valid
        if unknown:
            raise ValidationError(f"unknown method(s): {', '.join(sorted(unknown))}")
        alpha_beta = _parse_float_list(c_text, "--c")
        if len(alpha_beta) != 2:
            raise ValidationError(f"--c needs exactly alpha,beta, got {c_text!r}")
        c = TangentPoint(*alpha_beta)

        base = simulator.css_state(n_spins, simulator.AXIS_X)
        prepared = simulator.one_axis_twist(base, theta) if state == "twisted" else base

        rows: list[dict[str, Any]] = []
        unsound = 0
        for m_total in m_values:
            if gammas == "auto":
                gamma_grid = simulator.default_gamma_grid(prepared, c, m_total)
            else:
                gamma_grid = sorted(_parse_float_list(gammas, "--gammas"))
            for method in method_names:
                for g in gamma_grid:
                    if method == BERNSTEIN_GAMMA_C:
                        freq, hw = simulator.empirical_tail(
                            prepared, c, g, m_total, trials, seed, workers=workers
                        )
                        log_p = bounds.log_bernstein_pvalue_gamma_c(g, m_total, n_spins, c)
                        alpha_val, beta_val = c.alpha, c.beta
                    elif method == MCDIARMID:
                        freq, hw = simulator.empirical_tail_linear(
                            prepared, g, m_total, trials, seed, workers=workers
                        )
                        log_p = bounds.log_mcdiarmid_pvalue(
                            g, n_spins, m_total // 2, m_total // 2
                        )
                        alpha_val = beta_val = None
                    else:
                        freq, hw = simulator.empirical_tail_blocks(
                            prepared, g, m_total, trials, seed, workers=workers
                        )
                        log_p = bounds.log_bernstein_prime_pvalue(g, m_total, n_spins)
                        alpha_val = beta_val = None
                    bound_val = min(1.0, math.exp(log_p))
                    sound = freq <= bound_val + 3.0 * hw
                    if not sound:
                        unsound += 1
                    rows.append({
                        "method": method,
                        "n_spins": int(n_spins),
                        "m": int(m_total),
                        "alpha": alpha_val,
                        "beta": beta_val,
                        "gamma": float(g),
                        "frequency": freq,
                        "halfwidth": hw,
                        "bound": bound_val,
                        "log10_bound": log_p / math.log(10),
                        "sound": sound,
                    })
        if figure_path is not None:
            from . import plotting

            plotting.save_validation_figure(rows, figure_path)
            click.echo(f"wrote {figure_path}", err=True)
        _emit(rows, VALIDATE_FIELDS, fmt, output)
        if unsound:
            click.echo(f"warning: {unsound} row(s) exceed their analytic bound", err=True)
        return 0

    _run(body)


REPORT_FIELDS = (
    "name", "n_spins", "m_reported", "m_upper_sufficient", "m_lower_necessary",
    "xi2_observed", "source",
)
DEFICIT_FIELDS = ("name", "n_spins", "m_reported", "m_required", "ratio")


@cli.command()
@click.option("--catalog", "catalog_path", type=click.Path(), default=None,
              help="Catalog JSON; defaults to the builtin experiment table.")
@click.option("--p-target", type=float, default=0.05, show_default=True)
@click.option("--deficit", is_flag=True,
              help="Emit the required-vs-reported deficit table instead.")
@click.option("--figure", "figure_path", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
@click.option("--output", "-o", type=click.Path(), default=None)
def report(catalog_path, p_target, deficit, figure_path, fmt, output):
    """Figure-ready table of sufficient and necessary sample sizes.

    Sufficient counts come from the bundled table (source=paper_table)
    or are recomputed from entry summaries (source=computed); necessary
    counts need the observed squeezing parameter and contrast and stay
    blank when a summary is absent.
    """

    def body() -> int:
        _check_p_target(p_target)
        entries = (
            catalog.builtin_catalog() if catalog_path is None
            else catalog.load_catalog(catalog_path)
        )
        if deficit:
            rows = [
                {
                    "name": r.name,
                    "n_spins": r.n_spins,
                    "m_reported": r.m_reported,
                    "m_required": r.m_required,
                    "ratio": r.ratio,
                }
                for r in catalog.deficit_report(entries, p_target)
            ]
            _emit(rows, DEFICIT_FIELDS, fmt, output)
            return 0

        rows = []
        for entry in entries:
            m_upper: int | None = entry.m_required_mu0
            source = "paper_table" if m_upper is not None else ""
            xi2_obs: float | None = None
            m_lower: int | None = None
            if entry.summary is not None:
                xi2_obs = estimators.wineland_xi2(entry.summary)
                if m_upper is None:
                    m_upper = bounds.required_m_bernstein_c(
                        p_target,
                        estimators.gamma_provider_from_summary(
                            entry.summary, include_mu_perp=True
                        ),
                        entry.n_spins,
                    )
                    source = "computed"
                if xi2_obs < 1.0:
                    r = float(lowerbound.r_max(
                        xi2_obs, entry.summary.mu_par ** 2, entry.n_spins
                    ))
                    m_lower = lowerbound.min_m_lower(p_target, r)
                else:
                    click.echo(
                        f"note: {entry.name}: observed parameter >= 1, no lower bound",
                        err=True,
                    )
            rows.append({
                "name": entry.name,
                "n_spins": entry.n_spins,
                "m_reported": entry.m_reported,
                "m_upper_sufficient": m_upper,
                "m_lower_necessary": m_lower,
                "xi2_observed": xi2_obs,
                "source": source,
            })
        if figure_path is not None:
            from . import plotting

            plotting.save_report_figure(rows, figure_path)
            click.echo(f"wrote {figure_path}", err=True)
        _emit(rows, REPORT_FIELDS, fmt, output)
        return 0

    _run(body)


def main() -> None:
    """Entry point for the squeezecert executable."""
    cli()


if __name__ == "__main__":
    main()
