"""
CLI Module

Command-line front end: one subcommand per experiment, records on stdout (JSON
lines or CSV with a header row), logs on stderr.

Exit codes: 0 success, 1 a check failed, 2 usage or spec parse error.

    python -m src.cli eval rational:1/3
    python -m src.cli kono rational:1/3 --p 3
    python -m src.cli modulus rational:1/7 --j 16..256
"""

import functools
import re
import sys
from fractions import Fraction
from typing import Any, Dict, List, Optional

import click
from loguru import logger

from .conditions import (
    begle_ayres_sequence,
    classify_point,
    condition_sequence,
    dyadic_interval_slope,
    kruppel_slope_closed_form,
    kruppel_window_slope,
    sufficient_check,
)
from .config import LabConfig, RunConfig, load_config, log_level
from .errors import SpecParseError, TakagiLabError
from .exact_core import Dyadic
from .expansion import ONES, ZEROS, BinaryExpansion, deficiency, gaps, stats
from .expansion_spec import parse_expansion_spec, parse_rule
from .gap_generators import builtin_generator
from .kono import kono_split, maximize_f
from .modulus import SCHEDULES, density_estimate, modulus_experiment, scaled_quotient_exact
from .record_writer import RecordWriter, to_record
from .selftest import run_selftest
from .takagi import takagi_enclosure, takagi_of_dyadic, takagi_rational

_RANGE = re.compile(r"(\d+)\.\.(\d+)")


class CheckFailed(click.ClickException):
    exit_code = 1


def _configure_logging() -> None:
    logger.remove()
    logger.add(sys.stderr, level=log_level())
    logger.enable("src")


def _run_config(ctx: click.Context, **flags: Any) -> RunConfig:
    state = ctx.obj
    return RunConfig(
        subcommand=ctx.command.name,
        flags=flags,
        output_format=state["format"],
        seed=state["seed"],
        bit_budget=state["bit_budget"],
    )


def _emit(ctx: click.Context, records: List[Dict[str, Any]], **flags: Any) -> None:
    run = _run_config(ctx, **flags)
    RecordWriter(run.output_format, sys.stdout, run).write(records)


def _parse(ctx: click.Context, spec: str) -> BinaryExpansion:
    try:
        return parse_expansion_spec(spec, ctx.obj["bit_budget"])
    except SpecParseError as e:
        raise click.BadParameter(str(e), param_hint="SPEC")


def _parse_range(text: str) -> range:
    match = _RANGE.fullmatch(text)
    if not match:
        raise click.BadParameter(f"expected A..B, got {text!r}", param_hint="--j")
    lo, hi = int(match.group(1)), int(match.group(2))
    if lo < 1 or hi < lo:
        raise click.BadParameter(f"need 1 <= A <= B, got {text!r}", param_hint="--j")
    return range(lo, hi + 1)


def handle_errors(func):
    """Turn library errors into exit code 1 (logged); parse errors stay usage errors."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except SpecParseError as e:
            raise click.UsageError(str(e))
        except TakagiLabError as e:
            logger.error(f"{type(e).__name__}: {e}")
            raise CheckFailed(str(e))

    return wrapper


@click.group()
@click.option("--format", "output_format", type=click.Choice(["csv", "json"]), default=None,
              help="Record format: JSON lines (exact values as num/den strings) or CSV with a header row.")
@click.option("--seed", type=int, default=None, help="Seed for randomized suites.")
@click.option("--bit-budget", type=int, envvar="TAKAGI_LAB_BIT_BUDGET", default=None,
              help="Cap on materialized digit positions.")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="Configuration file (default data/takagi_lab.json).")
@click.pass_context
def main(ctx: click.Context, output_format: Optional[str], seed: Optional[int],
         bit_budget: Optional[int], config_path: Optional[str]):
    """Exact experiments on Takagi's function."""
    _configure_logging()
    config: LabConfig = load_config(config_path)
    ctx.obj = {
        "config": config,
        "format": output_format or config.output.format,
        "seed": seed if seed is not None else config.selftest.seed,
        "bit_budget": bit_budget or config.limits.bit_budget,
    }


@main.command("eval")
@click.argument("spec")
@click.option("--N", "n_terms", type=int, default=None, help="Series terms for enclosures.")
@click.option("--M", "depth", type=int, default=None, help="Truncation depth for enclosures (default factor * N).")
@click.pass_context
@handle_errors
def eval_command(ctx: click.Context, spec: str, n_terms: Optional[int], depth: Optional[int]):
    """Exact T(x) for dyadic and rational specs, an enclosure for gap specs."""
    config: LabConfig = ctx.obj["config"]
    x = _parse(ctx, spec)
    value = x.rational_value()
    if value is not None:
        exact = takagi_of_dyadic(Dyadic.from_fraction(value)) if x.is_dyadic() else takagi_rational(value)
        record = {"spec": spec, "provenance": "exact", "value": exact, "value_approx": float(exact)}
    else:
        n_terms = n_terms or config.evaluation.n_terms
        depth = depth or config.evaluation.depth_factor * n_terms
        enclosure = takagi_enclosure(x, n_terms, depth)
        record = {"spec": spec, "provenance": "enclosed", "N": n_terms, "M": depth, "value": enclosure}
    _emit(ctx, [to_record(record)], spec=spec, N=n_terms, M=depth)


@main.command()
@click.argument("spec")
@click.option("--N", "horizon", type=int, default=None, help="Number of sampled terms.")
@click.option("--window", type=int, default=None, help="Trailing samples used by the trend fit.")
@click.pass_context
@handle_errors
def classify(ctx: click.Context, spec: str, horizon: Optional[int], window: Optional[int]):
    """
    Trend verdicts for the four one-sided conditions at a non-dyadic point.

    Columns: condition, verdict, horizon, window, window_slope_approx, then a summary row.
    """
    trend = ctx.obj["config"].trend
    horizon = horizon or trend.horizon
    window = window or min(trend.window, horizon)
    x = _parse(ctx, spec)
    report = classify_point(x, horizon, window, trend.theta, trend.bound)

    records = [
        to_record(r, spec=spec, condition=name) for name, r in report.conditions.items()
    ]
    records.append(to_record({
        "spec": spec,
        "condition": "summary",
        "verdict": report.verdict,
        "horizon": horizon,
        "window": window,
        "right_plus_infinity": report.right_plus_infinity,
        "left_plus_infinity": report.left_plus_infinity,
        "right_minus_infinity": report.right_minus_infinity,
        "left_minus_infinity": report.left_minus_infinity,
        "message": _classification_message(report),
    }))
    _emit(ctx, records, spec=spec, N=horizon, window=window)


def _classification_message(report) -> str:
    if report.verdict == "plus_infinity":
        return "consistent with T'(x)=+oo"
    if report.verdict == "minus_infinity":
        return "consistent with T'(x)=-oo"
    if report.right_plus_infinity:
        return "one-sided only: T'_+ = +oo, T'_- fails"
    if report.left_minus_infinity:
        return "one-sided only: T'_- = -oo, T'_+ fails"
    if report.verdict == "not_infinite":
        return "condition for an infinite derivative fails at this horizon"
    return f"inconclusive at horizon {report.horizon}"


@main.command()
@click.argument("spec")
@click.option("--p", "p", type=int, required=True, help="Step exponent, h = 2^-p.")
@click.option("--K", "depth", type=int, default=None, help="Truncation depth (default max(K floor, 2p)).")
@click.option("--h", "step", type=str, default=None, help="Dyadic step num/den in (2^-p-1, 2^-p] instead of 2^-p.")
@click.pass_context
@handle_errors
def kono(ctx: click.Context, spec: str, p: int, depth: Optional[int], step: Optional[str]):
    """Decompose T(x+h) - T(x) and check it against the exact difference."""
    floor = ctx.obj["config"].kono.depth_floor
    depth = depth or max(floor, 2 * p)
    x = _parse(ctx, spec)
    h = None
    if step is not None:
        try:
            h = Dyadic.from_fraction(Fraction(step))
        except (ValueError, ZeroDivisionError) as e:
            raise click.BadParameter(str(e), param_hint="--h")
    split = kono_split(x, None if h is not None else p, depth, h)
    holds = split.identity_holds()
    check = "n/a" if holds is None else ("PASS" if holds else "FAIL")
    provenance = "enclosed" if holds is None else "exact"
    record = to_record(split, spec=spec, provenance=provenance, identity_check=check)
    _emit(ctx, [record], spec=spec, p=p, K=depth, h=step)
    if holds is False:
        raise CheckFailed("decomposition does not contain T(x+h) - T(x)")


@main.command()
@click.argument("spec", required=False)
@click.option("--kruppel", is_flag=True, help="Window slopes at x = sum 2^-(base^n).")
@click.option("--base", type=int, default=4, show_default=True)
@click.option("--n", "index", type=click.IntRange(min=1), default=None, help="Kruppel index n (default 1..5).")
@click.option("--m", "level", type=int, default=None, help="Dyadic level for SPEC.")
@click.pass_context
@handle_errors
def secant(ctx: click.Context, spec: Optional[str], kruppel: bool, base: int, index: Optional[int],
           level: Optional[int]):
    """Exact secant slopes: Kruppel windows or the level-m dyadic interval around SPEC."""
    budget = ctx.obj["bit_budget"]
    records = []
    if kruppel:
        for n in ([index] if index is not None else range(1, 6)):
            slope = kruppel_window_slope(n, base, budget)
            closed = kruppel_slope_closed_form(n, base)
            records.append(to_record({"n": n, "base": base, "provenance": "exact", "slope": slope,
                                      "closed_form": closed, "matches": slope == closed}))
    elif spec is not None and level is not None:
        x = _parse(ctx, spec)
        slope = dyadic_interval_slope(x, level)
        d_m = deficiency(x, level)
        records.append(to_record({"spec": spec, "m": level, "provenance": "exact", "slope": slope,
                                  "deficiency": d_m, "matches": slope == d_m}))
    else:
        raise click.UsageError("give --kruppel, or SPEC with --m")
    _emit(ctx, records, spec=spec, kruppel=kruppel, base=base, n=index, m=level)
    if not all(r["matches"] for r in records):
        raise CheckFailed("secant slope disagrees with its closed form")


@main.command()
@click.argument("spec")
@click.option("--schedule", type=click.Choice(SCHEDULES), default="plain", show_default=True)
@click.option("--j", "j_range", type=str, default="16..256", show_default=True,
              help="Exponent range A..B for the plain schedule.")
@click.option("--count", type=click.IntRange(min=1), default=6, show_default=True,
              help="Indices n for zeros/kono_window.")
@click.option("--exact", is_flag=True,
              help="Also report each quotient as an exact rational (rational SPEC only).")
@click.pass_context
@handle_errors
def modulus(ctx: click.Context, spec: str, schedule: str, j_range: str, count: int, exact: bool):
    """
    Scaled quotients (T(x+h) - T(x)) / (h log2(1/|h|)) along a step schedule.

    Columns: index, h, ratio_approx, delta (exact, rational x), width (enclosures), flagged,
    provenance, and ratio_exact with --exact.
    """
    density = ctx.obj["config"].density
    x = _parse(ctx, spec)
    value = x.rational_value()
    if exact and value is None:
        raise click.UsageError("--exact needs a dyadic or rational SPEC")
    if schedule == "plain":
        js = _parse_range(j_range)
        trace = modulus_experiment(x, schedule, len(js), start=js.start, density_horizon=density.horizon)
    else:
        trace = modulus_experiment(x, schedule, count, density_horizon=density.horizon)
    records = []
    for pt in trace.points:
        extra = {"ratio_exact": scaled_quotient_exact(value, pt.h)} if exact else {}
        provenance = "exact" if pt.delta is not None else "enclosed"
        records.append(to_record(pt, spec=spec, schedule=schedule, provenance=provenance,
                                 predicted_limit=trace.predicted_limit, **extra))
    _emit(ctx, records, spec=spec, schedule=schedule, j=j_range, count=count, exact=exact)


@main.command()
@click.argument("spec")
@click.option("--n", "n", type=int, default=None, help="Digits counted.")
@click.pass_context
@handle_errors
def density(ctx: click.Context, spec: str, n: Optional[int]):
    """Digit density I_n/n and the density-regular case it suggests."""
    cfg = ctx.obj["config"].density
    n = n or cfg.horizon
    report = density_estimate(_parse(ctx, spec), n, cfg.tolerance, cfg.ratio_tolerance, cfg.window_fraction)
    _emit(ctx, [to_record(report, spec=spec)], spec=spec, n=n)


@main.command()
@click.argument("rule")
@click.option("--N", "horizon", type=int, default=None, help="Number of sampled terms.")
@click.pass_context
@handle_errors
def sufficient(ctx: click.Context, rule: str, horizon: Optional[int]):
    """Windowed ratio/density sufficient condition for a generator RULE (e.g. primes)."""
    horizon = horizon or ctx.obj["config"].trend.horizon
    name, params = parse_rule(rule, rule, 0)
    g = builtin_generator(name, params)
    report = sufficient_check(g, horizon)
    samples = condition_sequence(g, horizon)
    record = to_record(report, rule=rule, begle_ayres_last=begle_ayres_sequence(g, horizon)[-1],
                       c_last=samples[-1].c_n)
    _emit(ctx, [record], rule=rule, N=horizon)


@main.command("stats")
@click.argument("spec")
@click.option("--n", "n", type=click.IntRange(min=1), required=True, help="Digits counted.")
@click.pass_context
@handle_errors
def stats_command(ctx: click.Context, spec: str, n: int):
    """O_n, I_n, D_n and I_n/n over the first n digits."""
    _emit(ctx, [to_record(stats(_parse(ctx, spec), n), spec=spec)], spec=spec, n=n)


@main.command("gaps")
@click.argument("spec")
@click.option("--count", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--which", type=click.Choice([ONES, ZEROS]), default=ONES, show_default=True)
@click.pass_context
@handle_errors
def gaps_command(ctx: click.Context, spec: str, count: int, which: str):
    """First positions of the 1-digits (a_n) or 0-digits (b_n)."""
    positions = gaps(_parse(ctx, spec), count, which)
    records = [{"spec": spec, "which": which, "n": n, "position": pos} for n, pos in enumerate(positions, 1)]
    _emit(ctx, records, spec=spec, count=count, which=which)


@main.command()
@click.argument("c", type=int)
@click.pass_context
@handle_errors
def maximize(ctx: click.Context, c: int):
    """Largest maximizer m* of (1 - 2^-m)(c - m) and the bracket check."""
    report = maximize_f(c)
    _emit(ctx, [to_record(report, bracket_holds=report.bracket_holds())], c=c)
    if not report.bracket_holds():
        raise CheckFailed(f"bracket fails at c={c}")


@main.command()
@click.option("--quick", is_flag=True, help="Scale case counts down.")
@click.pass_context
def selftest(ctx: click.Context, quick: bool):
    """Run the acceptance suite; exit 1 if any check fails."""
    results = run_selftest(ctx.obj["config"], quick, ctx.obj["seed"], echo=click.echo)
    if not all(r.passed for r in results):
        ctx.exit(1)


if __name__ == "__main__":
    main()
