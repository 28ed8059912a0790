"""Command-line frontend: parse job descriptions, run the computations,
emit reports and certificates.

Exit codes: 0 success, 1 invariant or mathematical failure, 2 usage or
parse error, 3 precision failure or non-stabilization.  Every sampled
check takes an explicit seed, so identical invocations produce
byte-identical reports.
"""

from __future__ import annotations

import functools
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

import click

from .artinschreier import solve_as_general, solve_phi_minus_one
from .complexes import (
    cohomology,
    gamma_complex,
    herr_complex,
    phi_cone,
    semidirect_gamma_complex,
)
from .errors import (
    DepthExceededError,
    InvariantError,
    NonStabilizationError,
    PrecisionError,
)
from .homotopy import (
    ChainComplexZ,
    ChainMap,
    DoubleComplex,
    Tower,
    cone_sequence,
    les_check,
    mapping_cone,
    spectral_E_pages,
    tower_lim_lim1,
)
from .modules import module_from_json
from .normfield import NormFieldElement, format_element, parse_element
from .tatesen import tate_sen_certificate, tau_projection
from .wittside import WittVector
from .zmodlin import module_profile

EXIT_OK = 0
EXIT_MATH = 1
EXIT_PARSE = 2
EXIT_PRECISION = 3


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class JobSpec:
    """Validated job description shared by the subcommands."""

    command: str
    input_path: str | None
    p: int
    s: int
    schedule: tuple
    fmt: str
    seed: int

    def __post_init__(self):
        if self.p == 2 or not _is_prime(self.p):
            raise ValueError(f"prime must be odd and prime, got {self.p}")
        if not 1 <= self.s <= 6:
            raise ValueError(f"power must lie in [1, 6], got {self.s}")
        if any(a >= b for a, b in zip(self.schedule, self.schedule[1:])):
            raise ValueError("window schedule must be strictly increasing")
        if self.fmt not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.fmt!r}")


def make_schedule(window: int, doublings: int) -> tuple:
    if window < 4:
        raise ValueError("initial window must be at least 4")
    if doublings < 1:
        raise ValueError("need at least one doubling to check stability")
    return tuple(window * 2 ** k for k in range(doublings + 1))


def guarded(fn):
    """Map library exceptions onto the exit-code contract."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (NonStabilizationError, PrecisionError) as err:
            click.echo(f"precision failure: {err}", err=True)
            sys.exit(EXIT_PRECISION)
        except (InvariantError, DepthExceededError) as err:
            click.echo(f"computation failed: {err}", err=True)
            sys.exit(EXIT_MATH)
        except (ValueError, KeyError, OSError, json.JSONDecodeError) as err:
            click.echo(f"parse error: {err}", err=True)
            sys.exit(EXIT_PARSE)

    return wrapper


def emit(text: str, report_path: str | None):
    if report_path:
        with open(report_path, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        click.echo(text)


def read_input(path: str) -> str:
    with open(path) as fh:
        text = fh.read()
    if not text.strip():
        raise ValueError(f"input file {path} is empty")
    return text


common = [
    click.option("--prime", "-p", default=3, show_default=True,
                 help="Odd prime p."),
    click.option("--power", "-s", default=1, show_default=True,
                 help="Coefficient precision: work over Z/p^s."),
    click.option("--format", "fmt", default="csv", show_default=True,
                 type=click.Choice(["csv", "json"])),
    click.option("--seed", default=0, show_default=True,
                 help="Seed for sampled checks."),
    click.option("--report", default=None, type=click.Path(),
                 help="Write the report to this path instead of stdout."),
]


def with_common(fn):
    for opt in reversed(common):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Exact finite-precision (phi, Gamma)-module computations."""


@main.command("cohomology")
@click.argument("module_file", type=click.Path())
@click.option("--window", default=16, show_default=True,
              help="Initial window depth.")
@click.option("--doublings", default=2, show_default=True,
              help="Number of window doublings for the stability trace.")
@click.option("--mode", default="delta", show_default=True,
              type=click.Choice(["delta", "free"]),
              help="delta: project onto Delta-invariants (base Q_p); "
                   "free: torsion-free Gamma (base Q_p(zeta_p)).")
@click.option("--complex", "kind", default="herr", show_default=True,
              type=click.Choice(["herr", "gamma", "semidirect"]))
@with_common
@guarded
def cohomology_cmd(module_file, window, doublings, mode, kind, prime, power,
                   fmt, seed, report):
    """Stabilized cohomology report for a module description file."""
    job = JobSpec("cohomology", module_file, prime, power,
                  make_schedule(window, doublings), fmt, seed)
    D = module_from_json(read_input(module_file))
    if (D.p, D.s) != (job.p, job.s):
        raise ValueError(
            f"module file is over p={D.p}, s={D.s}; flags say "
            f"p={job.p}, s={job.s}")
    if kind == "herr":
        T = herr_complex(D, mode)
    elif kind == "gamma":
        T = gamma_complex(D, mode)
    else:
        T = semidirect_gamma_complex(D)
    rep = cohomology(T, schedule=job.schedule)
    if fmt == "json":
        emit(rep.to_json(), report)
    else:
        lines = [rep.to_csv().rstrip("\n")]
        for label, dims in rep.trace:
            lines.append(f"trace,{label},{'|'.join(str(d) for d in dims)}")
        lines.append(f"verdict,{rep.verdict},euler={rep.euler}")
        emit("\n".join(lines), report)
    if rep.verdict != "stable":
        sys.exit(EXIT_PRECISION)


@main.command("solve-as")
@click.argument("expr")
@click.option("--depth-budget", default=2, show_default=True)
@click.option("--window", default=24, show_default=True,
              help="Certified precision window for the input element.")
@with_common
@guarded
def solve_as_cmd(expr, depth_budget, window, prime, power, fmt, seed,
                 report):
    """Solve a^p - a = b for an element expression such as "pi^-3"."""
    JobSpec("solve-as", None, prime, 1, (1, 2), fmt, seed)
    b = parse_element(expr, prime, Fraction(window))
    sol = solve_as_general(b, depth_budget=depth_budget)
    emit(json.dumps(sol.to_json(), sort_keys=True, indent=2), report)


@main.command("solve-phi1")
@click.argument("components")
@click.option("--window", default=24, show_default=True)
@with_common
@guarded
def solve_phi1_cmd(components, window, prime, power, fmt, seed, report):
    """Solve (phi - 1)y = z for a Witt vector given as
    "comp0; comp1; ..." element expressions."""
    JobSpec("solve-phi1", None, prime, power, (1, 2), fmt, seed)
    parts = [parse_element(t.strip(), prime, Fraction(window))
             for t in components.split(";")]
    if len(parts) != power:
        raise ValueError(
            f"expected {power} components for s={power}, got {len(parts)}")
    sol = solve_phi_minus_one(WittVector(prime, power, parts))
    emit(json.dumps(sol.to_json(), sort_keys=True, indent=2), report)


@main.command("trace")
@click.argument("expr")
@click.option("--level", "-m", default=0, show_default=True,
              help="Project onto the level-m grid.")
@click.option("--grid-level", default=1, show_default=True,
              help="Perfection level the input expression lives at.")
@click.option("--window", default=24, show_default=True)
@with_common
@guarded
def trace_cmd(expr, level, grid_level, window, prime, power, fmt, seed,
              report):
    """Normalized trace projection of an element expression."""
    JobSpec("trace", None, prime, power, (1, 2), fmt, seed)
    x = parse_element(expr, prime, Fraction(window))
    z = NormFieldElement(
        prime, grid_level,
        {e * prime ** grid_level: c for e, c in x.terms().items()},
        Fraction(window))
    out = tau_projection(z, level, 0)
    doc = {"input": expr, "level": level, "projection": format_element(out)}
    emit(json.dumps(doc, sort_keys=True, indent=2), report)


@main.command("ts-report")
@click.option("--level", "-m", default=0, show_default=True)
@click.option("--samples", default=50, show_default=True)
@with_common
@guarded
def ts_report_cmd(level, samples, prime, power, fmt, seed, report):
    """Tate-Sen constants certificate (c1..c4) with sampled evidence."""
    JobSpec("ts-report", None, prime, power, (1, 2), fmt, seed)
    cert = tate_sen_certificate(prime, level, samples, seed)
    emit(cert.to_json(), report)


@main.command("cone")
@click.argument("map_file", type=click.Path())
@with_common
@guarded
def cone_cmd(map_file, prime, power, fmt, seed, report):
    """Mapping cone of a chain-map file and its long-exact-sequence
    verdict."""
    doc = json.loads(read_input(map_file))
    if doc.get("format") != "chain-map":
        raise ValueError("not a chain-map document")
    src = ChainComplexZ.from_json(json.dumps(doc["src"]))
    dst = ChainComplexZ.from_json(json.dumps(doc["dst"]))
    f = ChainMap(src, dst, doc.get("blocks", {}))
    T = mapping_cone(f)
    les = les_check(cone_sequence(f))
    out = {
        "format": "cone-report",
        "ranks": {str(n): T.rank(n) for n in T.degrees()},
        "cohomology": {str(n): T.cohomology_profile(n)
                       for n in T.degrees()},
        "les_exact": les["exact"],
        "les_nodes": les["nodes"],
        "first_failure": les["first_failure"],
    }
    emit(json.dumps(out, sort_keys=True, indent=2), report)
    if not les["exact"]:
        sys.exit(EXIT_MATH)


@main.command("spectral")
@click.argument("grid_file", type=click.Path())
@with_common
@guarded
def spectral_cmd(grid_file, prime, power, fmt, seed, report):
    """Spectral pages of a double-complex file, checked against the
    total complex."""
    DC = DoubleComplex.from_json(read_input(grid_file))
    pages, abutment = spectral_E_pages(DC)
    out = {
        "format": "spectral-report",
        "pages": [{
            "r": pg.r,
            "lengths": {f"{pp},{qq}": ln
                        for (pp, qq), ln in sorted(pg.lengths.items())},
        } for pg in pages],
        "abutment": {str(n): list(pair)
                     for n, pair in abutment["degrees"].items()},
        "abutment_equal": abutment["equal"],
    }
    emit(json.dumps(out, sort_keys=True, indent=2), report)
    if not abutment["equal"]:
        sys.exit(EXIT_MATH)


@main.command("tower")
@click.argument("tower_file", type=click.Path())
@with_common
@guarded
def tower_cmd(tower_file, prime, power, fmt, seed, report):
    """lim and lim^1 of a tower file."""
    T = Tower.from_json(read_input(tower_file))
    lim, lim1 = tower_lim_lim1(T)
    out = {
        "format": "tower-report",
        "lim_profile": module_profile(lim),
        "lim1_profile": module_profile(lim1),
        "mittag_leffler": lim1.is_zero(),
    }
    emit(json.dumps(out, sort_keys=True, indent=2), report)


@main.command("check-module")
@click.argument("module_file", type=click.Path())
@with_common
@guarded
def check_module_cmd(module_file, prime, power, fmt, seed, report):
    """Validate a module description file and summarize it."""
    D = module_from_json(read_input(module_file))
    out = {
        "format": "module-check",
        "ok": True,
        "p": D.p,
        "s": D.s,
        "rank": D.rank,
        "relative": D.relative,
        "generators": [g.tag for g in D.generators],
    }
    emit(json.dumps(out, sort_keys=True, indent=2), report)


if __name__ == "__main__":
    main()
