#!/usr/bin/env python3

"""
specrec: exact free energies of genus-zero spectral curves

Computes F_g and omega_{g,n} of (Log-)Topological Recursion for curves given
either by name from the built-in catalog or as a JSON/TOML curve document, and
cross-checks every available path:
1. TR: the recursion on the rational ramification points of x, then the dilaton equation
2. Duality: residues of the x-y duality formula (y = a*z + c or y = log z)
3. Closed form: the catalog family's formula, when it has one

Subcommands:
    freeenergy          F_g table for g = 2..gmax; exit 2 when paths disagree
    verify-identities   appendix and loop-equation checks; exit 2 on a failure
    emit-omega          pole-basis dump of omega_{g,n}
    catalog list        the named curve families and their parameters

The report goes to stdout (or --output), progress to stderr. Input errors exit 1;
a requested computation with no available path (PATH_UNAVAILABLE) exits 3.

Requires:
    pip install sympy pydantic python-dotenv tomli tqdm
"""
import argparse
import asyncio
import json
import logging
import os
import sys
import time
import traceback
from fractions import Fraction
from math import factorial
from typing import Callable, Dict, List, Optional, Tuple

import dotenv
from pydantic import ValidationError
from tqdm import tqdm

from appendix_verify import (
    BOTH,
    NEITHER,
    degree_shift_check,
    lemmaA1_check,
    operator_product_check,
    reconstruction_identity_check,
    residue_lemma_oracle,
)
from config import EngineSettings, load_curve_document, load_settings
from curve_catalog import CatalogEntry, catalog_get, catalog_list
from duality_engine import free_energy_duality
from errors import IrrationalPoleError, PathUnavailableError, SpecrecError, UnsupportedDualError
from exact_algebra import RationalFunction
from report_types import (
    NONE,
    PATH_UNAVAILABLE,
    UNSUPPORTED_DUAL,
    FreeEnergyReport,
    FreeEnergyRow,
    OmegaDump,
    OmegaTerm,
    VerificationRecord,
    VerificationReport,
    rational_text,
    render,
    to_csv,
    to_markdown,
)
from spectral_curve import SpectralCurve, parse_curve
from tr_engine import dilaton_free_energy, lemma31_check, linear_loop_check, tr_omega

dotenv.load_dotenv()

logger = logging.getLogger("specrec")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_DISAGREE = 2
EXIT_UNAVAILABLE = 3

METHODS = ("tr", "duality", "both", "all")
SUITES = ("appendix", "loop-equations", "all")
FORMATS = ("json", "csv", "md")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage errors as exceptions, so they map to exit code 1."""

    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="specrec", description="Free energies of genus-zero spectral curves.")
    parser.add_argument("--verbose", "-v", action="store_true", help="Log progress at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_curve_args(p):
        p.add_argument("--curve", type=str, default="harer-zagier",
                       help="Catalog name or path to a .json/.toml curve document")
        p.add_argument("--param", type=str, action="append", default=[],
                       help="Curve parameter k=v (can specify multiple times; lists as a,b,c)")

    fe = sub.add_parser("freeenergy", help="Compute F_g on every available path")
    add_curve_args(fe)
    fe.add_argument("--gmax", type=int, default=3, help="Largest genus, >= 2")
    fe.add_argument("--method", type=str, default="all", help="tr | duality | both | all")
    fe.add_argument("--format", type=str, default="json", help="json | csv | md")
    fe.add_argument("--output", type=str, help="Write the report to this file instead of stdout")
    fe.add_argument("--concurrent", action="store_true",
                    help="Run the TR and duality paths concurrently instead of sequentially")

    vi = sub.add_parser("verify-identities", help="Run the identity suites")
    add_curve_args(vi)
    vi.add_argument("--suite", type=str, default="all", help="appendix | loop-equations | all")
    vi.add_argument("--gmax", type=int, default=3, help="Largest genus checked")
    vi.add_argument("--output", type=str, help="Write the report to this file instead of stdout")

    eo = sub.add_parser("emit-omega", help="Dump omega_{g,n} in the pole basis")
    add_curve_args(eo)
    eo.add_argument("--g", type=int, required=True, help="Genus")
    eo.add_argument("--n", type=int, required=True, help="Number of variables")
    eo.add_argument("--format", type=str, default="json", help="json | csv | md")
    eo.add_argument("--output", type=str, help="Write the dump to this file instead of stdout")

    cat = sub.add_parser("catalog", help="Inspect the curve catalog")
    cat.add_argument("action", type=str, help="list")
    cat.add_argument("--format", type=str, default="json", help="json | csv | md")
    return parser


def _banner(title: str) -> None:
    print("=========================================", file=sys.stderr)
    print(f"   {title}", file=sys.stderr)
    print("=========================================", file=sys.stderr)


def _progress(iterable, desc: str):
    return tqdm(iterable, desc=desc, file=sys.stderr, disable=not sys.stderr.isatty())


def _choice(value: str, allowed: Tuple[str, ...], what: str) -> str:
    if value not in allowed:
        raise UsageError(f"unknown {what} {value!r}; expected one of {', '.join(allowed)}")
    return value


def _parse_params(items: List[str]) -> Dict[str, str]:
    params: Dict[str, str] = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"--param expects k=v, got {item!r}")
        params[key.strip()] = value.strip()
    return params


def resolve_curve(name: str, params: Dict[str, str]) -> Tuple[SpectralCurve, Optional[CatalogEntry]]:
    """
    A catalog entry by name, or a curve document from a file.

    For documents, --param may override 'label' and 'framing' (file < flags).
    """
    if os.path.exists(name) or name.lower().endswith((".json", ".toml")):
        config = load_curve_document(name)
        overrides = {}
        for key, value in params.items():
            if key == "framing":
                try:
                    overrides["framing"] = int(value)
                except ValueError:
                    raise UsageError(f"framing must be an integer, got {value!r}")
            elif key == "label":
                overrides["label"] = value
            else:
                raise UsageError(f"curve documents accept only label and framing overrides, not {key!r}")
        if overrides:
            config = config.model_validate({**config.model_dump(), **overrides})
        return parse_curve(config), None
    entry = catalog_get(name, params)
    return entry.curve, entry


def _write(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w") as f:
            f.write(text)
        print(f"Report written to {output}", file=sys.stderr)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# freeenergy
# ---------------------------------------------------------------------------

def _tr_value(curve: SpectralCurve, g: int, settings: EngineSettings) -> str:
    try:
        return rational_text(dilaton_free_energy(curve, g, settings).value)
    except (PathUnavailableError, IrrationalPoleError) as e:
        logger.info("TR path unavailable for %s: %s", curve.label, e)
        return PATH_UNAVAILABLE


def _duality_value(curve: SpectralCurve, g: int, settings: EngineSettings) -> str:
    try:
        return rational_text(free_energy_duality(curve, g).value)
    except UnsupportedDualError as e:
        logger.info("duality path unsupported for %s: %s", curve.label, e)
        return UNSUPPORTED_DUAL
    except IrrationalPoleError as e:
        logger.info("duality path unavailable for %s: %s", curve.label, e)
        return PATH_UNAVAILABLE


def _column(fn: Callable[[SpectralCurve, int, EngineSettings], str], curve: SpectralCurve,
            genera: List[int], settings: EngineSettings, desc: str) -> Tuple[Dict[int, str], float]:
    start = time.perf_counter()
    values = {g: fn(curve, g, settings) for g in _progress(genera, desc)}
    return values, (time.perf_counter() - start) * 1000


async def run_freeenergy(args) -> int:
    method = _choice(args.method, METHODS, "method")
    fmt = _choice(args.format, FORMATS, "format")
    if args.gmax < 2:
        raise UsageError("--gmax must be >= 2")
    settings = load_settings()
    curve, entry = resolve_curve(args.curve, _parse_params(args.param))
    genera = list(range(2, args.gmax + 1))

    _banner(f"F_g for {curve.label}, g = 2..{args.gmax}, method {method}")
    paths = []
    if method in ("tr", "both", "all"):
        paths.append(("tr", _tr_value))
    if method in ("duality", "both", "all"):
        paths.append(("duality", _duality_value))

    if args.concurrent:
        print(f"Running {len(paths)} paths concurrently: {', '.join(p for p, _ in paths)}", file=sys.stderr)
        results = await asyncio.gather(*[
            asyncio.to_thread(_column, fn, curve, genera, settings, name) for name, fn in paths
        ])
    else:
        results = [_column(fn, curve, genera, settings, name) for name, fn in paths]
    columns = {name: result for (name, _), result in zip(paths, results)}

    report = FreeEnergyReport(curve_label=curve.label, fingerprint=curve.fingerprint, method=method)
    if entry is not None:
        report.metadata = dict(entry.metadata)
    for name, (_, ms) in columns.items():
        report.timing_ms[name] = round(ms, 3)
    start = time.perf_counter()
    for g in genera:
        row = FreeEnergyRow(g=g)
        if "tr" in columns:
            row.tr_value = columns["tr"][0][g]
        if "duality" in columns:
            row.duality_value = columns["duality"][0][g]
        if method == "all":
            value = entry.closed_form(g) if entry is not None and entry.has_closed_form else None
            row.closed_form = NONE if value is None else rational_text(value)
        report.rows.append(row.settle())
    if method == "all":
        report.timing_ms["closed_form"] = round((time.perf_counter() - start) * 1000, 3)

    # timings vary between runs; keep stdout deterministic
    rows = [row.model_dump() for row in report.rows]
    timing = report.timing_ms
    report.timing_ms = {}
    _write(render(report, rows, fmt), args.output)
    for name, ms in sorted(timing.items()):
        print(f"  {name:<12} {ms:>10.1f} ms", file=sys.stderr)

    if not any(row.values() for row in report.rows):
        print(f"✗ {PATH_UNAVAILABLE}: no requested path produced a value", file=sys.stderr)
        return EXIT_UNAVAILABLE
    if report.all_agree:
        print("✓ All available paths agree", file=sys.stderr)
        return EXIT_OK
    for row in report.rows:
        if not row.agree:
            print(f"✗ g={row.g}: paths disagree", file=sys.stderr)
    return EXIT_DISAGREE


# ---------------------------------------------------------------------------
# verify-identities
# ---------------------------------------------------------------------------

def _consistent(verdicts: List[str]) -> str:
    distinct = {v for v in verdicts if v != BOTH}
    if not distinct:
        return BOTH
    if len(distinct) == 1 and NEITHER not in distinct:
        return distinct.pop()
    return "inconsistent"


def appendix_records(g_max: int) -> Tuple[List[VerificationRecord], Dict[str, str]]:
    records: List[VerificationRecord] = []
    verdicts: Dict[str, str] = {}
    suite = "appendix"
    y = RationalFunction.identity()

    a1 = lemmaA1_check(g_max)
    for r in a1:
        records.append(VerificationRecord(
            suite=suite, identity="lemma-a1", parameters={"g": str(r.g)}, passed=r.verdict != NEITHER,
            details={"lhs": rational_text(r.lhs), "minus": rational_text(r.minus_candidate),
                     "plus": rational_text(r.plus_candidate), "verdict": r.verdict},
        ))
    verdicts["lemma-a1"] = _consistent([r.verdict for r in a1])

    for g in range(1, g_max + 1):
        records.append(VerificationRecord(
            suite=suite, identity="reconstruction", parameters={"g": str(g)},
            passed=reconstruction_identity_check(g),
        ))

    q_list = [Fraction(0), Fraction(1), Fraction(3)]
    for n_a in range(2, 6):
        for label, f in (("1", RationalFunction.constant(1)), ("y+2", y + 2), ("y", y)):
            shift = degree_shift_check(q_list, 0, n_a, f)
            records.append(VerificationRecord(
                suite=suite, identity="lemma-a2", parameters={"Q": "0,1,3", "a": "0", "n_a": str(n_a), "f": label},
                passed=shift.holds,
                details={"before": str(shift.pole_order_before), "after": str(shift.pole_order_after)},
            ))

    a3 = []
    g_fn = RationalFunction.pole(5, 1) + 1
    for n_a in range(1, 6):
        f = (y + 1) ** n_a
        oracle = residue_lemma_oracle([Fraction(0), Fraction(2)], 0, n_a, f, g_fn)
        a3.append(oracle.verdict)
        records.append(VerificationRecord(
            suite=suite, identity="lemma-a3", parameters={"Q": "0,2", "a": "0", "n_a": str(n_a)},
            passed=oracle.verdict != NEITHER,
            details={"stated_form": rational_text(oracle.stated_form),
                     "factorial_form": rational_text(oracle.factorial_form),
                     "brute_force": rational_text(oracle.brute_force), "verdict": oracle.verdict},
        ))
        product = operator_product_check([Fraction(0), Fraction(2)], 0, n_a, y ** 2 + g_fn)
        records.append(VerificationRecord(
            suite=suite, identity="operator-product", parameters={"Q": "0,2", "a": "0", "n_a": str(n_a)},
            passed=product.holds and product.constant_ratio == factorial(n_a - 1),
            details={"valuation": str(product.valuation), "constant_ratio": rational_text(product.constant_ratio),
                     "stated_constant_holds": str(product.stated_constant_holds)},
        ))
    verdicts["lemma-a3"] = _consistent(a3)
    return records, verdicts


def loop_equation_records(curve: SpectralCurve, g_max: int, settings: EngineSettings) -> List[VerificationRecord]:
    records: List[VerificationRecord] = []
    suite = "loop-equations"
    label = {"curve": curve.label}
    for g, n in ((0, 3), (1, 2)):
        omega = tr_omega(curve, g, n, g_max, settings)
        records.append(VerificationRecord(
            suite=suite, identity="symmetry", parameters={**label, "g": str(g), "n": str(n)},
            passed=omega.is_symmetric(),
        ))
    for g in _progress(range(1, g_max + 1), "loop equations"):
        verdicts = linear_loop_check(curve, g, settings)
        records.append(VerificationRecord(
            suite=suite, identity="linear-loop", parameters={**label, "g": str(g)},
            passed=all(verdicts.values()),
            details={str(p): str(v) for p, v in verdicts.items()},
        ))
        residues = tr_omega(curve, g, 1, g_max, settings).residues(0)
        records.append(VerificationRecord(
            suite=suite, identity="residue-free", parameters={**label, "g": str(g)}, passed=not residues,
        ))
        if g >= 2:
            result = lemma31_check(curve, g, settings)
            records.append(VerificationRecord(
                suite=suite, identity="lemma-3.1", parameters={**label, "g": str(g)}, passed=result.holds,
                details={"lhs": str(result.lhs), "rhs": str(result.rhs)},
            ))
    return records


def run_verify(args) -> int:
    suite = _choice(args.suite, SUITES, "suite")
    if args.gmax < 1:
        raise UsageError("--gmax must be >= 1")
    settings = load_settings()
    report = VerificationReport()
    _banner(f"Identity suites: {suite}")
    if suite in ("appendix", "all"):
        print("Checking appendix identities...", file=sys.stderr)
        records, verdicts = appendix_records(args.gmax)
        report.records.extend(records)
        report.verdicts.update(verdicts)
    if suite in ("loop-equations", "all"):
        curve, _ = resolve_curve(args.curve, _parse_params(args.param))
        print(f"Checking loop equations on {curve.label}...", file=sys.stderr)
        report.records.extend(loop_equation_records(curve, args.gmax, settings))

    _write(render(report, [], "json"), args.output)
    failed = [r for r in report.records if not r.passed]
    for r in failed:
        print(f"✗ {r.identity} {r.parameters}", file=sys.stderr)
    for name, verdict in sorted(report.verdicts.items()):
        print(f"  {name}: {verdict}", file=sys.stderr)
    if report.passed:
        print(f"✓ {len(report.records)} checks passed", file=sys.stderr)
        return EXIT_OK
    return EXIT_DISAGREE


# ---------------------------------------------------------------------------
# emit-omega and catalog
# ---------------------------------------------------------------------------

def run_emit_omega(args) -> int:
    fmt = _choice(args.format, FORMATS, "format")
    if args.g < 0 or args.n < 1 or 2 * args.g + args.n < 3:
        raise UsageError("emit-omega needs g >= 0, n >= 1 and 2g + n >= 3")
    settings = load_settings()
    curve, _ = resolve_curve(args.curve, _parse_params(args.param))
    try:
        omega = tr_omega(curve, args.g, args.n, settings=settings)
    except IrrationalPoleError as e:
        raise PathUnavailableError(str(e)) from e
    dump = OmegaDump(curve_label=curve.label, g=args.g, n=args.n, bergman=omega.bergman,
                     terms=[OmegaTerm(**record) for record in omega.to_records()])
    _write(render(dump, omega.to_records(), fmt), args.output)
    return EXIT_OK


def run_catalog(args) -> int:
    if args.action != "list":
        raise UsageError(f"unknown catalog action {args.action!r}; expected list")
    fmt = _choice(args.format, FORMATS, "format")
    entries = catalog_list()
    if fmt == "json":
        sys.stdout.write(json.dumps(entries, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write((to_csv if fmt == "csv" else to_markdown)(entries))
    return EXIT_OK


def _configure_logging(verbose: bool) -> None:
    level = "INFO" if verbose else os.getenv("SPECREC_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _configure_logging(args.verbose)
        if args.command == "freeenergy":
            return asyncio.run(run_freeenergy(args))
        if args.command == "verify-identities":
            return run_verify(args)
        if args.command == "emit-omega":
            return run_emit_omega(args)
        return run_catalog(args)
    except UsageError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except PathUnavailableError as e:
        print(f"Error: {PATH_UNAVAILABLE}: {e}", file=sys.stderr)
        return EXIT_UNAVAILABLE
    except (SpecrecError, ValidationError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as e:
        print(f"Error: {e}", file=sys.stderr)
        traceback.print_exc()
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
