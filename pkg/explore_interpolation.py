#!/usr/bin/env python3
"""
Command-line front end for the nilmanifold interpolation experiments.

Subcommands:
    orbit        reduced orbit table of g^a for a in a set
    nice-census  growth table of realized R-nice sets
    separate     Bohr / nilrotation separation certificates
    i0           I0 partition of a lacunary set joined with its shifts
    regions      region census of a polynomial arrangement
    classify     lacunary / sublacunary verdicts
    nilseq       values of a basic nilsequence

Reports go to stdout (or --output, any fsspec URL); status lines and logs
go to stderr. Exit codes: 0 success, 1 failed verification, 2 bad input.
"""

import argparse
import json
import logging
import sys
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import fsspec
import pandas as pd

from arrangement import (
    Arrangement,
    count_regions_1d,
    count_regions_grid,
    default_variables,
    separability_equation_census,
    stable_census,
)
from bohr import (
    SeparationCertificate,
    find_separating_rotation,
    i0_partition,
    nonrecurrence_witness,
    separation_curve,
    square_lift,
    sum_with_finite,
    verify_i0_partition,
)
from errors import NilError, SetsNotDisjoint
from integer_sets import IntegerSet, common_elements, parse_descriptor
from malcev_core import Polynomial, element, format_rational, load_spec, parse_rational
from nice_sets import classify, growth_experiment
from orbit_metric import FunctionDescriptor, is_nilrotation_separated, nilsequence_eval, nilsequence_phase, orbit

logger = logging.getLogger(__name__)

DEFAULT_LOG_FILE = "interpolation_experiments.log"
EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(NilError):
    """Bad flag combination or config file"""


class PathHandler:
    """Handle both local and remote (fsspec) output paths"""

    @staticmethod
    def is_remote(path: str) -> bool:
        return "://" in path and not path.startswith("file://")

    @staticmethod
    def open(path: str, mode: str):
        kwargs = {} if PathHandler.is_remote(path) else {"auto_mkdir": True}
        return fsspec.open(path, mode, **kwargs)


class ReportWriter:
    """Write tables and JSON documents deterministically"""

    def __init__(self, output: Optional[str] = None, fmt: Optional[str] = None):
        self.output = output
        self.fmt = fmt

    def _target_format(self, default: str) -> str:
        if self.fmt:
            return self.fmt
        if self.output:
            for suffix in ("csv", "json", "parquet"):
                if self.output.endswith(f".{suffix}"):
                    return suffix
        return default

    def _emit_text(self, text: str):
        if self.output:
            with PathHandler.open(self.output, "w") as handle:
                handle.write(text)
            logger.info(f"Saved report to {self.output}")
        else:
            sys.stdout.write(text)

    def write_table(self, df: pd.DataFrame):
        fmt = self._target_format("csv")
        if fmt == "csv":
            self._emit_text(df.to_csv(index=False, lineterminator="\n"))
        elif fmt == "json":
            self.write_json(df.to_dict(orient="records"), fmt="json")
        elif fmt == "parquet":
            if not self.output:
                raise UsageError("parquet output needs --output")
            frame = df.copy()
            for column in frame.columns:
                if frame[column].dtype == object:
                    frame[column] = frame[column].map(str)
            with PathHandler.open(self.output, "wb") as handle:
                handle.write(frame.to_parquet(index=False))
            logger.info(f"Saved parquet report to {self.output}")
        else:
            raise UsageError(f"unknown format {fmt!r}")

    def write_json(self, document: Any, fmt: Optional[str] = None):
        fmt = fmt or self._target_format("json")
        if fmt == "csv" and isinstance(document, list):
            self.write_table(pd.DataFrame(document))
            return
        if fmt not in ("json", "csv"):
            raise UsageError(f"{fmt} output is only available for tables")
        self._emit_text(json.dumps(document, sort_keys=True, indent=2, default=_json_default) + "\n")


def _json_default(value: Any):
    if isinstance(value, Fraction):
        return format_rational(value)
    if hasattr(value, "item"):
        return value.item()
    return str(value)


def setup_logging(verbose: bool = False, debug: bool = False, log_file: str = DEFAULT_LOG_FILE):
    log_level = logging.DEBUG if debug else (logging.INFO if verbose else logging.WARNING)
    logging.basicConfig(
        level=log_level,
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(log_file),
            logging.StreamHandler()
        ],
        force=True,
    )


def status(message: str):
    print(message, file=sys.stderr)


def load_config(path: str) -> Dict[str, str]:
    """Flat `key = value` file; `#` starts a comment, keys may use dashes"""
    values: Dict[str, str] = {}
    with PathHandler.open(path, "r") as handle:
        for number, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{number}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def _coerce_config(parser: argparse.ArgumentParser, values: Dict[str, str]) -> Dict[str, Any]:
    actions = {action.dest: action for action in parser._actions}
    out: Dict[str, Any] = {}
    for key, value in values.items():
        if key not in actions or key in ("help", "config"):
            raise UsageError(f"unknown config key {key!r}")
        action = actions[key]
        if action.nargs == 0:
            out[key] = value.lower() in ("1", "true", "yes", "on")
        elif isinstance(action, argparse._AppendAction):
            out[key] = [v.strip() for v in value.split(";") if v.strip()]
        else:
            out[key] = value
    return out


def parse_vector(text: str) -> List[Fraction]:
    return list(element(part for part in text.split(",") if part.strip()))


def parse_range(text: str) -> List[int]:
    """`4..12`, `3`, or `2,5,9`"""
    try:
        if ".." in text:
            low, high = (int(v) for v in text.split("..", 1))
            return list(range(low, high + 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"bad range {text!r}") from None


def parse_box(texts: Sequence[str], dim: Optional[int]) -> List[tuple]:
    box = []
    for text in texts:
        parts = [p for p in text.split(",") if p.strip()]
        if len(parts) != 2:
            raise UsageError(f"box side must be LO,HI, got {text!r}")
        box.append((parse_rational(parts[0]), parse_rational(parts[1])))
    if dim and len(box) == 1:
        box = box * dim
    if dim and len(box) != dim:
        raise UsageError(f"--dim {dim} does not match {len(box)} box sides")
    return box


def _require(args, *names: str):
    missing = [f"--{name}" for name in names if getattr(args, name) in (None, [])]
    if missing:
        raise UsageError(f"{args.command} needs {', '.join(missing)} (flag or config key)")


def shift_values(text: str, count: int) -> List[int]:
    """t_n for n = 1..count; a single constant is repeated"""
    descriptor = parse_descriptor(text)
    values = descriptor.first(count)
    if descriptor.finite and len(values) == 1:
        return values * count
    if len(values) < count:
        raise UsageError(f"shift set {text!r} has only {len(values)} terms")
    return values


def cmd_orbit(args) -> int:
    _require(args, "g", "set")
    spec = load_spec(args.spec, args.allow_degree_k)
    g = parse_vector(args.g)
    base = parse_vector(args.base) if args.base else None
    exponents = IntegerSet.parse(args.set, args.N)
    table = orbit(spec, g, exponents, base)
    ReportWriter(args.output, args.format).write_table(table.to_frame())
    status(f"✅ {len(table)} orbit points on {spec.name}")
    return EXIT_OK


def cmd_nice_census(args) -> int:
    spec = load_spec(args.spec, args.allow_degree_k)
    N_values = parse_range(args.N)
    E = IntegerSet.parse(args.set, max(N_values))
    table = growth_experiment(
        spec, E, N_values, args.M, args.eps, args.res,
        threads=args.threads, check_stability=args.stability, show_progress=args.verbose,
    )
    ReportWriter(args.output, args.format).write_table(table)
    status(f"✅ census of {len(table)} prefix lengths on {spec.name}")
    return EXIT_OK


def cmd_separate(args) -> int:
    writer = ReportWriter(args.output, args.format)
    options = dict(
        d_max=args.dmax, denominator_budget=args.den, random_budget=args.random, seed=args.seed,
    )
    if args.T:
        result = nonrecurrence_witness(args.T, truncation=args.truncation, min_gap=args.min_gap,
                                       use_residues=not args.no_residues, threads=args.threads,
                                       show_progress=args.verbose, **options)
        writer.write_json(result.to_dict())
        status("✅ witness found" if isinstance(result, SeparationCertificate) else "⚠️  no witness found")
        return EXIT_OK
    if not (args.A and args.B):
        raise UsageError("separate needs --A and --B (or --T)")

    A = IntegerSet.parse(args.A, args.truncation)
    B = IntegerSet.parse(args.B, args.truncation)
    common = common_elements(A.elements, B.elements)
    if common:
        raise SetsNotDisjoint(common)

    if args.curve:
        table = separation_curve(args.A, args.B, parse_range(args.curve),
                                 use_residues=not args.no_residues, threads=args.threads, **options)
        writer.write_table(table)
        status(f"✅ separation curve over {len(table)} truncations")
        return EXIT_OK
    if args.g:
        spec = load_spec(args.spec, args.allow_degree_k)
        base = parse_vector(args.base) if args.base else None
        report = is_nilrotation_separated(spec, parse_vector(args.g), A, B, base)
        writer.write_json(report.to_dict())
        status(f"✅ nilrotation gap {report.to_dict()['gap']}")
        return EXIT_OK

    result = find_separating_rotation(A, B, min_gap=args.min_gap, use_residues=not args.no_residues,
                                      threads=args.threads, show_progress=args.verbose, **options)
    writer.write_json(result.to_dict())
    status("✅ separated" if isinstance(result, SeparationCertificate) else "⚠️  no separating rotation found")
    return EXIT_OK


def cmd_i0(args) -> int:
    r = IntegerSet.parse(args.r, args.N)
    report: Dict[str, Any] = {}
    exit_code = EXIT_OK

    if args.t:
        t = shift_values(args.t, args.N)
        pairs = [(a, a + b) for a, b in zip(r.elements, t)]
        if args.alpha:
            alpha = parse_vector(args.alpha)
            eps = parse_rational(args.eps) if args.eps else None
        else:
            witness = nonrecurrence_witness(IntegerSet.of(t), d_max=args.dmax, denominator_budget=args.den)
            if not isinstance(witness, SeparationCertificate):
                report["witness"] = witness.to_dict()
                ReportWriter(args.output, args.format).write_json(report)
                status("❌ no non-recurrence witness for the shifts")
                return EXIT_FAILED
            alpha, eps = list(witness.rotation.alpha), witness.gap
            report["witness"] = witness.to_dict()
        if eps is None:
            raise UsageError("--eps is required with --alpha")
        partition = i0_partition(pairs, alpha, eps)
        verification = verify_i0_partition(partition)
        report["partition"] = partition.to_dict()
        report["verification"] = verification.to_dict()
        if not verification.passed:
            exit_code = EXIT_FAILED
        if args.square_lift:
            report["square_lift"] = square_lift(pairs).to_dict()

    if args.sum_with:
        sums = sum_with_finite(r, parse_range(args.sum_with), d_max=args.dmax, denominator_budget=args.den)
        report["sum_with_finite"] = sums.to_dict()
        if not sums.all_certified:
            exit_code = EXIT_FAILED
    if not report:
        raise UsageError("i0 needs --t and/or --sum-with")

    ReportWriter(args.output, args.format).write_json(report)
    status("✅ all checks passed" if exit_code == EXIT_OK else "❌ verification failed")
    return exit_code


def cmd_regions(args) -> int:
    writer = ReportWriter(args.output, args.format)
    if args.set:
        spec = load_spec(args.spec, args.allow_degree_k)
        R = IntegerSet.parse(args.set, args.N)
        census = separability_equation_census(spec, R, args.M, args.eps, args.res, args.guard_eq,
                                              args.min_cells, show_progress=args.verbose)
    else:
        if not args.poly:
            raise UsageError("regions needs --poly (repeatable) or --set")
        box = parse_box(args.box or ["-1,1"], args.dim)
        if args.exact1d:
            variables = default_variables(1)
            census = count_regions_1d([Polynomial.parse(p, variables) for p in args.poly], box[0])
        else:
            arrangement = Arrangement.from_texts(args.poly, box, args.degree_bound)
            counter = stable_census if args.stable else count_regions_grid
            census = counter(arrangement, args.res, args.guard, args.min_cells)
    document = census.to_dict()
    writer.write_json(document)
    status(f"✅ {census.region_count} regions ({census.method})")
    return EXIT_FAILED if census.stable is False else EXIT_OK


def cmd_classify(args) -> int:
    _require(args, "set")
    rows = [classify(IntegerSet.parse(text, args.N), tag=text, lacunary_threshold=args.threshold,
                     slope_threshold=args.slope_threshold) for text in args.set]
    ReportWriter(args.output, args.format).write_table(pd.DataFrame(rows))
    status(f"✅ classified {len(rows)} sets")
    return EXIT_OK


def cmd_nilseq(args) -> int:
    _require(args, "g", "frequency")
    spec = load_spec(args.spec, args.allow_degree_k)
    g = parse_vector(args.g)
    base = parse_vector(args.base) if args.base else None
    frequency = tuple(int(w) for w in args.frequency.split(","))
    F = FunctionDescriptor(frequency)
    rows = []
    for n in parse_range(args.n):
        value = nilsequence_eval(spec, g, base, F, n)
        rows.append({
            "n": n,
            "phase": format_rational(nilsequence_phase(spec, g, base, F, n)),
            "real": f"{value.real:.12f}",
            "imag": f"{value.imag:.12f}",
        })
    ReportWriter(args.output, args.format).write_table(pd.DataFrame(rows, columns=["n", "phase", "real", "imag"]))
    status(f"✅ {len(rows)} nilsequence values")
    return EXIT_OK


COMMANDS = {
    "orbit": cmd_orbit,
    "nice-census": cmd_nice_census,
    "separate": cmd_separate,
    "i0": cmd_i0,
    "regions": cmd_regions,
    "classify": cmd_classify,
    "nilseq": cmd_nilseq,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Flat key = value file; keys mirror the long flags, flags win")
    common.add_argument("--output", help="Output path or fsspec URL (default: stdout)")
    common.add_argument("--format", choices=["csv", "json", "parquet"], help="Report format")
    common.add_argument("--seed", type=int, default=0, help="Seed for randomized search order (default: 0)")
    common.add_argument("--threads", type=int, default=1, help="Worker processes (default: 1)")
    common.add_argument("--allow-degree-k", action="store_true",
                        help="Accept structure polynomials of total degree k (block degree still < k)")
    common.add_argument("--verbose", action="store_true", help="Enable verbose INFO output and progress bars")
    common.add_argument("--debug", action="store_true", help="Enable debug logging for troubleshooting")
    common.add_argument("--log-file", default=DEFAULT_LOG_FILE, help=f"Log file (default: {DEFAULT_LOG_FILE})")

    parser = argparse.ArgumentParser(description="Exact experiments on nilmanifold orbits and interpolation sets")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("orbit", parents=[common], help="Orbit table of g^a, a in a set")
    p.add_argument("--spec", default="heisenberg", help="Registered spec id or spec file (default: heisenberg)")
    p.add_argument("--g", help="Group element, comma-separated rationals")
    p.add_argument("--base", help="Base point x (default: identity)")
    p.add_argument("--set", help="Exponent set descriptor, e.g. squares or 1..8")
    p.add_argument("--N", type=int, default=20, help="Number of terms (default: 20)")

    p = sub.add_parser("nice-census", parents=[common], help="Realized R-nice sets against N")
    p.add_argument("--spec", default="heisenberg")
    p.add_argument("--set", default="squares")
    p.add_argument("--N", default="4..12", help="Prefix lengths, e.g. 4..12 (default: 4..12)")
    p.add_argument("--M", default="1", help="Parameter box half-width (default: 1)")
    p.add_argument("--eps", default="1/4", help="Separation scale (default: 1/4)")
    p.add_argument("--res", type=int, default=21, help="Grid points per axis (default: 21)")
    p.add_argument("--stability", action="store_true", help="Rerun at resolution 2r-1 and report agreement")

    p = sub.add_parser("separate", parents=[common], help="Separation certificates")
    p.add_argument("--A", help="First set descriptor")
    p.add_argument("--B", help="Second set descriptor")
    p.add_argument("--T", help="Find a non-recurrence witness for this set instead")
    p.add_argument("--truncation", type=int, default=20, help="Terms per set (default: 20)")
    p.add_argument("--dmax", type=int, default=1, help="Largest torus dimension (default: 1)")
    p.add_argument("--den", type=int, default=64, help="Denominator budget (default: 64)")
    p.add_argument("--random", type=int, default=0, help="Random refinements after the scan (default: 0)")
    p.add_argument("--min-gap", default="1/16", help="Smallest gap accepted from truncated sets (default: 1/16)")
    p.add_argument("--no-residues", action="store_true", help="Ignore closed-form residue data")
    p.add_argument("--curve", help="Report the best gap at these truncations, e.g. 4,8,12,16")
    p.add_argument("--spec", default="heisenberg", help="Spec for --g nilrotation checks")
    p.add_argument("--g", help="Check this nilrotation instead of searching torus rotations")
    p.add_argument("--base")

    p = sub.add_parser("i0", parents=[common], help="I0 partition and its verification")
    p.add_argument("--r", default="pow2", help="Lacunary set r_n (default: pow2)")
    p.add_argument("--t", help="Shift sequence t_n, e.g. 2n-1")
    p.add_argument("--N", type=int, default=15, help="Number of pairs (default: 15)")
    p.add_argument("--alpha", help="Rotation, comma-separated rationals (default: searched)")
    p.add_argument("--eps", help="Witness scale, required with --alpha")
    p.add_argument("--dmax", type=int, default=1)
    p.add_argument("--den", type=int, default=64)
    p.add_argument("--square-lift", action="store_true", help="Also report the squared pairs")
    p.add_argument("--sum-with", help="Finite set F for E + F, e.g. 0,1,2,3")

    p = sub.add_parser("regions", parents=[common], help="Region census of an arrangement")
    p.add_argument("--poly", action="append", help="Polynomial as coeff:monomial terms (repeatable)")
    p.add_argument("--box", action="append", help="Box side LO,HI (repeatable; use --box=-3,3)")
    p.add_argument("--dim", type=int, help="Dimension when a single box side is repeated")
    p.add_argument("--degree-bound", type=int, default=0)
    p.add_argument("--res", type=int, default=601, help="Grid points per axis (default: 601)")
    p.add_argument("--guard", default="1/1000", help="Boundary guard (default: 1/1000)")
    p.add_argument("--min-cells", type=int, default=1, help="Smallest component counted (default: 1)")
    p.add_argument("--stable", action="store_true", help="Recheck at 2r-1 and guard/2")
    p.add_argument("--exact1d", action="store_true", help="Exact univariate count by root isolation")
    p.add_argument("--spec", default="heisenberg", help="Spec for separability-equation censuses")
    p.add_argument("--set", help="Count regions of d(g^a, g^b) = eps for a, b in this set")
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--M", default="1")
    p.add_argument("--eps", default="1/4")
    p.add_argument("--guard-eq", default="0", help="Boundary guard for separability equations (default: 0)")

    p = sub.add_parser("classify", parents=[common], help="Lacunary / sublacunary verdicts")
    p.add_argument("--set", action="append", help="Set descriptor (repeatable)")
    p.add_argument("--N", type=int, default=200, help="Prefix length (default: 200)")
    p.add_argument("--threshold", default="5/4", help="Lacunary ratio threshold (default: 5/4)")
    p.add_argument("--slope-threshold", default="1/10", help="Sublacunary slope threshold (default: 1/10)")

    p = sub.add_parser("nilseq", parents=[common], help="Basic nilsequence values")
    p.add_argument("--spec", default="heisenberg")
    p.add_argument("--g", help="Group element, comma-separated rationals")
    p.add_argument("--base")
    p.add_argument("--frequency", help="Integer character, comma-separated")
    p.add_argument("--n", default="1..20", help="Exponents (default: 1..20)")

    parser.subparsers = sub
    return parser


def parse_arguments(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        subparser = parser.subparsers.choices[args.command]
        subparser.set_defaults(**_coerce_config(subparser, load_config(args.config)))
        args = parser.parse_args(argv)
    return args


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main function"""
    try:
        args = parse_arguments(argv)
    except SystemExit as e:
        return int(e.code or 0)
    except (NilError, OSError) as e:
        status(f"❌ {e}")
        return EXIT_USAGE

    setup_logging(args.verbose, args.debug, args.log_file)
    logger.info(f"running {args.command}")
    try:
        return COMMANDS[args.command](args)
    except NilError as e:
        logger.error(f"{args.command} failed: {e}")
        status(f"❌ {e}")
        return EXIT_USAGE
    except KeyboardInterrupt:
        status("\nInterrupted by user")
        return EXIT_FAILED
    except Exception as e:
        logger.exception(f"{args.command} crashed")
        status(f"❌ {args.command} failed: {e}")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
