"""Command-line front end.

Exit codes: 0 when the command completed (whatever the mathematical verdict),
1 for input errors, 2 for numerical failures.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from affdyn.construct import construct_example
from affdyn.normal_form import EmptyFamilyError, NonCommutingError, NormalFormError
from affdyn.orbits import coverage_report, simulate_orbit
from affdyn.pipeline import analyze_hypercyclicity, refute_k_transitivity
from affdyn.serialize import dumps
from affdyn.specfile import SemigroupSpec, SpecError, load_spec

__all__ = ["main", "run", "construct_example"]

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


def _box(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}") from None
    if not lo < hi:
        raise argparse.ArgumentTypeError("box needs lo < hi")
    return lo, hi


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="affdyn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, spec=True):
        if spec:
            p.add_argument("spec", type=Path, help="semigroup spec (JSON)")
        p.add_argument("--budget", type=int, help="maximum total word length")
        p.add_argument("--box", type=_box, help="window per real coordinate, e.g. -1,1")
        p.add_argument("--epsilon", type=float, help="grid pitch and hit radius")
        p.add_argument("--seed", type=int, help="64-bit seed for random choices")
        p.add_argument("--out", type=Path, help="output path (default: stdout)")

    a = sub.add_parser("analyze", help="normal form, generators and density verdict")
    common(a)
    a.add_argument("--mode", choices=("exact", "float"), help="arithmetic for the density test")
    a.add_argument("--relation-bound", type=int, default=10**6)
    a.add_argument("--simulate", action="store_true", help="add orbit coverage from w0")

    s = sub.add_parser("simulate", help="orbit CSV plus coverage report")
    common(s)
    s.add_argument("--strategy", choices=("lattice", "random"), default="lattice")
    s.add_argument("--samples", type=int, default=10_000)

    r = sub.add_parser("refute", help="k-fold orbit coverage over random tuples")
    common(r)
    r.add_argument("--k", type=int, default=2)
    r.add_argument("--trials", type=int, default=20)
    r.add_argument("--threshold", type=float, default=0.5)

    c = sub.add_parser("construct-example", help="emit a certified n+1 generator spec")
    common(c, spec=False)
    c.add_argument("--n", type=int, default=1)
    return parser


def _settings(args, spec: SemigroupSpec | None):
    def pick(name, default):
        v = getattr(args, name, None)
        if v is not None:
            return v
        return getattr(spec, name) if spec is not None else default

    return pick("budget", 100), pick("box", (-1.0, 1.0)), pick("epsilon", 0.05), pick("seed", 0)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        spec = load_spec(args.spec) if getattr(args, "spec", None) is not None else None
        budget, box, eps, seed = _settings(args, spec)
        if budget < 0 or eps <= 0:
            raise SpecError("budget must be >= 0 and epsilon > 0")
        if args.command == "analyze":
            mode = args.mode or spec.arithmetic
            report = analyze_hypercyclicity(
                spec.generators, mode=mode, relation_bound=args.relation_bound,
                simulate=args.simulate, budget=budget, box=box, epsilon=eps,
                points=[spec.base_point] if spec.base_point is not None else None,
            )
            _emit(dumps(report), args.out)
        elif args.command == "simulate":
            x = spec.base_point if spec.base_point is not None else np.zeros(spec.n)
            sample = simulate_orbit(spec.generators, x, budget, args.strategy, args.samples, seed)
            rep = coverage_report(sample, box, eps)
            payload = {"words": len(sample), "escaped": int(sample.escaped.sum()),
                       "strategy": sample.strategy, "seed": sample.seed, **rep.to_json()}
            if args.out is None:
                sys.stdout.write(sample.to_csv())
                sys.stderr.write(dumps(payload))
            else:
                args.out.write_text(sample.to_csv())
                args.out.with_suffix(".coverage.json").write_text(dumps(payload))
        elif args.command == "refute":
            report = refute_k_transitivity(
                spec.generators, args.k, args.trials, budget, box, eps, seed, args.threshold,
                one_fold_point=spec.base_point,
            )
            _emit(dumps(report), args.out)
        else:
            example = construct_example(args.n, seed if args.seed is not None else 0)
            _emit(example.dumps(), args.out)
    except (SpecError, NonCommutingError, EmptyFamilyError, FileNotFoundError, ValueError, TypeError) as exc:
        print(f"affdyn: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NormalFormError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"affdyn: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(run())
