"""Command-line surface: compose, decompose, classify, eval, cohomology, verify.

All file I/O lives here.  Outputs are deterministic (sorted keys, fixed
indentation); on failure a machine-readable error JSON goes to stderr
and nothing is written, with exit codes 1 (inadmissible data),
2 (window too small), 3 (non-split pencil), 4 (I/O or format error).
"""

from __future__ import annotations

import argparse
import json
import sys

from .corpus import ComposeSpec, compose_functor, corpus_spec
from .errors import (
    DisagreementError,
    EngineError,
    EqualPointsError,
    FieldExhaustedError,
    NoStabilizationError,
    NotAdmissibleError,
    NotContainedError,
    SingularPencilError,
    SplitFailureError,
    WindowMismatchError,
    WindowTooSmallError,
)
from .fields import QQ, field_from_tag
from .functors import (
    evaluate_on_sheaf,
    functor_from_json,
    functor_to_json,
    validate,
)
from .sheaves import CoherentSheaf, h0_dim, h1_dim
from .structure import analyze, is_integral_transform, is_pullback, \
    run_property_suite

_EXIT_CODES = (
    (NotAdmissibleError, 1),
    (DisagreementError, 1),
    (SingularPencilError, 1),
    (FieldExhaustedError, 1),
    (WindowTooSmallError, 2),
    (NoStabilizationError, 2),
    (SplitFailureError, 3),
    (EqualPointsError, 4),
    (NotContainedError, 4),
    (WindowMismatchError, 4),
)


class _CliError(Exception):
    def __init__(self, code, message, exit_code):
        super().__init__(message)
        self.code = code
        self.exit_code = exit_code


def _fail(code, message, exit_code):
    raise _CliError(code, message, exit_code)


def _classify_exception(exc) -> _CliError:
    if isinstance(exc, _CliError):
        return exc
    if isinstance(exc, EngineError):
        for cls, code in _EXIT_CODES:
            if isinstance(exc, cls):
                return _CliError(exc.code, str(exc), code)
        return _CliError(exc.code, str(exc), 1)
    if isinstance(exc, (OSError, json.JSONDecodeError, ValueError, KeyError,
                        TypeError)):
        return _CliError("FORMAT_ERROR", str(exc), 4)
    raise exc


def _dump(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _read_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        _fail("FORMAT_ERROR", f"{path}: {exc}", 4)


def _write_text(path, text):
    # serialize fully before opening so failures never leave partial files
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _load_functor(path):
    data = _read_json(path)
    try:
        return functor_from_json(data)
    except (ValueError, KeyError, TypeError) as exc:
        _fail("FORMAT_ERROR", f"{path}: {exc}", 4)


def _load_spec(path) -> ComposeSpec:
    data = _read_json(path)
    try:
        spec = ComposeSpec.from_json(data)
    except (ValueError, KeyError, TypeError) as exc:
        _fail("FORMAT_ERROR", f"{path}: {exc}", 4)
    bad = spec.violations()
    if bad:
        _fail("FORMAT_ERROR", f"{path}: " + "; ".join(bad), 4)
    return spec


def _load_sheaf(path, field) -> CoherentSheaf:
    data = _read_json(path)
    try:
        return CoherentSheaf.from_json(field, data)
    except (ValueError, KeyError, TypeError) as exc:
        _fail("FORMAT_ERROR", f"{path}: {exc}", 4)


def _report(analysis, properties) -> dict:
    return {
        "torsion": analysis.decomposition.torsion.to_json(),
        "h1": [{"i": int(i), "l": int(l)}
               for i, l in sorted(analysis.decomposition.h1_mults.items())],
        "certificate": {
            "checked": True,
            "window": [analysis.functor.lo, analysis.functor.hi],
        },
        "properties": properties,
    }


def _cmd_compose(args):
    spec = _load_spec(args.spec)
    if args.gauge_seed is not None:
        spec.gauge_seed = args.gauge_seed
    f = compose_functor(spec)
    _write_text(args.output, _dump(functor_to_json(f)))
    return 0


def _cmd_decompose(args):
    f = _load_functor(args.functor)
    analysis = analyze(f)
    properties = run_property_suite(f)
    _write_text(args.output, _dump(_report(analysis, properties)))
    return 0


def _cmd_classify(args):
    f = _load_functor(args.functor)
    integral, _ = is_integral_transform(f, mode="verify")
    point = is_pullback(f, mode="verify")
    print(f"integral_transform: {'yes' if integral else 'no'}")
    print(f"pullback: {point if point is not None else 'none'}")
    return 0


def _cmd_eval(args):
    f = _load_functor(args.functor)
    sheaf = _load_sheaf(args.sheaf, f.field)
    twist = args.twist if args.twist is not None else f.hi
    result = evaluate_on_sheaf(f, sheaf, twist)
    print(result.dim)
    return 0


def _cmd_cohomology(args):
    sheaf = _load_sheaf(args.sheaf, QQ)
    twisted = sheaf.twist(args.twist)
    print(f"h0: {h0_dim(twisted)}")
    print(f"h1: {h1_dim(twisted)}")
    return 0


def _verify_one(f) -> tuple[dict, bool]:
    analysis = analyze(f)
    properties = run_property_suite(f)
    ok = all(e["pass"] for e in properties)
    return _report(analysis, properties), ok


def _cmd_verify(args):
    if args.corpus is not None:
        seed, count = args.corpus
        failures = 0
        for k in range(count):
            spec = corpus_spec(seed, k)
            f = compose_functor(spec)
            try:
                analysis = analyze(f)
                properties = run_property_suite(f)
                round_trip = (analysis.decomposition
                              == spec.expected_decomposition())
                ok = round_trip and all(e["pass"] for e in properties)
            except EngineError as exc:
                print(f"instance {k}: error {exc.code}: {exc}")
                failures += 1
                continue
            if ok:
                print(f"instance {k}: ok")
            else:
                detail = "round trip failed" if not round_trip else \
                    "property suite failed"
                print(f"instance {k}: FAIL ({detail})")
                failures += 1
        print(f"corpus: {count - failures}/{count} passed")
        return 0 if failures == 0 else 1
    f = _load_functor(args.functor)
    report, ok = _verify_one(f)
    sys.stdout.write(_dump(report))
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="p1functors",
        description="exact structure decomposition of graded functor "
                    "windows on the projective line")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compose", help="build a functor file from a spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--gauge-seed", type=int, default=None)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_compose)

    p = sub.add_parser("decompose", help="write the structure report")
    p.add_argument("functor")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("classify", help="integral-transform and pullback verdicts")
    p.add_argument("functor")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("eval", help="dimension of the functor on a sheaf")
    p.add_argument("functor")
    p.add_argument("--sheaf", required=True)
    p.add_argument("--twist", type=int, default=None,
                   help="presentation twist for torsion blocks")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("cohomology", help="h0/h1 of a sheaf file")
    p.add_argument("--sheaf", required=True)
    p.add_argument("--twist", type=int, default=0)
    p.set_defaults(func=_cmd_cohomology)

    p = sub.add_parser("verify", help="run the property suite")
    p.add_argument("functor", nargs="?")
    p.add_argument("--corpus", nargs=2, type=int, metavar=("SEED", "COUNT"),
                   default=None)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify" and args.corpus is None and not args.functor:
        parser.error("verify needs a functor file or --corpus SEED COUNT")
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes below
        err = _classify_exception(exc)
        sys.stderr.write(_dump({"error": err.code, "message": str(err)}))
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
