"""Command-line front end.

Usage::

    weakvalues amplitudes --setup golden/generic_d2.json
    weakvalues weakvalue  --psi "1,0;1,0" --phi "1,0;-0.9,0" --B 0.5,-0.5
    weakvalues meanshift  --setup golden/aav.json [--quad]
    weakvalues sweep      --setup golden/aav.json --widths 10,100,1000 --format csv
    weakvalues sample     --setup golden/aav.json -n 100000 --seed 7
    weakvalues solve      --B 0.5,-0.5 --Z 100 --psi "0.7071,0;0.7071,0"
    weakvalues scenario   threebox --format json

Exit codes: 0 success, 2 validation error, 3 forbidden transition or regime
error, 4 numerical error.  Errors go to stderr as ``code:<name> <message>``.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import core, scenarios
from .core import HermitianOperator, Observable, PureState
from .document import SCHEMA, SetupDocument, dumps, load_setup, write_csv
from .errors import (
    ForbiddenTransition,
    NumericalError,
    RegimeError,
    ValidationError,
    WeakValueError,
)
from .pointer import mean_pointer_shift, mean_pointer_shift_quadrature, sweep_width
from .sampling import empirical_stats, sample_pointer
from .solver import TargetProblem, near_orthogonal_amplification, solve_postselection, verify_target

__all__ = ["main", "run", "build_parser"]

EXIT_OK, EXIT_VALIDATION, EXIT_FORBIDDEN, EXIT_NUMERICAL = 0, 2, 3, 4
DEFAULT_WIDTHS = tuple(10.0**k for k in range(-3, 5))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _floats(text: str, flag: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"field {flag}: expected comma-separated numbers, got {text!r}") from None


def _complex(text: str, flag: str) -> complex:
    parts = _floats(text, flag)
    if len(parts) == 1:
        return complex(parts[0], 0.0)
    if len(parts) == 2:
        return complex(parts[0], parts[1])
    raise ValidationError(f"field {flag}: expected 're' or 're,im', got {text!r}")


def _complex_list(text: str, flag: str) -> np.ndarray:
    return np.array([_complex(p, flag) for p in text.split(";") if p.strip()])


def _state(text: str, flag: str) -> PureState:
    try:
        return PureState(_complex_list(text, flag))
    except ValidationError as exc:
        raise ValidationError(f"field {flag}: {exc}") from None


def _hamiltonian(text: str) -> HermitianOperator | None:
    if text.strip() == "zero":
        return None
    rows = [_complex_list(r, "--H") for r in text.split("|")]
    if len({r.size for r in rows}) != 1:
        raise ValidationError("field --H: rows have different lengths")
    try:
        return HermitianOperator(np.array(rows))
    except ValidationError as exc:
        raise ValidationError(f"field --H: {exc}") from None


def _document(args) -> SetupDocument:
    doc = load_setup(args.setup) if args.setup else None
    changes = {}
    if args.psi is not None:
        changes["psi"] = _state(args.psi, "--psi")
    if args.phi is not None:
        changes["phi"] = _state(args.phi, "--phi")
    if args.amplitudes is not None:
        changes["amplitudes"] = core.PathSet(_complex_list(args.amplitudes, "--amplitudes"))
    if args.H is not None:
        changes["hamiltonian"] = _hamiltonian(args.H)
    if args.time is not None:
        changes["time"] = args.time
    if args.tau is not None:
        changes["tau"] = args.tau
    if args.B is not None:
        changes["observable"] = Observable(_floats(args.B, "--B"))
    if args.width is not None:
        if not args.width > 0:
            raise ValidationError("field --width: must be positive")
        changes["width"] = args.width
    if args.coupling is not None:
        changes["coupling"] = args.coupling
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ValidationError("field --seed: expected an unsigned 64-bit integer")
        changes["seed"] = args.seed
    if doc is None:
        dims = [x.d for k, x in changes.items() if k in ("psi", "phi", "amplitudes")]
        dims += [changes["observable"].d] if "observable" in changes else []
        if not dims:
            raise ValidationError("no setup given: use --setup or inline --psi/--phi/--amplitudes")
        doc = SetupDocument(dimension=dims[0])
    if "amplitudes" in changes:
        changes.setdefault("psi", None)
        changes.setdefault("phi", None)
    elif "psi" in changes or "phi" in changes:
        changes["amplitudes"] = None
    doc = replace(doc, **changes)
    for name in ("psi", "phi", "amplitudes", "hamiltonian", "observable"):
        x = getattr(doc, name)
        if x is not None and x.d != doc.dimension:
            raise ValidationError(f"field {name}: dimension {x.d} does not match {doc.dimension}")
    return doc


def _envelope(command: str, doc: SetupDocument | None, **body) -> dict:
    out = {"schema": SCHEMA, "command": command}
    if doc is not None:
        out["setup"] = doc.to_obj()
    out.update(body)
    return out


def cmd_amplitudes(args):
    doc = _document(args)
    paths = doc.paths()
    try:
        omega = core.path_probabilities(paths)
    except ForbiddenTransition:
        omega = [None] * paths.d
    try:
        alpha = core.relative_amplitudes(paths)
    except ForbiddenTransition:
        alpha = [None] * paths.d
    rows = [
        {"index": i + 1, "amplitude": complex(a), "probability": w, "relative_amplitude": r}
        for i, (a, w, r) in enumerate(zip(paths.amplitudes, omega, alpha))
    ]
    if args.format == "csv":
        return write_csv(
            ["index", "amplitude_re", "amplitude_im", "probability", "relative_re", "relative_im"],
            [
                [r["index"], float(r["amplitude"].real), float(r["amplitude"].imag),
                 None if r["probability"] is None else float(r["probability"]),
                 None if r["relative_amplitude"] is None else float(r["relative_amplitude"].real),
                 None if r["relative_amplitude"] is None else float(r["relative_amplitude"].imag)]
                for r in rows
            ],
        )
    body = {"paths": rows, "total": paths.total}
    if doc.amplitudes is None:
        psi, phi = doc.require_states()
        body["transition_amplitude"] = core.transition_amplitude(psi, phi, doc.h, doc.time)
    return dumps(_envelope("amplitudes", doc, **body))


def cmd_weakvalue(args):
    doc = _document(args)
    paths, obs = doc.paths(), doc.require_observable()
    wv = core.weak_value_of_paths(paths, obs)
    body = {
        "weak_value": wv,
        "strong_mean": core.strong_mean(paths, obs),
        "relative_amplitudes": core.relative_amplitudes(paths),
        "probabilities": core.path_probabilities(paths),
    }
    return dumps(_envelope("weakvalue", doc, **body))


def cmd_meanshift(args):
    doc = _document(args)
    setup = doc.measurement()
    stats = (mean_pointer_shift_quadrature if args.quad else mean_pointer_shift)(setup)
    body = {"norm": stats.norm, "mean_shift": stats.mean_shift, "method": stats.method}
    if stats.diagnostics:
        body["diagnostics"] = stats.diagnostics
    return dumps(_envelope("meanshift", doc, **body))


def cmd_sweep(args):
    doc = _document(args)
    widths = _floats(args.widths, "--widths") if args.widths else DEFAULT_WIDTHS
    sweep = sweep_width(doc.measurement(), widths, quadrature=args.quad)
    header = ["width", "mean_shift", "norm", "strong_error", "weak_error"]
    table = [[getattr(r, k) for k in header] for r in sweep.rows]
    if args.format == "csv":
        return write_csv(header, table)
    body = {
        "method": "quadrature" if args.quad else "closed_form",
        "strong_limit": sweep.strong_limit,
        "weak_limit": sweep.weak_limit,
        "weak_slope": sweep.weak_slope(),
        "rows": [dict(zip(header, row)) for row in table],
    }
    return dumps(_envelope("sweep", doc, **body))


def cmd_sample(args):
    doc = _document(args)
    batch = sample_pointer(doc.measurement(), args.n, doc.seed, workers=args.workers)
    if args.format == "csv":
        return write_csv(["index", "reading"], [[i, float(x)] for i, x in enumerate(batch.readings)])
    summary = empirical_stats(batch, classify=args.classify) if batch.n >= 2 else None
    body = {"n": batch.n, "seed": batch.seed}
    if summary is not None:
        body["summary"] = {
            "mean": summary.mean,
            "std_error": summary.std_error,
            "n": summary.n,
            "outcome_counts": None if summary.outcome_counts is None else [
                {"eigenvalue": k, "count": v} for k, v in summary.outcome_counts.items()
            ],
        }
    body["analytic_mean"] = mean_pointer_shift(batch.setup).mean_shift
    if not args.no_readings:
        body["readings"] = batch.readings
    return dumps(_envelope("sample", doc, **body))


def cmd_solve(args):
    if args.psi is None or args.B is None:
        raise ValidationError("solve needs --psi and --B")
    psi = _state(args.psi, "--psi")
    obs = Observable(_floats(args.B, "--B"))
    if (args.Z is None) == (args.epsilon is None):
        raise ValidationError("solve needs exactly one of --Z or --epsilon")
    if args.Z is not None:
        target = _complex(args.Z, "--Z")
        phi = solve_postselection(TargetProblem(psi.coeffs, obs.eigenvalues, target))
    else:
        phi, target = near_orthogonal_amplification(psi, obs, args.epsilon)
    residual = verify_target(psi, phi, obs, target)
    doc = SetupDocument(dimension=psi.d, psi=psi, phi=phi, observable=obs)
    body = {
        "target": target,
        "phi": phi.coeffs,
        "weak_value": core.weak_value(psi, phi, doc.h, 0.0, obs),
        "residual": residual,
        "overlap": abs(np.vdot(phi.coeffs, psi.coeffs)),
    }
    return dumps(_envelope("solve", doc, **body))


def cmd_scenario(args):
    name = args.name
    if name == "threebox":
        rep = scenarios.three_box(quadrature=args.quad)
    elif name == "aav":
        seed = scenarios.DEFAULT_SEED if args.seed is None else args.seed
        rep = scenarios.aav_spin(seed=seed, quadrature=args.quad)
    else:
        rep = scenarios.route_number()
    if args.format == "csv":
        raise ValidationError("scenario reports are JSON only")
    return dumps(_envelope("scenario", None, report=rep.to_dict()))


def _common(p: argparse.ArgumentParser):
    p.add_argument("--setup", help="JSON setup document")
    p.add_argument("--psi", help="initial state, 're,im;re,im;...'")
    p.add_argument("--phi", help="final state, 're,im;re,im;...'")
    p.add_argument("--amplitudes", help="path amplitudes instead of states")
    p.add_argument("--H", help="'zero' or rows 're,im;...|re,im;...'")
    p.add_argument("--time", type=float)
    p.add_argument("--tau", type=float, help="insertion time (default time/2)")
    p.add_argument("--B", help="observable eigenvalues, comma-separated")
    p.add_argument("--width", type=float)
    p.add_argument("--coupling", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--quad", action="store_true", help="use the quadrature route for mean shifts")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weakvalues", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    handlers = {
        "amplitudes": cmd_amplitudes,
        "weakvalue": cmd_weakvalue,
        "meanshift": cmd_meanshift,
        "sweep": cmd_sweep,
        "sample": cmd_sample,
        "solve": cmd_solve,
        "scenario": cmd_scenario,
    }
    for name, handler in handlers.items():
        p = sub.add_parser(name)
        _common(p)
        p.set_defaults(handler=handler)
        if name == "sweep":
            p.add_argument("--widths", help="ascending comma-separated widths")
        elif name == "sample":
            p.add_argument("-n", type=int, default=10_000)
            p.add_argument("--workers", type=int, default=1)
            p.add_argument("--classify", action="store_true", help="count strong-regime outcomes")
            p.add_argument("--no-readings", action="store_true")
        elif name == "solve":
            p.add_argument("--Z", help="target weak value, 're' or 're,im'")
            p.add_argument("--epsilon", type=float, help="near-orthogonal construction instead of --Z")
        elif name == "scenario":
            p.add_argument("name", choices=("threebox", "aav", "route"))
    return parser


def _exit_code(exc: WeakValueError) -> int:
    if isinstance(exc, (ForbiddenTransition, RegimeError)):
        return EXIT_FORBIDDEN
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    return EXIT_VALIDATION


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        text = args.handler(args)
    except WeakValueError as exc:
        print(f"code:{exc.code} {exc}", file=stderr)
        return _exit_code(exc)
    stdout.write(text if text.endswith("\n") else text + "\n")
    return EXIT_OK


def main():
    sys.exit(run())
