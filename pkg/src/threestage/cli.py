"""Command-line front end.

Subcommands: run (one protocol round), sweep (grid evaluation to csv/json),
verify (closed form vs oracle campaign), commutators (damping-operator
diagnostics), message (bit-sequence transmission). All angles are radians
unless --degrees is given. Payloads go to stdout as JSON or CSV; diagnostics
and the run manifest go to stderr. Exit codes: 0 success, 1 I/O failure,
2 usage error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import channels, fidelity, harness, protocol
from ._version import __version__
from .channels import NoiseKind
from .fidelity import QuadratureSpec
from .harness import RunManifest, SweepMode, SweepSpec

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_VERIFY = 3

_NOISE_CHOICES = ("ad", "pd", "cd", "cr", "none")
_ANGLE_KINDS = (NoiseKind.COLLECTIVE_DEPHASING, NoiseKind.COLLECTIVE_ROTATION)

# Default sweep grids: 101 uniform points over the parameter's natural range.
_DEFAULT_PARAM_GRIDS = {
    NoiseKind.AMPLITUDE_DAMPING: (0.0, 1.0),
    NoiseKind.PHASE_DAMPING: (0.0, 1.0),
    NoiseKind.COLLECTIVE_DEPHASING: (0.0, 2.0 * np.pi),
    NoiseKind.COLLECTIVE_ROTATION: (0.0, 2.0 * np.pi),
}


class UsageError(ValueError):
    """Bad flag value; the message names the offending flag."""


def _angle(value: float, args, flag: str) -> float:
    if not np.isfinite(value):
        raise UsageError(f"{flag}: must be finite, got {value!r}")
    return float(np.deg2rad(value)) if args.degrees else float(value)


def _noise_kind(args) -> NoiseKind:
    return NoiseKind(args.noise)


def _channel_param(kind: NoiseKind, args) -> float:
    param = args.param
    if kind in _ANGLE_KINDS:
        param = _angle(param, args, "--param")
    return param


def _channel_from_args(args) -> channels.QuantumChannel:
    kind = _noise_kind(args)
    try:
        return channels.from_kind(kind, _channel_param(kind, args))
    except ValueError as exc:
        raise UsageError(f"--param: {exc}") from exc


def _parse_grid(text: str, flag: str) -> tuple[float, ...]:
    try:
        if ":" in text:
            lo_raw, hi_raw, count_raw = text.split(":")
            lo, hi, count = float(lo_raw), float(hi_raw), int(count_raw)
            if count < 1:
                raise ValueError
            values = np.linspace(lo, hi, count)
        else:
            values = np.array([float(token) for token in text.split(",")])
    except ValueError:
        raise UsageError(
            f"{flag}: expected 'lo:hi:n' or comma-separated numbers, got {text!r}"
        ) from None
    return tuple(float(v) for v in values)


def _emit_manifest(
    start: float,
    seed: int | None = None,
    rotation_points: int | None = None,
    xi_points: int | None = None,
    max_abs_deviation: float | None = None,
) -> None:
    manifest = RunManifest(
        version=__version__,
        seed=seed,
        rotation_points=rotation_points,
        xi_points=xi_points,
        duration_ms=(time.perf_counter() - start) * 1000.0,
        max_abs_deviation=max_abs_deviation,
    )
    print(json.dumps({"manifest": manifest.to_dict()}), file=sys.stderr)


def _matrix_json(matrix) -> list:
    return [
        [[float(entry.real), float(entry.imag)] for entry in row]
        for row in np.asarray(matrix, dtype=complex)
    ]


def _status(passed: bool) -> str:
    text = "PASS" if passed else "FAIL"
    if sys.stderr.isatty() and not os.environ.get("NO_COLOR"):
        return f"\x1b[{'32' if passed else '31'}m{text}\x1b[0m"
    return text


def _protocol_config(args) -> protocol.ProtocolConfig:
    return protocol.ProtocolConfig(
        xi=_angle(args.xi, args, "--xi"),
        alice_angle=_angle(args.alice_angle, args, "--alice-angle"),
        bob_angle=_angle(args.bob_angle, args, "--bob-angle"),
        channel=_channel_from_args(args),
    )


def _cmd_run(args, start: float) -> int:
    config = _protocol_config(args)
    final, _ = protocol.run_protocol(config, args.bit)
    p0, p1 = protocol.decode_bit(final, config.xi)
    value = p0 if args.bit == 0 else p1
    print(json.dumps({"fidelity": value, "p0": p0, "p1": p1}))
    _emit_manifest(start)
    return EXIT_OK


def _cmd_sweep(args, start: float) -> int:
    kind = _noise_kind(args)
    if args.grid is not None:
        grid = _parse_grid(args.grid, "--grid")
        if kind in _ANGLE_KINDS and args.degrees:
            grid = tuple(float(np.deg2rad(v)) for v in grid)
    else:
        lo, hi = _DEFAULT_PARAM_GRIDS.get(kind, (0.0, 1.0))
        grid = tuple(float(v) for v in np.linspace(lo, hi, 101))
    xi_grid: tuple[float, ...] = ()
    if args.xi_grid is not None:
        xi_grid = tuple(
            _angle(v, args, "--xi-grid") for v in _parse_grid(args.xi_grid, "--xi-grid")
        )
    if not xi_grid and not args.xi_avg:
        raise UsageError("--xi-grid: required unless --xi-avg is given")
    try:
        spec = SweepSpec(
            kind=kind,
            param_grid=grid,
            xi_grid=xi_grid,
            include_state_average=args.xi_avg,
            mode=SweepMode(args.mode),
            quadrature=QuadratureSpec(
                rotation_points=args.rotation_points, xi_points=args.xi_points
            ),
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(_spec_error_to_flag(str(exc))) from exc
    rows, manifest = harness.sweep(spec)
    harness.export(rows, args.format, args.out, manifest)
    _emit_manifest(
        start,
        seed=spec.seed,
        rotation_points=spec.quadrature.rotation_points,
        xi_points=spec.quadrature.xi_points,
        max_abs_deviation=manifest.max_abs_deviation,
    )
    return EXIT_OK


_SPEC_FIELD_FLAGS = {
    "param_grid": "--grid",
    "xi_grid": "--xi-grid",
    "kind": "--noise",
    "rotation_points": "--rotation-points",
    "xi_points": "--xi-points",
}


def _spec_error_to_flag(message: str) -> str:
    for field, flag in _SPEC_FIELD_FLAGS.items():
        if message.startswith(field):
            return flag + message[len(field):]
        if message.startswith(flag):
            return message
    return message


def _cmd_verify(args, start: float) -> int:
    kinds = []
    for token in args.kinds.split(","):
        token = token.strip()
        try:
            kind = NoiseKind(token)
        except ValueError:
            raise UsageError(f"--kinds: unknown noise kind {token!r}") from None
        if kind is NoiseKind.IDENTITY:
            raise UsageError("--kinds: 'none' has no closed form to verify")
        kinds.append(kind)
    try:
        quad = QuadratureSpec(rotation_points=args.resolution, xi_points=args.xi_points)
    except ValueError as exc:
        message = str(exc)
        message = message.replace("rotation_points", "--resolution")
        message = message.replace("xi_points", "--xi-points")
        raise UsageError(message) from exc
    reports = harness.verify_formulas(kinds, quad=quad)
    entries = []
    all_passed = True
    for report in reports:
        passed = report.max_abs_deviation <= args.tolerance
        all_passed = all_passed and passed
        entries.append(
            {
                "kind": report.kind.value,
                "max_abs_deviation": report.max_abs_deviation,
                "worst_param": report.worst_point[0],
                "worst_xi": report.worst_point[1],
                "passed": passed,
            }
        )
        print(
            f"{report.kind.value}: max deviation {report.max_abs_deviation:.3e} "
            f"at (param={report.worst_point[0]:.6g}, xi={report.worst_point[1]:.6g}), "
            f"tolerance {args.tolerance:.3e}: {_status(passed)}",
            file=sys.stderr,
        )
    print(json.dumps({"tolerance": args.tolerance, "passed": all_passed, "reports": entries}))
    worst = max((r.max_abs_deviation for r in reports), default=None)
    _emit_manifest(
        start,
        rotation_points=quad.rotation_points,
        xi_points=quad.xi_points,
        max_abs_deviation=worst,
    )
    return EXIT_OK if all_passed else EXIT_VERIFY


def _cmd_commutators(args, start: float) -> int:
    if not 0.0 <= args.eta <= 1.0:
        raise UsageError(f"--eta: must lie in [0, 1], got {args.eta!r}")
    theta = _angle(args.theta, args, "--theta")
    entries = []
    for index in (0, 1):
        computed = fidelity.commutator_defect(index, args.eta, theta)
        expected = fidelity.commutator_closed_form(index, args.eta, theta)
        entries.append(
            {
                "kraus_index": index,
                "commutator": _matrix_json(computed),
                "closed_form_residual": float(np.max(np.abs(computed - expected))),
            }
        )
    print(json.dumps({"eta": args.eta, "theta": theta, "commutators": entries}))
    _emit_manifest(start)
    return EXIT_OK


def _cmd_message(args, start: float) -> int:
    if not args.bits or any(c not in "01" for c in args.bits):
        raise UsageError(f"--bits: must be a nonempty string of 0s and 1s, got {args.bits!r}")
    if args.seed < 0:
        raise UsageError(f"--seed: must be non-negative, got {args.seed}")
    config = _protocol_config(args)
    bits = [int(c) for c in args.bits]
    decoded, qber = protocol.transmit_message(bits, config, args.seed)
    print(json.dumps({"decoded": "".join(str(b) for b in decoded), "qber": qber}))
    _emit_manifest(start, seed=args.seed)
    return EXIT_OK


def _add_protocol_flags(sub) -> None:
    sub.add_argument("--noise", required=True, choices=_NOISE_CHOICES)
    sub.add_argument("--param", type=float, default=0.0,
                     help="noise parameter: eta in [0,1] for ad/pd, angle Phi/Theta for cd/cr")
    sub.add_argument("--xi", type=float, default=0.0, help="encoding basis angle")
    sub.add_argument("--alice-angle", type=float, default=0.0)
    sub.add_argument("--bob-angle", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="threestage",
        description="Three-stage protocol simulator and fidelity analysis.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="run one protocol round")
    _add_protocol_flags(run)
    run.add_argument("--bit", type=int, choices=(0, 1), default=0)
    run.add_argument("--degrees", action="store_true", help="interpret angles as degrees")
    run.set_defaults(handler=_cmd_run)

    sweep = subparsers.add_parser("sweep", help="evaluate fidelity over a grid")
    sweep.add_argument("--noise", required=True, choices=_NOISE_CHOICES)
    sweep.add_argument("--grid", help="parameter grid, 'lo:hi:n' or comma list "
                                      "(default: 101 points over the natural range)")
    sweep.add_argument("--xi-grid", help="encoding angles, 'lo:hi:n' or comma list")
    sweep.add_argument("--xi-avg", action="store_true",
                       help="add a state-averaged row per parameter")
    sweep.add_argument("--mode", choices=[m.value for m in SweepMode],
                       default=SweepMode.CLOSED_FORM.value)
    sweep.add_argument("--out", required=True, help="output file path")
    sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--rotation-points", type=int, default=256)
    sweep.add_argument("--xi-points", type=int, default=1024)
    sweep.add_argument("--degrees", action="store_true")
    sweep.set_defaults(handler=_cmd_sweep)

    verify = subparsers.add_parser("verify", help="closed form vs oracle campaign")
    verify.add_argument("--kinds", default="ad,pd,cd,cr",
                        help="comma-separated subset of ad,pd,cd,cr")
    verify.add_argument("--tolerance", type=float, default=1e-6)
    verify.add_argument("--resolution", type=int, default=256,
                        help="rotation-average quadrature points per axis")
    verify.add_argument("--xi-points", type=int, default=1024)
    verify.set_defaults(handler=_cmd_verify)

    comm = subparsers.add_parser("commutators",
                                 help="damping Kraus operators vs rotation commutators")
    comm.add_argument("--eta", type=float, required=True)
    comm.add_argument("--theta", type=float, required=True)
    comm.add_argument("--degrees", action="store_true")
    comm.set_defaults(handler=_cmd_commutators)

    message = subparsers.add_parser("message", help="transmit a bit string")
    _add_protocol_flags(message)
    message.add_argument("--bits", required=True, help="message as a 0/1 string")
    message.add_argument("--seed", type=int, default=0)
    message.add_argument("--degrees", action="store_true")
    message.set_defaults(handler=_cmd_message)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    start = time.perf_counter()
    try:
        return args.handler(args, start)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry_point() -> None:
    sys.exit(main())
