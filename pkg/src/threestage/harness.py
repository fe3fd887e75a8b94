"""Parameter sweeps, formula-vs-oracle verification, and dataset export.

Sweep output is a flat list of rows over the cartesian grid of noise
parameters and encoding angles, in deterministic param-major order, plus an
optional state-averaged row per parameter. CSV re-exports of identical rows
are byte-identical; floats are written in their shortest round-trip form.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import channels, fidelity
from ._version import __version__
from .channels import NoiseKind
from .fidelity import FidelityReport, QuadratureSpec, RotationAveragedOracle

# Serialized stand-in for the state-averaged row's xi field.
XI_AVERAGE = "avg"

CSV_HEADER = "kind,param,xi,closed_form,oracle,deviation"

_SWEEP_KINDS = (
    NoiseKind.AMPLITUDE_DAMPING,
    NoiseKind.PHASE_DAMPING,
    NoiseKind.COLLECTIVE_DEPHASING,
    NoiseKind.COLLECTIVE_ROTATION,
)


class SweepMode(Enum):
    CLOSED_FORM = "closed_form"
    ORACLE = "oracle"
    BOTH = "both"


@dataclass(frozen=True)
class SweepSpec:
    """Grid description for one sweep.

    ``xi_grid`` may be empty when ``include_state_average`` is set, in which
    case each parameter contributes only its state-averaged row.
    """

    kind: NoiseKind
    param_grid: tuple[float, ...]
    xi_grid: tuple[float, ...] = ()
    include_state_average: bool = False
    mode: SweepMode = SweepMode.CLOSED_FORM
    quadrature: QuadratureSpec = QuadratureSpec()
    seed: int = 0

    def __post_init__(self):
        if self.kind not in _SWEEP_KINDS:
            raise ValueError(f"kind: {self.kind!r} is not a sweepable noise kind")
        _check_grid("param_grid", self.param_grid)
        if self.kind in (NoiseKind.AMPLITUDE_DAMPING, NoiseKind.PHASE_DAMPING):
            bad = [p for p in self.param_grid if not 0.0 <= p <= 1.0]
            if bad:
                raise ValueError(
                    f"param_grid: value {bad[0]!r} outside [0, 1] for kind "
                    f"{self.kind.value!r}"
                )
        if self.xi_grid:
            _check_grid("xi_grid", self.xi_grid)
        elif not self.include_state_average:
            raise ValueError("xi_grid: empty grid requires include_state_average")


def _check_grid(name: str, grid) -> None:
    if len(grid) == 0:
        raise ValueError(f"{name}: grid must be nonempty")
    values = np.asarray(grid, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{name}: grid values must be finite")
    if np.any(np.diff(values) <= 0.0):
        raise ValueError(f"{name}: grid must be strictly increasing")


@dataclass(frozen=True)
class ResultRow:
    """One sweep grid point; ``xi`` is None on state-averaged rows."""

    kind: NoiseKind
    param: float
    xi: float | None
    closed_form: float | None
    oracle: float | None
    deviation: float | None


@dataclass(frozen=True)
class RunManifest:
    """Provenance of one harness or CLI run; printed to standard error."""

    version: str
    seed: int | None
    rotation_points: int | None
    xi_points: int | None
    duration_ms: float
    max_abs_deviation: float | None

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "seed": self.seed,
            "rotation_points": self.rotation_points,
            "xi_points": self.xi_points,
            "duration_ms": self.duration_ms,
            "max_abs_deviation": self.max_abs_deviation,
        }


def _make_row(kind, param, xi, closed, oracle) -> ResultRow:
    deviation = None
    if closed is not None and oracle is not None:
        deviation = abs(closed - oracle)
    return ResultRow(
        kind=kind,
        param=float(param),
        xi=None if xi is None else float(xi),
        closed_form=closed,
        oracle=oracle,
        deviation=deviation,
    )


def sweep(spec: SweepSpec) -> tuple[list[ResultRow], RunManifest]:
    """Evaluate the grid and return rows in param-major order plus a manifest.

    Within each parameter block the xi rows come first, then the optional
    state-averaged row.
    """
    start = time.perf_counter()
    want_closed = spec.mode in (SweepMode.CLOSED_FORM, SweepMode.BOTH)
    want_oracle = spec.mode in (SweepMode.ORACLE, SweepMode.BOTH)
    rows: list[ResultRow] = []
    for param in spec.param_grid:
        oracle_eval = None
        if want_oracle:
            channel = channels.from_kind(spec.kind, param)
            oracle_eval = RotationAveragedOracle(channel, spec.quadrature)
            xi_values = oracle_eval.fidelity_at(spec.xi_grid) if spec.xi_grid else ()
        for index, xi in enumerate(spec.xi_grid):
            closed = (
                float(fidelity.closed_form_fidelity(spec.kind, param, xi))
                if want_closed
                else None
            )
            oracle = float(xi_values[index]) if want_oracle else None
            rows.append(_make_row(spec.kind, param, xi, closed, oracle))
        if spec.include_state_average:
            closed = (
                float(fidelity.closed_form_average_fidelity(spec.kind, param))
                if want_closed
                else None
            )
            oracle = oracle_eval.state_average() if want_oracle else None
            rows.append(_make_row(spec.kind, param, None, closed, oracle))
    deviations = [row.deviation for row in rows if row.deviation is not None]
    manifest = RunManifest(
        version=__version__,
        seed=spec.seed,
        rotation_points=spec.quadrature.rotation_points,
        xi_points=spec.quadrature.xi_points,
        duration_ms=(time.perf_counter() - start) * 1000.0,
        max_abs_deviation=max(deviations) if deviations else None,
    )
    return rows, manifest


def default_verification_grids(kind: NoiseKind) -> tuple[np.ndarray, np.ndarray]:
    """Grids the formula-vs-oracle check runs on when none are given.

    Damping parameters cover [0, 1] in steps of 0.05; collective-noise angles
    and the encoding angle cover [0, 2pi] in steps of pi/16.
    """
    angle_grid = np.linspace(0.0, 2.0 * np.pi, 33)
    if kind in (NoiseKind.AMPLITUDE_DAMPING, NoiseKind.PHASE_DAMPING):
        return np.linspace(0.0, 1.0, 21), angle_grid
    return angle_grid, angle_grid


def verify_formulas(
    kinds,
    param_grids=None,
    xi_grid=None,
    quad: QuadratureSpec = QuadratureSpec(),
) -> list[FidelityReport]:
    """Compare each kind's closed form with the rotation-averaged oracle.

    ``param_grids`` optionally maps a kind to its parameter grid; ``xi_grid``
    optionally replaces the default encoding-angle grid. Returns one report
    per kind, in canonical kind order, each carrying the worst grid point.
    """
    reports = []
    for kind in _SWEEP_KINDS:
        if kind not in kinds:
            continue
        params, default_xis = default_verification_grids(kind)
        if param_grids is not None and kind in param_grids:
            params = np.asarray(param_grids[kind], dtype=float)
        xis = default_xis if xi_grid is None else np.asarray(xi_grid, dtype=float)
        closed = np.asarray(
            fidelity.closed_form_fidelity(kind, params[:, None], xis[None, :])
        )
        oracle = np.empty_like(closed)
        for i, param in enumerate(params):
            channel = channels.from_kind(kind, param)
            oracle[i] = RotationAveragedOracle(channel, quad).fidelity_at(xis)
        deviation = np.abs(closed - oracle)
        worst_flat = int(np.argmax(deviation))
        worst_i, worst_j = np.unravel_index(worst_flat, deviation.shape)
        reports.append(
            FidelityReport(
                kind=kind,
                param_grid=tuple(float(p) for p in params),
                xi_grid=tuple(float(x) for x in xis),
                closed_form=closed,
                oracle=oracle,
                max_abs_deviation=float(deviation[worst_i, worst_j]),
                worst_point=(float(params[worst_i]), float(xis[worst_j])),
            )
        )
    return reports


def _float_str(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def _xi_str(xi: float | None) -> str:
    return XI_AVERAGE if xi is None else repr(float(xi))


def _rows_to_csv(rows) -> str:
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(
            ",".join(
                (
                    row.kind.value,
                    _float_str(row.param),
                    _xi_str(row.xi),
                    _float_str(row.closed_form),
                    _float_str(row.oracle),
                    _float_str(row.deviation),
                )
            )
        )
    return "\n".join(lines) + "\n"


def _row_to_dict(row: ResultRow) -> dict:
    return {
        "kind": row.kind.value,
        "param": row.param,
        "xi": XI_AVERAGE if row.xi is None else row.xi,
        "closed_form": row.closed_form,
        "oracle": row.oracle,
        "deviation": row.deviation,
    }


def export(rows, fmt: str, path, manifest: RunManifest | None = None) -> None:
    """Write rows to ``path`` as csv or json.

    The JSON form wraps the rows with the run manifest; CSV is rows only, so
    identical rows re-export byte-identically.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("rows must be nonempty")
    if fmt == "csv":
        payload = _rows_to_csv(rows)
    elif fmt == "json":
        document = {
            "manifest": None if manifest is None else manifest.to_dict(),
            "rows": [_row_to_dict(row) for row in rows],
        }
        payload = json.dumps(document, indent=2) + "\n"
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(payload)


def _parse_optional_float(text: str) -> float | None:
    return None if text == "" else float(text)


def load_rows(path, fmt: str) -> list[ResultRow]:
    """Read rows back from an exported file; inverse of ``export``."""
    rows: list[ResultRow] = []
    if fmt == "csv":
        with open(path, "r", encoding="utf-8", newline="") as handle:
            lines = handle.read().splitlines()
        if not lines or lines[0] != CSV_HEADER:
            raise ValueError(f"{path}: missing expected CSV header")
        for line in lines[1:]:
            kind, param, xi, closed, oracle, deviation = line.split(",")
            rows.append(
                ResultRow(
                    kind=NoiseKind(kind),
                    param=float(param),
                    xi=None if xi == XI_AVERAGE else float(xi),
                    closed_form=_parse_optional_float(closed),
                    oracle=_parse_optional_float(oracle),
                    deviation=_parse_optional_float(deviation),
                )
            )
        return rows
    if fmt == "json":
        with open(path, "r", encoding="utf-8") as handle:
            document = json.load(handle)
        for item in document["rows"]:
            rows.append(
                ResultRow(
                    kind=NoiseKind(item["kind"]),
                    param=float(item["param"]),
                    xi=None if item["xi"] == XI_AVERAGE else float(item["xi"]),
                    closed_form=item["closed_form"],
                    oracle=item["oracle"],
                    deviation=item["deviation"],
                )
            )
        return rows
    raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
