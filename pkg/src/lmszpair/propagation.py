"""Numerical propagation of the sector blocks and the full 4x4 problem.

This module is the workhorse oracle of the package: every closed-form
result (transition probabilities, exact window amplitudes, concurrence
curves) is checkable against adaptive integration of the Schrodinger
equation done here.

Time conventions
----------------
Ramp-type protocols are integrated in the dimensionless time
tau = sqrt(alpha) * t, in which the plus-sector field is exactly tau/2 and
every energy parameter appears divided by sqrt(alpha) (couplings, gamma_z,
decay rates).  All other protocols are integrated in raw time.  ``Window``
values are always in the integration time variable.

The block propagator pair (a, b) solves

    i d/dtau [[a, b], [-b*, a*]] = (Omega(tau) sz + gamma sx) [[...]]

with the identity at tau_i; the constant +-gamma_z shift of each sector is
a scalar phase exp(-/+ i gamma_z (tau - tau_i)) applied analytically when
two-qubit amplitudes are assembled, never integrated numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import _kernels
from .errors import IntegrationError, InvalidInputError
from .model import (
    Constant,
    CouplingTensor,
    DecayRates,
    EffectiveBlock,
    FieldProtocol,
    NoisyRamp,
    Oscillating,
    Ramp,
    Tabulated,
    block_decompose,
)

_TOL_RANGE = (1e-14, 1e-4)
DEFAULT_TOLERANCE = 1e-10
#: Default number of output samples for uniform windows.
DEFAULT_GRID_POINTS = 2001


@dataclass(frozen=True)
class Window:
    """Finite integration window [tau_i, tau_f] with an output grid.

    The idealized sweep runs over the whole real line; a finite window with
    tau_i < 0 < tau_f truncates it symmetrically enough that tail-averaged
    populations converge to the ideal values as the window grows.
    """

    tau_i: float
    tau_f: float
    output_grid: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if not (math.isfinite(self.tau_i) and math.isfinite(self.tau_f)):
            raise InvalidInputError("window bounds must be finite")
        if not (self.tau_i < 0.0 < self.tau_f):
            raise InvalidInputError(
                f"window must straddle the crossing: tau_i < 0 < tau_f, got "
                f"[{self.tau_i}, {self.tau_f}]"
            )
        grid = np.asarray(self.output_grid, dtype=float)
        if grid.size == 0:
            grid = np.linspace(self.tau_i, self.tau_f, DEFAULT_GRID_POINTS)
            object.__setattr__(self, "output_grid", tuple(grid))
        else:
            if np.any(np.diff(grid) <= 0):
                raise InvalidInputError("output grid must be strictly increasing")
            if grid[0] < self.tau_i - 1e-12 or grid[-1] > self.tau_f + 1e-12:
                raise InvalidInputError("output grid must lie within the window")

    @classmethod
    def uniform(cls, tau_i: float, tau_f: float, n_points: int = DEFAULT_GRID_POINTS) -> "Window":
        if n_points < 2:
            raise InvalidInputError("need at least two grid points")
        return cls(tau_i, tau_f, tuple(np.linspace(tau_i, tau_f, n_points)))

    @classmethod
    def with_dense_tail(cls, tau_i: float, tau_f: float, n_points: int = 1201,
                        tail_fraction: float = 0.1, tail_spacing: float = 0.0025) -> "Window":
        """Uniform grid plus a finely sampled tail for asymptotic averages.

        The populations keep ringing at frequency ~tau near the window edge;
        ``tail_spacing`` resolves those oscillations so the tail average is
        a faithful time average.
        """
        tail_start = tau_f - tail_fraction * (tau_f - tau_i)
        coarse = np.linspace(tau_i, tail_start, n_points, endpoint=False)
        n_tail = max(2, int(round((tau_f - tail_start) / tail_spacing)) + 1)
        tail = np.linspace(tail_start, tau_f, n_tail)
        return cls(tau_i, tau_f, tuple(np.concatenate([coarse, tail])))

    @property
    def grid(self) -> np.ndarray:
        return np.asarray(self.output_grid, dtype=float)


@dataclass(frozen=True)
class BlockPropagator:
    """One sample of the block propagator pair (a, b) at time tau."""

    a: complex
    b: complex
    tau: float
    tau_i: float

    @property
    def norm_deficit(self) -> float:
        """1 - (|a|^2 + |b|^2); zero for Hermitian dynamics."""
        return 1.0 - (abs(self.a) ** 2 + abs(self.b) ** 2)


class BlockTrajectory:
    """Block propagator samples over a window's output grid."""

    def __init__(self, taus: np.ndarray, a: np.ndarray, b: np.ndarray, tau_i: float):
        self.taus = taus
        self.a = a
        self.b = b
        self.tau_i = tau_i

    def __len__(self) -> int:
        return len(self.taus)

    def __getitem__(self, idx: int) -> BlockPropagator:
        return BlockPropagator(complex(self.a[idx]), complex(self.b[idx]),
                               float(self.taus[idx]), self.tau_i)

    @property
    def transfer(self) -> np.ndarray:
        """|b(tau)|^2, the transition probability along the trajectory."""
        return np.abs(self.b) ** 2

    @property
    def norm_deficit(self) -> np.ndarray:
        return 1.0 - (np.abs(self.a) ** 2 + np.abs(self.b) ** 2)


@dataclass(frozen=True)
class TwoQubitState:
    """Amplitudes over the ordered basis {|++>, |+->, |-+>, |-->}."""

    c_pp: complex
    c_pm: complex
    c_mp: complex
    c_mm: complex

    @classmethod
    def from_amplitudes(cls, vec) -> "TwoQubitState":
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (4,):
            raise InvalidInputError("expected four amplitudes")
        return cls(*map(complex, vec))

    @classmethod
    def basis(cls, label: str) -> "TwoQubitState":
        labels = {"++": 0, "+-": 1, "-+": 2, "--": 3}
        if label not in labels:
            raise InvalidInputError(f"unknown basis label {label!r}")
        vec = np.zeros(4, dtype=complex)
        vec[labels[label]] = 1.0
        return cls.from_amplitudes(vec)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([self.c_pp, self.c_pm, self.c_mp, self.c_mm], dtype=complex)

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def require_normalized(self, tol: float = 1e-6) -> None:
        if abs(self.norm - 1.0) > tol:
            raise InvalidInputError(f"state norm deviates from 1 by {abs(self.norm - 1.0):.3g}")


class TwoQubitTrajectory:
    """Amplitude samples of the four-level state over a window grid."""

    def __init__(self, taus: np.ndarray, amplitudes: np.ndarray):
        self.taus = taus
        self.amplitudes = amplitudes  # shape (n, 4)

    def __len__(self) -> int:
        return len(self.taus)

    def state(self, idx: int) -> TwoQubitState:
        return TwoQubitState.from_amplitudes(self.amplitudes[idx])

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def norm(self) -> np.ndarray:
        return np.sum(self.populations, axis=1)


# --------------------------------------------------------------------------
# protocol encoding and scaling
# --------------------------------------------------------------------------

def _field_encoding(fields: FieldProtocol):
    """Map a protocol onto the kernel encoding (kind, fp, ftimes, fw1, fw2).

    Ramp-type protocols are encoded in dimensionless units (slope 1), all
    others verbatim.
    """
    empty = np.empty(0, dtype=float)
    if isinstance(fields, (Ramp, NoisyRamp)):
        kind = {
            "spin1": _kernels.FIELD_RAMP_SPIN1,
            "spin2": _kernels.FIELD_RAMP_SPIN2,
            "both_homogeneous": _kernels.FIELD_RAMP_HOMOG,
        }[fields.applied_to]
        return kind, np.array([1.0, 0.0]), empty, empty, empty
    if isinstance(fields, Constant):
        return _kernels.FIELD_CONSTANT, np.array([fields.omega1, fields.omega2]), empty, empty, empty
    if isinstance(fields, Oscillating):
        return _kernels.FIELD_OSCILLATING, np.array([fields.amplitude, fields.frequency]), empty, empty, empty
    if isinstance(fields, Tabulated):
        return (
            _kernels.FIELD_TABULATED,
            np.array([0.0, 0.0]),
            np.asarray(fields.times, dtype=float),
            np.asarray(fields.omega1_values, dtype=float),
            np.asarray(fields.omega2_values, dtype=float),
        )
    raise InvalidInputError(f"unsupported field protocol {type(fields).__name__}")


def energy_scale(fields: FieldProtocol) -> float:
    """sqrt(alpha) for ramp protocols (tau = sqrt(alpha) t), 1 otherwise."""
    if isinstance(fields, (Ramp, NoisyRamp)):
        return math.sqrt(fields.alpha)
    return 1.0


def _check_tolerance(tolerance: float) -> None:
    if not (_TOL_RANGE[0] <= tolerance <= _TOL_RANGE[1]):
        raise InvalidInputError(
            f"tolerance must lie in [{_TOL_RANGE[0]:g}, {_TOL_RANGE[1]:g}], got {tolerance:g}"
        )


def _run_kernel(fields, dim, hp, y0, window: Window, tolerance: float) -> np.ndarray:
    kind, fp, ftimes, fw1, fw2 = _field_encoding(fields)
    grid = window.grid
    prepend = grid[0] > window.tau_i + 1e-12
    kernel_grid = np.concatenate([[window.tau_i], grid]) if prepend else grid
    status, last_t, out = _kernels.propagate_linear_tdse(
        kind, fp, ftimes, fw1, fw2, dim,
        np.asarray(hp, dtype=float), np.asarray(y0, dtype=complex),
        kernel_grid, tolerance, tolerance * 1e-2,
    )
    if status != _kernels.STATUS_OK:
        reason = "step size underflow" if status == _kernels.STATUS_STEP_UNDERFLOW else "step budget exhausted"
        raise IntegrationError(f"adaptive integration failed: {reason}", last_t)
    return out[1:] if prepend else out


def _decay_pair(decay) -> tuple[float, float]:
    """Normalize the block decay argument to (xi_up, xi_dn)."""
    if decay is None:
        return 0.0, 0.0
    if isinstance(decay, (int, float)):
        if decay < 0:
            raise InvalidInputError("decay rate must be non-negative")
        return float(decay), 0.0
    xi_up, xi_dn = decay
    if xi_up < 0 or xi_dn < 0:
        raise InvalidInputError("decay rates must be non-negative")
    return float(xi_up), float(xi_dn)


# --------------------------------------------------------------------------
# public operations
# --------------------------------------------------------------------------

def propagate_block(block: EffectiveBlock, window: Window,
                    tolerance: float = DEFAULT_TOLERANCE,
                    decay: Union[None, float, tuple[float, float]] = None) -> BlockTrajectory:
    """Integrate one sector block over the window.

    ``decay`` is either a single rate on the block's up state or an
    (up, down) pair; rates are in physical energy units and are rescaled
    together with the couplings for ramp protocols.  The returned
    amplitudes exclude the constant +-gamma_z sector phase (see module
    docstring).
    """
    _check_tolerance(tolerance)
    scale = energy_scale(block.field)
    xi_up, xi_dn = _decay_pair(decay)
    hp = [float(block.sign), block.gamma_block / scale, xi_up / scale, xi_dn / scale]
    out = _run_kernel(block.field, 2, hp, [1.0, 0.0], window, tolerance)
    # columns of U = [[a, b], [-b*, a*]]: first column is (a, -b*)
    a = out[:, 0]
    b = -np.conj(out[:, 1])
    return BlockTrajectory(window.grid, a, b, window.tau_i)


def propagate_two_qubit(coupling: CouplingTensor, fields: FieldProtocol,
                        initial: TwoQubitState, window: Window,
                        tolerance: float = DEFAULT_TOLERANCE,
                        decay: Optional[DecayRates] = None) -> TwoQubitTrajectory:
    """Evolve a two-qubit state by propagating the two sector blocks.

    The (c_pp, c_mm) pair evolves with the plus block and (c_pm, c_mp)
    with the minus block, each completed by the analytic
    exp(-/+ i gamma_z (tau - tau_i)) sector phase.  Agrees with
    :func:`direct_propagate_4x4` to the integration tolerance.
    """
    _check_tolerance(tolerance)
    if decay is None:
        initial.require_normalized()
    scale = energy_scale(fields)
    plus, minus = block_decompose(coupling, fields)
    gz = coupling.gamma_z / scale
    taus = window.grid
    rel = taus - window.tau_i

    xi_p = decay.sector_diagonal("plus") if decay else (0.0, 0.0)
    xi_m = decay.sector_diagonal("minus") if decay else (0.0, 0.0)

    out = np.empty((len(taus), 4), dtype=complex)
    vec_p = [initial.c_pp, initial.c_mm]
    hp_p = [1.0, plus.gamma_block / scale, xi_p[0] / scale, xi_p[1] / scale]
    res_p = _run_kernel(fields, 2, hp_p, vec_p, window, tolerance)
    phase_p = np.exp(-1j * gz * rel)
    out[:, 0] = phase_p * res_p[:, 0]
    out[:, 3] = phase_p * res_p[:, 1]

    vec_m = [initial.c_pm, initial.c_mp]
    hp_m = [-1.0, minus.gamma_block / scale, xi_m[0] / scale, xi_m[1] / scale]
    res_m = _run_kernel(fields, 2, hp_m, vec_m, window, tolerance)
    phase_m = np.exp(+1j * gz * rel)
    out[:, 1] = phase_m * res_m[:, 0]
    out[:, 2] = phase_m * res_m[:, 1]
    return TwoQubitTrajectory(taus, out)


def direct_propagate_4x4(coupling: CouplingTensor, fields: FieldProtocol,
                         initial: TwoQubitState, window: Window,
                         tolerance: float = DEFAULT_TOLERANCE,
                         decay: Optional[DecayRates] = None) -> TwoQubitTrajectory:
    """Independent oracle: integrate the full 4x4 Schrodinger equation.

    No block decomposition is used; this is the cross-check for
    :func:`propagate_two_qubit`.
    """
    _check_tolerance(tolerance)
    if decay is None:
        initial.require_normalized()
    scale = energy_scale(fields)
    hp = [
        coupling.gamma_x / scale,
        coupling.gamma_y / scale,
        coupling.gamma_z / scale,
        (decay.xi_1 / scale) if decay else 0.0,
        (decay.xi_2 / scale) if decay else 0.0,
    ]
    out = _run_kernel(fields, 4, hp, initial.amplitudes, window, tolerance)
    return TwoQubitTrajectory(window.grid, out)


def lmsz_probability(gamma_block: float, alpha: float) -> float:
    """Ideal-window sweep transition probability 1 - exp(-2 pi gamma^2 / alpha)."""
    if not (math.isfinite(alpha) and alpha > 0):
        raise InvalidInputError(f"alpha must be positive, got {alpha}")
    if not math.isfinite(gamma_block):
        raise InvalidInputError("gamma_block must be finite")
    beta = gamma_block * gamma_block / alpha
    return -math.expm1(-2.0 * math.pi * beta)


def tail_average(taus: np.ndarray, values: np.ndarray, fraction: float = 0.1) -> float:
    """Time average of ``values`` over the trailing ``fraction`` of the span.

    Trapezoidal integration over the (possibly non-uniform) grid; the tail
    must contain at least two samples.
    """
    taus = np.asarray(taus, dtype=float)
    values = np.asarray(values, dtype=float)
    if not 0.0 < fraction <= 1.0:
        raise InvalidInputError("fraction must be in (0, 1]")
    t_start = taus[-1] - fraction * (taus[-1] - taus[0])
    mask = taus >= t_start - 1e-12
    if np.count_nonzero(mask) < 2:
        raise InvalidInputError("tail contains fewer than two samples")
    t = taus[mask]
    v = values[mask]
    return float(np.trapezoid(v, t) / (t[-1] - t[0]))


def numeric_lmsz_probability(beta: float, window: Optional[Window] = None,
                             tolerance: float = DEFAULT_TOLERANCE) -> float:
    """Tail-averaged finite-window transfer for a dimensionless sweep.

    Propagates the canonical block (field tau/2, coupling sqrt(beta)) and
    averages |b|^2 over the trailing 10% of the window.  Converges to
    :func:`lmsz_probability` as the window grows.
    """
    if beta < 0 or not math.isfinite(beta):
        raise InvalidInputError(f"beta must be non-negative, got {beta}")
    if window is None:
        window = Window.with_dense_tail(-100.0, 100.0)
    block = EffectiveBlock(sector="plus", gamma_block=math.sqrt(beta),
                           energy_shift=0.0, field=Ramp(alpha=1.0, applied_to="spin1"))
    traj = propagate_block(block, window, tolerance)
    return tail_average(traj.taus, traj.transfer)
