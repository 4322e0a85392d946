"""Two-qubit exchange model and its symmetry-based block decomposition.

The system is a pair of spin-1/2 qubits with anisotropic exchange coupling
and longitudinal drive fields (natural units, hbar = 1 everywhere):

    H(t) = w1(t) s1z + w2(t) s2z + gx s1x s2x + gy s1y s2y + gz s1z s2z

in the ordered product basis {|++>, |+->, |-+>, |-->}.  Because s1z*s2z
commutes with H at all times, the dynamics splits into two independent
two-level problems ("sectors"):

    plus  sector, span{|++>, |-->}:  H+ = W+(t) sz + (gx - gy) sx + gz
    minus sector, span{|+->, |-+>}:  H- = W-(t) sz + (gx + gy) sx - gz

with W±(t) = w1(t) ± w2(t).  Everything downstream (propagation,
transition probabilities, concurrence) is built on this decomposition.

Optional non-Hermitian decay models irreversible loss from the up state of
each spin: H -> H - (i/2) diag(xi1 + xi2, xi1, xi2, 0), which leaves |-->
dark and makes the evolution norm non-increasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidInputError

#: Ordered two-qubit basis used for every 4x4 matrix and amplitude vector.
BASIS_LABELS = ("++", "+-", "-+", "--")

#: Constant of motion s1z*s2z in the ordered basis.
SIGMA1Z_SIGMA2Z = np.diag([1.0, -1.0, -1.0, 1.0])


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise InvalidInputError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class CouplingTensor:
    """Exchange couplings (gx, gy, gz) in energy units (hbar = 1).

    The sector couplings are derived, never stored:
    ``gamma_plus = gamma_x - gamma_y`` and ``gamma_minus = gamma_x + gamma_y``.
    """

    gamma_x: float
    gamma_y: float
    gamma_z: float = 0.0

    def __post_init__(self):
        _require_finite("coupling", self.gamma_x, self.gamma_y, self.gamma_z)

    @property
    def gamma_plus(self) -> float:
        return self.gamma_x - self.gamma_y

    @property
    def gamma_minus(self) -> float:
        return self.gamma_x + self.gamma_y


@dataclass(frozen=True)
class DecayRates:
    """Irreversible decay rates of the up state of spin 1 and spin 2."""

    xi_1: float = 0.0
    xi_2: float = 0.0

    def __post_init__(self):
        _require_finite("decay rate", self.xi_1, self.xi_2)
        if self.xi_1 < 0 or self.xi_2 < 0:
            raise InvalidInputError("decay rates must be non-negative")

    def sector_diagonal(self, sector: str) -> tuple[float, float]:
        """Decay rates attached to the two basis states of a sector.

        Plus sector: (xi1 + xi2, 0) on (|++>, |-->); minus sector:
        (xi1, xi2) on (|+->, |-+>).  The block Hamiltonian acquires
        ``-i rate / 2`` on the corresponding diagonal entry.
        """
        if sector == "plus":
            return (self.xi_1 + self.xi_2, 0.0)
        if sector == "minus":
            return (self.xi_1, self.xi_2)
        raise InvalidInputError(f"unknown sector {sector!r}")


# --------------------------------------------------------------------------
# Field protocols (closed tagged union)
# --------------------------------------------------------------------------

class FieldProtocol:
    """Base class for the longitudinal drive protocols w1(t), w2(t).

    Arbitrary user functions are deliberately not accepted; free-form
    protocols enter through :class:`Tabulated` (linear interpolation), which
    keeps scenario files reproducible.
    """

    #: True when time is naturally measured in the dimensionless ramp
    #: variable tau = sqrt(alpha) * t.
    is_ramp = False

    def evaluate(self, t: float) -> tuple[float, float]:
        """Return (w1, w2) at time ``t`` (noise-free / mean part)."""
        raise NotImplementedError


@dataclass(frozen=True)
class Ramp(FieldProtocol):
    """Linear sweep w(t) = alpha*t/2 applied to one spin or shared.

    ``applied_to = "spin1"`` gives w1 = alpha*t/2, w2 = 0 (and symmetrically
    for "spin2"); ``"both_homogeneous"`` gives w1 = w2 = alpha*t/4, so the
    plus sector always sees W+ = alpha*t/2 while the minus sector sees
    either the same ramp or zero.
    """

    alpha: float
    applied_to: str = "spin1"

    is_ramp = True

    def __post_init__(self):
        _require_finite("ramp slope", self.alpha)
        if self.alpha <= 0:
            raise InvalidInputError("ramp slope alpha must be positive")
        if self.applied_to not in ("spin1", "spin2", "both_homogeneous"):
            raise InvalidInputError(f"unknown ramp target {self.applied_to!r}")

    def evaluate(self, t: float) -> tuple[float, float]:
        if self.applied_to == "spin1":
            return (0.5 * self.alpha * t, 0.0)
        if self.applied_to == "spin2":
            return (0.0, 0.5 * self.alpha * t)
        return (0.25 * self.alpha * t, 0.25 * self.alpha * t)


@dataclass(frozen=True)
class Constant(FieldProtocol):
    """Static longitudinal fields (w1, w2)."""

    omega1: float
    omega2: float = 0.0

    def __post_init__(self):
        _require_finite("constant field", self.omega1, self.omega2)

    def evaluate(self, t: float) -> tuple[float, float]:
        return (self.omega1, self.omega2)


@dataclass(frozen=True)
class Oscillating(FieldProtocol):
    """Oscillating field on spin 1: w1(t) = amplitude * cos(frequency * t)."""

    amplitude: float
    frequency: float

    def __post_init__(self):
        _require_finite("oscillating field", self.amplitude, self.frequency)

    def evaluate(self, t: float) -> tuple[float, float]:
        return (self.amplitude * math.cos(self.frequency * t), 0.0)


@dataclass(frozen=True)
class NoisyRamp(FieldProtocol):
    """Linear sweep plus white noise eta(t), <eta(t) eta(t')> = 2 G d(t-t').

    ``applied_to = "both_homogeneous"`` means w1 = w2 = [alpha*t + eta]/4;
    ``"spin1"`` means w1 = [alpha*t + eta]/2, w2 = 0.  ``evaluate`` returns
    the noise-free mean; realizations are drawn in :mod:`lmszpair.openquantum`
    from ``(seed, realization_index)`` so ensembles are reproducible.
    """

    alpha: float
    noise_strength_G: float
    seed: int = 0
    applied_to: str = "both_homogeneous"

    is_ramp = True

    def __post_init__(self):
        _require_finite("noisy ramp", self.alpha, self.noise_strength_G)
        if self.alpha <= 0:
            raise InvalidInputError("ramp slope alpha must be positive")
        if self.noise_strength_G < 0:
            raise InvalidInputError("noise strength G must be non-negative")
        if self.applied_to not in ("spin1", "both_homogeneous"):
            raise InvalidInputError(f"unknown noisy-ramp target {self.applied_to!r}")

    def evaluate(self, t: float) -> tuple[float, float]:
        if self.applied_to == "spin1":
            return (0.5 * self.alpha * t, 0.0)
        return (0.25 * self.alpha * t, 0.25 * self.alpha * t)


@dataclass(frozen=True)
class Tabulated(FieldProtocol):
    """Sampled fields with linear interpolation between nodes.

    Times must be strictly increasing; evaluation outside the tabulated
    range holds the edge values.
    """

    times: tuple[float, ...]
    omega1_values: tuple[float, ...]
    omega2_values: tuple[float, ...]

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        w1 = np.asarray(self.omega1_values, dtype=float)
        w2 = np.asarray(self.omega2_values, dtype=float)
        if t.ndim != 1 or len(t) < 2:
            raise InvalidInputError("tabulated protocol needs at least two samples")
        if len(w1) != len(t) or len(w2) != len(t):
            raise InvalidInputError("tabulated arrays must have equal length")
        if not np.all(np.diff(t) > 0):
            raise InvalidInputError("tabulated times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(w1)) and np.all(np.isfinite(w2))):
            raise InvalidInputError("tabulated samples must be finite")

    def evaluate(self, t: float) -> tuple[float, float]:
        return (
            float(np.interp(t, self.times, self.omega1_values)),
            float(np.interp(t, self.times, self.omega2_values)),
        )


# --------------------------------------------------------------------------
# Effective two-level blocks
# --------------------------------------------------------------------------

#: Basis labels spanning each invariant sector, in block order.
SECTOR_BASIS = {"plus": ("++", "--"), "minus": ("+-", "-+")}
#: Indices of the sector basis states inside the 4-amplitude vector.
SECTOR_INDICES = {"plus": (0, 3), "minus": (1, 2)}


@dataclass(frozen=True)
class EffectiveBlock:
    """One invariant-subspace two-level problem.

    ``H_block(t) = Omega(t) sz + gamma_block sx + energy_shift * identity``
    with Omega(t) = w1(t) + w2(t) (plus sector) or w1(t) - w2(t) (minus).
    """

    sector: str
    gamma_block: float
    energy_shift: float
    field: FieldProtocol
    basis_labels: tuple[str, str] = field(init=False)

    def __post_init__(self):
        if self.sector not in SECTOR_BASIS:
            raise InvalidInputError(f"unknown sector {self.sector!r}")
        object.__setattr__(self, "basis_labels", SECTOR_BASIS[self.sector])

    @property
    def sign(self) -> int:
        """+1 for the plus sector, -1 for the minus sector."""
        return 1 if self.sector == "plus" else -1

    def Omega(self, t: float) -> float:
        w1, w2 = self.field.evaluate(t)
        out = w1 + self.sign * w2
        if not math.isfinite(out):
            raise InvalidInputError(f"field evaluation not finite at t = {t}")
        return out


def block_decompose(coupling: CouplingTensor, fields: FieldProtocol) -> tuple[EffectiveBlock, EffectiveBlock]:
    """Split the two-qubit problem into its plus and minus sector blocks."""
    plus = EffectiveBlock(
        sector="plus",
        gamma_block=coupling.gamma_plus,
        energy_shift=coupling.gamma_z,
        field=fields,
    )
    minus = EffectiveBlock(
        sector="minus",
        gamma_block=coupling.gamma_minus,
        energy_shift=-coupling.gamma_z,
        field=fields,
    )
    return plus, minus


# --------------------------------------------------------------------------
# 4x4 Hamiltonian and propagator assembly
# --------------------------------------------------------------------------

def build_hamiltonian(
    coupling: CouplingTensor,
    fields: FieldProtocol,
    t: float,
    decay: Optional[DecayRates] = None,
) -> np.ndarray:
    """Return H(t) as a 4x4 complex matrix in the ordered basis.

    Entries connecting the two s1z*s2z sectors are exactly zero by
    construction; the matrix is Hermitian when ``decay`` is absent.
    """
    _require_finite("time", t)
    w1, w2 = fields.evaluate(t)
    if not (math.isfinite(w1) and math.isfinite(w2)):
        raise InvalidInputError(f"field evaluation not finite at t = {t}")
    gx, gy, gz = coupling.gamma_x, coupling.gamma_y, coupling.gamma_z
    gp, gm = coupling.gamma_plus, coupling.gamma_minus

    h = np.zeros((4, 4), dtype=complex)
    h[0, 0] = w1 + w2 + gz
    h[1, 1] = w1 - w2 - gz
    h[2, 2] = -w1 + w2 - gz
    h[3, 3] = -w1 - w2 + gz
    h[0, 3] = h[3, 0] = gp
    h[1, 2] = h[2, 1] = gm

    if decay is not None:
        h = h - 0.5j * np.diag([decay.xi_1 + decay.xi_2, decay.xi_1, decay.xi_2, 0.0])
    return h


def check_symmetry(h: np.ndarray, tol: float = 1e-12) -> tuple[bool, float]:
    """Check [H, s1z*s2z] = 0; returns (ok, max commutator entry)."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (4, 4):
        raise InvalidInputError("expected a 4x4 matrix")
    comm = h @ SIGMA1Z_SIGMA2Z - SIGMA1Z_SIGMA2Z @ h
    residual = float(np.max(np.abs(comm)))
    return residual <= tol, residual


def assemble_propagator(u_plus, u_minus, gamma_z: float, t: float) -> np.ndarray:
    """Embed two block propagators into the 4x4 evolution operator.

    ``u_plus`` and ``u_minus`` are :class:`~lmszpair.propagation.BlockPropagator`
    samples taken at the same time ``t``.  The sector blocks are placed as

        [[a+, 0,   0,   b+ ],
         [0,  a-,  b-,  0  ],
         [0, -b-*, a-*, 0  ],
         [-b+*, 0, 0,   a+*]]  (before the gamma_z phases)

    and each block carries the analytic phase exp(-/+ i gamma_z (t - tau_i)),
    so that the assembled operator is exactly the identity at t = tau_i.
    ``gamma_z`` and ``t`` must be expressed in the same units as the block
    propagators (dimensionless for ramp runs).
    """
    _require_finite("time", t)
    _require_finite("gamma_z", gamma_z)
    for u in (u_plus, u_minus):
        if not math.isclose(u.tau, t, rel_tol=0.0, abs_tol=1e-9 * max(1.0, abs(t))):
            raise InvalidInputError(
                f"block propagator evaluated at tau = {u.tau}, expected t = {t}"
            )
    if not math.isclose(u_plus.tau_i, u_minus.tau_i, rel_tol=0.0, abs_tol=1e-12):
        raise InvalidInputError("block propagators must share the initial time")

    # The scalar phase multiplies the whole block, conjugated entries included.
    phase_p = np.exp(-1j * gamma_z * (t - u_plus.tau_i))
    phase_m = np.exp(+1j * gamma_z * (t - u_minus.tau_i))

    u = np.zeros((4, 4), dtype=complex)
    u[0, 0] = phase_p * u_plus.a
    u[0, 3] = phase_p * u_plus.b
    u[3, 0] = -phase_p * np.conj(u_plus.b)
    u[3, 3] = phase_p * np.conj(u_plus.a)
    u[1, 1] = phase_m * u_minus.a
    u[1, 2] = phase_m * u_minus.b
    u[2, 1] = -phase_m * np.conj(u_minus.b)
    u[2, 2] = phase_m * np.conj(u_minus.a)
    return u
