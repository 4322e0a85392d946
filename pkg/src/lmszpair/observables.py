"""Transition probabilities, concurrence and the named sweep scenarios.

Concurrence of a pure two-qubit state is 2 |c_pp c_mm - c_pm c_mp|; for a
sweep started in |--> it collapses to 2 |a| |b| of the plus block, peaking
at 1 when the sweep slope is tuned to transfer probability 1/2 (the
entanglement-optimal adiabaticity parameter is log(2) / 2 pi).

Scenario names
--------------
``collective_mm`` / ``collective_mp``
    Sweep from |--> (plus sector) or |-+> (minus sector).
``nonlocal_control_A``
    Sweep applied to spin 1 with spin 2 prepared transversally:
    |+> x (|+> + |->)/sqrt(2).  Anisotropic coupling flips spin 1 only;
    isotropic coupling instead transfers the transverse state to spin 1.
``nonlocal_control_B``
    The mirrored preparation ((|+> + |->)/sqrt(2)) x |+>, where the sweep
    on spin 1 controls spin 2 through the coupling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .model import CouplingTensor, Ramp
from .propagation import (
    DEFAULT_TOLERANCE,
    TwoQubitState,
    TwoQubitTrajectory,
    Window,
    energy_scale,
    lmsz_probability,
    propagate_two_qubit,
    tail_average,
)
from .specfun import exact_amplitudes_grid

_SQRT_HALF = math.sqrt(0.5)

SCENARIO_INITIAL_STATES = {
    "collective_mm": TwoQubitState.from_amplitudes([0, 0, 0, 1]),
    "collective_mp": TwoQubitState.from_amplitudes([0, 0, 1, 0]),
    "nonlocal_control_A": TwoQubitState.from_amplitudes([_SQRT_HALF, _SQRT_HALF, 0, 0]),
    "nonlocal_control_B": TwoQubitState.from_amplitudes([_SQRT_HALF, 0, _SQRT_HALF, 0]),
}


def concurrence(state: TwoQubitState) -> float:
    """Pure-state concurrence 2 |c_pp c_mm - c_pm c_mp|, clamped to [0, 1].

    The state must be normalized (open-system states are renormalized by
    the caller, explicitly).
    """
    deficit = abs(state.norm - 1.0)
    if deficit > 1e-6:
        raise InvalidInputError(
            f"concurrence requires a normalized state (norm deviates by {deficit:.3g}); "
            "renormalize open-system states explicitly"
        )
    value = 2.0 * abs(state.c_pp * state.c_mm - state.c_pm * state.c_mp)
    return min(1.0, max(0.0, value))


def asymptotic_concurrence(beta: float, sector: str = "plus") -> float:
    """Ideal-window asymptotic concurrence 2 sqrt(P (1 - P)), P = 1 - e^(-2 pi beta).

    Applies to a sweep started in |--> (plus sector, beta = beta_plus) or
    |-+> (minus sector, beta = beta_minus); maximal at beta = log(2)/(2 pi).
    """
    if sector not in ("plus", "minus"):
        raise InvalidInputError(f"unknown sector {sector!r}")
    if not (math.isfinite(beta) and beta >= 0.0):
        raise InvalidInputError(f"beta must be non-negative, got {beta}")
    p = 1.0 - math.exp(-2.0 * math.pi * beta)
    return 2.0 * math.sqrt(p * (1.0 - p))


@dataclass(frozen=True)
class ConcurrenceCurve:
    """Concurrence samples over a window plus the tail-averaged value."""

    taus: np.ndarray
    values: np.ndarray
    asymptotic_value: float

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.size and (np.min(v) < -1e-12 or np.max(v) > 1.0 + 1e-12):
            raise InvalidInputError("concurrence values must lie in [0, 1]")


@dataclass(frozen=True)
class ScenarioSpec:
    """A named sweep scenario: initial state fixed by name, ramp on spin 1."""

    name: str
    coupling: CouplingTensor
    alpha: float
    window: Window

    def __post_init__(self):
        if self.name not in SCENARIO_INITIAL_STATES:
            raise InvalidInputError(
                f"unknown scenario {self.name!r}; expected one of {sorted(SCENARIO_INITIAL_STATES)}"
            )
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise InvalidInputError("alpha must be positive")

    @property
    def initial_state(self) -> TwoQubitState:
        return SCENARIO_INITIAL_STATES[self.name]

    @property
    def field(self) -> Ramp:
        return Ramp(alpha=self.alpha, applied_to="spin1")

    def beta(self, sector: str) -> float:
        g = self.coupling.gamma_plus if sector == "plus" else self.coupling.gamma_minus
        return g * g / self.alpha


def _exact_block_amplitudes(gamma_block: float, alpha: float, slope_sign: int,
                            taus: np.ndarray, tau_i: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact (a, b) arrays for one sector of a ramp protocol.

    ``slope_sign`` is the sign of the sector field relative to the canonical
    sweep tau/2: +1 for the standard ramp, -1 for the reversed one (sigma_x
    conjugation maps a -> a*, b -> -b*), 0 for a frozen sector (pure
    coupling rotation).  Zero coupling is the trivial diagonal branch.
    """
    beta = gamma_block * gamma_block / alpha
    g_tilde = gamma_block / math.sqrt(alpha)
    rel = taus - tau_i
    if slope_sign == 0:
        return np.cos(g_tilde * rel) + 0j, -1j * np.sin(g_tilde * rel)
    if beta == 0.0:
        phase = np.exp(-0.25j * slope_sign * (taus**2 - tau_i**2))
        return phase, np.zeros_like(phase)
    ab = exact_amplitudes_grid(beta, taus, tau_i)
    if slope_sign < 0:
        return np.conj(ab[:, 0]), -np.conj(ab[:, 1])
    return ab[:, 0], ab[:, 1]


def exact_ramp_trajectory(coupling: CouplingTensor, field: Ramp,
                          initial: TwoQubitState, window: Window) -> TwoQubitTrajectory:
    """Closed-form counterpart of :func:`~lmszpair.propagation.propagate_two_qubit`.

    Valid for pure ramp protocols (any target spin); includes the analytic
    gamma_z sector phases.  The window is in dimensionless time.
    """
    scale = energy_scale(field)
    taus = window.grid
    tau_i = window.tau_i
    rel = taus - tau_i
    gz = coupling.gamma_z / scale

    # sector field signs relative to the canonical tau/2 sweep
    slope_signs = {
        "spin1": (1, 1),
        "spin2": (1, -1),
        "both_homogeneous": (1, 0),
    }[field.applied_to]
    a_p, b_p = _exact_block_amplitudes(coupling.gamma_plus, field.alpha, slope_signs[0], taus, tau_i)
    a_m, b_m = _exact_block_amplitudes(coupling.gamma_minus, field.alpha, slope_signs[1], taus, tau_i)

    out = np.empty((len(taus), 4), dtype=complex)
    phase_p = np.exp(-1j * gz * rel)
    out[:, 0] = phase_p * (a_p * initial.c_pp + b_p * initial.c_mm)
    out[:, 3] = phase_p * (-np.conj(b_p) * initial.c_pp + np.conj(a_p) * initial.c_mm)
    phase_m = np.exp(+1j * gz * rel)
    out[:, 1] = phase_m * (a_m * initial.c_pm + b_m * initial.c_mp)
    out[:, 2] = phase_m * (-np.conj(b_m) * initial.c_pm + np.conj(a_m) * initial.c_mp)
    return TwoQubitTrajectory(taus, out)


def exact_two_qubit_trajectory(scenario: ScenarioSpec) -> TwoQubitTrajectory:
    return exact_ramp_trajectory(scenario.coupling, scenario.field,
                                 scenario.initial_state, scenario.window)


def concurrence_trajectory(scenario: ScenarioSpec, engine: str = "numeric",
                           tolerance: float = DEFAULT_TOLERANCE) -> ConcurrenceCurve:
    """Concurrence over the scenario window, numerically or in closed form."""
    if engine == "numeric":
        traj = propagate_two_qubit(scenario.coupling, scenario.field,
                                   scenario.initial_state, scenario.window, tolerance)
    elif engine == "exact":
        traj = exact_two_qubit_trajectory(scenario)
    else:
        raise InvalidInputError(f"unknown engine {engine!r}")
    amps = traj.amplitudes
    values = 2.0 * np.abs(amps[:, 0] * amps[:, 3] - amps[:, 1] * amps[:, 2])
    values = np.clip(values, 0.0, 1.0)
    asymptotic = tail_average(traj.taus, values)
    return ConcurrenceCurve(taus=traj.taus, values=values, asymptotic_value=asymptotic)


# --------------------------------------------------------------------------
# asymptotic scenario classification
# --------------------------------------------------------------------------

#: Target populations in the ordered basis for each (scenario, isotropy).
_TARGET_POPULATIONS = {
    ("nonlocal_control_A", "anisotropic"): np.array([0.0, 0.0, 0.5, 0.5]),
    ("nonlocal_control_A", "isotropic"): np.array([0.5, 0.0, 0.5, 0.0]),
    ("nonlocal_control_B", "anisotropic"): np.array([0.0, 0.5, 0.0, 0.5]),
    ("nonlocal_control_B", "isotropic"): np.array([0.5, 0.5, 0.0, 0.0]),
}

_FIDELITY_THRESHOLD = 0.9


@dataclass(frozen=True)
class ScenarioReport:
    """Asymptotic outcome of a non-local control scenario."""

    final_state_family: str
    probability: float
    predicted_probability: float
    fidelity: float
    tail_populations: np.ndarray


def _population_fidelity(p: np.ndarray, q: np.ndarray) -> float:
    """Bhattacharyya fidelity between two population vectors."""
    return float(np.sum(np.sqrt(np.maximum(p, 0.0) * np.maximum(q, 0.0))) ** 2)


def scenario_asymptotics(scenario: ScenarioSpec,
                         tolerance: float = DEFAULT_TOLERANCE) -> ScenarioReport:
    """Classify the asymptotic state of a non-local control scenario.

    The measured joint probability is the product of the tail-averaged
    sector transfer probabilities (the sectors evolve independently); the
    prediction is P+ * P- for anisotropic coupling and the single minus
    sector probability when gamma_x = gamma_y freezes the plus sector.
    Classification compares tail-averaged populations with the named target
    families; below fidelity 0.9 the outcome is reported as mixed.
    """
    if scenario.name not in ("nonlocal_control_A", "nonlocal_control_B"):
        raise InvalidInputError("asymptotics are defined for the nonlocal_control scenarios")
    traj = propagate_two_qubit(scenario.coupling, scenario.field,
                               scenario.initial_state, scenario.window, tolerance)
    pops = traj.populations
    tail = np.array([tail_average(traj.taus, pops[:, i]) for i in range(4)])

    isotropic = scenario.coupling.gamma_plus == 0.0
    # Each sector starts with weight 1/2; transfer = flipped population / weight.
    if scenario.name == "nonlocal_control_A":
        plus_transfer = tail[3] / 0.5   # |++> -> |-->
        minus_transfer = tail[2] / 0.5  # |+-> -> |-+>
    else:
        plus_transfer = tail[3] / 0.5
        minus_transfer = tail[1] / 0.5  # |-+> -> |+->

    if isotropic:
        measured = minus_transfer
        predicted = lmsz_probability(scenario.coupling.gamma_minus, scenario.alpha)
    else:
        measured = plus_transfer * minus_transfer
        predicted = (lmsz_probability(scenario.coupling.gamma_plus, scenario.alpha)
                     * lmsz_probability(scenario.coupling.gamma_minus, scenario.alpha))

    candidates = {
        "anisotropic_target": _TARGET_POPULATIONS[(scenario.name, "anisotropic")],
        "isotropic_target": _TARGET_POPULATIONS[(scenario.name, "isotropic")],
        "initial_retained": scenario.initial_state.amplitudes.__abs__() ** 2,
    }
    fidelities = {name: _population_fidelity(tail, q) for name, q in candidates.items()}
    best = max(fidelities, key=fidelities.get)
    if fidelities[best] < _FIDELITY_THRESHOLD:
        best = "mixed outcome"
    return ScenarioReport(
        final_state_family=best,
        probability=float(measured),
        predicted_probability=float(predicted),
        fidelity=float(fidelities[max(fidelities, key=fidelities.get)]),
        tail_populations=tail,
    )
