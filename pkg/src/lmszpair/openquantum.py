"""Classical dephasing noise and non-Hermitian decay for the sweep problem.

White noise eta(t) with <eta(t) eta(t')> = 2 G d(t-t') rides on the
longitudinal drive; because it is longitudinal it preserves the sector
structure exactly, so each realization is still two independent 2x2
problems.  Ensembles are propagated with fixed-step piecewise-constant
exponentials (adaptive stepping would alias the noise) and reduced to
mean populations with standard errors.

For strong noise the ensemble-averaged transfer probability saturates at
(1 - exp(-2 pi beta)) / 2: dephasing erases the coherence between the
diabatic states, leaving at most an equal mixture.  With a homogeneous
drive on both spins the minus sector sees no field at all and nothing in
it is swept.

Decay instead enters as -i/2 diag(xi1 + xi2, xi1, xi2, 0): each spin's up
state leaks irreversibly, |--> is dark, and the total norm is
non-increasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import ConfigurationError, InvalidInputError
from .model import CouplingTensor, DecayRates, Ramp
from .propagation import (
    DEFAULT_TOLERANCE,
    TwoQubitState,
    TwoQubitTrajectory,
    Window,
    propagate_two_qubit,
)

#: Default dimensionless step for noisy runs; refined automatically when the
#: per-step dephasing kick would exceed ~0.5 rad.
_DEFAULT_DTAU = 5e-3
_MAX_STEP_KICK_VAR = 0.25  # rad^2, (phase kick std <= 0.5 rad per step)
_CHUNK = 512


@dataclass(frozen=True)
class NoiseSpec:
    """White-noise ensemble description; identical specs give identical ensembles."""

    G: float
    n_realizations: int
    base_seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.G) and self.G >= 0.0):
            raise InvalidInputError("noise strength G must be non-negative")
        if self.n_realizations < 1:
            raise InvalidInputError("need at least one realization")


@dataclass(frozen=True)
class EnsembleResult:
    """Ensemble-averaged final populations with standard errors."""

    mean_populations: np.ndarray
    standard_error: np.ndarray
    n_realizations: int

    def __post_init__(self):
        m = np.asarray(self.mean_populations)
        if np.any(m < -1e-12) or np.any(m > 1.0 + 1e-12):
            raise InvalidInputError("mean populations must lie in [0, 1]")
        if np.any(np.asarray(self.standard_error) < 0):
            raise InvalidInputError("standard errors must be non-negative")


class NoisePath:
    """Piecewise-constant noise realization on a uniform grid.

    ``values[k]`` applies on [times[k], times[k+1]); evaluation outside the
    grid returns 0.
    """

    def __init__(self, times: np.ndarray, values: np.ndarray):
        self.times = times
        self.values = values

    def __call__(self, t: float) -> float:
        if t < self.times[0] or t >= self.times[-1]:
            return 0.0
        idx = min(int((t - self.times[0]) / (self.times[1] - self.times[0])), len(self.values) - 1)
        return float(self.values[idx])


def _realization_rng(base_seed: int, realization_index: int) -> np.random.Generator:
    # counter-based seeding: ensembles are order-independent and parallel-safe
    return np.random.default_rng(np.random.SeedSequence((base_seed, realization_index)))


def sample_noise_path(noise: NoiseSpec, realization_index: int, grid) -> NoisePath:
    """Draw one piecewise-constant realization of the white noise.

    The grid must be uniform; each step holds an independent Gaussian of
    variance 2 G / dt, the standard discretization of delta correlation.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2:
        raise ConfigurationError("noise grid needs at least two points")
    steps = np.diff(grid)
    dt = steps[0]
    if np.any(np.abs(steps - dt) > 1e-9 * max(abs(dt), 1.0)):
        raise ConfigurationError("noise grid must be uniform")
    if realization_index < 0:
        raise InvalidInputError("realization index must be non-negative")
    rng = _realization_rng(noise.base_seed, realization_index)
    sigma = math.sqrt(2.0 * noise.G / dt)
    return NoisePath(grid, rng.normal(0.0, sigma, size=len(grid) - 1))


def _sector_vectors(initial: TwoQubitState) -> dict:
    return {
        "plus": np.array([initial.c_pp, initial.c_mm], dtype=complex),
        "minus": np.array([initial.c_pm, initial.c_mp], dtype=complex),
    }


def run_noisy_lmsz(coupling: CouplingTensor, alpha: float, noise: NoiseSpec,
                   initial: TwoQubitState, window: Window,
                   field_geometry: str = "both_homogeneous",
                   n_steps: Optional[int] = None) -> EnsembleResult:
    """Monte Carlo ensemble of noisy sweeps; returns final-population statistics.

    ``field_geometry = "both_homogeneous"``: w1 = w2 = [alpha t + eta]/4,
    so the plus sector sees the standard sweep plus noise and the minus
    sector is frozen (no field, noise cancels).  ``"spin1_only"``:
    w1 = [alpha t + eta]/2, w2 = 0, both sectors driven identically.
    The window is in dimensionless time tau = sqrt(alpha) t.
    """
    if field_geometry not in ("both_homogeneous", "spin1_only"):
        raise InvalidInputError(f"unknown field geometry {field_geometry!r}")
    if noise.n_realizations < 100:
        raise InvalidInputError("ensemble statistics need n_realizations >= 100")
    if not (math.isfinite(alpha) and alpha > 0):
        raise InvalidInputError("alpha must be positive")
    initial.require_normalized()

    scale = math.sqrt(alpha)
    g_tilde = noise.G / scale  # dimensionless noise strength
    span = window.tau_f - window.tau_i
    if n_steps is None:
        dtau_target = _DEFAULT_DTAU
        if g_tilde > 0:
            dtau_target = min(dtau_target, 0.5 * _MAX_STEP_KICK_VAR / g_tilde)
        n_steps = int(math.ceil(span / dtau_target))
    dtau = span / n_steps
    if g_tilde > 0 and 2.0 * g_tilde * dtau > 4.0 * _MAX_STEP_KICK_VAR:
        raise ConfigurationError(
            f"step {dtau:.3g} too coarse for noise strength (per-step phase kick "
            f"variance {2 * g_tilde * dtau:.3g} rad^2); increase n_steps"
        )

    tau_grid = window.tau_i + dtau * np.arange(n_steps + 1)
    tau_mid = window.tau_i + dtau * (np.arange(n_steps) + 0.5)
    t_grid = tau_grid / scale  # physical times, where the noise correlator lives

    # sector setup: (deterministic midpoint field, noise coupling, coupling)
    sectors = {}
    vecs = _sector_vectors(initial)
    if field_geometry == "both_homogeneous":
        sectors["plus"] = (0.5 * tau_mid, 0.5 / scale, coupling.gamma_plus / scale)
        sectors["minus"] = (np.zeros(n_steps), 0.0, coupling.gamma_minus / scale)
    else:
        sectors["plus"] = (0.5 * tau_mid, 0.5 / scale, coupling.gamma_plus / scale)
        sectors["minus"] = (0.5 * tau_mid, 0.5 / scale, coupling.gamma_minus / scale)

    n = noise.n_realizations
    sum_p = np.zeros(4)
    sum_p2 = np.zeros(4)
    state_cols = {"plus": (0, 3), "minus": (1, 2)}
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        rows = stop - start
        noise_rows = np.empty((rows, n_steps))
        for r in range(rows):
            noise_rows[r] = sample_noise_path(noise, start + r, t_grid).values
        pops = np.zeros((rows, 4))
        for name, (w_det, c_eta, g_block) in sectors.items():
            u0 = vecs[name]
            if np.all(u0 == 0.0):
                continue
            effective = noise_rows if c_eta != 0.0 else np.zeros((rows, n_steps))
            final = _kernels.noisy_block_final(w_det, c_eta, effective, g_block, dtau, u0)
            i, j = state_cols[name]
            pops[:, i] = np.abs(final[:, 0]) ** 2
            pops[:, j] = np.abs(final[:, 1]) ** 2
        sum_p += pops.sum(axis=0)
        sum_p2 += (pops**2).sum(axis=0)

    mean = sum_p / n
    var = np.maximum(sum_p2 / n - mean**2, 0.0) * (n / max(n - 1, 1))
    stderr = np.sqrt(var / n)
    return EnsembleResult(mean_populations=np.clip(mean, 0.0, 1.0),
                          standard_error=stderr, n_realizations=n)


def saturated_transfer_probability(beta: float) -> float:
    """Strong-dephasing plateau of the ensemble-averaged transfer.

    For white longitudinal noise the averaged dynamics obeys a dephasing
    Lindblad equation; once the dephasing rate exceeds the sweep transition
    scale (G / sqrt(alpha) >~ 2) the final transfer saturates at

        (1 - exp(-4 pi beta)) / 2,

    independent of G until the noise bandwidth approaches the window edge
    (finite windows multiply the exponent by (2/pi) atan(tau_f sqrt(alpha)/G)).
    The exponent is twice the coherent one: strong dephasing makes the
    crossing incoherent but leaves the integrated golden-rule rate 2 pi beta
    unchanged, and the incoherent two-level saturation of that rate is
    (1 - exp(-2 * 2 pi beta)) / 2.  Both the Monte Carlo ensemble and the
    Lindblad average reproduce this value.
    """
    if not (math.isfinite(beta) and beta >= 0.0):
        raise InvalidInputError(f"beta must be non-negative, got {beta}")
    return 0.5 * (1.0 - math.exp(-4.0 * math.pi * beta))


def run_decaying_lmsz(coupling: CouplingTensor, alpha: float, decay: DecayRates,
                      initial: TwoQubitState, window: Window,
                      tolerance: float = DEFAULT_TOLERANCE) -> TwoQubitTrajectory:
    """Sweep with irreversibly decaying up states (non-Hermitian blocks).

    Returns the unnormalized amplitude trajectory; populations and total
    norm are available on the result.  The ramp is applied to spin 1 and
    the window is in dimensionless time.
    """
    if not (math.isfinite(alpha) and alpha > 0):
        raise InvalidInputError("alpha must be positive")
    field = Ramp(alpha=alpha, applied_to="spin1")
    return propagate_two_qubit(coupling, field, initial, window, tolerance, decay=decay)
