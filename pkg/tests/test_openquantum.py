import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from lmszpair.errors import ConfigurationError, InvalidInputError
from lmszpair.model import CouplingTensor, DecayRates, Ramp
from lmszpair.openquantum import (
    NoiseSpec,
    run_decaying_lmsz,
    run_noisy_lmsz,
    sample_noise_path,
    saturated_transfer_probability,
)
from lmszpair.propagation import (
    TwoQubitState,
    Window,
    lmsz_probability,
    propagate_two_qubit,
)

_SZ = np.diag([1.0, -1.0])
_SX = np.array([[0.0, 1.0], [1.0, 0.0]])


def lindblad_transfer(beta, g_dephase, span=100.0):
    """Independent oracle for the noisy ensemble mean.

    White longitudinal noise averages exactly to the dephasing master
    equation d rho/d tau = -i[H, rho] + (G/2)(sz rho sz - rho); the final
    up-state population is the exact ensemble-mean transfer.
    """
    g = math.sqrt(beta)

    def rhs(t, y):
        rho = (y[:4] + 1j * y[4:]).reshape(2, 2)
        h = 0.5 * t * _SZ + g * _SX
        d = -1j * (h @ rho - rho @ h) + 0.5 * g_dephase * (_SZ @ rho @ _SZ - rho)
        flat = d.reshape(-1)
        return np.concatenate([flat.real, flat.imag])

    rho0 = np.zeros(8)
    rho0[3] = 1.0  # |down><down|
    sol = solve_ivp(rhs, (-span, span), rho0, rtol=1e-10, atol=1e-12)
    return float(sol.y[0, -1])


def coupling_for(beta_p, beta_m=1.0, alpha=1.0):
    gp, gm = math.sqrt(beta_p * alpha), math.sqrt(beta_m * alpha)
    return CouplingTensor((gm + gp) / 2, (gm - gp) / 2, 0.0)


ENDPOINT_WINDOW = Window(-100.0, 100.0, (-100.0, 100.0))


class TestSampleNoisePath:
    def test_step_variance(self):
        spec = NoiseSpec(G=0.8, n_realizations=1, base_seed=42)
        grid = np.linspace(0.0, 10.0, 1001)
        samples = np.concatenate(
            [sample_noise_path(spec, i, grid).values for i in range(100)])
        expected = 2.0 * 0.8 / (grid[1] - grid[0])
        assert np.var(samples) == pytest.approx(expected, rel=0.03)

    def test_integral_variance_matches_correlator(self):
        # integral of eta over [0, T] has variance 2 G T
        spec = NoiseSpec(G=0.5, n_realizations=1, base_seed=3)
        grid = np.linspace(0.0, 4.0, 401)
        dt = grid[1] - grid[0]
        integrals = [np.sum(sample_noise_path(spec, i, grid).values) * dt
                     for i in range(4000)]
        assert np.var(integrals) == pytest.approx(2.0 * 0.5 * 4.0, rel=0.05)

    def test_deterministic_per_index(self):
        spec = NoiseSpec(G=1.0, n_realizations=1, base_seed=9)
        grid = np.linspace(-1.0, 1.0, 51)
        a = sample_noise_path(spec, 7, grid).values
        b = sample_noise_path(spec, 7, grid).values
        np.testing.assert_array_equal(a, b)
        c = sample_noise_path(spec, 8, grid).values
        assert not np.array_equal(a, c)

    def test_piecewise_constant_evaluation(self):
        spec = NoiseSpec(G=1.0, n_realizations=1, base_seed=1)
        grid = np.linspace(0.0, 1.0, 11)
        path = sample_noise_path(spec, 0, grid)
        assert path(0.05) == path.values[0]
        assert path(5.0) == 0.0

    def test_rejects_non_uniform_grid(self):
        spec = NoiseSpec(G=1.0, n_realizations=1)
        with pytest.raises(ConfigurationError):
            sample_noise_path(spec, 0, np.array([0.0, 0.1, 0.3]))


class TestRunNoisyLmsz:
    def test_zero_noise_reduces_to_closed_dynamics(self):
        coup = coupling_for(0.5)
        init = TwoQubitState.basis("--")
        res = run_noisy_lmsz(coup, 1.0, NoiseSpec(G=0.0, n_realizations=100, base_seed=1),
                             init, ENDPOINT_WINDOW, n_steps=200000)
        closed = propagate_two_qubit(coup, Ramp(alpha=1.0, applied_to="both_homogeneous"),
                                     init, ENDPOINT_WINDOW, 1e-11)
        np.testing.assert_allclose(res.mean_populations, closed.populations[-1], atol=3e-4)
        # identical realizations: only accumulation rounding survives
        assert np.all(res.standard_error[[0, 3]] <= 1e-8)

    def test_saturated_mean_matches_lindblad_oracle(self):
        beta = 0.5
        coup = coupling_for(beta)
        res = run_noisy_lmsz(coup, 1.0, NoiseSpec(G=5.0, n_realizations=2000, base_seed=5),
                             TwoQubitState.basis("--"), ENDPOINT_WINDOW)
        oracle = lindblad_transfer(beta, 5.0)
        assert abs(res.mean_populations[0] - oracle) <= 3.0 * res.standard_error[0]
        # and the plateau value itself
        assert res.mean_populations[0] == pytest.approx(
            saturated_transfer_probability(beta), abs=0.02)

    def test_saturation_monotone_in_noise_strength(self):
        coup = coupling_for(0.5)
        init = TwoQubitState.basis("--")
        means, errs = [], []
        for g_noise in (0.0, 0.3, 1.0, 5.0):
            res = run_noisy_lmsz(coup, 1.0, NoiseSpec(G=g_noise, n_realizations=400, base_seed=2),
                                 init, ENDPOINT_WINDOW)
            means.append(res.mean_populations[0])
            errs.append(res.standard_error[0])
        # decreasing from the coherent value toward the dephasing plateau
        for k in range(3):
            assert means[k + 1] < means[k] + 3.0 * (errs[k] + errs[k + 1])
        assert means[0] == pytest.approx(lmsz_probability(math.sqrt(0.5), 1.0), abs=0.02)
        assert means[-1] == pytest.approx(saturated_transfer_probability(0.5), abs=0.03)

    def test_isotropic_coupling_shows_no_effect(self):
        # gamma_x = gamma_y freezes the plus sector; from |--> nothing moves
        coup = CouplingTensor(0.5, 0.5, 0.0)
        res = run_noisy_lmsz(coup, 1.0, NoiseSpec(G=5.0, n_realizations=200, base_seed=4),
                             TwoQubitState.basis("--"), ENDPOINT_WINDOW)
        assert res.mean_populations[0] <= 3.0 * max(res.standard_error[0], 1e-12)
        assert res.mean_populations[1] == 0.0
        assert res.mean_populations[2] == 0.0

    def test_minus_sector_frozen_under_homogeneous_drive(self):
        # |-+> under the homogeneous drive: no field in the minus sector,
        # only the coherent coupling rotation, identical across realizations
        coup = coupling_for(0.5, beta_m=1.0)
        res = run_noisy_lmsz(coup, 1.0, NoiseSpec(G=5.0, n_realizations=100, base_seed=6),
                             TwoQubitState.basis("-+"), ENDPOINT_WINDOW)
        assert np.all(res.standard_error[[1, 2]] <= 1e-8)

    def test_spin1_geometry_drives_minus_sector(self):
        coup = coupling_for(0.25, beta_m=0.5)
        res = run_noisy_lmsz(coup, 1.0, NoiseSpec(G=2.0, n_realizations=150, base_seed=8),
                             TwoQubitState.basis("-+"), ENDPOINT_WINDOW,
                             field_geometry="spin1_only")
        assert res.standard_error[1] > 0.0

    def test_requires_enough_realizations(self):
        with pytest.raises(InvalidInputError):
            run_noisy_lmsz(coupling_for(0.5), 1.0, NoiseSpec(G=1.0, n_realizations=10),
                           TwoQubitState.basis("--"), ENDPOINT_WINDOW)

    def test_coarse_steps_rejected(self):
        with pytest.raises(ConfigurationError):
            run_noisy_lmsz(coupling_for(0.5), 1.0, NoiseSpec(G=50.0, n_realizations=100),
                           TwoQubitState.basis("--"), ENDPOINT_WINDOW, n_steps=2000)

    def test_reproducible_ensembles(self):
        coup = coupling_for(0.5)
        spec = NoiseSpec(G=2.0, n_realizations=120, base_seed=13)
        a = run_noisy_lmsz(coup, 1.0, spec, TwoQubitState.basis("--"), ENDPOINT_WINDOW)
        b = run_noisy_lmsz(coup, 1.0, spec, TwoQubitState.basis("--"), ENDPOINT_WINDOW)
        np.testing.assert_array_equal(a.mean_populations, b.mean_populations)


class TestRunDecayingLmsz:
    def test_zero_decay_identical_to_closed(self):
        coup = coupling_for(0.5)
        init = TwoQubitState.basis("--")
        w = Window.uniform(-50, 50, 201)
        open_traj = run_decaying_lmsz(coup, 1.0, DecayRates(0.0, 0.0), init, w)
        closed = propagate_two_qubit(coup, Ramp(alpha=1.0), init, w)
        np.testing.assert_allclose(open_traj.amplitudes, closed.amplitudes, atol=1e-12)

    def test_norm_non_increasing_and_strictly_decreasing_when_occupied(self):
        coup = coupling_for(0.5)
        w = Window.uniform(-60, 60, 241)
        traj = run_decaying_lmsz(coup, 1.0, DecayRates(0.1, 0.0),
                                 TwoQubitState.basis("--"), w)
        norm = traj.norm
        assert np.all(np.diff(norm) <= 1e-12)
        # once the up state is populated (after the crossing) the norm decays
        after = norm[w.grid > 10.0]
        assert after[-1] < after[0]

    def test_dark_state_immune(self):
        # |--> is dark: with no transfer (gamma_plus = 0) nothing decays
        coup = CouplingTensor(0.5, 0.5, 0.0)
        traj = run_decaying_lmsz(coup, 1.0, DecayRates(0.4, 0.4),
                                 TwoQubitState.basis("--"), Window.uniform(-30, 30, 121))
        np.testing.assert_allclose(traj.norm, 1.0, atol=1e-9)

    def test_depletion_plateau_and_weak_decay_dependence(self):
        """The dark-state depletion plateaus at the ideal sweep probability.

        Decay drains the transferred population but barely changes how much
        leaves |-->; for growing windows the decaying-run depletion settles
        on a plateau and its deviation from the ideal probability stays
        within the finite-window envelope of the closed dynamics.
        """
        coup = coupling_for(0.5)
        init = TwoQubitState.basis("--")
        ideal = lmsz_probability(math.sqrt(0.5), 1.0)
        depletions = []
        for tf in (50.0, 100.0, 200.0):
            w = Window.uniform(-tf, tf, 801)
            traj = run_decaying_lmsz(coup, 1.0, DecayRates(0.1, 0.0), init, w)
            depletions.append(1.0 - traj.populations[-1, 3])
        steps = np.abs(np.diff(depletions))
        assert steps[1] < steps[0]  # plateau: successive window growth changes less
        assert abs(depletions[-1] - ideal) < 1e-3

    def test_equal_rates_give_equal_sector_damping(self):
        # anti-Hermitian trace is sector-independent; with xi1 = xi2 the
        # minus-sector damping is uniform, so |+-> and |-+> decay alike
        coup = CouplingTensor(0.9, 0.1, 0.0)
        init = TwoQubitState.from_amplitudes([0, math.sqrt(0.5), math.sqrt(0.5), 0])
        traj = run_decaying_lmsz(coup, 1.0, DecayRates(0.2, 0.2), init,
                                 Window.uniform(-40, 40, 161))
        pops = traj.populations
        minus_norm = pops[:, 1] + pops[:, 2]
        expected = np.exp(-0.2 * (traj.taus - traj.taus[0]))  # uniform -i xi/2 damping
        np.testing.assert_allclose(minus_norm, expected, atol=1e-8)


class TestSaturatedTransferProbability:
    def test_limits(self):
        assert saturated_transfer_probability(0.0) == 0.0
        assert saturated_transfer_probability(10.0) == pytest.approx(0.5, abs=1e-12)

    def test_small_beta_matches_perturbative_transfer(self):
        # weak coupling transfers incoherently at the golden-rule rate, so the
        # plateau must reproduce the coherent lowest-order probability
        beta = 1e-4
        assert saturated_transfer_probability(beta) == pytest.approx(
            2 * math.pi * beta, rel=1e-3)
