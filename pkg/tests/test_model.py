import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lmszpair.errors import InvalidInputError
from lmszpair.model import (
    Constant,
    CouplingTensor,
    DecayRates,
    NoisyRamp,
    Oscillating,
    Ramp,
    Tabulated,
    assemble_propagator,
    block_decompose,
    build_hamiltonian,
    check_symmetry,
)
from lmszpair.propagation import BlockPropagator

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]])
_SZ = np.diag([1.0 + 0j, -1.0])
_ID = np.eye(2, dtype=complex)


def kron_hamiltonian(coupling, w1, w2, decay=None):
    """Independent oracle: explicit Kronecker-product construction."""
    h = (
        w1 * np.kron(_SZ, _ID)
        + w2 * np.kron(_ID, _SZ)
        + coupling.gamma_x * np.kron(_SX, _SX)
        + coupling.gamma_y * np.kron(_SY, _SY)
        + coupling.gamma_z * np.kron(_SZ, _SZ)
    )
    if decay is not None:
        up = np.diag([1.0, 0.0]).astype(complex)
        h = h - 0.5j * (decay.xi_1 * np.kron(up, _ID) + decay.xi_2 * np.kron(_ID, up))
    return h


class TestCouplingTensor:
    def test_derived_sector_couplings(self):
        c = CouplingTensor(1.0, 0.5, 0.2)
        assert c.gamma_plus == 0.5
        assert c.gamma_minus == 1.5

    def test_isotropic_case(self):
        c = CouplingTensor(0.35, 0.35, 0.0)
        assert c.gamma_plus == 0.0
        assert c.gamma_minus == pytest.approx(0.7)

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            CouplingTensor(math.nan, 0.0, 0.0)
        with pytest.raises(InvalidInputError):
            CouplingTensor(0.0, math.inf, 0.0)


class TestFieldProtocols:
    def test_ramp_spin1(self):
        f = Ramp(alpha=2.0, applied_to="spin1")
        assert f.evaluate(3.0) == (3.0, 0.0)

    def test_ramp_homogeneous_shares_quarter_slope(self):
        f = Ramp(alpha=2.0, applied_to="both_homogeneous")
        w1, w2 = f.evaluate(2.0)
        assert w1 == w2 == 1.0

    def test_ramp_rejects_bad_slope(self):
        with pytest.raises(InvalidInputError):
            Ramp(alpha=-1.0)
        with pytest.raises(InvalidInputError):
            Ramp(alpha=1.0, applied_to="spin3")

    def test_noisy_ramp_mean_part(self):
        f = NoisyRamp(alpha=4.0, noise_strength_G=1.0, seed=1)
        w1, w2 = f.evaluate(1.0)
        assert w1 == w2 == 1.0  # [alpha t]/4 each

    def test_oscillating(self):
        f = Oscillating(amplitude=0.5, frequency=2.0)
        assert f.evaluate(0.0) == (0.5, 0.0)

    def test_tabulated_interpolates(self):
        f = Tabulated(times=(0.0, 1.0, 2.0), omega1_values=(0.0, 1.0, 0.0),
                      omega2_values=(1.0, 1.0, 1.0))
        assert f.evaluate(0.5) == (0.5, 1.0)
        assert f.evaluate(5.0) == (0.0, 1.0)  # clamped at the edge

    def test_tabulated_requires_increasing_times(self):
        with pytest.raises(InvalidInputError):
            Tabulated(times=(0.0, 0.0), omega1_values=(1.0, 1.0), omega2_values=(0.0, 0.0))


class TestBuildHamiltonian:
    def test_pure_xx_coupling_matrix(self):
        h = build_hamiltonian(CouplingTensor(1.0, 0.0, 0.0), Constant(0.0, 0.0), 0.0)
        expected = np.zeros((4, 4))
        expected[0, 3] = expected[3, 0] = 1.0
        expected[1, 2] = expected[2, 1] = 1.0
        np.testing.assert_allclose(h, expected, atol=0)

    def test_pure_field_diagonal(self):
        h = build_hamiltonian(CouplingTensor(0.0, 0.0, 0.0), Constant(2.0, 0.0), 0.0)
        np.testing.assert_allclose(h, np.diag([2.0, 2.0, -2.0, -2.0]), atol=0)

    def test_isotropic_blocks(self):
        # gamma_x = gamma_y kills the (++,--) coupling and doubles the other
        h = build_hamiltonian(CouplingTensor(1.0, 1.0, 0.0), Constant(0.0, 0.0), 0.0)
        assert h[0, 3] == 0.0
        assert h[1, 2] == 2.0

    def test_matches_kronecker_oracle(self, rng):
        for _ in range(25):
            c = CouplingTensor(*rng.uniform(-2, 2, 3))
            w1, w2 = rng.uniform(-3, 3, 2)
            t = float(rng.uniform(-5, 5))
            decay = DecayRates(*rng.uniform(0, 1, 2))
            h = build_hamiltonian(c, Constant(w1, w2), t, decay)
            np.testing.assert_allclose(h, kron_hamiltonian(c, w1, w2, decay), atol=1e-15)

    def test_hermitian_without_decay(self, rng):
        c = CouplingTensor(0.3, -0.8, 0.5)
        h = build_hamiltonian(c, Ramp(alpha=1.0), 2.5)
        np.testing.assert_allclose(h, h.conj().T, atol=0)

    def test_sector_off_blocks_exactly_zero(self):
        h = build_hamiltonian(CouplingTensor(1.0, 0.5, 0.3), Oscillating(1.0, 2.0), 1.7)
        for i, j in [(0, 1), (0, 2), (1, 0), (1, 3), (2, 0), (2, 3), (3, 1), (3, 2)]:
            assert h[i, j] == 0.0


class TestCheckSymmetry:
    def test_built_hamiltonians_commute(self, rng):
        for _ in range(10):
            c = CouplingTensor(*rng.uniform(-2, 2, 3))
            h = build_hamiltonian(c, Constant(*rng.uniform(-1, 1, 2)), 0.0)
            ok, residual = check_symmetry(h)
            assert ok and residual == 0.0

    def test_detects_broken_block_structure(self):
        h = build_hamiltonian(CouplingTensor(1.0, 0.0, 0.0), Constant(0.0, 0.0), 0.0)
        h[0, 1] = 0.1
        ok, residual = check_symmetry(h)
        assert not ok
        assert residual == pytest.approx(0.2)

    def test_identity_commutes(self):
        ok, residual = check_symmetry(np.eye(4))
        assert ok and residual == 0.0


class TestBlockDecompose:
    def test_sector_couplings(self):
        plus, minus = block_decompose(CouplingTensor(1.0, 0.5, 0.0), Constant(0.0))
        assert plus.gamma_block == 0.5
        assert minus.gamma_block == 1.5

    def test_isotropic_freezes_plus(self):
        plus, minus = block_decompose(CouplingTensor(0.5, 0.5, 0.0), Constant(0.0))
        assert plus.gamma_block == 0.0
        assert minus.gamma_block == 1.0

    def test_energy_shifts_and_labels(self):
        plus, minus = block_decompose(CouplingTensor(1.0, 0.5, 0.7), Constant(0.0))
        assert plus.energy_shift == 0.7
        assert minus.energy_shift == -0.7
        assert plus.basis_labels == ("++", "--")
        assert minus.basis_labels == ("+-", "-+")

    def test_spin1_ramp_drives_both_sectors_equally(self):
        plus, minus = block_decompose(CouplingTensor(1.0, 0.5, 0.0), Ramp(alpha=2.0))
        for t in (0.0, 1.3, -4.0):
            assert plus.Omega(t) == pytest.approx(t)
            assert minus.Omega(t) == pytest.approx(t)


class TestAssemblePropagator:
    @staticmethod
    def _bp(a, b, tau=0.0, tau_i=0.0):
        return BlockPropagator(a=a, b=b, tau=tau, tau_i=tau_i)

    def test_identity_blocks(self):
        u = assemble_propagator(self._bp(1.0, 0.0), self._bp(1.0, 0.0), gamma_z=0.3, t=0.0)
        np.testing.assert_allclose(u, np.eye(4), atol=0)

    def test_swap_block_structure(self):
        u = assemble_propagator(self._bp(0.0, 1.0), self._bp(1.0, 0.0), gamma_z=0.0, t=0.0)
        assert u[0, 3] == 1.0
        assert u[3, 0] == -1.0
        assert u[1, 1] == u[2, 2] == 1.0

    def test_rejects_mismatched_times(self):
        with pytest.raises(InvalidInputError):
            assemble_propagator(self._bp(1.0, 0.0, tau=1.0), self._bp(1.0, 0.0, tau=2.0),
                                gamma_z=0.0, t=1.0)

    @settings(max_examples=60, deadline=None)
    @given(
        phi_a=st.floats(0, 2 * math.pi), phi_b=st.floats(0, 2 * math.pi),
        r=st.floats(0, 1), phi_c=st.floats(0, 2 * math.pi),
        s=st.floats(0, 1), gz=st.floats(-2, 2), t=st.floats(0.001, 5.0),
    )
    def test_assembled_unitarity(self, phi_a, phi_b, r, phi_c, s, gz, t):
        # random normalized block pairs -> assembled operator unitary to 1e-10
        a_p = math.sqrt(1 - r * r) * np.exp(1j * phi_a)
        b_p = r * np.exp(1j * phi_b)
        a_m = math.sqrt(1 - s * s) * np.exp(1j * phi_c)
        b_m = s * np.exp(-1j * phi_b)
        u = assemble_propagator(self._bp(a_p, b_p, tau=t), self._bp(a_m, b_m, tau=t),
                                gamma_z=gz, t=t)
        np.testing.assert_allclose(u @ u.conj().T, np.eye(4), atol=1e-10)


class TestDecayRates:
    def test_sector_diagonal_projector_form(self):
        d = DecayRates(xi_1=0.3, xi_2=0.1)
        assert d.sector_diagonal("plus") == (0.4, 0.0)
        assert d.sector_diagonal("minus") == (0.3, 0.1)

    def test_total_sector_decay_rates_match(self):
        # the anti-Hermitian trace is the same in both sectors
        d = DecayRates(xi_1=0.25, xi_2=0.25)
        assert sum(d.sector_diagonal("plus")) == sum(d.sector_diagonal("minus"))

    def test_rejects_negative(self):
        with pytest.raises(InvalidInputError):
            DecayRates(xi_1=-0.1)
