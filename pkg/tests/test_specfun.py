import cmath
import math

import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from lmszpair.errors import InvalidInputError, PoleError, RangeError
from lmszpair.specfun import (
    DEFAULT_PCF_CONFIG,
    PCFArgument,
    _pcf_asymptotic,
    _pcf_series,
    exact_amplitudes,
    exact_amplitudes_grid,
    gamma_complex,
    pcf_d,
    rgamma,
)

# High-precision references (30-digit arbitrary-precision evaluation),
# frozen; tuples are (nu, z, D_nu(z)).
_PCF_REFERENCE = [
    (0.11j, complex(2.121320343559643, -2.1213203435596424), complex(-0.7788147944867038, 0.75407770255325)),
    (0.11j, complex(-28.2842712474619, 28.284271247461902), complex(-0.10912570944469085, -0.7584204973758838)),
    ((-1 + 0.5j), complex(-5.65685424949238, -5.656854249492381), complex(-2.0652414871449514, 3.7615027486841153)),
    ((-1 + 2j), complex(67.17514421272202, 67.175144212722), complex(0.00025815486497918124, 0.002173657571110109)),
    (2j, complex(6.505382386916237, 6.505382386916236), complex(-0.10699910925736748, 0.18128384653601742)),
    ((-1 + 10j), complex(-3.5355339059327373, -3.5355339059327378), complex(109471054.9213311, 821641089.8113465)),
    (10j, complex(-0.4949747468305832, 0.4949747468305833), complex(-682.8383256013204, -1576.70592470235)),
    (0.3j, complex(0.0, 0.0), complex(1.037698001505518, -0.19048858269438876)),
]

_GAMMA_REFERENCE = [
    (complex(1.0, 0.7), complex(0.6728253931632454, -0.20285243648300008)),
    (complex(0.5, -3.0), complex(0.021445670552430646, -0.006865364837261678)),
    (complex(-2.5, 1.5), complex(0.003412139564239149, -0.024053490434664735)),
    (complex(12.0, 5.0), complex(13617486.481125215, -2817017.434119188)),
    (complex(-0.5, 0.0), complex(-3.544907701811032, 0.0)),
    (complex(6.25, -19.0), complex(2.8119437276294264e-06, -6.100466339613514e-06)),
]


def weber_ode_reference(nu, ray, radii):
    """Weber-equation oracle values of D_nu along a ray (origin anchored)."""
    w0 = 2 ** (nu / 2) * math.sqrt(math.pi) / scipy.special.gamma((1 - nu) / 2)
    wp0 = -(2 ** ((nu + 1) / 2)) * math.sqrt(math.pi) / scipy.special.gamma(-nu / 2)

    def rhs(s, y):
        z = ray * s
        w = y[0] + 1j * y[1]
        acc = ray * ray * (z * z / 4 - nu - 0.5) * w
        return [y[2], y[3], acc.real, acc.imag]

    d0 = ray * wp0
    sol = solve_ivp(rhs, (0.0, max(radii)), [w0.real, w0.imag, d0.real, d0.imag],
                    t_eval=list(radii), rtol=1e-11, atol=1e-13)
    assert sol.success
    return [(r, sol.y[0, k] + 1j * sol.y[1, k]) for k, r in enumerate(radii)]


class TestGammaComplex:
    def test_integer_and_half_integer(self):
        assert gamma_complex(1.0) == pytest.approx(1.0, rel=1e-14)
        assert gamma_complex(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
        assert gamma_complex(5.0) == pytest.approx(24.0, rel=1e-13)

    def test_modulus_identity_on_imaginary_axis(self):
        # |Gamma(1+iy)|^2 = pi y / sinh(pi y)
        y = 0.7
        val = abs(gamma_complex(1 + 1j * y)) ** 2
        assert val == pytest.approx(math.pi * y / math.sinh(math.pi * y), rel=1e-12)

    def test_frozen_references(self):
        for z, ref in _GAMMA_REFERENCE:
            got = gamma_complex(z)
            assert abs(got - ref) <= 1e-12 * abs(ref)

    def test_against_scipy_grid(self, rng):
        for _ in range(400):
            z = complex(rng.uniform(-20, 20), rng.uniform(-20, 20))
            if abs(z) > 20 or abs(z) < 0.05:
                continue
            if z.imag == 0 and z.real <= 0:
                continue
            ref = scipy.special.gamma(z)
            assert abs(gamma_complex(z) - ref) <= 1e-12 * abs(ref)

    def test_pole_error_carries_location(self):
        with pytest.raises(PoleError) as err:
            gamma_complex(-3.0)
        assert err.value.location == -3.0
        with pytest.raises(PoleError):
            gamma_complex(0.0)

    @settings(max_examples=100)
    @given(st.floats(0.1, 10), st.floats(-10, 10))
    def test_recurrence_property(self, x, y):
        z = complex(x, y)
        lhs = gamma_complex(z + 1)
        rhs = z * gamma_complex(z)
        assert abs(lhs - rhs) <= 1e-12 * abs(lhs)

    def test_rgamma_zero_at_poles_and_reciprocal(self):
        assert rgamma(-4.0) == 0.0
        z = complex(0.3, -1.2)
        assert abs(rgamma(z) * gamma_complex(z) - 1.0) < 1e-13


class TestPcfD:
    def test_d0_closed_form(self):
        for z in (1.3 + 0.2j, 8.0 * cmath.exp(-0.25j * math.pi), 0.1j):
            ref = cmath.exp(-z * z / 4)
            assert abs(pcf_d(0.0, z) - ref) <= 1e-12 * abs(ref)

    def test_d1_closed_form(self):
        for z in (0.5j, 3.0 - 1.0j, 11.0 * cmath.exp(0.75j * math.pi)):
            ref = z * cmath.exp(-z * z / 4)
            assert abs(pcf_d(1.0, z) - ref) <= 1e-12 * abs(ref)

    def test_origin_value(self):
        nu = 0.3j
        ref = 2 ** (nu / 2) * math.sqrt(math.pi) * rgamma((1 - nu) / 2)
        assert abs(pcf_d(nu, 0.0) - ref) <= 1e-13 * abs(ref)

    def test_frozen_references(self):
        for nu, z, ref in _PCF_REFERENCE:
            got = pcf_d(nu, z)
            assert abs(got - ref) <= 1e-9 * abs(ref), (nu, z)

    def test_branch_overlap_annulus(self):
        # series and asymptotic expansions must agree where both are valid
        cfg = DEFAULT_PCF_CONFIG
        for beta in (0.05, 0.5, 2.0, 3.4):
            for nu in (1j * beta, -1 + 1j * beta):
                for theta in (0.25, -0.25, 0.75, -0.75):
                    for r in (7.5, 8.0, 8.5):
                        z = r * cmath.exp(1j * math.pi * theta)
                        s = _pcf_series(nu, z, cfg)
                        a = _pcf_asymptotic(nu, z, cfg)
                        assert abs(s - a) <= 1e-9 * abs(a)

    def test_weber_ode_oracle(self):
        """March the Weber equation from the origin along two sweep rays.

        Independent oracle: second-order ODE w'' = (z^2/4 - nu - 1/2) w with
        the closed-form origin values, integrated with an off-the-shelf
        adaptive scheme, must match pcf_d to 1e-8 relative.  The acceptance
        suite runs the full-range version over the whole criterion grid.
        """
        for beta in (0.11, 2.0):
            for theta in (-0.25, 0.75):
                ray = cmath.exp(1j * math.pi * theta)
                for nu in (1j * beta, -1 + 1j * beta):
                    for r, ref in weber_ode_reference(nu, ray, (5.0, 12.0, 40.0)):
                        got = pcf_d(nu, ray * r)
                        assert abs(got - ref) <= 1e-8 * abs(ref), (beta, theta, r)

    def test_range_guard(self):
        with pytest.raises(RangeError):
            pcf_d(0.5j, 250.0 * cmath.exp(-0.25j * math.pi))
        with pytest.raises(RangeError):
            PCFArgument(nu=0.5j, z=300.0)

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            pcf_d(complex(math.nan, 0), 1.0)

    def test_real_axis_overflow_guard(self):
        # e^{+z^2/4} on the negative real axis overflows before |z| = 200
        with pytest.raises(RangeError):
            pcf_d(0.5j, -150.0)


class TestExactAmplitudes:
    def test_identity_at_initial_time(self):
        for beta in (0.05, 0.11, 0.5, 1.0, 2.0):
            a, b = exact_amplitudes(beta, -100.0, -100.0)
            assert abs(a - 1.0) < 1e-12
            assert abs(b) < 1e-12

    def test_unitarity_grid(self):
        for beta in (0.05, 0.11, 0.5, 1.0, 2.0):
            for tau in np.linspace(-100, 100, 21):
                a, b = exact_amplitudes(beta, float(tau), -100.0)
                assert abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) <= 1e-8

    def test_tail_average_approaches_sweep_probability(self):
        beta = 0.1
        taus = np.linspace(90.0, 100.0, 400)
        ab = exact_amplitudes_grid(beta, taus, -100.0)
        mean_transfer = float(np.mean(np.abs(ab[:, 1]) ** 2))
        assert mean_transfer == pytest.approx(1 - math.exp(-0.2 * math.pi), abs=5e-3)

    def test_rejects_bad_inputs(self):
        with pytest.raises(InvalidInputError):
            exact_amplitudes(0.0, 0.0, -1.0)
        with pytest.raises(InvalidInputError):
            exact_amplitudes(-0.5, 0.0, -1.0)
        with pytest.raises(InvalidInputError):
            exact_amplitudes(0.5, -2.0, -1.0)  # tau precedes tau_i
