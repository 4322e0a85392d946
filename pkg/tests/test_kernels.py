"""Backend equivalence: the compiled core must match the NumPy fallback."""

import math

import numpy as np
import pytest

import lmszpair._kernels._pyfallback as py_backend

cy_backend = pytest.importorskip(
    "lmszpair._kernels._core", reason="compiled kernel core not built"
)

_EMPTY = np.empty(0)


def run_both(fn_name, *args):
    return getattr(py_backend, fn_name)(*args), getattr(cy_backend, fn_name)(*args)


class TestIntegratorEquivalence:
    def test_ramp_block(self):
        grid = np.linspace(-80.0, 80.0, 801)
        hp = np.array([1.0, math.sqrt(0.5), 0.0, 0.0])
        args = (py_backend.FIELD_RAMP_SPIN1, np.array([1.0, 0.0]), _EMPTY, _EMPTY, _EMPTY,
                2, hp, np.array([1.0 + 0j, 0.0]), grid, 1e-10, 1e-12)
        (s1, t1, o1), (s2, t2, o2) = run_both("propagate_linear_tdse", *args)
        assert s1 == s2 == py_backend.STATUS_OK
        assert np.max(np.abs(o1 - o2)) < 1e-9

    def test_full_4x4_with_decay(self):
        grid = np.linspace(-20.0, 20.0, 201)
        hp = np.array([0.8, 0.3, 0.4, 0.1, 0.05])
        y0 = np.array([0.5, 0.5, 0.5, 0.5], dtype=complex)
        args = (py_backend.FIELD_RAMP_HOMOG, np.array([1.0, 0.0]), _EMPTY, _EMPTY, _EMPTY,
                4, hp, y0, grid, 1e-10, 1e-12)
        (s1, _, o1), (s2, _, o2) = run_both("propagate_linear_tdse", *args)
        assert s1 == s2 == py_backend.STATUS_OK
        assert np.max(np.abs(o1 - o2)) < 1e-9

    def test_tabulated_field(self):
        grid = np.linspace(-5.0, 5.0, 101)
        ftimes = np.linspace(-5.0, 5.0, 11)
        fw1 = np.sin(ftimes)
        fw2 = 0.3 * ftimes
        hp = np.array([1.0, 0.7, 0.0, 0.0])
        args = (py_backend.FIELD_TABULATED, np.array([0.0, 0.0]), ftimes, fw1, fw2,
                2, hp, np.array([1.0 + 0j, 0.0]), grid, 1e-10, 1e-12)
        (s1, _, o1), (s2, _, o2) = run_both("propagate_linear_tdse", *args)
        assert s1 == s2 == py_backend.STATUS_OK
        # interpolated field values may differ by 1 ulp between backends,
        # which lets the step controllers diverge; agreement is bounded by
        # the integration tolerance, not machine precision
        assert np.max(np.abs(o1 - o2)) < 1e-8

    def test_single_point_grid(self):
        args = (py_backend.FIELD_CONSTANT, np.array([1.0, 0.0]), _EMPTY, _EMPTY, _EMPTY,
                2, np.array([1.0, 0.5, 0.0, 0.0]), np.array([1.0 + 0j, 0.0]),
                np.array([0.0]), 1e-10, 1e-12)
        (s1, _, o1), (s2, _, o2) = run_both("propagate_linear_tdse", *args)
        assert s1 == s2 == py_backend.STATUS_OK
        np.testing.assert_array_equal(o1, o2)


class TestNoisyStepperEquivalence:
    def test_identical_results(self):
        rng = np.random.default_rng(5)
        noise = rng.normal(size=(64, 3000))
        w_det = np.linspace(-30, 30, 3000)
        u0 = np.array([0.0, 1.0], dtype=complex)
        r1 = py_backend.noisy_block_final(w_det, 0.5, noise, 0.7, 0.02, u0)
        r2 = cy_backend.noisy_block_final(w_det, 0.5, noise, 0.7, 0.02, u0)
        assert np.max(np.abs(r1 - r2)) < 1e-12


class TestKummerEquivalence:
    def test_identical_sums(self):
        cases = [
            (-0.25j, 0.5, 30j),
            (0.5 - 5j, 1.5, -40j),
            (complex(0.5, 0.055), 1.5, complex(12.0, -9.0)),
            (-5j, 0.5, complex(0.0, 44.0)),
        ]
        for a, b, x in cases:
            v1 = py_backend.kummer_m_dd(a, b, x)
            v2 = cy_backend.kummer_m_dd(a, b, x)
            assert abs(v1 - v2) <= 1e-13 * abs(v1)
