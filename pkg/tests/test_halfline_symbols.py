import numpy as np
import pytest
import scipy.integrate
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from test_utils import rng_for, assert_small, assert_projector

from fredcomplex.core import FiberClass
from fredcomplex.core.complexes import (
    FiniteComplex, cohomology, complex_from_ranks, validate
)
from fredcomplex.core.halfline_symbols import (
    LaguerreBasis, CospherePoint, laguerre_functions, cutoff,
    quadrature_exp_coeffs, cr_boundary_symbol, cr_symbol_cohomology,
    stable_cohomology, dolbeault_d0, dolbeault_d1, dolbeault_k0, augmented_d0,
    dolbeault_complex, exactness_scan, scan_points, classify_fiber,
    closed_form_sections, kernel_bundle_clutching, complement_family,
    dolbeault_family, degenerating_family, random_family, _latitude_batch,
    _rotation
)
from fredcomplex.core.numlin import norm2
from fredcomplex.exceptions import StructuralError, DecayViolation

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


class TestLaguerreBasis:
    def test_001_orthonormal(self):
        N = 4
        gram = np.zeros((N + 1, N + 1))
        for j in range(N + 1):
            for k in range(j, N + 1):
                value = scipy.integrate.quad(
                    lambda r: laguerre_functions(r, N)[0, j] *
                    laguerre_functions(r, N)[0, k], 0.0, np.inf)[0]
                gram[j, k] = gram[k, j] = value
        assert_allclose(gram, np.eye(N + 1), atol=1e-9)

    def test_002_derivative_matrix(self):
        N = 6
        h = 1e-5
        r = np.linspace(0.1, 5.0, 25)
        numeric = (laguerre_functions(r + h, N) -
                   laguerre_functions(r - h, N)) / (2 * h)
        D = LaguerreBasis(N).derivative_matrix
        assert_allclose(laguerre_functions(r, N) @ D, numeric, atol=1e-6)

    def test_003_boundary_functional(self):
        basis = LaguerreBasis(5)
        assert_allclose(basis.boundary_functional,
                        laguerre_functions(0.0, 5))

    def test_004_exp_coeffs(self):
        basis = LaguerreBasis(8)
        coeffs = basis.exp_coeffs(1.0)
        expected = np.zeros((9, 1))
        expected[0] = np.sqrt(2.0)
        assert_allclose(coeffs, expected, atol=1e-15)
        assert_allclose(basis.derivative_matrix @ coeffs, -coeffs,
                        atol=1e-15)

    @pytest.mark.parametrize('beta', [1.0, 1.0 + 0.3j, 1.0 - 0.3j, 2.5])
    def test_005_exp_coeffs_quadrature(self, beta):
        gap = np.max(np.abs(LaguerreBasis(8).exp_coeffs(beta) -
                            quadrature_exp_coeffs(beta, 8)))
        assert_small(gap, 1e-10, 'quadrature gap')

    def test_006_decay_violation(self):
        with pytest.raises(DecayViolation):
            LaguerreBasis(4).exp_coeffs(-0.5 + 1j)
        with pytest.raises(DecayViolation):
            LaguerreBasis(4).exp_coeffs(2j)

    def test_007_inclusion(self):
        inc = LaguerreBasis(2).inclusion(LaguerreBasis(3), blocks=2)
        assert inc.shape == (8, 6)
        assert_allclose(inc.conj().T @ inc, np.eye(6))
        with pytest.raises(StructuralError):
            LaguerreBasis(3).inclusion(LaguerreBasis(2))
        with pytest.raises(StructuralError):
            LaguerreBasis(-1)


class TestCutoff:
    def test_001_plateau(self):
        assert cutoff(0.0) == 1.0
        assert cutoff(0.25) == 1.0
        assert cutoff(-0.2) == 1.0
        assert cutoff(0.5) == 0.0
        assert cutoff(2.0) == 0.0

    def test_002_monotone(self):
        values = cutoff(np.linspace(0.25, 0.5, 101))
        assert np.all(np.diff(values) <= 0.0)
        assert 0.0 < cutoff(0.375) < 1.0


class TestCrSymbol:
    def test_001_kernel(self):
        op = cr_boundary_symbol(1, 32)
        kernel = op.kernel()
        assert kernel.shape == (33, 1)
        assert abs(kernel[0, 0]) == pytest.approx(1.0)
        assert op.surjective()
        assert not op.bijective()
        assert cr_symbol_cohomology(1, 32).dims == (1, 0)

    def test_002_bijective(self):
        op = cr_boundary_symbol(-1, 32)
        assert op.bijective()
        assert op.kernel().shape == (33, 0)
        assert cr_symbol_cohomology(-1, 32).dims == (0, 0)

    def test_003_kernel_is_exponential(self):
        op = cr_boundary_symbol(1, 16)
        v = op.basis.exp_coeffs(1.0)
        assert norm2(op.matrix @ v) == pytest.approx(0.0, abs=1e-15)
        assert abs((op.basis.boundary_functional @ v)[0, 0]) == \
            pytest.approx(2.0)

    def test_004_tau(self):
        with pytest.raises(StructuralError):
            cr_boundary_symbol(0, 8)

    def test_005_stable_cohomology_drops_truncation_artifacts(self):
        # the coarse cokernel l_N is hit at the finer truncation
        coarse = FiniteComplex([cr_boundary_symbol(1, 8).matrix])
        fine = FiniteComplex([cr_boundary_symbol(1, 9).matrix])
        inc = LaguerreBasis(8).inclusion(LaguerreBasis(9))
        assert cohomology(coarse).dims == [1, 1]
        stable = stable_cohomology(coarse, fine, [inc, inc])
        assert stable.dims == (1, 0)
        assert not stable.marginal


class TestCospherePoint:
    @given(seed=seeds)
    @settings(max_examples=30, deadline=None)
    def test_001_random(self, seed):
        point = CospherePoint.random(rng_for(seed))
        assert abs(point.residual) <= 1e-12
        assert abs(point.pairing.real) <= 1e-12
        assert len(point.flat()) == 8

    def test_002_skew(self):
        point = CospherePoint.skew([1.0, 1j])
        assert point.skew_distance == pytest.approx(0.0, abs=1e-15)
        assert point.pairing == pytest.approx(1j)

    def test_003_off_bundle(self):
        with pytest.raises(StructuralError):
            CospherePoint([1.0, 0.0], [1.0, 0.0])
        with pytest.raises(StructuralError):
            CospherePoint([2.0, 0.0], [0.0, 1.0])
        with pytest.raises(StructuralError):
            CospherePoint([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])

    @pytest.mark.parametrize('t', [-1.0, -0.5, 0.0, 0.7, 1.0])
    def test_004_on_fiber(self, t):
        point = CospherePoint.on_fiber(t, 0.4, z0=(0.6, 0.8j))
        assert_allclose(point.z, [0.6, 0.8j])
        assert point.pairing == pytest.approx(-1j * t)


class TestDolbeault:
    @given(seed=seeds)
    @settings(max_examples=20, deadline=None)
    def test_001_symbol_complex(self, seed):
        point = CospherePoint.random(rng_for(seed))
        c = dolbeault_complex(point, 12)
        assert c.spaces == (13, 26, 13)
        assert validate(c).max_defect <= 1e-13

    @given(seed=seeds)
    @settings(max_examples=20, deadline=None)
    def test_002_k0_closed_at_skew_points(self, seed):
        rng = rng_for(seed)
        point = CospherePoint.skew(rng.standard_normal(2) +
                                   1j * rng.standard_normal(2))
        d1 = dolbeault_d1(point, 32)
        k0 = dolbeault_k0(point, 32)
        assert norm2(k0) > 0.5
        assert_small(norm2(d1 @ k0) / (1.0 + norm2(d1)), 1e-10)

    def test_003_k0_vanishes_far_from_skew(self):
        point = CospherePoint.on_fiber(1.0, 0.0)
        assert point.skew_distance == pytest.approx(2.0)
        assert not dolbeault_k0(point, 8).any()
        assert augmented_d0(point, 8).shape == (18, 10)
        assert dolbeault_d0(point, 8).shape == (18, 9)

    def test_004_scan_classes(self):
        rng = rng_for(17)
        far = [p for p in scan_points(rng, 40)
               if p.skew_distance >= 0.3][:6]
        skew = scan_points(rng, 0, skew_count=3)
        report = exactness_scan(far + skew)
        assert report.dims[:len(far)] == [(0, 0, 0)] * len(far)
        assert report.dims[len(far):] == [(1, 1, 0)] * 3
        assert report.classes[-1] == FiberClass.skew_diagonal
        assert len(list(report.rows())) == len(far) + 3
        assert len(report.family) == len(far) + 3

    def test_005_augmented_skew(self):
        skew = scan_points(rng_for(23), 0, skew_count=3)
        report = exactness_scan(skew, augmented=True)
        assert report.dims == [(1, 0, 0)] * 3

    def test_006_classify(self):
        assert classify_fiber((0, 0, 0), False, 1.0) == FiberClass.exact
        assert classify_fiber((0, 0, 0), True, 1.0) == FiberClass.marginal
        assert classify_fiber((1, 1, 0), False, 0.01) == \
            FiberClass.skew_diagonal
        assert classify_fiber((1, 1, 0), False, 0.5) == FiberClass.unexpected


class TestClutching:
    @pytest.mark.parametrize('t', [-1.0, -0.6, -0.1, 0.3, 0.95])
    def test_001_batch_matches_closed_forms(self, t):
        N = 10
        angles = np.array([0.0, 1.1, 2.9])
        rotation = _rotation((0.6, 0.8j))
        mats, s_plus, s_minus = _latitude_batch(rotation, t, angles, N)
        for i, a in enumerate(angles):
            point = CospherePoint.on_fiber(t, a, z0=(0.6, 0.8j))
            assert_allclose(mats[i], augmented_d0(point, N), atol=1e-13)
            plus, minus = closed_form_sections(point, N)
            assert_allclose(s_plus[i], plus)
            assert_allclose(s_minus[i], minus / np.linalg.norm(minus),
                            atol=1e-13)

    def test_002_sections_in_kernel_at_poles(self):
        N = 12
        north = CospherePoint.on_fiber(1.0, 0.0)
        south = CospherePoint.on_fiber(-1.0, 0.0)
        plus, _ = closed_form_sections(north, N)
        _, minus = closed_form_sections(south, N)
        assert norm2(augmented_d0(north, N) @ plus) == 0.0
        assert_small(norm2(augmented_d0(south, N) @ minus), 1e-12)

    def test_003_winding(self):
        report = kernel_bundle_clutching(equator_grid=64, N=16,
                                         meridian_steps=64)
        assert report.winding == 1
        assert report.closed_form_gap <= 1e-6
        assert report.max_section_gap <= 0.05
        assert len(report.plot_rows()) == 64
        assert report.to_json()['orientation'] == 'xi2-ccw'


class TestComplement:
    @given(seed=seeds)
    @settings(max_examples=15, deadline=None)
    def test_001_random_family(self, seed):
        fc, _ = random_family(rng_for(seed), n_points=6)
        augmented, report = complement_family(fc)
        assert all(report.exact)
        assert report.conserved
        for value in report.pi_defects.values():
            assert_small(value, 1e-10, 'fill projection defect')
        for P, d in zip(report.j0_projectors, report.j0_dims):
            assert_projector(P)
            assert int(round(np.trace(P).real)) == d
        assert len(augmented) == len(fc)
        assert len(report.ells) == fc.fibers[0].length

    def test_002_dolbeault_family(self):
        augmented, report = complement_family(dolbeault_family(N=16))
        assert len(augmented) == 64
        assert all(report.exact)
        assert set(report.j0_dims) == {1}
        assert report.conserved
        assert report.verdict == 'vanishing-candidate'
        assert report.index_element.startswith('[J0]')

    def test_003_verdict_with_winding(self):
        fc, _ = random_family(rng_for(2), n_points=3)
        _, report = complement_family(fc, winding=1)
        assert report.verdict == 'nonvanishing(winding 1)'
        assert report.to_json()['verdict'] == report.verdict

    def test_004_index_element(self):
        fc, _ = random_family(rng_for(3), n_points=3)
        _, report = complement_family(fc)
        report.ells = [1, 0, 2]
        assert report.index_element == '[J0] - [C^1] - [C^2]'
        report.ells = [0, 3]
        assert report.index_element == '[J0] + [C^3]'

    def test_005_empty_family(self):
        fc, _ = random_family(rng_for(4), n_points=0)
        with pytest.raises(StructuralError):
            complement_family(fc)

    def test_006_degenerating_family(self):
        base = complex_from_ranks(rng_for(5), [2, 3, 3, 2], [1, 2, 1])
        fc = degenerating_family(base, n_points=9)
        assert cohomology(fc.fibers[0]).dims == [1, 0, 0, 1]
        assert cohomology(fc.fibers[4]).dims == [2, 3, 3, 2]

        augmented, report = complement_family(fc)
        # the zero fiber needs the whole last space
        assert report.ells[-1] == 2
        for t, fiber in zip(fc.parameter_points, augmented.fibers):
            last = fiber.differential(2)
            assert last.shape == (2, 5)
            if t != 0.0:
                assert norm2(last[:, 3:4]) == pytest.approx(1.0)
                assert not last[:, 4:].any()
            assert validate(fiber).passed
        assert all(report.exact)
        assert report.euler == [0] * 9
        assert report.conserved
        assert len(set(report.j0_dims)) == 1

    def test_007_degenerating_grid(self):
        base = complex_from_ranks(rng_for(5), [2, 3, 3, 2], [1, 2, 1])
        with pytest.raises(StructuralError):
            degenerating_family(base, n_points=4)
        with pytest.raises(StructuralError):
            degenerating_family(base, n_points=1)
