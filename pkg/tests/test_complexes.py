import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from test_utils import rng_for, assert_small, assert_projector

from fredcomplex.core import Surface
from fredcomplex.core.complexes import (
    FiniteComplex, FamilyComplex, validate, cohomology, euler_characteristic,
    laplacians, hodge_parametrix, parametrix_defects, check_parametrix,
    transport_parametrix, lift_quasicomplex, derham_demo, random_complex,
    random_well_conditioned, complex_to_json, complex_from_json
)
from fredcomplex.core.numlin import norm2, rank_tol
from fredcomplex.exceptions import (
    StructuralError, CompositionViolation, NonFiniteMatrix
)

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


class TestFiniteComplex:
    def test_001_spaces_from_shapes(self):
        c = FiniteComplex([np.zeros((3, 2)), np.zeros((1, 3))])
        assert c.spaces == (2, 3, 1)
        assert c.length == 2

    def test_002_shape_mismatch_names_position(self):
        with pytest.raises(StructuralError) as e:
            FiniteComplex([np.zeros((3, 2)), np.zeros((1, 4))])
        assert e.value.position == 1

    def test_003_no_differentials(self):
        with pytest.raises(StructuralError):
            FiniteComplex([])
        c = FiniteComplex([], spaces=[3])
        assert cohomology(c).dims == [3]

    def test_004_non_finite(self):
        with pytest.raises(NonFiniteMatrix):
            FiniteComplex([np.array([[np.nan]])])

    def test_005_zero_maps_outside(self):
        c = FiniteComplex([np.ones((1, 2))])
        assert c.differential(-1).shape == (2, 0)
        assert c.differential(1).shape == (0, 1)

    def test_006_differentials_read_only(self):
        c = FiniteComplex([np.ones((1, 2))])
        with pytest.raises(ValueError):
            c.differentials[0][0, 0] = 2.0


class TestValidate:
    def test_001_violation(self):
        ops = [np.eye(2), np.eye(2)]
        assert not validate(FiniteComplex(ops)).passed
        with pytest.raises(CompositionViolation) as e:
            validate(FiniteComplex(ops), raise_on_violation=True)
        assert e.value.position == 0
        with pytest.raises(CompositionViolation):
            cohomology(FiniteComplex(ops))

    def test_002_complex(self):
        c, _ = random_complex(rng_for(1))
        assert validate(c).passed


class TestCohomology:
    @given(seed=seeds, n_spaces=st.integers(min_value=2, max_value=5))
    @settings(max_examples=40, deadline=None)
    def test_001_matches_construction(self, seed, n_spaces):
        c, expected = random_complex(rng_for(seed), n_spaces=n_spaces)
        report = cohomology(c)
        assert report.dims == expected
        assert report.index == euler_characteristic(c)
        for P, d in zip(report.harmonic_projectors, report.dims):
            assert_projector(P)
            assert np.trace(P).real == pytest.approx(d, abs=1e-8)

    @given(seed=seeds)
    @settings(max_examples=20, deadline=None)
    def test_002_exact(self, seed):
        c, expected = random_complex(rng_for(seed), exact=True)
        assert cohomology(c).exact
        assert expected == [0] * len(c.spaces)

    def test_003_short_exact_sequence(self):
        c = FiniteComplex([np.array([[1.0], [0.0]]),
                           np.array([[0.0, 1.0]])])
        report = cohomology(c)
        assert report.dims == [0, 0, 0]
        assert report.to_json()['index'] == 0

    def test_004_sphere(self):
        c = derham_demo(Surface.sphere_octahedron)
        assert c.spaces == (6, 12, 8)
        assert validate(c).max_defect == 0.0
        assert cohomology(c).dims == [1, 0, 1]
        assert euler_characteristic(c) == 2

    @pytest.mark.parametrize('size', [3, 4, 6])
    def test_005_torus(self, size):
        c = derham_demo('torus', size)
        assert validate(c).max_defect == 0.0
        assert cohomology(c).dims == [1, 2, 1]
        assert euler_characteristic(c) == 0

    def test_006_torus_too_small(self):
        with pytest.raises(StructuralError):
            derham_demo('torus-grid', 2)

    @given(seed=seeds)
    @settings(max_examples=20, deadline=None)
    def test_007_laplacian_kernels(self, seed):
        c, expected = random_complex(rng_for(seed), n_spaces=4)
        for lap, d in zip(laplacians(c), expected):
            assert_small(norm2(lap - lap.conj().T), 1e-12, 'asymmetry')
            assert rank_tol(lap).rank == lap.shape[0] - d


class TestParametrix:
    @given(seed=seeds)
    @settings(max_examples=30, deadline=None)
    def test_001_hodge(self, seed):
        c, _ = random_complex(rng_for(seed), n_spaces=5)
        param = hodge_parametrix(c)
        rem, comp = parametrix_defects(c, param)
        scale = c.scale() * param.scale()
        assert_small(max(rem) / scale, 1e-10, 'remainder defect')
        assert_small(max([0.0] + comp) / scale, 1e-10, 'complex defect')

    def test_002_derham_remainder_ranks(self):
        c = derham_demo('sphere')
        param = hodge_parametrix(c)
        traces = [np.trace(r).real for r in param.remainders]
        assert_allclose(traces, [1, 0, 1], atol=1e-10)

    def test_003_check_parametrix_shapes(self):
        c = FiniteComplex([np.ones((1, 2))])
        with pytest.raises(StructuralError):
            check_parametrix(c, [np.ones((1, 2))])
        with pytest.raises(StructuralError):
            check_parametrix(c, [])

    @given(seed=seeds)
    @settings(max_examples=20, deadline=None)
    def test_004_transport(self, seed):
        rng = rng_for(seed)
        c, _ = random_complex(rng, n_spaces=4)
        param = hodge_parametrix(c)
        report = cohomology(c)
        isos = [random_well_conditioned(rng, n, n) for n in c.spaces]
        moved, moved_param = transport_parametrix(c, param, isos)
        assert validate(moved).passed
        for t, P, R in zip(isos, report.harmonic_projectors,
                           moved_param.remainders):
            expected = t @ P @ np.linalg.inv(t)
            assert_small(norm2(R - expected) /
                         (moved.scale() * moved_param.scale()), 1e-8)
        assert cohomology(moved).dims == report.dims


class TestLiftQuasicomplex:
    @given(seed=seeds)
    @settings(max_examples=30, deadline=None)
    def test_001_perturbed(self, seed):
        rng = rng_for(seed)
        c, expected = random_complex(rng, n_spaces=4)
        ops = [a + 1e-3 * (rng.standard_normal(a.shape) +
                           1j * rng.standard_normal(a.shape))
               for a in c.differentials]
        result = lift_quasicomplex(ops)
        assert validate(result.complex).passed
        assert np.array_equal(result.complex.differentials[-1], ops[-1])
        assert len(result.corrections) == len(ops)
        assert result.corrections[-1] == 0.0

    def test_002_complex_unchanged(self):
        c, _ = random_complex(rng_for(3), n_spaces=5)
        result = lift_quasicomplex(c.differentials)
        for a, b in zip(result.complex.differentials, c.differentials):
            assert np.array_equal(a, b)
        assert result.corrections == [0.0] * c.length

    def test_003_idempotent(self):
        rng = rng_for(4)
        ops = [rng.standard_normal((3, 2)), rng.standard_normal((2, 3))]
        once = lift_quasicomplex(ops)
        twice = lift_quasicomplex(once.complex.differentials)
        for a, b in zip(once.complex.differentials,
                        twice.complex.differentials):
            assert np.array_equal(a, b)


class TestFamilyComplex:
    def test_001_shared_spaces(self):
        a = FiniteComplex([np.ones((1, 2))])
        b = FiniteComplex([np.ones((2, 2))])
        with pytest.raises(StructuralError):
            FamilyComplex([0, 1], [a, b])
        with pytest.raises(StructuralError):
            FamilyComplex([0], [a, a])
        fc = FamilyComplex([0, 1], [a, a])
        assert len(fc) == 2
        assert fc.spaces == (2, 1)


class TestSerialization:
    def test_001_json(self):
        c, _ = random_complex(rng_for(5), n_spaces=3)
        back = complex_from_json(complex_to_json(c))
        assert back.spaces == c.spaces
        for a, b in zip(back.differentials, c.differentials):
            assert np.array_equal(a, b)
