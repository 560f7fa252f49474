import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from test_utils import rng_for, assert_small

from fredcomplex.core.complexes import (
    FiniteComplex, cohomology, validate, random_complex
)
from fredcomplex.core.cones import (
    ComplexMorphism, mapping_cone, kernel_complex, cokernel_complex,
    assumption_dims, check_containments, verify_cone_decomposition,
    counterexample_instance, random_surjective_morphism
)
from fredcomplex.exceptions import (
    StructuralError, CommutingSquareViolation
)

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def identity_morphism(c):
    return ComplexMorphism(c, c, [np.eye(n) for n in c.spaces])


class TestComplexMorphism:
    def test_001_square_violation(self):
        c = FiniteComplex([np.eye(2)])
        with pytest.raises(CommutingSquareViolation) as e:
            ComplexMorphism(c, c, [np.eye(2), 2.0 * np.eye(2)])
        assert e.value.position == 0

    def test_002_structural(self):
        c = FiniteComplex([np.eye(2)])
        d = FiniteComplex([np.eye(2), np.zeros((1, 2))])
        with pytest.raises(StructuralError):
            ComplexMorphism(c, d, [np.eye(2), np.eye(2)])
        with pytest.raises(StructuralError):
            ComplexMorphism(c, c, [np.eye(2)])
        with pytest.raises(StructuralError):
            ComplexMorphism(c, c, [np.eye(2), np.eye(3)])


class TestMappingCone:
    @given(seed=seeds)
    @settings(max_examples=25, deadline=None)
    def test_001_cone_is_complex(self, seed):
        m = random_surjective_morphism(rng_for(seed))
        cone = mapping_cone(m)
        assert validate(cone).passed
        assert len(cone.spaces) == m.positions + 1
        assert cone.spaces[0] == m.source.spaces[0]
        assert cone.spaces[-1] == m.target.spaces[-1]

    @given(seed=seeds)
    @settings(max_examples=15, deadline=None)
    def test_002_identity_cone_exact(self, seed):
        c, _ = random_complex(rng_for(seed), n_spaces=4)
        assert cohomology(mapping_cone(identity_morphism(c))).exact

    def test_003_zero_morphism(self):
        # the cone of zero is the sum of source and shifted target
        c, dims = random_complex(rng_for(11), n_spaces=3)
        m = ComplexMorphism(
            c, c, [np.zeros((n, n)) for n in c.spaces]
        )
        cone = cohomology(mapping_cone(m)).dims
        assert cone == [a + b for a, b in zip(dims + [0], [0] + dims)]


class TestCounterexample:
    @pytest.mark.parametrize('t1, ker_exact', [
        (np.zeros((1, 1)), True),
        (np.eye(1), False),
        (np.eye(3), False),
    ])
    def test_001_cone_exact(self, t1, ker_exact):
        report = verify_cone_decomposition(counterexample_instance(t1))
        assert all(d == 0 for d in report.cone_dims)
        assert all(d == 0 for d in report.ker_dims) == ker_exact
        assert report.consistent

    def test_002_identity_breaks_assumption(self):
        report = verify_cone_decomposition(counterexample_instance(np.eye(2)))
        assert not report.assumption_holds
        assert not report.decomposition_holds

    def test_003_square(self):
        with pytest.raises(StructuralError):
            counterexample_instance(np.ones((1, 2)))


class TestConeDecomposition:
    @given(seed=seeds)
    @settings(max_examples=40, deadline=None)
    def test_001_surjective_verticals(self, seed):
        m = random_surjective_morphism(rng_for(seed))
        report = verify_cone_decomposition(m)
        assert report.assumption_holds
        assert report.decomposition_holds
        indices = report.indices
        assert indices['cone'] == indices['ker'] - indices['coker']
        assert all(d == 0 for d in report.coker_dims)

    @given(seed=seeds)
    @settings(max_examples=20, deadline=None)
    def test_002_containments(self, seed):
        m = random_surjective_morphism(rng_for(seed))
        gaps = check_containments(m)
        assert_small(gaps['kernel'], 1e-8, 'kernel leakage')
        assert_small(gaps['image'], 1e-8, 'image leakage')

    def test_003_sub_complexes(self):
        m = random_surjective_morphism(rng_for(7))
        ker, bases = kernel_complex(m)
        coker, _ = cokernel_complex(m)
        assert validate(ker).passed
        assert list(coker.spaces) == [0] * m.positions
        assert [b.shape[1] for b in bases] == [
            h - l for h, l in zip(m.source.spaces, m.target.spaces)]
        assert assumption_dims(m) == [0] * m.positions

    def test_004_report_json(self):
        report = verify_cone_decomposition(
            random_surjective_morphism(rng_for(8)))
        doc = report.to_json()
        assert set(doc) == {'cone_dims', 'ker_dims', 'coker_dims',
                            'assumption_dims', 'indices',
                            'decomposition_holds'}
