import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from test_utils import rng_for, assert_small

from fredcomplex.core.complexes import (
    FiniteComplex, validate, relative_composition, hodge_parametrix
)
from fredcomplex.core.numlin import norm2
from fredcomplex.core.toeplitz import (
    ProjectedComplex, lift, restricted_complex, projected_cohomology,
    lift_cohomology_dims, check_lift_subspaces, projected_hodge_parametrix,
    extract_parametrix, lift_quasicomplex_projected, random_idempotent,
    random_projected_complex, random_block_quasicomplex
)
from fredcomplex.exceptions import StructuralError, CompositionViolation

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


class TestProjectedComplex:
    def test_001_not_idempotent(self):
        c = FiniteComplex([np.zeros((2, 2))])
        with pytest.raises(StructuralError) as e:
            ProjectedComplex(c, [np.eye(2), 2.0 * np.eye(2)])
        assert e.value.position == 1

    def test_002_not_compressed(self):
        P = np.diag([1.0, 0.0])
        c = FiniteComplex([np.ones((2, 2))])
        with pytest.raises(StructuralError):
            ProjectedComplex(c, [P, P])

    def test_003_composition(self):
        P = np.eye(1)
        c = FiniteComplex([np.eye(1), np.eye(1)])
        with pytest.raises(CompositionViolation):
            ProjectedComplex(c, [P, P, P])

    def test_004_projection_count(self):
        c = FiniteComplex([np.zeros((2, 2))])
        with pytest.raises(StructuralError):
            ProjectedComplex(c, [np.eye(2)])

    @given(seed=seeds, n=st.integers(min_value=0, max_value=6))
    @settings(max_examples=30, deadline=None)
    def test_005_random_idempotent(self, seed, n):
        p = int(rng_for(seed).integers(0, n + 1))
        P, S, S_inv = random_idempotent(rng_for(seed), n, p)
        assert_small(norm2(P @ P - P) / (1.0 + norm2(P) ** 2), 1e-12)
        assert int(round(np.trace(P).real)) == p


class TestLift:
    def test_001_restricted_bases(self):
        rng = rng_for(2)
        pc = random_projected_complex(rng, hermitian=True)
        _, bases = restricted_complex(pc)
        assert [b.shape[1] for b in bases] == [
            int(round(np.trace(p).real)) for p in pc.projections]

    @given(seed=seeds, hermitian=st.booleans())
    @settings(max_examples=40, deadline=None)
    def test_002_lift_is_complex(self, seed, hermitian):
        pc = random_projected_complex(rng_for(seed), hermitian=hermitian)
        lifted = lift(pc)
        assert validate(lifted.lift).passed
        assert lifted.faithful == len(pc.spaces)
        assert lifted.lift.spaces[:3] == (
            pc.spaces[0], pc.spaces[1] + pc.spaces[0],
            pc.spaces[2] + pc.spaces[1] + pc.spaces[0])

    @given(seed=seeds, exact=st.booleans(), hermitian=st.booleans())
    @settings(max_examples=40, deadline=None)
    def test_003_same_cohomology(self, seed, exact, hermitian):
        pc = random_projected_complex(rng_for(seed), exact=exact,
                                      hermitian=hermitian)
        dims = projected_cohomology(pc).dims
        lift_dims, _ = lift_cohomology_dims(lift(pc))
        assert lift_dims == dims
        if exact:
            assert dims == [0] * len(pc.spaces)

    @given(seed=seeds)
    @settings(max_examples=25, deadline=None)
    def test_004_block_formulas(self, seed):
        pc = random_projected_complex(rng_for(seed))
        gaps = check_lift_subspaces(pc)
        assert_small(gaps['kernel'], 1e-8, 'kernel gap')
        assert_small(gaps['image'], 1e-8, 'image gap')

    def test_005_block_view(self):
        pc = random_projected_complex(rng_for(5))
        lifted = lift(pc)
        a = lifted.lift.differential(1)
        assert np.array_equal(lifted.block(a, 2, 1, 2, 1),
                              np.asarray(pc.ambient.differential(1)))
        eye = np.eye(pc.spaces[1])
        assert np.allclose(lifted.block(a, 2, 1, 1, 1),
                           eye - pc.projections[1])


class TestProjectedParametrix:
    @given(seed=seeds)
    @settings(max_examples=25, deadline=None)
    def test_001_exact_remainders_vanish(self, seed):
        pc = random_projected_complex(rng_for(seed), exact=True)
        _, param = projected_hodge_parametrix(pc)
        scale = max([1.0] + [norm2(p) for p in pc.projections])
        for r in param.remainders:
            assert_small(norm2(r) / scale, 1e-8, 'remainder')
        assert param.remainder_ranks() == [0] * len(pc.spaces)

    @given(seed=seeds, hermitian=st.booleans())
    @settings(max_examples=25, deadline=None)
    def test_002_remainder_ranks(self, seed, hermitian):
        pc = random_projected_complex(rng_for(seed), hermitian=hermitian)
        dims = projected_cohomology(pc).dims
        _, param = projected_hodge_parametrix(pc)
        assert len(param.operators) == pc.length
        for j, b in enumerate(param.operators):
            assert b.shape == (pc.spaces[j], pc.spaces[j + 1])
        for r, d in zip(param.remainder_ranks(), dims):
            assert r <= d
        assert len(param.complex_defects()) == pc.length - 1

    def test_003_extract_from_lift(self):
        pc = random_projected_complex(rng_for(12), exact=True)
        lifted = lift(pc)
        param = extract_parametrix(pc, lifted, hodge_parametrix(lifted.lift))
        for b, p_in, p_out in zip(param.operators, pc.projections,
                                  pc.projections[1:]):
            assert_small(norm2(p_in @ b @ p_out - b) /
                         (1.0 + norm2(b)), 1e-10, 'compression defect')
        for r, p in zip(param.remainders, pc.projections):
            assert_small(norm2(r) / (1.0 + norm2(p)), 1e-8, 'remainder')


class TestProjectedQuasicomplex:
    @given(seed=seeds)
    @settings(max_examples=25, deadline=None)
    def test_001_correction(self, seed):
        rng = rng_for(seed)
        pc = random_projected_complex(rng, hermitian=bool(seed % 2))
        ops = []
        for j, a in enumerate(pc.ambient.differentials):
            noise = 1e-3 * (rng.standard_normal(a.shape) +
                            1j * rng.standard_normal(a.shape))
            ops.append(a + pc.projections[j + 1] @ noise @ pc.projections[j])
        corrected, corrections = lift_quasicomplex_projected(
            ops, pc.projections)
        assert validate(corrected.ambient).passed
        assert np.array_equal(corrected.ambient.differentials[-1], ops[-1])
        assert corrections[-1] == 0.0

    def test_002_projected_complex_unchanged(self):
        pc = random_projected_complex(rng_for(9))
        corrected, corrections = lift_quasicomplex_projected(
            pc.ambient.differentials, pc.projections)
        for a, b in zip(corrected.ambient.differentials,
                        pc.ambient.differentials):
            assert np.array_equal(a, b)
        assert corrections == [0.0] * pc.length

    @given(seed=seeds, exact_upper=st.booleans())
    @settings(max_examples=25, deadline=None)
    def test_003_upper_triangular(self, seed, exact_upper):
        ops, projections, tops = random_block_quasicomplex(
            rng_for(seed), exact_upper=exact_upper)
        pc, _ = lift_quasicomplex_projected(
            ops, projections, preserve_upper_triangular=True, top_dims=tops)
        for j, (new, old) in enumerate(zip(pc.ambient.differentials, ops)):
            assert np.array_equal(new[:, :tops[j]], old[:, :tops[j]])
        for j in range(pc.length - 1):
            assert_small(relative_composition(pc.ambient.differential(j + 1),
                                              pc.ambient.differential(j)),
                         1e-10, 'composition')

    def test_004_top_dims_required(self):
        ops, projections, tops = random_block_quasicomplex(rng_for(1))
        with pytest.raises(StructuralError):
            lift_quasicomplex_projected(ops, projections,
                                        preserve_upper_triangular=True)
        with pytest.raises(StructuralError):
            lift_quasicomplex_projected(
                ops, projections, preserve_upper_triangular=True,
                top_dims=[t + 100 for t in tops])

    def test_005_cohomology_of_block_lift(self):
        # the exact upper block does not contribute
        ops, projections, tops = random_block_quasicomplex(rng_for(6))
        pc, _ = lift_quasicomplex_projected(
            ops, projections, preserve_upper_triangular=True, top_dims=tops)
        lower = ProjectedComplex(
            FiniteComplex([a[tops[j + 1]:, tops[j]:] for j, a in
                           enumerate(pc.ambient.differentials)],
                          spaces=[n - t for n, t in zip(pc.spaces, tops)]),
            [p[t:, t:] for p, t in zip(projections, tops)]
        )
        assert projected_cohomology(pc).dims == \
            projected_cohomology(lower).dims

    def test_006_lower_block_corrected(self):
        # a_j = 0 while K and Q do not compose
        ops = [np.array([[0.0, 1.0], [0.0, 1.0]]),
               np.array([[0.0, 1.0], [0.0, 1.0]]),
               np.array([[0.0, 1.0]])]
        projections = [np.eye(n) for n in (2, 2, 2, 1)]
        pc, corrections = lift_quasicomplex_projected(
            ops, projections, preserve_upper_triangular=True,
            top_dims=[1, 1, 1, 1])
        expected = [[[0.0, 1.0], [0.0, 0.0]], [[0.0, 1.0], [0.0, 0.0]],
                    [[0.0, 1.0]]]
        for new, old, want in zip(pc.ambient.differentials, ops, expected):
            assert np.array_equal(new[:, :1], old[:, :1])
            np.testing.assert_allclose(new, want, atol=1e-12)
        assert corrections[-1] == 0.0
        assert validate(pc.ambient).passed
