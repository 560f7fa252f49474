"""Experiments on projected complexes and quasicomplex corrections."""

import numpy as np

from fredcomplex.core.complexes import (
    lift_quasicomplex, random_complex, relative_composition, validate
)
from fredcomplex.core.numlin import norm2
from fredcomplex.core.toeplitz import (
    check_lift_subspaces, lift_cohomology_dims, lift_quasicomplex_projected,
    projected_cohomology, projected_hodge_parametrix,
    random_block_quasicomplex, random_projected_complex
)
from fredcomplex.experiments.base import Experiment

SUBSPACE_TOL = 1e-8
REMAINDER_TOL = 1e-8
COMPOSITION_TOL = 1e-10
PERTURBATION = 1e-3


class Lift(Experiment):
    name = 'lift'
    anchor = 'the lift of a projected complex has the same cohomology'
    defaults = {'instances': 100, 'tol': 1e-10}
    randomized = True

    def run(self, params, rng, storage):
        tol = params['tol']
        total = params['instances']
        mismatches = []
        rank_excess = []
        exact_remainder = 0.0
        gaps = {'kernel': 0.0, 'image': 0.0}
        counts = {'exact': 0, 'oblique': 0}
        for i in range(total):
            exact = i % 4 == 0
            hermitian = i % 2 == 1
            pc = random_projected_complex(rng, n_spaces=4, max_dim=6,
                                          exact=exact, hermitian=hermitian)
            counts['exact'] += int(exact)
            counts['oblique'] += int(not hermitian)

            dims = projected_cohomology(pc, tol).dims
            lifted, param = projected_hodge_parametrix(pc, tol)
            lift_dims, _ = lift_cohomology_dims(lifted, tol)
            if lift_dims != dims:
                mismatches.append(i)
            ranks = param.remainder_ranks(tol)
            if any(r > d for r, d in zip(ranks, dims)):
                rank_excess.append(i)
            if exact:
                scale = max([1.0] + [norm2(p) for p in pc.projections])
                exact_remainder = max(
                    [exact_remainder] +
                    [norm2(r) / scale for r in param.remainders if r.size])
            for key, value in check_lift_subspaces(pc, lifted, tol).items():
                gaps[key] = max(gaps[key], value)
            self.progress(i + 1, total)

        self.check('lift cohomology equals projected cohomology',
                   not mismatches)
        self.check('remainder rank bounded by cohomology', not rank_excess)
        self.check('exact projected complexes have exact parametrices',
                   exact_remainder <= REMAINDER_TOL)
        self.check('lift kernels and images follow the block formulas',
                   max(gaps.values()) <= SUBSPACE_TOL)

        return {
            'instances': total,
            'counts': counts,
            'mismatches': mismatches,
            'rank_excess': rank_excess,
            'max_exact_remainder': exact_remainder,
            'subspace_gaps': gaps,
        }


class Quasilift(Experiment):
    name = 'quasilift'
    anchor = 'quasicomplexes lift to complexes with the same leading part'
    defaults = {'instances': 100, 'tol': 1e-10}
    randomized = True

    def run(self, params, rng, storage):
        tol = params['tol']
        total = params['instances']
        worst = {'perturbed': 0.0, 'block': 0.0}
        corrections = 0.0
        unchanged = True
        idempotent = True
        last_kept = True
        blocks_kept = True
        for i in range(total):
            c, _ = random_complex(rng, n_spaces=4, max_dim=6)
            ops = [a + PERTURBATION * (rng.standard_normal(a.shape) +
                                       1j * rng.standard_normal(a.shape))
                   for a in c.differentials]
            result = lift_quasicomplex(ops, tol)
            worst['perturbed'] = max(worst['perturbed'],
                                     validate(result.complex).max_defect)
            corrections = max([corrections] + result.corrections)
            last_kept &= np.array_equal(result.complex.differentials[-1],
                                        ops[-1])
            again = lift_quasicomplex(result.complex.differentials, tol)
            idempotent &= all(
                np.array_equal(a, b) for a, b in
                zip(again.complex.differentials, result.complex.differentials)
            )
            same = lift_quasicomplex(c.differentials, tol)
            unchanged &= all(
                np.array_equal(a, b) for a, b in
                zip(same.complex.differentials, c.differentials)
            )

            block_ops, projections, tops = random_block_quasicomplex(
                rng, exact_upper=bool(i % 2))
            pc, _ = lift_quasicomplex_projected(
                block_ops, projections, preserve_upper_triangular=True,
                top_dims=tops, tol=tol)
            for j, (new, old) in enumerate(zip(pc.ambient.differentials,
                                               block_ops)):
                blocks_kept &= np.array_equal(new[:, :tops[j]],
                                              old[:, :tops[j]])
            worst['block'] = max([worst['block']] + [
                relative_composition(pc.ambient.differential(j + 1),
                                     pc.ambient.differential(j))
                for j in range(pc.length - 1)
            ])
            self.progress(i + 1, total)

        self.check('corrected quasicomplexes are complexes',
                   max(worst.values()) <= COMPOSITION_TOL)
        self.check('complexes are returned unchanged', unchanged)
        self.check('correction is idempotent', idempotent)
        self.check('last operator kept', last_kept)
        self.check('upper-triangular blocks kept bit for bit', blocks_kept)

        return {
            'instances': total,
            'max_relative_composition': worst,
            'max_correction': corrections,
            'perturbation': PERTURBATION,
        }
