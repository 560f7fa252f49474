"""Morphisms of complexes and their mapping cones.

Quotients L_j / im T_j are modelled by the orthogonal complements of
im T_j, so the cokernel complex carries the compressed differentials.
"""

import numpy as np

from fredcomplex.core.complexes import (
    FiniteComplex, cohomology, complex_from_ranks, random_ranks,
    random_unitary
)
from fredcomplex.core.numlin import (
    DEFAULT_TOL_REL, as_matrix, norm2, rank_tol, kernel_basis, image_basis,
    cokernel_basis, sum_basis
)
from fredcomplex.exceptions import StructuralError, CommutingSquareViolation
from fredcomplex.providers import Logger

# relative defect of a commuting square accepted as zero
SQUARE_TOL = 1e-10


class ComplexMorphism(object):
    """Vertical maps T_j between a source and a target complex.

    :param FiniteComplex source: differentials A_j on spaces H_j
    :param FiniteComplex target: differentials Q_j on spaces L_j
    :param verticals: T_j of shape dim L_j x dim H_j
    """

    def __init__(self, source, target, verticals, tol=SQUARE_TOL):
        if len(source.spaces) != len(target.spaces):
            raise StructuralError(
                'source has {} spaces, target {}'.format(
                    len(source.spaces), len(target.spaces))
            )
        verticals = [as_matrix(t, 'T_{}'.format(j))
                     for j, t in enumerate(verticals)]
        if len(verticals) != len(source.spaces):
            raise StructuralError('{} verticals for {} spaces'.format(
                len(verticals), len(source.spaces)))
        for j, t in enumerate(verticals):
            if t.shape != (target.spaces[j], source.spaces[j]):
                raise StructuralError(
                    'vertical shape {}'.format(t.shape), position=j
                )
            t.setflags(write=False)

        self.source = source
        self.target = target
        self.verticals = tuple(verticals)
        self._check_squares(tol)

    def _check_squares(self, tol):
        for j in range(self.source.length):
            a = self.source.differential(j)
            q = self.target.differential(j)
            t, t_next = self.verticals[j], self.verticals[j + 1]
            scale = 1.0 + norm2(t_next) * norm2(a) + norm2(q) * norm2(t)
            defect = norm2(t_next @ a - q @ t) / scale
            if defect > tol:
                raise CommutingSquareViolation(j, defect)

    @property
    def positions(self):
        return len(self.source.spaces)

    def vertical(self, j):
        if 0 <= j < self.positions:
            return self.verticals[j]
        return np.zeros((0, 0), dtype=np.complex128)


class ConeDecompositionReport(object):
    """Cohomology of the cone against kernel and cokernel complexes."""

    def __init__(self, cone_dims, ker_dims, coker_dims, assumption_dims):
        self.cone_dims = list(cone_dims)
        self.ker_dims = list(ker_dims)
        self.coker_dims = list(coker_dims)
        self.assumption_dims = list(assumption_dims)

    @staticmethod
    def _index(dims):
        return sum((-1) ** j * d for j, d in enumerate(dims))

    @property
    def indices(self):
        return {
            'cone': self._index(self.cone_dims),
            'ker': self._index(self.ker_dims),
            'coker': self._index(self.coker_dims),
        }

    @property
    def assumption_holds(self):
        return all(d == 0 for d in self.assumption_dims)

    @property
    def decomposition_holds(self):
        """Cone cohomology splits into kernel and shifted cokernel parts."""
        for j, d in enumerate(self.cone_dims):
            ker = self.ker_dims[j] if j < len(self.ker_dims) else 0
            coker = self.coker_dims[j - 1] if j > 0 else 0
            if d != ker + coker:
                return False
        indices = self.indices

        return indices['cone'] == indices['ker'] - indices['coker']

    @property
    def consistent(self):
        """The splitting must hold whenever the quotients vanish."""
        return self.decomposition_holds or not self.assumption_holds

    def to_json(self):
        return {
            'cone_dims': self.cone_dims,
            'ker_dims': self.ker_dims,
            'coker_dims': self.coker_dims,
            'assumption_dims': self.assumption_dims,
            'indices': self.indices,
            'decomposition_holds': self.decomposition_holds,
        }


def mapping_cone(m):
    """Cone complex on C_j = H_j + L_{j-1}.

    The differential sends (u, v) to (-A_j u, T_j u + Q_{j-1} v).

    :param ComplexMorphism m: morphism

    :return FiniteComplex: positions 0..N+2
    """
    h = list(m.source.spaces) + [0]
    el = [0] + list(m.target.spaces)
    diffs = []
    for j in range(len(h) - 1):
        rows, cols = h[j + 1] + el[j + 1], h[j] + el[j]
        block = np.zeros((rows, cols), dtype=np.complex128)
        if j < m.source.length:
            block[:h[j + 1], :h[j]] = -m.source.differential(j)
        if h[j]:
            block[h[j + 1]:, :h[j]] = m.verticals[j]
        if j > 0 and el[j]:
            block[h[j + 1]:, h[j]:] = m.target.differential(j - 1)
        diffs.append(block)

    return FiniteComplex(diffs, spaces=[a + b for a, b in zip(h, el)])


def kernel_complex(m, tol=DEFAULT_TOL_REL):
    """Induced complex on orthonormal bases K_j of ker T_j.

    :return: (FiniteComplex, list of bases K_j)
    """
    bases = [kernel_basis(t, tol) for t in m.verticals]
    diffs = [bases[j + 1].conj().T @ m.source.differential(j) @ bases[j]
             for j in range(m.source.length)]

    return FiniteComplex(diffs, spaces=[b.shape[1] for b in bases]), bases


def cokernel_complex(m, tol=DEFAULT_TOL_REL):
    """Compressed complex on orthonormal bases E_j of (im T_j)^perp.

    :return: (FiniteComplex, list of bases E_j)
    """
    bases = [cokernel_basis(t, tol) for t in m.verticals]
    diffs = [bases[j + 1].conj().T @ m.target.differential(j) @ bases[j]
             for j in range(m.target.length)]

    return FiniteComplex(diffs, spaces=[b.shape[1] for b in bases]), bases


def assumption_dims(m, tol=DEFAULT_TOL_REL):
    """dim Q_j^-1(im T_{j+1}) / (ker Q_j + im T_j) per position.

    :param ComplexMorphism m: morphism
    :param float tol: relative rank tolerance

    :return list: nonnegative integers, zero where the quotient vanishes
    """
    dims = []
    for j in range(m.positions):
        q = m.target.differential(j)
        n = q.shape[1]
        if j + 1 < m.positions:
            coker_next = cokernel_basis(m.verticals[j + 1], tol)
            preimage = n - rank_tol(coker_next.conj().T @ q, tol).rank
        else:
            preimage = n
        denominator = sum_basis(
            kernel_basis(q, tol), image_basis(m.verticals[j], tol), tol_rel=tol
        ).shape[1]
        dims.append(preimage - denominator)

    Logger.debug('Assumption quotient dims {}'.format(dims))

    return dims


def check_containments(m, tol=DEFAULT_TOL_REL):
    """Largest leakage of A_j(ker T_j) out of ker T_{j+1} and of
    Q_j(im T_j) out of im T_{j+1}.

    :return dict: 'kernel' and 'image' gaps, relative to the maps
    """
    ker_gap = 0.0
    img_gap = 0.0
    for j in range(m.source.length):
        a = m.source.differential(j)
        q = m.target.differential(j)
        kernel = kernel_basis(m.verticals[j], tol)
        leak = m.verticals[j + 1] @ a @ kernel
        ker_gap = max(ker_gap, norm2(leak) / (1.0 + norm2(a) *
                                              norm2(m.verticals[j + 1])))
        image = image_basis(m.verticals[j], tol)
        outside = cokernel_basis(m.verticals[j + 1], tol).conj().T @ q
        img_gap = max(img_gap, norm2(outside @ image) / (1.0 + norm2(q)))

    return {'kernel': ker_gap, 'image': img_gap}


def verify_cone_decomposition(m, tol=DEFAULT_TOL_REL):
    """Cohomology of cone, kernel and cokernel complexes.

    :param ComplexMorphism m: morphism
    :param float tol: relative rank tolerance

    :return ConeDecompositionReport:
    """
    cone = cohomology(mapping_cone(m), tol)
    ker = cohomology(kernel_complex(m, tol)[0], tol)
    coker = cohomology(cokernel_complex(m, tol)[0], tol)
    report = ConeDecompositionReport(
        cone.dims, ker.dims, coker.dims, assumption_dims(m, tol)
    )
    if not report.consistent:
        Logger.error(
            'Cone dims {} do not split into {} and {} although the '
            'quotients vanish'.format(
                report.cone_dims, report.ker_dims, report.coker_dims)
        )

    return report


def counterexample_instance(t1):
    """Morphism 0 -> H -(-1)-> H -> 0 over 0 -> L -(1)-> L -> 0.

    The verticals are (0, T_1, 0); its cone is exact for every T_1 while
    the kernel complex is exact only for T_1 = 0.

    :param t1: square matrix on H = L = C^m
    """
    t1 = as_matrix(t1, 'T_1')
    m = t1.shape[0]
    if t1.shape != (m, m):
        raise StructuralError('T_1 must be square, got {}'.format(t1.shape))
    eye = np.eye(m, dtype=np.complex128)
    source = FiniteComplex(
        [np.zeros((m, 0), dtype=np.complex128), -eye], spaces=[0, m, m]
    )
    target = FiniteComplex(
        [eye, np.zeros((0, m), dtype=np.complex128)], spaces=[m, m, 0]
    )
    verticals = [
        np.zeros((m, 0), dtype=np.complex128),
        t1,
        np.zeros((0, m), dtype=np.complex128),
    ]

    return ComplexMorphism(source, target, verticals)


def random_surjective_morphism(rng, n_spaces=4, max_dim=6):
    """Seeded morphism with surjective verticals.

    The source is L_j + K_j with differential ((Q_j, 0), (C_j, k_j)) where
    C_j = X_{j+1} Q_j - k_j X_j, and T_j projects onto L_j. Unitary changes
    of basis hide the block structure.

    :param rng: numpy Generator
    :param int n_spaces: number of spaces
    :param int max_dim: largest source space dimension

    :return ComplexMorphism:
    """
    half = max(1, max_dim // 2)
    l_dims = [int(n) for n in rng.integers(0, half + 1, size=n_spaces)]
    k_dims = [int(n) for n in rng.integers(0, half + 1, size=n_spaces)]
    target = complex_from_ranks(rng, l_dims, random_ranks(rng, l_dims))
    kappa = complex_from_ranks(rng, k_dims, random_ranks(rng, k_dims))
    homotopy = [rng.standard_normal((k, l)) + 1j * rng.standard_normal((k, l))
                for k, l in zip(k_dims, l_dims)]

    h_dims = [l + k for l, k in zip(l_dims, k_dims)]
    w = [random_unitary(rng, n) for n in h_dims]
    v = [random_unitary(rng, n) for n in l_dims]
    diffs = []
    for j in range(n_spaces - 1):
        q, k = target.differential(j), kappa.differential(j)
        c = homotopy[j + 1] @ q - k @ homotopy[j]
        block = np.block([
            [q, np.zeros((l_dims[j + 1], k_dims[j]))],
            [c, k],
        ])
        diffs.append(w[j + 1] @ block @ w[j].conj().T)
    verticals = [
        v[j] @ np.hstack([np.eye(l_dims[j]),
                          np.zeros((l_dims[j], k_dims[j]))]) @ w[j].conj().T
        for j in range(n_spaces)
    ]
    target_diffs = [v[j + 1] @ target.differential(j) @ v[j].conj().T
                    for j in range(n_spaces - 1)]

    return ComplexMorphism(
        FiniteComplex(diffs, spaces=h_dims),
        FiniteComplex(target_diffs, spaces=l_dims),
        verticals
    )
