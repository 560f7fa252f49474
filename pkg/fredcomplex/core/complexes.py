"""Finite Hilbert space complexes.

A complex is stored as its differentials A_0, ..., A_N acting between
spaces of dimensions n_0, ..., n_{N+1}. Cohomology is read off twice,
from the kernels of the Laplacians and from rank-nullity, and both counts
must agree.
"""

import itertools
from collections import namedtuple

import numpy as np
import scipy.linalg

from fredcomplex.core import Surface
from fredcomplex.core.numlin import (
    DEFAULT_TOL_REL, as_matrix, norm2, rank_tol, pinv, projector,
    svd_decision
)
from fredcomplex.exceptions import (
    StructuralError, CompositionViolation, CohomologyMismatch,
    LaplacianSingular
)
from fredcomplex.providers import Logger

# relative composition norm accepted as zero
COMPOSITION_TOL = 1e-10


class FiniteComplex(object):
    """Graded sequence of complex matrices.

    :param differentials: matrices A_0..A_N, A_j of shape n_{j+1} x n_j
    :param spaces: dimensions n_0..n_{N+1}, required when there are no
        differentials
    """

    def __init__(self, differentials, spaces=None):
        mats = [as_matrix(a, 'A_{}'.format(j))
                for j, a in enumerate(differentials)]
        if spaces is None:
            if not mats:
                raise StructuralError(
                    'spaces must be given for a complex without differentials'
                )
            spaces = [mats[0].shape[1]] + [a.shape[0] for a in mats]
        spaces = [int(n) for n in spaces]
        if len(spaces) != len(mats) + 1:
            raise StructuralError(
                '{} spaces do not fit {} differentials'.format(
                    len(spaces), len(mats))
            )
        for j, a in enumerate(mats):
            if a.shape != (spaces[j + 1], spaces[j]):
                raise StructuralError(
                    'shape {} does not map C^{} to C^{}'.format(
                        a.shape, spaces[j], spaces[j + 1]),
                    position=j
                )
            a.setflags(write=False)

        self._differentials = tuple(mats)
        self._spaces = tuple(spaces)

    @property
    def differentials(self):
        return self._differentials

    @property
    def spaces(self):
        return self._spaces

    @property
    def length(self):
        """Number of differentials."""
        return len(self._differentials)

    def differential(self, j):
        """A_j, with zero maps outside 0..N."""
        if 0 <= j < self.length:
            return self._differentials[j]
        rows = self._spaces[j + 1] if 0 <= j + 1 < len(self._spaces) else 0
        cols = self._spaces[j] if 0 <= j < len(self._spaces) else 0
        return np.zeros((rows, cols), dtype=np.complex128)

    def scale(self):
        """Largest spectral norm of a differential, at least one."""
        return max([1.0] + [norm2(a) for a in self._differentials])

    def __repr__(self):
        return 'FiniteComplex(spaces={})'.format(list(self._spaces))


class ValidationReport(object):
    """Relative composition norms of a complex."""

    def __init__(self, defects, tol):
        self.defects = defects
        self.tol = tol

    @property
    def max_defect(self):
        return max(self.defects) if self.defects else 0.0

    @property
    def passed(self):
        return self.max_defect <= self.tol


class CohomologyReport(object):
    """Cohomology dimensions with harmonic projectors.

    :param dims: dimension of cohomology per position
    :param harmonic_projectors: orthogonal projectors onto ker of the
        Laplacians
    :param marginal: True if any rank decision was marginal
    :param thresholds: threshold used per position
    """

    def __init__(self, dims, harmonic_projectors, marginal, thresholds):
        self.dims = list(dims)
        self.harmonic_projectors = harmonic_projectors
        self.marginal = marginal
        self.thresholds = list(thresholds)

    @property
    def index(self):
        return sum((-1) ** j * d for j, d in enumerate(self.dims))

    @property
    def exact(self):
        return all(d == 0 for d in self.dims)

    def to_json(self):
        return {
            'dims': self.dims,
            'index': self.index,
            'marginal': self.marginal,
            'thresholds': [float(t) for t in self.thresholds],
        }


class Parametrix(object):
    """Operators B_j with the remainders 1 - A_{j-1}B_{j-1} - B_jA_j."""

    def __init__(self, operators, remainders):
        self.operators = operators
        self.remainders = remainders

    def complex_defects(self):
        """||B_j B_{j+1}|| per position."""
        return [norm2(self.operators[j] @ self.operators[j + 1])
                for j in range(len(self.operators) - 1)]

    def scale(self):
        return max([1.0] + [norm2(b) for b in self.operators])


class FamilyComplex(object):
    """Complexes over a grid of labelled parameter points.

    :param parameter_points: list of labels, one per fiber
    :param fibers: list of FiniteComplex sharing graded dimensions
    """

    def __init__(self, parameter_points, fibers):
        if len(parameter_points) != len(fibers):
            raise StructuralError(
                '{} points for {} fibers'.format(
                    len(parameter_points), len(fibers))
            )
        if fibers:
            spaces = fibers[0].spaces
            for i, fiber in enumerate(fibers):
                if fiber.spaces != spaces:
                    raise StructuralError(
                        'fiber {} has spaces {}, expected {}'.format(
                            i, list(fiber.spaces), list(spaces))
                    )
        self.parameter_points = list(parameter_points)
        self.fibers = list(fibers)

    @property
    def spaces(self):
        return self.fibers[0].spaces if self.fibers else ()

    def __len__(self):
        return len(self.fibers)

    def __iter__(self):
        return iter(zip(self.parameter_points, self.fibers))


LiftResult = namedtuple('LiftResult', ['complex', 'corrections'])


def relative_composition(a_next, a):
    """||A_{j+1}A_j|| / (1 + ||A_{j+1}|| ||A_j||)."""
    return norm2(a_next @ a) / (1.0 + norm2(a_next) * norm2(a))


def validate(c, tol=COMPOSITION_TOL, raise_on_violation=False):
    """Compute the relative composition norm of consecutive differentials.

    :param FiniteComplex c: complex to check
    :param float tol: accepted relative composition norm
    :param bool raise_on_violation: raise CompositionViolation instead of
        returning a failed report

    :return ValidationReport:
    """
    defects = []
    for j in range(c.length - 1):
        defect = relative_composition(c.differentials[j + 1],
                                      c.differentials[j])
        defects.append(defect)
        if defect > tol and raise_on_violation:
            raise CompositionViolation(j, defect)

    return ValidationReport(defects, tol)


def euler_characteristic(c):
    """Alternating sum of the space dimensions."""
    return sum((-1) ** j * n for j, n in enumerate(c.spaces))


def laplacians(c):
    """Laplacians A_{j-1}A_{j-1}* + A_j*A_j for positions 0..N+1."""
    result = []
    for j, n in enumerate(c.spaces):
        lap = np.zeros((n, n), dtype=np.complex128)
        if j > 0:
            a = c.differential(j - 1)
            lap += a @ a.conj().T
        if j < c.length:
            a = c.differential(j)
            lap += a.conj().T @ a
        result.append(0.5 * (lap + lap.conj().T))

    return result


def rank_scale(c):
    """Common scale of the rank thresholds used on one complex."""
    return c.scale() * max([1] + list(c.spaces))


def dirac(c, j):
    """Stacked operator (A_j ; A_{j-1}*) whose Gram matrix is Laplacian_j.

    Its singular values are those of A_j and A_{j-1}, not their squares.
    """
    return np.vstack([c.differential(j), c.differential(j - 1).conj().T])


def rank_nullity_dims(c, tol=DEFAULT_TOL_REL, scale=None):
    """n_j - rank A_j - rank A_{j-1} per position."""
    if scale is None:
        scale = rank_scale(c)
    ranks = [rank_tol(a, tol, scale) for a in c.differentials]
    dims = []
    for j, n in enumerate(c.spaces):
        d = n
        if j < c.length:
            d -= ranks[j].rank
        if j > 0:
            d -= ranks[j - 1].rank
        dims.append(d)

    return dims, ranks


def cohomology(c, tol=DEFAULT_TOL_REL):
    """Cohomology through Laplacian kernels, cross-checked by rank-nullity.

    The kernel of Laplacian_j is decided on its square root
    :func:`dirac`, with one absolute threshold for the whole complex.

    :param FiniteComplex c: complex
    :param float tol: relative rank tolerance

    :return CohomologyReport:
    """
    validate(c, raise_on_violation=True)
    scale = rank_scale(c)
    expected, ranks = rank_nullity_dims(c, tol, scale)
    marginal = any(r.marginal for r in ranks)

    dims = []
    projectors = []
    thresholds = []
    for j, n in enumerate(c.spaces):
        _, _, vh, decision = svd_decision(dirac(c, j), tol, True, scale)
        dim = n - decision.rank
        if dim != expected[j]:
            raise CohomologyMismatch(j, dim, expected[j])
        marginal = marginal or decision.marginal
        dims.append(dim)
        projectors.append(projector(vh[decision.rank:].conj().T))
        thresholds.append(decision.threshold_used)

    if marginal:
        Logger.warning('Marginal rank decision in cohomology of {}'.format(c))
    Logger.debug('Cohomology dims {}'.format(dims))

    return CohomologyReport(dims, projectors, marginal, thresholds)


def check_parametrix(c, operators):
    """Remainders 1 - A_{j-1}B_{j-1} - B_jA_j of a candidate parametrix.

    :param FiniteComplex c: complex
    :param operators: B_0..B_N, B_j of shape n_j x n_{j+1}

    :return Parametrix:
    """
    operators = [as_matrix(b, 'B_{}'.format(j))
                 for j, b in enumerate(operators)]
    if len(operators) != c.length:
        raise StructuralError('{} operators for {} differentials'.format(
            len(operators), c.length))
    for j, b in enumerate(operators):
        if b.shape != (c.spaces[j], c.spaces[j + 1]):
            raise StructuralError(
                'operator shape {}'.format(b.shape), position=j
            )

    remainders = []
    for j, n in enumerate(c.spaces):
        rem = np.eye(n, dtype=np.complex128)
        if j > 0:
            rem -= c.differential(j - 1) @ operators[j - 1]
        if j < c.length:
            rem -= operators[j] @ c.differential(j)
        remainders.append(rem)

    return Parametrix(operators, remainders)


def laplacian_pinv(c, j, tol=DEFAULT_TOL_REL, scale=None):
    """pinv(Laplacian_j) as pinv(D) pinv(D)* for D = dirac(c, j)."""
    root = pinv(dirac(c, j), tol, scale)

    return root @ root.conj().T


def hodge_parametrix(c, tol=DEFAULT_TOL_REL):
    """Parametrix B_j = pinv(Laplacian_j) A_j*.

    The remainders are the harmonic projectors and the parametrix is
    itself a complex.

    :param FiniteComplex c: complex
    :param float tol: relative rank tolerance

    :return Parametrix:
    """
    validate(c, raise_on_violation=True)
    scale = rank_scale(c)
    operators = [laplacian_pinv(c, j, tol, scale) @ c.differential(j).conj().T
                 for j in range(c.length)]

    return check_parametrix(c, operators)


def parametrix_defects(c, param, report=None, tol=DEFAULT_TOL_REL):
    """Distances of the remainders to the harmonic projectors.

    :return: (remainder defects, complex defects)
    """
    if report is None:
        report = cohomology(c, tol)
    rem = [norm2(r - p) for r, p in
           zip(param.remainders, report.harmonic_projectors)]

    return rem, param.complex_defects()


def transport_parametrix(c, param, isos):
    """Transport a complex and its parametrix along isomorphisms T_j.

    A'_j = T_{j+1} A_j T_j^-1 and S_j = T_j B_j T_{j+1}^-1.

    :param FiniteComplex c: complex
    :param Parametrix param: parametrix of c
    :param isos: invertible T_0..T_{N+1}

    :return: (FiniteComplex, Parametrix)
    """
    isos = [as_matrix(t, 'T_{}'.format(j)) for j, t in enumerate(isos)]
    if len(isos) != len(c.spaces):
        raise StructuralError('{} isomorphisms for {} spaces'.format(
            len(isos), len(c.spaces)))
    inverses = []
    for j, t in enumerate(isos):
        if t.shape != (c.spaces[j], c.spaces[j]):
            raise StructuralError('isomorphism shape {}'.format(t.shape),
                                  position=j)
        inverses.append(scipy.linalg.inv(t) if t.size else t)

    diffs = [isos[j + 1] @ a @ inverses[j]
             for j, a in enumerate(c.differentials)]
    ops = [isos[j] @ b @ inverses[j + 1]
           for j, b in enumerate(param.operators)]
    moved = FiniteComplex(diffs, spaces=c.spaces)

    return moved, check_parametrix(moved, ops)


def lift_quasicomplex(ops, tol=DEFAULT_TOL_REL,
                      composition_tol=COMPOSITION_TOL):
    """Correct a quasicomplex into a complex, top position first.

    The last operator is kept. Going down, A_{i-1} is replaced by
    Pi_i A_{i-1} where Pi_i = 1 - A_i* pinv(d_{i+1}) A_i projects onto
    ker A_i of the already corrected A_i. Operators composing to zero
    within composition_tol are kept untouched.

    :param ops: matrices A_0..A_N with chaining shapes
    :param float tol: relative rank tolerance
    :param float composition_tol: relative composition accepted as zero

    :return LiftResult: corrected complex and ||A~_j - A_j|| per position
    """
    ops = [as_matrix(a, 'A_{}'.format(j)) for j, a in enumerate(ops)]
    # shape check only
    FiniteComplex(ops)
    lifted = list(ops)
    n_ops = len(ops)
    for i in range(n_ops - 1, 0, -1):
        a_i = lifted[i]
        a_prev = ops[i - 1]
        if relative_composition(a_i, a_prev) <= composition_tol:
            continue
        root = a_i.conj().T
        if i + 1 < n_ops:
            root = np.vstack([lifted[i + 1], root])
        decision = rank_tol(root, tol)
        if decision.marginal:
            raise LaplacianSingular(
                i + 1, 'marginal rank decision, threshold {:.3e}'.format(
                    decision.threshold_used)
            )
        inv_root = pinv(root, tol)
        lap_inv = inv_root @ inv_root.conj().T
        proj = np.eye(a_i.shape[1]) - a_i.conj().T @ lap_inv @ a_i
        lifted[i - 1] = proj @ a_prev
        defect = relative_composition(a_i, lifted[i - 1])
        if defect > composition_tol:
            raise LaplacianSingular(
                i + 1, 'composition {:.3e} left after correction'.format(
                    defect)
            )

    corrections = [norm2(a - b) for a, b in zip(lifted, ops)]
    Logger.debug('Quasicomplex corrections {}'.format(
        ['{:.3e}'.format(x) for x in corrections]))

    return LiftResult(FiniteComplex(lifted), corrections)


def _octahedron():
    vertices = 6
    # vertex 2k and 2k+1 are antipodal
    edges = [(a, b) for a, b in itertools.combinations(range(vertices), 2)
             if a // 2 != b // 2]
    faces = [tuple(sorted(f)) for f in itertools.product(
        (0, 1), (2, 3), (4, 5))]

    return vertices, edges, sorted(faces)


def _simplicial_coboundaries(vertices, edges, faces):
    edge_index = {e: i for i, e in enumerate(edges)}
    d0 = np.zeros((len(edges), vertices), dtype=np.complex128)
    for i, (a, b) in enumerate(edges):
        d0[i, a] = -1
        d0[i, b] = 1
    d1 = np.zeros((len(faces), len(edges)), dtype=np.complex128)
    for i, (a, b, c) in enumerate(faces):
        d1[i, edge_index[(b, c)]] = 1
        d1[i, edge_index[(a, c)]] = -1
        d1[i, edge_index[(a, b)]] = 1

    return d0, d1


def _torus_coboundaries(size):
    def vertex(i, j):
        return (i % size) * size + (j % size)

    n_v = size * size
    # horizontal edges first, then vertical ones
    def hedge(i, j):
        return vertex(i, j)

    def vedge(i, j):
        return n_v + vertex(i, j)

    d0 = np.zeros((2 * n_v, n_v), dtype=np.complex128)
    d1 = np.zeros((n_v, 2 * n_v), dtype=np.complex128)
    for i in range(size):
        for j in range(size):
            d0[hedge(i, j), vertex(i, j)] -= 1
            d0[hedge(i, j), vertex(i + 1, j)] += 1
            d0[vedge(i, j), vertex(i, j)] -= 1
            d0[vedge(i, j), vertex(i, j + 1)] += 1

            face = vertex(i, j)
            d1[face, hedge(i, j)] += 1
            d1[face, vedge(i + 1, j)] += 1
            d1[face, hedge(i, j + 1)] -= 1
            d1[face, vedge(i, j)] -= 1

    return d0, d1


def derham_demo(surface, size=4):
    """Cochain complex of a closed discrete surface.

    :param surface: Surface value or name ('sphere-octahedron',
        'torus-grid')
    :param int size: cells per direction of the torus grid

    :return FiniteComplex: C^0 -> C^1 -> C^2 with incidence matrices
    """
    if isinstance(surface, str):
        surface = Surface()[surface]
    if surface == Surface.sphere_octahedron:
        d0, d1 = _simplicial_coboundaries(*_octahedron())
    elif surface == Surface.torus_grid:
        if size < 3:
            raise StructuralError(
                'torus grid needs at least 3 cells per direction'
            )
        d0, d1 = _torus_coboundaries(size)
    else:
        raise StructuralError('unknown surface {}'.format(surface))

    return FiniteComplex([d0, d1])


def random_unitary(rng, n):
    """Haar-distributed unitary matrix."""
    if n == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    z = (rng.standard_normal((n, n)) +
         1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = scipy.linalg.qr(z)
    d = np.diag(r)

    return q * (d / np.abs(d))


def random_well_conditioned(rng, rows, cols, low=0.5, high=2.0):
    """Random matrix with singular values drawn from [low, high]."""
    k = min(rows, cols)
    u = random_unitary(rng, rows)[:, :k]
    v = random_unitary(rng, cols)[:, :k]
    s = rng.uniform(low, high, size=k)

    return (u * s) @ v.conj().T


def random_ranks(rng, spaces):
    """Ranks r_j with r_{j-1} + r_j <= n_j."""
    ranks = []
    prev = 0
    for j in range(len(spaces) - 1):
        bound = min(spaces[j] - prev, spaces[j + 1])
        r = int(rng.integers(0, bound + 1))
        ranks.append(r)
        prev = r

    return ranks


def complex_from_ranks(rng, spaces, ranks):
    """Random complex with prescribed differential ranks.

    A_j maps the last r_j directions of a random unitary frame of C^{n_j}
    onto the first r_j directions of the frame of C^{n_{j+1}}.
    """
    frames = [random_unitary(rng, n) for n in spaces]
    diffs = []
    for j, r in enumerate(ranks):
        n = spaces[j]
        g = random_well_conditioned(rng, r, r)
        diffs.append(
            frames[j + 1][:, :r] @ g @ frames[j][:, n - r:].conj().T
        )

    return FiniteComplex(diffs, spaces=spaces)


def random_complex(rng, n_spaces=4, max_dim=6, exact=False):
    """Seeded random complex with known cohomology.

    :param rng: numpy Generator
    :param int n_spaces: number of spaces
    :param int max_dim: largest space dimension
    :param bool exact: build an exact complex

    :return: (FiniteComplex, expected cohomology dims)
    """
    if exact:
        half = max(1, max_dim // 2)
        ranks = [int(rng.integers(1, half + 1))
                 for _ in range(n_spaces - 1)]
        padded = [0] + ranks + [0]
        spaces = [padded[j] + padded[j + 1] for j in range(n_spaces)]
    else:
        spaces = [int(n) for n in rng.integers(1, max_dim + 1,
                                               size=n_spaces)]
        ranks = random_ranks(rng, spaces)
    c = complex_from_ranks(rng, spaces, ranks)
    dims = [spaces[j] - (ranks[j] if j < len(ranks) else 0) -
            (ranks[j - 1] if j > 0 else 0) for j in range(len(spaces))]

    return c, dims


def complex_to_json(c):
    return {
        'spaces': list(c.spaces),
        'differentials': [
            [[[float(x.real), float(x.imag)] for x in row] for row in a]
            for a in c.differentials
        ],
    }


def complex_from_json(doc):
    diffs = []
    for j, a in enumerate(doc['differentials']):
        rows, cols = doc['spaces'][j + 1], doc['spaces'][j]
        arr = np.zeros((rows, cols), dtype=np.complex128)
        for r, row in enumerate(a):
            for k, (re, im) in enumerate(row):
                arr[r, k] = complex(re, im)
        diffs.append(arr)

    return FiniteComplex(diffs, spaces=doc['spaces'])
