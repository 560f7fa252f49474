"""Projected (Toeplitz) complexes and their lift to ordinary complexes.

A projected complex carries idempotents P_j, not necessarily Hermitian,
and differentials already compressed between their ranges. The lift
A_[j] acts on H_j + H_{j-1} + ... + H_0 and alternates (1 - P) and P
blocks below the diagonal, which leaves the cohomology unchanged.
"""

from collections import namedtuple

import numpy as np
import scipy.linalg

from fredcomplex.core.complexes import (
    FiniteComplex, cohomology, hodge_parametrix, relative_composition,
    complex_from_ranks, random_complex, random_ranks,
    random_well_conditioned,
    COMPOSITION_TOL
)
from fredcomplex.core.numlin import (
    DEFAULT_TOL_REL, as_matrix, norm2, rank_tol, kernel_basis,
    image_basis, projector, subspace_distance, svd_decision
)
from fredcomplex.exceptions import (
    StructuralError, CompositionViolation, LaplacianSingular
)
from fredcomplex.providers import Logger

IDEMPOTENT_TOL = 1e-10

BlockSlot = namedtuple('BlockSlot', ['space', 'offset', 'size'])


class ProjectedComplex(object):
    """Complex A_j compressed by idempotents P_j.

    :param FiniteComplex ambient: differentials on the spaces H_j
    :param projections: P_0..P_{N+1}, square idempotents
    :param bool check: verify idempotency, compression and composition
    """

    def __init__(self, ambient, projections, check=True):
        projections = [as_matrix(p, 'P_{}'.format(j))
                       for j, p in enumerate(projections)]
        if len(projections) != len(ambient.spaces):
            raise StructuralError('{} projections for {} spaces'.format(
                len(projections), len(ambient.spaces)))
        for j, p in enumerate(projections):
            if p.shape != (ambient.spaces[j], ambient.spaces[j]):
                raise StructuralError(
                    'projection shape {}'.format(p.shape), position=j
                )
            p.setflags(write=False)

        self.ambient = ambient
        self.projections = tuple(projections)
        if check:
            self.check()

    @property
    def spaces(self):
        return self.ambient.spaces

    @property
    def length(self):
        return self.ambient.length

    def check(self, tol=IDEMPOTENT_TOL):
        """Raise StructuralError or CompositionViolation on a broken
        invariant."""
        for j, p in enumerate(self.projections):
            scale = 1.0 + norm2(p) ** 2
            if norm2(p @ p - p) > tol * scale:
                raise StructuralError('P is not idempotent', position=j)
        for j, a in enumerate(self.ambient.differentials):
            p, p_next = self.projections[j], self.projections[j + 1]
            eye_next = np.eye(p_next.shape[0])
            eye = np.eye(p.shape[0])
            scale = 1.0 + norm2(a) * (1.0 + norm2(p) + norm2(p_next))
            defect = max(norm2((eye_next - p_next) @ a),
                         norm2(a @ (eye - p)))
            if defect > tol * scale:
                raise StructuralError(
                    'differential is not compressed ({:.3e})'.format(defect),
                    position=j
                )
            if j + 1 < self.length:
                comp = relative_composition(
                    self.ambient.differentials[j + 1], a)
                if comp > COMPOSITION_TOL:
                    raise CompositionViolation(j, comp)


class LiftedComplex(object):
    """Lift together with its block layout.

    :param FiniteComplex lift: complex on H_j + H_{j-1} + ... + H_0
    :param layout: per position the list of BlockSlot, block 0 is H_j
    :param int faithful: positions 0..faithful-1 carry the cohomology of
        the projected complex
    """

    def __init__(self, lift, layout, faithful):
        self.lift = lift
        self.layout = layout
        self.faithful = faithful

    def block(self, matrix, position_out, position_in, space_out, space_in):
        """Sub-block of an operator between two lift positions."""
        rows = next(s for s in self.layout[position_out]
                    if s.space == space_out)
        cols = next(s for s in self.layout[position_in]
                    if s.space == space_in)

        return matrix[rows.offset:rows.offset + rows.size,
                      cols.offset:cols.offset + cols.size]


def _layout(spaces, j):
    slots = []
    offset = 0
    for space in range(j, -1, -1):
        size = spaces[space] if space < len(spaces) else 0
        slots.append(BlockSlot(space, offset, size))
        offset += size

    return slots


def lift(pc):
    """Lift of a projected complex.

    A_[j] sends (u_j, u_{j-1}, ..., u_0) to
    (A_j u_j, (1-P_j) u_j, P_{j-1} u_{j-1}, (1-P_{j-2}) u_{j-2}, ...).
    The finite complex is a semi-infinite one with zero tail; positions
    0..N+2 are materialized and the last one is a truncation artifact.

    :param ProjectedComplex pc: projected complex

    :return LiftedComplex:
    """
    spaces = list(pc.spaces)
    n_pos = len(spaces) + 1
    layout = [_layout(spaces, j) for j in range(n_pos)]
    dims = [sum(s.size for s in slots) for slots in layout]

    def proj(space):
        if space < len(spaces):
            return pc.projections[space]
        return np.zeros((0, 0), dtype=np.complex128)

    diffs = []
    for j in range(n_pos - 1):
        out_slots, in_slots = layout[j + 1], layout[j]
        block = np.zeros((dims[j + 1], dims[j]), dtype=np.complex128)
        if j < pc.length:
            top = out_slots[0]
            src = in_slots[0]
            rows = slice(top.offset, top.offset + top.size)
            block[rows, src.offset:src.offset + src.size] = \
                pc.ambient.differential(j)
        for m, src in enumerate(in_slots):
            dst = out_slots[m + 1]
            p = proj(src.space)
            if m % 2 == 0:
                p = np.eye(src.size) - p
            block[dst.offset:dst.offset + dst.size,
                  src.offset:src.offset + src.size] = p
        diffs.append(block)

    return LiftedComplex(FiniteComplex(diffs, spaces=dims), layout,
                         faithful=len(spaces))


def restricted_complex(pc, tol=DEFAULT_TOL_REL):
    """Differentials restricted to im P_j in orthonormal range bases.

    :return: (FiniteComplex, list of bases U_j)
    """
    bases = [image_basis(p, tol) for p in pc.projections]
    diffs = [bases[j + 1].conj().T @ a @ bases[j]
             for j, a in enumerate(pc.ambient.differentials)]

    return FiniteComplex(diffs, spaces=[u.shape[1] for u in bases]), bases


def projected_cohomology(pc, tol=DEFAULT_TOL_REL):
    """Cohomology of A_j : im P_j -> im P_{j+1}, computed without lifting.

    :return CohomologyReport:
    """
    return cohomology(restricted_complex(pc, tol)[0], tol)


def lift_cohomology_dims(lifted, tol=DEFAULT_TOL_REL):
    """Cohomology dims of the lift on its faithful positions."""
    report = cohomology(lifted.lift, tol)

    return report.dims[:lifted.faithful], report


def check_lift_subspaces(pc, lifted=None, tol=DEFAULT_TOL_REL):
    """Kernel and image of the lift against the block formulas.

    ker A_[j] = ker(A_j | im P_j) + ker P_{j-1} + im P_{j-2} + ...
    and im A_[j-1] = A_{j-1}(im P_{j-1}) + ker P_{j-1} + im P_{j-2} + ...

    :return dict: largest 'kernel' and 'image' gap over faithful positions
    """
    if lifted is None:
        lifted = lift(pc)
    restricted, bases = restricted_complex(pc, tol)
    ker_gap = 0.0
    img_gap = 0.0
    for j in range(lifted.faithful):
        slots = lifted.layout[j]
        tails = []
        for m, slot in enumerate(slots[1:], start=1):
            p = pc.projections[slot.space]
            tails.append(kernel_basis(p, tol) if m % 2 else
                         image_basis(p, tol))

        head_ker = bases[j] @ kernel_basis(restricted.differential(j), tol)
        expected = scipy.linalg.block_diag(head_ker, *tails)
        computed = kernel_basis(lifted.lift.differential(j), tol)
        ker_gap = max(ker_gap, subspace_distance(computed, expected))

        if j > 0:
            head_img = bases[j] @ image_basis(
                restricted.differential(j - 1), tol)
        else:
            head_img = np.zeros((slots[0].size, 0), dtype=np.complex128)
        expected = scipy.linalg.block_diag(head_img, *tails)
        computed = image_basis(lifted.lift.differential(j - 1), tol) \
            if j > 0 else np.zeros((expected.shape[0], 0))
        img_gap = max(img_gap, subspace_distance(computed, expected))

    return {'kernel': ker_gap, 'image': img_gap}


class ProjectedParametrix(object):
    """B_j = P_j B_[j] P_{j+1} with remainders R_j.

    A_{j-1}B_{j-1} + B_jA_j = P_j - R_j.
    """

    def __init__(self, operators, remainders):
        self.operators = operators
        self.remainders = remainders

    def remainder_ranks(self, tol=DEFAULT_TOL_REL):
        """Ranks with an absolute threshold, so a vanishing R_j has rank 0."""
        return [rank_tol(r, tol, max(1.0, norm2(r)) * max(r.shape)).rank
                if r.size else 0 for r in self.remainders]

    def complex_defects(self):
        """||B_j B_{j+1}||, reported only."""
        return [norm2(self.operators[j] @ self.operators[j + 1])
                for j in range(len(self.operators) - 1)]


def extract_parametrix(pc, lifted, lift_param):
    """Parametrix of a projected complex from a parametrix of its lift.

    :param ProjectedComplex pc: projected complex
    :param LiftedComplex lifted: its lift
    :param Parametrix lift_param: parametrix of lifted.lift

    :return ProjectedParametrix:
    """
    ops = []
    for j in range(pc.length):
        b = lifted.block(lift_param.operators[j], j, j + 1, j, j + 1)
        ops.append(pc.projections[j] @ b @ pc.projections[j + 1])

    remainders = []
    for j, p in enumerate(pc.projections):
        rem = np.array(p)
        if j > 0:
            rem = rem - pc.ambient.differential(j - 1) @ ops[j - 1]
        if j < pc.length:
            rem = rem - ops[j] @ pc.ambient.differential(j)
        remainders.append(rem)

    param = ProjectedParametrix(ops, remainders)
    Logger.debug('Projected parametrix complex defects {}'.format(
        ['{:.3e}'.format(x) for x in param.complex_defects()]))

    return param


def projected_hodge_parametrix(pc, tol=DEFAULT_TOL_REL):
    """Lift, take the Hodge parametrix of the lift and extract it.

    :return: (LiftedComplex, ProjectedParametrix)
    """
    lifted = lift(pc)

    return lifted, extract_parametrix(pc, lifted,
                                      hodge_parametrix(lifted.lift, tol))


def _block_split(top_dims, spaces):
    for j, (t, n) in enumerate(zip(top_dims, spaces)):
        if not 0 <= t <= n:
            raise StructuralError(
                'top block {} does not fit space {}'.format(t, n), position=j
            )


def _projection_correction(j, ops, lifted, projections, tol,
                           composition_tol):
    """Pi_{j+1} A_j with Pi_{j+1} onto ker A~_{j+1} and im P_{j+1}."""
    a_next = lifted[j + 1]
    p_next = projections[j + 1]
    stacked = np.vstack([a_next, np.eye(p_next.shape[0]) - p_next])
    _, _, vh, decision = svd_decision(stacked, tol, full_matrices=True)
    if decision.marginal:
        raise LaplacianSingular(
            j + 1, 'marginal rank decision, threshold {:.3e}'.format(
                decision.threshold_used)
        )
    corrected = projector(vh[decision.rank:].conj().T) @ ops[j]

    defect = relative_composition(a_next, corrected)
    if defect > composition_tol:
        raise LaplacianSingular(
            j + 1, 'composition {:.3e} left after correction'.format(defect)
        )

    return corrected


def _block_correction(j, ops, lifted, projections, top_dims, tol,
                      composition_tol):
    """Pi_{j+1} A_j with the columns ((a_j), (0)) restored bit for bit.

    Pi_{j+1} fixes im ((a_j), (0)) whenever the corrected A~_{j+1} keeps
    a_{j+1} and a_{j+1} a_j = 0, so only K_j and Q_j move.
    """
    t_in = top_dims[j]
    corrected = _projection_correction(j, ops, lifted, projections, tol,
                                       composition_tol)
    drift = norm2(corrected[:, :t_in] - ops[j][:, :t_in]) / \
        max(1.0, norm2(ops[j]))
    if drift > composition_tol:
        raise LaplacianSingular(
            j, 'upper block moved by {:.3e}, a_(j+1) a_j does not '
            'vanish'.format(drift)
        )
    corrected[:, :t_in] = ops[j][:, :t_in]

    defect = relative_composition(lifted[j + 1], corrected)
    if defect > composition_tol:
        raise LaplacianSingular(
            j + 1, 'composition {:.3e} left after restoring the upper '
            'block'.format(defect)
        )

    return corrected


def lift_quasicomplex_projected(ops, projections,
                                preserve_upper_triangular=False,
                                top_dims=None, tol=DEFAULT_TOL_REL,
                                composition_tol=COMPOSITION_TOL):
    """Correct compressed operators into a projected complex.

    Top position first, A_j is replaced by Pi_{j+1} A_j with Pi_{j+1}
    the orthogonal projection onto ker A~_{j+1} intersected with
    im P_{j+1}.

    With preserve_upper_triangular the operators are read as blocks
    ((a_j, K_j), (0, Q_j)) along the splits given by top_dims, with
    a_{j+1} a_j = 0. K_j and Q_j are corrected; a_j and the zero block are
    kept bit for bit.

    :param ops: compressed operators A_0..A_N
    :param projections: idempotents P_0..P_{N+1}
    :param bool preserve_upper_triangular: keep the diagonal blocks
    :param top_dims: dimension of the upper block per space
    :param float tol: relative rank tolerance
    :param float composition_tol: relative composition accepted as zero

    :return: (ProjectedComplex, corrections per position)
    """
    ops = [as_matrix(a, 'A_{}'.format(j)) for j, a in enumerate(ops)]
    shapes = FiniteComplex(ops)
    if preserve_upper_triangular:
        if top_dims is None:
            raise StructuralError('top_dims required to preserve blocks')
        _block_split(top_dims, shapes.spaces)

    lifted = list(ops)
    for j in range(len(ops) - 2, -1, -1):
        if relative_composition(lifted[j + 1], ops[j]) <= composition_tol:
            continue
        if preserve_upper_triangular:
            lifted[j] = _block_correction(j, ops, lifted, projections,
                                          top_dims, tol, composition_tol)
        else:
            lifted[j] = _projection_correction(j, ops, lifted, projections,
                                               tol, composition_tol)

    corrections = [norm2(a - b) for a, b in zip(lifted, ops)]
    Logger.debug('Projected quasicomplex corrections {}'.format(
        ['{:.3e}'.format(x) for x in corrections]))
    pc = ProjectedComplex(FiniteComplex(lifted, spaces=shapes.spaces),
                          projections)

    return pc, corrections


def random_idempotent(rng, n, p, hermitian=False):
    """Idempotent of rank p on C^n, oblique unless hermitian.

    :return: (P, S, S^-1) with P = S diag(1_p, 0) S^-1
    """
    if hermitian:
        s = random_well_conditioned(rng, n, n, 1.0, 1.0)
    else:
        s = random_well_conditioned(rng, n, n)
    d = np.zeros(n)
    d[:p] = 1.0
    s_inv = scipy.linalg.inv(s) if n else s

    return (s * d) @ s_inv, s, s_inv


def random_projected_complex(rng, n_spaces=4, max_dim=6, exact=False,
                             hermitian=False):
    """Seeded projected complex with oblique idempotents.

    A_j = S_{j+1}[:, :p_{j+1}] alpha_j S_j^-1[:p_j, :] for a random complex
    alpha on the ranges.

    :param rng: numpy Generator
    :param int n_spaces: number of spaces
    :param int max_dim: largest space dimension
    :param bool exact: make the projected complex exact
    :param bool hermitian: use orthogonal projections

    :return ProjectedComplex:
    """
    if exact:
        half = max(1, max_dim // 4)
        ranks = [int(rng.integers(0, half + 1)) for _ in range(n_spaces - 1)]
        padded = [0] + ranks + [0]
        ranges = [padded[j] + padded[j + 1] for j in range(n_spaces)]
    else:
        ranges = [int(n) for n in rng.integers(0, max_dim // 2 + 1,
                                               size=n_spaces)]
        ranks = random_ranks(rng, ranges)
    spaces = [p + int(rng.integers(0, max_dim - p + 1)) for p in ranges]
    alpha = complex_from_ranks(rng, ranges, ranks)

    frames = [random_idempotent(rng, n, p, hermitian)
              for n, p in zip(spaces, ranges)]
    diffs = []
    for j in range(n_spaces - 1):
        s_next = frames[j + 1][1]
        s_inv = frames[j][2]
        diffs.append(s_next[:, :ranges[j + 1]] @ alpha.differential(j) @
                     s_inv[:ranges[j], :])

    return ProjectedComplex(FiniteComplex(diffs, spaces=spaces),
                            [f[0] for f in frames])


def random_block_quasicomplex(rng, n_spaces=4, max_dim=6, eps=1e-3,
                              exact_upper=True):
    """Block upper-triangular projected quasicomplex.

    A_j = ((a_j, K_j), (0, Q_j)) with a a complex on the upper blocks
    (exact when exact_upper), Q a projected complex on the lower blocks and
    K_j an eps-sized coupling; P_j = diag(1, p_j).

    :return: (ops, projections, top_dims)
    """
    half = max(1, max_dim // 2)
    upper, _ = random_complex(rng, n_spaces, max_dim, exact=exact_upper)
    tops = list(upper.spaces)
    lower = random_projected_complex(rng, n_spaces, half)
    bottoms = list(lower.spaces)

    ops = []
    for j in range(n_spaces - 1):
        p_in = lower.projections[j]
        coupling = eps * (rng.standard_normal((tops[j + 1], bottoms[j])) +
                          1j * rng.standard_normal((tops[j + 1], bottoms[j])))
        coupling = coupling @ p_in
        ops.append(np.block([
            [upper.differential(j), coupling],
            [np.zeros((bottoms[j + 1], tops[j])),
             lower.ambient.differential(j)],
        ]))
    projections = [scipy.linalg.block_diag(np.eye(t), p)
                   for t, p in zip(tops, lower.projections)]

    return ops, projections, tops
