"""Boundary symbols on the half-line in the orthonormal Laguerre basis.

Functions on [0, inf) are expanded in l_k(r) = sqrt(2) L_k(2r) exp(-r).
Differentiation maps span{l_0..l_N} into itself, so every symbol below is
an exact matrix on that span and e^{-r} = l_0 / sqrt(2).

Points of the co-sphere bundle of the unit ball boundary are pairs (z, xi)
of unit vectors in C^2 with Re <xi, z> = 0. The pairing z.xi is the
Hermitian product sum z_j conj(xi_j).
"""

from collections import namedtuple

import numpy as np
import scipy.integrate
import scipy.linalg
import scipy.special

from fredcomplex.core import FiberClass
from fredcomplex.core.circle_algebra import WINDING_DEFECT
from fredcomplex.core.complexes import (
    FamilyComplex, FiniteComplex, cohomology, euler_characteristic,
    random_complex, rank_scale
)
from fredcomplex.core.numlin import (
    DEFAULT_TOL_REL, as_matrix, norm2, pinv, rank_tol, svd_decision,
    image_basis, kernel_basis, cokernel_basis, projector, sum_basis,
    subspace_distance
)
from fredcomplex.exceptions import (
    StructuralError, DecayViolation, SectionJump, SymbolVanishes
)
from fredcomplex.providers import Logger

SCAN_TRUNCATION = 32
FAMILY_TRUNCATION = 16
SCAN_TOL = 1e-8
SKEW_RADIUS = 0.05
COSPHERE_TOL = 1e-12
SECTION_JUMP = 0.2
FILL_JUMP = 0.2
ORIENTATION = 'xi2-ccw'
# |<s+, s->| on the equator for unit sections spanning one line
TRANSITION_FLOOR = 0.5


class LaguerreBasis(object):
    """Orthonormal Laguerre functions l_0..l_N.

    :param int N: highest mode
    """

    def __init__(self, N):
        if N < 0:
            raise StructuralError(
                'truncation must be nonnegative, got {}'.format(N))
        self.N = int(N)

    @property
    def size(self):
        return self.N + 1

    @property
    def derivative_matrix(self):
        """d/dr: -1 on the diagonal, -2 above it."""
        D = -2.0 * np.triu(np.ones((self.size, self.size)), k=1)
        D -= np.eye(self.size)

        return D.astype(np.complex128)

    @property
    def boundary_functional(self):
        """Evaluation at r = 0 as a row vector."""
        return np.full((1, self.size), np.sqrt(2.0), dtype=np.complex128)

    def exp_coeffs(self, beta):
        """Coefficients of exp(-beta r).

        :param complex beta: decay rate, Re beta > 0

        :return: column vector of length N+1
        """
        beta = complex(beta)
        if beta.real <= 0.0:
            raise DecayViolation(
                'exp(-beta r) does not decay for beta = {:.6g}'.format(beta)
            )

        return _exp_coeffs(np.array([beta]), self.size).reshape(-1, 1)

    def inclusion(self, finer, blocks=1):
        """Embedding of blocks copies of this span into a finer truncation."""
        if finer.N < self.N:
            raise StructuralError('inclusion into a coarser truncation')
        single = np.eye(finer.size, self.size, dtype=np.complex128)

        return np.kron(np.eye(blocks), single)

    def functions(self, r):
        return laguerre_functions(r, self.N)


def _exp_coeffs(betas, size):
    """sqrt(2) (beta - 1)^k / (beta + 1)^(k+1) per row, k = 0..size-1."""
    betas = np.asarray(betas, dtype=np.complex128)
    ratio = (betas - 1.0) / (betas + 1.0)
    powers = np.ones((betas.size, size), dtype=np.complex128)
    if size > 1:
        powers[:, 1:] = np.cumprod(
            np.repeat(ratio[:, None], size - 1, axis=1), axis=1)

    return np.sqrt(2.0) * powers / (betas + 1.0)[:, None]


def laguerre_functions(r, N):
    """Values l_k(r) for k = 0..N.

    :param r: points on the half-line
    :param int N: highest mode

    :return: array of shape len(r) x (N+1)
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    k = np.arange(N + 1)
    values = scipy.special.eval_laguerre(k[None, :], 2.0 * r[:, None])

    return np.sqrt(2.0) * values * np.exp(-r)[:, None]


def cutoff(t):
    """Smooth plateau: 1 for |t| <= 1/4, 0 for |t| >= 1/2."""
    t = np.abs(np.asarray(t))
    s = np.clip((0.5 - t) / 0.25, 0.0, 1.0)

    def h(x):
        with np.errstate(divide='ignore'):
            return np.where(x > 0.0, np.exp(-1.0 / np.where(x > 0, x, 1.0)),
                            0.0)

    value = h(s) / (h(s) + h(1.0 - s))
    if value.ndim == 0:
        return float(value)
    return value


class CospherePoint(object):
    """Point (z, xi) of the co-sphere bundle of the unit sphere in C^2."""

    def __init__(self, z, xi, tol=COSPHERE_TOL):
        z = np.asarray(z, dtype=np.complex128).reshape(-1)
        xi = np.asarray(xi, dtype=np.complex128).reshape(-1)
        if z.shape != (2,) or xi.shape != (2,):
            raise StructuralError('z and xi must lie in C^2')
        for name, vec in (('z', z), ('xi', xi)):
            if abs(np.linalg.norm(vec) - 1.0) > tol:
                raise StructuralError(
                    '|{}| = {:.15g}, expected 1'.format(
                        name, np.linalg.norm(vec))
                )
        self.z = z
        self.xi = xi
        if abs(self.residual) > tol:
            raise StructuralError(
                'Re <xi, z> = {:.3e} off the co-sphere bundle'.format(
                    self.residual)
            )

    @property
    def residual(self):
        return float(np.vdot(self.z, self.xi).real)

    @property
    def pairing(self):
        """z.xi = sum z_j conj(xi_j), purely imaginary."""
        return complex(np.vdot(self.xi, self.z))

    @property
    def xi_perp(self):
        return np.array([np.conj(self.xi[1]), -np.conj(self.xi[0])])

    @property
    def skew_distance(self):
        """|1 + i z.xi|, zero exactly on z = i xi."""
        return abs(1.0 + 1j * self.pairing)

    def flat(self):
        """Real coordinates z1_re, z1_im, z2_re, z2_im, then xi."""
        coords = []
        for vec in (self.z, self.xi):
            for c in vec:
                coords.extend([float(c.real), float(c.imag)])
        return coords

    @classmethod
    def random(cls, rng):
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        z /= np.linalg.norm(z)
        xi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        xi -= np.vdot(z, xi).real * z
        xi /= np.linalg.norm(xi)

        return cls(z, xi)

    @classmethod
    def skew(cls, xi):
        xi = np.asarray(xi, dtype=np.complex128)
        xi = xi / np.linalg.norm(xi)

        return cls(1j * xi, xi)

    @classmethod
    def on_fiber(cls, t, theta, z0=(1.0, 0.0)):
        """Point over z0 with xi = U (i t, sqrt(1-t^2) e^{i theta}).

        U is the SU(2) matrix taking (1, 0) to z0.
        """
        rotation = _rotation(z0)
        xi = np.array([1j * t, np.sqrt(max(0.0, 1.0 - t * t)) *
                       np.exp(1j * theta)])

        return cls(rotation[:, 0], rotation @ xi)

    def __repr__(self):
        return 'CospherePoint(z={}, xi={})'.format(self.z, self.xi)


def _rotation(z0):
    z0 = np.asarray(z0, dtype=np.complex128)
    z0 = z0 / np.linalg.norm(z0)

    return np.array([[z0[0], -np.conj(z0[1])],
                     [z0[1], np.conj(z0[0])]])


class HalfLineOperator(object):
    """Laguerre matrix of a boundary symbol with a factored phase.

    :param matrix: (N+1) x (N+1) matrix
    :param LaguerreBasis basis: basis of domain and codomain
    :param int phase: power of e^{i theta} factored out of the symbol
    """

    def __init__(self, matrix, basis, phase=0):
        self.matrix = as_matrix(matrix, 'symbol')
        self.basis = basis
        self.phase = phase

    def kernel(self, tol=DEFAULT_TOL_REL):
        return kernel_basis(self.matrix, tol)

    def rank(self, tol=DEFAULT_TOL_REL):
        return rank_tol(self.matrix, tol).rank

    def surjective(self, tol=DEFAULT_TOL_REL):
        """Range contains l_0..l_{N-1}, the modes not cut by truncation."""
        n = self.basis.N
        return rank_tol(self.matrix[:n], tol).rank == n

    def bijective(self, tol=DEFAULT_TOL_REL):
        return self.rank(tol) == self.basis.size


def quadrature_exp_coeffs(beta, N):
    """Coefficients of exp(-beta r) by adaptive quadrature.

    Independent of the closed form in :meth:`LaguerreBasis.exp_coeffs`.
    """
    coeffs = np.zeros(N + 1, dtype=np.complex128)
    for k in range(N + 1):
        def integrand(r, part):
            value = np.exp(-beta * r) * laguerre_functions(r, k)[0, k]
            return value.real if part == 0 else value.imag
        re = scipy.integrate.quad(integrand, 0.0, np.inf, args=(0,),
                                  epsabs=1e-13, epsrel=1e-12, limit=200)[0]
        im = scipy.integrate.quad(integrand, 0.0, np.inf, args=(1,),
                                  epsabs=1e-13, epsrel=1e-12, limit=200)[0]
        coeffs[k] = re + 1j * im

    return coeffs.reshape(-1, 1)


def cr_boundary_symbol(tau, N):
    """Boundary symbol -1/2 (d/dr + tau) of the Cauchy-Riemann operator.

    :param int tau: +1 or -1
    :param int N: highest Laguerre mode
    """
    if tau not in (1, -1):
        raise StructuralError('tau must be +1 or -1, got {}'.format(tau))
    basis = LaguerreBasis(N)
    matrix = -0.5 * (basis.derivative_matrix + tau * np.eye(basis.size))

    return HalfLineOperator(matrix, basis, phase=1)


def cr_symbol_cohomology(tau, N, tol=SCAN_TOL):
    """Stable kernel and cokernel dimension of the boundary symbol."""
    coarse = FiniteComplex([cr_boundary_symbol(tau, N).matrix])
    fine = FiniteComplex([cr_boundary_symbol(tau, N + 1).matrix])
    inc = LaguerreBasis(N).inclusion(LaguerreBasis(N + 1))

    return stable_cohomology(coarse, fine, [inc, inc], tol)


def _blocks(basis, point, which):
    D = basis.derivative_matrix
    eye = np.eye(basis.size)
    return [point.xi[j] * eye - 1j * point.z[j] * D for j in which]


def dolbeault_d0(point, N):
    """d0(z, xi) u = xi u - i z u' as a 2(N+1) x (N+1) matrix."""
    return np.vstack(_blocks(LaguerreBasis(N), point, (0, 1)))


def dolbeault_d1(point, N):
    """d1(z, xi) v = v . xi_perp - i v' . z_perp as (N+1) x 2(N+1)."""
    first, second = _blocks(LaguerreBasis(N), point, (1, 0))

    return np.hstack([first, -second])


def dolbeault_k0(point, N):
    """Coefficients of v = phi xi_perp exp(-beta r), beta = i / z.xi.

    phi = cutoff(1 + i z.xi) vanishes away from the skew diagonal.

    :return: column of length 2(N+1)
    """
    phi = cutoff(point.skew_distance)
    size = 2 * (N + 1)
    if phi == 0.0:
        return np.zeros((size, 1), dtype=np.complex128)
    beta = 1j / point.pairing
    coeffs = LaguerreBasis(N).exp_coeffs(beta)

    return phi * np.kron(point.xi_perp.reshape(-1, 1), coeffs)


def augmented_d0(point, N):
    """(d0 k0) acting on span{l_k} + C."""
    return np.hstack([dolbeault_d0(point, N), dolbeault_k0(point, N)])


def dolbeault_complex(point, N, augmented=False):
    """Truncated symbol complex at one co-sphere point."""
    d0 = augmented_d0(point, N) if augmented else dolbeault_d0(point, N)

    return FiniteComplex([d0, dolbeault_d1(point, N)])


StableCohomology = namedtuple('StableCohomology', ['dims', 'marginal'])


def stable_cohomology(fiber, finer, inclusions, tol=SCAN_TOL):
    """Cohomology classes at one truncation that survive the next.

    The j-th dimension is the rank of H_j(fiber) -> H_j(finer), i.e.
    rank [i Z_j, B_j] - rank B_j with Z_j the cycles of fiber and B_j
    the boundaries of finer.

    :param FiniteComplex fiber: coarse truncation
    :param FiniteComplex finer: finer truncation
    :param inclusions: chain maps fiber -> finer, one per position
    :param float tol: relative rank tolerance

    :return StableCohomology:
    """
    scale = max(rank_scale(fiber), rank_scale(finer))
    marginal = False
    dims = []
    for j in range(len(fiber.spaces)):
        _, _, vh, zdec = svd_decision(fiber.differential(j), tol, True, scale)
        cycles = inclusions[j] @ vh[zdec.rank:].conj().T
        u, _, _, bdec = svd_decision(finer.differential(j - 1), tol,
                                     scale=scale)
        boundaries = u[:, :bdec.rank]
        both = rank_tol(np.hstack([cycles, boundaries]), tol)
        marginal = marginal or zdec.marginal or bdec.marginal or both.marginal
        dims.append(both.rank - bdec.rank)

    return StableCohomology(tuple(dims), marginal)


def _scan_inclusions(N, augmented):
    coarse, fine = LaguerreBasis(N), LaguerreBasis(N + 1)
    first = coarse.inclusion(fine)
    if augmented:
        first = scipy.linalg.block_diag(first, np.eye(1))

    return [first, coarse.inclusion(fine, 2), coarse.inclusion(fine)]


def classify_fiber(dims, marginal, skew_distance, radius=SKEW_RADIUS):
    if marginal:
        return FiberClass.marginal
    if tuple(dims) == (0, 0, 0):
        return FiberClass.exact
    if tuple(dims) == (1, 1, 0) and skew_distance < radius:
        return FiberClass.skew_diagonal
    return FiberClass.unexpected


class ScanReport(object):
    """Per-point truncation-stable cohomology of the Dolbeault symbols."""

    columns = ['point_id', 'z1_re', 'z1_im', 'z2_re', 'z2_im',
               'xi1_re', 'xi1_im', 'xi2_re', 'xi2_im',
               'h0', 'h1', 'h2', 'marginal', 'skew_distance', 'class']

    def __init__(self, points, dims, marginal, classes, family):
        self.points = points
        self.dims = dims
        self.marginal = marginal
        self.classes = classes
        self.family = family

    def rows(self):
        for i, point in enumerate(self.points):
            yield [i] + point.flat() + list(self.dims[i]) + [
                int(self.marginal[i]), point.skew_distance, self.classes[i]
            ]

    def counts(self):
        result = {}
        for c in self.classes:
            result[c] = result.get(c, 0) + 1
        return result

    def dims_where(self, predicate):
        return [d for p, d in zip(self.points, self.dims) if predicate(p)]


def exactness_scan(points, N=SCAN_TRUNCATION, tol=SCAN_TOL,
                   radius=SKEW_RADIUS, augmented=False):
    """Classify Dolbeault fibers by their stable cohomology.

    :param points: list of CospherePoint
    :param int N: highest Laguerre mode
    :param float tol: relative rank tolerance
    :param float radius: skew-diagonal detection radius
    :param bool augmented: scan (d0 k0) instead of d0

    :return ScanReport:
    """
    inclusions = _scan_inclusions(N, augmented)
    fibers = []
    dims = []
    marginal = []
    classes = []
    for i, point in enumerate(points):
        coarse = dolbeault_complex(point, N, augmented)
        fine = dolbeault_complex(point, N + 1, augmented)
        stable = stable_cohomology(coarse, fine, inclusions, tol)
        fibers.append(coarse)
        dims.append(stable.dims)
        marginal.append(stable.marginal)
        classes.append(classify_fiber(stable.dims, stable.marginal,
                                      point.skew_distance, radius))
        if classes[-1] == FiberClass.unexpected:
            Logger.warning('Point {} has cohomology {} at skew distance '
                           '{:.3f}'.format(i, stable.dims,
                                           point.skew_distance))

    report = ScanReport(points, dims, marginal, classes,
                        FamilyComplex(list(range(len(points))), fibers))
    Logger.info('Exactness scan over {} points: {}'.format(
        len(points), report.counts()))

    return report


def scan_points(rng, count, skew_count=0):
    """Random co-sphere points followed by exact skew-diagonal ones."""
    points = [CospherePoint.random(rng) for _ in range(count)]
    for _ in range(skew_count):
        xi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        points.append(CospherePoint.skew(xi))

    return points


def closed_form_sections(point, N):
    """Kernel sections s+ = (0, 1) and s- = (phi conj(xi_1) e^{-beta r}, xi_2).

    Coordinates are taken in the frame where the base point is (1, 0).
    s+ spans the kernel of (d0 k0) where phi = 0 and s- wherever
    xi_1 != 0 on the cutoff support.

    :return: (s_plus, s_minus) vectors of length N+2
    """
    rotation = _rotation(point.z)
    xi = rotation.conj().T @ point.xi
    s_plus = np.zeros(N + 2, dtype=np.complex128)
    s_plus[-1] = 1.0
    s_minus = np.zeros(N + 2, dtype=np.complex128)
    s_minus[-1] = xi[1]
    phi = cutoff(point.skew_distance)
    if phi > 0.0:
        beta = 1j / point.pairing
        coeffs = LaguerreBasis(N).exp_coeffs(beta).ravel()
        s_minus[:-1] = phi * np.conj(xi[0]) * coeffs

    return s_plus, s_minus


def _line_gap(u, v):
    """Gap between the lines spanned by rows of unit vectors."""
    overlap = np.abs(np.sum(u.conj() * v, axis=-1))
    return np.sqrt(np.clip(1.0 - overlap ** 2, 0.0, 1.0))


def _align(vectors, reference):
    """Scale rows so their product with reference is real positive."""
    phase = np.sum(reference.conj() * vectors, axis=-1)
    phase = np.where(np.abs(phase) > 0, phase / np.abs(phase), 1.0)

    return vectors * phase.conj()[:, None]


class ClutchingReport(object):
    """Equator transition of the kernel line bundle of (d0 k0)."""

    def __init__(self, winding, max_section_gap, closed_form_gap, angles,
                 transition, kernel_gap):
        self.winding = winding
        self.max_section_gap = max_section_gap
        self.closed_form_gap = closed_form_gap
        self.angles = angles
        self.transition = transition
        self.kernel_gap = kernel_gap
        self.orientation = ORIENTATION

    def to_json(self):
        return {
            'winding': self.winding,
            'max_section_gap': self.max_section_gap,
            'closed_form_gap': self.closed_form_gap,
            'kernel_gap': self.kernel_gap,
            'orientation': self.orientation,
        }

    def plot_rows(self):
        phase = np.unwrap(np.angle(self.transition))
        return [[float(a), float(p)] for a, p in zip(self.angles, phase)]


def _latitude_batch(rotation, t, angles, N):
    """(d0 k0) and closed-form sections along one latitude of a fiber sphere.

    Points are xi = U (i t, sqrt(1-t^2) e^{i a}) over the base point U e_1,
    all angles a at once.

    :return: (matrices E x 2(N+1) x (N+2), s_plus, s_minus) with unit rows
    """
    basis = LaguerreBasis(N)
    D = basis.derivative_matrix
    eye = np.eye(basis.size)
    count = len(angles)
    local = np.stack([
        np.full(count, 1j * t),
        np.sqrt(max(0.0, 1.0 - t * t)) * np.exp(1j * np.asarray(angles)),
    ], axis=1)
    xis = local @ rotation.T
    z = rotation[:, 0]
    pairing = xis.conj() @ z
    phi = np.atleast_1d(cutoff(np.abs(1.0 + 1j * pairing)))

    coeffs = np.zeros((count, basis.size), dtype=np.complex128)
    active = phi > 0.0
    if np.any(active):
        beta = 1j / pairing[active]
        if np.any(beta.real <= 0.0):
            raise DecayViolation(
                'exp(-beta r) does not decay at latitude t = {:.6g}'.format(t)
            )
        coeffs[active] = _exp_coeffs(beta, basis.size)

    d0 = np.concatenate([xis[:, j, None, None] * eye - 1j * z[j] * D
                         for j in (0, 1)], axis=1)
    k0 = phi[:, None] * np.concatenate([
        np.conj(xis[:, 1])[:, None] * coeffs,
        -np.conj(xis[:, 0])[:, None] * coeffs,
    ], axis=1)
    matrices = np.concatenate([d0, k0[:, :, None]], axis=2)

    s_plus = np.zeros((count, basis.size + 1), dtype=np.complex128)
    s_plus[:, -1] = 1.0
    s_minus = np.concatenate([
        (phi * np.conj(local[:, 0]))[:, None] * coeffs,
        local[:, 1, None],
    ], axis=1)
    s_minus /= np.linalg.norm(s_minus, axis=1)[:, None]

    return matrices, s_plus, s_minus


def _hemisphere(z0, sign, angles, N, meridian_steps):
    """Sweep meridians from a pole to the equator with parallel phases."""
    rotation = _rotation(z0)
    gap = 0.0
    closed_gap = 0.0
    kernel_gap = np.inf
    previous = None
    for psi in np.linspace(0.0, 0.5 * np.pi, meridian_steps + 1):
        mats, s_plus, s_minus = _latitude_batch(
            rotation, sign * np.cos(psi), angles, N)
        _, s, vh = np.linalg.svd(mats, full_matrices=False)
        vectors = vh[:, -1, :].conj()
        kernel_gap = min(kernel_gap, float(np.min(
            s[:, -2] / np.maximum(s[:, -1], np.finfo(float).tiny))))
        if previous is None:
            vectors = _align(vectors, np.broadcast_to(vectors[0],
                                                      vectors.shape))
        else:
            step = float(np.max(_line_gap(previous, vectors)))
            if step > SECTION_JUMP:
                raise SectionJump(step, 'meridian at psi {:.4f}'.format(psi))
            gap = max(gap, step)
            vectors = _align(vectors, previous)

        expected = s_plus if sign > 0 else s_minus
        closed_gap = max(closed_gap,
                         float(np.max(_line_gap(expected, vectors))))
        previous = vectors

    around = float(np.max(_line_gap(previous, np.roll(previous, -1, axis=0))))
    if around > SECTION_JUMP:
        raise SectionJump(around, 'equator')

    return previous, max(gap, around), closed_gap, kernel_gap


def kernel_bundle_clutching(z0=(1.0, 0.0), equator_grid=512,
                            N=SCAN_TRUNCATION, meridian_steps=128):
    """Winding of the transition between the hemisphere kernel sections.

    The fiber sphere over z0 is parametrized by xi_1 = i t; s+ is swept
    from t = 1 and s- from t = -1, the skew-diagonal pole. The transition
    g = <s+, s-> on the equator is read counterclockwise in xi_2.

    :param z0: base point on the unit sphere in C^2
    :param int equator_grid: number of equator angles
    :param int N: highest Laguerre mode
    :param int meridian_steps: steps from pole to equator

    :return ClutchingReport:
    """
    angles = 2.0 * np.pi * np.arange(equator_grid) / equator_grid
    Logger.info('Sweeping hemispheres: {} meridians, {} steps'.format(
        equator_grid, meridian_steps))
    upper, gap_up, closed_up, kgap_up = _hemisphere(
        z0, 1.0, angles, N, meridian_steps)
    lower, gap_low, closed_low, kgap_low = _hemisphere(
        z0, -1.0, angles, N, meridian_steps)

    transition = np.sum(upper.conj() * lower, axis=1)
    if np.min(np.abs(transition)) < TRANSITION_FLOOR:
        raise SymbolVanishes(
            'transition degenerates to {:.3e} on the equator'.format(
                np.min(np.abs(transition)))
        )
    steps = np.angle(np.roll(transition, -1) / transition)
    turns = np.sum(steps) / (2.0 * np.pi)
    winding = int(np.rint(turns))
    if abs(turns - winding) > WINDING_DEFECT:
        raise SymbolVanishes('transition turns {:.3f} times'.format(turns))

    report = ClutchingReport(
        winding, max(gap_up, gap_low), max(closed_up, closed_low), angles,
        transition, min(kgap_up, kgap_low)
    )
    Logger.info('Clutching winding {} ({}), max section gap {:.3e}'.format(
        winding, ORIENTATION, report.max_section_gap))

    return report


class IndexElementReport(object):
    """Result of complementing a family to exactness beyond position 0.

    :param j0_dims: dim J_0 per fiber
    :param ells: fill ranks l_1..l_{n+1}
    :param euler: Euler characteristic per input fiber
    """

    def __init__(self, j0_dims, ells, euler, exact, pi_defects,
                 continuity, potentials, j0_projectors, winding=None):
        self.j0_dims = list(j0_dims)
        self.ells = list(ells)
        self.euler = list(euler)
        self.exact = list(exact)
        self.pi_defects = pi_defects
        self.continuity = continuity
        self.potentials = potentials
        self.j0_projectors = j0_projectors
        self.winding = winding

    @property
    def virtual_ranks(self):
        shift = sum((-1) ** j * ell for j, ell in enumerate(self.ells, 1))
        return [d + shift for d in self.j0_dims]

    @property
    def conserved(self):
        return self.virtual_ranks == self.euler

    @property
    def index_element(self):
        terms = ['[J0]']
        for j, ell in enumerate(self.ells, 1):
            if ell:
                terms.append('{} [C^{}]'.format('-' if j % 2 else '+', ell))
        return ' '.join(terms)

    @property
    def verdict(self):
        if self.winding:
            return 'nonvanishing(winding {})'.format(self.winding)
        return 'vanishing-candidate'

    def to_json(self):
        return {
            'j0_dims': self.j0_dims,
            'ells': self.ells,
            'euler': self.euler,
            'conserved': self.conserved,
            'exact_beyond_zero': all(self.exact),
            'index_element': self.index_element,
            'pi_defects': self.pi_defects,
            'max_continuity_defect': max(
                [0.0] + [d for row in self.continuity.values() for d in row]),
            'verdict': self.verdict,
        }


def _pad(fill, width):
    rows, cols = fill.shape
    return np.hstack([fill, np.zeros((rows, width - cols),
                                     dtype=np.complex128)])


def _span_distances(spans):
    result = []
    for u, v in zip(spans[:-1], spans[1:]):
        if u.shape[1] != v.shape[1]:
            result.append(1.0)
        else:
            result.append(subspace_distance(u, v))
    return result


def complement_family(fc, tol=DEFAULT_TOL_REL, winding=None):
    """Add trivial summands until every fiber is exact beyond position 0.

    The last map is filled to a surjection by the cokernel. Going down,
    the fill of a_{i-1} is pi_i b where b spans the cohomology of the
    already augmented complex at position i and pi_i = 1 - a_i* d^+ a_i
    projects onto ker a_i. Fill ranks are padded with zero columns to
    their maximum over the grid.

    :param FamilyComplex fc: family of finite complexes
    :param float tol: relative rank tolerance
    :param winding: clutching winding used for the verdict

    :return: (FamilyComplex, IndexElementReport)
    """
    fibers = fc.fibers
    if not fibers or fibers[0].length == 0:
        raise StructuralError('family needs fibers with a differential')
    n = fibers[0].length - 1
    aug = [dict() for _ in fibers]
    ells = {}
    continuity = {}
    pi_defects = {'idempotent': 0.0, 'hermitian': 0.0, 'annihilated': 0.0}

    fills = [cokernel_basis(f.differential(n), tol) for f in fibers]
    ells[n + 1] = max(k.shape[1] for k in fills)
    continuity[n + 1] = _span_distances(fills)
    for x, f in enumerate(fibers):
        aug[x][n] = np.hstack([f.differential(n), _pad(fills[x], ells[n + 1])])

    for i in range(n, 0, -1):
        fills = []
        for x, f in enumerate(fibers):
            a_i = aug[x][i]
            root = a_i.conj().T
            if i + 1 in aug[x]:
                root = np.vstack([aug[x][i + 1], root])
            inv_root = pinv(root, tol)
            pi = np.eye(a_i.shape[1]) - \
                a_i.conj().T @ inv_root @ inv_root.conj().T @ a_i
            scale = 1.0 + norm2(a_i)
            pi_defects['idempotent'] = max(pi_defects['idempotent'],
                                           norm2(pi @ pi - pi))
            pi_defects['hermitian'] = max(pi_defects['hermitian'],
                                          norm2(pi - pi.conj().T))
            pi_defects['annihilated'] = max(pi_defects['annihilated'],
                                            norm2(a_i @ pi) / scale)

            prev = f.differential(i - 1)
            embedded = np.vstack(
                [prev, np.zeros((ells[i + 1], prev.shape[1]))])
            span = sum_basis(image_basis(embedded, tol),
                             image_basis(a_i.conj().T, tol), tol_rel=tol)
            fills.append(pi @ cokernel_basis(span, tol))
        ells[i] = max(b.shape[1] for b in fills)
        continuity[i] = _span_distances([image_basis(b, tol) for b in fills])

        for x, f in enumerate(fibers):
            prev = f.differential(i - 1)
            fill = _pad(fills[x], ells[i])
            top = f.spaces[i]
            aug[x][i - 1] = np.block([
                [prev, fill[:top]],
                [np.zeros((ells[i + 1], prev.shape[1])), fill[top:]],
            ])

    for level, defects in continuity.items():
        worst = max([0.0] + defects)
        if worst > FILL_JUMP:
            Logger.warning('discontinuous-fill: level {} jumps by {:.3f} '
                           'between adjacent fibers'.format(level, worst))

    augmented = []
    j0_dims = []
    potentials = []
    j0_projectors = []
    exact = []
    for x, f in enumerate(fibers):
        complex_ = FiniteComplex([aug[x][j] for j in range(n + 1)])
        augmented.append(complex_)
        potential = kernel_basis(aug[x][0], tol)
        j0_dims.append(potential.shape[1])
        potentials.append(potential)
        j0_projectors.append(projector(potential))
        dims = cohomology(complex_, tol).dims
        exact.append(all(d == 0 for d in dims[1:]))

    report = IndexElementReport(
        j0_dims, [ells[j] for j in range(1, n + 2)],
        [euler_characteristic(f) for f in fibers], exact, pi_defects,
        continuity, potentials, j0_projectors, winding
    )
    if not report.conserved:
        Logger.error('Euler characteristic not conserved: {} vs {}'.format(
            report.virtual_ranks, report.euler))
    Logger.info('Index element {} over {} fibers, J0 dims {}'.format(
        report.index_element, len(fibers), sorted(set(j0_dims))))

    return FamilyComplex(fc.parameter_points, augmented), report


def dolbeault_family(N=FAMILY_TRUNCATION, z0=(1.0, 0.0),
                     heights=(-1.0, -0.9, -0.7, -0.5, -0.2, 0.2, 0.6, 1.0),
                     angles=8, augmented=True):
    """Dolbeault symbol complexes on a grid of the fiber sphere over z0."""
    points = []
    fibers = []
    for t in heights:
        for a in 2.0 * np.pi * np.arange(angles) / angles:
            point = CospherePoint.on_fiber(t, a, z0)
            points.append(point)
            fibers.append(dolbeault_complex(point, N, augmented))

    return FamilyComplex(points, fibers)


def random_family(rng, n_points=16, n_spaces=4, max_dim=5):
    """Seeded family obtained by rotating one complex along a loop.

    A_j(s) = exp(i s H_{j+1}) A_j exp(-i s H_j) with random Hermitian H_j,
    so fibers vary continuously and share their cohomology.

    :return: (FamilyComplex, expected cohomology dims)
    """
    base, dims = random_complex(rng, n_spaces=n_spaces, max_dim=max_dim)
    generators = []
    for n in base.spaces:
        h = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        generators.append(0.5 * (h + h.conj().T))
    params = np.linspace(0.0, 1.0, n_points)
    fibers = []
    for s in params:
        rot = [scipy.linalg.expm(1j * s * h) for h in generators]
        fibers.append(FiniteComplex(
            [rot[j + 1] @ a @ rot[j].conj().T
             for j, a in enumerate(base.differentials)],
            spaces=base.spaces))

    return FamilyComplex([float(s) for s in params], fibers), dims


def degenerating_family(base, n_points=9):
    """Family t A over t in [-1, 1]; every differential vanishes at t = 0.

    Cohomology and cokernel dimensions jump at the origin while the Euler
    characteristic stays fixed.

    :param FiniteComplex base: complex A at t = 1
    :param int n_points: odd number of grid points, so t = 0 is sampled

    :return FamilyComplex:
    """
    if n_points < 3 or n_points % 2 == 0:
        raise StructuralError(
            'odd grid of at least 3 points required, got {}'.format(n_points))
    params = np.linspace(-1.0, 1.0, n_points)
    params[n_points // 2] = 0.0
    fibers = [FiniteComplex([t * a for a in base.differentials],
                            spaces=base.spaces) for t in params]

    return FamilyComplex([float(t) for t in params], fibers)
