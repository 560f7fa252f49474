"""Operators on the unit circle in the Fourier basis.

Functions on the circle are sampled on 2K+1 uniform points so that the
Fourier modes -K..K pair up symmetrically. Multipliers are diagonal,
multiplication by f has the Toeplitz entries f^(m - n), and the Calderon
projector keeps the nonnegative modes.
"""

import numpy as np
import scipy.linalg

from fredcomplex.core.numlin import DEFAULT_TOL_REL, rank_tol
from fredcomplex.exceptions import SymbolVanishes, UnstableIndex
from fredcomplex.providers import Logger

DEFAULT_TRUNCATIONS = (128, 256)
# Fourier coefficients below this fraction of the largest one are zero
BAND_TOL = 1e-13
ALIASING_TOL = 1e-8
WINDING_DEFECT = 0.1
SMOOTHING_EXPONENT = 4.0
SMOOTHING_RESIDUAL = 0.5
SMOOTHING_FLOOR = 1e-13


class CircleOperator(object):
    """Matrix in the Fourier basis with the modes of its rows and columns.

    :param matrix: entries indexed by (row mode, column mode)
    :param modes_out: Fourier modes of the rows
    :param modes_in: Fourier modes of the columns
    :param str kind: 'multiplier', 'multiplication', 'toeplitz' or 'general'
    """

    def __init__(self, matrix, modes_out, modes_in, kind='general'):
        self.matrix = np.asarray(matrix, dtype=np.complex128)
        self.modes_out = np.asarray(modes_out, dtype=int)
        self.modes_in = np.asarray(modes_in, dtype=int)
        self.kind = kind

    @property
    def N(self):
        return int(np.max(np.abs(self.modes_in))) if self.modes_in.size else 0

    def support(self):
        """Modes kept by a 0/1 diagonal multiplier."""
        return self.modes_in[np.abs(np.diag(self.matrix) - 1.0) < 0.5]

    def __matmul__(self, other):
        if not np.array_equal(self.modes_in, other.modes_out):
            raise ValueError('mode sets do not chain')
        return CircleOperator(self.matrix @ other.matrix, self.modes_out,
                              other.modes_in)


def modes(N):
    return np.arange(-N, N + 1)


def grid(K):
    """2K+1 uniform angles on [0, 2 pi)."""
    return 2.0 * np.pi * np.arange(2 * K + 1) / (2 * K + 1)


def sample(f, K):
    """Values of f on the 2K+1 point grid, or f itself if already sampled."""
    if not callable(f):
        return np.asarray(f, dtype=np.complex128)
    theta = grid(K)

    return np.broadcast_to(np.asarray(f(theta), dtype=np.complex128),
                           theta.shape)


def coefficients(f, K):
    """Fourier coefficients f^(-K..K) from 2K+1 samples.

    :param f: callable on angles or array of 2K+1 samples
    :param int K: largest mode

    :return: array with f^(k) at index k + K
    """
    values = sample(f, K)
    if values.shape != (2 * K + 1,):
        raise ValueError('expected {} samples, got {}'.format(
            2 * K + 1, values.shape))
    fhat = np.fft.fftshift(np.fft.fft(values)) / (2 * K + 1)
    scale = np.max(np.abs(fhat))
    if scale > 0 and max(abs(fhat[0]), abs(fhat[-1])) > ALIASING_TOL * scale:
        Logger.warning(
            'Possible aliasing: |f^(+-{})| = {:.3e}'.format(
                K, max(abs(fhat[0]), abs(fhat[-1])))
        )

    return fhat


def bandwidth(fhat, tol=BAND_TOL):
    """Largest |k| with a non-negligible coefficient."""
    K = (len(fhat) - 1) // 2
    scale = np.max(np.abs(fhat))
    if scale == 0:
        return 0
    present = np.nonzero(np.abs(fhat) > tol * scale)[0] - K

    return int(np.max(np.abs(present)))


def multiplier(symbol, N):
    """Diagonal Fourier multiplier n -> symbol(n) on modes -N..N."""
    n = modes(N)
    values = np.asarray(symbol(n), dtype=np.complex128)
    values = np.broadcast_to(values, n.shape)

    return CircleOperator(np.diag(values), n, n, kind='multiplier')


def calderon_projector(N):
    """Projection onto the nonnegative modes."""
    return multiplier(lambda n: (n >= 0).astype(float), N)


def order_reduction(s, N):
    """Multiplier (1 + n^2)^(s/2)."""
    return multiplier(lambda n: (1.0 + n.astype(float) ** 2) ** (s / 2.0), N)


def _toeplitz_block(fhat, K, rows, cols):
    """Entries f^(m - n) for row modes m and column modes n."""
    diff = np.subtract.outer(rows, cols)
    block = np.zeros(diff.shape, dtype=np.complex128)
    inside = np.abs(diff) <= K
    block[inside] = fhat[diff[inside] + K]

    return block


def multiplication(f, N):
    """Multiplication by f on modes -N..N.

    :param f: callable on angles
    :param int N: truncation
    """
    K = 2 * N
    fhat = coefficients(f, K)
    matrix = scipy.linalg.toeplitz(fhat[K:], fhat[K::-1])

    return CircleOperator(matrix, modes(N), modes(N), kind='multiplication')


def toeplitz_compress(f, p0, p1, K=None):
    """Compression P_1 M_f P_0 between the ranges of two 0/1 multipliers.

    :param f: callable on angles or samples
    :param CircleOperator p0: multiplier giving the domain modes
    :param CircleOperator p1: multiplier giving the codomain modes
    :param int K: largest Fourier mode of f used, defaults to the widest
        mode difference

    :return CircleOperator: matrix on the range bases
    """
    cols = p0.support()
    rows = p1.support()
    if K is None:
        K = max(p0.N + p1.N, 1)
    fhat = coefficients(f, K)

    return CircleOperator(_toeplitz_block(fhat, K, rows, cols), rows, cols,
                          kind='toeplitz')


def conjugate(f):
    return lambda theta: np.conj(f(theta))


def exact_section(f, N, K=None):
    """Toeplitz operator restricted to Hardy modes 0..N, all output kept.

    The codomain runs over the modes 0..N+b with b the bandwidth of f, so
    no row of T_f is cut off.
    """
    if K is None:
        K = 4 * N
    b = bandwidth(coefficients(f, K))

    return toeplitz_compress(f, calderon_projector(N),
                             calderon_projector(N + b), K=max(K, N + b))


class IndexReport(object):
    """Kernel dimensions of T_f and T_f* per truncation."""

    def __init__(self, kernels, cokernels, singular_values):
        self.kernels = kernels
        self.cokernels = cokernels
        self.singular_values = singular_values

    @property
    def indices(self):
        return {n: self.kernels[n] - self.cokernels[n] for n in self.kernels}

    @property
    def stable(self):
        return len(set(self.indices.values())) == 1

    @property
    def index(self):
        if not self.stable:
            raise UnstableIndex(self.indices)
        return next(iter(self.indices.values()))


def index_report(f, truncations=DEFAULT_TRUNCATIONS, tol=DEFAULT_TOL_REL):
    """dim ker T_f - dim ker T_f* on exact sections at each truncation.

    :param f: symbol, callable on angles
    :param truncations: Hardy truncations N
    :param float tol: relative rank tolerance

    :return IndexReport:
    """
    kernels = {}
    cokernels = {}
    singular_values = None
    for n in truncations:
        section = exact_section(f, n).matrix
        adjoint = exact_section(conjugate(f), n).matrix
        decision = rank_tol(section, tol)
        kernels[n] = section.shape[1] - decision.rank
        cokernels[n] = adjoint.shape[1] - rank_tol(adjoint, tol).rank
        singular_values = decision.singular_values
        Logger.debug('Truncation {}: ker {} coker {}'.format(
            n, kernels[n], cokernels[n]))

    return IndexReport(kernels, cokernels, singular_values)


def fredholm_index(f, truncations=DEFAULT_TRUNCATIONS, tol=DEFAULT_TOL_REL):
    """Index of the Toeplitz operator with symbol f on the Hardy space.

    :raise UnstableIndex: truncations disagree
    """
    return index_report(f, truncations, tol).index


def winding_number(f, K=512):
    """Winding number of a nonvanishing symbol around zero.

    :param f: callable on angles or samples on a uniform grid
    :param int K: grid of 2K+1 points for callables

    :raise SymbolVanishes: min |f| < 1e-8 max |f| or non-integral winding
    """
    values = sample(f, K)
    magnitude = np.abs(values)
    if magnitude.max() == 0 or magnitude.min() < 1e-8 * magnitude.max():
        raise SymbolVanishes('min |f| = {:.3e}, max |f| = {:.3e}'.format(
            magnitude.min(), magnitude.max()))
    phase = np.unwrap(np.angle(np.append(values, values[0])))
    turns = (phase[-1] - phase[0]) / (2.0 * np.pi)
    winding = int(np.rint(turns))
    if abs(turns - winding) > WINDING_DEFECT:
        raise SymbolVanishes(
            'argument increment {:.3f} turns is not integral'.format(turns))

    return winding


def principal_symbol_values(op):
    """Values of a multiplier at the far modes: (sigma(+1), sigma(-1))."""
    diag = np.diag(op.matrix)

    return complex(diag[-1]), complex(diag[0])


def cr_problem_reduction(phi, truncations=DEFAULT_TRUNCATIONS,
                         tol=DEFAULT_TOL_REL):
    """Fredholm check of the boundary reduction C M_phi C on Hardy space.

    The operator is Fredholm exactly when phi does not vanish, and then
    its index is minus the winding number of phi.

    :param phi: symbol, callable on angles
    :param truncations: Hardy truncations N
    :param float tol: relative rank tolerance

    :return dict: report
    """
    n = max(truncations)
    values = sample(phi, n)
    report = {
        'min_abs_symbol': float(np.min(np.abs(values))),
        'truncations': list(truncations),
    }
    try:
        winding = winding_number(values)
    except SymbolVanishes as e:
        Logger.info('Symbol is not elliptic: {}'.format(e))
        report.update({'verdict': 'non-elliptic', 'winding': None,
                       'index': None, 'agree': None})
        return report

    index = fredholm_index(phi, truncations, tol)
    report.update({
        'verdict': 'elliptic',
        'winding': winding,
        'index': index,
        'agree': index == -winding,
    })

    return report


def hardy_multiplication(fhat, K, N, M):
    """Rows 0..N and columns 0..M of M_f."""
    return _toeplitz_block(fhat, K, np.arange(N + 1), np.arange(M + 1))


def semicommutator(f, g, N, K=None):
    """C M_f C M_g C - C M_fg C on the Hardy modes 0..N.

    The middle projection runs over modes 0..N + b_f + b_g so no
    truncation edge enters the product.
    """
    if K is None:
        K = 4 * N
    fhat = coefficients(f, K)
    ghat = coefficients(g, K)
    pad = N + bandwidth(fhat) + bandwidth(ghat)
    K = max(K, pad + N)
    fhat = coefficients(f, K)
    ghat = coefficients(g, K)
    fghat = coefficients(lambda t: f(t) * g(t), K)

    left = hardy_multiplication(fhat, K, N, pad)
    right = _toeplitz_block(ghat, K, np.arange(pad + 1), np.arange(N + 1))
    whole = hardy_multiplication(fghat, K, N, N)

    return left @ right - whole


class SmoothingReport(object):
    """Decay profile and fitted exponent of an operator matrix."""

    def __init__(self, profile, exponent, residual, floor_reached):
        self.profile = profile
        self.exponent = exponent
        self.residual = residual
        self.floor_reached = floor_reached

    @property
    def smoothing(self):
        if self.floor_reached:
            return True
        return (self.exponent >= SMOOTHING_EXPONENT and
                self.residual < SMOOTHING_RESIDUAL)


def decay_profile(matrix):
    """e(k) = max |entry| over max(m, n) >= k."""
    a = np.abs(np.asarray(matrix))
    size = max(a.shape)
    profile = np.zeros(size)
    for k in range(size):
        tail = 0.0
        if k < a.shape[0]:
            tail = a[k:, :].max()
        if k < a.shape[1]:
            tail = max(tail, a[:, k:].max())
        profile[k] = tail

    return profile


def smoothing_diagnostic(matrix, floor=SMOOTHING_FLOOR):
    """Least-squares fit of log e(k) against log k.

    Smoothing is declared when the profile falls below the floor before
    the edge, or when the fitted decay exponent is at least 4 with a
    residual below 0.5.

    :return SmoothingReport:
    """
    profile = decay_profile(matrix)
    scale = max(1.0, profile[0] if profile.size else 1.0)
    below = np.nonzero(profile[1:] < floor * scale)[0]
    floor_reached = bool(below.size)
    stop = below[0] + 1 if floor_reached else profile.size
    k = np.arange(1, stop)
    values = profile[1:stop]
    keep = values > 0
    if np.count_nonzero(keep) < 2:
        return SmoothingReport(profile, np.inf, 0.0, floor_reached)
    x = np.log(k[keep])
    y = np.log(values[keep])
    coef = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((np.polyval(coef, x) - y) ** 2)))
    exponent = float(-coef[0])
    Logger.debug('Decay exponent {:.2f} residual {:.2f}'.format(
        exponent, residual))

    return SmoothingReport(profile, exponent, residual, floor_reached)
