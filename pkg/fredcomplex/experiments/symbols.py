"""Experiments on circle Toeplitz operators and half-line boundary symbols."""

import numpy as np

from fredcomplex.core import FiberClass
from fredcomplex.core.circle_algebra import (
    cr_problem_reduction, exact_section, index_report, semicommutator,
    smoothing_diagnostic, winding_number
)
from fredcomplex.core.complexes import random_complex
from fredcomplex.core.halfline_symbols import (
    LaguerreBasis, ScanReport, complement_family,
    cr_boundary_symbol, cr_symbol_cohomology, dolbeault_d1, dolbeault_family,
    dolbeault_k0, degenerating_family, exactness_scan,
    kernel_bundle_clutching, quadrature_exp_coeffs, random_family, scan_points
)
from fredcomplex.core.numlin import norm2, rank_tol
from fredcomplex.experiments.base import Experiment
from fredcomplex.providers import Logger
from fredcomplex.tools.plot import line_plot

QUADRATURE_BETAS = (1.0, 1.0 + 0.3j, 1.0 - 0.3j)
QUADRATURE_MODES = 8
QUADRATURE_TOL = 1e-10
FAR_FROM_SKEW = 0.3
SKEW_SAMPLES = 16
KERNEL_TOL = 1e-10
SECTION_GAP = 0.05
CLOSED_FORM_GAP = 1e-6
PI_TOL = 1e-10
FAMILY_CLUTCHING = {'equator_grid': 64, 'meridian_steps': 64}


def _modes(k):
    return lambda theta: np.exp(1j * k * theta)


class CircleIndex(Experiment):
    name = 'circle-index'
    anchor = 'Toeplitz operators with symbol exp(ik theta) have index -k'
    defaults = {'k': 5, 'n': 128}

    def run(self, params, rng, storage):
        truncations = (params['n'], 2 * params['n'])
        windings = list(range(-params['k'], params['k'] + 1))
        indices = {}
        stable = True
        for i, k in enumerate(windings):
            report = index_report(_modes(k), truncations)
            stable &= report.stable
            indices[k] = report.indices[truncations[0]]
            self.check('k = {}: index -k'.format(k),
                       report.stable and report.index == -k)
            self.progress(i + 1, len(windings))
        self.check('index stable across truncations', stable)

        def f(theta):
            return 2.0 + np.cos(theta)

        def g(theta):
            return np.exp(1j * theta) + 0.5 * np.exp(-2j * theta)

        semi = smoothing_diagnostic(semicommutator(f, g, params['n']))
        toeplitz = smoothing_diagnostic(exact_section(g, params['n']).matrix)
        self.check('semicommutator is smoothing', semi.smoothing)
        self.check('Toeplitz operator is not smoothing',
                   not toeplitz.smoothing)

        reduction = cr_problem_reduction(_modes(1), truncations)
        self.check('boundary reduction index agrees with winding',
                   reduction['agree'] is True)

        k = params['k']
        headline = index_report(_modes(k), truncations)
        index = headline.index if headline.stable else None
        winding = winding_number(_modes(k))
        agree = index is not None and index == -winding
        self.check('index of exp(ik theta) equals minus its winding', agree)

        rows = []
        for n in truncations:
            section = exact_section(_modes(k), n).matrix
            values = rank_tol(section).singular_values
            rows.extend([n, i, float(s)] for i, s in enumerate(values))
        storage.write_table(rows, ['N', 'i', 'singular_value'], self.name)
        storage.write_plot(
            line_plot(windings, {'index': [indices[j] for j in windings]},
                      title='Toeplitz index of exp(ik theta)',
                      xlabel='k', ylabel='index', markers=True),
            self.name)

        return {
            'symbol': 'exp({}i theta)'.format(k),
            'N': list(truncations),
            'index': index,
            'winding': winding,
            'agree': agree,
            'indices': {str(j): indices[j] for j in windings},
            'winding_g': winding_number(g),
            'semicommutator': {
                'smoothing': semi.smoothing,
                'floor_reached': semi.floor_reached,
            },
            'toeplitz_exponent': toeplitz.exponent,
            'cr_reduction': reduction,
        }


class CrSymbol(Experiment):
    name = 'cr-symbol'
    anchor = 'Cauchy-Riemann boundary symbol is surjective with kernel e^-r'
    defaults = {'n': 32, 'tol': 1e-8}

    def run(self, params, rng, storage):
        n = max(2, params['n'])
        result = {'symbols': {}}
        for tau in (1, -1):
            op = cr_boundary_symbol(tau, n)
            kernel = op.kernel()
            stable = cr_symbol_cohomology(tau, n, params['tol'])
            entry = {
                'kernel_dim': kernel.shape[1],
                'surjective': op.surjective(),
                'bijective': op.bijective(),
                'stable_dims': list(stable.dims),
            }
            expected = 1 if tau == 1 else 0
            self.check('tau = {}: kernel dimension'.format(tau),
                       entry['kernel_dim'] == expected)
            self.check('tau = {}: surjective'.format(tau), entry['surjective'])
            self.check('tau = {}: stable cohomology'.format(tau),
                       entry['stable_dims'] == [expected, 0])
            if tau == 1 and kernel.shape[1] == 1:
                entry['kernel_l0_weight'] = float(abs(kernel[0, 0]))
                trace = op.basis.boundary_functional @ kernel
                entry['boundary_value'] = float(abs(trace[0, 0]))
                self.check('kernel spanned by l0',
                           abs(kernel[0, 0]) >= 1.0 - KERNEL_TOL)
                self.check('kernel has nonzero boundary value',
                           entry['boundary_value'] > 1.0)
            else:
                self.check('tau = -1: bijective', entry['bijective'])
            result['symbols']['tau={:+d}'.format(tau)] = entry

        basis = LaguerreBasis(QUADRATURE_MODES)
        quad_gap = 0.0
        for beta in QUADRATURE_BETAS:
            gap = np.max(np.abs(basis.exp_coeffs(beta) -
                                quadrature_exp_coeffs(beta, QUADRATURE_MODES)))
            quad_gap = max(quad_gap, float(gap))
        result['quadrature_gap'] = quad_gap
        self.check('exponential coefficients match quadrature',
                   quad_gap <= QUADRATURE_TOL)

        reduction = cr_problem_reduction(_modes(1))
        result['disc_reduction'] = reduction
        self.check('disc problem reduces to a Fredholm operator of index -1',
                   reduction['index'] == -1)

        return result


class DolbeaultScan(Experiment):
    name = 'dolbeault-scan'
    anchor = 'Dolbeault boundary symbols are exact off the skew diagonal'
    defaults = {'n': 32, 'grid': 1000, 'tol': 1e-8, 'radius': 0.05}

    def run(self, params, rng, storage):
        points = scan_points(rng, params['grid'], skew_count=SKEW_SAMPLES)
        report = exactness_scan(points, params['n'], params['tol'],
                                params['radius'])
        skew_points = points[-SKEW_SAMPLES:]
        skew_dims = report.dims[-SKEW_SAMPLES:]
        far = report.dims_where(lambda p: p.skew_distance >= FAR_FROM_SKEW)

        self.check('exact away from the skew diagonal',
                   all(tuple(d) == (0, 0, 0) for d in far))
        self.check('(1, 1, 0) on the skew diagonal',
                   all(tuple(d) == (1, 1, 0) for d in skew_dims))
        self.check('top cohomology vanishes',
                   all(d[2] == 0 for d in report.dims))

        augmented = exactness_scan(skew_points, params['n'], params['tol'],
                                   params['radius'], augmented=True)
        self.check('k0 fills the first cohomology',
                   all(tuple(d) == (1, 0, 0) for d in augmented.dims))
        k0_defect = max(
            norm2(dolbeault_d1(p, params['n']) @ dolbeault_k0(p, params['n']))
            / (1.0 + norm2(dolbeault_d1(p, params['n'])))
            for p in skew_points
        )
        self.check('k0 lies in the kernel of d1', k0_defect <= KERNEL_TOL)

        storage.write_table(list(report.rows()), ScanReport.columns,
                            self.name)
        counts = report.counts()
        for key in (FiberClass.exact, FiberClass.skew_diagonal,
                    FiberClass.marginal, FiberClass.unexpected):
            counts.setdefault(key, 0)

        return {
            'points': len(points),
            'far_points': len(far),
            'classes': counts,
            'k0_defect': k0_defect,
        }


class Bott(Experiment):
    name = 'bott'
    anchor = 'kernel bundle clutching coincides with the Bott generator'
    defaults = {'grid': 512, 'n': 32, 'meridian_steps': 128}

    def run(self, params, rng, storage):
        report = kernel_bundle_clutching(
            equator_grid=params['grid'], N=params['n'],
            meridian_steps=params['meridian_steps'])
        self.check('winding +1', report.winding == 1)
        self.check('sections continuous',
                   report.max_section_gap <= SECTION_GAP)
        self.check('sections match the closed forms',
                   report.closed_form_gap <= CLOSED_FORM_GAP)

        rows = report.plot_rows()
        storage.write_table(rows, ['angle', 'transition_phase'], self.name)
        storage.write_plot(
            line_plot([r[0] for r in rows], {'phase': [r[1] for r in rows]},
                      title='Clutching transition along the equator',
                      xlabel='angle of xi2', ylabel='unwrapped phase'),
            self.name)

        return report.to_json()


class Complement(Experiment):
    name = 'complement'
    anchor = 'complementation is exact beyond the first position and ' \
        'conserves the index'
    defaults = {'instances': 50, 'n': 16, 'tol': 1e-10}
    randomized = True

    def run(self, params, rng, storage):
        total = params['instances']
        failures = {'exact': [], 'conserved': []}
        pi_worst = 0.0
        continuity = 0.0
        for i in range(total):
            n_spaces = int(rng.integers(2, 6))
            if i % 2:
                base, _ = random_complex(rng, n_spaces=n_spaces, max_dim=6)
                fc = degenerating_family(
                    base, n_points=2 * int(rng.integers(1, 9)) + 1)
            else:
                fc, _ = random_family(
                    rng, n_points=int(rng.integers(2, 17)),
                    n_spaces=n_spaces, max_dim=6)
            _, report = complement_family(fc, params['tol'])
            if not all(report.exact):
                failures['exact'].append(i)
            if not report.conserved:
                failures['conserved'].append(i)
            pi_worst = max([pi_worst] + list(report.pi_defects.values()))
            continuity = max(continuity,
                             report.to_json()['max_continuity_defect'])
            self.progress(i + 1, total + 1)

        self.check('augmented families exact beyond position 0',
                   not failures['exact'])
        self.check('Euler characteristic conserved', not failures['conserved'])
        self.check('fill projections are orthogonal kernel projections',
                   pi_worst <= PI_TOL)

        clutching = kernel_bundle_clutching(N=params['n'], **FAMILY_CLUTCHING)
        family = dolbeault_family(N=params['n'])
        _, dolbeault = complement_family(family, winding=clutching.winding)
        Logger.info('Dolbeault index element {}: {}'.format(
            dolbeault.index_element, dolbeault.verdict))
        self.progress(total + 1, total + 1)
        self.check('Dolbeault family exact beyond position 0',
                   all(dolbeault.exact))
        self.check('Dolbeault J0 is a line', set(dolbeault.j0_dims) == {1})
        self.check('Dolbeault Euler characteristic conserved',
                   dolbeault.conserved)
        self.check('Dolbeault index element does not vanish',
                   clutching.winding == 1)

        return {
            'instances': total,
            'failures': failures,
            'max_pi_defect': pi_worst,
            'max_continuity_defect': continuity,
            'dolbeault': dolbeault.to_json(),
            'dolbeault_clutching': clutching.to_json(),
        }
