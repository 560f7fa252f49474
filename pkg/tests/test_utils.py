import os
import json
import logging

import numpy as np
import pytest

from fredcomplex.providers import Logger
from fredcomplex.core.numlin import norm2

config_dir = os.path.join(os.path.dirname(__file__), "config_files")

# silence the package logger in all suites
Logger.setLevel(logging.ERROR)


def _setup(request, config_file, seed):
    request.cls.config_file = config_file
    request.cls.seed = seed


@pytest.fixture(scope='class')
def class_manager(request, pytestconfig):
    _setup(
        request,
        os.path.join(config_dir, pytestconfig.getoption("config")),
        pytestconfig.getoption("seed")
    )
    yield


def rng_for(seed):
    return np.random.default_rng(seed)


def random_matrix(rng, rows, cols, rank=None):
    """Complex rows x cols matrix of the given rank (full rank if None)."""
    if rank is None:
        rank = min(rows, cols)
    left = rng.standard_normal((rows, rank)) + \
        1j * rng.standard_normal((rows, rank))
    right = rng.standard_normal((rank, cols)) + \
        1j * rng.standard_normal((rank, cols))

    return left @ right


def assert_small(value, tol, what='defect'):
    assert value <= tol, '{} {:.3e} exceeds {:.1e}'.format(what, value, tol)


def assert_projector(P, tol=1e-10):
    assert_small(norm2(P @ P - P), tol, 'idempotency defect')
    assert_small(norm2(P - P.conj().T), tol, 'hermiticity defect')


def write_config(path, sections):
    """Write an INI file from {section: {key: value}}."""
    with open(path, 'w') as fd:
        for section, items in sections.items():
            fd.write('[{}]\n'.format(section))
            for key, value in items.items():
                fd.write('{}: {}\n'.format(key, value))
            fd.write('\n')

    return path


def read_report(outdir, name):
    with open(os.path.join(outdir, name + '.json')) as fd:
        return json.load(fd)
