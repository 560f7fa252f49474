"""Catalog of experiments run by the command-line front end."""

from collections import OrderedDict

from fredcomplex.experiments.algebra import (
    DeRham, Counterexample, ConeProperties, Hodge
)
from fredcomplex.experiments.lifting import Lift, Quasilift
from fredcomplex.experiments.symbols import (
    CircleIndex, CrSymbol, DolbeaultScan, Bott, Complement
)

CATALOG = OrderedDict(
    (experiment.name, experiment) for experiment in (
        DeRham(), Counterexample(), ConeProperties(), Hodge(), Lift(),
        Quasilift(), CircleIndex(), CrSymbol(), DolbeaultScan(), Bott(),
        Complement(),
    )
)


def list_experiments():
    """Experiment names with the statement each one reproduces.

    :return list: (name, anchor) pairs in catalog order
    """
    return [(name, experiment.anchor) for name, experiment in CATALOG.items()]
