import numpy as np

from fredcomplex.exceptions import FredcomplexError
from fredcomplex.providers import Logger


class Experiment(object):
    """Catalog entry reproducing one statement numerically.

    Subclasses set the class attributes below and implement
    :meth:`run`, which registers acceptance checks through :meth:`check`.
    """

    # catalog name
    name = None
    # statement the experiment reproduces
    anchor = None
    # accepted parameters with their defaults (defines the types)
    defaults = {}
    # allowed values of string parameters
    choices = {}
    # seed is mandatory
    randomized = False

    def __init__(self):
        self.checks = {}

    def check(self, name, passed):
        """Record one acceptance check.

        :param str name: check name
        :param passed: outcome
        """
        passed = bool(passed)
        self.checks[name] = passed
        if not passed:
            Logger.error('{}: check "{}" failed'.format(self.name, name))

        return passed

    def run(self, params, rng, storage):
        """Perform the experiment.

        :param dict params: typed parameters
        :param rng: numpy Generator
        :param BaseWriter storage: writer for tables and plots

        :return dict: experiment specific report entries
        """
        raise NotImplementedError()

    def execute(self, config, storage):
        """Run the experiment and assemble its report.

        Numerical errors end the experiment with a failed 'completed'
        check instead of propagating.

        :param ExperimentConfig config: validated configuration
        :param BaseWriter storage: writer for tables and plots

        :return dict: report
        """
        self.checks = {}
        seed = config.seed if config.seed is not None else 0
        rng = np.random.default_rng(seed)
        try:
            result = self.run(config.parameters, rng, storage)
            self.checks['completed'] = True
        except FredcomplexError as e:
            Logger.error('Experiment {} aborted: {}'.format(self.name, e))
            result = {'error': str(e)}
            self.checks['completed'] = False

        report = dict(result)
        report.update({
            'experiment': self.name,
            'anchor': self.anchor,
            'parameters': config.to_json(),
            'checks': dict(self.checks),
            'passed': all(self.checks.values()),
        })

        return report

    @staticmethod
    def progress(done, total):
        Logger.progress(100.0 * done / total, done, total)
