import sys

from fredcomplex.experiments import CATALOG, list_experiments
from fredcomplex.providers import Logger
from fredcomplex.providers.base import RunMode

__version__ = "0.1.0"


class Runner(object):
    """Run fredcomplex experiments."""

    def __init__(self, argv=None):
        self._provider = self._get_provider(argv)

    def _get_provider(self, argv=None):
        """Get provider object instance.

        :param list argv: command-line arguments, sys.argv when None

        :return provider class instance
        """
        from fredcomplex.providers.cmd import CmdProvider

        return CmdProvider(argv)

    @property
    def run_mode(self):
        """Get run mode."""
        return self._provider.run_mode

    def run(self):
        """Perform experiment.

        :return int: 0 when every acceptance check passed, 1 otherwise
        """
        if self.run_mode == RunMode.listing:
            self._provider.print_catalog(list_experiments())
            return 0

        # set percentage counter
        Logger.set_progress(10)

        # load configuration (raises ConfigError)
        config = self._provider.load(CATALOG)

        # set percentage counter for experiment
        Logger.set_progress(95)

        experiment = CATALOG[config.name]
        report = experiment.execute(config, self._provider.storage)

        # save report
        Logger.set_progress(100)
        self._provider.storage.write_json(report, config.name)
        if report['passed']:
            Logger.info('Experiment {} passed'.format(config.name))
        else:
            failed = [k for k, v in report['checks'].items() if not v]
            Logger.error('Experiment {} failed: {}'.format(
                config.name, ', '.join(failed)))

        # resets
        Logger.reset()

        return 0 if report['passed'] else 1


def main(argv=None):
    """Console entry point.

    :param list argv: command-line arguments, sys.argv when None

    :return int: exit status (2 on configuration errors)
    """
    from fredcomplex.exceptions import ProviderError, ConfigError

    try:
        return Runner(argv).run()
    except ConfigError as e:
        sys.stderr.write('ERROR: {}\n'.format(e))
        return 2
    except ProviderError as e:
        sys.stderr.write('ERROR: {}\n'.format(e))
        return 1
