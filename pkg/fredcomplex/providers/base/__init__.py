import os
import sys
import json
import math
import logging
import tempfile
from configparser import ConfigParser, Error as ConfigParserError
from abc import abstractmethod

import numpy as np

from fredcomplex.exceptions import ProviderError, ConfigError
from fredcomplex.providers import Logger


class Args:
    """Arguments of one invocation."""

    # run mode (RunMode)
    run_mode = None
    # catalog name of the experiment
    experiment = None
    # INI configuration file ('run' mode only)
    config_file = None
    # command-line values overriding configuration keys
    overrides = None


class RunMode:
    """Invocation modes of the command-line front end."""

    demo = 0     # catalog defaults plus flags
    run = 1      # INI configuration file plus flags
    listing = 2  # print the catalog

    @classmethod
    def __getitem__(cls, key):
        if key == 'demo':
            return cls.demo
        elif key == 'run':
            return cls.run
        else:
            return cls.listing


class ExperimentConfig(object):
    """Validated configuration of one experiment run."""

    def __init__(self, name, parameters, seed, outdir, source=None):
        """
        :param str name: catalog name
        :param dict parameters: parameter name -> typed value
        :param int seed: random seed or None
        :param str outdir: output directory
        :param str source: configuration file, None for demos
        """
        self.name = name
        self.parameters = parameters
        self.seed = seed
        self.outdir = outdir
        self.source = source

    def to_json(self):
        data = dict(self.parameters)
        if self.seed is not None:
            data['seed'] = self.seed

        return data


# accepted sections and keys of configuration files
CONFIG_KEYS = {
    'experiment': ('name', 'seed'),
    'parameters': ('n', 'grid', 'tol', 'k', 'surface', 'instances',
                   'radius', 'meridian_steps'),
    'output': ('outdir', ),
    'logging': ('level', ),
}


def coerce_parameter(key, value, default, where):
    """Convert a raw configuration value to the type of its default.

    :param str key: parameter name
    :param value: raw value (string from INI files or flags)
    :param default: catalog default, defines the type
    :param str where: location used in error messages

    :return: typed value
    """
    if isinstance(default, bool) or not isinstance(default, (int, float)):
        return str(value)
    try:
        if isinstance(default, int):
            number = float(value)
            if not number.is_integer():
                raise ValueError(value)
            number = int(number)
            if number < 0:
                raise ValueError(value)
        else:
            number = float(value)
            if not math.isfinite(number) or number <= 0:
                raise ValueError(value)
    except (TypeError, ValueError):
        kind = "non-negative integer" if isinstance(default, int) \
            else "positive number"
        raise ConfigError('{}: key "{}" must be a {}, got "{}"'.format(
            where, key, kind, value
        ))

    return number


class BaseWriter(object):
    """Atomic writer of reports, tables and plots."""
    _json_extension = '.json'
    _table_extension = '.csv'
    _plot_extension = '.svg'

    def __init__(self):
        self.outdir = None
        self._digits = 12

    def set_outdir(self, outdir, digits=12):
        """Set output directory.

        :param str outdir: output directory
        :param int digits: significant digits of floats in reports
        """
        self.outdir = outdir
        self._digits = digits

    def output_filepath(self, name, data_type='core', dirname_only=False):
        """
        Get correct path to store output 'name'.

        :param name: file name to be saved
        :param data_type: 'core' (output directory), 'data' or 'plots'
        :param dirname_only: True to return only path to parent directory

        :return: full path to the file
        """
        if self.outdir is None:
            raise ProviderError('Output directory not defined')
        defined_targets = ("core", "data", "plots")
        if data_type not in defined_targets:
            Logger.debug(
                "Unknown target {} for {}. Assuming data.".format(
                    data_type, name)
            )
            data_type = "data"

        path = os.path.join(self.outdir, data_type) \
            if data_type != 'core' else self.outdir
        try:
            os.makedirs(path, exist_ok=True)
        except OSError as e:
            raise ProviderError(
                'Unable to create output directory {}: {}'.format(path, e)
            )
        if dirname_only:
            return path

        return os.path.join(path, name)

    @staticmethod
    def _atomic_write(file_output, text):
        """Write text into a temporary file and rename it over the target.

        :param file_output: path to output file
        :param text: file content
        """
        dirname = os.path.dirname(file_output) or '.'
        try:
            fd, tmp_path = tempfile.mkstemp(
                dir=dirname, prefix='.', suffix='.tmp'
            )
            try:
                with os.fdopen(fd, 'w', encoding='utf-8', newline='') as fo:
                    fo.write(text)
                os.replace(tmp_path, file_output)
            except BaseException:
                if os.path.exists(tmp_path):
                    os.remove(tmp_path)
                raise
        except OSError as e:
            raise ProviderError('Unable to write {}: {}'.format(
                file_output, e
            ))

    def canonical(self, value):
        """Convert a report value into plain JSON types.

        Floats are rounded to a fixed number of significant digits;
        non-finite floats become strings.
        """
        if isinstance(value, dict):
            return {str(k): self.canonical(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [self.canonical(v) for v in value]
        if isinstance(value, np.ndarray):
            return self.canonical(value.tolist())
        if isinstance(value, (bool, np.bool_)):
            return bool(value)
        if isinstance(value, (int, np.integer)):
            return int(value)
        if isinstance(value, (float, np.floating)):
            value = float(value)
            if not math.isfinite(value):
                return str(value)
            if value == 0.0:
                return 0.0
            return float('{:.{}g}'.format(value, self._digits))
        if isinstance(value, (complex, np.complexfloating)):
            return [self.canonical(value.real), self.canonical(value.imag)]
        if value is None:
            return None

        return str(value)

    def write_json(self, report, output_name, data_type='core'):
        """Write report (dictionary) into JSON file with sorted keys.

        :param report: report dictionary
        :param output_name: output filename without extension
        :param data_type: directory where to write output file

        :return: path to the written file
        """
        file_output = self.output_filepath(
            output_name + self._json_extension, data_type
        )
        text = json.dumps(
            self.canonical(report), sort_keys=True, indent=2
        ) + '\n'
        self._atomic_write(file_output, text)
        Logger.info("Report <{}> saved".format(file_output))

        return file_output

    def write_table(self, rows, columns, output_name, data_type='data'):
        """Write table into CSV file.

        :param rows: list of row sequences
        :param columns: column names
        :param output_name: output filename without extension
        :param data_type: directory where to write output file

        :return: path to the written file
        """
        file_output = self.output_filepath(
            output_name + self._table_extension, data_type
        )
        Logger.info("Table <{}> saved ({} rows)".format(
            file_output, len(rows)
        ))
        self._write_table(rows, columns, file_output)

        return file_output

    def write_plot(self, svg, output_name, data_type='plots'):
        """Write SVG document.

        :param svg: SVG document text
        :param output_name: output filename without extension
        :param data_type: directory where to write output file

        :return: path to the written file
        """
        file_output = self.output_filepath(
            output_name + self._plot_extension, data_type
        )
        self._atomic_write(file_output, svg)
        Logger.info("Plot <{}> saved".format(file_output))

        return file_output

    @abstractmethod
    def _write_table(self, rows, columns, file_output):
        """Write table into file.

        :param rows: list of row sequences
        :param columns: column names
        :param file_output: path to output file
        """
        pass


class BaseProvider(object):
    """Configuration loading shared by providers."""

    def __init__(self):
        self.args = Args()

        self._print_fn = print

        # default logging level (can be modified by provider)
        Logger.setLevel(logging.INFO)

        # storage writer must be defined
        self.storage = None
        self._hidden_config = self.__load_hidden_config()

    @property
    def run_mode(self):
        return self.args.run_mode

    @staticmethod
    def add_logging_handler(handler, formatter=None):
        """Register new logging handler.

        :param handler: logging handler to be registered
        :param formatter: logging handler formatting
        """
        if not formatter:
            formatter = logging.Formatter(
                "%(asctime)s - %(name)s - %(levelname)s - %(message)s "
                "- [%(module)s:%(lineno)s]"
            )
        handler.setFormatter(formatter)
        if len(Logger.handlers) == 0:
            # avoid duplicated handlers (e.g. repeated runs in tests)
            Logger.addHandler(handler)

    @staticmethod
    def __load_hidden_config():
        """Load hidden configuration with advanced settings.

        return ConfigParser: object
        """
        _path = os.path.join(
            os.path.dirname(__file__), '..', '..', '.config.ini'
        )
        if not os.path.exists(_path):
            raise ConfigError("{} does not exist".format(
                _path
            ))

        config = ConfigParser()
        config.read(_path)

        # set logging level
        Logger.setLevel(config.get('logging', 'level', fallback=logging.INFO))

        return config

    def _read_config(self):
        """Read and check the INI file structure.

        :return ConfigParser: object
        """
        if not os.path.exists(self.args.config_file):
            raise ConfigError("{} does not exist".format(
                self.args.config_file
            ))

        config = ConfigParser()
        try:
            config.read(self.args.config_file)
        except ConfigParserError as e:
            # parser messages carry the offending line
            raise ConfigError('Config file {}: {}'.format(
                self.args.config_file, e
            ))

        for section in config.sections():
            if section not in CONFIG_KEYS:
                raise ConfigError(
                    'Config file {}: unknown section [{}]'.format(
                        self.args.config_file, section)
                )
            for key in config.options(section):
                if key not in CONFIG_KEYS[section]:
                    raise ConfigError(
                        'Config file {}: unknown key "{}" in section '
                        '[{}]'.format(self.args.config_file, key, section)
                    )

        return config

    def _load_config(self, catalog):
        """Build the experiment configuration.

        Values are taken from flags, then the configuration file
        (run mode), then catalog defaults.

        :param catalog: dictionary name -> experiment

        :return ExperimentConfig: validated configuration
        """
        overrides = dict(self.args.overrides or {})
        where = 'Command line'
        raw = {}
        name = self.args.experiment
        seed = None
        outdir = None
        level = None
        if self.run_mode == RunMode.run:
            config = self._read_config()
            where = 'Config file {}'.format(self.args.config_file)
            if name is None:
                try:
                    name = config.get('experiment', 'name')
                except ConfigParserError as e:
                    raise ConfigError('{}: {}'.format(where, e))
            seed = config.get('experiment', 'seed', fallback=None)
            outdir = config.get('output', 'outdir', fallback=None)
            level = config.get('logging', 'level', fallback=None)
            if config.has_section('parameters'):
                raw.update(config.items('parameters'))

        if name not in catalog:
            raise ConfigError('{}: unknown experiment "{}" (known: {})'.format(
                where, name, ', '.join(catalog)
            ))
        experiment = catalog[name]

        if overrides.get('seed') is not None:
            seed = overrides.pop('seed')
        else:
            overrides.pop('seed', None)
        if overrides.get('outdir') is not None:
            outdir = overrides.pop('outdir')
        else:
            overrides.pop('outdir', None)
        if overrides.get('level') is not None:
            level = overrides.pop('level')
        else:
            overrides.pop('level', None)
        raw.update({k: v for k, v in overrides.items() if v is not None})

        parameters = dict(experiment.defaults)
        for key, value in sorted(raw.items()):
            if key not in experiment.defaults:
                raise ConfigError(
                    '{}: key "{}" not accepted by experiment {} '
                    '(accepted: {})'.format(
                        where, key, name,
                        ', '.join(sorted(experiment.defaults)) or 'none'
                    ))
            parameters[key] = coerce_parameter(
                key, value, experiment.defaults[key], where
            )
            allowed = experiment.choices.get(key)
            if allowed and parameters[key] not in allowed:
                raise ConfigError(
                    '{}: key "{}" must be one of {}, got "{}"'.format(
                        where, key, ", ".join(allowed), parameters[key]
                    ))

        if seed is not None:
            try:
                seed = int(seed)
            except (TypeError, ValueError):
                raise ConfigError(
                    '{}: seed must be an integer, got "{}"'.format(where, seed)
                )
        elif experiment.randomized:
            raise ConfigError('{}: seed is mandatory for experiment {}'.format(
                where, name
            ))

        if outdir is None:
            outdir = os.getenv('FCL_OUT') or self._hidden_config.get(
                'output', 'outdir', fallback='fcl_output'
            )

        if level is not None:
            try:
                Logger.setLevel(str(level).upper())
            except ValueError as e:
                raise ConfigError('{}: {}'.format(where, e))

        # sys.stderr logging
        self.add_logging_handler(
            logging.StreamHandler(stream=sys.stderr)
        )

        return ExperimentConfig(
            name, parameters, seed, outdir, source=self.args.config_file
        )

    def _cleanup(self, outdir):
        """Create output directory.

        :param outdir: output directory
        """
        try:
            os.makedirs(outdir, exist_ok=True)
        except OSError as e:
            raise ProviderError(
                'Unable to create output directory {}: {}'.format(outdir, e)
            )

    def load(self, catalog):
        """Load configuration data.

        :param catalog: dictionary name -> experiment

        :return ExperimentConfig: validated configuration
        """
        config = self._load_config(catalog)
        self._cleanup(config.outdir)
        self.storage.set_outdir(
            config.outdir,
            self._hidden_config.getint('output', 'digits', fallback=12)
        )

        return config

    def print_catalog(self, entries):
        """Print experiment names with their anchors.

        :param entries: list of (name, anchor) pairs
        """
        width = max(len(name) for name, _ in entries)
        for name, anchor in entries:
            self._print_fn('{}  {}'.format(name.ljust(width), anchor))

