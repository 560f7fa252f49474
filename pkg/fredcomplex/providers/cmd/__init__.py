import io
import os
import csv
import argparse

from fredcomplex.providers.base import BaseProvider, BaseWriter, RunMode


class CmdWriter(BaseWriter):
    def __init__(self):
        super(CmdWriter, self).__init__()

    def _write_table(self, rows, columns, file_output):
        """See base method for description.
        """
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow(
                ['{:.12g}'.format(v) if isinstance(v, float) else v
                 for v in row]
            )
        self._atomic_write(file_output, buf.getvalue())


# flag -> configuration key
OVERRIDE_FLAGS = (
    ('--N', 'n', 'truncation (Laguerre or Fourier modes)'),
    ('--grid', 'grid', 'grid size (points, equator samples, cells)'),
    ('--tol', 'tol', 'relative rank tolerance'),
    ('--seed', 'seed', 'random seed'),
    ('--out', 'outdir', 'output directory (default: $FCL_OUT)'),
    ('--surface', 'surface', 'deRham surface (sphere, torus, both)'),
    ('--k', 'k', 'largest circle winding |k|'),
    ('--instances', 'instances', 'number of seeded instances'),
    ('--radius', 'radius', 'skew-diagonal detection radius'),
    ('--meridian-steps', 'meridian_steps', 'steps per hemisphere meridian'),
    ('--log-level', 'level', 'logging level (DEBUG, INFO, ...)'),
)


class CmdArgumentParser(object):
    def __init__(self, config_file):
        self.config_file = config_file

    def set_config(self, description, argv=None):
        """Parse command-line arguments.

        :param str description: program description
        :param list argv: arguments, sys.argv when None

        :return: run mode, experiment name, config file, overrides
        """
        # flags shared by 'demo' and 'run'
        flags = argparse.ArgumentParser(add_help=False)
        for flag, dest, help_text in OVERRIDE_FLAGS:
            flags.add_argument(flag, dest=dest, type=str, help=help_text)

        # define CLI parser
        parser = argparse.ArgumentParser(
            prog='fredcomplex', description=description
        )
        subparsers = parser.add_subparsers(dest='command')
        subparsers.required = True

        demo = subparsers.add_parser(
            'demo', parents=[flags], help='run experiment with defaults'
        )
        demo.add_argument('name', help='experiment name (see "list")')

        run = subparsers.add_parser(
            'run', parents=[flags], help='run experiment from INI file'
        )
        run.add_argument(
            'config',
            help='file with configuration',
            nargs='?',
            default=self.config_file
        )

        subparsers.add_parser('list', help='list experiments')

        args = parser.parse_args(argv)
        mode = RunMode()[args.command]
        if mode == RunMode.listing:
            return mode, None, None, {}

        if mode == RunMode.run and not args.config:
            run.error('configuration file required')

        overrides = {
            dest: getattr(args, dest) for _, dest, _ in OVERRIDE_FLAGS
            if getattr(args, dest) is not None
        }

        return (
            mode,
            args.name if mode == RunMode.demo else None,
            args.config if mode == RunMode.run else None,
            overrides
        )


class CmdProvider(BaseProvider):
    def __init__(self, argv=None, config_file=None):
        super(CmdProvider, self).__init__()

        # load configuration
        if config_file is None and os.getenv("FREDCOMPLEX_CONFIG_FILE"):
            config_file = os.getenv("FREDCOMPLEX_CONFIG_FILE")
        cloader = CmdArgumentParser(config_file)
        (self.args.run_mode, self.args.experiment, self.args.config_file,
         self.args.overrides) = cloader.set_config(
            "Run fredcomplex experiments.", argv
        )

        # define storage writer
        self.storage = CmdWriter()
