""" command line tool to run collision-model thermal contact experiments """
import argparse
import logging
import sys

from qcontact import COMMANDS, ExperimentConfig, ConfigError, run, schema_help
from qcontact.experiment import EXIT_CONFIG


def get_options(args=None):
    parser = argparse.ArgumentParser(
        description='command line tool to run collision-model thermal contact experiments',
        epilog='parameters per command (key=default):\n{}'.format(schema_help()),
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument('command', help='experiment: {}'.format(', '.join(COMMANDS)), choices=COMMANDS, type=str)
    parser.add_argument('-c', '--config', help='flat `key = value` config file', default=None, type=str)
    parser.add_argument('-s', '--set', help='override a parameter as key=value (repeatable)', action='append',
                        default=[], dest='overrides')
    parser.add_argument('-o', '--out', help='output directory (default ./qcontact_output/<command>)', default=None,
                        type=str)
    parser.add_argument('--svg', help='export plot.svg', action='store_true')
    parser.add_argument('--seed', help='seed of the random instance generator', default=0, type=int)
    parser.add_argument('--debug', help='show debug log', action='store_true')
    return parser.parse_args(args)


def main(args=None):
    opt = get_options(args)
    level = logging.DEBUG if opt.debug else logging.INFO
    logging.basicConfig(format='%(asctime)s %(levelname)-8s %(message)s', level=level, datefmt='%Y-%m-%d %H:%M:%S')
    try:
        config = ExperimentConfig.resolve(
            opt.command, config_file=opt.config, overrides=opt.overrides, seed=opt.seed, output_path=opt.out)
    except ConfigError as e:
        logging.error('configuration error: {}'.format(e))
        return EXIT_CONFIG
    except OSError as e:
        logging.error('can not read config file: {}'.format(e))
        return EXIT_CONFIG
    return run(config, svg=opt.svg, verbose=opt.debug)


if __name__ == '__main__':
    sys.exit(main())
