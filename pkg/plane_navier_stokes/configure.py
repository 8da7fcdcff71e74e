#!/usr/bin/python3

"""Installs the logging configuration of the solver."""

import argparse
from json import dump, load
import os
from shutil import copyfile
from typing import Dict


DEFAULTS = {
    'config': {
        'dir': '~/.plane_navier_stokes',
        'meta': 'plane_navier_stokes.json',
        'files': {
            'logging': 'logging.yml'
        }
    }
}


def meta_path(config_dir: str = DEFAULTS['config']['dir']) -> str:
    return os.path.expanduser(os.path.join(config_dir, DEFAULTS['config']['meta']))


def get_config(config_dir: str = DEFAULTS['config']['dir']):
    '''Returns the saved configuration.'''
    with open(meta_path(config_dir), 'r') as config_dir_file:
        return load(config_dir_file)


class Configure(object):
    """Copies logging.yml into the configuration directory and records where it went."""

    def __init__(self, args: Dict[str, str]):
        print('Saving configuration to {}'.format(args['config_dir']))

        os.makedirs(os.path.expanduser(args['config_dir']), exist_ok=True)

        # The solver looks the logging file up by its base name inside the config directory.
        logging_name = os.path.basename(args['logging_config'])
        copyfile(
            args['logging_config'],
            os.path.expanduser(os.path.join(args['config_dir'], logging_name)))

        config = {
            'dir': args['config_dir'],
            'meta': DEFAULTS['config']['meta'],
            'files': {'logging': logging_name}
        }
        with open(meta_path(args['config_dir']), 'w') as config_dir_file:
            dump(config, config_dir_file)
        if os.path.expanduser(args['config_dir']) != os.path.expanduser(DEFAULTS['config']['dir']):
            # Leave a pointer at the default location so the solver finds a custom directory.
            os.makedirs(os.path.expanduser(DEFAULTS['config']['dir']), exist_ok=True)
            with open(meta_path(), 'w') as config_dir_file:
                dump(config, config_dir_file)


if __name__ == '__main__':

    parser = argparse.ArgumentParser(
        description='Configuration script for the plane Navier-Stokes solver.')
    parser.add_argument(
        '-c', '--config-dir',
        metavar='PATH',
        action='store',
        default=DEFAULTS['config']['dir'],
        help='directory for configuration files related to the solver')
    parser.add_argument(
        '-l', '--logging-config',
        metavar='PATH',
        action='store',
        default=DEFAULTS['config']['files']['logging'],
        help='logging configuration file')

    configure_args = vars(parser.parse_args())
    Configure(configure_args)
