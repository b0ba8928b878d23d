"""
command line entry point: ``amcbackdoor <stage> --config <path> --seed <n>
--out <dir>``.
"""

import argparse
import logging
import sys
from typing import List, Optional

from ..configuration import Config, ConfigError
from ..logger import start_logging
from .experiment import STAGES, Experiment, StageError

log = logging.getLogger(__name__)

_ACTIONS = {
    'generate': Experiment.generate,
    'train': Experiment.train_clean,
    'attribute': Experiment.attribute,
    'trigger': Experiment.trigger,
    'poison': Experiment.poison,
    'evaluate': Experiment.evaluate,
    'defend': Experiment.defend,
    'run': Experiment.run,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='amcbackdoor',
        description='attribution-guided backdoor attacks on OFDM '
                    'modulation classifiers')
    sub = parser.add_subparsers(dest='stage', required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', default=None,
                        help='JSON file of dotted-key overrides')
    common.add_argument('--seed', type=int, default=None,
                        help='master seed (overrides experiment.seed)')
    common.add_argument('--out', default='results',
                        help='output directory (default: results)')
    common.add_argument('--log-level', default='INFO',
                        help='console log level')
    for stage in STAGES:
        sub.add_parser(stage, parents=[common],
                       help=f'run the pipeline up to {stage}'
                       if stage != 'run' else 'run the full pipeline')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    start_logging(console_level=args.log_level)
    try:
        config = Config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError('--seed must be >= 0')
            config.update({'experiment.seed': args.seed})
    except (ConfigError, OSError) as err:
        log.error(f'configuration: {err}')
        return 2
    try:
        _ACTIONS[args.stage](Experiment(config, args.out))
    except StageError as err:
        log.error(str(err))
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
