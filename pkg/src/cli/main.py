"""
Front end de linha de comando

    python run_cli.py <comando> --scenario <arquivo> [--out <arquivo>]
                      [--format csv|json] [--seed <u64>] [--deterministic]

Códigos de saída: 0 sucesso, 1 cenário/domínio inválido, 2 falha numérica
ou do otimizador, 3 falha de I/O.
"""

import sys
import logging
import argparse
from typing import List, Optional

from ..errors import ConvergenceError, DomainError, ScenarioError
from ..settings import configure_logging, settings
from .commands import COMMANDS, parse_scenario, run
from .results import emit

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="UAV-FSO Relay Toolkit")
    parser.add_argument("command", choices=sorted(COMMANDS), help="Comando a executar")
    parser.add_argument("--scenario", required=True, help="Arquivo de cenário (JSON)")
    parser.add_argument("--out", default=None, help="Arquivo de saída (padrão: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default=None,
                        help="Formato de saída (padrão: pela extensão de --out, senão csv)")
    parser.add_argument("--seed", type=int, default=None, help="Semente do Monte-Carlo")
    parser.add_argument("--deterministic", action="store_true",
                        help="Omite o timestamp dos metadados")
    parser.add_argument("--verbose", action="store_true", help="Logging em DEBUG")
    return parser


def _output_format(args: argparse.Namespace) -> str:
    if args.format:
        return args.format
    if args.out and args.out.lower().endswith('.json'):
        return 'json'
    return 'csv'


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging('DEBUG' if args.verbose else None)

    if args.seed is not None and args.seed < 0:
        logger.error(f"❌ Seed deve ser não negativa (recebido {args.seed})")
        return EXIT_INVALID

    try:
        scenario = parse_scenario(args.scenario)
        table = run(args.command, scenario, seed=args.seed,
                    deterministic=args.deterministic or settings.deterministic)
        emit(table, _output_format(args), args.out)
    except (ScenarioError, DomainError) as e:
        logger.error(f"❌ Entrada inválida: {e}")
        return EXIT_INVALID
    except ConvergenceError as e:
        logger.error(f"❌ Falha numérica: {e}")
        return EXIT_NUMERICAL
    except OSError as e:
        logger.error(f"❌ Erro de I/O: {e}")
        return EXIT_IO

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
