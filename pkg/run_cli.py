#!/usr/bin/env python3
"""
Script para executar o CLI do UAV-FSO Relay Toolkit
"""

import sys
from dotenv import load_dotenv

# Carrega variáveis de ambiente
load_dotenv()

from src.cli.main import main  # noqa: E402

if __name__ == "__main__":
    if len(sys.argv) < 2:
        print("🚀 UAV-FSO Relay Toolkit")
        print("📡 Uso: python run_cli.py <comando> --scenario scenarios/fig6_e2e_outage_n2.json")
        print("📊 Comandos: derive, pdf, outage, outage-mc, bound, opt-beam, "
              "opt-fov, opt-fov-grid, opt-place, sweep")
        sys.exit(1)
    sys.exit(main())
