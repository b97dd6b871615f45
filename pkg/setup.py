#!/usr/bin/env python3
"""
Script de setup do UAV-FSO Relay Toolkit
Prepara o ambiente: versão do Python, dependências e diretórios de saída.

    python setup.py          # dependências de runtime
    python setup.py --dev    # inclui pytest, black, flake8 e mypy
"""

import subprocess
import sys
from pathlib import Path

MIN_PYTHON = (3, 10)

ESSENTIAL_FILES = [
    "requirements.txt",
    "run_cli.py",
    "src/services/specfun.py",
    "src/cli/main.py",
    "scenarios",
]


def run_step(command, description):
    """Executa um passo do setup e reporta o resultado"""
    print(f"\n🔄 {description}...")
    try:
        subprocess.run(command, check=True, capture_output=True, text=True)
    except subprocess.CalledProcessError as e:
        print(f"❌ Falha ao {description.lower()}: {e.stderr.strip()}")
        return False
    print(f"✅ {description} concluído")
    return True


def check_python_version():
    version = sys.version_info
    if version[:2] < MIN_PYTHON:
        print(f"❌ Python {version.major}.{version.minor} detectado; necessário {MIN_PYTHON[0]}.{MIN_PYTHON[1]}+")
        return False
    print(f"✅ Python {version.major}.{version.minor}.{version.micro}")
    return True


def missing_files():
    return [name for name in ESSENTIAL_FILES if not Path(name).exists()]


def main(dev=False):
    print("🚀 Setup do UAV-FSO Relay Toolkit")
    print("=" * 50)

    if not check_python_version():
        return False

    missing = missing_files()
    if missing:
        print(f"⚠️ Arquivos faltando: {', '.join(missing)}")
        return False

    for directory in ("results", "logs"):
        Path(directory).mkdir(exist_ok=True)
        print(f"📁 Diretório '{directory}' pronto")

    requirements = "requirements-dev.txt" if dev else "requirements.txt"
    if not run_step([sys.executable, "-m", "pip", "install", "-r", requirements],
                    f"Instalar dependências de {requirements}"):
        return False

    print("\n🎉 Setup concluído!")
    print("   python run_cli.py outage --scenario scenarios/fig6_e2e_outage_n2.json")
    print("   pytest -m 'not slow'")
    return True


if __name__ == "__main__":
    sys.exit(0 if main(dev="--dev" in sys.argv) else 1)
