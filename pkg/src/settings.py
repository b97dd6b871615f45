"""
Configurações de runtime

Carrega variáveis de ambiente (ou do arquivo .env) que controlam o
paralelismo do Monte-Carlo, o otimizador de posicionamento e o logging.
Parâmetros físicos NÃO ficam aqui: vivem em SystemConfig e nos cenários.
"""

import os
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import psutil
from dotenv import load_dotenv

# Carregar variáveis de ambiente
load_dotenv()

LOG_FORMAT = '%(asctime)s [%(levelname)s] %(name)s: %(message)s'


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or value == '':
        return default
    try:
        return int(value)
    except ValueError:
        logging.getLogger(__name__).warning(f"⚠️ {name}={value!r} inválido - usando {default}")
        return default


@dataclass(frozen=True)
class RuntimeSettings:
    """Configuração de execução (não afeta resultados, exceto mc_streams)"""
    mc_streams: int = 8            # layout fixo de streams do RNG
    mc_workers: int = 1            # threads que consomem os streams
    mc_chunk: int = 1_000_000      # amostras por bloco vetorizado
    placement_starts: int = 16
    log_level: str = 'INFO'
    log_file: Optional[str] = None
    deterministic: bool = False


def load_settings() -> RuntimeSettings:
    """Lê as configurações do ambiente"""
    cores = psutil.cpu_count(logical=False) or os.cpu_count() or 1
    return RuntimeSettings(
        mc_streams=max(1, _env_int('FSO_MC_STREAMS', 8)),
        mc_workers=max(1, _env_int('FSO_MC_WORKERS', cores)),
        mc_chunk=max(1000, _env_int('FSO_MC_CHUNK', 1_000_000)),
        placement_starts=max(1, _env_int('FSO_PLACEMENT_STARTS', 16)),
        log_level=os.getenv('FSO_LOG_LEVEL', 'INFO').upper(),
        log_file=os.getenv('FSO_LOG_FILE') or None,
        deterministic=os.getenv('FSO_DETERMINISTIC', '').lower() in ('1', 'true', 'yes'),
    )


def configure_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> None:
    """Configura logging estruturado para os entry points"""
    settings = load_settings()
    handlers = [logging.StreamHandler()]
    log_file = log_file or settings.log_file
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=getattr(logging, (level or settings.log_level), logging.INFO),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


settings = load_settings()
