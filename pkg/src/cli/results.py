"""
Result tables

Tabela de resultados (pandas) com metadados suficientes para repetir a
execução, e a escrita/leitura em CSV ou JSON.

CSV: metadados em linhas '#', cabeçalho, '.' decimal e floats com
precisão de ida e volta. JSON: objeto com metadata, columns e rows.
"""

import io
import math
import sys
import json
import hashlib
import logging
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

TOOL_VERSION = '1.0.0'


@dataclass
class ResultTable:
    """Colunas + linhas tipadas + metadados"""
    frame: pd.DataFrame
    metadata: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_rows(cls, rows: List[Dict[str, Any]], columns: Optional[List[str]] = None,
                  metadata: Optional[Dict[str, Any]] = None) -> 'ResultTable':
        frame = pd.DataFrame(rows, columns=columns)
        return cls(frame=frame, metadata=dict(metadata or {}))

    @property
    def columns(self) -> List[str]:
        return list(self.frame.columns)

    def __len__(self) -> int:
        return len(self.frame)


def scenario_hash(payload: Dict[str, Any]) -> str:
    """SHA-256 do cenário em JSON canônico"""
    canonical = json.dumps(payload, sort_keys=True, separators=(',', ':'), default=str)
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def build_metadata(command: str, payload: Dict[str, Any], seed: Optional[int],
                   deterministic: bool) -> Dict[str, Any]:
    metadata = {
        'command': command,
        'scenario_hash': scenario_hash(payload),
        'tool_version': TOOL_VERSION,
        'seed': seed,
    }
    if not deterministic:
        metadata['generated_at'] = datetime.now().isoformat(timespec='seconds')
    return metadata


def _json_value(value: Any) -> Any:
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        # JSON não tem NaN nem infinito
        return float(value) if math.isfinite(value) else None
    return value


def render(table: ResultTable, fmt: str = 'csv') -> str:
    """Serializa a tabela no formato pedido"""
    if fmt == 'csv':
        buffer = io.StringIO()
        for key, value in table.metadata.items():
            buffer.write(f"# {key}={json.dumps(_json_value(value))}\n")
        table.frame.to_csv(buffer, index=False, lineterminator='\n')
        return buffer.getvalue()
    if fmt == 'json':
        rows = [[_json_value(v) for v in row] for row in table.frame.itertuples(index=False, name=None)]
        document = {
            'metadata': {k: _json_value(v) for k, v in table.metadata.items()},
            'columns': table.columns,
            'rows': rows,
        }
        return json.dumps(document, indent=2, allow_nan=False) + '\n'
    raise ValueError(f"Formato desconhecido: {fmt}")


def emit(table: ResultTable, fmt: str = 'csv', path: Optional[Union[str, Path]] = None) -> None:
    """Escreve a tabela em `path` (ou stdout)"""
    text = render(table, fmt)
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        handle.write(text)
    logger.info(f"💾 {len(table)} linhas gravadas em {path}")


def read_table(path: Union[str, Path]) -> ResultTable:
    """Lê uma tabela gravada por emit (formato pela extensão/conteúdo)"""
    path = Path(path)
    text = path.read_text(encoding='utf-8')

    if text.lstrip().startswith('{'):
        document = json.loads(text)
        frame = pd.DataFrame(document['rows'], columns=document['columns'])
        return ResultTable(frame=frame, metadata=document.get('metadata', {}))

    metadata = {}
    body = []
    for line in text.splitlines(keepends=True):
        if line.startswith('# ') and not body:
            key, _, value = line[2:].rstrip('\n').partition('=')
            metadata[key] = json.loads(value)
        else:
            body.append(line)
    frame = pd.read_csv(io.StringIO(''.join(body)), float_precision='round_trip')
    return ResultTable(frame=frame, metadata=metadata)
