"""
Scenario Commands

Lê arquivos de cenário e despacha cada comando do CLI para o módulo
correspondente, devolvendo uma ResultTable pronta para emit().

Features:
    - Validação do cenário com erros apontando campo/linha
    - Varredura genérica (potência, FoV, sigma_angle, N, Rytov)
    - Colunas por enlace e fim-a-fim (exata, limitante, aproximação)
    - Monte-Carlo, otimizadores de feixe/FoV e posicionamento

Author: UAV-FSO Relay Team
Version: 1.0.0
"""

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np
from pydantic import ValidationError

from ..collectors.montecarlo import (
    MonteCarloCollector, SimulationMode, empirical_pdf, estimate_e2e_outage,
)
from ..errors import ScenarioError
from ..models.channel import LinkDerived, LinkSpec, SystemConfig, derive_links, watts_to_dbm
from ..optimization.beam_fov import asymptotic_fov_scheme, exhaustive_fov_search, min_beam_width
from ..optimization.placement import optimize_placement, placement_report
from ..schemas.scenario_schemas import MRAD, Scenario
from ..services.analytic import (
    combine_outages, e2e_outage_bound, link_outage_bound, outage_report, total_gain_pdf,
)
from ..settings import settings
from .results import ResultTable, build_metadata

logger = logging.getLogger(__name__)

PDF_SPAN = 3.0   # h_max padrão em unidades de A*h_l


@dataclass
class SweepPoint:
    """Um ponto da varredura já convertido para SI"""
    value: Optional[float]
    n_relays: int
    config: SystemConfig
    specs: List[LinkSpec]

    @property
    def links(self) -> List[LinkDerived]:
        return derive_links(self.specs, self.config)


def parse_scenario(path: Union[str, Path]) -> Scenario:
    """
    Carrega e valida um cenário JSON.

    Raises:
        ScenarioError: JSON malformado (com linha) ou campo inválido
        OSError: arquivo inexistente ou ilegível
    """
    text = Path(path).read_text(encoding='utf-8')
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"JSON malformado: {e.msg}", line=e.lineno) from e

    try:
        scenario = Scenario.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = '.'.join(str(part) for part in first['loc'])
        raise ScenarioError(f"Cenário inválido: {first['msg']}", field=field or None) from e

    logger.info(f"✅ Cenário '{scenario.name}' carregado de {path}")
    return scenario


def sweep_points(scenario: Scenario) -> List[SweepPoint]:
    """Expande a varredura do cenário (ou o ponto único) em SweepPoints"""
    sweep = scenario.sweep
    base_n = scenario.n_relays
    if sweep is None:
        return [SweepPoint(None, base_n, scenario.system.to_config(base_n), scenario.link_specs())]

    points = []
    for value in sweep.grid():
        n_relays = base_n
        config = None
        specs = None
        if sweep.variable == 'p_link_dbm':
            config = scenario.system.to_config(base_n, p_link_dbm=value)
        elif sweep.variable == 'fov_mrad':
            specs = scenario.link_specs(fov_mrad=value)
        elif sweep.variable == 'sigma_angle_mrad':
            config = replace(scenario.system.to_config(base_n), sigma_angle_u=value * MRAD)
        elif sweep.variable == 'rytov':
            specs = [replace(spec, rytov=value) for spec in scenario.link_specs()]
        elif sweep.variable == 'n_relays':
            if scenario.topology is None:
                raise ScenarioError("varredura em 'n_relays' exige 'topology'", field='sweep.variable')
            n_relays = int(round(value))
            if n_relays < 1 or abs(n_relays - value) > 1e-9:
                raise ScenarioError(f"n_relays deve ser inteiro >= 1 (recebido {value})", field='sweep')
            specs = scenario.link_specs(n_relays=n_relays)

        points.append(SweepPoint(
            value=value,
            n_relays=n_relays,
            config=config or scenario.system.to_config(n_relays),
            specs=specs or scenario.link_specs(),
        ))
    return points


def _point_columns(scenario: Scenario, point: SweepPoint) -> Dict[str, Any]:
    row = {}
    if scenario.sweep is not None:
        row[scenario.sweep.variable] = point.value
    row['p_link_dbm'] = watts_to_dbm(point.config.p_link)
    return row


def _leading_columns(scenario: Scenario) -> List[str]:
    columns = [scenario.sweep.variable] if scenario.sweep is not None else []
    if 'p_link_dbm' not in columns:
        columns.append('p_link_dbm')
    return columns


def _max_links(points: List[SweepPoint]) -> int:
    return max(len(point.specs) for point in points)


# ---------------------------------------------------------------------------
# Comandos
# ---------------------------------------------------------------------------

def cmd_derive(scenario: Scenario, points: List[SweepPoint], seed: Optional[int]):
    rows = []
    for point in points:
        for link in point.links:
            row = _point_columns(scenario, point)
            row.update(link.to_dict())
            rows.append(row)
    return rows, None


def _outage_rows(scenario: Scenario, points: List[SweepPoint]):
    count = _max_links(points)
    columns = _leading_columns(scenario) + ['n_links']
    for i in range(1, count + 1):
        columns += [f'p{i}_exact', f'p{i}_bound', f'p{i}_approx']
    columns += ['e2e_exact', 'e2e_bound', 'e2e_approx']

    rows = []
    for point in points:
        links = point.links
        report = outage_report(links, [point.config.p_link])[0]
        row = _point_columns(scenario, point)
        row['n_links'] = len(links)
        for item in report.per_link:
            row[f'p{item.index}_exact'] = item.exact
            row[f'p{item.index}_bound'] = item.bound
            row[f'p{item.index}_approx'] = item.approx
        approx = [item.approx for item in report.per_link]
        row['e2e_exact'] = report.e2e
        row['e2e_bound'] = report.e2e_bound
        row['e2e_approx'] = (float('nan') if any(np.isnan(approx))
                             else combine_outages([min(p, 1.0) for p in approx]))
        rows.append(row)
    return rows, columns


def cmd_outage(scenario: Scenario, points: List[SweepPoint], seed: Optional[int]):
    return _outage_rows(scenario, points)


def cmd_sweep(scenario: Scenario, points: List[SweepPoint], seed: Optional[int]):
    if scenario.sweep is None:
        raise ScenarioError("o comando 'sweep' exige o bloco 'sweep'", field='sweep')
    return _outage_rows(scenario, points)


def cmd_outage_mc(scenario: Scenario, points: List[SweepPoint], seed: Optional[int]):
    if scenario.mc is None:
        raise ScenarioError("o comando 'outage-mc' exige o bloco 'mc'", field='mc')
    rows, columns = _outage_rows(scenario, points)
    columns += ['mc_e2e', 'mc_std_error', 'mc_hits', 'mc_n', 'mc_insufficient']
    mode = SimulationMode(scenario.mc.mode)
    collector = MonteCarloCollector()

    for row, point in zip(rows, points):
        estimate = estimate_e2e_outage(point.links, None, scenario.mc.n, seed, mode, collector)
        row.update({
            'mc_e2e': estimate.value,
            'mc_std_error': estimate.std_error,
            'mc_hits': estimate.hits,
            'mc_n': estimate.n,
            'mc_insufficient': estimate.insufficient,
        })
    return rows, columns


def cmd_bound(scenario: Scenario, points: List[SweepPoint], seed: Optional[int]):
    count = _max_links(points)
    columns = _leading_columns(scenario) + ['n_links']
    columns += [f'p{i}_bound' for i in range(1, count + 1)] + ['e2e_bound']
    rows = []
    for point in points:
        links = point.links
        row = _point_columns(scenario, point)
        row['n_links'] = len(links)
        for link in links:
            row[f'p{link.index}_bound'] = link_outage_bound(link)
        row['e2e_bound'] = e2e_outage_bound(links)
        rows.append(row)
    return rows, columns


def cmd_pdf(scenario: Scenario, points: List[SweepPoint], seed: Optional[int]):
    options = scenario.options.pdf
    mode = SimulationMode(scenario.mc.mode) if scenario.mc is not None else None
    collector = MonteCarloCollector() if mode is not None else None
    rows = []
    for point in points:
        for link in point.links:
            h_max = options.h_max or PDF_SPAN * link.A * link.h_loss
            h_min = options.h_min or 0.0
            edges = np.linspace(h_min, h_max, options.bins + 1)
            centers = 0.5 * (edges[:-1] + edges[1:])
            analytic = total_gain_pdf(link)
            density = np.asarray(analytic.density(centers), dtype=float)

            histogram = None
            if mode is not None:
                histogram = empirical_pdf(link, scenario.mc.n, edges, seed, mode, collector)

            for k in range(options.bins):
                row = _point_columns(scenario, point)
                row.update({
                    'link': link.index,
                    'kind': link.kind.value,
                    'bin_left': float(edges[k]),
                    'bin_right': float(edges[k + 1]),
                    'density_analytic': float(density[k]),
                    'density_mc': float(histogram.density[k]) if histogram is not None else float('nan'),
                    'atom_analytic': analytic.atom_weight,
                    'atom_mc': histogram.atom_frequency if histogram is not None else float('nan'),
                })
                rows.append(row)
    return rows, None


def cmd_opt_beam(scenario: Scenario, points: List[SweepPoint], seed: Optional[int]):
    rows = []
    for point in points:
        for link in point.links:
            w_min = min_beam_width(link.beta, link.sigma_s2)
            row = _point_columns(scenario, point)
            row.update({
                'link': link.index,
                'kind': link.kind.value,
                'distance': link.distance,
                'beta': link.beta,
                'sigma_s2': link.sigma_s2,
                'beam_width': link.beam_width,
                'zeta2': link.zeta2,
                'w_min': float('nan') if w_min is None else w_min,
                'no_constraint': w_min is None,
            })
            rows.append(row)
    return rows, None


def cmd_opt_fov(scenario: Scenario, points: List[SweepPoint], seed: Optional[int]):
    rows = []
    for point in points:
        scheme = asymptotic_fov_scheme(point.links)
        for link, solution in zip(point.links, scheme.solutions):
            row = _point_columns(scenario, point)
            row.update({
                'link': link.index,
                'kind': link.kind.value,
                'theta_opt_mrad': solution.theta_opt / MRAD,
                'theta_normalized': solution.theta_opt / link.sigma_angle,
                'residual': solution.residual,
                'method': solution.method,
                'objective': solution.objective,
                'e2e_outage': scheme.outage,
            })
            rows.append(row)
    return rows, None


def cmd_opt_fov_grid(scenario: Scenario, points: List[SweepPoint], seed: Optional[int]):
    grid = scenario.options.fov_grid.to_radians()
    rows = []
    for point in points:
        result = exhaustive_fov_search(point.links, None, grid)
        row = _point_columns(scenario, point)
        row.update({
            'n_links': len(point.specs),
            'theta_opt_mrad': result.theta_opt / MRAD,
            'e2e_outage': result.outage,
        })
        rows.append(row)
    return rows, None


def cmd_opt_place(scenario: Scenario, points: List[SweepPoint], seed: Optional[int]):
    topology_model = scenario.topology
    if topology_model is None:
        raise ScenarioError("o comando 'opt-place' exige 'topology'", field='topology')
    solver_config = scenario.options.placement.to_config()
    obstacles = [o.to_obstacle() for o in topology_model.obstacles]
    source = tuple(topology_model.source)
    destination = tuple(topology_model.destination)

    count = max(point.n_relays for point in points)
    columns = _leading_columns(scenario) + ['n_relays']
    columns += [f'relay{k}_{axis}' for k in range(1, count + 1) for axis in ('x', 'y')]
    columns += [f'z{i}' for i in range(1, count + 2)]
    columns += ['max_distance', 'max_link', 'blocked_links', 'e2e_bound', 'e2e_outage']

    rows = []
    for point in points:
        topology = optimize_placement(source, destination, point.n_relays, obstacles, solver_config)
        report = placement_report(topology, topology_model.beam_width, topology_model.fov_mrad * MRAD,
                                  point.config, rytov=None if topology_model.rytov is None
                                  else [topology_model.rytov] * (point.n_relays + 1))
        row = _point_columns(scenario, point)
        row['n_relays'] = point.n_relays
        for k, (x, y) in enumerate(topology.relays, start=1):
            row[f'relay{k}_x'] = x
            row[f'relay{k}_y'] = y
        for i, distance in enumerate(report.link_distances, start=1):
            row[f'z{i}'] = distance
        row.update({
            'max_distance': report.max_distance,
            'max_link': report.max_link + 1,
            'blocked_links': len(topology.blocked_links()),
            'e2e_bound': report.e2e_bound,
            'e2e_outage': report.e2e_outage,
        })
        rows.append(row)
    return rows, columns


COMMANDS: Dict[str, Callable] = {
    'derive': cmd_derive,
    'pdf': cmd_pdf,
    'outage': cmd_outage,
    'outage-mc': cmd_outage_mc,
    'bound': cmd_bound,
    'opt-beam': cmd_opt_beam,
    'opt-fov': cmd_opt_fov,
    'opt-fov-grid': cmd_opt_fov_grid,
    'opt-place': cmd_opt_place,
    'sweep': cmd_sweep,
}


def run(command: str, scenario: Scenario, seed: Optional[int] = None,
        deterministic: Optional[bool] = None) -> ResultTable:
    """
    Executa um comando sobre o cenário.

    Args:
        command: um dos COMMANDS
        scenario: cenário validado
        seed: sobrescreve mc.seed
        deterministic: suprime o timestamp dos metadados

    Returns:
        ResultTable com metadados para repetir a execução
    """
    if command not in COMMANDS:
        raise ScenarioError(f"Comando desconhecido: {command}", field='command')
    if seed is None and scenario.mc is not None:
        seed = scenario.mc.seed
    if deterministic is None:
        deterministic = settings.deterministic

    logger.info(f"🚀 {command} em '{scenario.name}'")
    points = sweep_points(scenario)
    rows, columns = COMMANDS[command](scenario, points, seed)

    metadata = build_metadata(command, scenario.model_dump(mode='json'), seed, deterministic)
    table = ResultTable.from_rows(rows, columns=columns, metadata=metadata)
    logger.info(f"✅ {command}: {len(table)} linhas")
    return table
