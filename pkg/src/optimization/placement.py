"""
UAV Placement Optimizer

Posicionamento min-max dos relays UAV no plano comum de voo: minimiza a
maior distância de enlace sem que nenhum segmento atravesse obstáculos
cilíndricos (discos na altura dos UAVs).

Pipeline de cada multi-start:
    1. Nelder-Mead sobre max(Z_i) + penalidade quadrática de bloqueio
    2. SLSQP na forma epígrafe (min t, Z_i <= t, folga de 1 m)
    3. Equalização: minimiza a dispersão de Z_i com max(Z_i) travado

Features:
    - Margem contínua raio - distância(segmento, centro)
    - Atalho: espaçamento reto igual quando não há bloqueio
    - 16 multi-starts determinísticos (desvios laterais nos dois lados)
    - Seleção determinística: menor objetivo, empate pelo índice
    - Relatório com distâncias, contribuição residual de AoA e outage

Author: UAV-FSO Relay Team
Version: 1.0.0
"""

import math
import logging
from dataclasses import dataclass, asdict, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from ..errors import DomainError, InfeasibleGeometryError
from ..models.channel import SystemConfig, build_links, derive_links
from ..services.analytic import e2e_outage, e2e_outage_bound, max_distance_link
from ..settings import settings

logger = logging.getLogger(__name__)

Point = Tuple[float, float]

PENALTY_WEIGHT = 1e3
EQUALIZE_SLACK = 1e-4


@dataclass(frozen=True)
class Obstacle:
    """Obstáculo cilíndrico visto como disco no plano dos UAVs (metros)"""
    center: Point
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError(f"Raio do obstáculo deve ser positivo (recebido {self.radius})")

    def contains(self, point: Point) -> bool:
        return math.dist(point, self.center) < self.radius


@dataclass
class Topology:
    """Fonte, destino, relays e obstáculos"""
    source: Point
    destination: Point
    relays: List[Point] = field(default_factory=list)
    obstacles: List[Obstacle] = field(default_factory=list)

    @property
    def nodes(self) -> List[Point]:
        return [tuple(self.source)] + [tuple(p) for p in self.relays] + [tuple(self.destination)]

    @property
    def link_distances(self) -> List[float]:
        nodes = self.nodes
        return [math.dist(nodes[i], nodes[i + 1]) for i in range(len(nodes) - 1)]

    @property
    def max_distance(self) -> float:
        return max(self.link_distances)

    def blocked_links(self) -> List[Tuple[int, int]]:
        """Pares (enlace, obstáculo) bloqueados, índices a partir de 0"""
        nodes = self.nodes
        blocked = []
        for i in range(len(nodes) - 1):
            for j, obstacle in enumerate(self.obstacles):
                if segment_blocked(nodes[i], nodes[i + 1], obstacle)[0]:
                    blocked.append((i, j))
        return blocked

    def is_feasible(self) -> bool:
        return not self.blocked_links()

    def to_dict(self) -> Dict[str, Any]:
        return {
            'source': list(self.source),
            'destination': list(self.destination),
            'relays': [list(p) for p in self.relays],
            'obstacles': [{'center': list(o.center), 'radius': o.radius} for o in self.obstacles],
        }


@dataclass
class PlacementConfig:
    """Parâmetros do otimizador de posicionamento"""
    starts: int = field(default_factory=lambda: settings.placement_starts)
    seed: int = 0
    clearance: float = 1.0          # m
    jitter: float = 0.02            # fração do espaçamento reto
    max_iter: int = 4000


@dataclass
class PlacementReport:
    """Avaliação de uma topologia com o modelo completo do canal"""
    link_distances: List[float]
    max_distance: float
    max_link: int
    e2e_bound: float
    e2e_outage: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _segment_distance(p1: np.ndarray, p2: np.ndarray, center: np.ndarray) -> float:
    direction = p2 - p1
    length2 = float(direction @ direction)
    t = float(np.clip((center - p1) @ direction / length2, 0.0, 1.0))
    return float(np.linalg.norm(p1 + t * direction - center))


def segment_blocked(p1: Point, p2: Point, obstacle: Obstacle) -> Tuple[bool, float]:
    """
    Indicador de bloqueio do segmento p1-p2 pelo obstáculo.

    Returns:
        (bloqueado, margem) com margem = raio - distância(segmento, centro);
        bloqueado sse margem >= 0
    """
    a = np.asarray(p1, dtype=float)
    b = np.asarray(p2, dtype=float)
    if np.allclose(a, b, rtol=0.0, atol=0.0):
        raise DomainError(f"Segmento degenerado: {p1} == {p2}")
    margin = obstacle.radius - _segment_distance(a, b, np.asarray(obstacle.center, dtype=float))
    return margin >= 0.0, margin


def equidistant_topology(source: Point, destination: Point, n_relays: int,
                         obstacles: Sequence[Obstacle] = ()) -> Topology:
    """Relays colineares e igualmente espaçados entre fonte e destino"""
    if n_relays < 1:
        raise DomainError(f"São necessários ao menos 1 relay (recebido {n_relays})")
    s = np.asarray(source, dtype=float)
    d = np.asarray(destination, dtype=float)
    relays = [tuple(s + (k / (n_relays + 1)) * (d - s)) for k in range(1, n_relays + 1)]
    return Topology(source=tuple(source), destination=tuple(destination),
                    relays=[(float(x), float(y)) for x, y in relays], obstacles=list(obstacles))


class _PlacementProblem:
    """Problema normalizado: origem na fonte, escala |SD|"""

    def __init__(self, source: Point, destination: Point, n_relays: int,
                 obstacles: Sequence[Obstacle], config: PlacementConfig):
        self.origin = np.asarray(source, dtype=float)
        self.scale = float(np.linalg.norm(np.asarray(destination, dtype=float) - self.origin))
        self.n = n_relays
        self.config = config
        self.source = np.zeros(2)
        self.destination = self._to_local(destination)
        self.centers = np.array([self._to_local(o.center) for o in obstacles]).reshape(-1, 2)
        self.radii = np.array([o.radius / self.scale for o in obstacles])
        self.clearance = config.clearance / self.scale

    def _to_local(self, point: Point) -> np.ndarray:
        return (np.asarray(point, dtype=float) - self.origin) / self.scale

    def to_world(self, z: np.ndarray) -> List[Point]:
        coords = z.reshape(self.n, 2) * self.scale + self.origin
        return [(float(x), float(y)) for x, y in coords]

    def nodes(self, z: np.ndarray) -> np.ndarray:
        return np.vstack([self.source, z.reshape(self.n, 2), self.destination])

    def distances(self, z: np.ndarray) -> np.ndarray:
        return np.linalg.norm(np.diff(self.nodes(z), axis=0), axis=1)

    def clearances(self, z: np.ndarray) -> np.ndarray:
        """distância - raio - folga para cada par (enlace, obstáculo); >= 0 é viável"""
        nodes = self.nodes(z)
        start = nodes[:-1][:, None, :]
        direction = np.diff(nodes, axis=0)[:, None, :]
        centers = self.centers[None, :, :]
        length2 = np.sum(direction ** 2, axis=-1)
        t = np.clip(np.sum((centers - start) * direction, axis=-1) / np.where(length2 > 0, length2, 1.0),
                    0.0, 1.0)
        gap = np.linalg.norm(start + t[..., None] * direction - centers, axis=-1)
        return (gap - self.radii[None, :] - self.clearance).ravel()

    def penalized(self, z: np.ndarray) -> float:
        violation = np.minimum(self.clearances(z), 0.0)
        return float(np.max(self.distances(z)) + PENALTY_WEIGHT * np.sum(violation ** 2))

    def feasible(self, z: np.ndarray) -> bool:
        return bool(np.all(self.clearances(z) > -1e-9))

    def straight_line(self) -> np.ndarray:
        fractions = np.arange(1, self.n + 1) / (self.n + 1)
        return np.outer(fractions, self.destination).ravel()

    def starting_points(self) -> List[np.ndarray]:
        """Desvios laterais em seno, alternando lados e amplitudes"""
        rng = np.random.default_rng(self.config.seed)
        fractions = np.arange(1, self.n + 1) / (self.n + 1)
        base = np.outer(fractions, self.destination)
        normal = np.array([-self.destination[1], self.destination[0]])

        reach = 0.25
        for center, radius in zip(self.centers, self.radii):
            offset = abs(float(center @ normal))
            reach = max(reach, offset + radius + self.clearance)

        starts = []
        pairs = max(1, self.config.starts // 2)
        for s in range(self.config.starts):
            side = 1.0 if s % 2 == 0 else -1.0
            amplitude = side * reach * (0.5 + 1.5 * (s // 2) / pairs)
            bump = np.outer(np.sin(np.pi * fractions) * amplitude, normal)
            jitter = rng.normal(0.0, self.config.jitter / (self.n + 1), size=base.shape)
            starts.append((base + bump + jitter).ravel())
        return starts

    # --- fases do otimizador ---

    def nelder_mead(self, z0: np.ndarray) -> np.ndarray:
        result = optimize.minimize(
            self.penalized, z0, method='Nelder-Mead',
            options={'xatol': 1e-9, 'fatol': 1e-12, 'maxiter': self.config.max_iter,
                     'maxfev': 2 * self.config.max_iter, 'adaptive': True})
        return result.x

    def epigraph(self, z0: np.ndarray) -> np.ndarray:
        """min t sujeito a Z_i <= t e clearances >= 0"""
        x0 = np.append(z0, np.max(self.distances(z0)))
        constraints = [{'type': 'ineq', 'fun': lambda x: x[-1] - self.distances(x[:-1])}]
        if len(self.centers):
            constraints.append({'type': 'ineq', 'fun': lambda x: self.clearances(x[:-1])})
        result = optimize.minimize(lambda x: x[-1], x0, method='SLSQP', constraints=constraints,
                                   options={'ftol': 1e-12, 'maxiter': 500})
        return result.x[:-1]

    def equalize(self, z0: np.ndarray) -> np.ndarray:
        """Reduz a dispersão das distâncias sem aumentar o máximo"""
        cap = float(np.max(self.distances(z0))) * (1.0 + EQUALIZE_SLACK)
        constraints = [{'type': 'ineq', 'fun': lambda z: cap - self.distances(z)}]
        if len(self.centers):
            constraints.append({'type': 'ineq', 'fun': self.clearances})
        result = optimize.minimize(lambda z: float(np.var(self.distances(z))), z0, method='SLSQP',
                                   constraints=constraints, options={'ftol': 1e-14, 'maxiter': 500})
        return result.x

    def solve_start(self, z0: np.ndarray) -> Optional[np.ndarray]:
        """Executa as três fases; retorna o melhor ponto viável ou None"""
        z_nm = self.nelder_mead(z0)
        z_ep = self.epigraph(z_nm)
        candidates = [z for z in (z_nm, z_ep) if self.feasible(z)]
        if self.feasible(z_ep):
            z_eq = self.equalize(z_ep)
            if self.feasible(z_eq):
                candidates.append(z_eq)
        if not candidates:
            return None

        worst = [float(np.max(self.distances(z))) for z in candidates]
        tolerance = min(worst) * (1.0 + 2.0 * EQUALIZE_SLACK)
        # entre os empatados, o mais refinado (último)
        return [z for z, value in zip(candidates, worst) if value <= tolerance][-1]


def optimize_placement(source: Point, destination: Point, n_relays: int,
                       obstacles: Sequence[Obstacle] = (),
                       solver_config: Optional[PlacementConfig] = None) -> Topology:
    """
    Posicionamento min-max dos relays.

    Args:
        source, destination: coordenadas (m)
        n_relays: número N de UAVs
        obstacles: discos que não podem ser atravessados
        solver_config: multi-starts, seed e folga

    Returns:
        Topology viável que minimiza a maior distância de enlace

    Raises:
        DomainError: fonte == destino ou extremidade dentro de obstáculo
        InfeasibleGeometryError: nenhum multi-start viável
    """
    config = solver_config or PlacementConfig()
    if math.dist(source, destination) == 0:
        raise DomainError("Fonte e destino coincidem")
    for obstacle in obstacles:
        if obstacle.contains(source) or obstacle.contains(destination):
            raise DomainError(f"Extremidade dentro do obstáculo {obstacle}")

    problem = _PlacementProblem(source, destination, n_relays, obstacles, config)
    straight = problem.straight_line()
    if problem.feasible(straight):
        logger.info(f"✅ Linha reta livre: {n_relays} relays igualmente espaçados")
        return Topology(source=tuple(source), destination=tuple(destination),
                        relays=problem.to_world(straight), obstacles=list(obstacles))

    logger.info(f"🚀 Otimizando {n_relays} relays com {len(obstacles)} obstáculos "
                f"({config.starts} multi-starts)")
    best_value, best_z, best_start = math.inf, None, -1
    for index, z0 in enumerate(problem.starting_points()):
        z = problem.solve_start(z0)
        if z is None:
            logger.debug(f"Start {index}: inviável")
            continue
        value = float(np.max(problem.distances(z)))
        logger.debug(f"Start {index}: max Z = {value * problem.scale:.3f} m")
        if value < best_value * (1.0 - 1e-9):
            best_value, best_z, best_start = value, z, index

    if best_z is None:
        logger.error(f"❌ Nenhum dos {config.starts} multi-starts encontrou posição viável")
        raise InfeasibleGeometryError(
            f"Geometria inviável após {config.starts} multi-starts")

    topology = Topology(source=tuple(source), destination=tuple(destination),
                        relays=problem.to_world(best_z), obstacles=list(obstacles))
    if not topology.is_feasible():
        raise InfeasibleGeometryError(f"Melhor solução (start {best_start}) ainda bloqueada")
    logger.info(f"✅ Max distância {topology.max_distance:.2f} m (start {best_start})")
    return topology


def placement_report(topology: Topology, beam_width, fov, config: SystemConfig,
                     p_link: Optional[float] = None, rytov=None) -> PlacementReport:
    """Avalia a topologia com o modelo completo (inclui o AoA residual)"""
    distances = topology.link_distances
    links = derive_links(build_links(distances, beam_width, fov, rytov), config, p_link)
    return PlacementReport(
        link_distances=distances,
        max_distance=max(distances),
        max_link=max_distance_link(links),
        e2e_bound=e2e_outage_bound(links),
        e2e_outage=e2e_outage(links),
    )
