"""
Beam Width & FoV Optimizer

Largura mínima de feixe (zeta^2 = beta) e FoV assintoticamente ótimo de
cada enlace, além da busca exaustiva por um FoV comum a toda a cadeia.

Features:
    - Largura mínima com marcador de "sem restrição"
    - FoV ótimo por raiz da equação de estacionariedade (brentq)
    - Fallback por grade em [sigma, 20 sigma] com passo 0.01 sigma
    - Busca exaustiva sobre FoV comum com a outage exata
    - Esquema assintótico: um FoV ótimo por enlace

Author: UAV-FSO Relay Team
Version: 1.0.0
"""

import math
import logging
from dataclasses import dataclass, asdict, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from ..errors import ConvergenceError, DegenerateCaseError, DomainError
from ..models.channel import EQUIVALENT_BEAM_OFFSET, LinkDerived
from ..services.analytic import e2e_outage, gamma_ratio

logger = logging.getLogger(__name__)

ROOT_TOL = 1e-10
GRID_LOW = 1.0        # em unidades de sigma_angle
GRID_HIGH = 20.0
GRID_STEP = 0.01
MAX_SEARCH_STEP = 1e-4  # rad


@dataclass
class FovSolution:
    """FoV ótimo de um enlace"""
    theta_opt: float
    residual: float
    method: str            # 'root' ou 'grid'
    objective: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class FovSearchResult:
    """Resultado da busca exaustiva de FoV comum"""
    theta_opt: float
    outage: float
    grid: np.ndarray = field(repr=False, default=None)
    curve: np.ndarray = field(repr=False, default=None)


@dataclass
class FovScheme:
    """FoVs assintoticamente ótimos por enlace e a outage exata resultante"""
    thetas: List[float]
    outage: float
    solutions: List[FovSolution] = field(default_factory=list)


def min_beam_width(beta: float, sigma_s2: float) -> Optional[float]:
    """
    Largura de feixe mínima que garante zeta^2 >= beta.

    Returns:
        w_min em metros, ou None quando qualquer largura serve
        (radicando negativo)
    """
    radicand = 4.0 * beta * sigma_s2 - EQUIVALENT_BEAM_OFFSET
    if radicand <= 0:
        return None
    return math.sqrt(radicand)


# ---------------------------------------------------------------------------
# FoV assintoticamente ótimo
# ---------------------------------------------------------------------------

class FovObjective:
    """
    Outage de alta potência em função do FoV:

        p(theta) = L + Theta (1 - L) theta^beta,   L = exp(-theta^2 / (2 m sigma^2))
    """

    def __init__(self, link: LinkDerived, p_link: Optional[float] = None):
        if p_link is not None:
            link = link.with_power(p_link)
        if abs(link.zeta2 - link.beta) < 1e-6:
            raise DegenerateCaseError(f"Enlace {link.index}: zeta2 ~ beta; ajuste a largura de feixe")
        if link.zeta2 < link.beta:
            w_min = min_beam_width(link.beta, link.sigma_s2)
            raise DomainError(
                f"Enlace {link.index}: zeta2={link.zeta2:.4g} < beta={link.beta:.4g}; "
                f"largura de feixe mínima {w_min} m")

        self.link = link
        self.beta = link.beta
        self.m = link.m
        self.sigma = link.sigma_angle
        a, b, z = link.alpha, link.beta, link.zeta2
        coeff = z / (b * (z - b)) * gamma_ratio([a - b], [a, b])
        # h_th é linear no FoV: o limiar com theta_FoV = 1 rad dá a razão
        self.theta_coeff = coeff * (link.with_fov(1.0).h_th / link.gain_scale) ** b

    def interruption(self, theta):
        return np.exp(-np.square(theta) / (2.0 * self.m * self.sigma ** 2))

    def __call__(self, theta):
        big_l = self.interruption(theta)
        return big_l + self.theta_coeff * (1.0 - big_l) * np.power(theta, self.beta)

    def residual(self, theta):
        """Lado esquerdo da equação de estacionariedade"""
        big_l = self.interruption(theta)
        return (self.m * self.theta_coeff * self.sigma ** 2 * self.beta
                * np.power(theta, self.beta - 2.0) * (1.0 - big_l)
                + self.theta_coeff * np.power(theta, self.beta) * big_l - big_l)


def solve_optimal_fov(link: LinkDerived, p_link: Optional[float] = None) -> FovSolution:
    """
    FoV assintoticamente ótimo de um enlace.

    A primeira troca de sinal do resíduo na grade [sigma, 20 sigma] é
    refinada com brentq; sem troca de sinal, usa o mínimo da grade.

    Raises:
        ConvergenceError: objetivo plano na grade (regime degenerado)
    """
    objective = FovObjective(link, p_link)
    sigma = objective.sigma
    count = int(round((GRID_HIGH - GRID_LOW) / GRID_STEP)) + 1
    grid = sigma * np.linspace(GRID_LOW, GRID_HIGH, count)
    residuals = objective.residual(grid)

    crossings = np.nonzero((residuals[:-1] < 0) & (residuals[1:] >= 0))[0]
    if len(crossings):
        i = int(crossings[0])
        if residuals[i + 1] == 0:
            theta = float(grid[i + 1])
        else:
            theta = optimize.brentq(objective.residual, grid[i], grid[i + 1],
                                    xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)
        residual = float(objective.residual(theta))
        if abs(residual) >= ROOT_TOL:
            raise ConvergenceError(f"Raiz do FoV com resíduo {residual:.3g}")
        logger.debug(f"FoV ótimo (raiz): {theta * 1e3:.4f} mrad, resíduo {residual:.2e}")
        return FovSolution(theta_opt=theta, residual=residual, method='root',
                           objective=float(objective(theta)))

    values = objective(grid)
    if np.ptp(values) <= 1e-15 * max(abs(float(np.max(values))), 1e-300):
        raise ConvergenceError(f"Enlace {link.index}: objetivo de FoV plano, regime degenerado")
    best = int(np.argmin(values))
    theta = float(grid[best])
    logger.warning(f"⚠️ Enlace {link.index}: sem troca de sinal, FoV pela grade ({theta * 1e3:.3f} mrad)")
    return FovSolution(theta_opt=theta, residual=float(objective.residual(theta)), method='grid',
                       objective=float(values[best]))


def asymptotic_fov_scheme(links: Sequence[LinkDerived], p_link: Optional[float] = None) -> FovScheme:
    """FoV ótimo por enlace e outage fim-a-fim exata com esses FoVs"""
    solutions = [solve_optimal_fov(link, p_link) for link in links]
    tuned = [link.with_fov(sol.theta_opt) for link, sol in zip(links, solutions)]
    outage = e2e_outage(tuned, p_link)
    logger.info(f"📡 Esquema assintótico: FoVs {[round(s.theta_opt * 1e3, 3) for s in solutions]} mrad, "
                f"outage {outage:.3e}")
    return FovScheme(thetas=[s.theta_opt for s in solutions], outage=outage, solutions=solutions)


# ---------------------------------------------------------------------------
# Busca exaustiva
# ---------------------------------------------------------------------------

def fov_grid(theta_min: float, theta_max: float, step: float) -> np.ndarray:
    if not (0 < theta_min < theta_max):
        raise DomainError(f"Grade de FoV inválida: [{theta_min}, {theta_max}]")
    if not 0 < step <= MAX_SEARCH_STEP * (1 + 1e-9):
        raise DomainError(f"Passo da grade deve estar em (0, 0.1 mrad] (recebido {step})")
    count = int(round((theta_max - theta_min) / step)) + 1
    return np.linspace(theta_min, theta_min + (count - 1) * step, count)


def exhaustive_fov_search(links: Sequence[LinkDerived], p_link: Optional[float],
                          grid: Tuple[float, float, float]) -> FovSearchResult:
    """FoV comum a todos os enlaces que minimiza a outage fim-a-fim exata"""
    thetas = fov_grid(*grid)
    curve = np.array([e2e_outage([link.with_fov(theta) for link in links], p_link)
                      for theta in thetas])
    best = int(np.argmin(curve))
    logger.info(f"🔎 Busca exaustiva: {len(thetas)} FoVs, ótimo {thetas[best] * 1e3:.2f} mrad "
                f"(outage {curve[best]:.3e})")
    return FovSearchResult(theta_opt=float(thetas[best]), outage=float(curve[best]),
                           grid=thetas, curve=curve)
