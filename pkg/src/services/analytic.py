"""
Analytic Outage Service

Avaliação em forma fechada da PDF do ganho total, da probabilidade de
outage por enlace (exata, limitante assintótico e aproximação perto da
origem) e da outage fim-a-fim de uma cadeia DF de relays.

Features:
    - MixedPdf: massa de Dirac em h=0 + densidade contínua (Meijer G)
    - Outage exata via Meijer G^{3,1}_{2,4}
    - Limitante assintótico (só flutuação de AoA)
    - Aproximação de alta potência com expoente kappa
    - OutageReport por ponto de uma varredura de potência
    - Dominância do enlace de maior distância

Author: UAV-FSO Relay Team
Version: 1.0.0
"""

import math
import logging
from dataclasses import dataclass, field, asdict
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from ..errors import DegenerateCaseError, DomainError
from ..models.channel import LinkDerived, LinkKind
from .specfun import MeijerPdfArgs, composed_cdf, meijer_g_pdf

logger = logging.getLogger(__name__)

DEGENERATE_TOL = 1e-6
LARGE_POWER_FRACTION = 0.1


@dataclass
class MixedPdf:
    """PDF mista: átomo em h = 0 mais densidade para h > 0"""
    atom_weight: float
    density: Callable[[Any], Any]
    cdf: Optional[Callable[[Any], Any]] = None

    def __post_init__(self):
        if not 0.0 <= self.atom_weight <= 1.0:
            raise DomainError(f"Peso do átomo fora de [0,1]: {self.atom_weight}")


@dataclass
class LinkOutage:
    """Outage de um enlace num ponto de potência"""
    index: int
    exact: float
    bound: float
    approx: float


@dataclass
class OutageReport:
    """Outage por enlace e fim-a-fim para uma potência por enlace"""
    p_link: float
    per_link: List[LinkOutage] = field(default_factory=list)
    e2e: float = 0.0
    e2e_bound: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _log_gamma_norm(link: LinkDerived) -> float:
    return math.lgamma(link.alpha) + math.lgamma(link.beta)


def gamma_ratio(numerator: Sequence[float], denominator: Sequence[float]) -> float:
    """prod Gamma(numerator) / prod Gamma(denominator) em escala log"""
    log_value = sum(special.gammaln(x) for x in numerator) - sum(special.gammaln(x) for x in denominator)
    sign = np.prod([special.gammasgn(x) for x in numerator])
    return float(sign * math.exp(log_value))


def total_gain_pdf(link: LinkDerived) -> MixedPdf:
    """PDF do ganho total h = h_l h_a h_pe h_aoa"""
    atom = link.atom_weight
    coeff = (1.0 - atom) * math.exp(
        math.log(link.zeta2) - math.log(link.gain_scale) - _log_gamma_norm(link))

    def scalar_density(h: float) -> float:
        if h <= 0:
            return 0.0
        x = h / link.gain_scale
        return coeff * meijer_g_pdf(MeijerPdfArgs(x, link.alpha, link.beta, link.zeta2))

    def scalar_cdf(h: float) -> float:
        if h < 0:
            return 0.0
        x = h / link.gain_scale
        return atom + (1.0 - atom) * composed_cdf(x, link.alpha, link.beta, link.zeta2)

    density = np.vectorize(scalar_density, otypes=[float])
    cdf = np.vectorize(scalar_cdf, otypes=[float])
    return MixedPdf(atom_weight=atom, density=density, cdf=cdf)


def link_outage(link: LinkDerived, p_link: Optional[float] = None) -> float:
    """Outage exata do enlace (CDF do ganho no limiar h_th)"""
    if p_link is not None:
        link = link.with_power(p_link)
    atom = link.atom_weight
    x = link.h_th / link.gain_scale
    p = atom + (1.0 - atom) * composed_cdf(x, link.alpha, link.beta, link.zeta2)
    return min(max(p, 0.0), 1.0)


def link_outage_bound(link: LinkDerived) -> float:
    """Limitante assintótico: piso de outage causado pela flutuação de AoA"""
    return link.atom_weight


def leading_exponent(link: LinkDerived) -> Tuple[float, float]:
    """
    Termo dominante da CDF perto da origem.

    Returns:
        (kappa, c) com P(h' < h) ~ c * (h / gain_scale)^kappa

    Raises:
        DegenerateCaseError: dois expoentes mais baixos coincidem
    """
    a, b, z = link.alpha, link.beta, link.zeta2
    exponents = sorted([(z, 'zeta2'), (b, 'beta'), (a, 'alpha')])
    if exponents[1][0] - exponents[0][0] < DEGENERATE_TOL:
        raise DegenerateCaseError(
            f"Enlace {link.index}: {exponents[0][1]} ~ {exponents[1][1]} "
            f"({exponents[0][0]:.8g}); ajuste a largura de feixe")

    kappa, which = exponents[0]
    if which == 'zeta2':
        coeff = gamma_ratio([a - z, b - z], [a, b])
    elif which == 'beta':
        coeff = z / (b * (z - b)) * gamma_ratio([a - b], [a, b])
    else:
        coeff = z / (a * (z - a)) * gamma_ratio([b - a], [a, b])
    return kappa, coeff


def link_outage_approx(link: LinkDerived, p_link: Optional[float] = None,
                       warn: bool = True) -> float:
    """Aproximação de alta potência: atom + (1-atom) c (h_th/gain_scale)^kappa"""
    if p_link is not None:
        link = link.with_power(p_link)
    if abs(link.zeta2 - link.beta) < DEGENERATE_TOL:
        raise DegenerateCaseError(
            f"Enlace {link.index}: zeta2 ~ beta ({link.zeta2:.8g}); ajuste a largura de feixe")
    if warn and link.h_th >= LARGE_POWER_FRACTION * link.gain_scale:
        logger.warning(f"⚠️ Enlace {link.index}: regime de alta potência não atingido "
                       f"(h_th={link.h_th:.3g}, escala={link.gain_scale:.3g})")

    kappa, coeff = leading_exponent(link)
    atom = link.atom_weight
    p = atom + (1.0 - atom) * coeff * (link.h_th / link.gain_scale) ** kappa
    return min(p, 1.0)


def _check_chain(links: Sequence[LinkDerived]) -> None:
    if not links:
        raise DomainError("Lista de enlaces vazia")
    if len(links) == 1:
        return
    kinds = [LinkKind(link.kind) for link in links]
    expected = [LinkKind.GU] + [LinkKind.UU] * (len(links) - 2) + [LinkKind.UG]
    if kinds != expected:
        raise DomainError(f"Cadeia deve ser GU, UU..., UG (recebido {[k.value for k in kinds]})")


def combine_outages(probabilities: Sequence[float]) -> float:
    """1 - prod(1 - p_i), estável para p_i muito pequenos"""
    if any(p >= 1.0 for p in probabilities):
        return 1.0
    return -math.expm1(math.fsum(math.log1p(-p) for p in probabilities))


def e2e_outage(links: Sequence[LinkDerived], p_link: Optional[float] = None) -> float:
    """Outage fim-a-fim: qualquer enlace em outage derruba a cadeia DF"""
    _check_chain(links)
    return combine_outages([link_outage(link, p_link) for link in links])


def e2e_outage_bound(links: Sequence[LinkDerived]) -> float:
    """Limitante assintótico fim-a-fim"""
    _check_chain(links)
    return combine_outages([link_outage_bound(link) for link in links])


def high_power_coefficient(link: LinkDerived) -> Tuple[float, float]:
    """
    Coeficientes (a_i, kappa_i) de p_i ~ a_i * P_t^(-kappa_i) com FoV grande.

    h_th * P_t não depende da potência, então o termo dominante da CDF
    vira uma lei de potência em P_t.
    """
    kappa, coeff = leading_exponent(link)
    threshold_power = link.h_th * link.p_link
    return coeff * (threshold_power / link.gain_scale) ** kappa, kappa


def max_distance_link(links: Sequence[LinkDerived]) -> int:
    """Posição (0-based) do enlace mais longo; empate fica com o primeiro"""
    if not links:
        raise DomainError("Lista de enlaces vazia")
    return max(range(len(links)), key=lambda i: (links[i].distance, -i))


def dominance_ratio(links: Sequence[LinkDerived], p_link: Optional[float] = None) -> float:
    """e2e_outage / outage do enlace de maior distância"""
    worst = links[max_distance_link(links)]
    return e2e_outage(links, p_link) / link_outage(worst, p_link)


def outage_report(links: Sequence[LinkDerived], p_grid: Sequence[float]) -> List[OutageReport]:
    """Outage exata, limitante e aproximação para cada potência da grade"""
    _check_chain(links)
    reports = []
    bound = e2e_outage_bound(links)

    for p_link in p_grid:
        per_link = []
        for link in links:
            try:
                approx = link_outage_approx(link, p_link, warn=False)
            except DegenerateCaseError:
                approx = float('nan')
            per_link.append(LinkOutage(
                index=link.index,
                exact=link_outage(link, p_link),
                bound=link_outage_bound(link),
                approx=approx,
            ))
        reports.append(OutageReport(
            p_link=p_link,
            per_link=per_link,
            e2e=combine_outages([item.exact for item in per_link]),
            e2e_bound=bound,
        ))

    logger.info(f"📊 Relatório de outage: {len(links)} enlaces x {len(reports)} potências")
    return reports
