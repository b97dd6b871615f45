"""
Channel Model - Enlaces FSO de UAVs em hovering

Deriva todos os parâmetros estatísticos de cada enlace a partir das
entradas físicas: turbulência Gamma-Gamma, perda atmosférica, variância
de deslocamento por tipo de enlace, geometria do erro de apontamento,
interrupção por flutuação de AoA, ruído e limiar de ganho de outage.

Tipos de enlace:
    - GU: solo -> UAV (primeiro enlace)
    - UU: UAV -> UAV (enlaces intermediários)
    - UG: UAV -> solo (último enlace)

Features:
    - SystemConfig imutável com os valores padrão do sistema
    - LinkSpec/LinkDerived imutáveis e seguros entre threads
    - Largura de feixe equivalente aproximada ou exata (switch)
    - Override opcional da variância de Rytov por enlace
    - Conversão dBm <-> W nas bordas

Unidades internas: metros, radianos, watts. A atenuação é dada em km^-1
e convertida aqui.

Author: UAV-FSO Relay Team
Version: 1.0.0
"""

import math
import logging
from dataclasses import dataclass, asdict, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from ..errors import DomainError
from ..services.specfun import erf

logger = logging.getLogger(__name__)

# Constante da aproximação da largura de feixe equivalente (m^2)
EQUIVALENT_BEAM_OFFSET = 3.0 / (2.0 * math.sqrt(2.0))


class LinkKind(str, Enum):
    """Tipo de enlace"""
    GU = 'GU'
    UU = 'UU'
    UG = 'UG'

    @property
    def aoa_order(self) -> int:
        """m da distribuição de Rayleigh do AoA (2 quando os dois lados oscilam)"""
        return 2 if self is LinkKind.UU else 1


@dataclass(frozen=True)
class SystemConfig:
    """Constantes físicas e parâmetros de hardware"""
    wavelength: float = 1550e-9        # m
    cn2: float = 5e-14                 # m^(-2/3)
    responsivity: float = 0.9          # A/W
    attenuation: float = 1.0           # km^-1
    noise_coeff: float = 1e-9          # W^2 rad^-2
    sigma_p_u: float = 0.1             # m
    sigma_p_g: float = 0.1             # m
    sigma_angle_u: float = 1.2e-3      # rad
    aperture_radius: float = 0.05      # m
    snr_threshold: float = 10.0        # linear
    p_link: float = 0.01               # W por enlace
    p_total: Optional[float] = None    # W, dividido entre os N+1 enlaces
    exact_equivalent_beam: bool = False

    def __post_init__(self):
        for name in ('wavelength', 'cn2', 'responsivity', 'attenuation', 'noise_coeff',
                     'sigma_p_u', 'sigma_p_g', 'sigma_angle_u', 'aperture_radius',
                     'snr_threshold', 'p_link'):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"SystemConfig.{name} deve ser positivo (recebido {value})")
        if self.p_total is not None and not self.p_total > 0:
            raise DomainError(f"SystemConfig.p_total deve ser positivo (recebido {self.p_total})")

    @classmethod
    def from_total_power(cls, p_total: float, n_relays: int, **kwargs) -> 'SystemConfig':
        """Divide a potência total igualmente entre os N+1 enlaces"""
        if n_relays < 0:
            raise DomainError(f"Número de relays inválido: {n_relays}")
        return cls(p_link=p_total / (n_relays + 1), p_total=p_total, **kwargs)

    def with_power(self, p_link: float) -> 'SystemConfig':
        return replace(self, p_link=p_link)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class LinkSpec:
    """Entradas ajustáveis de um enlace"""
    index: int
    kind: LinkKind
    distance: float        # m
    beam_width: float      # m
    fov: float             # rad
    rytov: Optional[float] = None

    def __post_init__(self):
        if self.index < 1:
            raise DomainError(f"Índice de enlace começa em 1 (recebido {self.index})")
        for name in ('distance', 'beam_width'):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"LinkSpec.{name} deve ser positivo (recebido {value})")
        # FoV nulo: interrupção certa (h_aoa = 0 sempre)
        if not (self.fov >= 0 and math.isfinite(self.fov)):
            raise DomainError(f"LinkSpec.fov deve ser >= 0 (recebido {self.fov})")
        if self.rytov is not None and not self.rytov > 0:
            raise DomainError(f"LinkSpec.rytov deve ser positivo (recebido {self.rytov})")

    def with_fov(self, fov: float) -> 'LinkSpec':
        return replace(self, fov=fov)

    def with_beam_width(self, beam_width: float) -> 'LinkSpec':
        return replace(self, beam_width=beam_width)


@dataclass(frozen=True)
class LinkDerived:
    """Todos os parâmetros derivados de um enlace (imutável)"""
    index: int
    kind: LinkKind
    distance: float
    beam_width: float
    fov: float
    rytov: float
    alpha: float
    beta: float
    h_loss: float
    sigma_s2: float
    v: float
    A: float
    w_zeq2: float
    zeta2: float
    m: int
    sigma_angle: float
    sigma_p_u: float
    sigma_p_g: float
    sigma_n2: float
    h_th: float
    p_link: float

    @property
    def atom_weight(self) -> float:
        """Massa em h = 0 (probabilidade de interrupção por AoA)"""
        return aoa_interruption_prob(self.fov, self.sigma_angle, self.m)

    @property
    def gain_scale(self) -> float:
        """A*h_l/(alpha*beta): escala do argumento das Meijer G"""
        return self.A * self.h_loss / (self.alpha * self.beta)

    @property
    def spec(self) -> LinkSpec:
        return LinkSpec(self.index, self.kind, self.distance, self.beam_width, self.fov, self.rytov)

    def with_power(self, p_link: float) -> 'LinkDerived':
        """Mesmo enlace com outra potência: só h_th muda (h_th * P_t é constante)"""
        if not p_link > 0:
            raise DomainError(f"Potência por enlace deve ser positiva (recebido {p_link})")
        return replace(self, h_th=self.h_th * self.p_link / p_link, p_link=p_link)

    def with_fov(self, fov: float) -> 'LinkDerived':
        """Mesmo enlace com outro FoV: h_th é linear e sigma_n^2 quadrático em theta_FoV"""
        if not fov > 0:
            raise DomainError(f"FoV deve ser positivo (recebido {fov})")
        if self.fov == 0:
            raise DomainError(f"Enlace {self.index} derivado com FoV nulo; derive de novo a partir do LinkSpec")
        ratio = fov / self.fov
        return replace(self, fov=fov, h_th=self.h_th * ratio, sigma_n2=self.sigma_n2 * ratio ** 2)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['kind'] = self.kind.value
        data['atom_weight'] = self.atom_weight
        return data


@dataclass
class ImpairmentSample:
    """Bloco vetorizado de amostras das quatro degradações"""
    h_l: float
    h_a: np.ndarray
    h_pe: np.ndarray
    h_aoa: np.ndarray
    r_tr: np.ndarray
    theta_a: np.ndarray

    @property
    def gain(self) -> np.ndarray:
        return self.h_l * self.h_a * self.h_pe * self.h_aoa

    def __len__(self) -> int:
        return len(self.h_a)


# ---------------------------------------------------------------------------
# Conversões
# ---------------------------------------------------------------------------

def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_watts: float) -> float:
    if not p_watts > 0:
        raise DomainError(f"Potência deve ser positiva (recebido {p_watts})")
    return 10.0 * math.log10(p_watts) + 30.0


# ---------------------------------------------------------------------------
# Turbulência e perda
# ---------------------------------------------------------------------------

def rytov_variance(distance: float, cn2: float, wavelength: float) -> float:
    """sigma_R^2 = 1.23 Cn^2 k^(7/6) Z^(11/6), k = 2 pi / lambda"""
    if distance < 0:
        raise DomainError(f"Distância negativa: {distance}")
    k = 2.0 * math.pi / wavelength
    return 1.23 * cn2 * k ** (7.0 / 6.0) * distance ** (11.0 / 6.0)


def turbulence_params(sigma_r2: float) -> Tuple[float, float]:
    """Parâmetros (alpha, beta) dos turbilhões de grande e pequena escala"""
    if not sigma_r2 > 0:
        raise DomainError(f"Variância de Rytov deve ser positiva (recebido {sigma_r2})")
    s125 = sigma_r2 ** 1.2  # sigma_R^(12/5)
    alpha = 1.0 / math.expm1(0.49 * sigma_r2 / (1.0 + 1.11 * s125) ** (7.0 / 6.0))
    beta = 1.0 / math.expm1(0.51 * sigma_r2 / (1.0 + 0.69 * s125) ** (5.0 / 6.0))
    return alpha, beta


def gamma_gamma_pdf(h, alpha: float, beta: float):
    """Densidade Gamma-Gamma de h_a (média unitária), vetorizada"""
    h = np.asarray(h, dtype=float)
    out = np.zeros_like(h)
    positive = h > 0
    hp = h[positive]
    arg = 2.0 * np.sqrt(alpha * beta * hp)
    log_pdf = (math.log(2.0) + 0.5 * (alpha + beta) * math.log(alpha * beta)
               - special.gammaln(alpha) - special.gammaln(beta)
               + (0.5 * (alpha + beta) - 1.0) * np.log(hp)
               + np.log(special.kve(alpha - beta, arg)) - arg)
    out[positive] = np.exp(log_pdf)
    return out if out.ndim else float(out)


def atmospheric_loss(distance: float, attenuation: float) -> float:
    """Beer-Lambert: exp(-Z*Phi) com Z em metros e Phi em km^-1"""
    if distance < 0:
        raise DomainError(f"Distância negativa: {distance}")
    return math.exp(-distance * attenuation / 1000.0)


# ---------------------------------------------------------------------------
# Apontamento e AoA
# ---------------------------------------------------------------------------

def displacement_variance(kind: LinkKind, distance: float, config: SystemConfig) -> float:
    """sigma_s^2 total por tipo de enlace"""
    kind = LinkKind(kind)
    base = config.sigma_p_u ** 2
    angular = (distance * config.sigma_angle_u) ** 2
    if kind is LinkKind.GU:
        return base + config.sigma_p_g ** 2
    if kind is LinkKind.UU:
        return 2.0 * base + angular
    return base + config.sigma_p_g ** 2 + angular


def equivalent_beam_width2(beam_width: float, v: float, exact: bool = False) -> float:
    """w_zeq^2: aproximação w_z^2 + 3/(2 sqrt 2) ou forma exata"""
    if not exact:
        return beam_width ** 2 + EQUIVALENT_BEAM_OFFSET
    return beam_width ** 2 * math.sqrt(math.pi) * erf(v) / (2.0 * v * math.exp(-v * v))


def pointing_params(aperture_radius: float, beam_width: float, sigma_s2: float,
                    exact: bool = False) -> Tuple[float, float, float, float]:
    """
    Geometria do erro de apontamento.

    Returns:
        (v, A, w_zeq2, zeta2)
    """
    if not (aperture_radius > 0 and beam_width > 0 and sigma_s2 > 0):
        raise DomainError("r_a, w_z e sigma_s^2 devem ser positivos")
    v = math.sqrt(math.pi) * aperture_radius / (math.sqrt(2.0) * beam_width)
    a0 = erf(v) ** 2
    w_zeq2 = equivalent_beam_width2(beam_width, v, exact)
    zeta2 = w_zeq2 / (4.0 * sigma_s2)
    return v, a0, w_zeq2, zeta2


def aoa_interruption_prob(fov: float, sigma_angle: float, m: int) -> float:
    """Peso da massa de Dirac em h_aoa = 0"""
    if fov < 0:
        raise DomainError(f"FoV negativo: {fov}")
    return math.exp(-fov ** 2 / (2.0 * m * sigma_angle ** 2))


# ---------------------------------------------------------------------------
# Ruído e limiar
# ---------------------------------------------------------------------------

def noise_variance(fov: float, noise_coeff: float) -> float:
    """sigma_n^2 = Lambda * theta_FoV^2"""
    return noise_coeff * fov ** 2


def gain_threshold(fov: float, p_link: float, responsivity: float,
                   noise_coeff: float, snr_threshold: float) -> float:
    """h_th = theta_FoV/(R P_t) * sqrt(Upsilon_th Lambda / 2)"""
    if not p_link > 0:
        raise DomainError(f"Potência por enlace deve ser positiva (recebido {p_link})")
    return fov / (responsivity * p_link) * math.sqrt(snr_threshold * noise_coeff / 2.0)


# ---------------------------------------------------------------------------
# Composição
# ---------------------------------------------------------------------------

def derive_link(spec: LinkSpec, config: SystemConfig, p_link: Optional[float] = None) -> LinkDerived:
    """Compõe todas as derivações de um enlace"""
    p_link = config.p_link if p_link is None else p_link
    kind = LinkKind(spec.kind)

    rytov = spec.rytov if spec.rytov is not None else rytov_variance(
        spec.distance, config.cn2, config.wavelength)
    alpha, beta = turbulence_params(rytov)
    if beta <= 1.0:
        logger.warning(f"⚠️ Enlace {spec.index}: beta={beta:.3f} <= 1 (turbulência muito forte)")

    sigma_s2 = displacement_variance(kind, spec.distance, config)
    v, a0, w_zeq2, zeta2 = pointing_params(config.aperture_radius, spec.beam_width, sigma_s2,
                                           exact=config.exact_equivalent_beam)
    sigma_n2 = noise_variance(spec.fov, config.noise_coeff)
    h_th = gain_threshold(spec.fov, p_link, config.responsivity,
                          config.noise_coeff, config.snr_threshold)

    return LinkDerived(
        index=spec.index, kind=kind, distance=spec.distance, beam_width=spec.beam_width,
        fov=spec.fov, rytov=rytov, alpha=alpha, beta=beta,
        h_loss=atmospheric_loss(spec.distance, config.attenuation),
        sigma_s2=sigma_s2, v=v, A=a0, w_zeq2=w_zeq2, zeta2=zeta2,
        m=kind.aoa_order, sigma_angle=config.sigma_angle_u,
        sigma_p_u=config.sigma_p_u, sigma_p_g=config.sigma_p_g,
        sigma_n2=sigma_n2, h_th=h_th, p_link=p_link,
    )


def link_kinds(n_relays: int) -> List[LinkKind]:
    """[GU, UU, ..., UG] para N relays"""
    if n_relays < 1:
        raise DomainError(f"São necessários ao menos 1 relay (recebido {n_relays})")
    return [LinkKind.GU] + [LinkKind.UU] * (n_relays - 1) + [LinkKind.UG]


def build_links(distances: Sequence[float], beam_width, fov,
                rytov: Optional[Sequence[Optional[float]]] = None) -> List[LinkSpec]:
    """
    Monta a cadeia de enlaces GU, UU..., UG.

    beam_width e fov aceitam escalar (comum a todos) ou sequência por enlace.
    """
    count = len(distances)
    kinds = link_kinds(count - 1)

    def per_link(value, name):
        if np.isscalar(value):
            return [float(value)] * count
        if len(value) != count:
            raise DomainError(f"{name}: esperados {count} valores, recebidos {len(value)}")
        return [float(x) for x in value]

    widths = per_link(beam_width, 'beam_width')
    fovs = per_link(fov, 'fov')
    rytovs = [None] * count if rytov is None else list(rytov)
    if len(rytovs) != count:
        raise DomainError(f"rytov: esperados {count} valores, recebidos {len(rytovs)}")

    return [
        LinkSpec(index=i + 1, kind=kinds[i], distance=float(distances[i]),
                 beam_width=widths[i], fov=fovs[i], rytov=rytovs[i])
        for i in range(count)
    ]


def derive_links(specs: Sequence[LinkSpec], config: SystemConfig,
                 p_link: Optional[float] = None) -> List[LinkDerived]:
    return [derive_link(spec, config, p_link) for spec in specs]
