"""
Monte-Carlo Collector - Simulação das quatro degradações do canal

Coletor paralelo e semeado que amostra turbulência, erro de apontamento,
flutuação de AoA e perda atmosférica, produzindo PDFs empíricas e
estimativas de outage que servem de oráculo para o serviço analítico.

Features:
    - Streams de RNG pré-alocados (SeedSequence + PCG64), um por worker
    - Modo correlacionado: a orientação do transmissor alimenta o
      deslocamento de apontamento e o AoA ao mesmo tempo
    - Execução concorrente limitada por semáforo (asyncio + threads)
    - Merge determinístico pela ordem dos streams
    - Contagem separada do átomo h = 0 (nunca entra no histograma)
    - Exportação do histograma em CSV

O resultado depende apenas de (seed, n, n_streams, chunk); o número de
workers não altera nenhuma estimativa.

Author: UAV-FSO Relay Team
Version: 1.0.0
"""

import math
import asyncio
import logging
from dataclasses import dataclass, asdict
from datetime import datetime, timedelta
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..errors import DomainError
from ..models.channel import ImpairmentSample, LinkDerived, LinkKind
from ..settings import settings

logger = logging.getLogger(__name__)

MIN_SAMPLES = 10_000
RARE_EVENT_LIMIT = 1e-7

Orientation = Tuple[np.ndarray, np.ndarray]


class SimulationMode(str, Enum):
    """Modo de acoplamento entre apontamento e AoA"""
    INDEPENDENT = 'independent'
    CORRELATED = 'correlated'


@dataclass(frozen=True)
class RngStream:
    """Stream de números aleatórios reprodutível"""
    seed: int
    stream_id: int

    def generator(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(sequence))


@dataclass
class McEstimate:
    """Estimativa Monte-Carlo de uma probabilidade"""
    value: float
    std_error: float
    n: int
    hits: int = 0
    insufficient: bool = False

    @classmethod
    def from_counts(cls, hits: int, n: int) -> 'McEstimate':
        value = hits / n
        std_error = math.sqrt(value * (1.0 - value) / n)
        insufficient = value < RARE_EVENT_LIMIT
        return cls(value=value, std_error=std_error, n=n, hits=hits, insufficient=insufficient)

    def within(self, reference: float, sigmas: float = 3.0) -> bool:
        """True se a referência cai dentro de `sigmas` erros padrão"""
        return abs(self.value - reference) <= sigmas * self.std_error

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class EmpiricalPdf:
    """Histograma normalizado em h > 0 + frequência do átomo h = 0"""
    bin_edges: np.ndarray
    counts: np.ndarray
    atom_count: int
    n: int
    overflow: int = 0

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.n * self.widths)

    @property
    def atom_frequency(self) -> float:
        return self.atom_count / self.n

    @property
    def total_mass(self) -> float:
        return self.atom_frequency + float(np.sum(self.density * self.widths))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'bin_left': self.bin_edges[:-1],
            'bin_right': self.bin_edges[1:],
            'density': self.density,
        })

    def to_csv(self, path: Union[str, Path]) -> Path:
        """CSV bin_left,bin_right,density precedido do registro do átomo"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='') as handle:
            handle.write(f"# atom={self.atom_frequency!r}\n")
            self.to_frame().to_csv(handle, index=False, float_format='%.17g')
        logger.info(f"💾 Histograma exportado: {path}")
        return path


@dataclass
class SimulationStats:
    """Estatísticas de uma execução Monte-Carlo"""
    samples: int = 0
    streams: int = 0
    workers: int = 0
    start_time: datetime = None
    end_time: datetime = None

    @property
    def duration(self) -> timedelta:
        if not self.start_time or not self.end_time:
            return timedelta(0)
        return self.end_time - self.start_time

    @property
    def samples_per_second(self) -> float:
        seconds = self.duration.total_seconds()
        return self.samples / seconds if seconds > 0 else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


# ---------------------------------------------------------------------------
# Amostradores
# ---------------------------------------------------------------------------

def _has_tx_orientation(kind: LinkKind) -> bool:
    return kind in (LinkKind.UU, LinkKind.UG)


def _has_rx_orientation(kind: LinkKind) -> bool:
    return kind in (LinkKind.GU, LinkKind.UU)


def sample_orientation(rng: np.random.Generator, sigma_angle: float, size=None) -> Orientation:
    """Desvios de orientação (theta_x, theta_y) de uma plataforma"""
    return rng.normal(0.0, sigma_angle, size), rng.normal(0.0, sigma_angle, size)


def sample_turbulence(rng: np.random.Generator, alpha: float, beta: float, size=None):
    """h_a = X*Y com X ~ Gamma(alpha, média 1) e Y ~ Gamma(beta, média 1)"""
    if not (alpha > 0 and beta > 0):
        raise DomainError(f"alpha e beta devem ser positivos ({alpha}, {beta})")
    return rng.gamma(alpha, 1.0 / alpha, size) * rng.gamma(beta, 1.0 / beta, size)


def sample_pointing(rng: np.random.Generator, link: LinkDerived,
                    correlated_orientation: Optional[Orientation] = None, size=None):
    """
    Erro de apontamento h_pe = A exp(-2 r^2 / w_zeq^2).

    O deslocamento soma as posições do transmissor e do receptor e, quando
    o transmissor é um UAV, o termo Z*theta_tx da orientação.

    Returns:
        (h_pe, r_tr)
    """
    kind = LinkKind(link.kind)
    sigma_tx = link.sigma_p_g if kind is LinkKind.GU else link.sigma_p_u
    sigma_rx = link.sigma_p_g if kind is LinkKind.UG else link.sigma_p_u

    x_d = rng.normal(0.0, sigma_tx, size) + rng.normal(0.0, sigma_rx, size)
    y_d = rng.normal(0.0, sigma_tx, size) + rng.normal(0.0, sigma_rx, size)

    if _has_tx_orientation(kind):
        theta_x, theta_y = (correlated_orientation if correlated_orientation is not None
                            else sample_orientation(rng, link.sigma_angle, size))
        x_d = x_d + link.distance * theta_x
        y_d = y_d + link.distance * theta_y

    r_tr = np.hypot(x_d, y_d)
    h_pe = link.A * np.exp(-2.0 * r_tr ** 2 / link.w_zeq2)
    return h_pe, r_tr


def sample_aoa(rng: np.random.Generator, link: LinkDerived,
               correlated_orientation: Optional[Orientation] = None, size=None):
    """
    Interrupção por AoA: h_aoa = 1 sse theta_a <= theta_FoV.

    Returns:
        (h_aoa, theta_a)
    """
    kind = LinkKind(link.kind)
    theta_x = np.zeros(size) if size is not None else 0.0
    theta_y = np.zeros(size) if size is not None else 0.0

    if _has_rx_orientation(kind):
        rx_x, rx_y = sample_orientation(rng, link.sigma_angle, size)
        theta_x = theta_x + rx_x
        theta_y = theta_y + rx_y
    if _has_tx_orientation(kind):
        tx_x, tx_y = (correlated_orientation if correlated_orientation is not None
                      else sample_orientation(rng, link.sigma_angle, size))
        theta_x = theta_x + tx_x
        theta_y = theta_y + tx_y

    theta_a = np.hypot(theta_x, theta_y)
    h_aoa = (theta_a <= link.fov).astype(float)
    return h_aoa, theta_a


def simulate_channel_gain(rng: np.random.Generator, link: LinkDerived,
                          mode: SimulationMode = SimulationMode.INDEPENDENT,
                          size=None) -> ImpairmentSample:
    """Amostra as quatro degradações de um enlace"""
    mode = SimulationMode(mode)
    h_a = sample_turbulence(rng, link.alpha, link.beta, size)

    orientation = None
    if mode is SimulationMode.CORRELATED and _has_tx_orientation(LinkKind(link.kind)):
        orientation = sample_orientation(rng, link.sigma_angle, size)

    h_pe, r_tr = sample_pointing(rng, link, orientation, size)
    h_aoa, theta_a = sample_aoa(rng, link, orientation, size)
    return ImpairmentSample(h_l=link.h_loss, h_a=np.asarray(h_a), h_pe=np.asarray(h_pe),
                            h_aoa=np.asarray(h_aoa), r_tr=np.asarray(r_tr),
                            theta_a=np.asarray(theta_a))


# ---------------------------------------------------------------------------
# Coletor paralelo
# ---------------------------------------------------------------------------

Work = Callable[[np.random.Generator, int], np.ndarray]


class MonteCarloCollector:
    """
    Distribui amostras entre streams de RNG e soma os contadores.

    Cada stream recebe uma cota fixa de amostras (n // n_streams, com o
    resto nos primeiros streams) e processa blocos de `chunk` amostras.
    """

    def __init__(self, n_streams: Optional[int] = None, workers: Optional[int] = None,
                 chunk: Optional[int] = None):
        self.n_streams = n_streams or settings.mc_streams
        self.workers = workers or settings.mc_workers
        self.chunk = chunk or settings.mc_chunk
        self.stats = SimulationStats(streams=self.n_streams, workers=self.workers)

    def quotas(self, n: int) -> List[int]:
        base, extra = divmod(n, self.n_streams)
        return [base + (1 if i < extra else 0) for i in range(self.n_streams)]

    def _run_stream(self, stream: RngStream, quota: int, work: Work) -> np.ndarray:
        rng = stream.generator()
        total = None
        remaining = quota
        while remaining > 0:
            size = min(self.chunk, remaining)
            counts = np.asarray(work(rng, size), dtype=np.int64)
            total = counts if total is None else total + counts
            remaining -= size
        logger.debug(f"Stream {stream.stream_id}: {quota} amostras")
        return total

    async def _collect_async(self, seed: int, n: int, work: Work) -> List[np.ndarray]:
        semaphore = asyncio.Semaphore(self.workers)

        async def run_one(stream_id: int, quota: int):
            async with semaphore:
                return await asyncio.to_thread(self._run_stream, RngStream(seed, stream_id), quota, work)

        tasks = [run_one(i, quota) for i, quota in enumerate(self.quotas(n)) if quota > 0]
        return await asyncio.gather(*tasks)

    async def collect_async(self, seed: int, n: int, work: Work) -> np.ndarray:
        """Como `collect`, para quem já está dentro de um event loop"""
        self._check_size(n)
        self.stats.start_time = datetime.now()
        results = await self._collect_async(seed, n, work)
        return self._merge(n, results)

    def collect(self, seed: int, n: int, work: Work) -> np.ndarray:
        """Executa `work` em todos os streams e soma os contadores por índice de stream"""
        self._check_size(n)
        self.stats.start_time = datetime.now()
        if self.workers == 1 or _loop_is_running():
            results = [self._run_stream(RngStream(seed, i), quota, work)
                       for i, quota in enumerate(self.quotas(n)) if quota > 0]
        else:
            results = asyncio.run(self._collect_async(seed, n, work))
        return self._merge(n, results)

    @staticmethod
    def _check_size(n: int) -> None:
        if n < MIN_SAMPLES:
            raise DomainError(f"São necessárias ao menos {MIN_SAMPLES} amostras (recebido {n})")

    def _merge(self, n: int, results: List[np.ndarray]) -> np.ndarray:
        self.stats.end_time = datetime.now()
        self.stats.samples += n

        total = results[0].copy()
        for counts in results[1:]:
            total += counts
        logger.debug(f"🎲 {n} amostras em {self.stats.duration.total_seconds():.2f}s "
                     f"({self.n_streams} streams, {self.workers} workers)")
        return total


def _loop_is_running() -> bool:
    try:
        asyncio.get_running_loop()
    except RuntimeError:
        return False
    return True


def _gain(rng: np.random.Generator, link: LinkDerived, mode: SimulationMode, size: int) -> np.ndarray:
    return simulate_channel_gain(rng, link, mode, size).gain


def estimate_link_outage(link: LinkDerived, p_link: Optional[float], n: int, seed: int,
                         mode: SimulationMode = SimulationMode.INDEPENDENT,
                         collector: Optional[MonteCarloCollector] = None) -> McEstimate:
    """Fração de amostras com h <= h_th (CDF no limiar, átomo incluído)"""
    if p_link is not None:
        link = link.with_power(p_link)
    collector = collector or MonteCarloCollector()

    def work(rng, size):
        return np.array([np.count_nonzero(_gain(rng, link, mode, size) <= link.h_th)])

    hits = int(collector.collect(seed, n, work)[0])
    estimate = McEstimate.from_counts(hits, n)
    _warn_if_insufficient(estimate, f"enlace {link.index}")
    return estimate


def estimate_e2e_outage(links: Sequence[LinkDerived], p_link: Optional[float], n: int, seed: int,
                        mode: SimulationMode = SimulationMode.INDEPENDENT,
                        collector: Optional[MonteCarloCollector] = None) -> McEstimate:
    """Regra DF por amostra: outage se qualquer enlace ficar abaixo do limiar"""
    if not links:
        raise DomainError("Lista de enlaces vazia")
    if p_link is not None:
        links = [link.with_power(p_link) for link in links]
    collector = collector or MonteCarloCollector()

    def work(rng, size):
        outage = np.zeros(size, dtype=bool)
        for link in links:
            outage |= _gain(rng, link, mode, size) <= link.h_th
        return np.array([np.count_nonzero(outage)])

    hits = int(collector.collect(seed, n, work)[0])
    estimate = McEstimate.from_counts(hits, n)
    _warn_if_insufficient(estimate, f"cadeia de {len(links)} enlaces")
    return estimate


def empirical_pdf(link: LinkDerived, n: int, bin_edges: Sequence[float], seed: int,
                  mode: SimulationMode = SimulationMode.CORRELATED,
                  collector: Optional[MonteCarloCollector] = None) -> EmpiricalPdf:
    """Histograma do ganho total com o átomo h = 0 contado à parte"""
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise DomainError("bin_edges deve ser estritamente crescente com ao menos 2 valores")
    collector = collector or MonteCarloCollector()

    def work(rng, size):
        gain = _gain(rng, link, mode, size)
        zero = gain == 0.0
        positive = gain[~zero]
        counts, _ = np.histogram(positive, bins=edges)
        outside = len(positive) - int(counts.sum())
        return np.concatenate([counts, [np.count_nonzero(zero), outside]])

    totals = collector.collect(seed, n, work)
    return EmpiricalPdf(bin_edges=edges, counts=totals[:-2], atom_count=int(totals[-2]),
                        n=n, overflow=int(totals[-1]))


def _warn_if_insufficient(estimate: McEstimate, label: str) -> None:
    if estimate.insufficient:
        logger.warning(f"⚠️ Amostras insuficientes para {label}: "
                       f"{estimate.hits}/{estimate.n} (estimativa < {RARE_EVENT_LIMIT:g})")
