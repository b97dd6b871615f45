from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import Optional, List, Literal

from ..models.channel import (
    LinkKind, LinkSpec, SystemConfig, dbm_to_watts, link_kinds,
)
from ..optimization.placement import Obstacle, PlacementConfig, Topology, equidistant_topology

MRAD = 1e-3


class StrictModel(BaseModel):
    model_config = ConfigDict(extra='forbid')


class SystemModel(StrictModel):
    wavelength_nm: float = Field(1550.0, gt=0)
    cn2: float = Field(5e-14, gt=0)
    responsivity: float = Field(0.9, gt=0)
    attenuation_per_km: float = Field(1.0, gt=0)
    noise_coeff: float = Field(1e-9, gt=0)
    sigma_p_u: float = Field(0.1, gt=0)
    sigma_p_g: float = Field(0.1, gt=0)
    sigma_angle_mrad: float = Field(1.2, gt=0)
    aperture_radius: float = Field(0.05, gt=0)
    snr_threshold: float = Field(10.0, gt=0)
    p_link_dbm: float = 10.0
    p_total_dbm: Optional[float] = None
    exact_equivalent_beam: bool = False

    def to_config(self, n_relays: Optional[int] = None, p_link_dbm: Optional[float] = None) -> SystemConfig:
        """SystemConfig em unidades SI; p_total divide-se pelos N+1 enlaces"""
        kwargs = dict(
            wavelength=self.wavelength_nm * 1e-9,
            cn2=self.cn2,
            responsivity=self.responsivity,
            attenuation=self.attenuation_per_km,
            noise_coeff=self.noise_coeff,
            sigma_p_u=self.sigma_p_u,
            sigma_p_g=self.sigma_p_g,
            sigma_angle_u=self.sigma_angle_mrad * MRAD,
            aperture_radius=self.aperture_radius,
            snr_threshold=self.snr_threshold,
            exact_equivalent_beam=self.exact_equivalent_beam,
        )
        if p_link_dbm is None and self.p_total_dbm is not None and n_relays is not None:
            return SystemConfig.from_total_power(dbm_to_watts(self.p_total_dbm), n_relays, **kwargs)
        power = self.p_link_dbm if p_link_dbm is None else p_link_dbm
        return SystemConfig(p_link=dbm_to_watts(power), **kwargs)


class LinkModel(StrictModel):
    distance: float = Field(gt=0)
    beam_width: float = Field(gt=0)
    fov_mrad: float = Field(gt=0)
    kind: Optional[LinkKind] = None
    rytov: Optional[float] = Field(None, gt=0)


class ObstacleModel(StrictModel):
    center: List[float] = Field(min_length=2, max_length=2)
    radius: float = Field(gt=0)

    def to_obstacle(self) -> Obstacle:
        return Obstacle(center=(self.center[0], self.center[1]), radius=self.radius)


class TopologyModel(StrictModel):
    source: List[float] = Field(min_length=2, max_length=2)
    destination: List[float] = Field(min_length=2, max_length=2)
    n_relays: Optional[int] = Field(None, ge=1)
    relays: Optional[List[List[float]]] = None
    obstacles: List[ObstacleModel] = Field(default_factory=list)
    beam_width: float = Field(gt=0)
    fov_mrad: float = Field(gt=0)
    rytov: Optional[float] = Field(None, gt=0)

    @model_validator(mode='after')
    def check_relays(self):
        if self.relays is None and self.n_relays is None:
            raise ValueError("informe 'relays' ou 'n_relays'")
        if self.relays is not None:
            if any(len(p) != 2 for p in self.relays):
                raise ValueError("cada relay precisa de 2 coordenadas")
            if self.n_relays is not None and self.n_relays != len(self.relays):
                raise ValueError("'n_relays' não confere com 'relays'")
        return self

    @property
    def relay_count(self) -> int:
        return self.n_relays if self.relays is None else len(self.relays)

    def to_topology(self, n_relays: Optional[int] = None) -> Topology:
        """Relays explícitos ou, na falta deles, espaçamento reto igual"""
        obstacles = [o.to_obstacle() for o in self.obstacles]
        source = (self.source[0], self.source[1])
        destination = (self.destination[0], self.destination[1])
        if self.relays is not None and n_relays in (None, len(self.relays)):
            return Topology(source=source, destination=destination,
                            relays=[(p[0], p[1]) for p in self.relays], obstacles=obstacles)
        return equidistant_topology(source, destination, n_relays or self.relay_count, obstacles)


class SweepModel(StrictModel):
    variable: Literal['p_link_dbm', 'fov_mrad', 'sigma_angle_mrad', 'n_relays', 'rytov']
    start: Optional[float] = None
    stop: Optional[float] = None
    step: Optional[float] = Field(None, gt=0)
    values: Optional[List[float]] = None

    @model_validator(mode='after')
    def check_range(self):
        if self.values is not None:
            if not self.values:
                raise ValueError("varredura vazia")
            return self
        if self.start is None or self.stop is None or self.step is None:
            raise ValueError("informe 'values' ou 'start'/'stop'/'step'")
        if self.stop < self.start:
            raise ValueError("varredura vazia: stop < start")
        return self

    def grid(self) -> List[float]:
        if self.values is not None:
            return list(self.values)
        count = int(round((self.stop - self.start) / self.step)) + 1
        return [self.start + k * self.step for k in range(count)
                if self.start + k * self.step <= self.stop + 1e-9 * self.step]


class MonteCarloModel(StrictModel):
    n: int = Field(1_000_000, ge=10_000)
    seed: int = Field(1, ge=0)
    mode: Literal['independent', 'correlated'] = 'independent'


class FovGridModel(StrictModel):
    min_mrad: float = Field(1.0, gt=0)
    max_mrad: float = Field(20.0, gt=0)
    step_mrad: float = Field(0.1, gt=0, le=0.1)

    @model_validator(mode='after')
    def check_bounds(self):
        if self.max_mrad <= self.min_mrad:
            raise ValueError("max_mrad deve ser maior que min_mrad")
        return self

    def to_radians(self):
        return self.min_mrad * MRAD, self.max_mrad * MRAD, self.step_mrad * MRAD


class PlacementModel(StrictModel):
    starts: Optional[int] = Field(None, ge=1)
    seed: int = 0
    clearance: float = Field(1.0, ge=0)

    def to_config(self) -> PlacementConfig:
        config = PlacementConfig(seed=self.seed, clearance=self.clearance)
        if self.starts is not None:
            config.starts = self.starts
        return config


class PdfModel(StrictModel):
    bins: int = Field(100, ge=2)
    h_min: Optional[float] = Field(None, gt=0)
    h_max: Optional[float] = Field(None, gt=0)


class OptionsModel(StrictModel):
    fov_grid: FovGridModel = Field(default_factory=FovGridModel)
    placement: PlacementModel = Field(default_factory=PlacementModel)
    pdf: PdfModel = Field(default_factory=PdfModel)


class Scenario(StrictModel):
    name: str = 'scenario'
    description: Optional[str] = None
    system: SystemModel = Field(default_factory=SystemModel)
    links: Optional[List[LinkModel]] = None
    topology: Optional[TopologyModel] = None
    sweep: Optional[SweepModel] = None
    mc: Optional[MonteCarloModel] = None
    options: OptionsModel = Field(default_factory=OptionsModel)

    @model_validator(mode='after')
    def check_exclusive(self):
        if (self.links is None) == (self.topology is None):
            raise ValueError("informe exatamente um entre 'links' e 'topology'")
        if self.links is not None:
            if not self.links:
                raise ValueError("'links' vazio")
            if len(self.links) == 1 and self.links[0].kind is None:
                raise ValueError("enlace único precisa de 'kind'")
            if len(self.links) > 1:
                expected = link_kinds(len(self.links) - 1)
                for link, kind in zip(self.links, expected):
                    if link.kind is not None and link.kind != kind:
                        raise ValueError(f"enlace do tipo {link.kind.value} fora de posição (esperado {kind.value})")
        return self

    @property
    def n_relays(self) -> int:
        if self.topology is not None:
            return self.topology.relay_count
        return max(len(self.links) - 1, 0)

    def link_specs(self, fov_mrad: Optional[float] = None, n_relays: Optional[int] = None) -> List[LinkSpec]:
        """LinkSpec por enlace, com FoV comum opcional sobrescrito"""
        if self.links is not None:
            kinds = [self.links[0].kind] if len(self.links) == 1 else link_kinds(len(self.links) - 1)
            return [
                LinkSpec(index=i + 1, kind=kind, distance=link.distance, beam_width=link.beam_width,
                         fov=(fov_mrad if fov_mrad is not None else link.fov_mrad) * MRAD, rytov=link.rytov)
                for i, (link, kind) in enumerate(zip(self.links, kinds))
            ]

        topology = self.topology.to_topology(n_relays)
        kinds = link_kinds(len(topology.relays))
        fov = (fov_mrad if fov_mrad is not None else self.topology.fov_mrad) * MRAD
        return [
            LinkSpec(index=i + 1, kind=kind, distance=distance, beam_width=self.topology.beam_width,
                     fov=fov, rytov=self.topology.rytov)
            for i, (distance, kind) in enumerate(zip(topology.link_distances, kinds))
        ]
