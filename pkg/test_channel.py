#!/usr/bin/env python3
"""
Testes do modelo de canal (derivação dos parâmetros de cada enlace)
"""

import logging
import math

import numpy as np
import pytest
from scipy import integrate

from src.errors import DomainError
from src.models.channel import (
    EQUIVALENT_BEAM_OFFSET, ImpairmentSample, LinkKind, LinkSpec, SystemConfig,
    aoa_interruption_prob, atmospheric_loss, build_links, dbm_to_watts, derive_link,
    derive_links, displacement_variance, equivalent_beam_width2, gain_threshold,
    gamma_gamma_pdf, link_kinds, noise_variance, pointing_params, rytov_variance,
    turbulence_params, watts_to_dbm,
)


@pytest.fixture
def config():
    return SystemConfig()


def test_power_conversion():
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert dbm_to_watts(0.0) == pytest.approx(1e-3)
    assert watts_to_dbm(dbm_to_watts(17.5)) == pytest.approx(17.5)
    with pytest.raises(DomainError):
        watts_to_dbm(0.0)


def test_system_defaults(config):
    assert config.wavelength == 1550e-9
    assert config.cn2 == 5e-14
    assert config.responsivity == 0.9
    assert config.sigma_angle_u == 1.2e-3
    assert config.snr_threshold == 10.0


def test_total_power_is_split_over_links():
    config = SystemConfig.from_total_power(1.0, 2)
    assert config.p_link == pytest.approx(1.0 / 3.0)
    assert config.p_total == 1.0
    with pytest.raises(DomainError):
        SystemConfig(p_link=-1.0)


def test_rytov_variance_scaling(config):
    near = rytov_variance(250.0, config.cn2, config.wavelength)
    far = rytov_variance(500.0, config.cn2, config.wavelength)
    k = 2.0 * math.pi / config.wavelength
    assert near == pytest.approx(1.23 * config.cn2 * k ** (7 / 6) * 250.0 ** (11 / 6))
    assert far / near == pytest.approx(2.0 ** (11.0 / 6.0))
    with pytest.raises(DomainError):
        rytov_variance(-1.0, config.cn2, config.wavelength)


def test_turbulence_params_moderate():
    alpha, beta = turbulence_params(1.0)
    assert alpha == pytest.approx(4.394, rel=1e-3)
    assert beta == pytest.approx(2.564, rel=1e-3)
    with pytest.raises(DomainError):
        turbulence_params(0.0)


def test_turbulence_weakens_with_rytov():
    weak = turbulence_params(0.6)
    strong = turbulence_params(3.0)
    assert weak[0] > strong[0]
    assert weak[1] > strong[1]


def test_gamma_gamma_pdf_is_unit_mean_density():
    alpha, beta = turbulence_params(1.0)
    mass, _ = integrate.quad(lambda h: gamma_gamma_pdf(h, alpha, beta), 0, np.inf, limit=200)
    mean, _ = integrate.quad(lambda h: h * gamma_gamma_pdf(h, alpha, beta), 0, np.inf, limit=200)
    assert mass == pytest.approx(1.0, rel=1e-6)
    assert mean == pytest.approx(1.0, rel=1e-6)
    assert gamma_gamma_pdf(0.0, alpha, beta) == 0.0
    assert gamma_gamma_pdf(np.array([0.5, 1.0]), alpha, beta).shape == (2,)


def test_atmospheric_loss():
    assert atmospheric_loss(1000.0, 1.0) == pytest.approx(math.exp(-1.0))
    assert atmospheric_loss(0.0, 1.0) == 1.0
    with pytest.raises(DomainError):
        atmospheric_loss(-5.0, 1.0)


def test_displacement_variance_per_kind(config):
    z = 250.0
    angular = (z * config.sigma_angle_u) ** 2
    assert displacement_variance(LinkKind.GU, z, config) == pytest.approx(0.02)
    assert displacement_variance(LinkKind.UU, z, config) == pytest.approx(0.02 + angular)
    assert displacement_variance(LinkKind.UG, z, config) == pytest.approx(0.02 + angular)


def test_pointing_params_reference_point():
    v, a0, w_zeq2, zeta2 = pointing_params(0.05, 2.0, 0.11)
    assert v == pytest.approx(0.03133, rel=5e-3)
    assert a0 == pytest.approx(1.249e-3, rel=5e-3)
    assert w_zeq2 == pytest.approx(5.0607, rel=5e-3)
    assert zeta2 == pytest.approx(11.50, rel=5e-3)
    with pytest.raises(DomainError):
        pointing_params(0.05, 0.0, 0.11)


def test_equivalent_beam_width_forms():
    v = math.sqrt(math.pi) * 0.05 / (math.sqrt(2.0) * 2.0)
    assert equivalent_beam_width2(2.0, v) == pytest.approx(4.0 + EQUIVALENT_BEAM_OFFSET)
    exact = equivalent_beam_width2(2.0, v, exact=True)
    assert 4.0 < exact < 4.01


def test_aoa_interruption_prob():
    assert aoa_interruption_prob(12e-3, 1.2e-3, 2) == pytest.approx(math.exp(-25.0))
    assert aoa_interruption_prob(12e-3, 1.2e-3, 1) == pytest.approx(math.exp(-50.0))
    assert aoa_interruption_prob(0.0, 1.2e-3, 1) == 1.0
    with pytest.raises(DomainError):
        aoa_interruption_prob(-1e-3, 1.2e-3, 1)


def test_zero_fov_link_is_always_interrupted(config):
    link = derive_link(LinkSpec(index=1, kind=LinkKind.UU, distance=250.0, beam_width=2.0, fov=0.0), config)
    assert link.atom_weight == 1.0
    assert link.h_th == 0.0
    assert link.sigma_n2 == 0.0
    with pytest.raises(DomainError):
        link.with_fov(6e-3)
    with pytest.raises(DomainError):
        LinkSpec(index=1, kind=LinkKind.UU, distance=250.0, beam_width=2.0, fov=-1e-3)


def test_noise_and_threshold():
    assert noise_variance(8e-3, 1e-9) == pytest.approx(6.4e-14)
    h_th = gain_threshold(8e-3, 0.01, 0.9, 1e-9, 10.0)
    assert h_th == pytest.approx(8e-3 / (0.9 * 0.01) * math.sqrt(5e-9))
    # h_th = sqrt(Upsilon sigma_n^2 / (2 R^2 P^2))
    assert h_th == pytest.approx(math.sqrt(10.0 * 6.4e-14 / (2 * 0.9 ** 2 * 0.01 ** 2)))
    with pytest.raises(DomainError):
        gain_threshold(8e-3, 0.0, 0.9, 1e-9, 10.0)


def test_link_kinds():
    assert link_kinds(1) == [LinkKind.GU, LinkKind.UG]
    assert link_kinds(3) == [LinkKind.GU, LinkKind.UU, LinkKind.UU, LinkKind.UG]
    with pytest.raises(DomainError):
        link_kinds(0)
    assert LinkKind.UU.aoa_order == 2
    assert LinkKind.GU.aoa_order == 1


def test_build_links_validation():
    specs = build_links([500.0, 500.0, 1000.0], 4.0, [12e-3, 12e-3, 7e-3])
    assert [s.kind for s in specs] == link_kinds(2)
    assert [s.index for s in specs] == [1, 2, 3]
    assert specs[2].fov == 7e-3
    with pytest.raises(DomainError):
        build_links([500.0, 500.0], 4.0, [12e-3])
    with pytest.raises(DomainError):
        build_links([500.0], 4.0, 12e-3)
    with pytest.raises(DomainError):
        LinkSpec(index=1, kind=LinkKind.GU, distance=-250.0, beam_width=2.0, fov=6e-3)


def test_derive_link_composes_everything(config):
    spec = LinkSpec(index=2, kind=LinkKind.UU, distance=250.0, beam_width=2.0, fov=8e-3)
    link = derive_link(spec, config)
    alpha, beta = turbulence_params(rytov_variance(250.0, config.cn2, config.wavelength))
    assert link.alpha == pytest.approx(alpha)
    assert link.beta == pytest.approx(beta)
    assert link.m == 2
    assert link.sigma_n2 == pytest.approx(6.4e-14)
    assert link.h_loss == pytest.approx(math.exp(-0.25))
    assert link.atom_weight == pytest.approx(math.exp(-(8.0 / 1.2) ** 2 / 4.0))
    assert link.gain_scale == pytest.approx(link.A * link.h_loss / (alpha * beta))
    assert link.spec == LinkSpec(2, LinkKind.UU, 250.0, 2.0, 8e-3, rytov=link.rytov)


def test_rytov_override(config):
    spec = LinkSpec(index=1, kind=LinkKind.UU, distance=250.0, beam_width=2.0, fov=8e-3, rytov=2.0)
    link = derive_link(spec, config)
    assert link.rytov == 2.0
    assert (link.alpha, link.beta) == pytest.approx(turbulence_params(2.0))


def test_with_power_and_with_fov_match_fresh_derivation(config):
    spec = LinkSpec(index=1, kind=LinkKind.GU, distance=500.0, beam_width=4.0, fov=6e-3)
    link = derive_link(spec, config)
    assert link.with_power(0.1).h_th == pytest.approx(derive_link(spec, config, 0.1).h_th, rel=1e-12)
    refitted = link.with_fov(9e-3)
    fresh = derive_link(spec.with_fov(9e-3), config)
    assert refitted.h_th == pytest.approx(fresh.h_th, rel=1e-12)
    assert refitted.sigma_n2 == pytest.approx(fresh.sigma_n2, rel=1e-12)
    with pytest.raises(DomainError):
        link.with_power(0.0)


def test_strong_turbulence_warning(config, caplog):
    spec = LinkSpec(index=1, kind=LinkKind.UU, distance=250.0, beam_width=2.0, fov=8e-3, rytov=1e4)
    with caplog.at_level(logging.WARNING):
        link = derive_link(spec, config)
    assert link.beta <= 1.0
    assert any('beta' in record.getMessage() for record in caplog.records)


def test_derive_links_shares_power(config):
    links = derive_links(build_links([700.0, 700.0, 600.0], 2.0, 6e-3), config, p_link=0.05)
    assert all(link.p_link == 0.05 for link in links)
    assert [link.kind for link in links] == link_kinds(2)


def test_impairment_sample_gain():
    sample = ImpairmentSample(
        h_l=0.5,
        h_a=np.array([1.0, 2.0]),
        h_pe=np.array([0.1, 0.2]),
        h_aoa=np.array([1.0, 0.0]),
        r_tr=np.zeros(2),
        theta_a=np.zeros(2),
    )
    np.testing.assert_allclose(sample.gain, [0.05, 0.0])
    assert len(sample) == 2
