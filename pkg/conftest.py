"""Configuração compartilhada do pytest"""

import logging

import pytest


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "slow: suites longas (Monte-Carlo com 10^7 amostras, oráculo de 200 casos)"
    )


@pytest.fixture(autouse=True)
def _quiet_numeric_logs(caplog):
    caplog.set_level(logging.INFO)
    yield
