"""
Shared fixtures: truncated modules are built once per session
Общие фикстуры: модули строятся один раз за сессию
"""

import json
from fractions import Fraction

import pytest

from vertexforge.config import Settings
from vertexforge.domain.borcherds import preset_half_currents, sl2
from vertexforge.domain.fields import TransportedStructure
from vertexforge.domain.yangian import build_vq
from vertexforge.domain.zf import build_vacuum_module, preset_betagamma, preset_deformed_betagamma, preset_free_boson


@pytest.fixture(scope="session")
def betagamma_module():
    """Trivial-S betagamma vacuum module up to degree 5"""
    return build_vacuum_module(preset_betagamma(), 5)


@pytest.fixture(scope="session")
def betagamma_structure(betagamma_module):
    return TransportedStructure(betagamma_module)


@pytest.fixture(scope="session")
def deformed_module():
    """V[lambda] at lambda = 1"""
    return build_vacuum_module(preset_deformed_betagamma(Fraction(1)), 5)


@pytest.fixture(scope="session")
def boson_module():
    return build_vacuum_module(preset_free_boson(), 6)


@pytest.fixture(scope="session")
def vq_module():
    """V_q at q = 1 up to degree 3"""
    return build_vq(Fraction(1), 3)


@pytest.fixture(scope="session")
def half_currents():
    """U(t^-1 sl2[t^-1]) up to degree 5 and the fields e^-, f^-, h^-"""
    return preset_half_currents(sl2(), 5)


@pytest.fixture
def settings():
    """Settings without the environment and .env"""
    return Settings(_env_file=None, max_cells=2_000_000, max_order=8, log_level="WARNING")


@pytest.fixture
def write_scenario(tmp_path):
    """Write a scenario dict to a JSON file and return its path"""
    def write(document, name="scenario.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path
    return write
