"""
Application Layer - Factories
Фабрики для создания сервисов с инжекцией зависимостей
"""

from typing import Optional

from vertexforge.application.services import ScenarioService
from vertexforge.config import Settings, get_settings


def get_scenario_service(settings: Optional[Settings] = None, max_cells: Optional[int] = None) -> ScenarioService:
    """
    Factory для ScenarioService

    max_cells из командной строки важнее окружения и опций сценария
    """
    return ScenarioService(settings or get_settings(), max_cells)
