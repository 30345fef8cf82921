"""
vertexforge - exact formal-series engine for vertex algebra identities
Точные вычисления с формальными рядами для тождеств вершинных алгебр
"""

__version__ = "0.1.0"
