"""2HAM tile assembly engine and 4-sided fractal tileset compiler."""

from .core import (
    Glue,
    NULL_GLUE,
    Supertile,
    TileSet,
    TileType,
    binding_graph,
    canonicalize,
    combinations,
    is_stable,
    min_cut_strength,
    parse_tileset,
    write_tileset,
)
from .fractal import (
    Generator,
    carpet_generator,
    classify_sides,
    contains,
    parse_generator,
    position_of,
    render_generator,
    ring_generator,
    stage,
    three_sided_generator,
    validate_generator,
)

__all__ = [
    "Glue", "NULL_GLUE", "Supertile", "TileSet", "TileType",
    "binding_graph", "canonicalize", "combinations", "is_stable",
    "min_cut_strength", "parse_tileset", "write_tileset",
    "Generator", "carpet_generator", "classify_sides", "contains",
    "parse_generator", "position_of", "render_generator", "ring_generator",
    "stage", "three_sided_generator", "validate_generator",
]
