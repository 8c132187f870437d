"""conevortex package initialization."""

__all__ = [
    "balls",
    "config",
    "degree_cost",
    "errors",
    "field",
    "fieldio",
    "geometry",
    "minimizer",
    "optimize",
    "plotting",
    "records",
    "renorm",
    "reporter",
    "vortices",
]
