"""Multi-structure geometric model fitting by mode seeking on hypergraphs."""

from ._mshf import (
    MshfError,
    epanechnikov_bandwidth,
    fit,
    fitting_error,
    generate_scene,
    ikose_scale,
    standard_templates,
)

__all__ = [
    "MshfError",
    "epanechnikov_bandwidth",
    "fit",
    "fitting_error",
    "generate_scene",
    "ikose_scale",
    "standard_templates",
]
