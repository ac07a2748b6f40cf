"""Sparse-view human capture at desk scale.

Multi-view pixel-aligned occupancy reconstruction with attention-based
feature fusion, skeleton-driven tracking through a Gauss-Newton solver,
and geometry-guided novel-view rendering with per-pixel visibility
reasoning. Learned components are replaced by pluggable providers so
every stage runs and can be verified without trained networks.
"""

__version__ = "0.1.0"

from . import core, ibr, io, metrics, raster, recon, tracking
from .errors import PipelineError
