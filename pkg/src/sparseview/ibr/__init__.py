from .integration import direction_weights, integrate_features
from .synthesis import DIRECTION_MODES, SynthesisOutput, decode, synthesize_view
from .visibility import (
    VISIBILITY_REL_THRESHOLD,
    Reprojection,
    SourceView,
    nearest_pixel_lookup,
    reproject_pixel,
    visibility_test,
)
