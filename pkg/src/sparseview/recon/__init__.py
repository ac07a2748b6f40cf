from .depth_norm import DEPTH_SCALE_LAMBDA, normalize_depth, normalize_depth_points
from .features import (
    FeatureMap,
    RgbExtraChannelsProvider,
    bilinear_sample,
    build_feature_provider,
    masked_bilinear_sample,
    rgb_provider,
    sample_pixel_aligned,
)
from .field import OccupancyField, build_field, query_occupancy, query_occupancy_batch
from .fusion import TransformerWeights, fuse_and_pool, transformer_fuse, transformer_fuse_grad
from .heads import DEFAULT_ORACLE_WIDTH, MlpHead, SignedDistanceHead, sphere_sdf
from .marching import DEFAULT_SURFACE_THRESHOLD, extract_surface
from .pipeline import default_bounds, reconstruct
