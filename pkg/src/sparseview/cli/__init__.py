from .config import DEFAULT_SEED, PipelineConfig
from .scene import SceneData, SyntheticScene, capped_tube, icosphere, ring_cameras
