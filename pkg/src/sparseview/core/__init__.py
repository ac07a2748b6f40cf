from .camera import Camera, look_at_camera
from .mesh import Mesh
from .proximity import MeshProximity, VertexProximity, closest_point_on_triangles, point_segment_distances
from .skeleton import (
    DEFAULT_BODY_LAYOUT,
    DEFAULT_CONFIDENCE_FLOOR,
    JointLayout,
    Skeleton2D,
    Skeleton3D,
    triangulate_skeleton,
)

__all__ = [
    "Camera",
    "look_at_camera",
    "Mesh",
    "MeshProximity",
    "VertexProximity",
    "closest_point_on_triangles",
    "point_segment_distances",
    "JointLayout",
    "Skeleton2D",
    "Skeleton3D",
    "triangulate_skeleton",
    "DEFAULT_BODY_LAYOUT",
    "DEFAULT_CONFIDENCE_FLOOR",
]
