from .render import AttributeImage, DepthMap, RasterFragments, rasterize, render_attributes, render_depth

__all__ = [
    "AttributeImage",
    "DepthMap",
    "RasterFragments",
    "rasterize",
    "render_attributes",
    "render_depth",
]
