from .fields import read_field, write_field
from .images import read_png, to_unit_float, write_png
from .meshio import read_mesh, read_obj, read_ply, write_mesh, write_obj, write_ply
from .pfm import read_pfm, write_pfm
from .rigs import (
    read_calibration,
    read_kinematic_params,
    read_skeleton2d,
    read_skeleton3d,
    read_skinning_weights,
    write_calibration,
    write_kinematic_params,
    write_skeleton2d,
    write_skeleton3d,
    write_skinning_weights,
)
