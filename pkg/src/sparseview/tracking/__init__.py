from .gauss_newton import (
    DEFAULT_DAMPING,
    DEFAULT_MAX_ITERS,
    DEFAULT_TOL,
    GaussNewtonResult,
    finite_difference_jacobian,
    gauss_newton,
)
from .kinematics import (
    KinematicParams,
    KinematicTree,
    forward_kinematics,
    forward_kinematics_jacobian,
    joint_transforms,
    rotate_points_jacobian,
    rotation_matrix,
    so3_right_jacobian,
    wrap_rotation_vectors,
)
from .registration import (
    IK_HUBER_DELTA,
    REG_LAMBDA_DEFAULT,
    DeformationField,
    nonrigid_deform,
    rigid_refine,
    solve_ik,
)
from .sequence import TrackedFrame, TrackingResult, select_canonical_frame, track_sequence
from .skinning import RIG_NEIGHBORS, SkinningWeights, lbs_deform, lbs_jacobian, rig
