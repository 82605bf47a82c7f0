"""Inertial-aided rolling-shutter relative pose estimation.

Five minimal solvers for the relative pose of two rolling-shutter frames
with IMU-measured gravity and/or angular velocity, plus RANSAC, nonlinear
refinement, error metrics, a synthetic benchmark generator and a CLI.
"""

from .coeffs import (
    AlgorithmKind,
    CoefficientMatrix,
    InsufficientPointsError,
    build_matrix,
)
from .corrfile import (
    CorrespondenceFileError,
    ProblemInput,
    load_problem,
    parse_problem,
    save_problem,
)
from .geometry import (
    CameraIntrinsics,
    Correspondence,
    InertialMeasurement,
    NormalizedPoint,
    RelativePoseEstimate,
    Rotation,
    essential_angular,
    essential_linear,
    essential_uniform,
)
from .metrics import rotation_error, translation_error
from .refine import RefineConfig, refine
from .robust import RansacConfig, RansacResult, ransac_estimate, sampson_error
from .sim import (
    NoiseConfig,
    SceneConfig,
    SyntheticScene,
    generate_correspondences,
    generate_scene,
    synth_imu,
)
from .solvers import (
    DegenerateConfigurationError,
    SolverConfig,
    SolverOutput,
    estimate_minimal,
)

__all__ = [
    "AlgorithmKind",
    "CameraIntrinsics",
    "CoefficientMatrix",
    "Correspondence",
    "CorrespondenceFileError",
    "DegenerateConfigurationError",
    "InertialMeasurement",
    "InsufficientPointsError",
    "NoiseConfig",
    "NormalizedPoint",
    "ProblemInput",
    "RansacConfig",
    "RansacResult",
    "RefineConfig",
    "RelativePoseEstimate",
    "Rotation",
    "SceneConfig",
    "SolverConfig",
    "SolverOutput",
    "SyntheticScene",
    "build_matrix",
    "essential_angular",
    "essential_linear",
    "essential_uniform",
    "estimate_minimal",
    "generate_correspondences",
    "generate_scene",
    "load_problem",
    "parse_problem",
    "ransac_estimate",
    "refine",
    "rotation_error",
    "sampson_error",
    "save_problem",
    "synth_imu",
    "translation_error",
]

__version__ = "0.1.0"
