"""Rotation sets of torus homeomorphisms homotopic to the identity."""

from .core import (
    DEFAULT_SEED,
    DirectionalFrame,
    Disk,
    LiftMap,
    MapError,
    MissingInverseError,
    MZLift,
    PlanePoint,
    RotationVector,
    eval_mz,
    eval_mz_inverse,
    translate_commutation_check,
)
from .engine import GridSpec, OrbitError, SweepResult, deviation, iterate, phi_n, sweep
from .geometry import ConvexPolygon, convex_hull, hausdorff_distance, hull_area, hull_diameter
from .mapdsl import DSLSyntaxError, parse_map
from .rotation import (
    ClassificationLabel,
    LocalRotationEstimate,
    RotationSetEstimate,
    StructureVerdict,
    detect_structure,
    dichotomy_classify,
    estimate_rotation_set,
    local_rotation_subset,
)
from .classify import (
    IslandRegion,
    StabilityReport,
    classification_map,
    extract_islands,
    find_periodic_points,
    lyapunov_probe,
    spreading_slope,
)
from .lattice import (
    AffineSymmetry,
    UnimodularMatrix,
    check_conjugacy,
    complete_to_unimodular,
    conjugate_lift,
    line_frame_transform,
    transform_rotation_data,
)

__version__ = "0.1.0"
