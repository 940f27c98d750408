"""Spacelike torus corrugations in R^{2,1} and Fuchsian cone rigidity bounds."""

from .corrugation import (
    AutoN,
    CorrugationStep,
    adapted_frame,
    corrugate_once,
    invert_i0,
    run_pipeline,
    solve_amplitudes,
    target_differential_check,
)
from .defect import DEFAULT_DICTIONARY, Decomposition, LinearFormZ, cone_margin, decompose
from .fields import (
    Immersion,
    MetricField,
    PeriodicGrid,
    Sym2,
    c0_distance,
    dilatation_id,
    graph_immersion,
    plane_immersion,
    pullback,
    teich_distance_bound,
)
from .hull import Hull3, OrbitHull, convex_hull3, orient3d, ray_boundary_point
from .minkowski import (
    Isometry21,
    MinkVector,
    boost,
    boost_rotation,
    cone_level,
    klein_project,
    lorentz_dot,
    rotation,
    timelike_unit_normal,
)
from .moduli import (
    SearchConfig,
    build_target_metric,
    choose_delta,
    conformal_search,
    hyp_distance,
    mu_of_w,
    torus_modulus,
)
from .rigidity import (
    FuchsianGroup,
    RigidityConstants,
    level_alpha,
    make_genus2_group,
    orbit,
    orbit_hull,
    rigidity_constants,
    rigidity_report,
    verify_convex_graph,
)

__version__ = "0.1.0"
