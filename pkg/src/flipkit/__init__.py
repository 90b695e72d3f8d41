"""Flippable tilings of constant curvature surfaces.

Geometry of convex polyhedra in the 3-sphere and of Fuchsian polyhedral
surfaces in anti-de Sitter space, the projections that turn them into
black/white flippable tilings, the flip itself, and a Newton solver for
prescribing the singular curvature at the vertices.
"""

from .errors import (
    ConvergenceError,
    DegenerateTriangleError,
    DevelopmentError,
    FlipkitError,
    GeometryError,
    LightLikeError,
    SchemaError,
    SignatureMismatchError,
)
from .forms import (
    AngleKind,
    DualPlane,
    HSAngle,
    QuadricPoint,
    Signature,
    dual,
    form,
    group_inv,
    group_mul,
    hs_angle,
)
from .fuchsian import (
    FuchsianConfig,
    FuchsianGroup,
    ads_project,
    cone_angles,
    curvatures,
    genus2_group,
    jacobian,
    minkowski_dual,
    orbit_hull,
    solve_prescribed_curvature,
    sph_star_jacobian,
)
from .polyhedra import ConvexPolyhedron, SphericalPolygon, hull, polar_dual
from .tilings import (
    FlippableTiling,
    Side,
    black_metric,
    flip,
    make_antipodal_tiling,
    make_two_circles_tiling,
    project,
    recolor,
    validate_tiling,
    white_metric,
    white_polyhedron,
)

__all__ = [
    "AngleKind",
    "ConvergenceError",
    "ConvexPolyhedron",
    "DegenerateTriangleError",
    "DevelopmentError",
    "DualPlane",
    "FlipkitError",
    "FlippableTiling",
    "FuchsianConfig",
    "FuchsianGroup",
    "GeometryError",
    "HSAngle",
    "LightLikeError",
    "QuadricPoint",
    "SchemaError",
    "Side",
    "Signature",
    "SignatureMismatchError",
    "SphericalPolygon",
    "ads_project",
    "black_metric",
    "cone_angles",
    "curvatures",
    "dual",
    "flip",
    "form",
    "genus2_group",
    "group_inv",
    "group_mul",
    "hs_angle",
    "hull",
    "jacobian",
    "make_antipodal_tiling",
    "make_two_circles_tiling",
    "minkowski_dual",
    "orbit_hull",
    "polar_dual",
    "project",
    "recolor",
    "solve_prescribed_curvature",
    "sph_star_jacobian",
    "validate_tiling",
    "white_metric",
    "white_polyhedron",
]

__version__ = "0.1.0"
