"""Deterministic SVG pictures of tilings.

Spherical tilings are drawn through the stereographic projection from the
pole (0,0,-1); hyperbolic tilings land in the Poincare disk.  Geodesic
arcs are sampled at most 0.01 radians apart and emitted as polylines, so
the output is plain paths with no curve primitives.
"""

import numpy as np

from .errors import GeometryError
from .spheremath import HyperbolicOps, SphereOps

ARC_STEP = 0.01
BLACK_FILL = "#26262b"
WHITE_FILL = "#f0ede4"
EDGE_STROKE = "#c03a2b"


def _fmt(x):
    return format(float(x), ".8f")


def stereographic(p):
    """Projection of the unit sphere from the pole (0,0,-1)."""
    denom = 1.0 + p[2]
    if denom < 1e-9:
        raise GeometryError("point at the projection pole")
    return np.array([p[0] / denom, p[1] / denom])


def poincare(p):
    """Hyperboloid point to the Poincare disk."""
    return np.array([p[0] / (1.0 + p[2]), p[1] / (1.0 + p[2])])


def _sample_arc(ops, a, b):
    d = ops.dist(a, b)
    steps = max(2, int(np.ceil(d / ARC_STEP)) + 1)
    if d < 1e-12:
        return [a, b]
    t = ops.tangent(a, b)
    return [ops.geodesic(a, t, s) for s in np.linspace(0.0, d, steps)]


def _face_path(ops, proj, face):
    pts = []
    k = len(face.vertices)
    for i in range(k):
        arc = _sample_arc(ops, face.vertices[i], face.vertices[(i + 1) % k])
        pts.extend(arc[:-1])
    coords = [proj(p) for p in pts]
    d = "M" + "L".join(f"{_fmt(x)} {_fmt(y)}" for x, y in coords) + "Z"
    return d


def _digon_path(T, ops, proj, color, fi):
    """Digon boundary sampled along its two supporting edge records."""
    f = T.faces(color)[fi]
    pts = []
    for k in range(len(f)):
        edge = T.edges[f.edge_refs[k]]
        seg = edge.segment_of(color, fi, k)
        a = seg.corner_param(True)
        b = seg.corner_param(False)
        n = max(2, int(np.ceil(abs(b - a) / ARC_STEP)) + 1)
        for t in np.linspace(a, b, n)[:-1]:
            pts.append(edge.point_at(ops, t))
    coords = [proj(p) for p in pts]
    return "M" + "L".join(f"{_fmt(x)} {_fmt(y)}" for x, y in coords) + "Z"


def _edge_path(ops, proj, edge):
    a = edge.point_at(ops, edge.t_min)
    b = edge.point_at(ops, edge.t_max)
    arc = _sample_arc(ops, a, b)
    coords = [proj(p) for p in arc]
    return "M" + "L".join(f"{_fmt(x)} {_fmt(y)}" for x, y in coords)


def render_svg(T, projection=None):
    """Render a tiling to an SVG string.

    The projection defaults to stereographic for spherical tilings and to
    the Poincare disk for hyperbolic ones.
    """
    if projection is None:
        projection = "stereographic" if T.is_spherical else "poincare"
    if projection == "stereographic":
        if not T.is_spherical:
            raise GeometryError("stereographic projection applies to spherical tilings")
        ops, proj = SphereOps, stereographic
    elif projection == "poincare":
        if T.is_spherical:
            raise GeometryError("poincare projection applies to hyperbolic tilings")
        ops, proj = HyperbolicOps, poincare
    else:
        raise GeometryError(f"unknown projection {projection!r}")

    paths = []
    all_xy = []
    for color, fill in ((("white"), WHITE_FILL), (("black"), BLACK_FILL)):
        for fi, f in enumerate(T.faces(color)):
            if f.is_digon:
                d = _digon_path(T, ops, proj, color, fi)
            else:
                d = _face_path(ops, proj, f)
            paths.append(f'<path d="{d}" fill="{fill}" stroke="none"/>')
            for i in range(len(f.vertices)):
                all_xy.append(proj(f.vertices[i]))
    for e in T.edges:
        d = _edge_path(ops, proj, e)
        paths.append(
            f'<path d="{d}" fill="none" stroke="{EDGE_STROKE}" '
            f'stroke-width="0.01" stroke-linecap="round"/>'
        )
        all_xy.append(proj(e.point_at(ops, e.t_min)))
        all_xy.append(proj(e.point_at(ops, e.t_max)))

    if projection == "poincare":
        lo, hi = -1.05, 1.05
        paths.insert(
            0,
            '<circle cx="0" cy="0" r="1" fill="none" stroke="#888888" '
            'stroke-width="0.005"/>',
        )
    else:
        arr = np.array(all_xy)
        span = max(1.0, float(np.max(np.abs(arr))) if len(arr) else 1.0)
        lo, hi = -1.05 * span, 1.05 * span
    size = hi - lo
    header = (
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{_fmt(lo)} {_fmt(lo)} {_fmt(size)} {_fmt(size)}" '
        'width="640" height="640">'
    )
    return "\n".join([header] + paths + ["</svg>"]) + "\n"
