"""Tetrahedron geometry kernel.

Vertex/edge indexing convention, fixed everywhere in this package: the edge
slots are ordered (d12, d13, d14, d23, d24, d34), d_ij joins vertices V_i and
V_j, F_i is the face opposite V_i, and the dihedral angle on edge e_ij (named
theta_ij) is measured between the two faces adjacent to e_ij, i.e. F_k and
F_l.  All functions here are pure; no permutation of vertex labels ever
happens implicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

import numpy as np

__all__ = [
    "SLOTS",
    "SLOT_INDEX",
    "EdgeSextuple",
    "Tetrahedron",
    "AngleSextuple",
    "AreaVector",
    "GeometryError",
    "TriangleInequalityViolated",
    "DegenerateFlat",
    "NumericalInstability",
    "NotRealizable",
    "cayley_menger",
    "validate_edges",
    "dihedral_angles",
    "angle_determinant_residual",
    "angle_cosine_matrix",
    "area_vector",
    "edges_from_angles",
    "normalized_area",
    "solid_angle",
    "min_sine_bound",
    "min_angle_bound",
    "law_of_cosines_residual",
    "projection_residual",
    "volume_identity_residual",
    "SOMMERVILLE_1_EDGES",
    "SOMMERVILLE_1_NORMALIZED_AREA",
]

# Edge slots in fixed order; SLOT_INDEX maps an unordered vertex pair to its slot.
SLOTS = ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))
SLOT_INDEX = {p: i for i, p in enumerate(SLOTS)}
for (_i, _j), _ix in list(SLOT_INDEX.items()):
    SLOT_INDEX[(_j, _i)] = _ix

# The four faces: FACES[i-1] lists the three slots of face F_i (opposite V_i).
FACES = tuple(
    tuple(SLOT_INDEX[(a, b)] for a in others for b in others if a < b)
    for others in ([2, 3, 4], [1, 3, 4], [1, 2, 4], [1, 2, 3])
)

_ACOS_CLAMP = 1e-12  # inputs to acos/asin may overshoot [-1,1] by at most this


class GeometryError(ValueError):
    pass


class TriangleInequalityViolated(GeometryError):
    def __init__(self, face: int, sides):
        super().__init__(f"face F{face} with sides {sides} violates the strict triangle inequality")
        self.face = face
        self.sides = sides


class DegenerateFlat(GeometryError):
    def __init__(self, determinant: float):
        super().__init__(f"Cayley-Menger determinant {determinant} is not positive")
        self.determinant = determinant


class NumericalInstability(GeometryError):
    pass


class NotRealizable(GeometryError):
    pass


class EdgeSextuple(NamedTuple):
    d12: float
    d13: float
    d14: float
    d23: float
    d24: float
    d34: float

    @classmethod
    def of(cls, values: Sequence[float]) -> "EdgeSextuple":
        vals = tuple(float(v) for v in values)
        if len(vals) != 6:
            raise GeometryError(f"need six edge lengths, got {len(vals)}")
        if any(v <= 0 or not math.isfinite(v) for v in vals):
            raise GeometryError(f"edge lengths must be positive and finite: {vals}")
        return cls(*vals)

    def length(self, i: int, j: int) -> float:
        return self[SLOT_INDEX[(i, j)]]

    def scaled(self, s: float) -> "EdgeSextuple":
        return EdgeSextuple(*(v * s for v in self))


@dataclass(frozen=True)
class AngleSextuple:
    """Six dihedral angles in slot order, each in (0, pi).

    ``pi_fractions[k]``, when not None, tags angle k as exactly
    ``pi_fractions[k] * pi``; numeric values are kept consistent with tags.
    """

    values: tuple
    pi_fractions: tuple = (None,) * 6

    def __post_init__(self):
        if len(self.values) != 6 or len(self.pi_fractions) != 6:
            raise GeometryError("need six angles")
        for v in self.values:
            if not (0.0 < v < math.pi):
                raise GeometryError(f"dihedral angle {v} outside (0, pi)")

    @classmethod
    def from_radians(cls, values: Sequence[float]) -> "AngleSextuple":
        return cls(tuple(float(v) for v in values))

    @classmethod
    def from_pi_fractions(cls, fractions: Sequence[Fraction]) -> "AngleSextuple":
        fr = tuple(Fraction(f) for f in fractions)
        return cls(tuple(float(f) * math.pi for f in fr), fr)

    def angle(self, i: int, j: int) -> float:
        return self.values[SLOT_INDEX[(i, j)]]

    def permuted(self, slot_perm: Sequence[int]) -> "AngleSextuple":
        return AngleSextuple(tuple(self.values[k] for k in slot_perm),
                             tuple(self.pi_fractions[k] for k in slot_perm))


class AreaVector(NamedTuple):
    F1: float
    F2: float
    F3: float
    F4: float


@dataclass(frozen=True)
class Tetrahedron:
    edges: EdgeSextuple
    volume: float
    face_areas: tuple  # (|F1|, |F2|, |F3|, |F4|)


def cayley_menger(edges: Sequence[float]):
    """Bordered 5x5 determinant of squared edge lengths.

    Positive exactly when the six lengths embed as a nondegenerate
    tetrahedron; equals 288 V^2.  Works for any field-like number type
    (floats, Fractions), so exact-arithmetic cross-checks can reuse it.
    """
    d12, d13, d14, d23, d24, d34 = [v * v for v in edges]
    one = d12 / d12 if hasattr(d12, "denominator") else 1.0
    zero = one - one
    m = [
        [zero, d12, d13, d14, one],
        [d12, zero, d23, d24, one],
        [d13, d23, zero, d34, one],
        [d14, d24, d34, zero, one],
        [one, one, one, one, zero],
    ]
    return _det(m)


def _det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    total = None
    for j in range(n):
        if m[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    if total is None:
        return m[0][0] - m[0][0]
    return total


def _heron(a: float, b: float, c: float) -> float:
    s = 0.5 * (a + b + c)
    prod = s * (s - a) * (s - b) * (s - c)
    return math.sqrt(max(prod, 0.0))


def validate_edges(edges) -> Tetrahedron:
    """Check the six lengths form a tetrahedron; compute volume and face areas."""
    e = edges if isinstance(edges, EdgeSextuple) else EdgeSextuple.of(edges)
    areas = []
    for i, face in enumerate(FACES, start=1):
        a, b, c = (e[k] for k in face)
        if a >= b + c or b >= a + c or c >= a + b:
            raise TriangleInequalityViolated(i, (a, b, c))
        areas.append(_heron(a, b, c))
    det = cayley_menger(e)
    if det <= 0.0:
        raise DegenerateFlat(det)
    return Tetrahedron(edges=e, volume=math.sqrt(det / 288.0), face_areas=tuple(areas))


def _clamped_acos(c: float) -> float:
    if c > 1.0 or c < -1.0:
        if abs(c) > 1.0 + _ACOS_CLAMP:
            raise NumericalInstability(f"cosine {c} outside [-1-tol, 1+tol]")
        c = max(-1.0, min(1.0, c))
    return math.acos(c)


def dihedral_angles(t: Tetrahedron) -> AngleSextuple:
    """Dihedral angles from edge lengths.

    cos(theta_ij) = D_ij / sqrt(D_ijk * D_ijl) with D_ijk = -16 |F_l|^2 and
    D_ij the quartic polynomial in the squared lengths below.
    """
    e = t.edges
    sq = {}
    for (i, j), v in zip(SLOTS, e):
        sq[(i, j)] = sq[(j, i)] = v * v
    out = []
    for (i, j) in SLOTS:
        k, l = (x for x in (1, 2, 3, 4) if x not in (i, j))
        dij = sq[(i, j)]
        d_ij = (-dij * dij
                + (sq[(i, k)] + sq[(i, l)] + sq[(j, k)] + sq[(j, l)] - 2 * sq[(k, l)]) * dij
                + (sq[(i, k)] - sq[(j, k)]) * (sq[(j, l)] - sq[(i, l)]))
        d_ijk = -16.0 * t.face_areas[l - 1] ** 2
        d_ijl = -16.0 * t.face_areas[k - 1] ** 2
        out.append(_clamped_acos(d_ij / math.sqrt(d_ijk * d_ijl)))
    return AngleSextuple.from_radians(out)


def angle_cosine_matrix(a: AngleSextuple) -> np.ndarray:
    """4x4 symmetric matrix in the cosines whose determinant must vanish.

    Row/column i corresponds to face F_i; the (i, j) entry for i != j is
    cos(theta_kl) for the edge e_kl shared by faces F_i and F_j; the diagonal
    is -1.  The face-area vector lies in its null space for any tetrahedron.
    """
    c = [math.cos(v) for v in a.values]

    def cc(i, j):
        k, l = (x for x in (1, 2, 3, 4) if x not in (i, j))
        return c[SLOT_INDEX[(k, l)]]

    m = -np.eye(4)
    for i in range(1, 5):
        for j in range(1, 5):
            if i != j:
                m[i - 1, j - 1] = cc(i, j)
    return m


def angle_determinant_residual(a: AngleSextuple) -> float:
    """Determinant of the cosine matrix; zero is necessary for realizability."""
    return float(np.linalg.det(angle_cosine_matrix(a)))


_NULLSPACE_TOL = 1e-7


def area_vector(a: AngleSextuple) -> AreaVector:
    """Null-space vector of the cosine matrix, scaled so its max entry is 1.

    All entries are strictly positive for a realizable angle sextuple.
    """
    m = angle_cosine_matrix(a)
    _, s, vt = np.linalg.svd(m)
    if s[-1] > _NULLSPACE_TOL * s[0]:
        raise NotRealizable(
            f"cosine matrix has trivial null space (smallest singular value {s[-1]:.3e})")
    v = vt[-1]
    dominant = v[int(np.argmax(np.abs(v)))]
    if dominant < 0:
        v = -v
    if np.any(v <= 0):
        raise NotRealizable(f"null-space vector has non-positive entries: {v}")
    v = v / v.max()
    return AreaVector(*(float(x) for x in v))


_ROUND_TRIP_TOL = 1e-9


def edges_from_angles(a: AngleSextuple, round_trip_tol: float = _ROUND_TRIP_TOL) -> EdgeSextuple:
    """Edge lengths (up to scale, d12 = 1) realizing the given dihedral angles.

    Uses d_kl proportional to |F_i| |F_j| sin(theta_kl) where {i,j} is the
    complementary vertex pair.  A sextuple is accepted only if the
    reconstructed tetrahedron reproduces the input angles: valid edge lengths
    can arise from invalid angle data, so the round trip is the decisive test.
    """
    areas = area_vector(a)
    raw = []
    for (k, l) in SLOTS:
        i, j = (x for x in (1, 2, 3, 4) if x not in (k, l))
        raw.append(areas[i - 1] * areas[j - 1] * math.sin(a.angle(k, l)))
    if any(v <= 0 for v in raw):
        raise NotRealizable(f"reconstructed edges not positive: {raw}")
    try:
        edges = EdgeSextuple.of(tuple(v / raw[0] for v in raw))
        tet = validate_edges(edges)
        back = dihedral_angles(tet)
    except NotRealizable:
        raise
    except GeometryError as exc:
        raise NotRealizable(f"reconstructed edges rejected: {exc}") from exc
    err = max(abs(x - y) for x, y in zip(back.values, a.values))
    if err > round_trip_tol:
        raise NotRealizable(f"round trip diverged by {err:.3e}")
    return edges


def normalized_area(t: Tetrahedron) -> float:
    """Scale-invariant isoperimetric quotient S / V^(2/3)."""
    return sum(t.face_areas) / t.volume ** (2.0 / 3.0)


def solid_angle(a: AngleSextuple, vertex: int) -> float:
    """Solid angle at a vertex: sum of its three incident dihedrals minus pi."""
    if vertex not in (1, 2, 3, 4):
        raise GeometryError(f"vertex must be 1..4, got {vertex}")
    incident = [a.angle(vertex, other) for other in (1, 2, 3, 4) if other != vertex]
    return sum(incident) - math.pi


def min_sine_bound(norm_area: float) -> float:
    """Lower bound on sin(theta) for every dihedral angle of a tetrahedron
    with the given normalized area: sin(theta) >= 243 / (S/V^(2/3))^3."""
    if norm_area <= 0:
        raise GeometryError("normalized area must be positive")
    return min(243.0 / norm_area**3, 1.0)


def min_angle_bound(norm_area: float) -> float:
    """arcsin of min_sine_bound: every dihedral lies in [theta0, pi - theta0]."""
    return math.asin(min_sine_bound(norm_area))


def law_of_cosines_residual(t: Tetrahedron) -> float:
    """|F1|^2 minus its law-of-cosines expansion in the other three faces."""
    f1, f2, f3, f4 = t.face_areas
    a = dihedral_angles(t)
    rhs = (f2 * f2 + f3 * f3 + f4 * f4
           - 2.0 * (f2 * f3 * math.cos(a.angle(1, 4))
                    + f2 * f4 * math.cos(a.angle(1, 3))
                    + f3 * f4 * math.cos(a.angle(1, 2))))
    return f1 * f1 - rhs


def projection_residual(t: Tetrahedron) -> float:
    """|F1| minus the sum of the projections of the other faces onto it."""
    f1, f2, f3, f4 = t.face_areas
    a = dihedral_angles(t)
    return f1 - (f2 * math.cos(a.angle(3, 4))
                 + f3 * math.cos(a.angle(2, 4))
                 + f4 * math.cos(a.angle(2, 3)))


def _planar_angle(e: EdgeSextuple, at: int, to_a: int, to_b: int) -> float:
    """Face angle at vertex `at` between the edges toward to_a and to_b."""
    a = e.length(at, to_a)
    b = e.length(at, to_b)
    c = e.length(to_a, to_b)
    return _clamped_acos((a * a + b * b - c * c) / (2.0 * a * b))


def volume_identity_residual(t: Tetrahedron, i: int, j: int, k: int) -> float:
    """Relative residual of V^2 = (2/9) |Fj||Fk||Fl| sin(th_ij) sin(th_ik) sin(ang at V_i).

    Valid for any ordered choice of distinct i, j, k; l is the remaining vertex.
    """
    l = next(x for x in (1, 2, 3, 4) if x not in (i, j, k))
    a = dihedral_angles(t)
    f = t.face_areas
    rhs = (2.0 / 9.0) * f[j - 1] * f[k - 1] * f[l - 1] \
        * math.sin(a.angle(i, j)) * math.sin(a.angle(i, k)) \
        * math.sin(_planar_angle(t.edges, i, j, k))
    v2 = t.volume ** 2
    return (v2 - rhs) / v2


SOMMERVILLE_1_EDGES = EdgeSextuple(2.0, math.sqrt(3), math.sqrt(3), math.sqrt(3), math.sqrt(3), 2.0)
SOMMERVILLE_1_NORMALIZED_AREA = 2.0 ** (11.0 / 6.0) * 3.0 ** (2.0 / 3.0)
