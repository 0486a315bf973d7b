"""Moment-polytope pictures: the product of spheres, ellipsoid triangles,
corner chops for blow-ups and the singular-cubic packing of the plane.
"""
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from singpack.core.config import settings
from singpack.core.exceptions import InputError, InvariantViolation, OutOfRangeError
from singpack.core.logging_config import get_logger
from singpack.services.integration import rk4_step, rk4_trajectory
from singpack.services.lattice import RationalLike, blowup_plane, combine, parse_rational, symplectic_volume
from singpack.services.packing import (
    Ellipsoid,
    GammaCoefficients,
    PackingReport,
    Polarization,
    blowdown_report,
    gamma_coefficients,
)

logger = get_logger(__name__)

Point = Tuple[Fraction, Fraction]


def _cross(o: Point, u: Point, v: Point) -> Fraction:
    return (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0])


@dataclass(frozen=True)
class Polytope:
    """Convex rational polygon, vertices counterclockwise"""
    vertices: Tuple[Point, ...]

    def __post_init__(self):
        vertices = tuple((parse_rational(x), parse_rational(y)) for x, y in self.vertices)
        if len(vertices) < 3:
            raise InputError(f"A polygon needs at least 3 vertices, got {len(vertices)}")
        n = len(vertices)
        for i in range(n):
            if _cross(vertices[i - 1], vertices[i], vertices[(i + 1) % n]) <= 0:
                raise InputError(f"Vertices are not strictly convex counterclockwise at index {i}")
        object.__setattr__(self, "vertices", vertices)

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def area(self) -> Fraction:
        return polytope_area(self)

    def format(self) -> List[List[str]]:
        return [[str(x), str(y)] for x, y in self.vertices]


def polytope_area(p: Polytope) -> Fraction:
    """Exact shoelace area"""
    n = len(p.vertices)
    twice = sum(
        (p.vertices[i][0] * p.vertices[(i + 1) % n][1] - p.vertices[(i + 1) % n][0] * p.vertices[i][1]
         for i in range(n)),
        Fraction(0)
    )
    return twice / 2


def _primitive(d: Point) -> Tuple[Tuple[int, int], Fraction]:
    """Primitive integer direction u and lattice length L with d = L u"""
    scale = math.lcm(d[0].denominator, d[1].denominator)
    x, y = int(d[0] * scale), int(d[1] * scale)
    g = math.gcd(x, y)
    return (x // g, y // g), Fraction(g, scale)


def _drop_collinear(vertices: List[Point]) -> List[Point]:
    out = []
    for v in vertices:
        if out and out[-1] == v:
            continue
        out.append(v)
    if len(out) > 1 and out[0] == out[-1]:
        out.pop()
    n = len(out)
    return [out[i] for i in range(n) if _cross(out[i - 1], out[i], out[(i + 1) % n]) != 0]


def chop(p: Polytope, corner: int, mu: RationalLike) -> Polytope:
    """Delzant cut of size mu at a smooth corner: area drops by mu^2/2"""
    mu = parse_rational(mu)
    n = len(p.vertices)
    if not 0 <= corner < n:
        raise InputError(f"Corner index {corner} out of range for {n} vertices")
    if mu <= 0:
        raise InputError(f"Chop size must be positive, got {mu}")

    v = p.vertices[corner]
    prev, nxt = p.vertices[corner - 1], p.vertices[(corner + 1) % n]
    u_next, length_next = _primitive((nxt[0] - v[0], nxt[1] - v[1]))
    u_prev, length_prev = _primitive((prev[0] - v[0], prev[1] - v[1]))

    if abs(u_next[0] * u_prev[1] - u_next[1] * u_prev[0]) != 1:
        raise InputError(f"Corner {corner} is not smooth; cannot chop")
    if mu > length_next or mu > length_prev:
        raise OutOfRangeError(
            f"Chop size {mu} exceeds the edge lattice lengths {length_prev}, {length_next}"
        )

    cut = [
        (v[0] + mu * u_prev[0], v[1] + mu * u_prev[1]),
        (v[0] + mu * u_next[0], v[1] + mu * u_next[1]),
    ]
    vertices = list(p.vertices[:corner]) + cut + list(p.vertices[corner + 1:])
    chopped = Polytope(tuple(_drop_collinear(vertices)))
    logger.debug(f"Chopped corner {v} by {mu}: {len(p)} -> {len(chopped)} vertices")
    return chopped


def build_polytope(kind: str, params: Mapping[str, Any]) -> Polytope:
    """rectangle(w, h) | ellipsoid_triangle(a, b) | chop(polytope, corner, mu)"""
    if kind == "rectangle":
        w, h = parse_rational(params["w"]), parse_rational(params["h"])
        if w <= 0 or h <= 0:
            raise InputError("Rectangle sides must be positive")
        return Polytope(((0, 0), (w, 0), (w, h), (0, h)))
    if kind == "ellipsoid_triangle":
        a, b = parse_rational(params["a"]), parse_rational(params["b"])
        if a <= 0 or b <= 0:
            raise InputError("Ellipsoid capacities must be positive")
        return Polytope(((0, 0), (a, 0), (0, b)))
    if kind == "chop":
        return chop(params["polytope"], int(params.get("corner", 0)), params["mu"])
    raise InputError(f"Unknown polytope kind {kind!r}")


class Basin(str, Enum):
    SIGMA1 = "sigma1"
    SIGMA2 = "sigma2"
    SEPARATRIX = "separatrix"


@dataclass(frozen=True)
class ToricField:
    """X = (area1 - R1) d/dR1 + (area2 - R2) d/dR2 on the rectangle"""
    area1: Fraction
    area2: Fraction

    def __post_init__(self):
        area1, area2 = parse_rational(self.area1), parse_rational(self.area2)
        if area1 <= 0 or area2 <= 0:
            raise InputError("Sphere areas must be positive")
        object.__setattr__(self, "area1", area1)
        object.__setattr__(self, "area2", area2)

    @property
    def corner(self) -> np.ndarray:
        return np.array([float(self.area1), float(self.area2)])

    def velocity(self, R: np.ndarray) -> np.ndarray:
        return self.corner - R

    def rectangle(self) -> Polytope:
        return build_polytope("rectangle", {"w": self.area1, "h": self.area2})


def separatrix_sign(f: ToricField, point: Sequence[RationalLike]) -> Fraction:
    """R2 * area1 - R1 * area2; negative below the separatrix"""
    if len(point) != 2:
        raise InputError(f"A point of the rectangle has two coordinates, got {len(point)}")
    R1, R2 = (parse_rational(x) for x in point)
    return R2 * f.area1 - R1 * f.area2


def _label(s) -> Basin:
    if s < 0:
        return Basin.SIGMA1
    if s > 0:
        return Basin.SIGMA2
    return Basin.SEPARATRIX


def _check_open_rectangle(f: ToricField, R: np.ndarray):
    c = f.corner
    inside = (R[..., 0] > 0) & (R[..., 0] < c[0]) & (R[..., 1] > 0) & (R[..., 1] < c[1])
    if not np.all(inside):
        raise InputError(f"{int(np.count_nonzero(~inside))} point(s) outside the open rectangle")


def classify_batch(
    f: ToricField,
    points,
    dt: Optional[float] = None,
    boundary: Optional[float] = None,
    max_time: float = 60.0
) -> np.ndarray:
    """Basin labels by backward RK4 integration until an edge is approached.

    The edge {R2 = 0} is Sigma1, {R1 = 0} is Sigma2; a point reaching both in
    the same step is resolved by the crossing fraction within the step.
    """
    dt = dt or settings.RK4_STEP
    boundary = boundary or settings.BOUNDARY_DISTANCE
    R = np.array(points, dtype=float).reshape(-1, 2)
    _check_open_rectangle(f, R)

    # integrate in units of the rectangle so that the separatrix is the diagonal
    scale = f.corner
    backward = lambda _, y: y - 1.0
    labels = np.full(len(R), Basin.SEPARATRIX.value, dtype=object)
    active = np.arange(len(R))
    current = R / scale
    t = 0.0

    while active.size and t < max_time:
        previous = current[active]
        stepped = rk4_step(backward, t, previous, dt)
        t += dt
        hit1 = stepped[:, 1] <= boundary
        hit2 = stepped[:, 0] <= boundary

        with np.errstate(divide="ignore", invalid="ignore"):
            frac1 = np.where(hit1, (previous[:, 1] - boundary) / (previous[:, 1] - stepped[:, 1]), np.inf)
            frac2 = np.where(hit2, (previous[:, 0] - boundary) / (previous[:, 0] - stepped[:, 0]), np.inf)
        both = hit1 & hit2
        tie = np.zeros_like(both)
        tie[both] = np.abs(frac1[both] - frac2[both]) <= settings.SEPARATRIX_TOLERANCE

        labels[active[hit1 & ~tie & (frac1 < frac2)]] = Basin.SIGMA1.value
        labels[active[hit2 & ~tie & (frac2 < frac1)]] = Basin.SIGMA2.value
        done = hit1 | hit2
        current[active] = stepped
        active = active[~done]

    if active.size:
        logger.warning(f"{active.size} point(s) did not reach an edge within t = {max_time}")
    return labels


@dataclass(frozen=True)
class Classification:
    label: Basin
    analytic: Basin
    integrated: Basin
    sign: Fraction

    @property
    def agree(self) -> bool:
        return self.analytic == self.integrated


def product_field_classify(f: ToricField, point: Sequence[RationalLike]) -> Classification:
    """Basin of a point of the open rectangle by the sign test and by integration"""
    sign = separatrix_sign(f, point)
    analytic = _label(sign)
    integrated = Basin(classify_batch(f, [[float(parse_rational(x)) for x in point]])[0])
    if analytic != integrated and abs(float(sign)) > settings.CLASSIFY_MARGIN:
        logger.error(f"Sign test says {analytic.value}, integration says {integrated.value}")
        raise InvariantViolation(f"basin classification disagrees at {[str(x) for x in point]}")
    return Classification(label=analytic, analytic=analytic, integrated=integrated, sign=sign)


def separatrix_drift(f: ToricField, n: int = 100, dt: Optional[float] = None, t_end: float = 1.0) -> float:
    """Max distance to R2 = (area2/area1) R1 of RK4 trajectories started on it"""
    dt = dt or settings.RK4_STEP
    c = f.corner
    s = np.linspace(0, 1, n + 2)[1:-1]
    start = np.stack([s * c[0], s * c[1]], axis=-1)
    _, trajectory = rk4_trajectory(0.0, t_end, lambda _, y: f.velocity(y), int(round(t_end / dt)) + 1, start)
    distance = np.abs(trajectory[..., 1] * c[0] - trajectory[..., 0] * c[1]) / np.hypot(c[0], c[1])
    return float(np.max(distance))


def basin_areas(f: ToricField) -> Tuple[Fraction, Fraction]:
    """The separatrix cuts the rectangle into two triangles of equal area"""
    half = f.area1 * f.area2 / 2
    return half, half


def basin_triangles(f: ToricField) -> Tuple[Polytope, Polytope]:
    c = (f.area1, f.area2)
    return (
        Polytope(((0, 0), (f.area1, 0), c)),
        Polytope(((0, 0), c, (0, f.area2))),
    )


@dataclass(frozen=True)
class CubicReport:
    mu: Fraction
    identity_holds: bool
    pieces: Tuple[Ellipsoid, ...]
    labels: Tuple[str, ...]
    volumes: Tuple[Fraction, ...]
    total: Fraction
    ledger: PackingReport
    gammas: GammaCoefficients
    polytope: Polytope
    polytope_area: Fraction
    lattice_volume: Fraction

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mu": str(self.mu),
            "identity_holds": self.identity_holds,
            "pieces": [
                {"label": label, "a": str(e.a), "b": str(e.b), "volume": str(v)}
                for label, e, v in zip(self.labels, self.pieces, self.volumes)
            ],
            "total": str(self.total),
            "residual": str(self.ledger.residual),
            "gammas": [str(g) for g in self.gammas.gammas],
            "polytope": self.polytope.format(),
            "polytope_area": str(self.polytope_area),
            "lattice_volume": str(self.lattice_volume),
        }


PLANE_TRIANGLE = Polytope(((0, 0), (1, 0), (0, 1)))


def cubic_pipeline(mu: RationalLike) -> CubicReport:
    """Full packing of the plane by B(mu), E(3 - 2mu, 1/3) and E(mu, 2/3 - mu)"""
    mu = parse_rational(mu)
    if not 0 < mu < Fraction(2, 3):
        raise OutOfRangeError(f"mu must lie in (0, 2/3), got {mu}")

    model = blowup_plane(mu)
    weights = (Fraction(1, 3), Fraction(2, 3) - mu)
    identity_holds = combine(weights, [model.curve("cubic"), model.curve("exceptional")]) == model.omega_class
    polarization = Polarization.from_curves(model, ["cubic", "exceptional"], weights)
    ledger = blowdown_report(polarization, [mu])

    # ball first
    pieces = (ledger.ellipsoids[2], ledger.ellipsoids[0], ledger.ellipsoids[1])
    labels = ("ball", "cubic", "exceptional")
    volumes = tuple(e.volume for e in pieces)
    total = sum(volumes, Fraction(0))
    if not identity_holds or total != Fraction(1, 2):
        raise InvariantViolation(f"cubic packing ledger fails: total volume {total} != 1/2")

    polytope = chop(PLANE_TRIANGLE, 0, mu)
    lattice_volume = symplectic_volume(model)
    if polytope_area(polytope) != lattice_volume:
        raise InvariantViolation(
            f"blown-up polytope area {polytope_area(polytope)} != lattice volume {lattice_volume}"
        )

    logger.info(f"Cubic pipeline at mu = {mu}: volumes {[str(v) for v in volumes]}")
    return CubicReport(
        mu=mu,
        identity_holds=identity_holds,
        pieces=pieces,
        labels=labels,
        volumes=volumes,
        total=total,
        ledger=ledger,
        gammas=gamma_coefficients(polarization),
        polytope=polytope,
        polytope_area=polytope_area(polytope),
        lattice_volume=lattice_volume,
    )
