"""Exact degree-2 lattice arithmetic: intersection pairing, areas, volumes.

Homology and cohomology classes share one coordinate vector; Poincaré duality
is the identity on coordinates and the intersection matrix carries the
pairing.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Mapping, Sequence, Tuple, Union

import sympy

from singpack.core.exceptions import InputError, OutOfRangeError
from singpack.core.logging_config import get_logger

logger = get_logger(__name__)

Rational = Fraction
RationalLike = Union[Fraction, int, str]
Vector = Tuple[Fraction, ...]


def parse_rational(value: RationalLike) -> Fraction:
    """Parse "p/q", integers and finite decimals exactly ("0.715" -> 143/200)"""
    if isinstance(value, bool):
        raise InputError(f"Not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise InputError(f"Cannot parse rational {value!r}") from e
    raise InputError(f"Rationals must be given as strings or integers, got {type(value).__name__}")


def format_rational(value: Fraction) -> str:
    return str(Fraction(value))


def to_sympy(value: Fraction) -> sympy.Rational:
    value = Fraction(value)
    return sympy.Rational(value.numerator, value.denominator)


def from_sympy(value) -> Fraction:
    value = sympy.Rational(value)
    return Fraction(int(value.p), int(value.q))


@dataclass(frozen=True)
class CohomologyClass:
    coords: Vector

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(parse_rational(c) for c in self.coords))

    @classmethod
    def of(cls, values: Iterable[RationalLike]) -> "CohomologyClass":
        return cls(tuple(values))

    @property
    def rank(self) -> int:
        return len(self.coords)

    def _check(self, other: "CohomologyClass"):
        if self.rank != other.rank:
            raise InputError(f"Dimension mismatch: {self.rank} != {other.rank}")

    def __add__(self, other: "CohomologyClass") -> "CohomologyClass":
        self._check(other)
        return CohomologyClass(tuple(x + y for x, y in zip(self.coords, other.coords)))

    def __sub__(self, other: "CohomologyClass") -> "CohomologyClass":
        self._check(other)
        return CohomologyClass(tuple(x - y for x, y in zip(self.coords, other.coords)))

    def __neg__(self) -> "CohomologyClass":
        return CohomologyClass(tuple(-x for x in self.coords))

    def scale(self, factor: RationalLike) -> "CohomologyClass":
        factor = parse_rational(factor)
        return CohomologyClass(tuple(factor * x for x in self.coords))

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.coords)

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for x in self.coords)

    def as_integers(self) -> Tuple[int, ...]:
        if not self.is_integral():
            raise InputError(f"Class {self.format()} is not integral")
        return tuple(int(x) for x in self.coords)

    def max_distance(self, other: "CohomologyClass") -> Fraction:
        self._check(other)
        return max((abs(x - y) for x, y in zip(self.coords, other.coords)), default=Fraction(0))

    def format(self) -> List[str]:
        return [format_rational(x) for x in self.coords]


ClassLike = Union[CohomologyClass, Sequence[RationalLike]]


def as_vector(u: ClassLike) -> Vector:
    if isinstance(u, CohomologyClass):
        return u.coords
    return tuple(parse_rational(x) for x in u)


def combine(weights: Sequence[RationalLike], classes: Sequence[ClassLike]) -> CohomologyClass:
    """Exact weighted sum of classes"""
    if len(weights) != len(classes):
        raise InputError(f"{len(weights)} weights for {len(classes)} classes")
    if not classes:
        raise InputError("Cannot combine an empty list of classes")
    vectors = [as_vector(c) for c in classes]
    rank = len(vectors[0])
    if any(len(v) != rank for v in vectors):
        raise InputError("Classes of different ranks")
    total = [Fraction(0)] * rank
    for w, v in zip(weights, vectors):
        w = parse_rational(w)
        for i, x in enumerate(v):
            total[i] += w * x
    return CohomologyClass(tuple(total))


def pairing(u: ClassLike, v: ClassLike, Q: Sequence[Sequence[int]]) -> Fraction:
    """Return u^T Q v exactly"""
    u, v = as_vector(u), as_vector(v)
    n = len(Q)
    if len(u) != n or len(v) != n or any(len(row) != n for row in Q):
        raise InputError(f"Dimension mismatch in pairing: {len(u)}, {len(v)} against a {n}x{n} form")
    return sum((u[i] * Q[i][j] * v[j] for i in range(n) for j in range(n) if Q[i][j]), Fraction(0))


@dataclass(frozen=True)
class LatticeModel:
    basis_names: Tuple[str, ...]
    intersection: Tuple[Tuple[int, ...], ...]
    omega: Vector
    curves: Tuple[Tuple[str, Tuple[int, ...]], ...] = field(default=())

    def __post_init__(self):
        basis = tuple(str(b) for b in self.basis_names)
        rank = len(basis)
        if rank == 0:
            raise InputError("A lattice model needs a positive rank")

        Q = tuple(tuple(self._integer(x) for x in row) for row in self.intersection)
        if len(Q) != rank or any(len(row) != rank for row in Q):
            raise InputError(f"Intersection matrix must be {rank}x{rank}")
        if any(Q[i][j] != Q[j][i] for i in range(rank) for j in range(rank)):
            raise InputError("Intersection matrix must be symmetric")

        omega = tuple(parse_rational(x) for x in self.omega)
        if len(omega) != rank:
            raise InputError(f"omega has length {len(omega)}, expected {rank}")

        raw_curves = self.curves.items() if isinstance(self.curves, Mapping) else self.curves
        curves = []
        for name, vector in raw_curves:
            vector = tuple(self._integer(x) for x in vector)
            if len(vector) != rank:
                raise InputError(f"Curve {name!r} has length {len(vector)}, expected {rank}")
            curves.append((str(name), vector))
        names = [name for name, _ in curves]
        if len(set(names)) != len(names):
            raise InputError("Curve names must be unique")

        object.__setattr__(self, "basis_names", basis)
        object.__setattr__(self, "intersection", Q)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "curves", tuple(curves))

    @staticmethod
    def _integer(x) -> int:
        if isinstance(x, bool) or not isinstance(x, (int, Fraction)) or Fraction(x).denominator != 1:
            raise InputError(f"Expected an integer, got {x!r}")
        return int(x)

    @property
    def rank(self) -> int:
        return len(self.basis_names)

    @property
    def omega_class(self) -> CohomologyClass:
        return CohomologyClass(self.omega)

    @property
    def curve_names(self) -> List[str]:
        return [name for name, _ in self.curves]

    def curve(self, name: str) -> Tuple[int, ...]:
        for curve_name, vector in self.curves:
            if curve_name == name:
                return vector
        raise InputError(f"Unknown curve {name!r}; known curves: {self.curve_names}")

    def pair(self, u: ClassLike, v: ClassLike) -> Fraction:
        return pairing(u, v, self.intersection)


def symplectic_volume(m: LatticeModel) -> Fraction:
    """vol = Q([w],[w]) / 2 (the unit ball has capacity 1)"""
    return m.pair(m.omega, m.omega) / 2


def omega_area(m: LatticeModel, c: ClassLike) -> Fraction:
    """Symplectic area [w].c of a curve class"""
    return m.pair(m.omega, c)


def _column_matrix(classes: Sequence[ClassLike]) -> sympy.Matrix:
    vectors = [as_vector(c) for c in classes]
    rank = len(vectors[0])
    if any(len(v) != rank for v in vectors):
        raise InputError("Classes of different ranks")
    return sympy.Matrix(rank, len(vectors), lambda i, j: to_sympy(vectors[j][i]))


def class_rank(classes: Sequence[ClassLike]) -> int:
    """Exact rank over Q of a list of classes"""
    if not classes:
        return 0
    return _column_matrix(classes).rank()


def class_relations(classes: Sequence[ClassLike]) -> List[Vector]:
    """Basis of the rational relations sum(l_i * c_i) = 0, in reduced echelon order"""
    if not classes:
        return []
    kernel = _column_matrix(classes).nullspace()
    return [tuple(from_sympy(x) for x in column) for column in kernel]


def change_basis(m: LatticeModel, U: Sequence[Sequence[int]]) -> LatticeModel:
    """Express the model in the basis given by the columns of a unimodular U"""
    n = m.rank
    if len(U) != n or any(len(row) != n for row in U):
        raise InputError(f"Change of basis must be {n}x{n}")
    U_matrix = sympy.Matrix(U)
    if abs(U_matrix.det()) != 1:
        raise InputError("Change of basis must be unimodular (det = +-1)")
    U_inv = U_matrix.inv()
    Q_new = U_matrix.T * sympy.Matrix(m.intersection) * U_matrix

    def transform(vector) -> Tuple[Fraction, ...]:
        image = U_inv * sympy.Matrix([to_sympy(x) for x in vector])
        return tuple(from_sympy(x) for x in image)

    curves = []
    for name, vector in m.curves:
        curves.append((name, tuple(int(x) for x in transform(vector))))

    logger.debug(f"Changed basis of rank {n} model")
    return LatticeModel(
        basis_names=tuple(f"{name}'" for name in m.basis_names),
        intersection=tuple(tuple(int(Q_new[i, j]) for j in range(n)) for i in range(n)),
        omega=transform(m.omega),
        curves=tuple(curves),
    )


def projective_plane() -> LatticeModel:
    """CP^2 with a line of area 1"""
    return LatticeModel(
        basis_names=("L",),
        intersection=((1,),),
        omega=(1,),
        curves=(("line", (1,)), ("conic", (2,)), ("cubic", (3,))),
    )


def blowup_plane(mu: RationalLike) -> LatticeModel:
    """CP^2 blown up at a ball of capacity mu: [w] = l - mu e"""
    mu = parse_rational(mu)
    if not 0 < mu < 1:
        raise OutOfRangeError(f"Blow-up capacity must lie in (0, 1), got {mu}")
    return LatticeModel(
        basis_names=("L", "E"),
        intersection=((1, 0), (0, -1)),
        omega=(1, -mu),
        curves=(("line", (1, 0)), ("exceptional", (0, 1)), ("cubic", (3, -2))),
    )


def blowup_plane_points(mus: Sequence[RationalLike]) -> LatticeModel:
    """CP^2 blown up at several disjoint balls"""
    mus = [parse_rational(mu) for mu in mus]
    if not mus or any(mu <= 0 for mu in mus):
        raise OutOfRangeError("Blow-up capacities must be positive")
    if sum(mu * mu for mu in mus) >= 1:
        raise OutOfRangeError("Blown-up balls exceed the volume of CP^2")
    n = len(mus) + 1
    Q = tuple(tuple((1 if i == 0 else -1) if i == j else 0 for j in range(n)) for i in range(n))
    curves = [("line", tuple(1 if i == 0 else 0 for i in range(n)))]
    for k in range(1, n):
        curves.append((f"E{k}", tuple(1 if i == k else 0 for i in range(n))))
    return LatticeModel(
        basis_names=("L",) + tuple(f"E{k}" for k in range(1, n)),
        intersection=Q,
        omega=(Fraction(1),) + tuple(-mu for mu in mus),
        curves=tuple(curves),
    )


def product_spheres(mu: RationalLike) -> LatticeModel:
    """S^2 x S^2 with areas 1 and mu: [w] = mu PD(A) + PD(B)"""
    mu = parse_rational(mu)
    if mu <= 0:
        raise OutOfRangeError(f"Sphere area must be positive, got {mu}")
    return LatticeModel(
        basis_names=("A", "B"),
        intersection=((0, 1), (1, 0)),
        omega=(mu, 1),
        curves=(("S1", (1, 0)), ("S2", (0, 1))),
    )


def intersection_table(m: LatticeModel, classes: Sequence[ClassLike]) -> List[List[Fraction]]:
    return [[m.pair(u, v) for v in classes] for u in classes]
