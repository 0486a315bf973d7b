"""Synthesis of singular polarization data from [w].

[w] is written as a barycenter of nearby grid classes (Kuhn simplex of the
grid cell containing it), each vertex is cleared of denominators, and
linearly dependent class systems are reduced until the classes are
independent.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

from singpack.core.exceptions import InputError, InvariantViolation
from singpack.core.logging_config import get_logger
from singpack.services.lattice import (
    ClassLike,
    CohomologyClass,
    LatticeModel,
    RationalLike,
    as_vector,
    class_rank,
    class_relations,
    combine,
    intersection_table,
    parse_rational,
)

logger = get_logger(__name__)


@dataclass(frozen=True)
class BarycentricDecomposition:
    target: CohomologyClass
    vertices: Tuple[CohomologyClass, ...]
    weights: Tuple[Fraction, ...]
    grid_denominator: int

    @property
    def epsilon(self) -> Fraction:
        return Fraction(1, self.grid_denominator)

    @property
    def max_distance(self) -> Fraction:
        return max(self.target.max_distance(v) for v in self.vertices)

    def barycenter(self) -> CohomologyClass:
        return combine(self.weights, self.vertices)


@dataclass(frozen=True)
class PolarizationSketch:
    classes: Tuple[CohomologyClass, ...]
    weights: Tuple[Fraction, ...]
    clearing_factors: Tuple[int, ...]
    epsilon: Fraction
    max_distance: Fraction
    intersections: Tuple[Tuple[Fraction, ...], ...]
    eliminations: int

    @property
    def size(self) -> int:
        return len(self.classes)

    @property
    def mutual_intersections_nonnegative(self) -> bool:
        n = self.size
        return all(self.intersections[i][j] >= 0 for i in range(n) for j in range(n) if i != j)

    def total(self) -> CohomologyClass:
        return combine(self.weights, self.classes)


def _grid_denominator(q) -> int:
    if isinstance(q, bool) or not isinstance(q, int) or q < 1:
        raise InputError(f"Grid denominator must be a positive integer, got {q!r}")
    return q


def kuhn_simplex(b: ClassLike, q: int) -> BarycentricDecomposition:
    """Write b as a barycenter of the vertices of a Kuhn simplex of the 1/q grid"""
    q = _grid_denominator(q)
    b = CohomologyClass(as_vector(b))
    n = b.rank

    scaled = [q * x for x in b.coords]
    base = [math.floor(x) for x in scaled]
    frac = [x - f for x, f in zip(scaled, base)]

    # Descending fractional parts, ties by ascending coordinate index
    order = sorted(range(n), key=lambda i: (-frac[i], i))

    grid_points = [tuple(base)]
    current = list(base)
    for i in order:
        current[i] += 1
        grid_points.append(tuple(current))

    sorted_frac = [frac[i] for i in order]
    weights = [1 - sorted_frac[0]]
    weights += [sorted_frac[k] - sorted_frac[k + 1] for k in range(n - 1)]
    weights.append(sorted_frac[-1])

    vertices, kept = [], []
    for point, weight in zip(grid_points, weights):
        if weight == 0:
            continue
        vertices.append(CohomologyClass(tuple(Fraction(x, q) for x in point)))
        kept.append(weight)

    return BarycentricDecomposition(
        target=b,
        vertices=tuple(vertices),
        weights=tuple(kept),
        grid_denominator=q,
    )


def reduce_dependent_indexed(
    classes: Sequence[ClassLike],
    a: Sequence[RationalLike]
) -> Tuple[List[int], List[Fraction], int]:
    """Eliminate classes until the system is independent.

    Returns the surviving original indices, their new weights and the number
    of eliminations performed.
    """
    if len(classes) != len(a):
        raise InputError(f"{len(a)} weights for {len(classes)} classes")
    weights = [parse_rational(x) for x in a]
    if any(w < 0 for w in weights):
        raise InputError("Weights must be nonnegative")

    vectors = [as_vector(c) for c in classes]
    active = list(range(len(vectors)))
    current = dict(enumerate(weights))
    eliminations = 0

    while active:
        relations = class_relations([vectors[i] for i in active])
        if not relations:
            break
        relation = dict(zip(active, relations[0]))
        candidates = [i for i in active if relation[i] != 0]
        N = min(candidates, key=lambda i: (abs(current[i] / relation[i]), -abs(relation[i]), i))

        for i in active:
            if i != N:
                current[i] -= relation[i] / relation[N] * current[N]
        active.remove(N)
        eliminations += 1
        logger.debug(f"Eliminated class {N} using relation {[str(x) for x in relations[0]]}")

    reduced = [current[i] for i in active]
    if any(w < 0 for w in reduced):
        raise InvariantViolation("Reduction produced a negative weight")
    return active, reduced, eliminations


def reduce_dependent(
    classes: Sequence[ClassLike],
    a: Sequence[RationalLike]
) -> Tuple[List[CohomologyClass], List[Fraction]]:
    """Rewrite sum(a_i c_i) over an independent subsystem with nonnegative weights"""
    kept, weights, _ = reduce_dependent_indexed(classes, a)
    return [CohomologyClass(as_vector(classes[i])) for i in kept], weights


def clear_denominators(c: ClassLike) -> Tuple[int, CohomologyClass]:
    """Least k > 0 such that k*c is integral, together with k*c"""
    c = CohomologyClass(as_vector(c))
    k = math.lcm(*(x.denominator for x in c.coords))
    return k, c.scale(k)


def synthesize_polarization(m: LatticeModel, q: int) -> PolarizationSketch:
    """[w] = sum a_j PD(S_j) with a_j = lambda_j / k_j over independent integral classes"""
    omega = m.omega_class
    if omega.is_zero():
        raise InputError("The symplectic class must be nonzero")

    bary = kuhn_simplex(omega, q)
    logger.info(f"Kuhn simplex with {len(bary.vertices)} vertices at grid 1/{bary.grid_denominator}")

    cleared = [clear_denominators(v) for v in bary.vertices]
    classes = [c for _, c in cleared]
    weights = [lam / k for lam, (k, _) in zip(bary.weights, cleared)]

    kept, reduced, eliminations = reduce_dependent_indexed(classes, weights)
    survivors = [(i, w) for i, w in zip(kept, reduced) if w > 0]

    final_classes = tuple(classes[i] for i, _ in survivors)
    sketch = PolarizationSketch(
        classes=final_classes,
        weights=tuple(w for _, w in survivors),
        clearing_factors=tuple(cleared[i][0] for i, _ in survivors),
        epsilon=bary.epsilon,
        max_distance=bary.max_distance,
        intersections=tuple(tuple(row) for row in intersection_table(m, final_classes)),
        eliminations=eliminations,
    )

    if sketch.total() != omega:
        logger.error("Synthesized polarization does not reproduce [w]")
        raise InvariantViolation("identity sum a_j PD(S_j) = [w] fails for the synthesized classes")
    if class_rank(final_classes) != sketch.size:
        raise InvariantViolation("synthesized classes are not linearly independent")
    if not sketch.mutual_intersections_nonnegative:
        logger.warning("Synthesized classes have negative mutual intersections")

    logger.info(f"Synthesized {sketch.size} independent classes after {eliminations} eliminations")
    return sketch
