"""Exact packing bookkeeping for a singular polarization.

Given curve classes S_i with weights a_i such that [w] = sum a_i PD(S_i),
each curve carries an ellipsoid E(A_i - eps, a_i); the pieces fill the
manifold up to a volume (eps/2) * sum a_i.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from singpack.core.exceptions import (
    DegeneratePieceError,
    DegeneratePolarizationError,
    InputError,
    InvariantViolation,
)
from singpack.core.logging_config import get_logger
from singpack.services.lattice import (
    ClassLike,
    LatticeModel,
    RationalLike,
    Vector,
    as_vector,
    class_relations,
    combine,
    omega_area,
    parse_rational,
    symplectic_volume,
)

logger = get_logger(__name__)


@dataclass(frozen=True)
class Ellipsoid:
    """E(a, b) = {|z|^2/a + |w|^2/b < 1}"""
    a: Fraction
    b: Fraction

    @property
    def volume(self) -> Fraction:
        return self.a * self.b / 2

    @property
    def width(self) -> Fraction:
        return min(self.a, self.b)

    @classmethod
    def ball(cls, capacity: RationalLike) -> "Ellipsoid":
        capacity = parse_rational(capacity)
        return cls(capacity, capacity)


@dataclass(frozen=True)
class Polarization:
    model: LatticeModel
    classes: Tuple[Tuple[int, ...], ...]
    weights: Tuple[Fraction, ...]
    epsilon: Fraction = Fraction(0)
    names: Tuple[str, ...] = ()

    def __post_init__(self):
        vectors = [as_vector(c) for c in self.classes]
        if any(x.denominator != 1 for v in vectors for x in v):
            raise InputError("Curve classes must be integral")
        classes = tuple(tuple(int(x) for x in v) for v in vectors)
        weights = tuple(parse_rational(w) for w in self.weights)
        epsilon = parse_rational(self.epsilon)
        names = tuple(self.names) or tuple(f"S{i + 1}" for i in range(len(classes)))

        if not classes:
            raise InputError("A polarization needs at least one curve")
        if len(weights) != len(classes) or len(names) != len(classes):
            raise InputError(f"{len(weights)} weights for {len(classes)} curves")
        if any(len(c) != self.model.rank for c in classes):
            raise InputError(f"Curve classes must have length {self.model.rank}")
        if any(w < 0 for w in weights):
            raise InputError("Weights must be nonnegative")
        if epsilon < 0:
            raise InputError("epsilon must be nonnegative")

        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "epsilon", epsilon)
        object.__setattr__(self, "names", names)

        total = combine(weights, classes)
        if total != self.model.omega_class:
            logger.error(f"Weighted class sum {total.format()} differs from [w]")
            raise InvariantViolation(
                f"identity sum a_i PD(S_i) = [w] fails: got {total.format()}, "
                f"expected {self.model.omega_class.format()}"
            )
        for i in range(len(classes)):
            for j in range(i + 1, len(classes)):
                if self.intersection(i, j) < 0:
                    raise InvariantViolation(
                        f"mutual intersection {names[i]}.{names[j]} = {self.intersection(i, j)} is negative"
                    )

    @classmethod
    def from_curves(
        cls,
        model: LatticeModel,
        names: Sequence[str],
        weights: Sequence[RationalLike],
        epsilon: RationalLike = 0
    ) -> "Polarization":
        return cls(
            model=model,
            classes=tuple(model.curve(name) for name in names),
            weights=tuple(weights),
            epsilon=epsilon,
            names=tuple(names),
        )

    @property
    def size(self) -> int:
        return len(self.classes)

    def intersection(self, i: int, j: int) -> Fraction:
        return self.model.pair(self.classes[i], self.classes[j])

    @property
    def areas(self) -> Tuple[Fraction, ...]:
        return tuple(omega_area(self.model, c) for c in self.classes)

    def cross_term(self, i: int) -> Fraction:
        """sum_{j != i} a_j S_i.S_j"""
        return sum(
            (self.weights[j] * self.intersection(i, j) for j in range(self.size) if j != i),
            Fraction(0)
        )


@dataclass(frozen=True)
class GammaCoefficients:
    gammas: Tuple[Fraction, ...]
    tau_areas: Tuple[Fraction, ...]


@dataclass(frozen=True)
class CurveAreaSplit:
    shrunk_areas: Tuple[Fraction, ...]
    inner_areas: Tuple[Fraction, ...]
    plumbing_masses: Tuple[Tuple[Fraction, ...], ...]
    epsilon_prime: Fraction


@dataclass(frozen=True)
class PackingReport:
    ellipsoids: Tuple[Ellipsoid, ...]
    piece_volumes: Tuple[Fraction, ...]
    total_volume: Fraction
    manifold_volume: Fraction
    residual: Fraction
    labels: Tuple[str, ...] = ()

    @property
    def widths(self) -> Tuple[Fraction, ...]:
        return tuple(e.width for e in self.ellipsoids)


def ellipsoid_parameters(p: Polarization) -> List[Ellipsoid]:
    """Pieces E(A_i - eps, a_i)"""
    pieces = []
    for name, area, weight in zip(p.names, p.areas, p.weights):
        base = area - p.epsilon
        if base <= 0:
            raise DegeneratePieceError(f"piece {name} degenerates: A - eps = {base} <= 0")
        if base <= weight:
            logger.warning(f"Piece {name}: base capacity {base} does not exceed fiber capacity {weight}")
        pieces.append(Ellipsoid(base, weight))
    return pieces


def gamma_coefficients(p: Polarization) -> GammaCoefficients:
    """gamma_i = a_i S_i.S_i / (a_i S_i.S_i + (1 - eps) sum_{j != i} a_j S_i.S_j)"""
    gammas, tau_areas = [], []
    for i in range(p.size):
        self_term = p.weights[i] * p.intersection(i, i)
        tau_area = self_term + (1 - p.epsilon) * p.cross_term(i)
        tau_areas.append(tau_area)

        if p.intersection(i, i) == 0:
            gammas.append(Fraction(0))
            continue
        if p.weights[i] == 0:
            raise DegeneratePolarizationError(
                f"curve {p.names[i]} has nonzero self-intersection but zero weight"
            )
        if tau_area == 0:
            raise DegeneratePolarizationError(f"tau area of curve {p.names[i]} vanishes")
        gammas.append(self_term / tau_area)
    return GammaCoefficients(gammas=tuple(gammas), tau_areas=tuple(tau_areas))


def curve_area_split(p: Polarization) -> CurveAreaSplit:
    """Areas left to tau_i at margins eps and eps' = eps/2, and the plumbing masses"""
    epsilon_prime = p.epsilon / 2
    shrunk, inner, masses = [], [], []
    for i in range(p.size):
        self_term = p.weights[i] * p.intersection(i, i)
        shrunk.append(self_term + (1 - p.epsilon) * p.cross_term(i))
        inner.append(self_term + (1 - epsilon_prime) * p.cross_term(i))
        masses.append(tuple(
            p.epsilon * p.weights[j] * p.intersection(i, j) if j != i else Fraction(0)
            for j in range(p.size)
        ))
    return CurveAreaSplit(
        shrunk_areas=tuple(shrunk),
        inner_areas=tuple(inner),
        plumbing_masses=tuple(masses),
        epsilon_prime=epsilon_prime,
    )


def _report(pieces: Sequence[Ellipsoid], manifold_volume: Fraction, labels: Sequence[str]) -> PackingReport:
    volumes = tuple(e.volume for e in pieces)
    total = sum(volumes, Fraction(0))
    return PackingReport(
        ellipsoids=tuple(pieces),
        piece_volumes=volumes,
        total_volume=total,
        manifold_volume=manifold_volume,
        residual=manifold_volume - total,
        labels=tuple(labels),
    )


def packing_report(p: Polarization) -> PackingReport:
    """Exact volume ledger of the ellipsoid packing"""
    report = _report(ellipsoid_parameters(p), symplectic_volume(p.model), p.names)

    expected = p.epsilon / 2 * sum(p.weights, Fraction(0))
    if report.residual != expected:
        logger.error(f"Packing ledger mismatch: residual {report.residual}, expected {expected}")
        raise InvariantViolation(
            f"packing ledger fails: residual {report.residual} != (eps/2) sum a_i = {expected}"
        )
    logger.info(f"Packed volume {report.total_volume} of {report.manifold_volume}")
    return report


def blowdown_report(p: Polarization, ball_capacities: Sequence[RationalLike]) -> PackingReport:
    """Ledger after blowing the exceptional curves back down into balls B(mu)"""
    balls = [Ellipsoid.ball(mu) for mu in ball_capacities]
    if any(b.a <= 0 for b in balls):
        raise InputError("Ball capacities must be positive")
    pieces = ellipsoid_parameters(p) + balls
    labels = list(p.names) + [f"B({b.a})" for b in balls]
    volume = symplectic_volume(p.model) + sum((b.volume for b in balls), Fraction(0))
    report = _report(pieces, volume, labels)

    expected = p.epsilon / 2 * sum(p.weights, Fraction(0))
    if report.residual != expected:
        raise InvariantViolation(
            f"blow-down ledger fails: residual {report.residual} != (eps/2) sum a_i = {expected}"
        )
    return report


@dataclass(frozen=True)
class EmbeddingCheck:
    source: Ellipsoid
    target: Ellipsoid

    @property
    def volume_ok(self) -> bool:
        return self.source.volume <= self.target.volume

    @property
    def width_ok(self) -> bool:
        return self.source.width <= self.target.width

    @property
    def full(self) -> bool:
        return self.source.volume == self.target.volume


def embedding_check(source: Ellipsoid, target: Ellipsoid) -> EmbeddingCheck:
    """Volume and Gromov width necessary conditions for source -> target"""
    return EmbeddingCheck(source=source, target=target)


def smooth_polarization(m: LatticeModel, curve: str, degree: int) -> Polarization:
    """Single curve with [w] = PD(S)/degree"""
    if isinstance(degree, bool) or not isinstance(degree, int) or degree < 1:
        raise InputError(f"Degree must be a positive integer, got {degree!r}")
    return Polarization.from_curves(m, [curve], [Fraction(1, degree)])


def split_ellipsoid(piece: Ellipsoid, capacities: Sequence[RationalLike], axis: str = "base") -> List[Ellipsoid]:
    """Split E(a, b) along one axis into pieces whose capacities add up"""
    capacities = [parse_rational(c) for c in capacities]
    if not capacities or any(c <= 0 for c in capacities):
        raise InputError("Split capacities must be positive")
    if axis == "base":
        if sum(capacities) != piece.a:
            raise InvariantViolation(f"base capacities add to {sum(capacities)}, not {piece.a}")
        return [Ellipsoid(c, piece.b) for c in capacities]
    if axis == "fiber":
        if sum(capacities) != piece.b:
            raise InvariantViolation(f"fiber capacities add to {sum(capacities)}, not {piece.b}")
        return [Ellipsoid(piece.a, c) for c in capacities]
    raise InputError(f"axis must be 'base' or 'fiber', got {axis!r}")


@dataclass(frozen=True)
class PeriodVerdict:
    passed: bool
    witness: Optional[Vector]
    note: str


def _normalize(vector: Sequence[Fraction]) -> Vector:
    for x in vector:
        if x != 0:
            return tuple(v if x > 0 else -v for v in vector)
    return tuple(vector)


def period_obstruction(f: Sequence[RationalLike], classes: Sequence[ClassLike]) -> PeriodVerdict:
    """Does sum f_i PD(S_i) = 0 force f = 0 for these classes?"""
    if len(f) != len(classes):
        raise InputError(f"{len(f)} periods for {len(classes)} classes")
    f = tuple(parse_rational(x) for x in f)
    if all(x == 0 for x in f):
        return PeriodVerdict(passed=True, witness=None, note="periods vanish")

    relations = class_relations(classes)
    if not relations:
        if combine(f, classes).is_zero():
            raise InvariantViolation("nonzero relation among independent classes")
        return PeriodVerdict(passed=True, witness=None, note="no relation consumed")

    if combine(f, classes).is_zero():
        return PeriodVerdict(passed=False, witness=f, note="periods form a relation among the classes")
    return PeriodVerdict(passed=False, witness=_normalize(relations[0]), note="classes are dependent")


@dataclass(frozen=True)
class FiberPeriods:
    periods: Tuple[Fraction, ...]
    cycle_defects: Tuple[Fraction, ...]


def fiber_period_defects(
    model: LatticeModel,
    classes: Sequence[ClassLike],
    weights: Sequence[RationalLike],
    fiber_limits: Sequence[RationalLike]
) -> FiberPeriods:
    """f_i = lim beta(small loop around S_i) - a_i, and the cycle-wise area defects"""
    if not len(classes) == len(weights) == len(fiber_limits):
        raise InputError("classes, weights and fiber limits must have equal length")
    weights = [parse_rational(w) for w in weights]
    limits = [parse_rational(x) for x in fiber_limits]
    periods = tuple(lim - a for lim, a in zip(limits, weights))

    defects = []
    for k in range(model.rank):
        cycle = tuple(1 if i == k else 0 for i in range(model.rank))
        area = omega_area(model, cycle)
        flux = sum((lim * model.pair(c, cycle) for lim, c in zip(limits, classes)), Fraction(0))
        defects.append(area - flux)
    return FiberPeriods(periods=periods, cycle_defects=tuple(defects))


@dataclass(frozen=True)
class PeriodCorrection:
    theta_periods: Tuple[Fraction, ...]
    residual_fiber_periods: Tuple[Fraction, ...]
    residual_loop_periods: Tuple[Fraction, ...]
    verdict: PeriodVerdict

    @property
    def exact(self) -> bool:
        return all(x == 0 for x in self.residual_fiber_periods + self.residual_loop_periods)


def period_correction(
    fiber_periods: Sequence[RationalLike],
    loop_periods: Sequence[RationalLike],
    classes: Sequence[ClassLike]
) -> PeriodCorrection:
    """Pick the closed correction forms so that beta - lambda_theta has no periods.

    The correction is pulled back from the curves, so it absorbs the periods
    on lifted base loops and leaves the small fiber loops untouched.
    """
    fiber = tuple(parse_rational(x) for x in fiber_periods)
    loops = tuple(parse_rational(x) for x in loop_periods)
    verdict = period_obstruction(fiber, classes)
    theta = loops
    residual_loops = tuple(x - t for x, t in zip(loops, theta))
    return PeriodCorrection(
        theta_periods=theta,
        residual_fiber_periods=fiber,
        residual_loop_periods=residual_loops,
        verdict=verdict,
    )


def cohomology_identity(m: LatticeModel, weights: Sequence[RationalLike], classes: Sequence[ClassLike]) -> bool:
    """Exact check of [w] = sum a_i PD(S_i)"""
    return combine(weights, classes) == m.omega_class
