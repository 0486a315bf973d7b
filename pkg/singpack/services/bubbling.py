"""Candidate bubbling decompositions of a class kL - sum l_j E_j in a blow-up
of the plane, with coarse adjunction and genericity filters.
"""
import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Generator, List, Mapping, Optional, Sequence, Tuple

from singpack.core.exceptions import InputError
from singpack.core.logging_config import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True, order=True)
class BlowupClass:
    """k L - sum_j l_j E_j"""
    k: int
    l: Tuple[int, ...] = ()

    def __post_init__(self):
        if isinstance(self.k, bool) or not isinstance(self.k, int):
            raise InputError(f"Degree must be an integer, got {self.k!r}")
        l = tuple(self.l)
        if any(isinstance(x, bool) or not isinstance(x, int) for x in l):
            raise InputError(f"Multiplicities must be integers, got {l!r}")
        object.__setattr__(self, "l", l)

    @classmethod
    def parse(cls, text: str) -> "BlowupClass":
        """'3,2' -> 3L - 2E"""
        try:
            values = [int(x) for x in text.split(",")]
        except ValueError as e:
            raise InputError(f"Cannot parse class {text!r}: expected k,l1[,l2...]") from e
        return cls(values[0], tuple(values[1:]))

    def __add__(self, other: "BlowupClass") -> "BlowupClass":
        self._check(other)
        return BlowupClass(self.k + other.k, tuple(a + b for a, b in zip(self.l, other.l)))

    def __sub__(self, other: "BlowupClass") -> "BlowupClass":
        self._check(other)
        return BlowupClass(self.k - other.k, tuple(a - b for a, b in zip(self.l, other.l)))

    def _check(self, other: "BlowupClass"):
        if len(self.l) != len(other.l):
            raise InputError("Classes live in blow-ups at different numbers of points")

    def dot(self, other: "BlowupClass") -> int:
        self._check(other)
        return self.k * other.k - sum(a * b for a, b in zip(self.l, other.l))

    @property
    def genus(self) -> int:
        return genus(self)

    def is_zero(self) -> bool:
        return self.k == 0 and not any(self.l)

    def format(self) -> str:
        names = ["E"] if len(self.l) == 1 else [f"E{j + 1}" for j in range(len(self.l))]
        out = "" if self.k == 0 else ("L" if self.k == 1 else f"{self.k}L")
        for name, x in zip(names, self.l):
            if x == 0:
                continue
            term = name if abs(x) == 1 else f"{abs(x)}{name}"
            out += f"{'-' if x > 0 else '+'}{term}"
        return out.lstrip("+") or "0"


def genus(c: BlowupClass) -> int:
    """Adjunction genus (k-1)(k-2)/2 - sum l(l-1)/2"""
    return (c.k - 1) * (c.k - 2) // 2 - sum(x * (x - 1) // 2 for x in c.l)


@dataclass(frozen=True)
class DecompositionConstraints:
    nonnegative_multiplicities: bool = True
    pairwise_nonnegative: bool = True
    positive_degree: bool = True


@dataclass(frozen=True)
class GenericityRules:
    required_points: int = 6
    degree_caps: Mapping[int, int] = field(default_factory=lambda: {1: 2, 2: 5})
    multiplicity_weight: int = 1

    def cap(self, k: int) -> int:
        return self.degree_caps.get(k, 3 * k - 1)


class Verdict(str, Enum):
    ADJUNCTION_FAIL = "ADJUNCTION_FAIL"
    GENERICITY = "GENERICITY"
    SURVIVES = "SURVIVES"


@dataclass(frozen=True)
class FilterVerdicts:
    part_tags: Tuple[Tuple[Verdict, ...], ...]
    points_carried: int
    verdict: Verdict
    reasons: Tuple[str, ...]


@dataclass(frozen=True)
class ClassDecomposition:
    parts: Tuple[BlowupClass, ...]
    verdicts: Optional[FilterVerdicts] = None

    @property
    def total(self) -> BlowupClass:
        total = self.parts[0]
        for part in self.parts[1:]:
            total = total + part
        return total

    def to_dict(self) -> Dict[str, object]:
        out = {"parts": [part.format() for part in self.parts]}
        if self.verdicts is not None:
            out["verdict"] = self.verdicts.verdict.value
            out["part_tags"] = [[tag.value for tag in tags] for tags in self.verdicts.part_tags]
            out["points_carried"] = self.verdicts.points_carried
            out["reasons"] = list(self.verdicts.reasons)
        return out


def point_capacity(c: BlowupClass, rules: GenericityRules = GenericityRules()) -> int:
    """Generic points a curve in class c can still pass through"""
    return max(0, rules.cap(c.k) - rules.multiplicity_weight * sum(c.l))


def candidate_parts(target: BlowupClass, constraints: DecompositionConstraints) -> List[BlowupClass]:
    """Every possible part inside the bounding box, canonically sorted"""
    k_min = 1 if constraints.positive_degree else 0
    ranges = []
    for x in target.l:
        bound = max(x, 0) + 1
        ranges.append(range(0, bound + 1) if constraints.nonnegative_multiplicities else range(-bound, bound + 1))
    parts = []
    for k in range(k_min, max(target.k, 0) + 1):
        for l in itertools.product(*ranges):
            part = BlowupClass(k, tuple(l))
            if part.is_zero() or (k == 0 and any(x > 0 for x in l)):
                continue
            parts.append(part)
    return sorted(parts)


def _multisets(
    parts: Sequence[BlowupClass],
    remaining: BlowupClass,
    slots: int,
    start: int,
    chosen: Tuple[BlowupClass, ...],
    constraints: DecompositionConstraints
) -> Generator[Tuple[BlowupClass, ...], None, None]:
    if remaining.is_zero() and chosen:
        yield chosen
        return
    if slots == 0:
        return
    for i in range(start, len(parts)):
        part = parts[i]
        if part.k > remaining.k:
            break
        if constraints.pairwise_nonnegative and any(part.dot(other) < 0 for other in chosen):
            continue
        yield from _multisets(parts, remaining - part, slots - 1, i, chosen + (part,), constraints)


def enumerate_decompositions(
    target: BlowupClass,
    max_parts: int,
    constraints: DecompositionConstraints = DecompositionConstraints(),
    filters: bool = False,
    rules: GenericityRules = GenericityRules()
) -> List[ClassDecomposition]:
    """All multisets of 2..max_parts parts summing to target, in canonical order"""
    if max_parts < 2:
        raise InputError(f"max_parts must be at least 2, got {max_parts}")
    parts = candidate_parts(target, constraints)
    found = [
        ClassDecomposition(parts=multiset)
        for multiset in _multisets(parts, target, max_parts, 0, (), constraints)
        if len(multiset) >= 2
    ]
    logger.info(f"{len(found)} decompositions of {target.format()} into at most {max_parts} parts")
    if filters:
        found = [ClassDecomposition(d.parts, apply_filters(d, rules)) for d in found]
    return found


def apply_filters(d: ClassDecomposition, rules: GenericityRules = GenericityRules()) -> FilterVerdicts:
    part_tags, reasons = [], []
    for part in d.parts:
        if genus(part) < 0:
            part_tags.append((Verdict.ADJUNCTION_FAIL,))
            reasons.append(f"{part.format()} has genus {genus(part)}")
        else:
            part_tags.append(())

    carried = sum(point_capacity(part, rules) for part in d.parts)
    generic = carried >= rules.required_points
    if not generic:
        reasons.append(f"parts carry {carried} generic points, {rules.required_points} required")

    if any(part_tags):
        verdict = Verdict.ADJUNCTION_FAIL
    elif not generic:
        verdict = Verdict.GENERICITY
    else:
        verdict = Verdict.SURVIVES
    return FilterVerdicts(
        part_tags=tuple(part_tags),
        points_carried=carried,
        verdict=verdict,
        reasons=tuple(reasons),
    )
