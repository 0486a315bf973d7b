from typing import List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from singpack.services.lattice import LatticeModel, format_rational, parse_rational

RationalInput = Union[int, float, str]


def _rational_string(value: RationalInput) -> str:
    if isinstance(value, float):
        # JSON decimals are taken at face value, never as binary floats
        value = repr(value)
    return format_rational(parse_rational(value))


class CurveSpec(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    name: str
    class_: List[int] = Field(alias="class")


class ManifoldSpec(BaseModel):
    """Manifold JSON: basis, intersection matrix, [w] and named curves"""
    basis: List[str]
    intersection: List[List[int]]
    omega: List[str]
    curves: List[CurveSpec] = []

    @field_validator("omega", mode="before")
    @classmethod
    def parse_omega(cls, v):
        if not isinstance(v, list):
            raise ValueError("omega must be a list of rationals")
        return [_rational_string(x) for x in v]

    @model_validator(mode="after")
    def check_shapes(self):
        n = len(self.basis)
        if n == 0:
            raise ValueError("basis must not be empty")
        if len(self.intersection) != n or any(len(row) != n for row in self.intersection):
            raise ValueError(f"intersection must be a {n}x{n} matrix")
        if any(self.intersection[i][j] != self.intersection[j][i] for i in range(n) for j in range(n)):
            raise ValueError("intersection must be symmetric")
        if len(self.omega) != n:
            raise ValueError(f"omega must have {n} entries")
        for curve in self.curves:
            if len(curve.class_) != n:
                raise ValueError(f"curve {curve.name!r} must have {n} entries")
        return self

    def to_model(self) -> LatticeModel:
        return LatticeModel(
            basis_names=tuple(self.basis),
            intersection=tuple(tuple(row) for row in self.intersection),
            omega=tuple(parse_rational(x) for x in self.omega),
            curves=tuple((c.name, tuple(c.class_)) for c in self.curves),
        )


class PackingSpec(ManifoldSpec):
    """Manifold JSON with optional polarization data for `pack`"""
    weights: Optional[List[str]] = None
    epsilon: Optional[str] = None
    use_curves: Optional[List[str]] = Field(default=None, alias="use")
    balls: Optional[List[str]] = None

    @field_validator("weights", "balls", mode="before")
    @classmethod
    def parse_rational_list(cls, v):
        if v is None:
            return v
        return [_rational_string(x) for x in v]

    @field_validator("epsilon", mode="before")
    @classmethod
    def parse_epsilon(cls, v):
        return None if v is None else _rational_string(v)
