"""Response models for the CLI. Exact values are rational strings; floating
values carry the tolerance they were checked against.
"""
from typing import Dict, List, Optional

from pydantic import BaseModel


class EllipsoidOut(BaseModel):
    label: str
    a: str
    b: str
    volume: str


class DecomposeResponse(BaseModel):
    grid_denominator: int
    epsilon: str
    max_distance: str
    classes: List[List[str]]
    weights: List[str]
    clearing_factors: List[int]
    intersections: List[List[str]]
    positive_intersections: bool
    eliminations: int
    identity_holds: bool
    omega: List[str]


class PackResponse(BaseModel):
    epsilon: str
    pieces: List[EllipsoidOut]
    total_volume: str
    manifold_volume: str
    residual: str
    expected_residual: str
    gammas: List[str]
    tau_areas: List[str]
    shrunk_areas: List[str]
    inner_areas: List[str]
    blown_down: bool = False


class BasinOut(BaseModel):
    analytic: bool
    dynamic: bool
    inside: bool
    level: float
    reaches_zero_section: bool


class FlowResponse(BaseModel):
    chart: Dict[str, str]
    point: List[float]
    omega: List[List[float]]
    liouville_form: List[float]
    connection_form: List[float]
    liouville_field: List[float]
    outward_margin: float
    image: List[float]
    pushed_field: List[float]
    time: float
    flowed: List[float]
    flowed_rk4: List[float]
    flow_defect: float
    flow_tolerance: float
    basin: Optional[BasinOut] = None


class CheckOut(BaseModel):
    check: str
    params: str
    value: str
    tolerance: str
    passed: bool


class VerifyResponse(BaseModel):
    passed: bool
    samples: int
    seed: int
    checks: List[CheckOut]
    max_defects: Dict[str, float]


class PolytopeOut(BaseModel):
    vertices: List[List[str]]
    area: str


class ClassificationOut(BaseModel):
    point: List[str]
    label: str
    analytic: str
    integrated: str


class ToricResponse(BaseModel):
    mode: str
    polytope: PolytopeOut
    basin_areas: Optional[List[str]] = None
    classification: Optional[ClassificationOut] = None
    cubic: Optional[Dict[str, object]] = None
    svg_path: Optional[str] = None
    svg_scale: Optional[str] = None


class BubbleResponse(BaseModel):
    target: str
    max_parts: int
    count: int
    survivors: Optional[int] = None
    decompositions: List[Dict[str, object]]
