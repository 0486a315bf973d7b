import argparse
import json
import sys
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ValidationError

from singpack.core.config import get_settings
from singpack.core.exceptions import InputError, InvariantViolation, SingpackError
from singpack.core.logging_config import get_logger, setup_logging
from singpack.schemas.manifold import ManifoldSpec, PackingSpec
from singpack.schemas.reports import (
    BasinOut,
    BubbleResponse,
    CheckOut,
    ClassificationOut,
    DecomposeResponse,
    EllipsoidOut,
    FlowResponse,
    PackResponse,
    PolytopeOut,
    ToricResponse,
    VerifyResponse,
)
from singpack.services import localmodel as lm
from singpack.services.bubbling import BlowupClass, Verdict, enumerate_decompositions
from singpack.services.decompose import synthesize_polarization
from singpack.services.lattice import format_rational, parse_rational
from singpack.services.packing import (
    Polarization,
    blowdown_report,
    curve_area_split,
    gamma_coefficients,
    packing_report,
)
from singpack.services.svg import render_svg
from singpack.services.toric import (
    ToricField,
    basin_areas,
    build_polytope,
    cubic_pipeline,
    polytope_area,
    product_field_classify,
)
from singpack.services.verification import VerificationSuite

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_INPUT = 2


def _rationals(text: str) -> List[Fraction]:
    return [parse_rational(x) for x in text.split(",") if x.strip()]


def _floats(text: str, n: int) -> List[float]:
    values = [float(parse_rational(x)) for x in text.split(",")]
    if len(values) != n:
        raise InputError(f"Expected {n} comma-separated values, got {text!r}")
    return values


def _pair(text: str, flag: str) -> List[Fraction]:
    values = _rationals(text)
    if len(values) != 2:
        raise InputError(f"{flag} expects two comma-separated rationals, got {text!r}")
    return values


def _chop_cut(text: str) -> Tuple[int, Fraction]:
    """'corner:mu' -> (corner, mu)"""
    corner, sep, mu = text.partition(":")
    if not sep:
        raise InputError(f"--chop expects corner:mu, got {text!r}")
    try:
        index = int(corner)
    except ValueError as e:
        raise InputError(f"--chop corner must be an integer, got {corner!r}") from e
    return index, parse_rational(mu)


def _strings(values) -> List[str]:
    return [format_rational(x) for x in values]


def _load(path: str, schema):
    with open(path, encoding="utf-8") as handle:
        return schema.model_validate(json.load(handle))


def _emit(response: BaseModel):
    sys.stdout.write(json.dumps(response.model_dump(), sort_keys=True, indent=2) + "\n")


def cmd_decompose(args, settings) -> int:
    model = _load(args.manifold, ManifoldSpec).to_model()
    sketch = synthesize_polarization(model, args.grid)
    _emit(DecomposeResponse(
        grid_denominator=args.grid,
        epsilon=format_rational(sketch.epsilon),
        max_distance=format_rational(sketch.max_distance),
        classes=[c.format() for c in sketch.classes],
        weights=_strings(sketch.weights),
        clearing_factors=list(sketch.clearing_factors),
        intersections=[_strings(row) for row in sketch.intersections],
        positive_intersections=sketch.mutual_intersections_nonnegative,
        eliminations=sketch.eliminations,
        identity_holds=sketch.total() == model.omega_class,
        omega=_strings(model.omega),
    ))
    return EXIT_OK


def cmd_pack(args, settings) -> int:
    spec = _load(args.manifold, PackingSpec)
    model = spec.to_model()
    names = args.curves.split(",") if args.curves else (spec.use_curves or model.curve_names)
    weights = _rationals(args.weights) if args.weights else spec.weights
    if weights is None:
        raise InputError("No weights given on the command line or in the manifold file")
    epsilon = parse_rational(args.epsilon) if args.epsilon is not None else parse_rational(spec.epsilon or 0)
    balls = [parse_rational(b) for b in args.ball] if args.ball else [parse_rational(b) for b in spec.balls or []]

    polarization = Polarization.from_curves(model, names, weights, epsilon)
    report = blowdown_report(polarization, balls) if balls else packing_report(polarization)
    gammas = gamma_coefficients(polarization)
    split = curve_area_split(polarization)
    _emit(PackResponse(
        epsilon=format_rational(epsilon),
        pieces=[
            EllipsoidOut(label=label, a=str(e.a), b=str(e.b), volume=str(v))
            for label, e, v in zip(report.labels, report.ellipsoids, report.piece_volumes)
        ],
        total_volume=format_rational(report.total_volume),
        manifold_volume=format_rational(report.manifold_volume),
        residual=format_rational(report.residual),
        expected_residual=format_rational(epsilon / 2 * sum(polarization.weights, Fraction(0))),
        gammas=_strings(gammas.gammas),
        tau_areas=_strings(gammas.tau_areas),
        shrunk_areas=_strings(split.shrunk_areas),
        inner_areas=_strings(split.inner_areas),
        blown_down=bool(balls),
    ))
    return EXIT_OK


def cmd_flow(args, settings) -> int:
    chart = lm.DiscBundleChart.from_rationals(args.a, args.gamma, args.A, args.delta)
    point = np.array(_floats(args.point, 4))
    forms = lm.forms_at(chart, point)
    image = lm.phi_map(chart, point)
    flowed = lm.flow_closed_form(chart, image, args.time)
    flowed_rk4 = lm.flow_rk4(chart, image, args.time, settings.RK4_STEP)
    defect = float(np.max(np.abs(flowed - flowed_rk4)))
    if defect > settings.FLOW_TOLERANCE:
        raise InvariantViolation(f"closed-form flow and RK4 differ by {defect!r}")

    basin = None
    if 0 <= chart.gamma < 1:
        verdict = lm.basin_membership(chart, image)
        basin = BasinOut(
            analytic=verdict.analytic,
            dynamic=verdict.dynamic,
            inside=verdict.inside,
            level=verdict.level,
            reaches_zero_section=verdict.reaches_zero_section,
        )

    _emit(FlowResponse(
        chart={"a": args.a, "gamma": args.gamma, "A": args.A, "delta": args.delta},
        point=point.tolist(),
        omega=forms.omega.tolist(),
        liouville_form=forms.lam.tolist(),
        connection_form=forms.alpha.tolist(),
        liouville_field=lm.liouville_field(chart, point).tolist(),
        outward_margin=float(lm.outward_margin(chart, point)),
        image=image.tolist(),
        pushed_field=lm.pushed_field(chart, image).tolist(),
        time=args.time,
        flowed=flowed.tolist(),
        flowed_rk4=flowed_rk4.tolist(),
        flow_defect=defect,
        flow_tolerance=settings.FLOW_TOLERANCE,
        basin=basin,
    ))
    return EXIT_OK


def cmd_verify(args, settings) -> int:
    suite = VerificationSuite(
        samples=args.samples,
        seed=settings.SEED,
        monte_carlo_samples=args.mc_samples,
        config=settings,
    )
    result = suite.run()
    payload = result.to_dict()
    _emit(VerifyResponse(
        passed=result.passed,
        samples=suite.samples,
        seed=suite.seed,
        checks=[CheckOut(**row) for row in payload["checks"]],
        max_defects=result.max_defects(),
    ))
    if not result.passed:
        failing = ", ".join(sorted(set(result.failures["check"])))
        sys.stderr.write(f"verification failed: {failing}\n")
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_toric(args, settings) -> int:
    field = None
    shaded = []
    response = {"mode": args.mode}

    if args.mode == "product":
        field = ToricField(1, parse_rational(args.mu))
        polytope = field.rectangle()
        response["basin_areas"] = _strings(basin_areas(field))
        if args.point:
            point = _pair(args.point, "--point")
            c = product_field_classify(field, point)
            response["classification"] = ClassificationOut(
                point=_strings(point), label=c.label.value, analytic=c.analytic.value,
                integrated=c.integrated.value,
            )
    elif args.mode == "cubic":
        report = cubic_pipeline(parse_rational(args.mu))
        polytope = report.polytope
        shaded = [build_polytope("ellipsoid_triangle", {"a": report.mu, "b": report.mu})]
        response["cubic"] = report.to_dict()
    else:
        sizes = _pair(args.size, "--size")
        if args.kind == "rectangle":
            polytope = build_polytope("rectangle", {"w": sizes[0], "h": sizes[1]})
        else:
            polytope = build_polytope("ellipsoid_triangle", {"a": sizes[0], "b": sizes[1]})
        for cut in args.chop or []:
            corner, mu = _chop_cut(cut)
            polytope = build_polytope("chop", {"polytope": polytope, "corner": corner, "mu": mu})

    response["polytope"] = PolytopeOut(vertices=polytope.format(), area=format_rational(polytope_area(polytope)))
    if args.svg:
        figure = render_svg(polytope, field=field, shaded=shaded, width=settings.SVG_WIDTH)
        figure.write(args.svg)
        logger.info(f"Wrote {args.svg} at {figure.scale} px per unit")
        response["svg_path"] = args.svg
        response["svg_scale"] = format_rational(figure.scale)
    _emit(ToricResponse(**response))
    return EXIT_OK


def cmd_bubble(args, settings) -> int:
    target = BlowupClass.parse(args.target)
    found = enumerate_decompositions(target, args.max_parts, filters=args.filters)
    survivors = None
    if args.filters:
        survivors = sum(1 for d in found if d.verdicts.verdict == Verdict.SURVIVES)
    _emit(BubbleResponse(
        target=target.format(),
        max_parts=args.max_parts,
        count=len(found),
        survivors=survivors,
        decompositions=[d.to_dict() for d in found],
    ))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="singpack", description="Singular polarizations and ellipsoid packings")
    parser.add_argument("--log-level", default=None, help="loguru level for stderr diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="synthesize a singular polarization from [w]")
    p.add_argument("manifold")
    p.add_argument("--grid", type=int, default=10, help="grid denominator q")
    p.set_defaults(handler=cmd_decompose)

    p = sub.add_parser("pack", help="exact ellipsoid packing ledger")
    p.add_argument("manifold")
    p.add_argument("--weights", help="comma-separated rationals a_i")
    p.add_argument("--epsilon", help="shrinkage epsilon")
    p.add_argument("--curves", help="comma-separated curve names (default: all)")
    p.add_argument("--ball", action="append", help="capacity of a blown-down ball (repeatable)")
    p.set_defaults(handler=cmd_pack)

    p = sub.add_parser("flow", help="evaluate the local model at a chart point")
    p.add_argument("--a", required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--A", required=True)
    p.add_argument("--delta", default="0")
    p.add_argument("--point", required=True, help="P,zeta,R,theta")
    p.add_argument("--t", "--time", dest="time", type=float, default=1.0, help="flow time")
    p.set_defaults(handler=cmd_flow)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--mc-samples", type=int, default=None)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("toric", help="moment polytope pictures")
    p.add_argument("mode", choices=["product", "cubic", "polytope"])
    p.add_argument("--mu", default="7/10")
    p.add_argument("--point", help="R1,R2 to classify (product mode)")
    p.add_argument("--kind", choices=["rectangle", "ellipsoid_triangle"], default="ellipsoid_triangle")
    p.add_argument("--size", default="1,1")
    p.add_argument("--chop", action="append", help="corner:mu (repeatable)")
    p.add_argument("--svg", help="write an SVG figure to this path")
    p.set_defaults(handler=cmd_toric)

    p = sub.add_parser("bubble", help="enumerate bubbling decompositions")
    p.add_argument("--target", required=True, help="k,l1[,l2...] for kL - sum l_j E_j")
    p.add_argument("--max-parts", type=int, default=3)
    p.add_argument("--filters", action="store_true")
    p.set_defaults(handler=cmd_bubble)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse, dispatch and map failures to exit codes (0 ok, 1 invariant, 2 input)"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INPUT

    settings = get_settings()
    setup_logging(args.log_level or settings.LOG_LEVEL)

    try:
        return args.handler(args, settings)
    except InvariantViolation as e:
        logger.error(f"Invariant violation in {args.command}: {e}")
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INVARIANT
    except (InputError, ValidationError, json.JSONDecodeError, OSError) as e:
        logger.error(f"Bad input to {args.command}: {e}")
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INPUT
    except SingpackError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INPUT


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
