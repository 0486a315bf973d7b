import xml.etree.ElementTree as ET
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

from singpack.core.config import settings
from singpack.services.toric import Polytope, ToricField, basin_triangles

FILLS = ("#9ecae1", "#fdae6b", "#a1d99b", "#bcbddc")
MARGIN = 20


@dataclass(frozen=True)
class SvgFigure:
    markup: str
    scale: Fraction
    width: int
    height: int

    def write(self, path: str):
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(self.markup)


# Return an SVG root element with the given pixel width and height.

def svgroot(w, h):
    return ET.Element("svg", xmlns="http://www.w3.org/2000/svg",
                             version="1.1",
                             width="{}px".format(w),
                             height="{}px".format(h),
                             viewBox="0 0 {} {}".format(w, h))


# Return an SVG path element that draws the closed polygon through the points.

def svglineloop(p, points, **attributes):
    if not points:
        return None
    d = "M{:.3f} {:.3f}".format(*points[0])
    for x, y in points[1:]:
        d += "L{:.3f} {:.3f}".format(x, y)
    return ET.SubElement(p, "path", d=d + "z", **attributes)


def render_svg(
    polytope: Polytope,
    field: Optional[ToricField] = None,
    shaded: Sequence[Polytope] = (),
    width: Optional[int] = None
) -> SvgFigure:
    """Moment polygon with optional separatrix, basin shading and extra regions.

    Rational coordinates are multiplied by `scale` pixels per unit; y grows up.
    """
    width = width or settings.SVG_WIDTH
    xs = [x for x, _ in polytope.vertices]
    ys = [y for _, y in polytope.vertices]
    extent = max(max(xs) - min(xs), max(ys) - min(ys))
    scale = Fraction(width - 2 * MARGIN) / extent
    height = int((max(ys) - min(ys)) * scale) + 2 * MARGIN
    x0, y1 = min(xs), max(ys)

    def to_pixels(vertices: Sequence[Tuple[Fraction, Fraction]]):
        return [(float((x - x0) * scale) + MARGIN, float((y1 - y) * scale) + MARGIN) for x, y in vertices]

    svg = svgroot(width, height)
    group = ET.SubElement(svg, "g")
    regions = list(shaded)
    if field is not None:
        regions = list(basin_triangles(field)) + regions
    for i, region in enumerate(regions):
        svglineloop(group, to_pixels(region.vertices), fill=FILLS[i % len(FILLS)], stroke="none")

    svglineloop(group, to_pixels(polytope.vertices), fill="none", stroke="black")
    if field is not None:
        (ax, ay), (bx, by) = to_pixels([(Fraction(0), Fraction(0)), (field.area1, field.area2)])
        ET.SubElement(group, "line", x1=f"{ax:.3f}", y1=f"{ay:.3f}", x2=f"{bx:.3f}", y2=f"{by:.3f}",
                      stroke="red")
        ET.SubElement(group, "desc").text = "separatrix R2 * {} = R1 * {}".format(field.area1, field.area2)
    ET.SubElement(svg, "title").text = "scale {} px per unit".format(scale)

    markup = ET.tostring(svg, encoding="unicode")
    return SvgFigure(markup=markup, scale=scale, width=width, height=height)
