import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from singpack.core.config import Settings, settings as default_settings
from singpack.core.logging_config import get_logger
from singpack.services import localmodel as lm
from singpack.services.lattice import product_spheres, projective_plane
from singpack.services.packing import (
    Ellipsoid,
    Polarization,
    ellipsoid_parameters,
    embedding_check,
    packing_report,
    smooth_polarization,
)
from singpack.services.toric import (
    ToricField,
    basin_areas,
    classify_batch,
    cubic_pipeline,
    separatrix_drift,
)

logger = get_logger(__name__)

CHART_GAMMAS = (-1.0, 0.0, 0.5)
CHART_WEIGHTS = (1 / 3, 1.0, 2.0)
BASIN_GAMMAS = (0.0, 0.5)
CUBIC_MUS = (Fraction(1, 3), Fraction(1, 2), Fraction(13, 20))
PRODUCT_MUS = (Fraction(7, 10), Fraction(707, 1000), Fraction(1, 1))


@dataclass
class VerificationResult:
    frame: pd.DataFrame

    @property
    def passed(self) -> bool:
        return bool(self.frame["passed"].all())

    @property
    def failures(self) -> pd.DataFrame:
        return self.frame[~self.frame["passed"]]

    def max_defects(self) -> Dict[str, float]:
        return {k: float(v) for k, v in self.frame.groupby("check")["value"].max().items()}

    def to_dict(self) -> Dict[str, Any]:
        rows = []
        for row in self.frame.itertuples(index=False):
            rows.append({
                "check": row.check,
                "params": row.params,
                "value": repr(float(row.value)),
                "tolerance": repr(float(row.tolerance)),
                "passed": bool(row.passed),
            })
        return {"passed": self.passed, "checks": rows}


class VerificationSuite:
    """Invariant checks behind `singpack verify`"""

    def __init__(
        self,
        samples: Optional[int] = None,
        seed: Optional[int] = None,
        monte_carlo_samples: Optional[int] = None,
        config: Settings = default_settings
    ):
        self.config = config
        self.samples = samples or config.VERIFY_SAMPLES
        self.seed = config.SEED if seed is None else seed
        self.monte_carlo_samples = monte_carlo_samples or config.MONTE_CARLO_SAMPLES
        self.rows: List[Dict[str, Any]] = []

    def _record(self, check: str, params: str, value: float, tolerance: float, passed: Optional[bool] = None):
        if passed is None:
            passed = value <= tolerance
        if not passed:
            logger.warning(f"{check} [{params}] failed: {value!r} > {tolerance!r}")
        self.rows.append({
            "check": check,
            "params": params,
            "value": float(value),
            "tolerance": float(tolerance),
            "passed": bool(passed),
        })

    def check_chart_identities(self):
        c = self.config
        margin = 10 * max(c.EXACTNESS_STEP, c.PULLBACK_STEP)
        for gamma, a in itertools.product(CHART_GAMMAS, CHART_WEIGHTS):
            chart = lm.DiscBundleChart(a=a, gamma=gamma, A=1.0)
            points = lm.quasi_random_points(chart, self.samples, self.seed, margin=margin)
            params = f"gamma={gamma:g} a={a:.6g}"
            self._record("liouville", params, lm.liouville_defect(chart, points), c.LIOUVILLE_TOLERANCE)
            self._record("exactness", params,
                         lm.exterior_derivative_defect(chart, points, c.EXACTNESS_STEP), c.EXACTNESS_TOLERANCE)
            self._record("pullback", params,
                         lm.pullback_defect(chart, points, c.PULLBACK_STEP), c.PULLBACK_TOLERANCE)
            margin_min = float(np.min(lm.outward_margin(chart, points)))
            self._record("outward", params, -margin_min, 0.0, passed=margin_min > 0)

    def check_flow(self):
        chart = lm.DiscBundleChart(a=2.0, gamma=0.5, A=1.0)
        rng = np.random.default_rng(self.seed)
        n = min(self.samples, 1000)
        y = np.zeros((n, 4))
        y[:, lm.P] = rng.uniform(0, 1, n)
        y[:, lm.R] = rng.uniform(0, 2, n)
        closed = lm.flow_closed_form(chart, y, 1.0)
        integrated = lm.flow_rk4(chart, y, 1.0, self.config.RK4_STEP)
        self._record("flow", "t=1", float(np.max(np.abs(closed - integrated))), self.config.FLOW_TOLERANCE)

    def check_basins(self):
        rng = np.random.default_rng(self.seed + 1)
        for gamma, a in itertools.product(BASIN_GAMMAS, CHART_WEIGHTS):
            chart = lm.DiscBundleChart(a=a, gamma=gamma, A=1.0, delta=0.1)
            y = np.zeros((self.samples, 4))
            y[:, lm.P] = rng.uniform(0, 1.5 * chart.base_area, self.samples)
            y[:, lm.R] = rng.uniform(0, 1.5 * a, self.samples)
            routes = lm.basin_routes(chart, y)
            clear = np.abs(routes.level - 1) > self.config.BASIN_MARGIN
            disagreements = int(np.count_nonzero(routes.analytic[clear] != routes.dynamic[clear]))
            self._record("basin_agreement", f"gamma={gamma:g} a={a:.6g}", disagreements, 0)

        chart = lm.DiscBundleChart(a=1.0, gamma=0.5, A=1.0, delta=0.1)
        volume = lm.basin_volume_monte_carlo(chart, self.monte_carlo_samples, np.random.default_rng(self.seed))
        self._record("basin_volume", f"samples={volume.samples}", volume.relative_error,
                     self.config.VOLUME_RELATIVE_TOLERANCE)

    def check_plumbing(self):
        chart = lm.PlumbingChart(a_i=1.0, a_j=0.5, epsilon=0.2)
        rng = np.random.default_rng(self.seed + 2)
        x = rng.uniform(0, 1, (min(self.samples, 1000), 4))
        x[:, [0, 2]] *= chart.epsilon / 2
        self._record("gluing", "R <= eps/2", lm.gluing_defect(chart, x), self.config.LIOUVILLE_TOLERANCE)

    def check_toric(self):
        c = self.config
        for mu in PRODUCT_MUS:
            field = ToricField(1, mu)
            self._record("separatrix_drift", f"mu={mu}", separatrix_drift(field), c.SEPARATRIX_TOLERANCE)

            first, second = basin_areas(field)
            self._record("basin_areas", f"mu={mu}", float(abs(first + second - mu)), 0.0)

            rng = np.random.default_rng(self.seed + 3)
            n = min(self.samples, 2000)
            points = rng.uniform(0.01, 0.99, (n, 2)) * field.corner
            sign = points[:, 1] * float(field.area1) - points[:, 0] * float(field.area2)
            clear = np.abs(sign) > c.CLASSIFY_MARGIN
            analytic = np.where(sign < 0, "sigma1", "sigma2")
            labels = classify_batch(field, points[clear])
            disagreements = int(np.count_nonzero(labels != analytic[clear]))
            self._record("classify_agreement", f"mu={mu}", disagreements, 0)

    def check_exact_ledgers(self):
        for mu in CUBIC_MUS:
            report = cubic_pipeline(mu)
            self._record("cubic_ledger", f"mu={mu}", float(abs(report.total - Fraction(1, 2))), 0.0)
        for mu in PRODUCT_MUS:
            p = Polarization.from_curves(product_spheres(mu), ["S1", "S2"], [mu, 1])
            self._record("product_ledger", f"mu={mu}", float(abs(packing_report(p).residual)), 0.0)

        conic = ellipsoid_parameters(smooth_polarization(projective_plane(), "conic", 2))[0]
        check = embedding_check(conic, Ellipsoid.ball(1))
        self._record("conic_into_ball", f"E({conic.a},{conic.b}) -> B(1)", 0.0, 0.0,
                     passed=check.full and check.width_ok)

    def run(self) -> VerificationResult:
        self.rows = []
        logger.info(f"Running verification suite with {self.samples} samples, seed {self.seed}")
        self.check_chart_identities()
        self.check_flow()
        self.check_basins()
        self.check_plumbing()
        self.check_toric()
        self.check_exact_ledgers()
        frame = pd.DataFrame(self.rows, columns=["check", "params", "value", "tolerance", "passed"])
        result = VerificationResult(frame=frame)
        logger.info(f"Verification {'passed' if result.passed else 'failed'}: {len(result.failures)} failing checks")
        return result
