"""Binary64 realization of the disc-bundle local model.

Chart coordinates are (P, zeta, R, theta) with P = rho^2 the base radius
squared and R = r^2 the fiber radius squared; angles live in R/Z. Every
evaluator accepts a single point or an array of points of shape (..., 4).

Gauge: alpha = a dtheta - gamma P dzeta and lambda_st = -P dzeta, so that
    omega  = (1 - gamma R) dP^dzeta + a dR^dtheta - gamma P dR^dzeta
    lambda = (1 - R)(a dtheta - gamma P dzeta) - (1 - gamma) P dzeta
and the map Phi to the ellipsoid chart has h = 0.
"""
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np
from scipy.stats import qmc

from singpack.core.exceptions import (
    DomainError,
    HyperboloidRegimeError,
    InputError,
    SingularLocusError,
)
from singpack.core.logging_config import get_logger
from singpack.services.integration import rk4_trajectory
from singpack.services.lattice import RationalLike, parse_rational

logger = get_logger(__name__)

P, ZETA, R, THETA = 0, 1, 2, 3

# omega_st = dP'^dzeta' + dR'^dtheta'
STANDARD_FORM = np.array([
    [0.0, 1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0, 0.0],
])


@dataclass(frozen=True)
class DiscBundleChart:
    a: float
    gamma: float
    A: float
    delta: float = 0.0

    def __post_init__(self):
        for name in ("a", "gamma", "A", "delta"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.a <= 0:
            raise InputError(f"Fiber weight a must be positive, got {self.a}")
        if self.A <= 0:
            raise InputError(f"Base area A must be positive, got {self.A}")
        if self.delta < 0:
            raise InputError(f"Base shrinkage delta must be nonnegative, got {self.delta}")
        if self.A - self.delta <= 0:
            raise InputError(f"A - delta must be positive, got {self.A - self.delta}")

    @classmethod
    def from_rationals(
        cls,
        a: RationalLike,
        gamma: RationalLike,
        A: RationalLike,
        delta: RationalLike = 0
    ) -> "DiscBundleChart":
        return cls(*(float(parse_rational(x)) for x in (a, gamma, A, delta)))

    @property
    def base_area(self) -> float:
        return self.A - self.delta


@dataclass(frozen=True)
class ChartPoint:
    P: float
    zeta: float
    R: float
    theta: float

    def as_array(self) -> np.ndarray:
        return np.array([self.P, self.zeta, self.R, self.theta], dtype=float)


PointLike = Union[ChartPoint, np.ndarray, list, tuple]


class FormValues(NamedTuple):
    omega: np.ndarray
    lam: np.ndarray
    alpha: np.ndarray


def _points(p: PointLike) -> np.ndarray:
    x = p.as_array() if isinstance(p, ChartPoint) else np.asarray(p, dtype=float)
    if x.shape[-1:] != (4,):
        raise InputError(f"Chart points have 4 coordinates, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InputError("Chart points must be finite")
    return x


def _check_domain(c: DiscBundleChart, x: np.ndarray):
    outside = (x[..., P] < 0) | (x[..., P] > c.A) | (x[..., R] < 0) | (x[..., R] >= 1)
    if np.any(outside):
        raise DomainError(f"{int(np.count_nonzero(outside))} point(s) outside 0 <= P <= A, 0 <= R < 1")


def omega_matrix(c: DiscBundleChart, p: PointLike) -> np.ndarray:
    x = _points(p)
    W = np.zeros(x.shape[:-1] + (4, 4))
    W[..., P, ZETA] = 1 - c.gamma * x[..., R]
    W[..., R, THETA] = c.a
    W[..., R, ZETA] = -c.gamma * x[..., P]
    return W - np.swapaxes(W, -1, -2)


def liouville_form(c: DiscBundleChart, p: PointLike) -> np.ndarray:
    x = _points(p)
    lam = np.zeros(x.shape)
    lam[..., ZETA] = -(1 - x[..., R]) * c.gamma * x[..., P] - (1 - c.gamma) * x[..., P]
    lam[..., THETA] = c.a * (1 - x[..., R])
    return lam


def connection_form(c: DiscBundleChart, p: PointLike) -> np.ndarray:
    x = _points(p)
    alpha = np.zeros(x.shape)
    alpha[..., ZETA] = -c.gamma * x[..., P]
    alpha[..., THETA] = c.a
    return alpha


def forms_at(c: DiscBundleChart, p: PointLike) -> FormValues:
    """omega, lambda and alpha at chart points"""
    x = _points(p)
    _check_domain(c, x)
    return FormValues(omega_matrix(c, x), liouville_form(c, x), connection_form(c, x))


def interior_product(omega: np.ndarray, X: np.ndarray) -> np.ndarray:
    """The covector omega(X, .)"""
    return np.einsum("...i,...ij->...j", X, omega)


def liouville_field(c: DiscBundleChart, p: PointLike) -> np.ndarray:
    """X_lambda as (dP, dzeta, dR, dtheta) velocities"""
    x = _points(p)
    _check_domain(c, x)
    denominator = 1 - c.gamma * x[..., R]
    if np.any(denominator == 0):
        raise SingularLocusError("Liouville field evaluated on gamma R = 1")
    X = np.zeros(x.shape)
    X[..., P] = -(1 - c.gamma) / denominator * x[..., P]
    X[..., R] = 1 - x[..., R]
    return X


def outward_margin(c: DiscBundleChart, p: PointLike) -> np.ndarray:
    """dR(X) = 1 - R, positive near the zero-section"""
    return liouville_field(c, p)[..., R]


def volume_density(c: DiscBundleChart, p: PointLike) -> np.ndarray:
    """Coefficient of omega^2/2 on dP dzeta dR dtheta"""
    x = _points(p)
    return c.a * (1 - c.gamma * x[..., R])


def phi_map(c: DiscBundleChart, p: PointLike) -> np.ndarray:
    """Phi(P, zeta, R, theta) = ((1 - gamma R) P, zeta, a R, theta)"""
    x = _points(p)
    _check_domain(c, x)
    return _phi(c, x)


def _phi(c: DiscBundleChart, x: np.ndarray) -> np.ndarray:
    image = x.copy()
    image[..., P] = (1 - c.gamma * x[..., R]) * x[..., P]
    image[..., R] = c.a * x[..., R]
    return image


def _check_step(c: DiscBundleChart, x: np.ndarray, h: float):
    if h <= 0:
        raise InputError(f"Finite-difference step must be positive, got {h}")
    too_close = (
        (x[..., P] - h < 0) | (x[..., P] + h > c.A) | (x[..., R] - h < 0) | (x[..., R] + h >= 1)
    )
    if np.any(too_close):
        raise DomainError(f"Step {h} leaves the chart domain at {int(np.count_nonzero(too_close))} point(s)")


def _central_jacobian(fun, x: np.ndarray, h: float) -> np.ndarray:
    """J[..., i, j] = d fun_i / d x_j"""
    columns = []
    for j in range(4):
        e = np.zeros(4)
        e[j] = h
        columns.append((fun(x + e) - fun(x - e)) / (2 * h))
    return np.stack(columns, axis=-1)


def pullback_defect(c: DiscBundleChart, p: PointLike, h_step: float) -> float:
    """max |J^T omega_st J - omega| with J the central-difference Jacobian of Phi"""
    x = _points(p)
    _check_domain(c, x)
    _check_step(c, x, h_step)
    J = _central_jacobian(lambda y: _phi(c, y), x, h_step)
    pulled = np.einsum("...ki,kl,...lj->...ij", J, STANDARD_FORM, J)
    return float(np.max(np.abs(pulled - omega_matrix(c, x))))


def exterior_derivative_defect(c: DiscBundleChart, p: PointLike, h_step: float) -> float:
    """max |d(lambda) + omega| with d taken by central differences"""
    x = _points(p)
    _check_domain(c, x)
    _check_step(c, x, h_step)
    G = np.swapaxes(_central_jacobian(lambda y: liouville_form(c, y), x, h_step), -1, -2)
    d_lambda = G - np.swapaxes(G, -1, -2)
    return float(np.max(np.abs(d_lambda + omega_matrix(c, x))))


def liouville_defect(c: DiscBundleChart, p: PointLike) -> float:
    """max |omega(X, .) - lambda|"""
    forms = forms_at(c, p)
    return float(np.max(np.abs(interior_product(forms.omega, liouville_field(c, p)) - forms.lam)))


def pushed_field(c: DiscBundleChart, y: PointLike) -> np.ndarray:
    """Phi_* X = (a - R') d/dR' - P' d/dP' in image coordinates"""
    y = _points(y)
    V = np.zeros(y.shape)
    V[..., P] = -y[..., P]
    V[..., R] = c.a - y[..., R]
    return V


def flow_closed_form(c: DiscBundleChart, y: PointLike, t) -> np.ndarray:
    """R'(t) = a - (a - R'_0) e^-t, P'(t) = P'_0 e^-t; angles are kept"""
    y = _points(y)
    decay = np.exp(-np.asarray(t, dtype=float))
    out = np.array(y, dtype=float, copy=True)
    out[..., P] = y[..., P] * decay
    out[..., R] = c.a - (c.a - y[..., R]) * decay
    return out


def flow_rk4(c: DiscBundleChart, y: PointLike, t: float, dt: float) -> np.ndarray:
    """The same flow by fixed-step RK4 integration of the pushed field"""
    y = _points(y)
    n_points = max(int(round(abs(t) / dt)), 1) + 1
    _, trajectory = rk4_trajectory(0.0, t, lambda _, state: pushed_field(c, state), n_points, y)
    return trajectory[-1]


def _require_ellipsoid_regime(c: DiscBundleChart):
    if c.gamma < 0:
        raise HyperboloidRegimeError("Basins are only defined in the ellipsoid regime gamma >= 0")
    if c.gamma >= 1:
        raise DomainError(f"gamma must be < 1 for basin queries, got {c.gamma}")


class BasinRoutes(NamedTuple):
    analytic: np.ndarray
    dynamic: np.ndarray
    level: np.ndarray
    reaches_zero_section: np.ndarray
    landing_P: np.ndarray


def basin_routes(c: DiscBundleChart, y: PointLike) -> BasinRoutes:
    """Membership in the basin of the zero-section disc by two independent routes.

    analytic: R'/a + P'/(A - delta) < 1
    dynamic: flow backward until R' = 0 and compare P' there with A - delta
    """
    _require_ellipsoid_regime(c)
    y = _points(y)
    if np.any(y[..., P] < 0) or np.any(y[..., R] < 0):
        raise DomainError("Image points need P' >= 0 and R' >= 0")

    level = y[..., R] / c.a + y[..., P] / c.base_area
    analytic = level < 1

    reaches = y[..., R] < c.a
    gap = np.where(reaches, c.a - y[..., R], 1.0)
    hit_time = np.where(reaches, np.log(c.a / gap), 0.0)
    landing = flow_closed_form(c, y, -hit_time)
    landing_P = np.where(reaches, landing[..., P], np.inf)
    dynamic = reaches & (landing_P < c.base_area)

    return BasinRoutes(analytic, dynamic, level, reaches, landing_P)


@dataclass(frozen=True)
class BasinVerdict:
    inside: bool
    analytic: bool
    dynamic: bool
    level: float
    reaches_zero_section: bool

    @property
    def agree(self) -> bool:
        return self.analytic == self.dynamic


def basin_membership(c: DiscBundleChart, y: PointLike) -> BasinVerdict:
    routes = basin_routes(c, y)
    if routes.level.ndim:
        raise InputError("basin_membership takes a single point; use basin_routes for batches")
    if not routes.reaches_zero_section:
        logger.debug("Point never reaches the zero-section backward")
    return BasinVerdict(
        inside=bool(routes.analytic and routes.dynamic),
        analytic=bool(routes.analytic),
        dynamic=bool(routes.dynamic),
        level=float(routes.level),
        reaches_zero_section=bool(routes.reaches_zero_section),
    )


@dataclass(frozen=True)
class MonteCarloVolume:
    estimate: float
    expected: float
    samples: int

    @property
    def relative_error(self) -> float:
        return abs(self.estimate - self.expected) / self.expected


def basin_volume_monte_carlo(c: DiscBundleChart, samples: int, rng: np.random.Generator) -> MonteCarloVolume:
    """Symplectic volume of the basin by uniform sampling over P < A - delta, R < 1"""
    _require_ellipsoid_regime(c)
    x = np.zeros((samples, 4))
    x[:, P] = rng.uniform(0.0, c.base_area, samples)
    x[:, ZETA] = rng.uniform(0.0, 1.0, samples)
    x[:, R] = rng.uniform(0.0, 1.0, samples)
    x[:, THETA] = rng.uniform(0.0, 1.0, samples)

    inside = basin_routes(c, _phi(c, x)).analytic
    estimate = c.base_area * float(np.mean(inside * volume_density(c, x)))
    result = MonteCarloVolume(estimate=estimate, expected=c.base_area * c.a / 2, samples=samples)
    logger.debug(f"Basin volume {result.estimate:.6f} against {result.expected:.6f}")
    return result


def quasi_random_points(c: DiscBundleChart, n: int, seed: int, margin: float = 0.0) -> np.ndarray:
    """Scrambled Halton points inside the chart, kept `margin` away from its edges"""
    u = qmc.Halton(d=4, scramble=True, seed=seed).random(n)
    x = np.empty((n, 4))
    x[:, P] = margin + u[:, 0] * (c.A - 2 * margin)
    x[:, ZETA] = u[:, 1]
    x[:, R] = margin + u[:, 2] * (1 - 2 * margin)
    x[:, THETA] = u[:, 3]
    return x


def bump_profile(R_j, epsilon: float):
    """f = R_j on [0, eps/2], monotone cubic to eps on [eps/2, eps], eps after; returns (f, f')"""
    R_j = np.asarray(R_j, dtype=float)
    half = epsilon / 2
    s = np.clip((R_j - half) / half, 0.0, 1.0)
    blend = half * (-s ** 3 + s ** 2 + s + 1)
    blend_slope = -3 * s ** 2 + 2 * s + 1
    f = np.where(R_j <= half, R_j, np.where(R_j >= epsilon, epsilon, blend))
    fprime = np.where(R_j <= half, 1.0, np.where(R_j >= epsilon, 0.0, blend_slope))
    return f, fprime


@dataclass(frozen=True)
class PlumbingChart:
    """Neighbourhood of an intersection point p_ij in coordinates (R_i, theta_i, R_j, theta_j)"""
    a_i: float
    a_j: float
    epsilon: float

    def __post_init__(self):
        for name in ("a_i", "a_j", "epsilon"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.a_i <= 0 or self.a_j <= 0:
            raise InputError("Plumbing weights must be positive")
        if not 0 < self.epsilon < 1:
            raise InputError(f"Plumbing epsilon must lie in (0, 1), got {self.epsilon}")


def _plumbing_points(x: PointLike) -> np.ndarray:
    x = _points(x)
    if np.any(x[..., 0] < 0) or np.any(x[..., 0] >= 1) or np.any(x[..., 2] < 0) or np.any(x[..., 2] >= 1):
        raise DomainError("Plumbing points need 0 <= R_i, R_j < 1")
    return x


def plumbing_forms(chart: PlumbingChart, x: PointLike):
    """(omega, lambda) of the chart of Sigma_i near p_ij"""
    x = _plumbing_points(x)
    f, fprime = bump_profile(x[..., 2], chart.epsilon)
    W = np.zeros(x.shape[:-1] + (4, 4))
    W[..., 0, 1] = chart.a_i
    W[..., 2, 3] = chart.a_j * fprime
    W = W - np.swapaxes(W, -1, -2)
    lam = np.zeros(x.shape)
    lam[..., 1] = chart.a_i * (1 - x[..., 0])
    lam[..., 3] = chart.a_j * (1 - f)
    return W, lam


def plumbing_field(chart: PlumbingChart, x: PointLike) -> np.ndarray:
    """Liouville field of the plumbing chart, defined where f' > 0"""
    x = _plumbing_points(x)
    f, fprime = bump_profile(x[..., 2], chart.epsilon)
    if np.any(fprime == 0):
        raise DomainError("Plumbing field is only defined for R_j < epsilon")
    X = np.zeros(x.shape)
    X[..., 0] = 1 - x[..., 0]
    X[..., 2] = (1 - f) / fprime
    return X


def gluing_defect(chart: PlumbingChart, x: PointLike) -> float:
    """max |lambda_i - lambda_j| where lambda_j is computed in the chart of Sigma_j"""
    x = _plumbing_points(x)
    swapped = PlumbingChart(a_i=chart.a_j, a_j=chart.a_i, epsilon=chart.epsilon)
    _, lam_i = plumbing_forms(chart, x)
    _, lam_j = plumbing_forms(swapped, x[..., [2, 3, 0, 1]])
    return float(np.max(np.abs(lam_i - lam_j[..., [2, 3, 0, 1]])))
