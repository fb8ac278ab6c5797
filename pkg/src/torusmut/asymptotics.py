"""Closed-form scales, volume approximations and limit laws.

All formulas are exact algebraic consequences of the model: beta_k and
kappa_j are the passage-time scales, v_k is the polynomial volume
approximation valid while occupied volume is a vanishing fraction of the
torus, and the law classes evaluate the limiting passage-time and distance
distributions.  Factorial-heavy constants are assembled in log space so
large orders neither overflow nor lose precision.
"""

import math
from typing import Sequence, Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad

ArrayLike = Union[float, Sequence[float], np.ndarray]

_GAMMA_D = {1: 2.0, 2: math.pi, 3: 4.0 * math.pi / 3.0}

# Fixed Gauss-Legendre rule reused by the quadrature routines; the volume
# recursion integrand is polynomial of degree at most 15 for k <= 4, d <= 3,
# so 16 nodes integrate it exactly.
_GL_NODES, _GL_WEIGHTS = leggauss(16)


def unit_ball_volume(d: int) -> float:
    """Lebesgue volume of the unit ball in R^d for d in {1, 2, 3}."""
    try:
        return _GAMMA_D[d]
    except KeyError:
        raise ValueError(f"dimension must be 1, 2 or 3, got {d}") from None


def _check_order(params, k, lo=1):
    if k < lo or k > len(params.mu):
        raise ValueError(f"order k={k} outside {lo}..{len(params.mu)}")


def beta_k(params, k: int) -> float:
    """Passage-time scale for the k-th mutation type.

    beta_k = (N * alpha**((k-1) d) * prod_{i<=k} mu_i) ** (-1 / ((k-1) d + k));
    beta_1 reduces to 1 / (N mu_1).
    """
    _check_order(params, k)
    d = params.d
    m = (k - 1) * d + k
    log_mass = (math.log(params.N) + (k - 1) * d * math.log(params.alpha)
                + sum(math.log(mu) for mu in params.mu[:k]))
    return math.exp(-log_mass / m)


def kappa_j(params, j: int) -> float:
    """Single-ball passage scale kappa_j = (mu_j * alpha**d) ** (-1/(d+1))."""
    _check_order(params, j)
    log_mass = math.log(params.mu[j - 1]) + params.d * math.log(params.alpha)
    return math.exp(-log_mass / (params.d + 1))


def v_k(params, k: int, t: ArrayLike) -> Union[float, np.ndarray]:
    """Closed-form volume approximation for the level-k region.

    v_k(t) = gamma_d**k (d!)**k / (k(d+1))! * prod_{i<=k} mu_i * N
             * alpha**(k d) * t**(k(d+1)), with v_0 identically N.  Valid
    while mu_k alpha**d t**(d+1) is small and t <= N**(1/d) / (2 alpha);
    the caller is responsible for checking those hypotheses.
    """
    _check_order(params, k, lo=0)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("volume approximation requires t >= 0")
    if k == 0:
        out = np.full_like(t_arr, params.N)
        return float(out) if np.isscalar(t) else out
    d = params.d
    log_const = (k * (math.log(_GAMMA_D[d]) + math.lgamma(d + 1))
                 - math.lgamma(k * (d + 1) + 1)
                 + sum(math.log(mu) for mu in params.mu[:k])
                 + math.log(params.N) + k * d * math.log(params.alpha))
    with np.errstate(divide="ignore"):
        out = np.where(t_arr > 0,
                       np.exp(log_const + k * (d + 1)
                              * np.log(np.where(t_arr > 0, t_arr, 1.0))),
                       0.0)
    return float(out) if np.isscalar(t) else out


def _v_recursive(params, k: int, t: float) -> float:
    if k == 0:
        return params.N
    if t <= 0.0:
        return 0.0
    d = params.d
    gamma = _GAMMA_D[d]
    mu = params.mu[k - 1]
    alpha = params.alpha
    half = 0.5 * t
    total = 0.0
    for node, weight in zip(_GL_NODES, _GL_WEIGHTS):
        r = half * (node + 1.0)
        total += weight * _v_recursive(params, k - 1, r) * gamma * (alpha * (t - r)) ** d
    return mu * half * total


def v_k_quadrature(params, k: int, t: ArrayLike) -> Union[float, np.ndarray]:
    """Volume approximation via nested quadrature of the defining recursion.

    v_j(t) = int_0^t mu_j v_{j-1}(r) gamma_d (alpha (t - r))**d dr with
    v_0 = N.  Independent of the closed form in v_k; the two agree to
    relative 1e-8 wherever both apply.
    """
    _check_order(params, k, lo=0)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("volume approximation requires t >= 0")
    out = np.array([_v_recursive(params, k, float(ti)) for ti in np.atleast_1d(t_arr)])
    return float(out[0]) if np.isscalar(t) else out.reshape(t_arr.shape)


def single_ball_passage_cdf(params, j: int, t: ArrayLike) -> Union[float, np.ndarray]:
    """P(first type-j point falls inside one ball growing from time 0 by t).

    Equals 1 - exp(-(gamma_d/(d+1)) (t/kappa_j)**(d+1)).
    """
    if j < 1 or j > params.K:
        raise ValueError(f"type index must be in 1..{params.K}, got {j}")
    d = params.d
    gamma = unit_ball_volume(d)
    t_arr = np.asarray(t, dtype=float)
    out = -np.expm1(-(gamma / (d + 1)) * params.mu[j - 1] * params.alpha ** d
                    * np.where(t_arr > 0, t_arr, 0.0) ** (d + 1))
    return float(out) if np.isscalar(t) else out


def gap_density(d: int, t: ArrayLike) -> Union[float, np.ndarray]:
    """Density of the kappa-rescaled gap between successive first passages.

    f(t) = gamma_d t**d exp(-gamma_d t**(d+1) / (d+1)) on t >= 0.
    """
    gamma = unit_ball_volume(d)
    t_arr = np.asarray(t, dtype=float)
    out = np.where(t_arr >= 0,
                   gamma * np.abs(t_arr) ** d
                   * np.exp(-(gamma / (d + 1)) * np.abs(t_arr) ** (d + 1)),
                   0.0)
    return float(out) if np.isscalar(t) else out


def theorem3_constant(d: int, k: int) -> Tuple[float, int]:
    """Tail constant and exponent (C, m) with P(limit > t) = exp(-C t**m).

    m = (k-1) d + k and C = gamma_d**(k-1) (d!)**(k-1) / m!.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    gamma = unit_ball_volume(d)
    m = (k - 1) * d + k
    log_c = (k - 1) * (math.log(gamma) + math.lgamma(d + 1)) - math.lgamma(m + 1)
    return math.exp(log_c), m


def theorem3_integrand(params, k: int, t: ArrayLike) -> Union[float, np.ndarray]:
    """Rescaled hazard-mass integrand g_k(t).

    g_k(t) = gamma_d**(k-1) (d!)**(k-1) t**((k-1)(d+1)) / ((k-1)(d+1))!.
    Algebraically g_k(t) = beta_k * mu_k * v_{k-1}(beta_k t): the factor
    beta_k**((k-1) d + k) cancels the parameter mass exactly, so the value
    depends on params only through the dimension.
    """
    if k < 1 or k > params.K:
        raise ValueError(f"k must be in 1..{params.K}, got {k}")
    d = params.d
    gamma = unit_ball_volume(d)
    p = (k - 1) * (d + 1)
    log_c = (k - 1) * (math.log(gamma) + math.lgamma(d + 1)) - math.lgamma(p + 1)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("integrand defined for t >= 0")
    if p == 0:
        out = np.full_like(t_arr, math.exp(log_c))
    else:
        with np.errstate(divide="ignore"):
            out = np.where(t_arr > 0,
                           np.exp(log_c + p * np.log(np.where(t_arr > 0, t_arr, 1.0))),
                           0.0)
    return float(out) if np.isscalar(t) else out


def _distance_cdf_scalar(d: int, s: float) -> float:
    gamma = unit_ball_volume(d)
    a = gamma / (d + 1)
    if s <= 0.0:
        return 0.0
    near, _ = quad(lambda t: gamma * t ** d * math.exp(-a * t ** (d + 1)),
                   0.0, s, epsabs=1e-12, epsrel=1e-12)
    far, _ = quad(lambda t: math.exp(-a * t ** (d + 1)),
                  s, math.inf, epsabs=1e-12, epsrel=1e-12)
    return min(1.0, max(0.0, near + s ** d * gamma * far))


def _segment_integrals(f, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    t = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    return (f(t) * _GL_WEIGHTS[None, :]).sum(axis=1) * half


def distance_cdf(d: int, s: ArrayLike) -> Union[float, np.ndarray]:
    """Limit CDF of the rescaled distance between successive first origins.

    F(s) = int_0^inf gamma_d min(t, s)**d exp(-gamma_d t**(d+1)/(d+1)) dt,
    evaluated by quadrature split at the kink t = s (absolute error below
    1e-8).  Array arguments are handled by accumulating the two split
    pieces over the sorted values.
    """
    if np.isscalar(s):
        return _distance_cdf_scalar(d, float(s))
    s_arr = np.asarray(s, dtype=float)
    flat = s_arr.ravel()
    out = np.zeros_like(flat)
    pos = flat > 0.0
    if pos.any():
        gamma = unit_ball_volume(d)
        a = gamma / (d + 1)
        order = np.argsort(flat[pos], kind="stable")
        xs = flat[pos][order]

        f_near = lambda t: gamma * t ** d * np.exp(-a * t ** (d + 1))
        f_far = lambda t: np.exp(-a * t ** (d + 1))

        edges = np.concatenate([[0.0], xs])
        near = np.cumsum(_segment_integrals(f_near, edges[:-1], edges[1:]))

        tail_top, _ = quad(lambda t: math.exp(-a * t ** (d + 1)),
                           float(xs[-1]), math.inf, epsabs=1e-13, epsrel=1e-13)
        segs = _segment_integrals(f_far, xs[:-1], xs[1:])
        far = np.empty_like(xs)
        far[-1] = tail_top
        if len(xs) > 1:
            far[:-1] = tail_top + np.cumsum(segs[::-1])[::-1]

        vals = np.clip(near + xs ** d * gamma * far, 0.0, 1.0)
        restored = np.empty_like(vals)
        restored[order] = vals
        out[pos] = restored
    return out.reshape(s_arr.shape)


class Exp1Law:
    """Unit-rate exponential limit."""

    kind = "exp1"

    def cdf(self, t: ArrayLike) -> Union[float, np.ndarray]:
        t_arr = np.asarray(t, dtype=float)
        out = -np.expm1(-np.where(t_arr > 0, t_arr, 0.0))
        return float(out) if np.isscalar(t) else out

    def to_dict(self):
        return {"kind": "exp1"}

    def __repr__(self):
        return "Exp1Law()"


class HypoexponentialLaw:
    """Sum of independent exponentials with rates c_i; infinite rates drop out.

    Distinct rates use the partial-fraction closed form.  Repeated or
    near-equal rates fall back to numeric convolution of exact bin masses
    on a 2**16-point grid, which avoids the unstable confluent limit.
    """

    kind = "hypoexponential"
    _GRID = 1 << 16
    _NEAR = 1e-6

    def __init__(self, rates: Sequence[float]):
        rates = tuple(float(c) for c in rates)
        if not rates:
            raise ValueError("at least one rate is required")
        if any(c <= 0 for c in rates):
            raise ValueError(f"rates must be positive, got {rates}")
        finite = tuple(c for c in rates if math.isfinite(c))
        if not finite:
            raise ValueError("degenerate law: every rate is infinite, the "
                             "limit is a point mass at zero")
        self.rates = rates
        self._finite = finite
        gaps = [abs(a - b) for i, a in enumerate(finite) for b in finite[i + 1:]]
        self._closed_form = not gaps or min(gaps) > self._NEAR * max(finite)
        self._grid_x = None
        self._grid_F = None

    def _build_grid(self):
        k = len(self._finite)
        t_max = sum(30.0 / c for c in self._finite)
        dt = t_max / self._GRID
        edges = np.arange(self._GRID + 1) * dt
        mass = None
        for c in self._finite:
            p = np.exp(-c * edges[:-1]) - np.exp(-c * edges[1:])
            if mass is None:
                mass = p
            else:
                mass = np.convolve(mass, p)[:self._GRID]
        # Bin i of the convolution holds mass near (i + k/2) * dt once each
        # factor is centred at its bin midpoint.
        self._grid_x = (np.arange(self._GRID) + 0.5 * k) * dt
        self._grid_F = np.minimum(np.cumsum(mass), 1.0)

    def cdf(self, t: ArrayLike) -> Union[float, np.ndarray]:
        t_arr = np.asarray(t, dtype=float)
        if self._closed_form and len(self._finite) == 1:
            out = -np.expm1(-self._finite[0] * np.where(t_arr > 0, t_arr, 0.0))
        elif self._closed_form:
            cs = np.array(self._finite)
            weights = np.empty_like(cs)
            for i, ci in enumerate(cs):
                others = np.delete(cs, i)
                weights[i] = np.prod(others / (others - ci))
            tt = np.where(t_arr > 0, t_arr, 0.0)
            out = 1.0 - np.exp(-np.multiply.outer(tt, cs)) @ weights
            out = np.clip(np.where(t_arr > 0, out, 0.0), 0.0, 1.0)
        else:
            if self._grid_x is None:
                self._build_grid()
            out = np.interp(t_arr, self._grid_x, self._grid_F, left=0.0, right=1.0)
        return float(out) if np.isscalar(t) else out

    def to_dict(self):
        return {"kind": "hypoexponential",
                "rates": ["inf" if math.isinf(c) else c for c in self.rates]}

    def __repr__(self):
        return f"HypoexponentialLaw(rates={self.rates})"


class WeibullTypeLaw:
    """Limit with survival exp(-C t**m) for integer m = (k-1) d + k."""

    kind = "weibull_type"

    def __init__(self, coefficient: float, exponent: int):
        if coefficient <= 0:
            raise ValueError(f"coefficient must be positive, got {coefficient}")
        if exponent != int(exponent) or exponent < 1:
            raise ValueError(f"exponent must be a positive integer, got {exponent}")
        self.coefficient = float(coefficient)
        self.exponent = int(exponent)

    @classmethod
    def from_order(cls, d: int, k: int) -> "WeibullTypeLaw":
        coefficient, exponent = theorem3_constant(d, k)
        return cls(coefficient, exponent)

    def cdf(self, t: ArrayLike) -> Union[float, np.ndarray]:
        t_arr = np.asarray(t, dtype=float)
        out = -np.expm1(-self.coefficient
                        * np.where(t_arr > 0, t_arr, 0.0) ** self.exponent)
        return float(out) if np.isscalar(t) else out

    def to_dict(self):
        return {"kind": "weibull_type", "coefficient": self.coefficient,
                "exponent": self.exponent}

    def __repr__(self):
        return f"WeibullTypeLaw(C={self.coefficient}, m={self.exponent})"


class DistanceLaw:
    """Limit of the rescaled distance between successive first origins."""

    kind = "distance"

    def __init__(self, d: int):
        unit_ball_volume(d)
        self.d = int(d)

    def cdf(self, s: ArrayLike) -> Union[float, np.ndarray]:
        return distance_cdf(self.d, s)

    def to_dict(self):
        return {"kind": "distance", "d": self.d}

    def __repr__(self):
        return f"DistanceLaw(d={self.d})"


def limit_cdf(law, t: ArrayLike) -> Union[float, np.ndarray]:
    """Evaluate the CDF of any limit-law object."""
    return law.cdf(t)
