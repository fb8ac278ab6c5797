"""Classification of scaling families into passage-time limit regimes.

A scaling family pins every parameter to a power of N: mu_i = N**(a_i),
alpha = N**b, with exact rational exponents.  All "much smaller / much
larger" hypotheses then reduce to strict inequalities between rationals,
so classification is exact; equality in any deciding comparison is a
boundary case and no law is claimed for it.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

from .asymptotics import Exp1Law, HypoexponentialLaw, WeibullTypeLaw

THEOREM1 = "theorem1"
THEOREM2 = "theorem2"
THEOREM3 = "theorem3"
THEOREM4 = "theorem4"
BOUNDARY = "boundary"
UNCLASSIFIED = "unclassified"

L_INFINITE = math.inf


class ExponentBoundaryError(ValueError):
    """A deciding exponent comparison is an exact tie."""


class MissingLimitsError(ValueError):
    """Theorem-1 scaling requires the finite limits c_i = lim mu_i / mu_1."""


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        # Floats are read as their decimal literal, not their binary value.
        return Fraction(str(value))
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


@dataclass(frozen=True)
class ScalingFamily:
    """Exponents of an N-indexed parameter family mu_i = N**a_i, alpha = N**b."""

    d: int
    k: int
    a: Tuple[Fraction, ...]
    b: Fraction
    c: Optional[Tuple[float, ...]] = None

    def __init__(self, d, k, a, b, c=None):
        if d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {d}")
        if k < 1:
            raise ValueError(f"k must be at least 1, got {k}")
        a = tuple(_as_fraction(x) for x in a)
        if len(a) != k:
            raise ValueError(f"need exactly {k} exponents a_i, got {len(a)}")
        b = _as_fraction(b)
        if c is not None:
            c = tuple(float(x) for x in c)
            if len(c) != k:
                raise ValueError(f"need exactly {k} limits c_i, got {len(c)}")
            if any(x <= 0 for x in c):
                raise ValueError(f"limits c_i must lie in (0, inf], got {c}")
            if c[0] != 1.0:
                raise ValueError(f"c_1 = lim mu_1/mu_1 must equal 1, got {c[0]}")
        object.__setattr__(self, "d", int(d))
        object.__setattr__(self, "k", int(k))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def nondecreasing(self) -> bool:
        return all(self.a[i] <= self.a[i + 1] for i in range(self.k - 1))


@dataclass(frozen=True)
class Regime:
    """Classification outcome: limit kind, law and time scale.

    scale_exponent is the exact N-exponent of the time scale (always the
    exponent of some beta_j: beta_1 = 1/(N mu_1) covers the fast regimes).
    """

    kind: str
    l: Optional[Union[int, float]] = None
    law: Optional[object] = None
    scale_name: Optional[str] = None
    scale_exponent: Optional[Fraction] = None


def exponent_of_beta(family: ScalingFamily, k: int) -> Fraction:
    """Exact N-exponent of the scale beta_k under the family."""
    if k < 1 or k > family.k:
        raise ValueError(f"order k={k} outside 1..{family.k}")
    d = family.d
    m = (k - 1) * d + k
    return -(1 + (k - 1) * d * family.b + sum(family.a[:k])) / Fraction(m)


def _mu_threshold(family: ScalingFamily, j: int) -> Fraction:
    """Exponent of 1/(alpha**d * beta_{j-1}**(d+1)), the cutoff for a_j."""
    d = family.d
    return -(d * family.b + (d + 1) * exponent_of_beta(family, j - 1))


def compute_l(family: ScalingFamily):
    """Largest j >= 2 such that mu_i << 1/(alpha**d beta_{i-1}**(d+1)) holds
    for every i in 2..j; returns 1 when already false at j = 2 and the
    infinity marker when the chain survives through j = k.

    Raises ExponentBoundaryError when the first failing comparison is an
    exact tie, since neither the strict nor the reverse hypothesis holds.
    A single-type family has no chain to check and yields l = 1.
    """
    if family.k == 1:
        return 1
    l = 1
    for j in range(2, family.k + 1):
        threshold = _mu_threshold(family, j)
        if family.a[j - 1] < threshold:
            l = j
        elif family.a[j - 1] == threshold:
            raise ExponentBoundaryError(
                f"mu_{j} sits exactly on the threshold exponent {threshold}")
        else:
            return l
    return L_INFINITE


def classify(family: ScalingFamily) -> Regime:
    """Decide which passage-time limit applies to the family.

    Theorem-1 scaling (mu_1 far below alpha / N**((d+1)/d)) needs the
    explicit limits c_i and yields a hypoexponential in scale 1/(N mu_1).
    Faster mu_1 splits on the chain of mu_j thresholds: an empty chain is
    the exponential regime, a full chain the order-k Weibull type, and an
    interior stop l the order-l Weibull type in scale beta_l.
    """
    if not family.nondecreasing:
        return Regime(kind=UNCLASSIFIED)
    d = family.d
    slow_cutoff = family.b - Fraction(d + 1, d)
    if family.a[0] == slow_cutoff:
        return Regime(kind=BOUNDARY)
    if family.a[0] < slow_cutoff:
        if family.c is None:
            raise MissingLimitsError(
                "theorem-1 scaling requires explicit limits c_i = lim mu_i/mu_1")
        return Regime(kind=THEOREM1, l=None,
                      law=HypoexponentialLaw(family.c),
                      scale_name="beta_1",
                      scale_exponent=exponent_of_beta(family, 1))
    try:
        l = compute_l(family)
    except ExponentBoundaryError:
        return Regime(kind=BOUNDARY)
    if l == 1:
        return Regime(kind=THEOREM2, l=1, law=Exp1Law(),
                      scale_name="beta_1",
                      scale_exponent=exponent_of_beta(family, 1))
    if l is L_INFINITE or l >= family.k:
        return Regime(kind=THEOREM3, l=L_INFINITE,
                      law=WeibullTypeLaw.from_order(d, family.k),
                      scale_name=f"beta_{family.k}",
                      scale_exponent=exponent_of_beta(family, family.k))
    return Regime(kind=THEOREM4, l=l,
                  law=WeibullTypeLaw.from_order(d, l),
                  scale_name=f"beta_{l}",
                  scale_exponent=exponent_of_beta(family, l))


def _sign(x: float) -> int:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def hardest_lemma_check(mu: Sequence[float], alpha: float, N: float,
                        d: int, k: int) -> Tuple[int, int]:
    """Signs of log(mu_k alpha**d beta_k**(d+1)) and the beta_{k-1} variant.

    The two comparisons are equivalent: ((k-1)d + k) * log of the first
    equals ((k-2)d + k - 1) * log of the second identically, so the signs
    agree for every concrete parameter tuple.
    """
    if k < 2:
        raise ValueError(f"the comparison needs k >= 2, got {k}")
    if len(mu) < k:
        raise ValueError(f"need {k} mutation rates, got {len(mu)}")
    log_mu = [math.log(m) for m in mu[:k]]
    log_alpha = math.log(alpha)
    log_n = math.log(N)

    def log_beta(order):
        m = (order - 1) * d + order
        return -(log_n + (order - 1) * d * log_alpha + sum(log_mu[:order])) / m

    v1 = log_mu[k - 1] + d * log_alpha + (d + 1) * log_beta(k)
    v2 = log_mu[k - 1] + d * log_alpha + (d + 1) * log_beta(k - 1)
    return _sign(v1), _sign(v2)
