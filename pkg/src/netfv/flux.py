"""Scalar flux functions used on the edges of a network.

Every closed-form flux used here is a polynomial of degree at most two,
``f(u) = a2*u**2 + a1*u + a0``.  This makes derivative bounds exact
(``f'`` is affine, so its extrema sit at interval endpoints) and lets
sums of fluxes at a junction be inverted in closed form.
"""

from __future__ import annotations

import enum
import math
from typing import Sequence

import numpy as np

from .errors import DomainViolation, NotBracketed, NotMonotone

#: Absolute widening applied to flux domains before raising DomainViolation.
DOMAIN_TOL = 1e-9

#: Residual tolerance of :func:`monotone_inverse`, relative to ``max(1, |y|)``.
INVERSE_ATOL = 1e-12


class Monotonicity(str, enum.Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    NONE = "none"


class Flux:
    """Base class for scalar flux functions on a closed interval."""

    kind = "abstract"

    def __init__(self, domain=(-math.inf, math.inf)):
        lo, hi = float(domain[0]), float(domain[1])
        if not lo <= hi:
            raise ValueError(f"empty flux domain [{lo}, {hi}]")
        self.domain = (lo, hi)

    # -- subclasses implement these on raw (unchecked) input
    def _f(self, u):
        raise NotImplementedError

    def _df(self, u):
        raise NotImplementedError

    def check_domain(self, u, tol=DOMAIN_TOL):
        arr = np.asarray(u, dtype=float)
        if arr.size == 0:
            return
        lo, hi = self.domain
        umin, umax = float(np.min(arr)), float(np.max(arr))
        if not (np.isfinite(umin) and np.isfinite(umax)):
            raise DomainViolation(f"non-finite value passed to {self!r}")
        if umin < lo - tol or umax > hi + tol:
            raise DomainViolation(
                f"values in [{umin:.17g}, {umax:.17g}] leave domain "
                f"[{lo:.17g}, {hi:.17g}] of {self!r}"
            )

    def eval(self, u):
        self.check_domain(u)
        return self._f(u)

    __call__ = eval

    def derivative(self, u):
        self.check_domain(u)
        return self._df(u)

    def _check_interval(self, lo, hi):
        if not lo <= hi:
            raise ValueError(f"bad interval [{lo}, {hi}]")
        dlo, dhi = self.domain
        if lo < dlo - DOMAIN_TOL or hi > dhi + DOMAIN_TOL:
            raise DomainViolation(
                f"interval [{lo:.17g}, {hi:.17g}] not inside domain "
                f"[{dlo:.17g}, {dhi:.17g}] of {self!r}"
            )

    def derivative_bound(self, lo, hi):
        """Return ``max |f'(u)|`` over ``[lo, hi]``."""
        raise NotImplementedError

    def monotonicity_class(self, lo=None, hi=None) -> Monotonicity:
        """Classify the flux on ``[lo, hi]`` (the whole domain by default)."""
        raise NotImplementedError

    def quadratic_coefficients(self):
        """``(a2, a1, a0)`` for polynomial fluxes, ``None`` otherwise."""
        return None

    def endpoint_value(self, x: float) -> float:
        """``f(x)``, or its limit when ``x`` is infinite."""
        if math.isfinite(x):
            return float(self._f(float(x)))
        coeffs = self.quadratic_coefficients()
        if coeffs is None:
            raise ValueError(f"cannot take the limit of {self!r} at {x}")
        a2, a1, a0 = coeffs
        if a2 != 0.0:
            return math.copysign(math.inf, a2)
        if a1 != 0.0:
            return math.copysign(math.inf, a1 * x)
        return a0

    def range(self, lo=None, hi=None) -> tuple[float, float]:
        """Image of ``[lo, hi]`` (default: the domain) under a monotone flux."""
        lo = self.domain[0] if lo is None else lo
        hi = self.domain[1] if hi is None else hi
        if self.monotonicity_class(lo, hi) is Monotonicity.NONE:
            raise NotMonotone(f"{self!r} is not strictly monotone on [{lo}, {hi}]")
        a, b = self.endpoint_value(lo), self.endpoint_value(hi)
        return (min(a, b), max(a, b))

    def to_spec(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, Flux) and self.to_spec() == other.to_spec()

    def __hash__(self):
        return hash(repr(sorted(self.to_spec().items(), key=str)))


def _endpoint_slope(a2, a1, x):
    if math.isinf(x):
        if a2 == 0.0:
            return a1
        return math.copysign(math.inf, a2 * x)
    return 2.0 * a2 * x + a1


class QuadraticFlux(Flux):
    """``f(u) = a2*u**2 + a1*u + a0`` restricted to ``domain``."""

    kind = "quadratic"

    def __init__(self, a2, a1, a0=0.0, domain=(-math.inf, math.inf)):
        super().__init__(domain)
        self.a2, self.a1, self.a0 = float(a2), float(a1), float(a0)

    def _f(self, u):
        u = np.asarray(u, dtype=float) if not isinstance(u, float) else u
        return (self.a2 * u + self.a1) * u + self.a0

    def _df(self, u):
        u = np.asarray(u, dtype=float) if not isinstance(u, float) else u
        return 2.0 * self.a2 * u + self.a1

    def derivative_inverse(self, speed):
        """Solve ``f'(u) = speed``; used to evaluate rarefaction fans."""
        if self.a2 == 0.0:
            raise NotMonotone(f"{self!r} has constant characteristic speed")
        return (np.asarray(speed, dtype=float) - self.a1) / (2.0 * self.a2)

    def derivative_bound(self, lo, hi):
        self._check_interval(lo, hi)
        lo, hi = max(lo, self.domain[0]), min(hi, self.domain[1])
        return max(abs(_endpoint_slope(self.a2, self.a1, lo)),
                   abs(_endpoint_slope(self.a2, self.a1, hi)))

    def monotonicity_class(self, lo=None, hi=None):
        lo = self.domain[0] if lo is None else lo
        hi = self.domain[1] if hi is None else hi
        s_lo = _endpoint_slope(self.a2, self.a1, lo)
        s_hi = _endpoint_slope(self.a2, self.a1, hi)
        # f' is affine: a sign change inside [lo, hi] shows up at the endpoints
        if s_lo >= 0 and s_hi >= 0 and (s_lo > 0 or s_hi > 0):
            return Monotonicity.INCREASING
        if s_lo <= 0 and s_hi <= 0 and (s_lo < 0 or s_hi < 0):
            return Monotonicity.DECREASING
        return Monotonicity.NONE

    def quadratic_coefficients(self):
        return (self.a2, self.a1, self.a0)

    def to_spec(self):
        return {"kind": "quadratic", "a2": self.a2, "a1": self.a1, "a0": self.a0,
                "domain": list(self.domain)}

    def __repr__(self):
        return f"QuadraticFlux({self.a2!r}, {self.a1!r}, {self.a0!r}, domain={self.domain})"


class LinearAdvection(QuadraticFlux):
    kind = "linear"

    def __init__(self, speed=1.0, domain=(-math.inf, math.inf)):
        super().__init__(0.0, speed, 0.0, domain)
        self.speed = float(speed)

    def to_spec(self):
        return {"kind": "linear", "speed": self.speed, "domain": list(self.domain)}

    def __repr__(self):
        return f"LinearAdvection(speed={self.speed!r})"


class Burgers(QuadraticFlux):
    """``f(u) = u**2 / 2``.

    The default domain is ``[0, inf)``, the branch on which the flux is
    strictly increasing and the upwind scheme applies.
    """

    kind = "burgers"

    def __init__(self, domain=(0.0, math.inf)):
        super().__init__(0.5, 0.0, 0.0, domain)

    def to_spec(self):
        return {"kind": "burgers", "domain": list(self.domain)}

    def __repr__(self):
        return f"Burgers(domain={self.domain})"


class ScaledLWR(QuadraticFlux):
    """Lane-scaled LWR flux ``alpha * f(u / alpha)`` with ``f(v) = s_max*v*(1-v)``.

    Defaults to the increasing branch ``[0, alpha/2]``.
    """

    kind = "scaled_lwr"

    def __init__(self, alpha=1.0, s_max=1.0, domain=None):
        alpha, s_max = float(alpha), float(s_max)
        if not (alpha > 0 and s_max > 0):
            raise ValueError("ScaledLWR needs alpha > 0 and s_max > 0")
        if domain is None:
            domain = (0.0, alpha / 2.0)
        super().__init__(-s_max / alpha, s_max, 0.0, domain)
        self.alpha, self.s_max = alpha, s_max

    def to_spec(self):
        return {"kind": "scaled_lwr", "alpha": self.alpha, "s_max": self.s_max,
                "domain": list(self.domain)}

    def __repr__(self):
        return f"ScaledLWR(alpha={self.alpha!r}, s_max={self.s_max!r}, domain={self.domain})"


class TabulatedFlux(Flux):
    """Strictly monotone piecewise-linear flux through tabulated samples."""

    kind = "tabulated"

    def __init__(self, u: Sequence[float], f: Sequence[float]):
        u = np.asarray(u, dtype=float)
        f = np.asarray(f, dtype=float)
        if u.ndim != 1 or u.shape != f.shape or u.size < 2:
            raise ValueError("need matching 1-d sample arrays of length >= 2")
        if np.any(np.diff(u) <= 0):
            raise ValueError("sample abscissae must be strictly increasing")
        slopes = np.diff(f) / np.diff(u)
        if not (np.all(slopes > 0) or np.all(slopes < 0)):
            raise ValueError("tabulated flux must be strictly monotone")
        super().__init__((u[0], u[-1]))
        self.u, self.f, self.slopes = u, f, slopes

    def _f(self, u):
        return np.interp(u, self.u, self.f)

    def _df(self, u):
        idx = np.clip(np.searchsorted(self.u, u, side="right") - 1, 0, self.slopes.size - 1)
        return self.slopes[idx]

    def derivative_bound(self, lo, hi):
        self._check_interval(lo, hi)
        first = np.clip(np.searchsorted(self.u, lo, side="right") - 1, 0, self.slopes.size - 1)
        last = np.clip(np.searchsorted(self.u, hi, side="left") - 1, 0, self.slopes.size - 1)
        return float(np.max(np.abs(self.slopes[first:last + 1])))

    def monotonicity_class(self, lo=None, hi=None):
        return Monotonicity.INCREASING if self.slopes[0] > 0 else Monotonicity.DECREASING

    def to_spec(self):
        return {"kind": "tabulated", "u": self.u.tolist(), "f": self.f.tolist()}

    def __repr__(self):
        return f"TabulatedFlux(<{self.u.size} samples>)"


class AggregateFlux(Flux):
    """Sum of several edge fluxes, as used for the junction totals f_in and f_out.

    The domain is the intersection of the summand domains.
    """

    kind = "aggregate"

    def __init__(self, parts: Sequence[Flux]):
        parts = tuple(parts)
        if not parts:
            raise ValueError("AggregateFlux needs at least one summand")
        lo = max(p.domain[0] for p in parts)
        hi = min(p.domain[1] for p in parts)
        super().__init__((lo, hi))
        self.parts = parts
        coeffs = [p.quadratic_coefficients() for p in parts]
        self._coeffs = None if any(c is None for c in coeffs) else tuple(
            math.fsum(c[i] for c in coeffs) for i in range(3))

    def _f(self, u):
        if self._coeffs is not None:
            a2, a1, a0 = self._coeffs
            u = np.asarray(u, dtype=float) if not isinstance(u, float) else u
            return (a2 * u + a1) * u + a0
        return sum(p._f(u) for p in self.parts)

    def _df(self, u):
        if self._coeffs is not None:
            u = np.asarray(u, dtype=float) if not isinstance(u, float) else u
            return 2.0 * self._coeffs[0] * u + self._coeffs[1]
        return sum(p._df(u) for p in self.parts)

    def derivative_bound(self, lo, hi):
        self._check_interval(lo, hi)
        if self._coeffs is not None:
            a2, a1, _ = self._coeffs
            return max(abs(_endpoint_slope(a2, a1, lo)), abs(_endpoint_slope(a2, a1, hi)))
        # upper bound only
        return sum(p.derivative_bound(lo, hi) for p in self.parts)

    def monotonicity_class(self, lo=None, hi=None):
        lo = self.domain[0] if lo is None else lo
        hi = self.domain[1] if hi is None else hi
        classes = {p.monotonicity_class(lo, hi) for p in self.parts}
        if len(classes) == 1:
            return classes.pop()
        return Monotonicity.NONE

    def quadratic_coefficients(self):
        return self._coeffs

    def to_spec(self):
        return {"kind": "aggregate", "parts": [p.to_spec() for p in self.parts]}

    def __repr__(self):
        return f"AggregateFlux({list(self.parts)!r})"


def _quadratic_root(coeffs, y, lo, hi):
    a2, a1, a0 = coeffs
    c = a0 - y
    if a2 == 0.0:
        return -c / a1
    disc = a1 * a1 - 4.0 * a2 * c
    disc = max(disc, 0.0)
    q = -0.5 * (a1 + math.copysign(math.sqrt(disc), a1))
    roots = []
    if q != 0.0:
        roots += [q / a2, c / q]
    else:
        roots.append(-a1 / (2.0 * a2))
    slack = 1e-9 * (1.0 + max(abs(lo) if math.isfinite(lo) else 0.0,
                              abs(hi) if math.isfinite(hi) else 0.0))
    inside = [r for r in roots if lo - slack <= r <= hi + slack]
    if not inside:
        raise NotBracketed(f"no root of f(u) = {y!r} in [{lo}, {hi}]")
    r = min(inside, key=lambda r: max(lo - r, r - hi, 0.0))
    return min(max(r, lo), hi)


def monotone_inverse(flux: Flux, y: float, bracket=None) -> float:
    """Solve ``flux(u) = y`` for ``u`` inside ``bracket``.

    ``bracket`` defaults to the flux domain.  Quadratic fluxes (and sums of
    them) are inverted in closed form; anything else is bisected to an
    interval width of 1e-14 and polished with one Newton step.

    Raises
    ------
    NotMonotone
        if the flux is not strictly monotone on the bracket.
    NotBracketed
        if ``y`` lies outside ``[flux(lo), flux(hi)]`` by more than the tolerance.
    """
    lo, hi = (flux.domain if bracket is None else (float(bracket[0]), float(bracket[1])))
    if flux.monotonicity_class(lo, hi) is Monotonicity.NONE:
        raise NotMonotone(f"{flux!r} is not strictly monotone on [{lo}, {hi}]")
    y = float(y)
    atol = INVERSE_ATOL * max(1.0, abs(y))
    f_lo, f_hi = flux.endpoint_value(lo), flux.endpoint_value(hi)
    if not (min(f_lo, f_hi) - atol <= y <= max(f_lo, f_hi) + atol):
        raise NotBracketed(
            f"target {y!r} outside range [{min(f_lo, f_hi)!r}, {max(f_lo, f_hi)!r}] "
            f"of {flux!r} on [{lo}, {hi}]")

    coeffs = flux.quadratic_coefficients()
    if coeffs is not None:
        return _quadratic_root(coeffs, y, lo, hi)

    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise NotBracketed("bisection needs a finite bracket")
    increasing = f_hi > f_lo
    a, b = lo, hi
    while b - a > 1e-14 and b - a > 4 * np.spacing(max(abs(a), abs(b))):
        m = 0.5 * (a + b)
        fm = float(flux._f(m))
        if (fm < y) == increasing:
            a = m
        else:
            b = m
    u = 0.5 * (a + b)
    slope = float(flux._df(u))
    if slope != 0.0:
        polished = u - (float(flux._f(u)) - y) / slope
        if a <= polished <= b and abs(flux._f(polished) - y) <= abs(flux._f(u) - y):
            u = polished
    return u


_KINDS = {"linear", "burgers", "scaled_lwr", "tabulated", "quadratic"}


def flux_from_spec(spec: dict) -> Flux:
    """Build a flux from its config-file representation."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in _KINDS:
        raise ValueError(f"unknown flux kind {kind!r}; expected one of {sorted(_KINDS)}")
    domain = spec.pop("domain", None)
    if domain is not None:
        domain = (float(domain[0]), float(domain[1]))
    if kind == "linear":
        flux = LinearAdvection(float(spec.pop("speed", 1.0)),
                               domain=domain or (-math.inf, math.inf))
    elif kind == "burgers":
        flux = Burgers(domain=domain or (0.0, math.inf))
    elif kind == "scaled_lwr":
        flux = ScaledLWR(spec.pop("alpha", 1.0), spec.pop("s_max", 1.0), domain=domain)
    elif kind == "quadratic":
        flux = QuadraticFlux(spec.pop("a2"), spec.pop("a1"), spec.pop("a0", 0.0),
                             domain=domain or (-math.inf, math.inf))
    else:
        flux = TabulatedFlux(spec.pop("u"), spec.pop("f"))
    if spec:
        raise ValueError(f"unexpected keys for flux kind {kind!r}: {sorted(spec)}")
    return flux
