"""Temporal mode functions built from two-sided exponentials.

All times are dimensionless (``zeta0 * t``) unless a function says otherwise.
A :class:`ModeFunction` is an exact finite sum

    Psi(t) = sum_j c_j exp(-a_j |t - s_j|),

so inner products and the kernel integrals needed for the covariance matrix
reduce to convolutions of Lorentzian spectra and have closed forms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np
from scipy import integrate
from scipy.linalg import expm
from scipy.special import exprel

from .errors import DegenerateModes, NonConvergence

DEGENERACY_TOL = 1e-12

# exp(-TAIL_LOG) == 1e-16: tails beyond this many decay lengths are dropped
TAIL_LOG = 16 * math.log(10.0)


class ExpTerm(NamedTuple):
    amplitude: float
    decay: float
    center: float


def exp_overlap(a: float, b: float, d: float) -> float:
    """Return ``int exp(-a|t|) exp(-b|t-d|) dt``.

    Written as ``2 e^{-a' d} (1 + a' d * exprel(-(b'-a') d)) / (a+b)`` with
    ``a' = min(a, b)``, which is exact for every pair of decays including the
    confluent case ``a == b`` where it reduces to ``(1 + a d) e^{-a d} / a``.
    """
    d = abs(d)
    lo, hi = (a, b) if a <= b else (b, a)
    return 2.0 * math.exp(-lo * d) * (1.0 + lo * d * exprel(-(hi - lo) * d)) / (a + b)


def exp_triple_overlap(a: float, zeta: float, b: float, d: float) -> float:
    """Return ``iint exp(-a|t|) exp(-zeta|t-t'|) exp(-b|t'-d|) dt dt'``.

    The triple convolution of two-sided exponentials evaluated at ``d`` equals
    the divided difference of ``P(s) = e^{sd} prod_k 2x_k / (x_k - s)`` on the
    nodes ``-a, -zeta, -b``.  The divided difference is read off the corner of
    ``P(J)`` for the bidiagonal matrix ``J`` carrying the nodes, which stays
    exact when any of the decays coincide.
    """
    d = abs(d)
    x = np.array([a, zeta, b], dtype=float)
    jordan = np.diag(-x) + np.diag([1.0, 1.0], 1)
    value = expm(d * jordan)
    eye = np.eye(3)
    for xk in x:
        value = value @ (2.0 * xk * np.linalg.inv(xk * eye - jordan))
    return float(value[0, 2])


@dataclass(frozen=True)
class ModeFunction:
    """Linear combination of shifted two-sided exponentials."""

    terms: tuple[ExpTerm, ...]

    def __post_init__(self):
        terms = tuple(ExpTerm(float(c), float(a), float(s)) for c, a, s in self.terms)
        if any(t.decay <= 0 for t in terms):
            raise ValueError("all decay constants must be positive")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def exponential(cls, center: float = 0.0, decay: float = 1.0) -> "ModeFunction":
        """Normalized packet ``sqrt(decay) exp(-decay |t - center|)``."""
        return cls((ExpTerm(math.sqrt(decay), decay, center),))

    @classmethod
    def combine(cls, coefficients: Sequence[float], modes: Sequence["ModeFunction"]) -> "ModeFunction":
        terms: list[ExpTerm] = []
        for c, m in zip(coefficients, modes):
            terms.extend(ExpTerm(c * t.amplitude, t.decay, t.center) for t in m.terms)
        return cls(tuple(terms)).simplified()

    def simplified(self) -> "ModeFunction":
        merged: dict[tuple[float, float], float] = {}
        for c, a, s in self.terms:
            merged[(a, s)] = merged.get((a, s), 0.0) + c
        return ModeFunction(tuple(ExpTerm(c, a, s) for (a, s), c in merged.items() if c != 0.0))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for c, a, s in self.terms:
            out = out + c * np.exp(-a * np.abs(t - s))
        return out

    def value(self, t: float) -> float:
        """Scalar evaluation; much cheaper than ``__call__`` inside quadrature loops."""
        return math.fsum(c * math.exp(-a * abs(t - s)) for c, a, s in self.terms)

    def __add__(self, other: "ModeFunction") -> "ModeFunction":
        return ModeFunction(self.terms + other.terms).simplified()

    def __sub__(self, other: "ModeFunction") -> "ModeFunction":
        return self + (-1.0) * other

    def __mul__(self, scale: float) -> "ModeFunction":
        return ModeFunction(tuple(ExpTerm(scale * c, a, s) for c, a, s in self.terms))

    __rmul__ = __mul__

    def __neg__(self) -> "ModeFunction":
        return (-1.0) * self

    def reflected(self, about: float) -> "ModeFunction":
        """Mirror image ``t -> 2*about - t``."""
        return ModeFunction(tuple(ExpTerm(c, a, 2.0 * about - s) for c, a, s in self.terms))

    @property
    def centers(self) -> tuple[float, ...]:
        return tuple(sorted({s for _, _, s in self.terms}))

    @property
    def min_decay(self) -> float:
        return min(a for _, a, _ in self.terms)

    def inner(self, other: "ModeFunction") -> float:
        return math.fsum(
            c1 * c2 * exp_overlap(a1, a2, s1 - s2)
            for c1, a1, s1 in self.terms
            for c2, a2, s2 in other.terms
        )

    def norm(self) -> float:
        return math.sqrt(self.inner(self))


def psi(t, center: float = 0.0, zeta0: float = 1.0):
    """Normalized packet ``sqrt(zeta0) exp(-zeta0 |t - center|)``."""
    return math.sqrt(zeta0) * np.exp(-zeta0 * np.abs(np.asarray(t, dtype=float) - center))


def overlap_I(delta: float) -> float:
    """Overlap of two packets separated by ``delta``: ``(1 + delta) e^{-delta}``."""
    if delta < 0:
        raise ValueError("delta must be non-negative")
    return (1.0 + delta) * math.exp(-delta)


def p_delta(delta: float) -> float:
    """Weight of the far packet in each unbiased mode.

    ``(1 - sqrt(1 - I^2)) / 2`` rewritten as ``I^2 / (2 (1 + sqrt(1 - I^2)))``
    so it keeps full precision at large separations.
    """
    i = overlap_I(delta)
    return i * i / (2.0 * (1.0 + math.sqrt((1.0 - i) * (1.0 + i))))


@dataclass(frozen=True)
class OverlapScalars:
    I_delta: float
    p_delta: float
    delta_dimless: float

    @classmethod
    def at(cls, delta: float) -> "OverlapScalars":
        return cls(overlap_I(delta), p_delta(delta), float(delta))


def _packets(delta: float, t1: float) -> tuple[ModeFunction, ModeFunction]:
    return ModeFunction.exponential(t1), ModeFunction.exponential(t1 + delta)


def unbiased_coefficients(delta: float) -> np.ndarray:
    """Rows express ``Psi_U1, Psi_U2`` in the packet pair ``psi(t-t1), psi(t-t2)``."""
    i = overlap_I(delta)
    gap = (1.0 - i) * (1.0 + i)
    if gap < DEGENERACY_TOL:
        raise DegenerateModes(f"1 - I^2 = {gap:.3g} below {DEGENERACY_TOL:g} at delta={delta:g}")
    p = p_delta(delta)
    near, far = math.sqrt(1.0 - p), math.sqrt(p)
    return np.array([[near, -far], [-far, near]]) / math.sqrt(gap)


def biased_coefficients(delta: float, *, allow_degenerate_minus: bool = False) -> np.ndarray:
    """Rows express ``Psi_+, Psi_-`` in the packet pair."""
    i = overlap_I(delta)
    if 1.0 - i < DEGENERACY_TOL and not allow_degenerate_minus:
        raise DegenerateModes(f"1 - I = {1.0 - i:.3g} below {DEGENERACY_TOL:g} at delta={delta:g}")
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0 * (1.0 + i))
    minus = np.array([-1.0, 1.0]) / math.sqrt(2.0 * (1.0 - i)) if 1.0 - i > 0 else np.full(2, np.nan)
    return np.vstack([plus, minus])


def change_of_basis() -> np.ndarray:
    """Orthogonal ``U`` with ``(Psi_+, Psi_-) = U (Psi_U1, Psi_U2)``.

    It does not depend on the separation: ``Psi_+ = (U1 + U2)/sqrt2`` and
    ``Psi_- = (U2 - U1)/sqrt2``.
    """
    r = 1.0 / math.sqrt(2.0)
    return np.array([[r, r], [-r, r]])


def unbiased_modes(delta: float, t1: float = 0.0) -> tuple[ModeFunction, ModeFunction]:
    coef = unbiased_coefficients(delta)
    packets = _packets(delta, t1)
    return tuple(ModeFunction.combine(row, packets) for row in coef)


def biased_modes(delta: float, t1: float = 0.0) -> tuple[ModeFunction, ModeFunction]:
    coef = biased_coefficients(delta)
    packets = _packets(delta, t1)
    return tuple(ModeFunction.combine(row, packets) for row in coef)


def symmetric_mode(delta: float, t1: float = 0.0) -> ModeFunction:
    """``Psi_+`` alone, defined down to ``delta = 0``."""
    coef = biased_coefficients(delta, allow_degenerate_minus=True)[0]
    return ModeFunction.combine(coef, _packets(delta, t1))


def kernel_integral_single(mode: ModeFunction, zeta: float, center: float) -> float:
    """``int Psi(t) exp(-zeta |t - center|) dt`` in closed form."""
    if zeta <= 0:
        raise ValueError("zeta must be positive")
    return math.fsum(c * exp_overlap(a, zeta, s - center) for c, a, s in mode.terms)


def kernel_integral_double(mode_k: ModeFunction, mode_l: ModeFunction, zeta: float) -> float:
    """``iint Psi_k(t) Psi_l(t') exp(-zeta |t - t'|) dt dt'`` in closed form."""
    if zeta <= 0:
        raise ValueError("zeta must be positive")
    return math.fsum(
        c1 * c2 * exp_triple_overlap(a1, zeta, a2, s1 - s2)
        for c1, a1, s1 in mode_k.terms
        for c2, a2, s2 in mode_l.terms
    )


def quadrature(
    fn: Callable[[float], float],
    domain: tuple[float, float] = (-math.inf, math.inf),
    *,
    points: Iterable[float] = (),
    decay: float | None = None,
    tol: float = 1e-12,
    limit: int = 400,
) -> float:
    """Adaptive Gauss-Kronrod integration of a piecewise-smooth integrand.

    Infinite ends are cut where ``exp(-decay |t - t_edge|)`` falls below
    ``1e-16``, measured from the outermost breakpoint.  The integrand is split
    at every breakpoint so kinks never sit inside a panel.
    """
    lo, hi = domain
    pts = sorted(set(float(p) for p in points))
    if math.isinf(lo) or math.isinf(hi):
        if decay is None:
            raise ValueError("an infinite domain needs the slowest decay constant")
        anchor_lo = pts[0] if pts else 0.0
        anchor_hi = pts[-1] if pts else 0.0
        if math.isinf(lo):
            lo = anchor_lo - TAIL_LOG / decay
        if math.isinf(hi):
            hi = anchor_hi + TAIL_LOG / decay
    edges = [lo] + [p for p in pts if lo < p < hi] + [hi]
    total = []
    for a, b in zip(edges[:-1], edges[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, err = integrate.quad(fn, a, b, epsabs=tol / len(edges), epsrel=0.0, limit=limit)
            except integrate.IntegrationWarning as exc:
                raise NonConvergence(f"panel [{a:g}, {b:g}]: {exc}") from exc
        if err > tol:
            raise NonConvergence(f"panel [{a:g}, {b:g}] error estimate {err:.2e} > {tol:.2e}")
        total.append(val)
    return math.fsum(total)


def quadrature_single(mode: ModeFunction, zeta: float, center: float, tol: float = 1e-13) -> float:
    """Quadrature counterpart of :func:`kernel_integral_single`."""
    return quadrature(
        lambda t: mode.value(t) * math.exp(-zeta * abs(t - center)),
        points=(*mode.centers, center),
        decay=min(mode.min_decay, zeta),
        tol=tol,
    )


def quadrature_double(mode_k: ModeFunction, mode_l: ModeFunction, zeta: float, tol: float = 1e-11) -> float:
    """Nested quadrature counterpart of :func:`kernel_integral_double`."""
    slow = min(mode_k.min_decay, mode_l.min_decay, zeta)

    def inner(t: float) -> float:
        return quadrature(
            lambda s: mode_l.value(s) * math.exp(-zeta * abs(t - s)),
            points=(*mode_l.centers, t),
            decay=min(mode_l.min_decay, zeta),
            tol=tol * 1e-2,
        )

    return quadrature(
        lambda t: mode_k.value(t) * inner(t),
        points=(*mode_k.centers, *mode_l.centers),
        decay=slow,
        tol=tol,
    )
