"""Covariance matrices of the tapped squeezed beam and its two trigger channels.

The state before detection lives on four modes: the two signal modes
spanning the heralded packets, and one trigger mode for each detector (B at
``t1``, C at ``t2``).  Every quadrature block is real and symmetric, so the
state is fixed by the pair ``Gamma(-eps)`` (x block, antisqueezed) and
``Gamma(+eps)`` (p block, squeezed).

Rates are in MHz, times in ns; ``zeta0 * t`` is formed with a factor 1e-3.
Everything below the parameter object works in units where ``zeta0 = 1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import AboveThreshold, CvKittenError, NotPositiveDefinite
from .temporal_modes import (
    ModeFunction,
    biased_modes,
    change_of_basis,
    kernel_integral_double,
    kernel_integral_single,
    symmetric_mode,
    unbiased_modes,
)

MHZ_NS = 1e-3
THIN_TRIGGER_LIMIT = 0.2


class InvalidParams(CvKittenError, ValueError):
    """A parameter set violates one of the model's preconditions."""


@dataclass(frozen=True)
class PhysicalParams:
    """Experimental knobs.  Rates in MHz, times in ns."""

    gamma_T: float = 58.8
    gamma_L: float = 1.2
    epsilon: float = 9.0
    R: float = 0.05
    R1: float = 0.5
    T: float = 1.0
    eta: float = 0.6
    nu: float = 1e-7
    eta_H: float = 0.96
    epsilon_x: float = 0.0
    delta: float = 30.0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        def need(ok: bool, what: str):
            if not ok:
                raise InvalidParams(what)

        for name, value in asdict(self).items():
            need(math.isfinite(value), f"{name} must be finite (got {value!r})")
        need(self.gamma_T > 0, "gamma_T > 0")
        need(self.gamma_L >= 0, "gamma_L >= 0")
        need(self.epsilon >= 0, "epsilon >= 0")
        need(self.epsilon < self.zeta0, "epsilon < zeta0 (below threshold)")
        need(0 <= self.epsilon_x <= self.epsilon, "0 <= epsilon_x <= epsilon")
        need(0 <= self.R <= 1, "R in [0, 1]")
        need(0 <= self.R1 <= 1, "R1 in [0, 1]")
        need(self.T >= 0, "T >= 0")
        need(0 < self.eta <= 1, "eta in (0, 1]")
        need(self.nu >= 0, "nu >= 0")
        need(0 < self.eta_H <= 1, "eta_H in (0, 1]")
        need(self.delta >= 0, "delta >= 0")
        if self.T_dimless >= THIN_TRIGGER_LIMIT:
            warnings.warn(
                f"zeta0*T = {self.T_dimless:.3g} is not small; higher trigger modes are ignored",
                RuntimeWarning,
                stacklevel=4,
            )

    @property
    def zeta0(self) -> float:
        return 0.5 * (self.gamma_T + self.gamma_L)

    @property
    def eps_ratio(self) -> float:
        return self.epsilon / self.zeta0

    @property
    def T_dimless(self) -> float:
        return self.zeta0 * self.T * MHZ_NS

    @property
    def delta_dimless(self) -> float:
        return self.zeta0 * self.delta * MHZ_NS

    def with_delta_dimless(self, delta_dimless: float) -> "PhysicalParams":
        return replace(self, delta=delta_dimless / (self.zeta0 * MHZ_NS))

    def replace(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)

    @classmethod
    def dimensionless(
        cls,
        eps_ratio: float,
        delta_dimless: float,
        *,
        zeta0: float = 30.0,
        gamma_T_ratio: float = 58.8 / 30.0,
        T_dimless: float = 0.03,
        epsilon_x_ratio: float = 0.0,
        **rest,
    ) -> "PhysicalParams":
        """Build from ``zeta0``-scaled quantities (``gamma_T_ratio = gamma_T / zeta0``)."""
        gamma_T = gamma_T_ratio * zeta0
        return cls(
            gamma_T=gamma_T,
            gamma_L=2.0 * zeta0 - gamma_T,
            epsilon=eps_ratio * zeta0,
            epsilon_x=epsilon_x_ratio * zeta0,
            T=T_dimless / (zeta0 * MHZ_NS),
            delta=delta_dimless / (zeta0 * MHZ_NS),
            **rest,
        )


@dataclass(frozen=True)
class ModeBasis:
    """A pair (or any number) of orthonormal signal modes plus the trigger times."""

    tag: str
    modes: tuple[ModeFunction, ...]
    t1: float = 0.0
    t2: float = 0.0

    @classmethod
    def build(cls, tag: str, delta_dimless: float) -> "ModeBasis":
        if tag == "unbiased":
            modes = unbiased_modes(delta_dimless)
        elif tag == "biased":
            modes = biased_modes(delta_dimless)
        elif tag == "plus":
            modes = (symmetric_mode(delta_dimless),)
        else:
            raise ValueError(f"unknown basis {tag!r}")
        return cls(tag, tuple(modes), 0.0, float(delta_dimless))


def zeta_of(epsilon_signed: float, params: PhysicalParams) -> float:
    """``zeta0 + eps`` in MHz."""
    z = params.zeta0 + epsilon_signed
    if z <= 0:
        raise AboveThreshold(f"zeta(eps) = {z:g} <= 0")
    return z


def noise_dressed_coupling(epsilon_signed: float, params: PhysicalParams) -> float:
    """``(eps - sgn(eps) eps_x) gamma_T / zeta(eps)`` in units of ``zeta0``."""
    if epsilon_signed == 0:
        return 0.0
    eff = epsilon_signed - math.copysign(params.epsilon_x, epsilon_signed)
    return eff * params.gamma_T / (zeta_of(epsilon_signed, params) * params.zeta0)


def time_correlation(t: float, t_prime: float, params: PhysicalParams) -> tuple[float, float]:
    """Normal and anomalous correlators ``<A^dag(t) A(t')>``, ``<A(t) A(t')>``.

    Times are dimensionless; results are in units of ``zeta0``.
    """
    tau = abs(t - t_prime)
    z0 = params.zeta0
    zm = zeta_of(-params.epsilon, params) / z0
    zp = zeta_of(params.epsilon, params) / z0
    pref = (params.epsilon - params.epsilon_x) * params.gamma_T / (4.0 * z0 * z0)
    em = math.exp(-zm * tau) / zm
    ep = math.exp(-zp * tau) / zp
    return pref * (em - ep), pref * (em + ep)


def build_M(epsilon_signed: float, basis: Sequence[ModeFunction], params: PhysicalParams) -> np.ndarray:
    n = len(basis)
    c = noise_dressed_coupling(epsilon_signed, params)
    if c == 0.0:
        return np.eye(n)
    z = zeta_of(epsilon_signed, params) / params.zeta0
    out = np.eye(n)
    for k in range(n):
        for l in range(k, n):
            out[k, l] -= c * kernel_integral_double(basis[k], basis[l], z)
            out[l, k] = out[k, l]
    return out


def build_xi(
    epsilon_signed: float, basis: Sequence[ModeFunction], trigger_center: float, params: PhysicalParams
) -> np.ndarray:
    c = noise_dressed_coupling(epsilon_signed, params)
    scale = math.sqrt((1.0 - params.R) * params.R) * c * math.sqrt(params.T_dimless)
    if scale == 0.0:
        return np.zeros(len(basis))
    z = zeta_of(epsilon_signed, params) / params.zeta0
    return scale * np.array([kernel_integral_single(m, z, trigger_center) for m in basis])


def build_b(epsilon_signed: float, params: PhysicalParams) -> tuple[float, float]:
    """Trigger-mode corrections ``(b_pp, b_pm)``.

    ``b_pp = -R c T`` carries the detector window ``T`` (in ``zeta0`` units):
    the trigger mode is the box average over the window, so its excess
    variance scales with ``T`` like ``xi**2`` does.
    """
    c = noise_dressed_coupling(epsilon_signed, params)
    b_pp = -params.R * c * params.T_dimless
    if b_pp == 0.0:
        return 0.0, 0.0
    z = zeta_of(epsilon_signed, params) / params.zeta0
    return b_pp, b_pp * math.exp(-z * params.delta_dimless)


@dataclass(frozen=True)
class QuadratureBlock:
    """Ingredients of one quadrature block (fixed sign of eps)."""

    epsilon_signed: float
    M: np.ndarray
    xi_B: np.ndarray
    xi_C: np.ndarray
    b_pp: float
    b_pm: float
    R: float
    R1: float

    @property
    def gamma_AA(self) -> np.ndarray:
        n = self.M.shape[0]
        return self.R * np.eye(n) + (1.0 - self.R) * self.M

    @property
    def gamma(self) -> np.ndarray:
        n = self.M.shape[0]
        r1 = self.R1
        g = np.empty((n + 2, n + 2))
        g[:n, :n] = self.gamma_AA
        g[:n, n] = g[n, :n] = math.sqrt(1.0 - r1) * self.xi_B
        g[:n, n + 1] = g[n + 1, :n] = math.sqrt(r1) * self.xi_C
        g[n, n] = 1.0 + (1.0 - r1) * self.b_pp
        g[n + 1, n + 1] = 1.0 + r1 * self.b_pp
        g[n, n + 1] = g[n + 1, n] = math.sqrt((1.0 - r1) * r1) * self.b_pm
        return g


def build_block(epsilon_signed: float, basis: ModeBasis, params: PhysicalParams) -> QuadratureBlock:
    b_pp, b_pm = build_b(epsilon_signed, params)
    return QuadratureBlock(
        epsilon_signed=epsilon_signed,
        M=build_M(epsilon_signed, basis.modes, params),
        xi_B=build_xi(epsilon_signed, basis.modes, basis.t1, params),
        xi_C=build_xi(epsilon_signed, basis.modes, basis.t2, params),
        b_pp=b_pp,
        b_pm=b_pm,
        R=params.R,
        R1=params.R1,
    )


def check_positive_definite(mat: np.ndarray, label: str = "covariance") -> None:
    try:
        np.linalg.cholesky(mat)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"{label} is not positive definite") from exc


def build_gamma(epsilon_signed: float, basis: ModeBasis, params: PhysicalParams) -> np.ndarray:
    g = build_block(epsilon_signed, basis, params).gamma
    check_positive_definite(g, f"Gamma({'+' if epsilon_signed >= 0 else '-'}eps)")
    return g


@dataclass(frozen=True)
class CovarianceSet:
    minus: QuadratureBlock
    plus: QuadratureBlock
    basis: ModeBasis
    params: PhysicalParams = field(repr=False)

    @property
    def gamma_minus(self) -> np.ndarray:
        return self.minus.gamma

    @property
    def gamma_plus(self) -> np.ndarray:
        return self.plus.gamma

    @property
    def n_signal(self) -> int:
        return len(self.basis.modes)


def build_covariances(params: PhysicalParams, basis: ModeBasis | str = "biased") -> CovarianceSet:
    if isinstance(basis, str):
        basis = ModeBasis.build(basis, params.delta_dimless)
    cs = CovarianceSet(
        minus=build_block(-params.epsilon, basis, params),
        plus=build_block(params.epsilon, basis, params),
        basis=basis,
        params=params,
    )
    check_positive_definite(cs.gamma_minus, "Gamma(-eps)")
    check_positive_definite(cs.gamma_plus, "Gamma(+eps)")
    return cs


def char_fn_abc(u, v, covariances: CovarianceSet) -> float:
    """Gaussian characteristic function of the four-mode state."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return float(np.exp(-0.25 * u @ covariances.gamma_minus @ u - 0.25 * v @ covariances.gamma_plus @ v))


def rotate_signal_block(gamma_aa: np.ndarray, U: np.ndarray | None = None) -> np.ndarray:
    """Map a signal block from the unbiased to the biased basis: ``U G U^T``."""
    U = change_of_basis() if U is None else U
    return U @ gamma_aa @ U.T
