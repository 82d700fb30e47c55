"""Heralding on two on/off clicks.

Conditioning the four-mode Gaussian state on "on" results at both trigger
detectors leaves a signed sum of four Gaussians on the signal modes,

    C(rho_A; u, v) = sum_i N_i exp(-u.G_i(-).u/4 - v.G_i(+).v/4) / P_det .

The four weights nearly cancel: for realistic taps ``P_det`` is 1e-8 while
each ``|N_i|`` is about 1.  Summing them directly leaves only a handful of
correct digits, so the mixture keeps the exponents of the weights and the
differences ``G_i - G_1`` and recombines them with ``expm1``/``log1p``
(see :meth:`GaussianMixture.combine`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateConditioning, NegativePdet
from .gaussian_state import (
    CovarianceSet,
    PhysicalParams,
    QuadratureBlock,
    build_b,
    build_covariances,
    check_positive_definite,
)

@dataclass(frozen=True)
class PovmCharacteristic:
    """``C(Pi_on; u, v) = delta_weight * delta(u) delta(v) + coef * exp(-width (u^2 + v^2))``."""

    delta_weight: float
    coef: float
    width: float

    def gaussian_part(self, u, v):
        return self.coef * np.exp(-self.width * (np.asarray(u) ** 2 + np.asarray(v) ** 2))


def povm_on_char(params: PhysicalParams) -> PovmCharacteristic:
    return PovmCharacteristic(
        delta_weight=2.0 * math.pi,
        coef=-math.exp(-params.nu) / params.eta,
        width=(2.0 - params.eta) / (4.0 * params.eta),
    )


def _b_from_block(block: QuadratureBlock, eta: float) -> tuple[float, float, float, float]:
    r1 = block.R1
    b2 = 2.0 / eta + r1 * block.b_pp
    b3 = 2.0 / eta + (1.0 - r1) * block.b_pp
    b4 = b2 * b3 - (1.0 - r1) * r1 * block.b_pm**2
    return 1.0, b2, b3, b4


def mixture_b(epsilon_signed: float, params: PhysicalParams) -> tuple[float, float, float, float]:
    """Normalizers ``(b1, b2, b3, b4)`` for one quadrature block.

    ``b2`` and ``b3`` combine the Gaussian part of the detector POVM (width
    ``2/eta - 1``) with the trigger-mode variance ``1 + R1 b_pp`` (resp.
    ``1 + (1-R1) b_pp``): ``b2 = 2/eta + R1 b_pp``.
    """
    b_pp, b_pm = build_b(epsilon_signed, params)
    r1 = params.R1
    b2 = 2.0 / params.eta + r1 * b_pp
    b3 = 2.0 / params.eta + (1.0 - r1) * b_pp
    return 1.0, b2, b3, b2 * b3 - (1.0 - r1) * r1 * b_pm**2


def _check_b(bm, bp) -> None:
    for i in (1, 2, 3):
        if not (bm[i] > 0 and bp[i] > 0):
            raise DegenerateConditioning(
                f"b^({i + 1})(-eps) * b^({i + 1})(+eps) = {bm[i] * bp[i]:.3g} with non-positive factor"
            )


@dataclass(frozen=True)
class LogWeights:
    """Exponents of the mixture weights.

    ``N2 = -exp(lam2 - nu)``, ``N3 = -exp(lam3 - nu)`` and
    ``N4 = exp(lam2 + lam3 + mu - 2 nu)``; every exponent is small, so the
    weights and their near-cancelling sums can be formed with ``expm1``.
    """

    lam2: float
    lam3: float
    mu: float
    nu: float

    @property
    def weights(self) -> tuple[float, float, float, float]:
        return (
            1.0,
            -math.exp(self.lam2 - self.nu),
            -math.exp(self.lam3 - self.nu),
            math.exp(self.lam2 + self.lam3 + self.mu - 2.0 * self.nu),
        )

    def ratio_sum(self, phi2, phi3, phi4):
        """``1 + sum_{i>1} N_i exp(phi_i)`` without cancellation."""
        a2 = self.lam2 - self.nu + phi2
        a3 = self.lam3 - self.nu + phi3
        chi = phi4 - phi2 - phi3
        return np.expm1(a2) * np.expm1(a3) + np.exp(a2 + a3) * np.expm1(self.mu + chi)

    @property
    def p_det(self) -> float:
        return float(self.ratio_sum(0.0, 0.0, 0.0))

    def weighted_corrections(self, d2, d3, e4):
        """``sum_i N_i (G_i - G_1)`` given ``D2``, ``D3`` and ``E4 = D4 - D2 - D3``."""
        _, n2, n3, n4 = self.weights
        return (
            d2 * (-n2 * math.expm1(self.lam3 - self.nu + self.mu))
            + d3 * (-n3 * math.expm1(self.lam2 - self.nu + self.mu))
            + n4 * e4
        )


def _log_weights(b_pairs, params: PhysicalParams) -> LogWeights:
    """Exponents from the ``(b_pp, b_pm)`` pair of each quadrature block."""
    eta, r1 = params.eta, params.R1
    lam2 = lam3 = mu = 0.0
    for b_pp, b_pm in b_pairs:
        x2 = 0.5 * eta * r1 * b_pp
        x3 = 0.5 * eta * (1.0 - r1) * b_pp
        if x2 <= -1.0 or x3 <= -1.0:
            raise DegenerateConditioning("trigger normalizer b^(2) or b^(3) is not positive")
        q = (1.0 - r1) * r1 * b_pm**2
        y = -0.25 * eta * eta * q / ((1.0 + x2) * (1.0 + x3))
        if y <= -1.0:
            raise DegenerateConditioning("trigger normalizer b^(4) is not positive")
        lam2 -= 0.5 * math.log1p(x2)
        lam3 -= 0.5 * math.log1p(x3)
        mu -= 0.5 * math.log1p(y)
    return LogWeights(lam2, lam3, mu, params.nu)


def mixture_weights(params: PhysicalParams) -> tuple[float, float, float, float]:
    """``(N1, N2, N3, N4)``; they do not depend on the signal basis."""
    lw = _log_weights([build_b(eps, params) for eps in (-params.epsilon, params.epsilon)], params)
    if not lw.p_det > 0:
        raise NegativePdet(f"P_det = {lw.p_det:.3g}")
    return lw.weights


def _block_j(blk: QuadratureBlock, b) -> tuple[np.ndarray, ...]:
    r1 = blk.R1
    cc = np.outer(blk.xi_C, blk.xi_C)
    bb = np.outer(blk.xi_B, blk.xi_B)
    bc = 0.5 * (np.outer(blk.xi_B, blk.xi_C) + np.outer(blk.xi_C, blk.xi_B))
    j1 = np.zeros_like(cc)
    j2 = r1 * cc
    j3 = (1.0 - r1) * bb
    j4 = r1 * b[2] * cc + (1.0 - r1) * b[1] * bb - 2.0 * (1.0 - r1) * r1 * blk.b_pm * bc
    return j1, j2, j3, j4


def mixture_j(epsilon_signed: float, covariances: CovarianceSet) -> tuple[np.ndarray, ...]:
    blk = covariances.minus if epsilon_signed < 0 else covariances.plus
    return _block_j(blk, _b_from_block(blk, covariances.params.eta))


@dataclass(frozen=True)
class MixtureBlock:
    """One quadrature block of the conditioned state.

    ``base`` is ``G_1``, ``d2``/``d3`` are ``G_2 - G_1`` and ``G_3 - G_1`` and
    ``e4 = G_4 - G_1 - d2 - d3`` is stored separately because it is much
    smaller than either and is needed exactly.
    """

    base: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    e4: np.ndarray

    @property
    def d4(self) -> np.ndarray:
        return self.d2 + self.d3 + self.e4

    @property
    def gammas(self) -> tuple[np.ndarray, ...]:
        return (self.base, self.base + self.d2, self.base + self.d3, self.base + self.d4)

    def corrections(self) -> tuple[np.ndarray, ...]:
        return (np.zeros_like(self.base), self.d2, self.d3, self.d4)

    def dressed(self, eta_H: float) -> "MixtureBlock":
        n = self.base.shape[0]
        return MixtureBlock(
            (1.0 - eta_H) * np.eye(n) + eta_H * self.base,
            eta_H * self.d2,
            eta_H * self.d3,
            eta_H * self.e4,
        )


def _mixture_block(blk: QuadratureBlock, eta: float) -> MixtureBlock:
    b = _b_from_block(blk, eta)
    r1 = blk.R1
    xb, xc = blk.xi_B, blk.xi_C
    cc = np.outer(xc, xc)
    bb = np.outer(xb, xb)
    bc = 0.5 * (np.outer(xb, xc) + np.outer(xc, xb))
    q = (1.0 - r1) * r1 * blk.b_pm**2
    d2 = -r1 * cc / b[1]
    d3 = -(1.0 - r1) * bb / b[2]
    e4 = -q * (r1 * cc / (b[1] * b[3]) + (1.0 - r1) * bb / (b[2] * b[3]))
    e4 = e4 + 2.0 * (1.0 - r1) * r1 * blk.b_pm * bc / b[3]
    return MixtureBlock(blk.gamma_AA, d2, d3, e4)


@dataclass(frozen=True)
class GaussianMixture:
    """Conditioned signal state as a signed sum of four Gaussians."""

    minus: MixtureBlock
    plus: MixtureBlock
    log_weights: LogWeights
    basis: str
    params: PhysicalParams | None = field(default=None, repr=False)
    dressed_with: float = 1.0

    @property
    def weights(self) -> tuple[float, float, float, float]:
        return self.log_weights.weights

    @property
    def p_det(self) -> float:
        return self.log_weights.p_det

    @property
    def n_modes(self) -> int:
        return self.minus.base.shape[0]

    @property
    def terms(self) -> list[tuple[float, np.ndarray, np.ndarray]]:
        return list(zip(self.weights, self.minus.gammas, self.plus.gammas))

    def combine(self, phi2, phi3, phi4):
        """``sum_i N_i exp(phi_i) / P_det`` where ``phi_i`` is each term's log-ratio to term 1."""
        return self.log_weights.ratio_sum(phi2, phi3, phi4) / self.p_det

    def char_fn(self, u, v) -> float:
        """Characteristic function at real ``u`` (x block) and ``v`` (p block)."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)

        def form(name: str) -> float:
            return -0.25 * u @ getattr(self.minus, name) @ u - 0.25 * v @ getattr(self.plus, name) @ v

        phi2, phi3 = form("d2"), form("d3")
        return math.exp(form("base")) * float(self.combine(phi2, phi3, phi2 + phi3 + form("e4")))

    def reduced(self, index: int) -> "GaussianMixture":
        """Marginal on one signal mode."""
        sl = np.ix_([index], [index])

        def cut(b: MixtureBlock) -> MixtureBlock:
            return MixtureBlock(b.base[sl], b.d2[sl], b.d3[sl], b.e4[sl])

        return replace(self, minus=cut(self.minus), plus=cut(self.plus))


def _is_trivial(params: PhysicalParams) -> bool:
    return params.epsilon == 0.0 or params.epsilon_x == params.epsilon


def condition(covariances: CovarianceSet, params: PhysicalParams | None = None) -> GaussianMixture:
    params = covariances.params if params is None else params
    n = covariances.n_signal
    if _is_trivial(params):
        # no squeezing coupling: the triggers only see fake counts
        zero = np.zeros((n, n))
        blk = MixtureBlock(np.eye(n), zero, zero, zero)
        mix = GaussianMixture(blk, blk, LogWeights(0.0, 0.0, 0.0, params.nu), covariances.basis.tag, params)
    else:
        _check_b(_b_from_block(covariances.minus, params.eta), _b_from_block(covariances.plus, params.eta))
        mix = GaussianMixture(
            _mixture_block(covariances.minus, params.eta),
            _mixture_block(covariances.plus, params.eta),
            _log_weights([(b.b_pp, b.b_pm) for b in (covariances.minus, covariances.plus)], params),
            covariances.basis.tag,
            params,
        )
    if not mix.p_det > 0:
        raise NegativePdet(f"P_det = {mix.p_det:.3g} (nu = {params.nu:g})")
    for gm, gp in zip(mix.minus.gammas, mix.plus.gammas):
        check_positive_definite(gm, "conditioned Gamma(-eps)")
        check_positive_definite(gp, "conditioned Gamma(+eps)")
    return mix


def dress_homodyne(mixture: GaussianMixture, eta_H: float) -> GaussianMixture:
    if not 0.0 < eta_H <= 1.0:
        raise ValueError("eta_H must lie in (0, 1]")
    if eta_H == 1.0:
        return mixture
    return replace(
        mixture,
        minus=mixture.minus.dressed(eta_H),
        plus=mixture.plus.dressed(eta_H),
        dressed_with=mixture.dressed_with * eta_H,
    )


def conditioned_state(
    params: PhysicalParams, basis: str = "biased", *, dressed: bool = False
) -> GaussianMixture:
    """Shortcut: build covariances, condition, and optionally apply ``eta_H``."""
    mix = condition(build_covariances(params, basis), params)
    return dress_homodyne(mix, params.eta_H) if dressed else mix
