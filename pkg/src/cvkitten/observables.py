"""Wigner functions, photon numbers and squeezing spectra of the heralded state.

Quadratures follow ``X = (A + A^dag)/sqrt(2)``, so the vacuum Wigner function
is ``exp(-x^2 - p^2)/pi`` and a term with covariance pair ``(g-, g+)``
contributes ``exp(-x^2/g- - p^2/g+) / (pi sqrt(g- g+))``.

Every observable is a signed sum over the four mixture terms.  Each helper
below computes the log-ratio ``phi_i`` of term ``i`` against term 1 and hands
it to :meth:`GaussianMixture.combine`, which avoids the catastrophic
cancellation between the weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import erfc

from .conditioning import GaussianMixture, MixtureBlock, conditioned_state
from .errors import SingularCovariance
from .gaussian_state import ModeBasis, PhysicalParams, build_M, zeta_of
from .temporal_modes import ModeFunction, overlap_I

TAIL_MASS = 1e-6
MAX_EXTENT = 40.0


@dataclass(frozen=True)
class GridSpec:
    extent: float = 5.0
    resolution: int = 201

    def axis(self) -> np.ndarray:
        return np.linspace(-self.extent, self.extent, self.resolution)


@dataclass
class WignerGrid:
    x_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray  # values[i_p, i_x]
    mode: int | str = 0
    basis: str = ""
    metadata: dict = field(default_factory=dict)

    def integral(self) -> float:
        return float(trapezoid(trapezoid(self.values, self.x_axis, axis=1), self.p_axis))

    @property
    def origin(self) -> float:
        ix = int(np.argmin(np.abs(self.x_axis)))
        ip = int(np.argmin(np.abs(self.p_axis)))
        return float(self.values[ip, ix])


@dataclass(frozen=True)
class PhotonNumbers:
    n_plus: float
    n_minus: float
    n_u1: float
    n_u2: float


def _diag_terms(block: MixtureBlock, k: int) -> tuple[float, float, float, float]:
    g1 = float(block.base[k, k])
    return g1, float(block.d2[k, k]), float(block.d3[k, k]), float(block.d4[k, k])


def _single_phi(g1: float, d: float, sq):
    """log of ``exp(-s/(g1+d)) / sqrt(g1+d)`` relative to ``exp(-s/g1) / sqrt(g1)``."""
    return sq * d / (g1 * (g1 + d)) - 0.5 * math.log1p(d / g1)


def wigner_points(mixture: GaussianMixture, mode_index: int, x, p):
    """Single-mode Wigner function at arbitrary (broadcastable) points."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    gm = _diag_terms(mixture.minus, mode_index)
    gp = _diag_terms(mixture.plus, mode_index)
    x2, p2 = x * x, p * p
    phis = [_single_phi(gm[0], gm[i], x2) + _single_phi(gp[0], gp[i], p2) for i in (1, 2, 3)]
    base = np.exp(-x2 / gm[0] - p2 / gp[0]) / (math.pi * math.sqrt(gm[0] * gp[0]))
    return base * mixture.combine(*phis)


def wigner_origin(mixture: GaussianMixture, mode_index: int) -> float:
    return float(wigner_points(mixture, mode_index, 0.0, 0.0))


def tail_mass(mixture: GaussianMixture, mode_index: int, extent: float) -> float:
    """Probability mass of the single-mode marginal outside ``[-L, L]^2``."""
    gm = _diag_terms(mixture.minus, mode_index)
    gp = _diag_terms(mixture.plus, mode_index)

    def log_erf(g: float) -> float:
        return math.log1p(-erfc(extent / math.sqrt(g)))

    base_m, base_p = log_erf(gm[0]), log_erf(gp[0])
    phis = [log_erf(gm[0] + gm[i]) - base_m + log_erf(gp[0] + gp[i]) - base_p for i in (1, 2, 3)]
    inside = math.exp(base_m + base_p) * float(mixture.combine(*phis))
    return 1.0 - inside


def wigner_single(
    mixture: GaussianMixture, mode_index: int = 0, grid_spec: GridSpec | None = None, *, auto_extend: bool = True
) -> WignerGrid:
    spec = grid_spec or GridSpec()
    if auto_extend:
        step = 2.0 * spec.extent / (spec.resolution - 1)
        while tail_mass(mixture, mode_index, spec.extent) > TAIL_MASS and spec.extent < MAX_EXTENT:
            extent = spec.extent + 1.0
            spec = GridSpec(extent, int(round(2.0 * extent / step)) + 1)
    x = spec.axis()
    p = spec.axis()
    values = wigner_points(mixture, mode_index, x[None, :], p[:, None])
    return WignerGrid(
        x,
        p,
        values,
        mode=mode_index,
        basis=mixture.basis,
        metadata={"p_det": mixture.p_det, "extent": spec.extent, "resolution": spec.resolution},
    )


def _two_mode_pieces(block: MixtureBlock):
    base = block.base
    if abs(np.linalg.det(base)) < 1e-14:
        raise SingularCovariance("term 1 covariance is singular")
    chol = np.linalg.cholesky(base)
    inv_base = np.linalg.inv(base)
    out = []
    for d in (block.d2, block.d3, block.d4):
        g = base + d
        if abs(np.linalg.det(g)) < 1e-14:
            raise SingularCovariance("conditioned term covariance is singular")
        # Gi^-1 - G1^-1 = -Gi^-1 D G1^-1 ; log det(Gi)/det(G1) from eig(L^-1 D L^-T)
        diff = -np.linalg.solve(g, d) @ inv_base
        diff = 0.5 * (diff + diff.T)
        w = np.linalg.solve(chol, np.linalg.solve(chol, d).T)
        logdet = float(np.sum(np.log1p(np.linalg.eigvalsh(0.5 * (w + w.T)))))
        out.append((diff, logdet))
    return inv_base, float(np.linalg.det(base)), out


def wigner_two_mode(mixture: GaussianMixture, points) -> np.ndarray:
    """Two-mode Wigner function at rows ``(x1, p1, x2, p2)``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    xs = pts[:, [0, 2]]
    ps = pts[:, [1, 3]]
    inv_m, det_m, pieces_m = _two_mode_pieces(mixture.minus)
    inv_p, det_p, pieces_p = _two_mode_pieces(mixture.plus)

    def quad(mat, v):
        return np.einsum("ni,ij,nj->n", v, mat, v)

    phis = []
    for (dm, ldm), (dp, ldp) in zip(pieces_m, pieces_p):
        phis.append(-quad(dm, xs) - quad(dp, ps) - 0.5 * (ldm + ldp))
    base = np.exp(-quad(inv_m, xs) - quad(inv_p, ps)) / (math.pi**2 * math.sqrt(det_m * det_p))
    return base * mixture.combine(*phis)


def mean_photon_general(mixture: GaussianMixture, mode_index: int) -> float:
    """``sum_i N_i (G_i(-)_kk + G_i(+)_kk) / (4 P_det) - 1/2``."""
    lw = mixture.log_weights
    k = mode_index
    corr = 0.0
    for blk in (mixture.minus, mixture.plus):
        corr += lw.weighted_corrections(blk.d2[k, k], blk.d3[k, k], blk.e4[k, k])
    base = 0.25 * (mixture.minus.base[k, k] + mixture.plus.base[k, k]) - 0.5
    return float(base + corr / (4.0 * mixture.p_det))


def mean_photon_fd(mixture: GaussianMixture, mode_index: int, step: float = 1e-4) -> float:
    """Photon number from central second differences of the characteristic function."""
    n = mixture.n_modes
    e = np.zeros(n)
    e[mode_index] = step
    zero = np.zeros(n)
    c0 = mixture.char_fn(zero, zero)
    cuu = (mixture.char_fn(e, zero) - 2.0 * c0 + mixture.char_fn(-e, zero)) / step**2
    cvv = (mixture.char_fn(zero, e) - 2.0 * c0 + mixture.char_fn(zero, -e)) / step**2
    return -0.5 * (cuu + cvv) - 0.5


def photon_numbers(params: PhysicalParams) -> PhotonNumbers:
    biased = conditioned_state(params, "biased")
    unbiased = conditioned_state(params, "unbiased")
    return PhotonNumbers(
        n_plus=mean_photon_general(biased, 0),
        n_minus=mean_photon_general(biased, 1),
        n_u1=mean_photon_general(unbiased, 0),
        n_u2=mean_photon_general(unbiased, 1),
    )


def mean_photon_closed(sign: int, z_param: float, delta_dimless: float) -> float:
    """Small-window closed form for ``<n_+>`` (sign=+1) or ``<n_->`` (sign=-1)."""
    s = 1.0 if sign > 0 else -1.0
    d = float(delta_dimless)
    i = overlap_I(d)
    e1 = math.exp(-d)
    e2 = math.exp(-2.0 * d)
    one = 1.0 + s * i
    f = 1.5 * one + s * 0.5 * d * d * e1
    g = 5.0 * one + s * e1 * (2.0 * d * d + d**3 / 3.0)
    g1 = (1.0 + i * i) * g + 2.0 * one * f * f
    g2 = e2 * g + 2.0 * one**3 + s * 4.0 * one * e1 * f * f
    z2 = z_param * z_param
    return (z2 * z2 * g1 + z2 * g2) / (2.0 * one * (z2 * (1.0 + i * i) + e2))


@dataclass(frozen=True)
class SqueezingPoint:
    epsilon_ratio: float
    f: float
    squeeze_dB: float
    antisqueeze_dB: float


def squeezing_curve(f_mode: float, epsilon_range: Iterable[float], params: PhysicalParams) -> list[SqueezingPoint]:
    """Quadrature variances of the mode ``sqrt(f) exp(-f|t|)`` in the untapped beam.

    ``f_mode`` is a rate in the same unit as ``params`` (MHz); the entries of
    ``epsilon_range`` are ``eps/zeta0``.
    """
    mode = ModeFunction.exponential(0.0, f_mode / params.zeta0)
    out = []
    for ratio in epsilon_range:
        eps = ratio * params.zeta0
        zeta_of(-eps, params)
        p = replace(params, epsilon=eps, epsilon_x=min(params.epsilon_x, eps), R=0.0)
        sq = build_M(eps, [mode], p)[0, 0]
        anti = build_M(-eps, [mode], p)[0, 0]
        out.append(SqueezingPoint(float(ratio), float(f_mode), 10.0 * math.log10(sq), 10.0 * math.log10(anti)))
    return out
