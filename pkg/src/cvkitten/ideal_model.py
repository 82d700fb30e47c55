"""Lossless two-photon-subtraction amplitudes (no detector model).

With perfect, instantaneous detectors the heralded state is a squeezed
version of a three-component superposition.  The amplitudes below are the
bracketed coefficients in ``zeta0 = 1`` units; the squeezing operator around
them is not applied, so they serve as a coefficient oracle for limits of the
full model rather than as a state simulator.

Fock labels are ``(n1, n2)`` for the unbiased pair ``(U1, U2)`` and
``(n_plus, n_minus)`` for the biased pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .temporal_modes import change_of_basis, overlap_I

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class IdealAmplitudes:
    basis: str
    amplitudes: dict  # Fock label -> unnormalized amplitude
    eps_ratio: float
    delta_dimless: float

    @property
    def norm(self) -> float:
        return math.sqrt(math.fsum(c * c for c in self.amplitudes.values()))

    @property
    def normalized(self) -> dict:
        n = self.norm
        return {k: c / n for k, c in self.amplitudes.items()}

    def fock_vector(self, cutoff: int = 3) -> np.ndarray:
        """Two-mode state as a ``cutoff x cutoff`` array indexed by photon numbers."""
        out = np.zeros((cutoff, cutoff))
        for (n1, n2), c in self.amplitudes.items():
            out[n1, n2] += c
        return out


def _check_ratio(eps_ratio: float) -> None:
    if not 0.0 < eps_ratio < 1.0:
        raise ValueError("eps_ratio must lie in (0, 1)")


def ideal_unbiased_amplitudes(eps_ratio: float, delta_dimless: float) -> IdealAmplitudes:
    """``r^2 (|1,1> + I (|2,0> + |0,2>)/sqrt2) + r e^{-delta} |0,0>`` with ``r = eps/zeta0``."""
    _check_ratio(eps_ratio)
    r, d = eps_ratio, delta_dimless
    c11 = r * r
    c2 = overlap_I(d) * c11 / SQRT2
    return IdealAmplitudes(
        "unbiased",
        {(1, 1): c11, (2, 0): c2, (0, 2): c2, (0, 0): r * math.exp(-d)},
        r,
        d,
    )


def ideal_biased_amplitudes(eps_ratio: float, delta_dimless: float) -> IdealAmplitudes:
    _check_ratio(eps_ratio)
    r, d = eps_ratio, delta_dimless
    i = overlap_I(d)
    return IdealAmplitudes(
        "biased",
        {(2, 0): r * r * (1.0 + i) / SQRT2, (0, 2): -r * r * (1.0 - i) / SQRT2, (0, 0): r * math.exp(-d)},
        r,
        d,
    )


def rotate_fock(state: np.ndarray, U: np.ndarray) -> np.ndarray:
    """Apply the passive mode change ``b_j^dag = sum_k U[j, k] a_k^dag`` to a Fock array.

    ``state[n1, n2]`` are amplitudes in the ``a`` modes; the result holds the
    amplitudes in the ``b`` modes.  Works by expanding each
    ``(a1^dag)^n1 (a2^dag)^n2 / sqrt(n1! n2!)`` in powers of ``b^dag``.
    """
    # a_k^dag = sum_j U[j, k] b_j^dag for orthogonal U
    cutoff = state.shape[0]
    out = np.zeros_like(state, dtype=float)
    for n1, n2 in product(range(cutoff), repeat=2):
        c = state[n1, n2]
        if c == 0.0:
            continue
        # polynomial in (b1^dag, b2^dag): dict (m1, m2) -> coefficient
        poly = {(0, 0): c / math.sqrt(math.factorial(n1) * math.factorial(n2))}
        for k, power in ((0, n1), (1, n2)):
            for _ in range(power):
                nxt: dict = {}
                for (m1, m2), v in poly.items():
                    nxt[(m1 + 1, m2)] = nxt.get((m1 + 1, m2), 0.0) + v * U[0, k]
                    nxt[(m1, m2 + 1)] = nxt.get((m1, m2 + 1), 0.0) + v * U[1, k]
                poly = nxt
        for (m1, m2), v in poly.items():
            out[m1, m2] += v * math.sqrt(math.factorial(m1) * math.factorial(m2))
    return out


def basis_rotation_residual(eps_ratio: float, delta_dimless: float) -> float:
    """Max deviation between rotated unbiased amplitudes and the biased amplitudes."""
    unb = ideal_unbiased_amplitudes(eps_ratio, delta_dimless).fock_vector()
    bia = ideal_biased_amplitudes(eps_ratio, delta_dimless).fock_vector()
    return float(np.max(np.abs(rotate_fock(unb, change_of_basis()) - bia)))


@dataclass(frozen=True)
class PhiEDecomposition:
    nu_e: float
    N: float
    c2: float
    c0: float


def phi_e_decomposition(eps_ratio: float, delta_dimless: float) -> PhiEDecomposition:
    """Even-kitten kernel ``|phi_e> = (r (1+delta) |2> + |0>/sqrt2) / nu_e``."""
    _check_ratio(eps_ratio)
    r, d = eps_ratio, delta_dimless
    nu_e = math.sqrt(r * r * (1.0 + d) ** 2 + 0.5)
    norm = 1.0 / math.sqrt(r * r + math.exp(-2.0 * d) * (nu_e * nu_e + 0.5))
    return PhiEDecomposition(nu_e, norm, r * (1.0 + d) / nu_e, 1.0 / (SQRT2 * nu_e))


def regrouped_state(eps_ratio: float, delta_dimless: float, *, weight_scale: float = 1.0 / SQRT2) -> np.ndarray:
    """``N [ r |1,1> + w e^{-delta} nu_e (|phi_e,0> + |0,phi_e>) ]`` as a Fock array.

    With ``w = 1/sqrt2`` this is the unbiased state divided by ``eps`` and
    ``N`` normalizes it exactly.  ``w = 1`` scales the even components by
    ``sqrt2`` and gives a different state.
    """
    dec = phi_e_decomposition(eps_ratio, delta_dimless)
    r, d = eps_ratio, delta_dimless
    out = np.zeros((3, 3))
    out[1, 1] = r
    w = weight_scale * math.exp(-d) * dec.nu_e
    out[2, 0] += w * dec.c2
    out[0, 2] += w * dec.c2
    out[0, 0] += 2.0 * w * dec.c0
    return dec.N * out


def ideal_single_photon_norm(eps_ratio: float, R: float = 0.05) -> float:
    """Amplitude scale ``sqrt(R) eps / sqrt(zeta0)`` of a single subtraction."""
    if not 0.0 <= eps_ratio < 1.0:
        raise ValueError("eps_ratio must lie in [0, 1)")
    return math.sqrt(R) * eps_ratio


def regime(delta_dimless: float, threshold: float = 1e-2) -> str:
    """Label for the dominant kitten type, thresholding the packet overlap."""
    i = overlap_I(delta_dimless)
    if i < threshold:
        return "odd-kitten regime"
    if 1.0 - i < threshold:
        return "even-kitten regime"
    return "intermediate"
