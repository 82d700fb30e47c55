"""Acceptance criteria.  Each test prints one PASS/FAIL line at the stated tolerance.

A failing criterion is reported as it is; tolerances are not relaxed to make
a criterion pass.
"""

import math
import time

import numpy as np
import pytest
from scipy.integrate import trapezoid

from cvkitten.conditioning import condition, conditioned_state
from cvkitten.gaussian_state import PhysicalParams, build_covariances
from cvkitten.ideal_model import basis_rotation_residual, phi_e_decomposition
from cvkitten.observables import (
    mean_photon_closed,
    mean_photon_fd,
    mean_photon_general,
    squeezing_curve,
    wigner_points,
    wigner_single,
    wigner_two_mode,
)
from cvkitten.temporal_modes import (
    biased_modes,
    kernel_integral_double,
    kernel_integral_single,
    quadrature_double,
    quadrature_single,
    unbiased_modes,
)

from oracles import conditioned_char_bruteforce

DELTAS_NS = (1.0, 30.0, 50.0, 65.0, 250.0)


def ideal_limit(eps_ratio, delta_dimless):
    """Perfect detectors, no fake counts, vanishing tap and window."""
    return PhysicalParams.dimensionless(
        eps_ratio, delta_dimless, R=1e-6, T_dimless=1e-6, nu=0.0, eta=1.0, gamma_T_ratio=2.0
    )


def test_criterion_1_squeezing_anchor(verdict):
    t0 = time.perf_counter()
    (pt,) = squeezing_curve(30.0, [0.3], PhysicalParams())
    dt = time.perf_counter() - t0
    ok = abs(pt.squeeze_dB + 3.6) <= 0.2 and dt < 1.0
    verdict("1", ok, f"squeezing at eps/zeta0=0.3, f=zeta0: {pt.squeeze_dB:.4f} dB (target -3.6 +- 0.2), {dt:.3f} s")


def test_criterion_2_normalization(verdict):
    t0 = time.perf_counter()
    worst_char = worst_single = worst_two = 0.0
    ax = np.linspace(-7.5, 7.5, 31)
    grid4 = np.meshgrid(ax, ax, ax, ax, indexing="ij")
    pts4 = np.column_stack([g.ravel() for g in grid4])
    for d in DELTAS_NS:
        p = PhysicalParams(delta=d)
        for basis in ("biased", "unbiased"):
            mix = conditioned_state(p, basis, dressed=True)
            worst_char = max(worst_char, abs(mix.char_fn(np.zeros(2), np.zeros(2)) - 1.0))
            for k in (0, 1):
                worst_single = max(worst_single, abs(wigner_single(mix, k).integral() - 1.0))
            w = wigner_two_mode(mix, pts4).reshape(grid4[0].shape)
            for _ in range(4):
                w = trapezoid(w, ax, axis=0)
            worst_two = max(worst_two, abs(float(w) - 1.0))
    dt = time.perf_counter() - t0
    ok = worst_char <= 1e-12 and worst_single <= 1e-4 and worst_two <= 1e-3 and dt < 30
    verdict(
        "2",
        ok,
        f"max |C(0)-1| = {worst_char:.2e} (1e-12), max |single-mode integral - 1| = {worst_single:.2e} (1e-4), "
        f"max |two-mode integral - 1| = {worst_two:.2e} (1e-3), {dt:.1f} s",
    )


def test_criterion_3_oracles(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst_char, n_points = 0.0, 0
    for d in (1.0, 30.0, 250.0):
        p = PhysicalParams(delta=d)
        for basis in ("biased", "unbiased"):
            cs = build_covariances(p, basis)
            mix = condition(cs)
            for row in rng.normal(scale=1.2, size=(10, 4)):
                want = float(conditioned_char_bruteforce(cs, p, row[:2], row[2:]))
                worst_char = max(worst_char, abs(mix.char_fn(row[:2], row[2:]) - want))
                n_points += 1
    worst_single = worst_double = 0.0
    for delta in (0.1, 0.5, 1.0, 3.0, 10.0):
        modes = (*unbiased_modes(delta), *biased_modes(delta))
        for zeta in (0.3, 0.7, 1.0, 1.3, 3.0):
            for m in modes:
                for c in (0.0, delta):
                    worst_single = max(
                        worst_single, abs(kernel_integral_single(m, zeta, c) - quadrature_single(m, zeta, c))
                    )
            for a, b in ((modes[0], modes[0]), (modes[0], modes[1]), (modes[2], modes[2]), (modes[3], modes[3])):
                worst_double = max(
                    worst_double, abs(kernel_integral_double(a, b, zeta) - quadrature_double(a, b, zeta))
                )
    dt = time.perf_counter() - t0
    ok = n_points >= 50 and worst_char <= 1e-9 and worst_single <= 1e-10 and worst_double <= 1e-8 and dt < 60
    verdict(
        "3",
        ok,
        f"char fn vs brute force at {n_points} points: {worst_char:.2e} (1e-9); mode integrals over 5x5 grid: "
        f"single {worst_single:.2e} (1e-10), double {worst_double:.2e} (1e-8), {dt:.1f} s",
    )


def test_criterion_4a_plus_mode_origin_negative(verdict):
    t0 = time.perf_counter()
    vals = {}
    for d in (1.0, 30.0):
        mix = conditioned_state(PhysicalParams(delta=d), "biased", dressed=True)
        vals[d] = float(wigner_points(mix, 0, 0.0, 0.0))
    dt = time.perf_counter() - t0
    ok = all(v < 0 for v in vals.values()) and dt < 10
    detail = ", ".join(f"W+(0,0) at {d:g} ns = {v:.6f}" for d, v in vals.items())
    verdict("4a", ok, f"{detail} (required < 0), {dt:.2f} s")


def test_criterion_4b_odd_kitten_dip(verdict):
    t0 = time.perf_counter()
    mix = conditioned_state(PhysicalParams(delta=250.0), "unbiased", dressed=True)
    h = np.array([1e-3, 1e-2, 0.1, 0.3])
    w0 = float(wigner_points(mix, 0, 0.0, 0.0))
    side = np.concatenate([wigner_points(mix, 0, h, 0 * h), wigner_points(mix, 0, -h, 0 * h)])
    dt = time.perf_counter() - t0
    ok = bool(np.all(side > w0)) and dt < 10
    verdict("4b", ok, f"W_U1 at 250 ns: origin {w0:.6f}, min along x-axis near origin {side.min():.6f}, {dt:.2f} s")


def test_criterion_4c_unbiased_modes_identical(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    ax = np.linspace(-5, 5, 101)
    X, P = np.meshgrid(ax, ax)
    for d in DELTAS_NS:
        mix = conditioned_state(PhysicalParams(delta=d), "unbiased", dressed=True)
        worst = max(worst, float(np.max(np.abs(wigner_points(mix, 0, X, P) - wigner_points(mix, 1, X, P)))))
    dt = time.perf_counter() - t0
    verdict("4c", worst <= 1e-10 and dt < 10, f"max |W_U1 - W_U2| = {worst:.2e} (1e-10), {dt:.2f} s")


def test_plus_mode_negative_off_origin(verdict):
    # not a criterion: the negativity of W+ at the reference delays sits away from the origin
    mins = {}
    for d in (1.0, 30.0):
        mix = conditioned_state(PhysicalParams(delta=d), "biased", dressed=True)
        mins[d] = float(wigner_single(mix, 0).values.min())
    detail = ", ".join(f"min W+ at {d:g} ns = {v:.4f}" for d, v in mins.items())
    verdict("4 (supplement)", all(v < 0 for v in mins.values()), detail)


@pytest.mark.parametrize("eps_ratio", [0.1, 0.2, 0.3, 0.4, 0.5])
def test_criterion_5_peak_structure(verdict, eps_ratio):
    base = PhysicalParams(epsilon=eps_ratio * 30.0)
    deltas = np.linspace(0.05, 10.0, 100)
    t0 = time.perf_counter()
    n_plus, n_minus, worst_u = [], [], 0.0
    for d in deltas:
        p = base.with_delta_dimless(float(d))
        b = conditioned_state(p, "biased")
        u = conditioned_state(p, "unbiased")
        npl, nmi = mean_photon_general(b, 0), mean_photon_general(b, 1)
        nu1, nu2 = mean_photon_general(u, 0), mean_photon_general(u, 1)
        n_plus.append(npl)
        n_minus.append(nmi)
        avg = 0.5 * (npl + nmi)
        worst_u = max(worst_u, abs(nu1 - nu2), abs(nu1 - avg))
    dt = time.perf_counter() - t0
    k = int(np.argmax(n_plus))
    diffs = np.diff(n_plus)
    unimodal = bool(np.all(diffs[:k] > 0) and np.all(diffs[k:] < 0))
    interior = 0 < k < len(deltas) - 1
    ok = (
        unimodal
        and interior
        and 0.5 <= deltas[k] <= 4.0
        and n_minus[k] < n_plus[k]
        and worst_u <= 1e-10
        and dt < 60
    )
    verdict(
        f"5 (eps/zeta0={eps_ratio})",
        ok,
        f"argmax zeta0*Delta = {deltas[k]:.3f} (in [0.5, 4]), unique={unimodal}, n+={n_plus[k]:.4f}, "
        f"n-={n_minus[k]:.4f}, max U1/U2/average mismatch {worst_u:.2e} (1e-10), {dt:.1f} s",
    )


def test_criterion_6_limits(verdict):
    t0 = time.perf_counter()
    far = conditioned_state(PhysicalParams().with_delta_dimless(15.0), "biased", dressed=True)
    ax = np.linspace(-5, 5, 101)
    X, P = np.meshgrid(ax, ax)
    far_diff = float(np.max(np.abs(wigner_points(far, 0, X, P) - wigner_points(far, 1, X, P))))
    ratios = {}
    for d in (0.01, 0.05, 0.1):
        p = PhysicalParams(eta=1.0, nu=1e-9, eta_H=1.0).with_delta_dimless(d)
        mix = conditioned_state(p, "biased")
        ratios[d] = mean_photon_general(mix, 1) / mean_photon_general(mix, 0)
    dt = time.perf_counter() - t0
    ok = far_diff <= 1e-4 and all(r < 0.05 for r in ratios.values()) and dt < 10
    detail = ", ".join(f"n-/n+ at {d:g} = {r:.4f}" for d, r in ratios.items())
    verdict("6", ok, f"max |W+ - W-| at zeta0*Delta=15: {far_diff:.2e} (1e-4); {detail} (< 0.05), {dt:.2f} s")


def test_criterion_7_derivative_cross_check(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(10):
        eps_ratio = rng.uniform(0.05, 0.6)
        p = PhysicalParams.dimensionless(
            eps_ratio,
            rng.uniform(0.2, 8.0),
            T_dimless=rng.uniform(0.005, 0.1),
            epsilon_x_ratio=eps_ratio * rng.uniform(0.0, 0.5),
            R=rng.uniform(0.01, 0.2),
            R1=rng.uniform(0.2, 0.8),
            eta=rng.uniform(0.3, 1.0),
            nu=10 ** rng.uniform(-9, -5),
        )
        for basis in ("biased", "unbiased"):
            mix = conditioned_state(p, basis)
            for k in (0, 1):
                worst = max(worst, abs(mean_photon_fd(mix, k) - mean_photon_general(mix, k)))
    dt = time.perf_counter() - t0
    verdict("7", worst <= 1e-6 and dt < 10, f"max |n_fd - n_general| over 10 parameter sets = {worst:.2e} (1e-6), {dt:.2f} s")


def test_criterion_8_closed_form(verdict):
    t0 = time.perf_counter()
    r = 0.3
    deltas = np.geomspace(0.2, 10.0, 15)
    worst = {"eps/zeta0": 0.0, "zeta0/eps": 0.0}
    for d in deltas:
        mix = conditioned_state(ideal_limit(r, float(d)), "biased")
        exact = {1: mean_photon_general(mix, 0), -1: mean_photon_general(mix, 1)}
        for label, z in (("eps/zeta0", r), ("zeta0/eps", 1.0 / r)):
            for sign in (1, -1):
                rel = abs(mean_photon_closed(sign, z, float(d)) / exact[sign] - 1.0)
                worst[label] = max(worst[label], rel)
    dt = time.perf_counter() - t0
    adopted = min(worst, key=worst.get)
    ok = worst[adopted] <= 0.05 and dt < 30
    verdict(
        "8",
        ok,
        f"max relative deviation over zeta0*Delta in [0.2, 10]: z=eps/zeta0 {worst['eps/zeta0']:.3f}, "
        f"z=zeta0/eps {worst['zeta0/eps']:.3f} (0.05); closer reading {adopted}, {dt:.2f} s",
    )


def test_criterion_9_ideal_identities(verdict):
    t0 = time.perf_counter()
    worst_rot = worst_norm = 0.0
    for r in (0.1, 0.3, 0.5, 0.9):
        for d in (0.0, 0.2, 1.0, 3.0, 10.0):
            worst_rot = max(worst_rot, basis_rotation_residual(r, d))
            dec = phi_e_decomposition(r, d)
            worst_norm = max(worst_norm, abs(dec.c2**2 + dec.c0**2 - 1.0))
    nu_e = phi_e_decomposition(0.3, 1.0).nu_e
    dt = time.perf_counter() - t0
    ok = worst_rot < 1e-12 and worst_norm <= 1e-12 and math.isclose(nu_e, math.sqrt(0.86), rel_tol=1e-14) and dt < 1
    verdict(
        "9",
        ok,
        f"rotation residual {worst_rot:.2e} (1e-12), phi_e norm error {worst_norm:.2e} (1e-12), "
        f"nu_e(0.3, 1) = {nu_e:.15f} vs sqrt(0.86) = {math.sqrt(0.86):.15f}, {dt:.3f} s",
    )
