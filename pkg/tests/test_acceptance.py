"""Acceptance gate: one test per pinned end-to-end behavior.

Each test runs its configuration verbatim at the stated tolerance and
records a single [PASS]/[FAIL] line with the measured values (echoed in
the terminal summary).  Failures here are honest measurements, not
broken plumbing; the unit suites cover the mechanics.
"""

import math
from dataclasses import replace
from pathlib import Path

import mpmath
import numpy as np
import pytest

from rdspectral.grid import make_grid, state_from_physical
from rdspectral.harness import convergence_study, fit_slope
from rdspectral.models import MODELS, default_grid, get_model, initial_condition
from rdspectral.postprocess import (fourier_upsample_1d, fourier_upsample_2d,
                                    front_speed, max_abs_error, pulse_count,
                                    trace_front)
from rdspectral.steppers import (BlowUpError, StepControl, build_exp_tables,
                                 integrate, linear_symbol, phi)

GOLD_CACHE = Path("/tmp/gray1d_gold_t200.npy")


# -------------------------------------------------------------- criterion 1

def test_criterion_1_front_speed_selection(criterion):
    # pulled fronts select their speed from the initial decay rate:
    # c = delta + 1/delta for shallow profiles, saturating at c = 2
    cases = ((2.0, 2.0), (0.5, 2.5), (1.0, 2.0))
    grid = make_grid(2048, 150.0, 1)
    x = grid.coords[0]
    outcomes = []
    for delta, expected in cases:
        states = []
        start = state_from_physical(grid, [1.0 / (2.0 * np.cosh(delta * x))])
        try:
            integrate("fisher1d", grid, scheme="rk4", dt=0.1, t_final=40.0,
                      snap_every=1.0, sink=states.append, initial_state=start)
        except BlowUpError as err:
            outcomes.append((delta, expected, None, err.t))
            continue
        trace = trace_front(states, grid, threshold=1e-4, direction="right")
        outcomes.append((delta, expected, front_speed(trace), None))
    parts, passed = [], True
    for delta, expected, speed, abort_t in outcomes:
        if speed is None:
            passed = False
            parts.append(f"delta={delta}: aborted at t={abort_t:g} "
                         f"(ahead-of-front noise grows ~e^t from the unstable "
                         f"zero state and overruns the domain before t=40)")
        else:
            ok = abs(speed - expected) <= 0.02 * expected
            passed = passed and ok
            parts.append(f"delta={delta}: c={speed:.4f} (want {expected} +-2%)")
    criterion(1, passed, "; ".join(parts))


# ---------------------------------------------------------- criteria 2 and 3

@pytest.fixture(scope="module")
def gray_error_table():
    """Max-abs errors at t=200 for the three 4th-order schemes on the
    two-species cubic-autocatalysis defaults, against an etdrk4b gold run
    at dt=1e-3 (cached on disk because it takes a few minutes)."""
    spec = get_model("gray1d")
    grid = default_grid(spec)
    start = initial_condition(spec, grid)
    if GOLD_CACHE.exists():
        gold = np.load(GOLD_CACHE)
        assert gold.shape == (2, 512)
    else:
        gold = integrate(spec, grid, scheme="etdrk4b", dt=1e-3, t_final=200.0,
                         initial_state=start).final_state.u
        np.save(GOLD_CACHE, gold)
    dts = (0.8, 0.4, 0.2, 0.1)
    errors = {}
    for scheme in ("rk4", "etdrk4", "etdrk4b"):
        errors[scheme] = tuple(
            max_abs_error(integrate(spec, grid, scheme=scheme, dt=dt,
                                    t_final=200.0, initial_state=start)
                          .final_state.u, gold)
            for dt in dts)
    return dts, errors


def test_criterion_2_fourth_order_convergence(criterion, gray_error_table):
    dts, errors = gray_error_table
    slopes = {scheme: fit_slope(dts, errs) for scheme, errs in errors.items()}
    passed = all(abs(s - 4.0) <= 0.3 for s in slopes.values())
    detail = ", ".join(f"{scheme} slope {s:.3f}" for scheme, s in slopes.items())
    criterion(2, passed, f"{detail} over dt {list(dts)} (want 4 +- 0.3 each)")


def test_criterion_3_etd_beats_if_at_coarse_step(criterion, gray_error_table):
    dts, errors = gray_error_table
    rk4 = errors["rk4"][dts.index(0.8)]
    etd = errors["etdrk4b"][dts.index(0.8)]
    ratio = rk4 / etd
    criterion(3, ratio >= 5.0,
              f"at dt=0.8: rk4 err {rk4:.4g}, etdrk4b err {etd:.4g}, "
              f"ratio {ratio:.2f} (want >= 5)")


# -------------------------------------------------------------- criterion 4

def test_criterion_4_pure_diffusion_exactness(criterion):
    # with reactions zeroed every spectral scheme must reproduce the
    # analytic heat propagator to rounding, at any step size
    worst = 0.0
    for spec in MODELS.values():
        n0, L, dims = spec.default_grid_args
        grid = make_grid(128 if dims == 1 else 32, L, dims)
        silent = replace(spec, rates=lambda u, p: np.zeros_like(u))
        start = initial_condition(silent, grid)
        diffs = spec.diffusivities(spec.params())
        for dt in (0.1, 1.0, 10.0):
            t_final = 100.0 * dt
            decays = []
            for d in diffs:
                wsq = 0.0
                for ax, n_ax in enumerate(grid.n):
                    w = (np.pi / grid.half_length[ax]) * np.fft.fftfreq(n_ax, 1.0 / n_ax)
                    shape = [1] * dims
                    shape[ax] = n_ax
                    wsq = wsq + (w ** 2).reshape(tuple(reversed(shape)))
                decays.append(np.exp(-d * wsq * t_final))
            analytic = np.stack([
                np.fft.ifftn(decay * np.fft.fftn(u0)).real
                for decay, u0 in zip(decays, start.u)])
            scale = np.max(np.abs(analytic))
            for scheme in ("rk4", "etdrk4", "etdrk4b", "ck45"):
                if scheme == "ck45":
                    control = StepControl(dt=dt, rel_tol=1e-6, dt_max=dt)
                    summary = integrate(silent, grid, scheme="ck45",
                                        t_final=t_final, control=control,
                                        initial_state=start)
                else:
                    summary = integrate(silent, grid, scheme=scheme, dt=dt,
                                        t_final=t_final, initial_state=start)
                err = max_abs_error(summary.final_state.u, analytic) / scale
                worst = max(worst, err)
    criterion(4, worst < 1e-12,
              f"worst relative deviation from the heat propagator {worst:.3g} "
              f"over all models, schemes, dt in {{0.1, 1, 10}} (want < 1e-12)")


# -------------------------------------------------------------- criterion 5

def _phi_series(slot: int, z: np.ndarray, terms: int = 30) -> np.ndarray:
    acc = np.zeros_like(z)
    for k in reversed(range(terms)):
        acc = acc * z + 1.0 / math.factorial(k + slot + 1)
    return acc


def _phi_highprec(slot: int, z: float) -> float:
    with mpmath.workdps(50):
        zz = mpmath.mpf(z)
        num = mpmath.exp(zz) - 1
        for k in range(slot):
            num -= zz ** (k + 1) / mpmath.factorial(k + 1)
        return float(num / zz ** (slot + 1))


def test_criterion_5_phi_oracles_and_recurrence(criterion):
    z = -np.logspace(-8.0, 2.0, 1000)
    # a 30-term Taylor series only converges for |z| <~ 4 (its largest
    # term at z=-100 is ~1e25), so the series comparison runs on that
    # subrange and a 50-digit closed form covers all 1000 points
    series_band = np.abs(z) <= 4.0
    worst_series = 0.0
    worst_closed = 0.0
    for slot in (0, 1, 2):
        got = phi(slot, z)
        worst_series = max(worst_series, np.max(
            np.abs(got[series_band] - _phi_series(slot, z[series_band]))))
        closed = np.array([_phi_highprec(slot, v) for v in z])
        worst_closed = max(worst_closed, np.max(np.abs(got - closed)))

    worst_rec = 0.0
    spec = get_model("gray1d")
    symbol = linear_symbol(default_grid(spec), spec.diffusivities(spec.params()))
    for dt in (0.1, 0.01):
        tables = build_exp_tables(symbol, dt)
        z_full = symbol.values * dt
        z_half = symbol.values * (0.5 * dt)
        worst_rec = max(
            worst_rec,
            np.max(np.abs(z_full * tables.phi1_full - (tables.phi0_full - 1.0))),
            np.max(np.abs(z_full * tables.phi2_full - (tables.phi1_full - 0.5))),
            np.max(np.abs(z_half * tables.phi1_half - (tables.phi0_half - 1.0))))

    passed = worst_series < 1e-12 and worst_closed < 1e-12 and worst_rec < 1e-10
    criterion(5, passed,
              f"vs 30-term series where it converges (|z| <= 4, "
              f"{int(series_band.sum())}/1000 pts): {worst_series:.3g}; "
              f"vs 50-digit closed form (all 1000 pts): {worst_closed:.3g} "
              f"(want < 1e-12); recurrence residual on built tables "
              f"{worst_rec:.3g} (want < 1e-10)")


# -------------------------------------------------------------- criterion 6

def test_criterion_6_resolution_insensitivity(criterion):
    runs = {}
    for n in (128, 256):
        grid = make_grid(n, 100.0, 2)
        runs[n] = integrate("labyrinthe2d", grid, scheme="etdrk4b", dt=0.1,
                            t_final=100.0).final_state.u
    coarse_up = np.stack([fourier_upsample_2d(f, 256, 256) for f in runs[128]])
    diff = max_abs_error(coarse_up, runs[256])
    spread = float(runs[256].std(axis=(1, 2)).max())
    criterion(6, diff < 1e-3,
              f"max |n=256 - upsampled n=128| = {diff:.3g} at t=100 "
              f"(want < 1e-3; note both runs reach the uniform rest state "
              f"by then, spatial std {spread:.2g} -- the seeded pattern "
              f"decays under these kinetics)")


# -------------------------------------------------------------- criterion 7

def test_criterion_7_under_resolution_artifact(criterion):
    finals = {}
    for n in (64, 192, 256):
        grid = make_grid(n, 25.0, 2)
        finals[n] = integrate("gray2d", grid, scheme="rk4", dt=0.1,
                              t_final=150.0, params={"asym": 1.0}).final_state.u
    up = {n: np.stack([fourier_upsample_2d(f, 768, 768) for f in fields])
          for n, fields in finals.items()}
    low = max_abs_error(up[64], up[192])
    high = max_abs_error(up[192], up[256])
    criterion(7, low > 1e-1 and high < 1e-2,
              f"n=64 vs n=192 differ by {low:.4g} (want > 0.1, the coarse "
              f"run is a plausible-looking wrong pattern); n=192 vs n=256 "
              f"differ by {high:.4g} (want < 0.01)")


# -------------------------------------------------------------- criterion 8

def test_criterion_8_adi_second_order(criterion):
    grid = make_grid(64, 25.0, 2)
    study = convergence_study("fisher2d", schemes=("adi", "rk4"),
                              dts=(0.2, 0.1, 0.05, 0.025), t_final=5.0,
                              grid=grid, gold_scheme="rk4", gold_dt=1e-3)
    slope = study.slopes["adi"]
    ratio = study.error("adi", 0.1) / study.error("rk4", 0.1)
    criterion(8, abs(slope - 2.0) <= 0.2 and ratio >= 10.0,
              f"adi slope {slope:.3f} (want 2 +- 0.2); at dt=0.1 adi/rk4 "
              f"error ratio {ratio:.3g} (want >= 10)")


# -------------------------------------------------------------- criterion 9

def test_criterion_9_upsampling_exactness(criterion):
    rng = np.random.default_rng(42)
    worst = 0.0

    for _ in range(50):  # 1D: n=32 -> 128, modes strictly below n/2
        L = 5.0
        n, new_n = 32, 128
        x = -L + (2.0 * L / n) * np.arange(n)
        x_new = -L + (2.0 * L / new_n) * np.arange(new_n)
        u = np.zeros(n)
        ref = np.zeros(new_n)
        for k in range(n // 2):
            a, b = rng.normal(size=2)
            w = (np.pi / L) * k
            u += a * np.cos(w * x) + b * np.sin(w * x)
            ref += a * np.cos(w * x_new) + b * np.sin(w * x_new)
        worst = max(worst, np.max(np.abs(fourier_upsample_1d(u, new_n) - ref)))

    for _ in range(50):  # 2D: 16x16 -> 64x64
        L = 4.0
        n, new_n = 16, 64
        c = -L + (2.0 * L / n) * np.arange(n)
        cf = -L + (2.0 * L / new_n) * np.arange(new_n)
        X, Y = np.meshgrid(c, c)
        Xf, Yf = np.meshgrid(cf, cf)
        u = np.zeros((n, n))
        ref = np.zeros((new_n, new_n))
        for kx in range(n // 2):
            for ky in range(-(n // 2 - 1), n // 2):
                if kx == 0 and ky < 0:
                    continue  # conjugate of an included term
                a, b = 0.2 * rng.normal(size=2)
                wx, wy = (np.pi / L) * kx, (np.pi / L) * ky
                u += a * np.cos(wx * X + wy * Y) + b * np.sin(wx * X + wy * Y)
                ref += a * np.cos(wx * Xf + wy * Yf) + b * np.sin(wx * Xf + wy * Yf)
        worst = max(worst,
                    np.max(np.abs(fourier_upsample_2d(u, new_n, new_n) - ref)))

    criterion(9, worst < 1e-11,
              f"max deviation from analytic resampling over 100 random "
              f"band-limited fields (50 1D + 50 2D, 4x) = {worst:.3g} "
              f"(want < 1e-11)")


# ------------------------------------------------------------- criterion 10

def test_criterion_10_adaptive_stepping(criterion):
    grid = default_grid(get_model("labyrinthe2d"))
    control = StepControl(rel_tol=1e-4)
    adaptive = integrate("labyrinthe2d", grid, scheme="ck45", t_final=50.0,
                         control=control)
    history = np.array(adaptive.dt_history)  # rows of (t, accepted dt)
    settled = history[history[:, 0] > 25.0, 1]
    mean_dt = float(settled.mean())
    fixed = integrate("labyrinthe2d", grid, scheme="rk4", dt=0.1, t_final=50.0)
    criterion(10, 0.3 <= mean_dt <= 1.0
              and adaptive.reaction_evals < fixed.reaction_evals,
              f"mean accepted dt after t=25: {mean_dt:.4f} (want in "
              f"[0.3, 1.0]); reaction evals {adaptive.reaction_evals} "
              f"adaptive vs {fixed.reaction_evals} fixed rk4 at dt=0.1")


# ------------------------------------------------------------- criterion 11

def _reference_two_species_rk4(n, half_length, dt, steps, eps, a_group, b_group):
    """Straight-line integrating-factor RK4 loop written directly against
    numpy's FFT, independent of the package, to serve as an oracle."""
    L = half_length
    x = (2.0 * L / n) * np.arange(-n // 2, n // 2)
    A = eps * a_group
    B = eps ** (1.0 / 3.0) * b_group
    s100 = np.sin(np.pi * (x - L) / (2.0 * L)) ** 100
    u = np.stack([1.0 - 0.5 * s100, 0.25 * s100])
    uhat = np.fft.fft(u)
    ksq = ((np.pi / L) * np.concatenate([np.arange(0, n // 2 + 1),
                                         np.arange(-n // 2 + 1, 0)])) ** 2
    E = np.stack([np.exp(-dt * ksq / 2.0), np.exp(-eps * dt * ksq / 2.0)])
    E2 = E ** 2

    def rhs(w):
        t1 = w[0] * w[1] * w[1]
        return np.stack([-t1 + A * (1.0 - w[0]), t1 - B * w[1]])

    for _ in range(steps):
        k1 = dt * np.fft.fft(rhs(u))
        u2 = np.fft.ifft(E * (uhat + k1 / 2.0)).real
        k2 = dt * np.fft.fft(rhs(u2))
        u3 = np.fft.ifft(E * uhat + k2 / 2.0).real
        k3 = dt * np.fft.fft(rhs(u3))
        u4 = np.fft.ifft(E2 * uhat + E * k3).real
        k4 = dt * np.fft.fft(rhs(u4))
        uhat = E2 * uhat + (E2 * k1 + 2.0 * E * (k2 + k3) + k4) / 6.0
        u = np.fft.ifft(uhat).real
    return u


def test_criterion_11_reference_loop_equivalence(criterion):
    packaged = integrate("gray1d", make_grid(512, 50.0, 1), scheme="rk4",
                         dt=0.2, t_final=200.0).final_state.u
    reference = _reference_two_species_rk4(512, 50.0, 0.2, 1000,
                                           eps=0.01, a_group=9.0, b_group=0.4)
    diff = max_abs_error(packaged, reference)
    criterion(11, diff <= 1e-8,
              f"1000 steps at dt=0.2: max |packaged - reference loop| = "
              f"{diff:.3g} (want <= 1e-8)")


# ------------------------------------------------------------- criterion 12

def test_criterion_12_pulse_splitting_settles(criterion):
    states = []
    integrate("gray1d", scheme="rk4", dt=0.1, t_final=2000.0,
              snap_every=20.0, sink=states.append)
    counts = [pulse_count(s.u[1], floor=0.05) for s in states]
    monotone = all(b >= a for a, b in zip(counts, counts[1:]))
    tail = [s.u for s in states if s.t >= 1800.0]
    worst_pair = max(max_abs_error(a, b)
                     for i, a in enumerate(tail) for b in tail[i + 1:])
    criterion(12, monotone and worst_pair < 1e-4,
              f"pulse count {counts[0]} -> {counts[-1]} "
              f"({'non-decreasing' if monotone else 'NOT monotone'}); "
              f"final 10% of snapshots differ pairwise by up to "
              f"{worst_pair:.3g} (want < 1e-4; the pattern still drifts "
              f"algebraically slowly at t=2000)")
