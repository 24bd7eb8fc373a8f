"""Integrating-factor and exponential time-differencing steppers.

All schemes treat the diffusion term exactly through the diagonal
spectral symbol L = -d * omega_sq and step only the reaction explicitly:

* ``rk4``      classical four-stage Runge-Kutta on the transformed
               variable, with the stage exponentials folded in so only
               decaying factors ever appear;
* ``ck45``     embedded Cash-Karp 4(5) pair in the same integrating-factor
               form, driving an adaptive step controller;
* ``etdrk4``   four-stage ETD scheme with a split-step third stage;
* ``etdrk4b``  four-stage ETD scheme with all stages anchored at the
               current time level (better constants on stiff problems).

The phi coefficient functions are evaluated by the direct formulas away
from the origin and by a contour mean near it, where the formulas lose
digits to cancellation.  Every scheme reproduces pure diffusion exactly
(to rounding) when the reaction vanishes, at any step size.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field as dc_field
from typing import Callable, Mapping

import numpy as np

from . import grid as spectral
from .grid import GridSpec, State
from .models import ModelSpec, default_grid as _default_grid, get_model, initial_condition

__all__ = [
    "BlowUpError",
    "StepSizeError",
    "LinearSymbol",
    "ExpTables",
    "StepControl",
    "RunSummary",
    "phi",
    "linear_symbol",
    "build_exp_tables",
    "if_rk4_step",
    "if_ck45_step",
    "etdrk4_step",
    "etdrk4b_step",
    "integrate",
]

BLOWUP_LIMIT = 1e10
ERROR_FLOOR = 1e-8          # absolute floor in the ck45 error scale
PHI_CONTOUR_THRESHOLD = 0.5  # |z| at or below this uses the contour mean
_PHI_POINTS = np.exp(2j * np.pi * np.arange(32) / 32)
_EXP_CLAMP = 700.0           # cap on exp arguments; avoids inf * 0 = nan


class BlowUpError(RuntimeError):
    """A stage produced non-finite values or exceeded the amplitude limit."""

    def __init__(self, t: float, max_abs: float, detail: str = ""):
        self.t = t
        self.max_abs = max_abs
        msg = f"solution blew up at t={t:.6g} (max |u| = {max_abs:.3g})"
        if detail:
            msg += f" [{detail}]"
        super().__init__(msg)


class StepSizeError(RuntimeError):
    """The adaptive controller could not find an acceptable step above dt_min."""


def _check_stage(u: np.ndarray, t: float, detail: str) -> None:
    m = np.max(np.abs(u))
    if not np.isfinite(m) or m > BLOWUP_LIMIT:
        raise BlowUpError(t, float(m), detail)


# -- phi coefficient functions -------------------------------------------------

def _phi_direct(k: int, z: np.ndarray) -> np.ndarray:
    e = np.exp(z)
    if k == 0:
        return (e - 1.0) / z
    if k == 1:
        return (e - 1.0 - z) / (z * z)
    return (e - 1.0 - z - 0.5 * (z * z)) / (z * z * z)


def phi(k: int, z) -> np.ndarray:
    """phi_0 = (e^z - 1)/z, phi_1 = (e^z - 1 - z)/z^2, phi_2 = (e^z - 1 - z - z^2/2)/z^3.

    For |z| <= 0.5 the direct formulas cancel catastrophically, so the
    value is taken instead as the mean of the direct formula over 32
    equispaced points on the unit circle centered at z (the singularity
    is removable, so the mean converges spectrally in the point count).
    Real input returns the real part.
    """
    if k not in (0, 1, 2):
        raise ValueError(f"phi index must be 0, 1 or 2, got {k}")
    z_in = np.asarray(z)
    flat = z_in.ravel().astype(complex)
    out = np.empty(flat.shape, dtype=complex)
    small = np.abs(flat) <= PHI_CONTOUR_THRESHOLD
    if np.any(~small):
        out[~small] = _phi_direct(k, flat[~small])
    if np.any(small):
        ring = flat[small, None] + _PHI_POINTS
        out[small] = _phi_direct(k, ring).mean(axis=-1)
    out = out.reshape(z_in.shape)
    if not np.iscomplexobj(z_in):
        out = out.real
    return out[()] if out.ndim == 0 else out


# -- linear symbol and exponential tables --------------------------------------

@dataclass
class LinearSymbol:
    """Per-species diffusion symbol L_s = -d_s * omega_sq, stacked."""

    grid: GridSpec
    diffusivities: tuple[float, ...]
    values: np.ndarray                       # (species, *grid.shape), real, <= 0
    _tables: dict = dc_field(default_factory=dict, repr=False)

    def tables(self, dt: float) -> "ExpTables":
        key = float(dt)
        if key not in self._tables:
            self._tables[key] = _build_tables(self, key)
        return self._tables[key]


def linear_symbol(grid: GridSpec, diffusivities) -> LinearSymbol:
    ds = tuple(float(d) for d in diffusivities)
    if not ds or any(d < 0 for d in ds):
        raise ValueError(f"diffusivities must be nonnegative, got {ds}")
    values = np.stack([-d * grid.omega_sq for d in ds])
    return LinearSymbol(grid=grid, diffusivities=ds, values=values)


@dataclass
class ExpTables:
    """Exponential and phi tables for one (symbol, dt) pair."""

    dt: float
    e_full: np.ndarray       # exp(L dt)
    e_half: np.ndarray       # exp(L dt / 2)
    phi0_full: np.ndarray
    phi1_full: np.ndarray
    phi2_full: np.ndarray
    phi0_half: np.ndarray
    phi1_half: np.ndarray
    _weights: dict | None = dc_field(default=None, repr=False)

    @property
    def stage_weights(self) -> dict:
        # combinations shared by the two four-stage ETD schemes
        if self._weights is None:
            self._weights = {
                "half_a": self.phi0_half - 2.0 * self.phi1_half,
                "full_a": self.phi0_full - 2.0 * self.phi1_full,
                "update1": 4.0 * self.phi2_full - 3.0 * self.phi1_full + self.phi0_full,
                "update23": 2.0 * (self.phi1_full - 2.0 * self.phi2_full),
                "update4": 4.0 * self.phi2_full - self.phi1_full,
            }
        return self._weights


def _build_tables(symbol: LinearSymbol, dt: float) -> ExpTables:
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    z = symbol.values * dt
    zh = 0.5 * z
    return ExpTables(
        dt=dt,
        e_full=np.exp(z),
        e_half=np.exp(zh),
        phi0_full=phi(0, z),
        phi1_full=phi(1, z),
        phi2_full=phi(2, z),
        phi0_half=phi(0, zh),
        phi1_half=phi(1, zh),
    )


def build_exp_tables(symbol: LinearSymbol, dt: float) -> ExpTables:
    """Tables for (symbol, dt), cached on the symbol."""
    return symbol.tables(dt)


def _require_tables(tables: ExpTables, dt: float) -> None:
    if tables.dt != dt:
        raise ValueError(f"tables were built for dt={tables.dt}, step asked for dt={dt}")


# -- fixed-step schemes ----------------------------------------------------------

def if_rk4_step(state: State, model: ModelSpec, grid: GridSpec, tables: ExpTables,
                dt: float, params: Mapping[str, float] | None = None,
                mask: np.ndarray | None = None) -> State:
    """One classical RK4 step in integrating-factor form.

    Costs exactly 4 reaction evaluations and 4 forward / 4 inverse
    transforms of the species stack.
    """
    _require_tables(tables, dt)
    p = model.params(params)
    E, E2 = tables.e_half, tables.e_full
    U = state.uhat
    t = state.t

    k1 = dt * spectral.forward(grid, model.reaction(state.u, p))
    if mask is not None:
        k1 = k1 * mask
    u2 = spectral.inverse_real(grid, E * (U + 0.5 * k1))
    _check_stage(u2, t, "rk4 stage 2")
    k2 = dt * spectral.forward(grid, model.reaction(u2, p))
    if mask is not None:
        k2 = k2 * mask
    u3 = spectral.inverse_real(grid, E * U + 0.5 * k2)
    _check_stage(u3, t, "rk4 stage 3")
    k3 = dt * spectral.forward(grid, model.reaction(u3, p))
    if mask is not None:
        k3 = k3 * mask
    u4 = spectral.inverse_real(grid, E2 * U + E * k3)
    _check_stage(u4, t, "rk4 stage 4")
    k4 = dt * spectral.forward(grid, model.reaction(u4, p))
    if mask is not None:
        k4 = k4 * mask

    U_new = E2 * U + (E2 * k1 + 2.0 * (E * (k2 + k3)) + k4) / 6.0
    u_new = spectral.inverse_real(grid, U_new)
    _check_stage(u_new, t + dt, "rk4 update")
    return State(t=t + dt, u=u_new, uhat=U_new)


def etdrk4b_step(state: State, model: ModelSpec, grid: GridSpec, tables: ExpTables,
                 dt: float, params: Mapping[str, float] | None = None,
                 mask: np.ndarray | None = None) -> State:
    """One ETDRK4 step with every stage anchored at the current time level."""
    _require_tables(tables, dt)
    p = model.params(params)
    E, Eh = tables.e_full, tables.e_half
    w = tables.stage_weights
    U = state.uhat
    t = state.t

    N1 = spectral.forward(grid, model.reaction(state.u, p))
    if mask is not None:
        N1 = N1 * mask
    u2 = spectral.inverse_real(grid, Eh * U + (0.5 * dt) * (tables.phi0_half * N1))
    _check_stage(u2, t, "etdrk4b stage 2")
    N2 = spectral.forward(grid, model.reaction(u2, p))
    if mask is not None:
        N2 = N2 * mask
    u3 = spectral.inverse_real(
        grid, Eh * U + (0.5 * dt) * (w["half_a"] * N1) + dt * (tables.phi1_half * N2))
    _check_stage(u3, t, "etdrk4b stage 3")
    N3 = spectral.forward(grid, model.reaction(u3, p))
    if mask is not None:
        N3 = N3 * mask
    u4 = spectral.inverse_real(
        grid, E * U + dt * (w["full_a"] * N1) + (2.0 * dt) * (tables.phi1_full * N3))
    _check_stage(u4, t, "etdrk4b stage 4")
    N4 = spectral.forward(grid, model.reaction(u4, p))
    if mask is not None:
        N4 = N4 * mask

    U_new = E * U + dt * (w["update1"] * N1 + w["update23"] * (N2 + N3) + w["update4"] * N4)
    u_new = spectral.inverse_real(grid, U_new)
    _check_stage(u_new, t + dt, "etdrk4b update")
    return State(t=t + dt, u=u_new, uhat=U_new)


def etdrk4_step(state: State, model: ModelSpec, grid: GridSpec, tables: ExpTables,
                dt: float, params: Mapping[str, float] | None = None,
                mask: np.ndarray | None = None) -> State:
    """One ETDRK4 step in the original four-stage form (split-step stage 3)."""
    _require_tables(tables, dt)
    p = model.params(params)
    E, Eh = tables.e_full, tables.e_half
    w = tables.stage_weights
    U = state.uhat
    t = state.t

    N1 = spectral.forward(grid, model.reaction(state.u, p))
    if mask is not None:
        N1 = N1 * mask
    A = Eh * U + (0.5 * dt) * (tables.phi0_half * N1)
    ua = spectral.inverse_real(grid, A)
    _check_stage(ua, t, "etdrk4 stage 2")
    N2 = spectral.forward(grid, model.reaction(ua, p))
    if mask is not None:
        N2 = N2 * mask
    ub = spectral.inverse_real(grid, Eh * U + (0.5 * dt) * (tables.phi0_half * N2))
    _check_stage(ub, t, "etdrk4 stage 3")
    N3 = spectral.forward(grid, model.reaction(ub, p))
    if mask is not None:
        N3 = N3 * mask
    # split step: the exponential acts on the second-stage value, not on U
    uc = spectral.inverse_real(grid, Eh * A + (0.5 * dt) * (tables.phi0_half * (2.0 * N3 - N1)))
    _check_stage(uc, t, "etdrk4 stage 4")
    N4 = spectral.forward(grid, model.reaction(uc, p))
    if mask is not None:
        N4 = N4 * mask

    U_new = E * U + dt * (w["update1"] * N1 + w["update23"] * (N2 + N3) + w["update4"] * N4)
    u_new = spectral.inverse_real(grid, U_new)
    _check_stage(u_new, t + dt, "etdrk4 update")
    return State(t=t + dt, u=u_new, uhat=U_new)


# -- embedded Cash-Karp 4(5) pair -------------------------------------------------

_CK_A = (0.0, 1.0 / 5.0, 3.0 / 10.0, 3.0 / 5.0, 1.0, 7.0 / 8.0)
_CK_B = {
    (1, 0): 1.0 / 5.0,
    (2, 0): 3.0 / 40.0, (2, 1): 9.0 / 40.0,
    (3, 0): 3.0 / 10.0, (3, 1): -9.0 / 10.0, (3, 2): 6.0 / 5.0,
    (4, 0): -11.0 / 54.0, (4, 1): 5.0 / 2.0, (4, 2): -70.0 / 27.0, (4, 3): 35.0 / 27.0,
    (5, 0): 1631.0 / 55296.0, (5, 1): 175.0 / 512.0, (5, 2): 575.0 / 13824.0,
    (5, 3): 44275.0 / 110592.0, (5, 4): 253.0 / 4096.0,
}
_CK_FIFTH = (37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0, 512.0 / 1771.0)
_CK_FOURTH = (2825.0 / 27648.0, 0.0, 18575.0 / 48384.0, 13525.0 / 55296.0,
              277.0 / 14336.0, 1.0 / 4.0)


def _ck_thetas() -> set[float]:
    thetas = {1.0}
    for i in range(1, 6):
        thetas.add(_CK_A[i])
    for (i, j) in _CK_B:
        thetas.add(_CK_A[i] - _CK_A[j])
    for j in range(6):
        if _CK_FIFTH[j] != 0.0 or _CK_FOURTH[j] != 0.0:
            thetas.add(1.0 - _CK_A[j])
    return thetas


class _CkFactors:
    """exp(theta * L * dt) for every stage offset theta the tableau needs.

    The (6, 5) coupling has a_6 < a_5, so one factor grows with |L| dt;
    its exponent is clamped so that a vanishing reaction still yields an
    exact pure-diffusion step instead of inf * 0.
    """

    def __init__(self, symbol: LinearSymbol, dt: float):
        self.dt = dt
        base = symbol.values * dt
        self.exp = {th: np.exp(np.minimum(th * base, _EXP_CLAMP)) for th in _ck_thetas()}


@dataclass
class StepControl:
    """Adaptive step controller state for ck45."""

    dt: float = 0.1
    rel_tol: float = 1e-4
    safety: float = 0.9
    dt_min: float = 1e-10
    dt_max: float = 5.0
    accepted: int = 0
    rejected: int = 0
    _factors: _CkFactors | None = dc_field(default=None, repr=False)
    _factors_key: tuple | None = dc_field(default=None, repr=False)


def _ck_factors(control: StepControl, model: ModelSpec, grid: GridSpec,
                p: Mapping[str, float], dt: float) -> _CkFactors:
    diffs = model.diffusivities(p)
    key = (id(grid), diffs, dt)
    if control._factors_key != key:
        control._factors = _CkFactors(linear_symbol(grid, diffs), dt)
        control._factors_key = key
    return control._factors


def if_ck45_step(state: State, model: ModelSpec, grid: GridSpec, control: StepControl,
                 params: Mapping[str, float] | None = None,
                 mask: np.ndarray | None = None) -> tuple[State, bool, float]:
    """Attempt one embedded Cash-Karp step at control.dt.

    Returns (new_state, accepted, scaled_error); on rejection the state
    comes back unchanged.  control.dt is updated to the next proposal
    either way.  The error is max |u5 - u4| / (rel_tol * (|u| + floor)),
    the step is accepted iff it is <= 1, and the fifth-order solution is
    the one advanced.
    """
    p = model.params(params)
    dt = min(max(control.dt, control.dt_min), control.dt_max)
    fac = _ck_factors(control, model, grid, p, dt)
    ex = fac.exp
    U = state.uhat
    t = state.t

    ks: list[np.ndarray] = []
    u_stage = state.u
    finite = True
    for i in range(6):
        if i > 0:
            acc = ex[_CK_A[i]] * U
            for j in range(i):
                b = _CK_B.get((i, j), 0.0)
                if b != 0.0:
                    acc = acc + b * (ex[_CK_A[i] - _CK_A[j]] * ks[j])
            u_stage = spectral.inverse_real(grid, acc)
            mstage = np.max(np.abs(u_stage))
            if not np.isfinite(mstage) or mstage > BLOWUP_LIMIT:
                finite = False
                break
        k = dt * spectral.forward(grid, model.reaction(u_stage, p))
        if mask is not None:
            k = k * mask
        ks.append(k)

    if finite:
        U5 = ex[1.0] * U
        U4 = ex[1.0] * U
        for j in range(6):
            w5, w4 = _CK_FIFTH[j], _CK_FOURTH[j]
            if w5 != 0.0 or w4 != 0.0:
                term = ex[1.0 - _CK_A[j]] * ks[j]
                if w5 != 0.0:
                    U5 = U5 + w5 * term
                if w4 != 0.0:
                    U4 = U4 + w4 * term
        u5 = spectral.inverse_real(grid, U5)
        u4 = spectral.inverse_real(grid, U4)
        scale = control.rel_tol * (np.abs(state.u) + ERROR_FLOOR)
        err = float(np.max(np.abs(u5 - u4) / scale))
        finite = np.isfinite(err) and np.isfinite(np.max(np.abs(u5)))

    if not finite:
        err = np.inf

    if err <= 1.0:
        factor = 5.0 if err == 0.0 else min(5.0, control.safety * err ** -0.2)
        control.dt = min(max(dt * factor, control.dt_min), control.dt_max)
        control.accepted += 1
        new_state = State(t=t + dt, u=u5, uhat=U5)
        return new_state, True, err
    shrink = 0.1 if not np.isfinite(err) else max(0.1, control.safety * err ** -0.25)
    proposal = dt * shrink
    if proposal < control.dt_min and dt <= control.dt_min:
        raise StepSizeError(
            f"step rejected at dt_min={control.dt_min:g} (t={t:.6g}, scaled error {err:.3g})")
    control.dt = min(max(proposal, control.dt_min), control.dt_max)
    control.rejected += 1
    return state, False, err


# -- run driver -------------------------------------------------------------------

_FIXED_STEPPERS: dict[str, Callable] = {
    "rk4": if_rk4_step,
    "etdrk4": etdrk4_step,
    "etdrk4b": etdrk4b_step,
}

SCHEMES = ("rk4", "ck45", "etdrk4", "etdrk4b")


@dataclass
class RunSummary:
    model: str
    scheme: str
    t_end: float
    steps: int
    accepted: int
    rejected: int
    reaction_evals: int
    wall_time: float
    final_state: State
    dt_history: list[tuple[float, float]] | None = None
    dense_time: float = 0.0


class _CountingModel:
    """Delegating wrapper that counts reaction evaluations."""

    def __init__(self, spec: ModelSpec):
        self._spec = spec
        self.name = spec.name
        self.species = spec.species
        self.nfev = 0

    def params(self, overrides=None):
        return self._spec.params(overrides)

    def diffusivities(self, p):
        return self._spec.diffusivities(p)

    def reaction(self, u, p):
        self.nfev += 1
        return self._spec.reaction(u, p)


class _SnapshotCadence:
    def __init__(self, snap_every: float | None, sink: Callable | None, t0: float):
        self.every = snap_every
        self.sink = sink
        self.last_emitted = None
        if snap_every is not None and snap_every <= 0:
            raise ValueError(f"snapshot cadence must be positive, got {snap_every}")
        self.next = (t0 + snap_every) if snap_every is not None else None

    def emit(self, state: State) -> None:
        if self.sink is not None:
            self.sink(state)
        self.last_emitted = state.t

    def after_step(self, state: State, eps: float) -> None:
        if self.next is None:
            return
        if state.t + eps >= self.next:
            self.emit(state)
            while self.next <= state.t + eps:
                self.next += self.every

    def finish(self, state: State) -> None:
        if self.last_emitted is None or state.t > self.last_emitted:
            self.emit(state)


def integrate(model: ModelSpec | str, grid: GridSpec | None = None, *,
              scheme: str, t_final: float, dt: float | None = None,
              control: StepControl | None = None, snap_every: float | None = None,
              sink: Callable[[State], None] | None = None,
              params: Mapping[str, float] | None = None, dealias: bool = False,
              initial_state: State | None = None) -> RunSummary:
    """Drive a scheme from the model's initial state to t_final.

    Fixed-step schemes take ``dt`` (final partial step shortened to land
    exactly on t_final); ``ck45`` takes a StepControl.  ``sink`` is
    called with the initial state, at every crossing of the snapshot
    cadence, and with the final state.
    """
    spec = get_model(model) if isinstance(model, str) else model
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; valid schemes: {', '.join(SCHEMES)}")
    if t_final < 0:
        raise ValueError(f"t_final must be nonnegative, got {t_final}")
    if grid is None:
        grid = _default_grid(spec)
    p = spec.params(params)
    counting = _CountingModel(spec)
    state = initial_state
    if state is None:
        state = initial_condition(spec, grid, p)
    mask = spectral.dealias_mask(grid) if dealias else None
    t0 = state.t
    eps = 1e-9 * max(1.0, abs(t_final), abs(t0))
    cadence = _SnapshotCadence(snap_every, sink, t0)
    cadence.emit(state)

    started = time.perf_counter()
    steps = 0
    dt_history: list[tuple[float, float]] | None = None
    accepted0 = control.accepted if control is not None else 0
    rejected0 = control.rejected if control is not None else 0

    try:
        if scheme == "ck45":
            if control is None:
                raise ValueError("ck45 needs a StepControl (set rel_tol there)")
            dt_history = []
            while state.t < t_final - eps:
                remaining = t_final - state.t
                proposal = control.dt
                clamped = min(proposal, remaining)
                control.dt = clamped
                new_state, accepted, _ = if_ck45_step(
                    state, counting, grid, control, params=p, mask=mask)
                steps += 1
                if accepted:
                    dt_history.append((new_state.t, clamped))
                    state = new_state
                    # keep the controller's growth proposal, not the endpoint clamp
                    if clamped < proposal:
                        control.dt = max(control.dt, min(proposal, control.dt_max))
                    cadence.after_step(state, eps)
        else:
            if dt is None:
                raise ValueError(f"scheme {scheme!r} needs a fixed dt")
            if dt <= 0:
                raise ValueError(f"dt must be positive, got {dt}")
            step_fn = _FIXED_STEPPERS[scheme]
            symbol = linear_symbol(grid, spec.diffusivities(p))
            n_full = int(np.floor((t_final - t0) / dt + 1e-9))
            remainder = (t_final - t0) - n_full * dt
            if remainder <= eps:
                remainder = 0.0
            tables = symbol.tables(dt)
            for k in range(n_full):
                state = step_fn(state, counting, grid, tables, dt, params=p, mask=mask)
                # pin time arithmetic to multiples of dt to avoid drift
                state = State(t=t0 + (k + 1) * dt, u=state.u, uhat=state.uhat)
                steps += 1
                cadence.after_step(state, eps)
            if remainder > 0.0:
                tables_last = symbol.tables(remainder)
                state = step_fn(state, counting, grid, tables_last, remainder,
                                params=p, mask=mask)
                state = State(t=t_final, u=state.u, uhat=state.uhat)
                steps += 1
                cadence.after_step(state, eps)
    except BlowUpError as exc:
        raise BlowUpError(exc.t, exc.max_abs,
                          f"model={spec.name} scheme={scheme}") from exc

    wall = time.perf_counter() - started
    cadence.finish(state)
    return RunSummary(
        model=spec.name,
        scheme=scheme,
        t_end=state.t,
        steps=steps,
        accepted=(control.accepted - accepted0) if scheme == "ck45" else steps,
        rejected=(control.rejected - rejected0) if scheme == "ck45" else 0,
        reaction_evals=counting.nfev,
        wall_time=wall,
        final_state=state,
        dt_history=dt_history,
    )
