"""Quantum time evolution of the builtin systems and the consistency-
preservation check along the flow.

Strang-split spectral stepping. The harmonic oscillator (and the
free-particle diagnostic) alternate between the position-diagonal
potential and the momentum-diagonal kinetic term. The coupled system is
stepped with the light particle held in its momentum representation,
where p is conserved: the full Hamiltonian splits into a (Q, p)-diagonal
phase and the heavy kinetic term, which makes the light momentum
marginal exactly invariant on the grid.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .classical import ClassicalData, default_sample_times, propagate_all_margins
from .criteria import BORDERLINE, classicality_first
from .errors import GridCoverageError
from .grids import GridState, MOMENTUM, POSITION, cumulative_probability, \
    marginal_density, quadrature_moment, to_rep, variable_span
from .reports import CriterionReport, EvolutionRecord, EvolutionRow, MomentRow


class _Stepper1D:
    """Potential/kinetic Strang splitting for one-axis systems."""

    def __init__(self, state: GridState, mass: float, potential: np.ndarray):
        state = to_rep(state, 0, POSITION)
        self.axes = state.axes
        self.hbar = state.hbar
        self.amp = state.amplitudes.copy()
        self.potential = potential
        self.kinetic = state.axes[0].momenta(state.hbar) ** 2 / (2.0 * mass)
        self._dt = None
        self._exp_v_half = None
        self._exp_k = None

    def set_dt(self, dt: float):
        if self._dt == dt:
            return
        self._dt = dt
        self._exp_v_half = np.exp(-0.5j * self.potential * dt / self.hbar)
        self._exp_k = np.exp(-1j * self.kinetic * dt / self.hbar)

    def advance(self, steps: int):
        for _ in range(steps):
            self.amp *= self._exp_v_half
            self.amp = np.fft.ifft(np.fft.fft(self.amp) * self._exp_k)
            self.amp *= self._exp_v_half

    def snapshot(self) -> GridState:
        return GridState(self.axes, self.amp, (POSITION,), self.hbar)


class _StepperCoupled:
    """Coupled light/heavy stepping with the light axis kept in momentum space."""

    def __init__(self, state: GridState, m: float, mass_heavy: float, k: float):
        state = to_rep(state, 0, MOMENTUM)
        state = to_rep(state, 1, POSITION)
        self.axes = state.axes
        self.hbar = state.hbar
        self.amp = state.amplitudes.copy()
        p = state.axes[0].momenta(state.hbar)[:, None]
        heavy_pos = state.axes[1].positions()[None, :]
        heavy_mom = state.axes[1].momenta(state.hbar)[None, :]
        self.diagonal = p ** 2 / (2.0 * m) + k * heavy_pos * p ** 2
        self.kinetic_heavy = heavy_mom ** 2 / (2.0 * mass_heavy)
        self._dt = None
        self._exp_a_half = None
        self._exp_b = None

    def set_dt(self, dt: float):
        if self._dt == dt:
            return
        self._dt = dt
        self._exp_a_half = np.exp(-0.5j * self.diagonal * dt / self.hbar)
        self._exp_b = np.exp(-1j * self.kinetic_heavy * dt / self.hbar)

    def advance(self, steps: int):
        for _ in range(steps):
            self.amp *= self._exp_a_half
            self.amp = np.fft.ifft(np.fft.fft(self.amp, axis=1) * self._exp_b, axis=1)
            self.amp *= self._exp_a_half

    def snapshot(self) -> GridState:
        return GridState(self.axes, self.amp, (MOMENTUM, POSITION), self.hbar)


def make_stepper(state: GridState, system):
    if system.name in ("harmonic_oscillator", "free_particle"):
        if len(state.axes) != 1:
            raise ValueError(f"{system.name} needs a 1-axis state")
        x = state.axes[0].positions()
        m = system.params["m"]
        if system.name == "harmonic_oscillator":
            omega = system.params["omega"]
            potential = 0.5 * m * omega * omega * x ** 2
        else:
            potential = np.zeros_like(x)
        return _Stepper1D(state, m, potential)
    if system.name == "coupled_qp2":
        if len(state.axes) != 2:
            raise ValueError("coupled_qp2 needs a 2-axis state")
        return _StepperCoupled(state, system.params["m"], system.params["M"],
                               system.params["k"])
    raise ValueError(f"no split-step scheme for system {system.name!r}")


def split_step_evolve(state: GridState, system, dt: float, steps: int) -> GridState:
    """Evolve by ``steps`` Strang steps of size ``dt``; returns the state in
    the representation the input used."""
    if dt <= 0 or steps < 0:
        raise ValueError("need dt > 0 and steps >= 0")
    stepper = make_stepper(state, system)
    stepper.set_dt(dt)
    stepper.advance(steps)
    out = stepper.snapshot()
    for i, rep in enumerate(state.rep):
        out = to_rep(out, i, rep)
    return out


def evolved_moment(state_t: GridState, variable, classical_value: float, order: int) -> float:
    """Central moment of the evolved state about the classically propagated value."""
    return quadrature_moment(state_t, variable, classical_value, order)


def _moment(coords: np.ndarray, density: np.ndarray, center: float, order: int) -> float:
    spacing = coords[1] - coords[0]
    return float(np.sum(density * (coords - center) ** order) * spacing)


def verify_consistency_over_time(state: GridState, data: ClassicalData, system,
                                 t_samples: Sequence[float], P_list: Sequence[float],
                                 M: int, total_steps: int = 2000,
                                 require_classical: bool = True,
                                 sequence_cap: int = 10_000,
                                 marginal_drift_of=None) -> EvolutionRecord:
    """Check that classically propagated intervals keep their promised probability.

    At every sampled time the classical values a_j(t) and margins
    delta_j(t) are computed from the flow, the state is stepped to t,
    and for each requested P the probability inside
    [a_j(t) +- delta_j(t) / (1-P)^(1/2M)] must reach P. Grid coverage of
    the widest tested interval (inflated by 8 initial widths) is checked
    before any stepping. The initial state must pass order-M
    classicality unless ``require_classical`` is False (failure-mode
    runs are legitimate: the conditions are sufficient, not necessary).

    ``marginal_drift_of`` names a variable whose marginal density is
    compared pointwise against its initial shape; the maximum drift over
    the run lands in the aggregate (used for conserved quantities such
    as the coupled system's light-particle momentum).
    """
    space = system.phase_space
    t_samples = tuple(float(t) for t in t_samples)
    if any(b <= a for a, b in zip(t_samples, t_samples[1:])) or any(t < 0 for t in t_samples):
        raise ValueError("t_samples must be non-negative and strictly increasing")
    P_list = tuple(float(p) for p in P_list)
    if any(not 0.0 <= p < 1.0 for p in P_list):
        raise ValueError("every P must lie in [0, 1)")
    if M < 1:
        raise ValueError("M must be >= 1")
    window = t_samples[-1]
    if window <= 0:
        raise ValueError("the last sample time must be positive")

    inflate = max((1.0 - p) ** (-1.0 / (2 * M)) for p in P_list)
    trajectories = {t: system.trajectory(t) for t in t_samples}
    centers = {t: np.asarray(trajectories[t].evaluate(data.values), dtype=float)
               for t in t_samples}
    margins = {t: np.asarray(propagate_all_margins(trajectories[t], data))
               for t in t_samples}

    # coverage pre-check against the widest interval plus the packet support
    widths0 = [math.sqrt(quadrature_moment(state, var, data.values[var.index], 2))
               for var in space]
    for t in t_samples:
        for var in space:
            j = var.index
            half = max(inflate * margins[t][j], 8.0 * widths0[j])
            lo, hi = centers[t][j] - half, centers[t][j] + half
            span = variable_span(state, var)
            if lo < span[0] or hi > span[1]:
                raise GridCoverageError(
                    f"grid span {span} for {var.label} cannot hold "
                    f"[{lo:g}, {hi:g}] required at t={t:g}")

    gate = classicality_first(state, data, system, M,
                              default_sample_times(window), cap=sequence_cap)
    if require_classical and not gate.passed:
        raise ValueError(
            f"initial state fails order-{M} classicality; "
            f"pass require_classical=False to run anyway")

    dt_target = window / total_steps
    stepper = make_stepper(state, system)
    rows: list[EvolutionRow] = []
    moment_rows: list[MomentRow] = []
    drift = 0.0
    reference = None
    if marginal_drift_of is not None:
        reference = marginal_density(state, marginal_drift_of)[1]
    prev_t = 0.0
    for t in t_samples:
        if t > prev_t:
            n = max(1, round((t - prev_t) / dt_target))
            stepper.set_dt((t - prev_t) / n)
            stepper.advance(n)
            prev_t = t
        snap = stepper.snapshot()
        for var in space:
            j = var.index
            coords, density = marginal_density(snap, var)
            if marginal_drift_of is not None and var.index == marginal_drift_of.index:
                drift = max(drift, float(np.abs(density - reference).max()))
            m2 = _moment(coords, density, centers[t][j], 2)
            m_high = _moment(coords, density, centers[t][j], 2 * M)
            moment_rows.append(MomentRow(
                t=t, variable=var.label, moment2=m2, bound2=float(margins[t][j] ** 2),
                moment_high=m_high, bound_high=float(margins[t][j] ** (2 * M)),
                order_high=2 * M))
            for P in P_list:
                half = margins[t][j] / (1.0 - P) ** (1.0 / (2 * M))
                lo, hi = float(centers[t][j] - half), float(centers[t][j] + half)
                prob = cumulative_probability(coords, density, lo, hi)
                rows.append(EvolutionRow(
                    t=t, variable=var.label, classical_value=float(centers[t][j]),
                    margin=float(margins[t][j]), interval_lo=lo, interval_hi=hi,
                    probability=prob, p_required=P,
                    passed=prob + BORDERLINE >= P))
    final_norm = stepper.snapshot().norm_sq()
    aggregate = {
        "M": M,
        "P_list": list(P_list),
        "min_slack": min((r.probability - r.p_required for r in rows), default=math.inf),
        "initial_classicality_passed": gate.passed,
        "norm_drift": abs(final_norm - 1.0),
        "total_steps": total_steps,
    }
    if marginal_drift_of is not None:
        aggregate["marginal_drift"] = drift
    return EvolutionRecord(times=t_samples, rows=rows, moments=moment_rows,
                           aggregate=aggregate)
