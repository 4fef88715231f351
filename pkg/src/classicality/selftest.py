"""Built-in oracle cross-checks.

Every entry pits an implementation path against an independent route:
closed forms against grid quadrature, polynomial flows against an
adaptive ODE integrator, spectral evolution against the analytic
coherent-state solution. ``classicality selftest`` runs the battery and
prints one line per check.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .classical import (ClassicalData, flow_points, get_system, lie_series_trajectory,
                        monte_carlo_margin_check)
from .error_kets import spread_probability_guarantee_check
from .evolution import split_step_evolve
from .grids import (GridAxis, GridState, inner_product, interval_probability,
                    make_gaussian, product_state, quadrature_moment, to_rep)
from .phase_space import PolynomialObservable, poisson_bracket


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _check_bracket() -> CheckResult:
    q = PolynomialObservable.variable(2, 0)
    p = PolynomialObservable.variable(2, 1)
    ok = poisson_bracket(q, p).terms == {(0, 0): 1.0}
    h = (q ** 2 + p ** 2) * 0.5
    ok = ok and poisson_bracket(q, h) == p and poisson_bracket(p, h) == (q * -1.0)
    return CheckResult("poisson-bracket canonical relations", ok, "{q,p}=1, {q,H}=p, {p,H}=-q")


def _check_lie_vs_ode() -> CheckResult:
    system = get_system("harmonic_oscillator")
    t = 0.3
    trajectory = lie_series_trajectory(system.hamiltonian, t, 12)
    rng = np.random.default_rng(5)
    pts = rng.uniform(-1.0, 1.0, size=(2, 6))
    poly_route = trajectory.evaluate(pts)
    ode_route = flow_points(system, pts, t)
    err = float(np.abs(poly_route - ode_route).max())
    return CheckResult("Lie series vs ODE integrator (HO)", err < 1e-8, f"max |diff| = {err:.2e}")


def _check_coupled_termination() -> CheckResult:
    system = get_system("coupled_qp2", m=1.0, M=2.0, k=0.1)
    t = 0.8
    lie = lie_series_trajectory(system.hamiltonian, t, 8)
    closed = system.trajectory(t)
    worst = 0.0
    for a, b in zip(lie.components, closed.components):
        diff = (a - b).normalized()
        if not diff.is_zero():
            worst = max(worst, max(abs(c) for c in diff.terms.values()))
    return CheckResult("coupled flow: Lie series terminates on the closed form",
                       lie.exact and worst < 1e-12, f"exact={lie.exact}, residue={worst:.2e}")


def _check_margin_containment() -> CheckResult:
    system = get_system("harmonic_oscillator")
    data = ClassicalData((1.0, 0.0), (1.5, 1.5))
    bad = monte_carlo_margin_check(system, data, math.pi, 2000, seed=42)
    return CheckResult("margin box contains the ODE-flowed samples", bad == 0,
                       f"{bad} of 2000 samples escaped")


def _check_gaussian_moments() -> CheckResult:
    axis = GridAxis(get_system("harmonic_oscillator").phase_space[0], 1024, -12.0, 12.0)
    state = make_gaussian(0.0, 0.0, 0.7, axis)
    worst = 0.0
    for order in range(1, 5):
        grid = quadrature_moment(state, axis.variable, 0.0, 2 * order)
        closed = math.prod(range(1, 2 * order, 2)) * 0.7 ** (2 * order)
        worst = max(worst, abs(grid / closed - 1.0))
    return CheckResult("Gaussian moments: grid quadrature vs closed form", worst < 1e-8,
                       f"worst relative error = {worst:.2e}")


def _check_roundtrip() -> CheckResult:
    axis = GridAxis(get_system("harmonic_oscillator").phase_space[0], 512, -12.0, 12.0)
    state = make_gaussian(0.5, 1.0, 0.6, axis)
    back = to_rep(to_rep(state, 0, "momentum"), 0, "position")
    err = float(np.abs(back.amplitudes - state.amplitudes).max())
    return CheckResult("representation round trip is the identity", err < 1e-12,
                       f"max |diff| = {err:.2e}")


def _check_interval_vs_erf() -> CheckResult:
    axis = GridAxis(get_system("harmonic_oscillator").phase_space[0], 2048, -12.0, 12.0)
    state = make_gaussian(0.0, 0.0, 0.8, axis)
    grid = interval_probability(state, axis.variable, (-0.8, 0.8))
    exact = float(erf(1.0 / math.sqrt(2.0)))
    return CheckResult("interval probability vs error function", abs(grid - exact) < 1e-4,
                       f"|diff| = {abs(grid - exact):.2e}")


def _check_spread_guarantee() -> CheckResult:
    system = get_system("harmonic_oscillator")
    axis = GridAxis(system.phase_space[0], 256, -6.0, 6.0)
    rng = np.random.default_rng(11)
    failures = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for _ in range(10):
            amp = rng.normal(size=256) + 1j * rng.normal(size=256)
            state = GridState((axis,), amp).normalized()
            for n in (1, 2, 3):
                for p in (0.5, 0.9, 0.99):
                    if not spread_probability_guarantee_check(state, axis.variable, 0.3, n, p):
                        failures += 1
    return CheckResult("spread guarantee on random states", failures == 0,
                       f"{failures} violations")


def _check_coherent_revival() -> CheckResult:
    system = get_system("harmonic_oscillator")
    axis = GridAxis(system.phase_space[0], 512, -14.0, 14.0)
    state = make_gaussian(1.0, 0.0, math.sqrt(0.5), axis)
    steps = 1600
    evolved = split_step_evolve(state, system, 2.0 * math.pi / steps, steps)
    fidelity = abs(inner_product(state, evolved)) ** 2
    return CheckResult("coherent state revives after one period", fidelity >= 1.0 - 1e-6,
                       f"fidelity = {fidelity:.9f}")


def _check_momentum_conservation() -> CheckResult:
    system = get_system("coupled_qp2", m=1.0, M=2.0, k=0.1)
    space = system.phase_space
    ax_q = GridAxis(space[0], 128, -12.0, 12.0)
    ax_heavy = GridAxis(space[1], 128, -12.0, 12.0)
    state = product_state(make_gaussian(0.0, 0.5, 1.0, ax_q),
                          make_gaussian(0.0, 0.0, 1.0, ax_heavy))
    before = to_rep(state, 0, "momentum")
    marg0 = (np.abs(before.amplitudes) ** 2).sum(axis=1)
    evolved = split_step_evolve(state, system, 0.01, 300)
    after = to_rep(evolved, 0, "momentum")
    marg1 = (np.abs(after.amplitudes) ** 2).sum(axis=1)
    drift = float(np.abs(marg1 - marg0).max() * state.axes[1].spacing)
    return CheckResult("light-particle momentum marginal is conserved", drift < 1e-10,
                       f"max drift = {drift:.2e}")


ALL_CHECKS = (
    _check_bracket,
    _check_lie_vs_ode,
    _check_coupled_termination,
    _check_margin_containment,
    _check_gaussian_moments,
    _check_roundtrip,
    _check_interval_vs_erf,
    _check_spread_guarantee,
    _check_coherent_revival,
    _check_momentum_conservation,
)


def run_selftest() -> list[CheckResult]:
    return [check() for check in ALL_CHECKS]
