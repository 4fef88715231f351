"""Classical side of the comparison.

Trajectories of the canonical variables as polynomials in the *initial*
variables (closed forms for the builtin systems, truncated Lie series
otherwise), propagation of initial error margins to time t, enumeration
of the variable sequences with non-vanishing mixed partials, and a
Monte-Carlo containment check of the propagated margins against a
direct ODE integration.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .phase_space import PhaseSpace, PolynomialObservable, poisson_bracket

DEFAULT_LIE_ORDER = 8


@dataclass(frozen=True)
class ClassicalData:
    """Initial values and strictly positive error margins, one per variable."""

    values: tuple[float, ...]
    margins: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "margins", tuple(float(m) for m in self.margins))
        if len(self.values) != len(self.margins):
            raise ValueError("values and margins must have equal length")
        if len(self.values) % 2:
            raise ValueError("need one entry per canonical variable (even count)")
        if any(m <= 0 for m in self.margins):
            raise ValueError("error margins must be strictly positive")

    @property
    def n_vars(self) -> int:
        return len(self.values)

    @classmethod
    def from_labels(cls, space: PhaseSpace, values: dict, margins: dict) -> "ClassicalData":
        v = [float(values[lbl]) for lbl in space.labels()]
        m = [float(margins[lbl]) for lbl in space.labels()]
        return cls(tuple(v), tuple(m))


@dataclass(frozen=True)
class SequenceSpec:
    """An ordered tuple of canonical-variable indices.

    Enumeration stores sequences in canonical sorted order (mixed
    partials are symmetric, so only the multiset matters there); error
    kets apply the factors in the order listed here.
    """

    indices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if not self.indices:
            raise ValueError("a sequence must contain at least one variable")

    @classmethod
    def multiset(cls, indices: Iterable[int]) -> "SequenceSpec":
        return cls(tuple(sorted(indices)))

    def __len__(self):
        return len(self.indices)

    def sorted(self) -> "SequenceSpec":
        return SequenceSpec(tuple(sorted(self.indices)))

    def labels(self, space: PhaseSpace) -> tuple[str, ...]:
        return tuple(space[i].label for i in self.indices)

    def margin_product(self, data: ClassicalData) -> float:
        out = 1.0
        for i in self.indices:
            out *= data.margins[i]
        return out

    def concat(self, other: "SequenceSpec") -> "SequenceSpec":
        return SequenceSpec(self.indices + other.indices)


@dataclass(frozen=True)
class Trajectory:
    """Flow of the canonical variables at one time, as polynomials in the
    initial variables (numeric coefficients; e.g. cos(t) shows up as a float)."""

    time: float
    components: tuple[PolynomialObservable, ...]
    provenance: str  # "closed-form" | "lie-series"
    truncation_order: int | None = None
    exact: bool = True

    @property
    def n_vars(self) -> int:
        return len(self.components)

    def evaluate(self, initial) -> np.ndarray:
        """Map initial phase-space points (2N rows) to time-t points."""
        return np.asarray([comp.evaluate(initial) for comp in self.components])


class BuiltinSystem:
    """A named dynamical system with a polynomial Hamiltonian and an exact flow."""

    def __init__(self, name: str, space: PhaseSpace, hamiltonian: PolynomialObservable,
                 params: dict, flow: Callable[[float], tuple[PolynomialObservable, ...]]):
        self.name = name
        self.phase_space = space
        self.hamiltonian = hamiltonian
        self.params = dict(params)
        self._flow = flow

    def trajectory(self, t: float) -> Trajectory:
        return Trajectory(float(t), self._flow(float(t)), "closed-form")

    def __repr__(self):
        args = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"BuiltinSystem({self.name}, {args})"


class PolynomialSystem:
    """Generic polynomial Hamiltonian; trajectories come from a truncated Lie series."""

    def __init__(self, space: PhaseSpace, hamiltonian: PolynomialObservable,
                 lie_order: int = DEFAULT_LIE_ORDER):
        if hamiltonian.n_vars != space.n_vars:
            raise ValueError("Hamiltonian variable count does not match the phase space")
        self.name = "polynomial"
        self.phase_space = space
        self.hamiltonian = hamiltonian
        self.params: dict = {}
        self.lie_order = int(lie_order)

    def trajectory(self, t: float) -> Trajectory:
        return lie_series_trajectory(self.hamiltonian, t, self.lie_order)


def _harmonic_flow(m: float, omega: float):
    def flow(t: float):
        c, s = math.cos(omega * t), math.sin(omega * t)
        q = PolynomialObservable(2, {(1, 0): c, (0, 1): s / (m * omega)})
        p = PolynomialObservable(2, {(1, 0): -m * omega * s, (0, 1): c})
        return (q.normalized(), p.normalized())

    return flow


def _coupled_flow(m: float, mass_heavy: float, k: float):
    # variable order: q=0, Q=1, p=2, P=3
    def flow(t: float):
        q = PolynomialObservable(4, {
            (1, 0, 0, 0): 1.0,
            (0, 0, 1, 0): t / m,
            (0, 1, 1, 0): 2.0 * k * t,
            (0, 0, 1, 1): k * t * t / mass_heavy,
            (0, 0, 3, 0): -(k * k) * t ** 3 / (3.0 * mass_heavy),
        })
        p = PolynomialObservable.variable(4, 2)
        heavy_q = PolynomialObservable(4, {
            (0, 1, 0, 0): 1.0,
            (0, 0, 0, 1): t / mass_heavy,
            (0, 0, 2, 0): -k * t * t / (2.0 * mass_heavy),
        })
        heavy_p = PolynomialObservable(4, {
            (0, 0, 0, 1): 1.0,
            (0, 0, 2, 0): -k * t,
        })
        return tuple(f.normalized() for f in (q, heavy_q, p, heavy_p))

    return flow


def _free_flow(m: float):
    def flow(t: float):
        q = PolynomialObservable(2, {(1, 0): 1.0, (0, 1): t / m})
        return (q, PolynomialObservable.variable(2, 1))

    return flow


def _reject_extra(name: str, params: dict):
    if params:
        raise ValueError(f"system {name!r} does not take parameters {sorted(params)}")


def get_system(name: str, **params) -> BuiltinSystem:
    """Builtin system factory.

    ``harmonic_oscillator`` (params m, omega), ``coupled_qp2``
    (params m, M, k; a light particle (q, p) quadratically coupled to a
    heavy one (Q, P)) and ``free_particle`` (param m; diagnostic).
    """
    if name == "harmonic_oscillator":
        m = float(params.pop("m", 1.0))
        omega = float(params.pop("omega", 1.0))
        _reject_extra(name, params)
        space = PhaseSpace(["q"])
        ham = PolynomialObservable(2, {(0, 2): 0.5 / m, (2, 0): 0.5 * m * omega * omega})
        return BuiltinSystem(name, space, ham, {"m": m, "omega": omega}, _harmonic_flow(m, omega))
    if name == "coupled_qp2":
        m = float(params.pop("m", 1.0))
        mass_heavy = float(params.pop("M", 1.0))
        k = float(params.pop("k", 1.0))
        _reject_extra(name, params)
        space = PhaseSpace(["q", "Q"])
        ham = PolynomialObservable(4, {
            (0, 0, 0, 2): 0.5 / mass_heavy,
            (0, 0, 2, 0): 0.5 / m,
            (0, 1, 2, 0): k,
        })
        return BuiltinSystem(name, space, ham, {"m": m, "M": mass_heavy, "k": k},
                             _coupled_flow(m, mass_heavy, k))
    if name == "free_particle":
        m = float(params.pop("m", 1.0))
        _reject_extra(name, params)
        space = PhaseSpace(["q"])
        ham = PolynomialObservable(2, {(0, 2): 0.5 / m})
        return BuiltinSystem(name, space, ham, {"m": m}, _free_flow(m))
    raise ValueError(
        f"unknown builtin system {name!r}; available: harmonic_oscillator, coupled_qp2, free_particle")


def builtin_trajectory(system: str | BuiltinSystem, t: float, **params) -> Trajectory:
    """Closed-form trajectory of a builtin system at time t."""
    if isinstance(system, str):
        system = get_system(system, **params)
    return system.trajectory(t)


def lie_series_trajectory(hamiltonian: PolynomialObservable, t: float, order: int) -> Trajectory:
    """Truncated Lie series a_j(t) = sum_m t^m/m! {..{a_j, H}.., H} up to ``order``.

    Marks the trajectory exact when every nested bracket vanished before
    the truncation order was reached.
    """
    if order < 1:
        raise ValueError("truncation order must be >= 1")
    n = hamiltonian.n_vars
    components = []
    all_exact = True
    for j in range(n):
        bracket = PolynomialObservable.variable(n, j)
        total = bracket
        terminated = False
        for m in range(1, order + 1):
            bracket = poisson_bracket(bracket, hamiltonian)
            if bracket.is_zero():
                terminated = True
                break
            total = total + bracket * (t ** m / math.factorial(m))
        else:
            # one more bracket decides whether truncation actually cut anything
            terminated = poisson_bracket(bracket, hamiltonian).is_zero()
        components.append(total.normalized())
        all_exact = all_exact and terminated
    return Trajectory(float(t), tuple(components), "lie-series", order, all_exact)


def propagate_error_margin(component: PolynomialObservable, data: ClassicalData) -> float:
    """Propagated margin: sum over all mixed partials of |d^n F(a0)| * prod(delta) / multiplicity.

    Equals sum_{n>=1} (1/n!) sum_{k_1..k_n} |d^n F / da_k1..da_kn|(a0)
    delta_k1..delta_kn; grouping ordered index tuples by multiset turns
    the weight into 1/prod_i(beta_i!) for derivative multi-index beta.
    The sum is finite because F is a polynomial.
    """
    if component.n_vars != data.n_vars:
        raise ValueError("trajectory component and classical data sizes differ")
    caps = component.max_exponents()
    total = 0.0
    for beta in product(*(range(c + 1) for c in caps)):
        n = sum(beta)
        if n == 0:
            continue
        deriv = component.diff_multi(beta)
        if deriv.is_zero():
            continue
        weight = 1.0
        for b, delta in zip(beta, data.margins):
            if b:
                weight *= delta ** b / math.factorial(b)
        total += abs(float(deriv.evaluate(data.values))) * weight
    return total


def propagate_all_margins(trajectory: Trajectory, data: ClassicalData) -> tuple[float, ...]:
    return tuple(propagate_error_margin(c, data) for c in trajectory.components)


def enumerate_fundamental_sequences(trajectories: Iterable[Trajectory]) -> set[SequenceSpec]:
    """All variable multisets with a structurally nonzero mixed partial.

    A mixed partial d^n F_j / da_k1..da_kn is structurally nonzero iff
    some monomial of F_j dominates the derivative multi-index
    componentwise, so the enumeration walks monomials and emits every
    nonzero sub-multi-index, over all components and all sampled times.
    """
    trajectories = list(trajectories)
    if not any(tr.time > 0 for tr in trajectories):
        raise ValueError("need at least one sampled time t > 0")
    found: set[SequenceSpec] = set()
    for tr in trajectories:
        for comp in tr.components:
            for exps in comp.terms:
                for beta in product(*(range(e + 1) for e in exps)):
                    if sum(beta) == 0:
                        continue
                    indices = []
                    for i, b in enumerate(beta):
                        indices.extend([i] * b)
                    found.add(SequenceSpec.multiset(indices))
    return found


def default_sample_times(t_max: float, count: int = 8) -> tuple[float, ...]:
    """Sampling times spanning (0, t_max] used for sequence enumeration."""
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    return tuple(t_max * (i + 1) / count for i in range(count))


def hamiltonian_vector_field(hamiltonian: PolynomialObservable) -> tuple[PolynomialObservable, ...]:
    """Right-hand side of Hamilton's equations, da_j/dt = {a_j, H}."""
    n = hamiltonian.n_vars
    return tuple(poisson_bracket(PolynomialObservable.variable(n, j), hamiltonian) for j in range(n))


def flow_points(system, points: np.ndarray, t: float,
                rtol: float = 1e-10, atol: float = 1e-12) -> np.ndarray:
    """Integrate Hamilton's equations for a batch of initial points.

    ``points`` has shape (2N, n_points); returns the same shape at time t.
    This is the ODE route, independent of the polynomial trajectories.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n_vars, n_pts = points.shape
    field = hamiltonian_vector_field(system.hamiltonian)

    def rhs(_t, y):
        state = y.reshape(n_vars, n_pts)
        rows = [np.broadcast_to(np.asarray(f.evaluate(state), dtype=float), (n_pts,))
                for f in field]
        return np.concatenate(rows)

    if t == 0.0:
        return points.copy()
    sol = solve_ivp(rhs, (0.0, t), points.reshape(-1), method="RK45",
                    rtol=rtol, atol=atol, dense_output=False)
    if not sol.success:
        raise RuntimeError(f"ODE integration failed: {sol.message}")
    return sol.y[:, -1].reshape(n_vars, n_pts)


def monte_carlo_margin_check(system, data: ClassicalData, t: float, samples: int,
                             seed: int = 0, workers: int = 1, slack: float = 1e-9) -> int:
    """Count sampled initial points that escape the propagated margin box.

    Draws points uniformly in the initial box, flows them with the ODE
    integrator, and compares against [a_j(t) +- delta_j(t)] from the
    polynomial trajectory and margin propagation. ``slack`` absorbs ODE
    integration error; the Taylor-majorant margin itself is rigorous for
    polynomial flows, so the expected count is zero.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    trajectory = system.trajectory(t)
    centers = trajectory.evaluate(np.asarray(data.values)[:, None])[:, 0]
    margins = np.asarray(propagate_all_margins(trajectory, data))
    lo = np.asarray(data.values) - np.asarray(data.margins)
    hi = np.asarray(data.values) + np.asarray(data.margins)

    seeds = np.random.SeedSequence(seed).spawn(max(1, workers))
    counts = np.array_split(np.arange(samples), len(seeds))

    def run_chunk(chunk_seed, n_chunk):
        if n_chunk == 0:
            return 0
        rng = np.random.default_rng(chunk_seed)
        pts = rng.uniform(lo[:, None], hi[:, None], size=(data.n_vars, n_chunk))
        flowed = flow_points(system, pts, t)
        tol = margins[:, None] * (1.0 + slack) + 1e-12
        outside = np.abs(flowed - centers[:, None]) > tol
        return int(np.count_nonzero(outside.any(axis=0)))

    chunks = [(s, len(c)) for s, c in zip(seeds, counts)]
    if len(chunks) == 1:
        return run_chunk(*chunks[0])
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        return sum(pool.map(lambda sc: run_chunk(*sc), chunks))
