"""The two consistency criteria and the two classicality criteria.

Consistency compares a wave function with the classical data at one
instant (interval probabilities). Classicality bounds the error-ket
norms of the fundamental sequences derived from the classical flow, and
is what guarantees that consistency survives time evolution. A
closed-form fast path covers Gaussian product states without touching a
grid.
"""

from __future__ import annotations

import math
import warnings
from itertools import combinations_with_replacement
from typing import Iterable, Sequence

import numpy as np

from .classical import ClassicalData, SequenceSpec, enumerate_fundamental_sequences
from .errors import AccuracyWarning, SequenceBudgetError
from .error_kets import mixed_error_ket
from .grids import GridState, boundary_coverage_ok, interval_probability, quadrature_moment
from .phase_space import PhaseSpace
from .reports import CriterionReport, CriterionRow

# Scan points standing in for the universally quantified p of the second
# consistency criterion; densest near 1 where the intervals grow fastest.
DEFAULT_P_SAMPLES = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99)

# A row passes iff value <= bound * (1 + BORDERLINE); keeps grid noise from
# flipping analytic equalities.
BORDERLINE = 1e-9

DEFAULT_SEQUENCE_CAP = 10_000


def _sequence_label(seq: SequenceSpec, space: PhaseSpace) -> str:
    return "(" + ",".join(seq.labels(space)) + ")"


def consistency_first(state: GridState, space: PhaseSpace, data: ClassicalData,
                      target_p0: float | None = None) -> CriterionReport:
    """Probability inside each classical interval; aggregate p0 is the minimum."""
    rows = []
    p0 = 1.0
    for var in space:
        lo = data.values[var.index] - data.margins[var.index]
        hi = data.values[var.index] + data.margins[var.index]
        prob = interval_probability(state, var, (lo, hi))
        p0 = min(p0, prob)
        bound = 0.0 if target_p0 is None else float(target_p0)
        rows.append(CriterionRow(
            item=var.label, value=prob, bound=bound,
            passed=prob + BORDERLINE >= bound, slack=prob - bound))
    aggregate = {"p0": p0}
    if target_p0 is not None:
        aggregate["target_p0"] = float(target_p0)
    return CriterionReport("consistency-1", rows, aggregate)


def consistency_second(state: GridState, space: PhaseSpace, data: ClassicalData,
                       M: int, p_samples: Sequence[float] = DEFAULT_P_SAMPLES) -> CriterionReport:
    """Interval checks over the inflated intervals a0 +- delta/(1-p)^(1/2M).

    Quantification over all p in [0,1) is approximated by the sampled
    scan; intervals that overrun the grid are clamped with a warning.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    p_samples = tuple(float(p) for p in p_samples)
    if any(not 0.0 <= p < 1.0 for p in p_samples):
        raise ValueError("p samples must lie in [0, 1)")
    rows = []
    worst = math.inf
    for var in space:
        a0 = data.values[var.index]
        delta = data.margins[var.index]
        for p in p_samples:
            half = delta / (1.0 - p) ** (1.0 / (2 * M))
            lo, hi = a0 - half, a0 + half
            clamped = not boundary_coverage_ok(state, var, lo, hi)
            if clamped:
                warnings.warn(
                    f"interval for {var.label} at p={p:g} exceeds the grid; clamped",
                    AccuracyWarning, stacklevel=2)
            prob = interval_probability(state, var, (lo, hi))
            slack = prob - p
            worst = min(worst, slack)
            rows.append(CriterionRow(
                item=f"{var.label}@p={p:g}", value=prob, bound=p,
                passed=prob + BORDERLINE >= p, slack=slack,
                extra={"clamped": clamped} if clamped else {}))
    return CriterionReport("consistency-2", rows, {"M": M, "worst_slack": worst})


def sufficient_consistency_order(state: GridState, space: PhaseSpace, data: ClassicalData,
                                 M_max: int) -> int:
    """Largest M <= M_max with 2M-th central moment <= delta^2M for every variable.

    This is the moment-based sufficient condition for M-order
    consistency; by the L^2M-norm monotonicity of moments the passing
    set is downward closed, so the scan stops at the first failure.
    """
    if M_max < 1:
        raise ValueError("M_max must be >= 1")
    best = 0
    for M in range(1, M_max + 1):
        ok = True
        for var in space:
            moment = quadrature_moment(state, var, data.values[var.index], 2 * M)
            if moment > data.margins[var.index] ** (2 * M) * (1.0 + BORDERLINE):
                ok = False
                break
        if not ok:
            break
        best = M
    return best


def composite_sequences(fundamentals: Iterable[SequenceSpec], M: int,
                        cap: int = DEFAULT_SEQUENCE_CAP) -> list[SequenceSpec]:
    """All multisets formed by concatenating M fundamental sequences, deduplicated.

    Raises SequenceBudgetError when the composite count would exceed ``cap``.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    base = sorted(fundamentals, key=lambda s: (len(s.indices), s.indices))
    n_raw = math.comb(len(base) + M - 1, M)
    if n_raw > max(100 * cap, 10 ** 6):
        raise SequenceBudgetError(
            f"{n_raw} raw sequence combinations exceed the enumeration budget (cap {cap})")
    out = set()
    for combo in combinations_with_replacement(base, M):
        merged: list[int] = []
        for seq in combo:
            merged.extend(seq.indices)
        out.add(SequenceSpec.multiset(merged))
        if len(out) > cap:
            raise SequenceBudgetError(
                f"more than {cap} composite sequences at order M={M}; raise the cap to proceed")
    return sorted(out, key=lambda s: (len(s.indices), s.indices))


def classicality_first(state: GridState, data: ClassicalData, system, M: int,
                       t_samples: Sequence[float],
                       cap: int = DEFAULT_SEQUENCE_CAP) -> CriterionReport:
    """Error-ket norms of all order-M composite sequences against margin products.

    Fundamental sequences come from the classical flow at the sampled
    times; composites are multisets of M of them. No product-state
    reduction is applied: every enumerated row is checked directly.
    """
    space = system.phase_space
    trajectories = [system.trajectory(t) for t in t_samples]
    fundamentals = enumerate_fundamental_sequences(trajectories)
    rows = []
    for seq in composite_sequences(fundamentals, M, cap):
        ket = mixed_error_ket(state, seq, data, space)
        norm_sq = ket.norm_sq()
        bound = seq.margin_product(data) ** 2
        rows.append(CriterionRow(
            item=_sequence_label(seq, space), value=norm_sq, bound=bound,
            passed=norm_sq <= bound * (1.0 + BORDERLINE),
            slack=norm_sq / bound if bound > 0 else math.inf))
    return CriterionReport("classicality-1", rows, {
        "M": M,
        "fundamental_count": len(fundamentals),
        "composite_count": len(rows),
    })


def classicality_second(state: GridState, data: ClassicalData, system, p0: float,
                        t_samples: Sequence[float],
                        cap: int = DEFAULT_SEQUENCE_CAP) -> CriterionReport:
    """Fundamental-sequence norms against (prod delta)^2 (1 - p0).

    Also reports the largest p0 that would pass, clamped to [0, 1).
    """
    if not 0.0 <= p0 < 1.0:
        raise ValueError(f"p0 must lie in [0, 1), got {p0}")
    space = system.phase_space
    trajectories = [system.trajectory(t) for t in t_samples]
    fundamentals = sorted(enumerate_fundamental_sequences(trajectories),
                          key=lambda s: (len(s.indices), s.indices))
    if len(fundamentals) > cap:
        raise SequenceBudgetError(f"more than {cap} fundamental sequences")
    rows = []
    worst_ratio = 0.0
    for seq in fundamentals:
        ket = mixed_error_ket(state, seq, data, space)
        norm_sq = ket.norm_sq()
        base = seq.margin_product(data) ** 2
        bound = base * (1.0 - p0)
        worst_ratio = max(worst_ratio, norm_sq / base if base > 0 else math.inf)
        rows.append(CriterionRow(
            item=_sequence_label(seq, space), value=norm_sq, bound=bound,
            passed=norm_sq <= bound * (1.0 + BORDERLINE),
            slack=norm_sq / bound if bound > 0 else math.inf))
    max_p0 = min(max(1.0 - worst_ratio, 0.0), 1.0 - 1e-15)
    return CriterionReport("classicality-2", rows, {
        "p0": p0,
        "max_p0": max_p0,
        "fundamental_count": len(fundamentals),
    })


def _double_factorial_odd(n: int) -> int:
    """(2n - 1)!! with the empty-product convention for n = 0."""
    out = 1
    for k in range(1, 2 * n, 2):
        out *= k
    return out


def gaussian_closed_norm_sq(seq: SequenceSpec, widths: Sequence[float], dof: int,
                            hbar: float, momentum_width: str = "exact") -> float | None:
    """Closed-form error-ket norm^2 for a centered product Gaussian.

    Factorizes over degrees of freedom; returns None when the sequence
    mixes a position and its own conjugate momentum (no product closed
    form -- those rows are grid-only). ``momentum_width`` selects the
    exact second-moment width hbar/(2 w) or the larger printed variant
    hbar/(sqrt(2) w) reported for comparison.
    """
    counts = [0] * (2 * dof)
    for idx in seq.indices:
        counts[idx] += 1
    norm_sq = 1.0
    for d in range(dof):
        n_pos, n_mom = counts[d], counts[d + dof]
        if n_pos and n_mom:
            return None
        if n_pos:
            norm_sq *= _double_factorial_odd(n_pos) * widths[d] ** (2 * n_pos)
        if n_mom:
            if momentum_width == "exact":
                sigma = hbar / (2.0 * widths[d])
            elif momentum_width == "paper":
                sigma = hbar / (math.sqrt(2.0) * widths[d])
            else:
                raise ValueError(f"unknown momentum_width {momentum_width!r}")
            norm_sq *= _double_factorial_odd(n_mom) * sigma ** (2 * n_mom)
    return norm_sq


def gaussian_fastpath(widths: Sequence[float], data: ClassicalData, system, M: int,
                      t_samples: Sequence[float] | None = None, hbar: float = 1.0,
                      cap: int = DEFAULT_SEQUENCE_CAP) -> CriterionReport:
    """Grid-free classicality rows for product Gaussians centered on the data.

    Evaluates every order-M composite sequence that does not mix a
    position with its own momentum via exact Gaussian moments
    ((2n-1)!! w^2n per factor); each row also carries the value the
    printed momentum constant hbar/(sqrt(2) w) would give. Sequences
    mixing a conjugate pair are counted but left to the grid route.
    """
    space = system.phase_space
    dof = space.dof
    widths = tuple(float(w) for w in widths)
    if len(widths) != dof:
        raise ValueError(f"need one width per degree of freedom ({dof})")
    if t_samples is None:
        t_samples = tuple(0.25 * (i + 1) for i in range(8))
    trajectories = [system.trajectory(t) for t in t_samples]
    fundamentals = enumerate_fundamental_sequences(trajectories)
    rows = []
    skipped = 0
    for seq in composite_sequences(fundamentals, M, cap):
        norm_sq = gaussian_closed_norm_sq(seq, widths, dof, hbar, "exact")
        if norm_sq is None:
            skipped += 1
            continue
        paper = gaussian_closed_norm_sq(seq, widths, dof, hbar, "paper")
        bound = seq.margin_product(data) ** 2
        rows.append(CriterionRow(
            item=_sequence_label(seq, space), value=norm_sq, bound=bound,
            passed=norm_sq <= bound * (1.0 + BORDERLINE),
            slack=norm_sq / bound if bound > 0 else math.inf,
            extra={"paper_norm_sq": paper,
                   "paper_pass": paper <= bound * (1.0 + BORDERLINE)}))
    return CriterionReport("classicality-1", rows, {
        "M": M,
        "route": "gaussian-fastpath",
        "mixed_rows_skipped": skipped,
    })
