"""Error kets: (A_n - a_n) ... (A_1 - a_1) |psi> on grid states.

Position factors multiply pointwise by (x - center); momentum factors
are applied spectrally (transform the axis, multiply by (p - center),
transform back), which keeps them exact on the grid. The resulting
arrays are deliberately *not* normalized: their squared norms are the
moments the classicality criteria compare against margin products.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classical import ClassicalData, SequenceSpec
from .grids import GridState, MOMENTUM, POSITION, inner_product, interval_probability, \
    quadrature_moment, to_rep
from .phase_space import CanonicalVariable


@dataclass(frozen=True)
class ErrorKet:
    """Result of applying a sequence of error factors to a source state."""

    state: GridState                 # unnormalized amplitudes
    sequence: SequenceSpec           # factors in application order (first applied first)
    centers: tuple[float, ...]
    source: GridState

    def __post_init__(self):
        if len(self.sequence) != len(self.centers):
            raise ValueError("sequence and centers lengths differ")

    def norm_sq(self) -> float:
        return self.state.norm_sq()


def _apply_factor(state: GridState, variable: CanonicalVariable, center: float) -> GridState:
    """(a_hat - center) |state>, preserving the axis' original representation."""
    axis_index, rep_needed = state.axis_of(variable)
    original = state.rep[axis_index]
    work = to_rep(state, axis_index, rep_needed)
    coords = work.coordinates(axis_index)
    shape = [1] * len(work.axes)
    shape[axis_index] = len(coords)
    factor = (coords - float(center)).reshape(shape)
    work = work.with_amplitudes(work.amplitudes * factor)
    return to_rep(work, axis_index, original)


def apply_error_factor(state: GridState, variable: CanonicalVariable, center: float) -> ErrorKet:
    """First-order error ket (a_hat - center)|psi>."""
    return ErrorKet(
        state=_apply_factor(state, variable, center),
        sequence=SequenceSpec((variable.index,)),
        centers=(float(center),),
        source=state,
    )


def mixed_error_ket(state: GridState, sequence: SequenceSpec, data: ClassicalData,
                    variables) -> ErrorKet:
    """Mixed error ket for a variable sequence, centers taken from the classical data.

    The first listed sequence element is applied first (it sits
    rightmost in the operator product). ``variables`` is the phase
    space (or any index-addressable collection of CanonicalVariable).
    """
    current = state
    centers = []
    for idx in sequence.indices:
        var = variables[idx]
        center = data.values[idx]
        current = _apply_factor(current, var, center)
        centers.append(center)
    return ErrorKet(state=current, sequence=sequence, centers=tuple(centers), source=state)


def error_ket_norm_sq(ket: ErrorKet) -> float:
    return ket.norm_sq()


def ket_overlap(a: ErrorKet, b: ErrorKet) -> complex:
    """<E_a | E_b> on the shared grid."""
    return inner_product(a.state, b.state)


def nth_order_spread(norm_sq: float, n: int, p: float) -> float:
    """Half-width (norm_sq / (1 - p))^(1/2n) of the interval that is
    guaranteed to hold probability at least p."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"p must lie in [0, 1), got {p}")
    if n < 1:
        raise ValueError("n must be >= 1")
    if norm_sq < 0:
        raise ValueError("norm_sq must be non-negative")
    return float((norm_sq / (1.0 - p)) ** (1.0 / (2 * n)))


def spread_probability_guarantee_check(state: GridState, variable: CanonicalVariable,
                                       center: float, n: int, p: float) -> bool:
    """Verify the spread guarantee: probability inside [center +- Delta_n] >= p.

    Delta_n comes from the 2n-th central moment; the comparison allows a
    1e-12 float guard but the inequality itself is a theorem, so this
    must come back True.
    """
    moment = quadrature_moment(state, variable, center, 2 * n)
    delta = nth_order_spread(moment, n, p)
    prob = interval_probability(state, variable, (center - delta, center + delta))
    return prob + 1e-12 >= p
