"""Wave functions sampled on uniform tensor grids.

States carry one FFT-friendly axis per degree of freedom (1 or 2 axes)
and a per-axis representation tag. The momentum grid of an axis is the
hbar-scaled discrete Fourier dual of its position grid, and the change
of representation is the exactly unitary scaled DFT, so norms survive
round trips to machine precision.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import AccuracyWarning, GridCoverageError
from .phase_space import CanonicalVariable

POSITION = "position"
MOMENTUM = "momentum"

# Relative boundary density above which quadrature results get flagged.
TAIL_TOLERANCE = 1e-12


@dataclass(frozen=True)
class GridAxis:
    """Uniform position grid for one degree of freedom (endpoint excluded)."""

    variable: CanonicalVariable
    points: int
    lower: float
    upper: float

    def __post_init__(self):
        if self.variable.kind != POSITION:
            raise ValueError("grid axes are defined by position variables")
        if self.points < 64 or (self.points & (self.points - 1)) != 0:
            raise ValueError(f"points must be a power of two >= 64, got {self.points}")
        if not self.upper > self.lower:
            raise ValueError("upper bound must exceed lower bound")

    @property
    def spacing(self) -> float:
        return (self.upper - self.lower) / self.points

    def positions(self) -> np.ndarray:
        return self.lower + self.spacing * np.arange(self.points)

    def momenta(self, hbar: float) -> np.ndarray:
        """Momentum values of the Fourier dual grid, in FFT order."""
        return 2.0 * math.pi * hbar * np.fft.fftfreq(self.points, d=self.spacing)

    def momentum_spacing(self, hbar: float) -> float:
        return 2.0 * math.pi * hbar / (self.points * self.spacing)

    def momentum_extent(self, hbar: float) -> float:
        """Half-width of the momentum grid: it spans [-extent, extent)."""
        return math.pi * hbar / self.spacing


class GridState:
    """Complex amplitudes over the tensor grid with per-axis representation tags.

    Instances are immutable (the amplitude array is locked); operations
    return new states. Constructors normalize, error kets hold
    deliberately unnormalized instances.
    """

    def __init__(self, axes: Sequence[GridAxis], amplitudes: np.ndarray,
                 rep: Sequence[str] | None = None, hbar: float = 1.0):
        axes = tuple(axes)
        if not 1 <= len(axes) <= 2:
            raise ValueError("only 1- and 2-axis states are supported")
        if len(axes) == 2 and axes[0].variable.index >= axes[1].variable.index:
            raise ValueError("axes must be ordered by variable index")
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if amplitudes.shape != tuple(ax.points for ax in axes):
            raise ValueError(f"amplitude shape {amplitudes.shape} does not match axes")
        if hbar <= 0:
            raise ValueError("hbar must be positive")
        rep = tuple(rep) if rep is not None else (POSITION,) * len(axes)
        if len(rep) != len(axes) or any(r not in (POSITION, MOMENTUM) for r in rep):
            raise ValueError(f"bad representation tags {rep}")
        amplitudes = amplitudes.copy()
        amplitudes.setflags(write=False)
        self.axes = axes
        self.amplitudes = amplitudes
        self.rep = rep
        self.hbar = float(hbar)

    # -- basic geometry ----------------------------------------------------
    def measure(self, axis_index: int) -> float:
        """Integration weight along one axis in its current representation."""
        ax = self.axes[axis_index]
        return ax.spacing if self.rep[axis_index] == POSITION else ax.momentum_spacing(self.hbar)

    def cell_volume(self) -> float:
        vol = 1.0
        for i in range(len(self.axes)):
            vol *= self.measure(i)
        return vol

    def coordinates(self, axis_index: int) -> np.ndarray:
        """Grid coordinates along one axis in its current representation (storage order)."""
        ax = self.axes[axis_index]
        if self.rep[axis_index] == POSITION:
            return ax.positions()
        return ax.momenta(self.hbar)

    # -- norms ---------------------------------------------------------------
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2)) * self.cell_volume()

    def normalized(self) -> "GridState":
        n = math.sqrt(self.norm_sq())
        if n == 0:
            raise ValueError("cannot normalize the zero state")
        return GridState(self.axes, self.amplitudes / n, self.rep, self.hbar)

    def with_amplitudes(self, amplitudes: np.ndarray, rep: Sequence[str] | None = None) -> "GridState":
        return GridState(self.axes, amplitudes, rep if rep is not None else self.rep, self.hbar)

    # -- variable resolution ---------------------------------------------------
    def axis_of(self, variable: CanonicalVariable) -> tuple[int, str]:
        """Map a canonical variable to (axis index, representation needed)."""
        n_dof = len(self.axes)
        if variable.kind == POSITION:
            target_index, rep = variable.index, POSITION
        else:
            target_index, rep = variable.index - n_dof, MOMENTUM
        for i, ax in enumerate(self.axes):
            if ax.variable.index == target_index:
                return i, rep
        raise KeyError(f"variable {variable.label!r} does not map onto this grid")

    def __repr__(self):
        shape = "x".join(str(ax.points) for ax in self.axes)
        return f"GridState({shape}, rep={'/'.join(self.rep)}, hbar={self.hbar:g})"


def inner_product(a: GridState, b: GridState) -> complex:
    """L2 inner product <a|b>; representations are aligned to ``a`` first."""
    if a.axes != b.axes or a.hbar != b.hbar:
        raise ValueError("states live on different grids")
    for i, rep in enumerate(a.rep):
        b = to_rep(b, i, rep)
    return complex(np.vdot(a.amplitudes, b.amplitudes) * a.cell_volume())


def to_rep(state: GridState, axis_index: int, target: str) -> GridState:
    """Change representation along one axis by the unitary scaled DFT."""
    if target not in (POSITION, MOMENTUM):
        raise ValueError(f"unknown representation {target!r}")
    if state.rep[axis_index] == target:
        return state
    ax = state.axes[axis_index]
    hbar = state.hbar
    phase_shape = [1] * len(state.axes)
    phase_shape[axis_index] = ax.points
    momenta = ax.momenta(hbar).reshape(phase_shape)
    rep = list(state.rep)
    if target == MOMENTUM:
        transformed = np.fft.fft(state.amplitudes, axis=axis_index)
        amp = (ax.spacing / math.sqrt(2.0 * math.pi * hbar)) \
            * np.exp(-1j * momenta * ax.lower / hbar) * transformed
    else:
        dp = ax.momentum_spacing(hbar)
        shifted = state.amplitudes * np.exp(1j * momenta * ax.lower / hbar)
        amp = (ax.points * dp / math.sqrt(2.0 * math.pi * hbar)) \
            * np.fft.ifft(shifted, axis=axis_index)
    rep[axis_index] = target
    return state.with_amplitudes(amp, rep)


def make_gaussian(center_q: float, center_p: float, width: float,
                  axis: GridAxis, hbar: float = 1.0) -> GridState:
    """Normalized Gaussian wave packet on one axis.

    Amplitude profile exp{-(x-q0)^2/(4 w^2) + i p0 x / hbar}; the grid
    must cover q0 +- 8w in position and p0 +- 8 * hbar/(2w) on the
    momentum dual, otherwise a GridCoverageError is raised.
    """
    if width <= 0:
        raise ValueError("width must be positive")
    sigma_p = hbar / (2.0 * width)
    if axis.lower > center_q - 8.0 * width or axis.upper < center_q + 8.0 * width:
        raise GridCoverageError(
            f"axis [{axis.lower:g}, {axis.upper:g}] does not cover "
            f"{center_q:g} +- {8 * width:g} for the packet")
    extent = axis.momentum_extent(hbar)
    if abs(center_p) + 8.0 * sigma_p > extent:
        raise GridCoverageError(
            f"momentum dual grid (+-{extent:g}) does not cover "
            f"{center_p:g} +- {8 * sigma_p:g}; increase grid points or shrink the box")
    x = axis.positions()
    amp = np.exp(-((x - center_q) ** 2) / (4.0 * width ** 2) + 1j * center_p * x / hbar)
    return GridState((axis,), amp, hbar=hbar).normalized()


def product_state(a: GridState, b: GridState) -> GridState:
    """Tensor product of two 1-axis states (full amplitudes are stored)."""
    if len(a.axes) != 1 or len(b.axes) != 1:
        raise ValueError("product_state combines 1-axis states")
    if a.hbar != b.hbar:
        raise ValueError("states disagree on hbar")
    amp = np.multiply.outer(a.amplitudes, b.amplitudes)
    return GridState(a.axes + b.axes, amp, a.rep + b.rep, a.hbar)


def load_tabulated(path, axis: GridAxis, hbar: float = 1.0) -> GridState:
    """Load a single-axis state from whitespace rows "x re im"; interpolates
    the samples onto the grid and normalizes."""
    table = np.loadtxt(path, dtype=float)
    if table.ndim != 2 or table.shape[1] != 3:
        raise ValueError("tabulated wave functions need rows of 'x re im'")
    order = np.argsort(table[:, 0])
    x_in, re_in, im_in = table[order, 0], table[order, 1], table[order, 2]
    x = axis.positions()
    amp = np.interp(x, x_in, re_in, left=0.0, right=0.0) \
        + 1j * np.interp(x, x_in, im_in, left=0.0, right=0.0)
    return GridState((axis,), amp, hbar=hbar).normalized()


def marginal_density(state: GridState, variable: CanonicalVariable) -> tuple[np.ndarray, np.ndarray]:
    """Sorted coordinates and marginal probability density for a variable.

    Converts the relevant axis to the required representation, then
    integrates |psi|^2 over the remaining axes.
    """
    axis_index, rep = state.axis_of(variable)
    state = to_rep(state, axis_index, rep)
    density = np.abs(state.amplitudes) ** 2
    other_measure = 1.0
    for i in range(len(state.axes)):
        if i != axis_index:
            other_measure *= state.measure(i)
    if len(state.axes) == 2:
        density = density.sum(axis=1 - axis_index)
    density = density * other_measure
    coords = state.coordinates(axis_index)
    if rep == MOMENTUM:
        order = np.argsort(coords)
        coords, density = coords[order], density[order]
    return coords, density


def _cumulative(coords: np.ndarray, density: np.ndarray, x: float) -> float:
    """Integral of the piecewise-linear density from coords[0] to x (clamped)."""
    if x <= coords[0]:
        return 0.0
    if x >= coords[-1]:
        x = coords[-1]
    spacing = coords[1] - coords[0]
    cells = np.cumsum((density[:-1] + density[1:]) * 0.5 * spacing)
    j = int(np.searchsorted(coords, x, side="right") - 1)
    base = cells[j - 1] if j > 0 else 0.0
    if j >= len(coords) - 1:
        return float(cells[-1])
    theta = (x - coords[j]) / spacing
    partial = spacing * (theta * density[j] + 0.5 * theta ** 2 * (density[j + 1] - density[j]))
    return float(base + partial)


def cumulative_probability(coords: np.ndarray, density: np.ndarray,
                           lo: float, hi: float) -> float:
    """Probability over [lo, hi] for a precomputed marginal (clamped to the grid)."""
    p = _cumulative(coords, density, hi) - _cumulative(coords, density, lo)
    return float(min(max(p, 0.0), 1.0 + 1e-9))


def interval_probability(state: GridState, variable: CanonicalVariable,
                         interval: tuple[float, float]) -> float:
    """Probability that a measurement of ``variable`` lands in [lo, hi].

    Trapezoid integration of the marginal density with fractional
    weighting of the boundary cells; intervals beyond the grid are
    clamped. Empty intervals return 0 with a warning.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if hi <= lo:
        warnings.warn(f"empty interval [{lo:g}, {hi:g}]", AccuracyWarning, stacklevel=2)
        return 0.0
    coords, density = marginal_density(state, variable)
    return cumulative_probability(coords, density, lo, hi)


def quadrature_moment(state: GridState, variable: CanonicalVariable,
                      center: float, order: int) -> float:
    """Central moment int (x - center)^order |psi|^2 dx in the variable's representation.

    ``order`` must be a positive even integer. Emits an AccuracyWarning
    when the marginal density does not decay below TAIL_TOLERANCE
    (relative) at the grid boundary.
    """
    if order < 2 or order % 2:
        raise ValueError("order must be an even integer >= 2")
    coords, density = marginal_density(state, variable)
    peak = float(density.max())
    if peak > 0 and max(density[0], density[-1]) > TAIL_TOLERANCE * peak:
        warnings.warn(
            f"boundary mass {max(density[0], density[-1]) / peak:.2e} (relative) may "
            f"degrade the order-{order} moment", AccuracyWarning, stacklevel=2)
    spacing = coords[1] - coords[0]
    return float(np.sum(density * (coords - center) ** order) * spacing)


def variable_span(state: GridState, variable: CanonicalVariable) -> tuple[float, float]:
    """Coordinate span of the grid in the representation of ``variable``."""
    axis_index, rep = state.axis_of(variable)
    ax = state.axes[axis_index]
    if rep == POSITION:
        return ax.lower, ax.upper - ax.spacing
    extent = ax.momentum_extent(state.hbar)
    return -extent, extent - ax.momentum_spacing(state.hbar)


def boundary_coverage_ok(state: GridState, variable: CanonicalVariable,
                         lo: float, hi: float) -> bool:
    """Whether [lo, hi] lies inside the grid span for this variable."""
    span = variable_span(state, variable)
    return lo >= span[0] and hi <= span[1]
