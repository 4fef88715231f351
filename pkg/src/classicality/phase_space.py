"""Canonical phase-space variables and polynomial observables.

A system with ``N`` degrees of freedom carries ``2N`` canonical
variables: indices ``0 .. N-1`` are positions, ``N .. 2N-1`` the
conjugate momenta (position ``i`` pairs with momentum ``i + N``).
Observables (Hamiltonians, flow components, partial derivatives) are
real multivariate polynomials over these variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

# Relative magnitude below which a coefficient is treated as floating-point
# dust and dropped during normalization.
DUST_RELATIVE = 1e-12


@dataclass(frozen=True)
class CanonicalVariable:
    """One canonical coordinate: a position or a momentum."""

    index: int
    kind: str  # "position" | "momentum"
    label: str

    def __post_init__(self):
        if self.kind not in ("position", "momentum"):
            raise ValueError(f"kind must be 'position' or 'momentum', got {self.kind!r}")
        if self.index < 0:
            raise ValueError("index must be non-negative")


class PhaseSpace:
    """The ordered set of 2N canonical variables of an N-dof system.

    Built from position labels; momentum labels default to the
    lower/upper-case convention ``q -> p``, ``Q -> P`` and otherwise to
    ``p_<label>``.
    """

    def __init__(self, position_labels: Iterable[str], momentum_labels: Iterable[str] | None = None):
        positions = list(position_labels)
        if not positions:
            raise ValueError("need at least one degree of freedom")
        if momentum_labels is None:
            momenta = [_default_momentum_label(lbl) for lbl in positions]
        else:
            momenta = list(momentum_labels)
            if len(momenta) != len(positions):
                raise ValueError("momentum_labels length must match position_labels")
        labels = positions + momenta
        if len(set(labels)) != len(labels):
            raise ValueError(f"variable labels must be unique, got {labels}")
        n = len(positions)
        self.dof = n
        self.variables = tuple(
            [CanonicalVariable(i, "position", positions[i]) for i in range(n)]
            + [CanonicalVariable(n + i, "momentum", momenta[i]) for i in range(n)]
        )
        self._by_label = {v.label: v for v in self.variables}

    @property
    def n_vars(self) -> int:
        return 2 * self.dof

    def __len__(self) -> int:
        return self.n_vars

    def __iter__(self):
        return iter(self.variables)

    def __getitem__(self, index: int) -> CanonicalVariable:
        return self.variables[index]

    def by_label(self, label: str) -> CanonicalVariable:
        try:
            return self._by_label[label]
        except KeyError:
            raise KeyError(f"unknown canonical variable {label!r}; have {sorted(self._by_label)}") from None

    def conjugate(self, index: int) -> CanonicalVariable:
        """The momentum paired with a position (and vice versa)."""
        n = self.dof
        return self.variables[index + n if index < n else index - n]

    def labels(self) -> tuple[str, ...]:
        return tuple(v.label for v in self.variables)

    def __repr__(self):
        return f"PhaseSpace({', '.join(self.labels())})"


def _default_momentum_label(position_label: str) -> str:
    if position_label == "q":
        return "p"
    if position_label == "Q":
        return "P"
    if position_label.startswith("q"):
        return "p" + position_label[1:]
    return f"p_{position_label}"


class PolynomialObservable:
    """Real polynomial in the 2N canonical variables.

    Terms are stored as ``{exponent_tuple: coefficient}`` with one entry
    per monomial; the exponent tuple has length ``2N``. Instances are
    treated as immutable: all arithmetic returns new objects, and
    normalization drops exact zeros plus coefficients below
    ``DUST_RELATIVE`` times the largest coefficient magnitude.
    """

    __slots__ = ("n_vars", "terms")

    def __init__(self, n_vars: int, terms: Mapping[tuple[int, ...], float] | None = None):
        if n_vars <= 0 or n_vars % 2:
            raise ValueError("n_vars must be a positive even integer")
        self.n_vars = n_vars
        clean: dict[tuple[int, ...], float] = {}
        if terms:
            for exps, coeff in terms.items():
                exps = tuple(int(e) for e in exps)
                if len(exps) != n_vars:
                    raise ValueError(f"exponent tuple {exps} has length {len(exps)}, expected {n_vars}")
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent in {exps}")
                coeff = float(coeff)
                if coeff != 0.0:
                    clean[exps] = clean.get(exps, 0.0) + coeff
        self.terms = {e: c for e, c in clean.items() if c != 0.0}

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, n_vars: int) -> "PolynomialObservable":
        return cls(n_vars)

    @classmethod
    def constant(cls, n_vars: int, value: float) -> "PolynomialObservable":
        return cls(n_vars, {(0,) * n_vars: value})

    @classmethod
    def variable(cls, n_vars: int, index: int) -> "PolynomialObservable":
        """The identity observable a_index."""
        exps = [0] * n_vars
        exps[index] = 1
        return cls(n_vars, {tuple(exps): 1.0})

    @classmethod
    def monomial(cls, n_vars: int, coeff: float, exponents: Iterable[int]) -> "PolynomialObservable":
        return cls(n_vars, {tuple(exponents): coeff})

    # -- ring operations --------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for exps, c in other.terms.items():
            terms[exps] = terms.get(exps, 0.0) + c
        return PolynomialObservable(self.n_vars, terms)

    __radd__ = __add__

    def __neg__(self):
        return PolynomialObservable(self.n_vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return PolynomialObservable(self.n_vars, {e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        terms: dict[tuple[int, ...], float] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                terms[exps] = terms.get(exps, 0.0) + c1 * c2
        return PolynomialObservable(self.n_vars, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        out = PolynomialObservable.constant(self.n_vars, 1.0)
        for _ in range(n):
            out = out * self
        return out

    def _coerce(self, other) -> "PolynomialObservable":
        if isinstance(other, PolynomialObservable):
            if other.n_vars != self.n_vars:
                raise ValueError(f"variable-count mismatch: {self.n_vars} vs {other.n_vars}")
            return other
        if isinstance(other, (int, float)):
            return PolynomialObservable.constant(self.n_vars, float(other))
        return NotImplemented

    # -- calculus ----------------------------------------------------------
    def diff(self, index: int) -> "PolynomialObservable":
        """Partial derivative with respect to variable ``index``."""
        terms: dict[tuple[int, ...], float] = {}
        for exps, c in self.terms.items():
            e = exps[index]
            if e:
                d = list(exps)
                d[index] = e - 1
                d = tuple(d)
                terms[d] = terms.get(d, 0.0) + c * e
        return PolynomialObservable(self.n_vars, terms)

    def diff_multi(self, multi: Iterable[int]) -> "PolynomialObservable":
        """Iterated partial derivative; ``multi[i]`` differentiations in variable i."""
        out = self
        for index, count in enumerate(multi):
            for _ in range(count):
                out = out.diff(index)
                if not out.terms:
                    return out
        return out

    # -- queries -----------------------------------------------------------
    def evaluate(self, values) -> float | np.ndarray:
        """Evaluate at a point (or, vectorized, at arrays of coordinates).

        ``values`` is indexable with one entry per variable; entries may
        be scalars or equally shaped numpy arrays.
        """
        total = None
        for exps, c in self.terms.items():
            term = c
            for i, e in enumerate(exps):
                if e == 1:
                    term = term * values[i]
                elif e > 1:
                    term = term * values[i] ** e
            total = term if total is None else total + term
        if total is None:
            return 0.0
        return total

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def max_exponents(self) -> tuple[int, ...]:
        """Componentwise maximum exponent over all monomials."""
        out = [0] * self.n_vars
        for exps in self.terms:
            for i, e in enumerate(exps):
                if e > out[i]:
                    out[i] = e
        return tuple(out)

    def is_zero(self) -> bool:
        return not self.terms

    def normalized(self) -> "PolynomialObservable":
        """Drop floating-point dust: |c| < DUST_RELATIVE * max|c|."""
        if not self.terms:
            return self
        cutoff = DUST_RELATIVE * max(abs(c) for c in self.terms.values())
        return PolynomialObservable(self.n_vars, {e: c for e, c in self.terms.items() if abs(c) >= cutoff})

    def __eq__(self, other):
        return (
            isinstance(other, PolynomialObservable)
            and self.n_vars == other.n_vars
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.n_vars, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return f"PolynomialObservable({self.n_vars}, 0)"
        parts = []
        for exps, c in sorted(self.terms.items()):
            mono = "*".join(f"a{i}^{e}" if e > 1 else f"a{i}" for i, e in enumerate(exps) if e)
            parts.append(f"{c:g}*{mono}" if mono else f"{c:g}")
        return f"PolynomialObservable({self.n_vars}, {' + '.join(parts)})"


def poisson_bracket(f: PolynomialObservable, g: PolynomialObservable) -> PolynomialObservable:
    """Canonical Poisson bracket {f, g} = sum_i df/dq_i dg/dp_i - df/dp_i dg/dq_i.

    Positions are variables ``0..N-1`` and momenta ``N..2N-1``; the
    result is normalized (exact zeros and dust terms dropped).
    """
    if not isinstance(f, PolynomialObservable) or not isinstance(g, PolynomialObservable):
        raise TypeError("poisson_bracket expects PolynomialObservable operands")
    if f.n_vars != g.n_vars:
        raise ValueError(f"operands live on different phase spaces: {f.n_vars} vs {g.n_vars} variables")
    n = f.n_vars // 2
    out = PolynomialObservable.zero(f.n_vars)
    for i in range(n):
        out = out + f.diff(i) * g.diff(i + n) - f.diff(i + n) * g.diff(i)
    return out.normalized()
