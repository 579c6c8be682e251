"""Representation data for SU_q(2) and finite Cartesian products of it.

Every irreducible representation is presented in the basis that makes its
Q-matrix diagonal, so Q is carried around as a vector of positive reals.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Union

import numpy as np


@dataclass(frozen=True)
class QuantumGroupModel:
    """Product of SU_{q_i}(2) factors, one deformation parameter per factor.

    ``q = 1`` marks a classical (Kac) factor.
    """

    qs: tuple[float, ...]

    def __post_init__(self):
        qs = tuple(float(q) for q in self.qs)
        if not qs:
            raise ValueError("a model needs at least one SU_q(2) factor")
        for q in qs:
            if not 0.0 < q <= 1.0:
                raise ValueError(f"deformation parameter must lie in (0, 1], got {q}")
        object.__setattr__(self, "qs", qs)

    @property
    def n_factors(self) -> int:
        return len(self.qs)

    @property
    def is_kac(self) -> bool:
        return all(q == 1.0 for q in self.qs)

    @property
    def q(self) -> float:
        """Deformation parameter of a single-factor model."""
        if len(self.qs) != 1:
            raise ValueError("model has more than one factor")
        return self.qs[0]

    def to_json(self) -> list[float]:
        return list(self.qs)


def suq2(q: float) -> QuantumGroupModel:
    return QuantumGroupModel((q,))


@dataclass(frozen=True, order=True)
class Irrep:
    """Irreducible representation label.

    Stored sparsely as ascending ``(component, n)`` pairs with ``n > 0``;
    components that are absent carry the trivial representation.
    """

    parts: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        merged: dict[int, int] = {}
        for comp, n in self.parts:
            comp, n = int(comp), int(n)
            if comp < 0 or n < 0:
                raise ValueError(f"invalid label part {comp}:{n}")
            if comp in merged:
                raise ValueError(f"component {comp} given twice")
            merged[comp] = n
        parts = tuple(sorted((c, n) for c, n in merged.items() if n > 0))
        object.__setattr__(self, "parts", parts)

    @classmethod
    def single(cls, n: int) -> "Irrep":
        return cls(((0, n),))

    @classmethod
    def from_indices(cls, indices: Iterable[int]) -> "Irrep":
        return cls(tuple(enumerate(indices)))

    @classmethod
    def parse(cls, text: str) -> "Irrep":
        text = text.strip()
        if ":" not in text:
            return cls.single(int(text))
        parts = []
        for chunk in text.split(","):
            comp, n = chunk.split(":")
            parts.append((int(comp), int(n)))
        comps = [c for c, _ in parts]
        if comps != sorted(set(comps)):
            raise ValueError(f"component indices must be strictly ascending: {text!r}")
        return cls(tuple(parts))

    def index(self, comp: int) -> int:
        for c, n in self.parts:
            if c == comp:
                return n
        return 0

    def indices(self, n_factors: int) -> tuple[int, ...]:
        return tuple(self.index(c) for c in range(n_factors))

    @property
    def max_component(self) -> int:
        return self.parts[-1][0] if self.parts else -1

    def __str__(self) -> str:
        if not self.parts:
            return "0"
        if len(self.parts) == 1 and self.parts[0][0] == 0:
            return str(self.parts[0][1])
        return ",".join(f"{c}:{n}" for c, n in self.parts)


IrrepLike = Union[Irrep, int, str]


def as_irrep(label: IrrepLike) -> Irrep:
    if isinstance(label, Irrep):
        return label
    if isinstance(label, (int, np.integer)):
        return Irrep.single(int(label))
    if isinstance(label, str):
        return Irrep.parse(label)
    raise TypeError(f"cannot interpret {label!r} as an irrep label")


def check_label(model: QuantumGroupModel, label: IrrepLike) -> Irrep:
    label = as_irrep(label)
    if label.max_component >= model.n_factors:
        raise ValueError(f"label {label} refers to a component outside the model")
    return label


def _factor_q_diag(q: float, n: int) -> np.ndarray:
    return q ** np.arange(-n, n + 1, 2, dtype=float)


def q_matrix(model: QuantumGroupModel, label: IrrepLike) -> np.ndarray:
    """Diagonal of Q_pi: ``q^-n, q^(-n+2), ..., q^n`` per factor, Kronecker across factors."""
    label = check_label(model, label)
    diags = [_factor_q_diag(model.qs[c], n) for c, n in label.parts]
    return reduce(np.kron, diags, np.ones(1))


def quantum_dim(model: QuantumGroupModel, label: IrrepLike) -> float:
    label = check_label(model, label)
    return float(np.prod([_factor_q_diag(model.qs[c], n).sum() for c, n in label.parts]))


def classical_dim(label: IrrepLike) -> int:
    label = as_irrep(label)
    return int(np.prod([n + 1 for _, n in label.parts], dtype=np.int64))


def fuse_factor(m: int, mp: int) -> list[int]:
    """Clebsch-Gordan range ``|m - m'|, |m - m'| + 2, ..., m + m'``."""
    return list(range(abs(m - mp), m + mp + 1, 2))


def fuse(a: IrrepLike, b: IrrepLike) -> list[Irrep]:
    """Decomposition of a tensor product into irreducibles, with multiplicity.

    Products fuse componentwise; the result is the Cartesian product of the
    per-factor ranges.
    """
    a, b = as_irrep(a), as_irrep(b)
    comps = sorted({c for c, _ in a.parts} | {c for c, _ in b.parts})
    ranges = [fuse_factor(a.index(c), b.index(c)) for c in comps]
    return [Irrep(tuple(zip(comps, choice))) for choice in itertools.product(*ranges)]


def label_order_key(label: IrrepLike):
    """Total order on labels: single-factor labels sort by n."""
    return as_irrep(label).parts
