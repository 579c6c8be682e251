"""Lacunary sets of irreps: constructions, screens and numerical certificates."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .finvn import OrthoSystem, StateAlgebra, greedy_lambda_select
from .norms import CentralPoly, central_l2, central_l4, character_l4_pairing, fundamental_combo_norm
from .rep import QuantumGroupModel, as_irrep, classical_dim, fuse_factor, q_matrix, suq2


@dataclass(frozen=True)
class IrrepSet:
    """Finite, duplicate-free, increasingly ordered set of irrep labels."""

    labels: tuple
    model: QuantumGroupModel | None = None

    def __post_init__(self):
        labels = tuple(sorted({as_irrep(l) for l in self.labels}))
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def single_indices(self) -> list[int]:
        out = []
        for l in self.labels:
            if l.max_component > 0:
                raise ValueError(f"label {l} is not a single-factor label")
            out.append(l.index(0))
        return out

    def prefix(self, count: int) -> "IrrepSet":
        return IrrepSet(self.labels[:count], self.model)

    def describe(self) -> str:
        return "{" + ",".join(str(l) for l in self.labels) + "}"


@dataclass
class LacunaReport:
    command: str
    params: dict
    estimate: float
    certified: float | None = None
    seed: int | None = None
    runtime_ms: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def margin(self) -> float | None:
        if self.certified is None:
            return None
        return self.certified - self.estimate

    @property
    def within_certificate(self) -> bool:
        return self.certified is None or self.estimate <= self.certified

    def to_json(self) -> dict:
        out = {
            "command": self.command,
            "params": self.params,
            "estimate": self.estimate,
            "certified": self.certified,
            "margin": self.margin,
            "seed": self.seed,
            "runtime_ms": self.runtime_ms,
        }
        if self.extra:
            out["extra"] = self.extra
        return out


def gap_set(count: int, n0: int = 0, q: float | None = None) -> IrrepSet:
    """``n_0, n_k = n_{k-1} + k``: the triangular numbers when ``n0 = 0``."""
    if count < 1:
        raise ValueError("count must be at least 1")
    labels, n = [], n0
    for k in range(count):
        n += k
        labels.append(n)
    return IrrepSet(tuple(labels), suq2(q) if q is not None else None)


def kq_components(q: float) -> tuple[float, float, float]:
    """``(K, K', K_q)`` for the central Lambda(4) bound on the gap set.

    K is the least constant ``>= 1`` with ``x + 1 <= K q^{-x/2}`` for all
    ``x >= 1``; ``(x+1) q^{x/2}`` peaks at ``x* = -2/ln q - 1``.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    x_star = max(1.0, -2.0 / math.log(q) - 1.0)
    K = max(1.0, (x_star + 1.0) * q ** (x_star / 2.0))
    r8 = q ** 0.125
    Kp = r8 * (1.0 / (1.0 - q ** 0.25)) * (r8 / (1.0 - r8))
    Kq = (2.0 * K * (4.0 * Kp ** 2 + 1.0) / (1.0 - math.sqrt(q))) ** 0.25
    return K, Kp, Kq


def kq_constant(q: float) -> float:
    return kq_components(q)[2]


class QuarticForm:
    """``||sum c_k chi_{n_k}||_4^4`` as a quartic form in c.

    ``F(c) = sum_m w_m t_m(c)^2`` with ``t_m = c^* M_m c``, ``M_m`` the 0/1
    fusion-membership matrix and ``w_m = (m+1)/d_m``.
    """

    def __init__(self, q: float, labels: Sequence[int]):
        self.labels = list(labels)
        top = 2 * max(self.labels)
        model = suq2(q)
        k = len(self.labels)
        M = np.zeros((top + 1, k, k))
        for a, i in enumerate(self.labels):
            for b, j in enumerate(self.labels):
                for m in fuse_factor(i, j):
                    M[m, a, b] += 1.0
        used = np.flatnonzero(M.any(axis=(1, 2)))
        self.M = M[used]
        self.w = np.array([character_l4_pairing(model, int(m)) for m in used])

    def value(self, c: np.ndarray) -> np.ndarray:
        """F on a batch ``c`` of shape (batch, k)."""
        t = np.einsum("ba,mac,bc->bm", c.conj(), self.M, c).real
        return (t ** 2) @ self.w

    def gradient(self, c: np.ndarray) -> np.ndarray:
        """Wirtinger gradient ``dF/dc^*`` (times 2 gives the real gradient)."""
        t = np.einsum("ba,mac,bc->bm", c.conj(), self.M, c).real
        return 2.0 * np.einsum("bm,m,mac,bc->ba", t, self.w, self.M, c)

    def ratio(self, c: np.ndarray) -> np.ndarray:
        return self.value(c) ** 0.25 / np.linalg.norm(c, axis=1)


def _sphere(k: int, n: int, rng: np.random.Generator) -> np.ndarray:
    c = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    return c / np.linalg.norm(c, axis=1, keepdims=True)


def ascend(form: QuarticForm, starts: np.ndarray, iterations: int = 200, step: float = 0.5) -> np.ndarray:
    """Projected gradient ascent of F on the unit sphere with step halving.

    Every accepted step increases F, so the returned vectors are at least as
    good as the starts.
    """
    c = starts / np.linalg.norm(starts, axis=1, keepdims=True)
    val = form.value(c)
    eta = np.full(len(c), step)
    for _ in range(iterations):
        g = form.gradient(c)
        g = g - np.sum(g * c.conj(), axis=1, keepdims=True).real * c  # tangent part
        trial = c + eta[:, None] * g / np.maximum(val, 1e-300)[:, None]
        trial /= np.linalg.norm(trial, axis=1, keepdims=True)
        tval = form.value(trial)
        better = tval > val
        c[better], val[better] = trial[better], tval[better]
        eta = np.where(better, np.minimum(eta * 1.5, 4.0), eta / 2.0)
        if np.all(eta < 1e-10):
            break
    return c


def central_lambda4_ratio(labels: IrrepSet, first_n: int | None = None, trials: int = 10000,
                          multistarts: int = 16, seed: int = 0, q: float | None = None,
                          iterations: int = 200) -> LacunaReport:
    """Estimate ``sup ||f||_4 / ||f||_2`` over central f supported on a prefix of the set.

    Prefixes of size 1, 2, ..., first_n are searched in turn, each with its
    own seeded random batch and multistart ascent warm-started from the
    previous prefix's best vector, so the estimate never decreases with
    first_n.
    """
    t0 = time.perf_counter()
    if len(labels) == 0:
        raise ValueError("empty irrep set")
    if q is None:
        if labels.model is None:
            raise ValueError("q is required when the set carries no model")
        q = labels.model.q
    ns = labels.single_indices()
    first_n = len(ns) if first_n is None else min(first_n, len(ns))
    best_vec = np.ones((1, 1), dtype=complex)
    estimate = 0.0
    history = []
    for size in range(1, first_n + 1):
        form = QuarticForm(q, ns[:size])
        rng = np.random.default_rng([seed, size])
        samples = _sphere(size, trials, rng)
        basis = np.eye(size, dtype=complex)
        warm = np.hstack([best_vec, np.zeros((1, size - best_vec.shape[1]))])
        pool = np.vstack([samples, basis, warm])
        ratios = form.ratio(pool)
        order = np.argsort(ratios)[::-1]
        starts = np.vstack([pool[order[:max(multistarts - 1, 0)]], warm,
                            _sphere(size, multistarts, rng)])
        ascended = ascend(form, starts, iterations)
        cand = np.vstack([pool, ascended])
        cand_ratios = form.ratio(cand)
        top = int(np.argmax(cand_ratios))
        if cand_ratios[top] >= estimate:
            estimate = float(cand_ratios[top])
            best_vec = cand[top:top + 1]
        else:
            best_vec = warm
        history.append(estimate)
    is_gap = list(ns) == gap_set(len(ns), n0=ns[0]).single_indices() and q < 1.0
    certified = kq_constant(q) if is_gap else None
    return LacunaReport(
        command="gapset",
        params={"set": labels.prefix(first_n).describe(), "q": q, "p": 4, "first_n": first_n,
                "trials": trials, "multistarts": multistarts},
        estimate=estimate,
        certified=certified,
        seed=seed,
        runtime_ms=(time.perf_counter() - t0) * 1000.0,
        extra={"prefix_estimates": history, "argmax": [[z.real, z.imag] for z in best_vec[0]]},
    )


@dataclass
class QScreen:
    max_q: float
    max_q_inv: float
    verdict: str
    passed: bool


def check_q_boundedness(labels: IrrepSet, model: QuantumGroupModel | None = None,
                        threshold: float = math.inf) -> QScreen:
    """Largest ``||Q_pi||`` and ``||Q_pi^{-1}||`` over the set.

    Uniform boundedness of these norms is necessary for Sidon and Lambda(p)
    sets; exceeding ``threshold`` is reported as a failed screen, which is
    evidence, not proof, of non-lacunarity.
    """
    model = model or labels.model
    if model is None:
        raise ValueError("a quantum group model is required")
    mq = mqi = 1.0
    for label in labels:
        qd = q_matrix(model, label)
        mq = max(mq, float(qd.max()))
        mqi = max(mqi, float((1.0 / qd).max()))
    worst = max(mq, mqi)
    if worst > threshold:
        return QScreen(mq, mqi, f"necessary condition violated beyond threshold {threshold:g}", False)
    return QScreen(mq, mqi, f"bounded by {worst:g}", True)


def sidon_singleton_check(q: float, A, V, trunc: int = 64, theta_grid: int = 256) -> float:
    """``||d (id x Tr)[(1 x V A Q) u]|| / ||d (id x Tr)[(1 x A Q) u]||`` on the fundamental irrep."""
    A = np.asarray(A, dtype=complex)
    V = np.asarray(V, dtype=complex)
    if not np.allclose(V.conj().T @ V, np.eye(2), atol=1e-10):
        raise ValueError("V must be unitary")
    rhs = fundamental_combo_norm(A, q, trunc, theta_grid)
    if rhs == 0.0:
        raise ValueError("right-hand side vanishes (A = 0)")
    lhs = fundamental_combo_norm(V @ A, q, trunc, theta_grid)
    return lhs / rhs


def sidon_bound(q: float) -> float:
    return 1.0 + 1.0 / q


def central_multiplier_probe(labels: IrrepSet, symbol: Mapping[int, complex], p: int = 4,
                             trials: int = 1000, seed: int = 0, q: float | None = None) -> float:
    """Largest sampled ``||sum c_n a_n chi_n||_p / ||sum a_n chi_n||_p`` over f on the set.

    Basis vectors are always among the samples, so at p = 2 the result is
    exactly ``max |c_n|``.
    """
    if p not in (2, 4):
        raise ValueError("p must be 2 or 4")
    if q is None:
        q = labels.model.q
    ns = labels.single_indices()
    c = np.array([complex(symbol.get(n, 0.0)) for n in ns])
    rng = np.random.default_rng(seed)
    coeffs = np.vstack([np.eye(len(ns)), _sphere(len(ns), trials, rng)])
    if p == 2:
        num = np.linalg.norm(coeffs * c[None, :], axis=1)
        return float(np.max(num / np.linalg.norm(coeffs, axis=1)))
    form = QuarticForm(q, ns)
    num = form.value(coeffs * c[None, :]) ** 0.25
    den = form.value(coeffs) ** 0.25
    return float(np.max(num / den))


@dataclass
class RefineResult:
    labels: IrrepSet
    rounds: int
    constants: list
    layers: list
    diagnostics: list
    d0: int = 1

    @property
    def constant(self) -> float:
        """``D_0^2 max_l C_l`` for the combined family."""
        if not self.constants:
            return math.nan
        return self.d0 ** 2 * max(self.constants)


Cell = tuple  # (label, i, j)
Extractor = Callable[[list], tuple]


def refine_by_irreps(labels: IrrepSet, extractor: Extractor, dims: Mapping | Callable | None = None,
                     max_rounds: int | None = None) -> RefineResult:
    """Layered extraction over the matrix-coefficient cells of each irrep.

    Round k+1 hands the cells not yet used, restricted to the labels still
    alive, to ``extractor(pool) -> (selected_cells, constant)``.  Labels with
    no selected cell die.  The loop ends once every surviving label has had
    all of its cells used, which takes at most ``D_0^2`` rounds.
    """
    if dims is None:
        dim_of = classical_dim
    elif callable(dims):
        dim_of = dims
    else:
        dim_of = lambda l: dims[l]
    alive = list(labels.labels)
    d0 = max((dim_of(l) for l in alive), default=1)
    cells = {l: [(l, i, j) for i in range(dim_of(l)) for j in range(dim_of(l))] for l in alive}
    used = {l: set() for l in alive}
    constants, layers, diagnostics = [], [], []
    limit = max_rounds if max_rounds is not None else d0 ** 2
    rounds = 0
    while alive and any(len(used[l]) < len(cells[l]) for l in alive):
        if rounds >= limit:
            diagnostics.append(f"stopped after {rounds} rounds with unused cells")
            break
        pool = [c for l in alive for c in cells[l] if c not in used[l]]
        selected, const = extractor(pool)
        selected = [c for c in selected if c in set(pool)]
        rounds += 1
        constants.append(const)
        layers.append(selected)
        for c in selected:
            used[c[0]].add(c)
        picked = {c[0] for c in selected}
        alive = [l for l in alive if l in picked]
        if not selected:
            diagnostics.append(f"round {rounds}: extractor returned nothing")
    return RefineResult(IrrepSet(tuple(alive), labels.model), rounds, constants, layers, diagnostics, d0)


def finvn_extractor(cell_elements: Mapping, algebra: StateAlgebra, n: int = 2,
                    target_count: int | None = None) -> Extractor:
    """Extractor backed by the greedy Lambda(2n) selection on matrix elements of cells."""

    def extract(pool):
        if not pool:
            return [], math.nan
        system = OrthoSystem(algebra, [cell_elements[c] for c in pool], list(range(len(pool))))
        res = greedy_lambda_select(system, n, target_count or len(pool))
        return [pool[i] for i in res.indices], res.constant

    return extract


def classical_contrast(n_max: int, q: float) -> list[tuple[int, float]]:
    """``(n, ||chi_n||_4^4)`` for n = 0..n_max."""
    return [(n, central_l4(CentralPoly(suq2(q), {n: 1.0})) ** 4) for n in range(n_max + 1)]


def lambda4_ratio_exact(q: float, coeffs: Mapping[int, complex]) -> float:
    f = CentralPoly(suq2(q), coeffs)
    return central_l4(f) / central_l2(f)
