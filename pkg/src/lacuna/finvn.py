"""Matrix algebras M_N with a faithful state ``phi = Tr(rho .)``.

Haagerup's L^p norm of x is the Schatten p-norm of ``x rho^{1/p}``, or of
``rho^{theta/p} x rho^{(1-theta)/p}`` for the theta-embedding.  The modular
group is ``sigma_z(x) = rho^{iz} x rho^{-iz}``.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import unitary_group

COND_WARN = 1e8
ORTHO_TOL = 1e-10


class StateAlgebra:
    """(M_N, phi) with density matrix rho, kept in spectral form."""

    def __init__(self, rho):
        rho = np.asarray(rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("rho must be a square matrix")
        if not np.allclose(rho, rho.conj().T, atol=1e-12):
            raise ValueError("rho must be self-adjoint")
        rho = (rho + rho.conj().T) / 2
        evals, evecs = np.linalg.eigh(rho)
        if evals.min() <= 0:
            raise ValueError("rho must be positive definite")
        if abs(evals.sum() - 1.0) > 1e-10:
            raise ValueError(f"rho must have unit trace, got {evals.sum()}")
        self.N = rho.shape[0]
        self.rho = rho
        self.evals = evals
        self.evecs = evecs
        self.cond = float(evals.max() / evals.min())
        if self.cond > COND_WARN:
            warnings.warn(f"density matrix is badly conditioned (cond = {self.cond:.3g})")

    @classmethod
    def from_eigs(cls, eigs, basis=None) -> "StateAlgebra":
        eigs = np.asarray(eigs, dtype=float)
        U = np.eye(eigs.size) if basis is None else np.asarray(basis, dtype=complex)
        return cls((U * eigs) @ U.conj().T)

    @classmethod
    def tracial(cls, N: int) -> "StateAlgebra":
        return cls(np.eye(N) / N)

    @classmethod
    def random(cls, N: int, seed: int = 0, diagonal: bool = False, spread: float = 10.0) -> "StateAlgebra":
        """Random density with eigenvalue ratio at most ``spread``.

        With ``diagonal`` the eigenbasis is the standard one (so matrix units
        are already phi-orthogonal); otherwise it is Haar random.
        """
        rng = np.random.default_rng(seed)
        eigs = rng.uniform(1.0, spread, size=N)
        eigs /= eigs.sum()
        basis = None if diagonal else unitary_group.rvs(N, random_state=rng)
        return cls.from_eigs(eigs, basis)

    @classmethod
    def from_json(cls, data) -> "StateAlgebra":
        if isinstance(data, str):
            data = json.loads(data)
        N = int(data["N"])
        if "rho_eigs" in data:
            if data.get("basis", "identity") != "identity":
                raise ValueError("basis: only 'identity' is supported with rho_eigs")
            eigs = np.asarray(data["rho_eigs"], dtype=float)
            if eigs.shape != (N,):
                raise ValueError(f"rho_eigs: expected {N} values")
            return cls.from_eigs(eigs)
        rho = data["rho"]
        re = np.asarray(rho["re"], dtype=float)
        im = np.asarray(rho.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != (N, N):
            raise ValueError(f"rho.re: expected shape {(N, N)}")
        return cls(re + 1j * im)

    def to_json(self) -> dict:
        return {"N": self.N, "rho": {"re": self.rho.real.tolist(), "im": self.rho.imag.tolist()}}

    def power(self, z: complex) -> np.ndarray:
        """rho^z through the spectral decomposition, re-Hermitized for real z."""
        w = np.exp(z * np.log(self.evals))
        out = (self.evecs * w) @ self.evecs.conj().T
        if np.imag(z) == 0:
            out = (out + out.conj().T) / 2
        return out

    def phi(self, x) -> complex:
        return complex(np.trace(self.rho @ x))

    def inner(self, x, y) -> complex:
        """``phi(x^* y)``."""
        return complex(np.trace(self.rho @ x.conj().T @ y))


def schatten_norm(m: np.ndarray, p: float) -> float | np.ndarray:
    s = np.linalg.svd(m, compute_uv=False)
    if math.isinf(p):
        return np.max(s, axis=-1)
    return np.sum(s ** p, axis=-1) ** (1.0 / p)


def haagerup_lp_norm(A: StateAlgebra, x, p: float = 2.0, theta: float = 0.0) -> float:
    """``|| rho^{theta/p} x rho^{(1-theta)/p} ||_{S_p}``; works on stacks of matrices."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    x = np.asarray(x, dtype=complex)
    if math.isinf(p):
        return schatten_norm(x, p)
    left = A.power(theta / p) if theta else None
    right = A.power((1.0 - theta) / p) if theta != 1.0 else None
    m = x
    if left is not None:
        m = left @ m
    if right is not None:
        m = m @ right
    val = schatten_norm(m, p)
    return float(val) if np.ndim(val) == 0 else val


def modular_sigma(A: StateAlgebra, z: complex, x) -> np.ndarray:
    return A.power(1j * z) @ np.asarray(x, dtype=complex) @ A.power(-1j * z)


@dataclass
class OrthoSystem:
    """phi-orthogonal family in (M_N, phi).

    ``source`` maps each element back to the input list; ``dropped`` lists
    inputs that were (numerically) in the span of earlier ones.
    """

    algebra: StateAlgebra
    elements: list
    source: list = field(default_factory=list)
    dropped: list = field(default_factory=list)
    normalized: bool = False

    def __len__(self):
        return len(self.elements)

    def gram(self) -> np.ndarray:
        # G_ij = Tr(rho x_i^* x_j)
        X = np.stack(self.elements)
        return np.einsum("ca,iba,jbc->ij", self.algebra.rho, X.conj(), X)

    def orthogonality_defect(self) -> float:
        g = self.gram()
        return float(np.max(np.abs(g - np.diag(np.diag(g))))) if len(g) else 0.0

    def lp_bound(self, p: float) -> float:
        """``K = max(1, sup_i ||x_i||_p)``."""
        if not self.elements:
            return 1.0
        norms = haagerup_lp_norm(self.algebra, np.stack(self.elements), p)
        return max(1.0, float(np.max(norms)))

    def normalize(self) -> "OrthoSystem":
        els = [x / math.sqrt(self.algebra.inner(x, x).real) for x in self.elements]
        return OrthoSystem(self.algebra, els, list(self.source), list(self.dropped), normalized=True)

    def subsystem(self, indices) -> "OrthoSystem":
        return OrthoSystem(self.algebra, [self.elements[i] for i in indices],
                           [self.source[i] for i in indices], [], self.normalized)


def gram_schmidt_phi(A: StateAlgebra, xs, normalize: bool = False, tol: float = ORTHO_TOL) -> OrthoSystem:
    """Orthogonalize ``xs`` for ``<x, y> = phi(x^* y)``.

    ``y_{k+1} = x_{k+1} - sum_l phi(y_l^* y_l)^{-1} phi(y_l^* x_{k+1}) y_l``,
    applied twice for numerical stability.  Residuals with phi-norm below
    ``tol`` are dropped and reported.
    """
    xs = [np.asarray(x, dtype=complex) for x in xs]
    if not xs or all(not np.any(x) for x in xs):
        raise ValueError("nothing to orthogonalize")
    ys, source, dropped = [], [], []
    for idx, x in enumerate(xs):
        y = x.copy()
        for _ in range(2):
            for yl in ys:
                y = y - (A.inner(yl, y) / A.inner(yl, yl).real) * yl
        if math.sqrt(max(A.inner(y, y).real, 0.0)) < tol:
            dropped.append(idx)
            continue
        ys.append(y)
        source.append(idx)
    system = OrthoSystem(A, ys, source, dropped)
    return system.normalize() if normalize else system


def twisted_correlation(A: StateAlgebra, n: int, pairs, tail, variant: str = "first") -> complex:
    """Twisted correlation driving the greedy selection.

    ``pairs`` holds the n-1 pairs ``(x_k, x_l)`` and ``tail = (x_k0, x_new)``.
    ``first``: ``phi(sigma_{(n-1)i/n}(x_k1^* x_l1) ... sigma_{i/n}(x_k(n-1)^* x_l(n-1)) x_k0^* x_new)``.
    ``second``: ``phi(sigma_i(x_k0) sigma_{(n-1)i/n}(...) ... sigma_{i/n}(...) x_new^*)``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    pairs = list(pairs)
    if len(pairs) != n - 1:
        raise ValueError(f"expected {n - 1} pairs, got {len(pairs)}")
    x0, xnew = (np.asarray(t, dtype=complex) for t in tail)
    prod = np.eye(A.N, dtype=complex)
    for j, (xk, xl) in enumerate(pairs, start=1):
        s = (n - j) / n
        prod = prod @ modular_sigma(A, 1j * s, np.asarray(xk).conj().T @ np.asarray(xl))
    if variant == "first":
        return A.phi(prod @ x0.conj().T @ xnew)
    if variant == "second":
        return A.phi(modular_sigma(A, 1j, x0) @ prod @ xnew.conj().T)
    raise ValueError(f"unknown variant {variant!r}")


def selection_threshold(k: int, n: int) -> float:
    """Admission threshold once k elements are selected: ``1 / (2 k^{2n-1} (k+1))``."""
    return 1.0 / (2.0 * k ** (2 * n - 1) * (k + 1))


def certified_log_constant(K: float, n: int) -> float:
    """log C for ``C^{2n} = (2K^{2n} + K^n 4^n n + n pi^2/6) exp(K^n 4^n n)``."""
    a = K ** n * 4 ** n * n
    return (math.log(2 * K ** (2 * n) + a + n * math.pi ** 2 / 6) + a) / (2 * n)


def certified_constant(K: float, n: int) -> float:
    try:
        return math.exp(certified_log_constant(K, n))
    except OverflowError:
        return math.inf


def _correlation_kernels(A: StateAlgebra, xs: list, n: int):
    """Matrices L, R with ``first = Tr(L x_new)`` and ``second = Tr(R x_new^*)``.

    One pair per tuple ``(k1, l1, ..., k_{n-1}, l_{n-1}, k0)`` over ``xs``:
    ``L = D^{1/n} a_1 D^{1/n} ... a_{n-1} D^{1/n} x_k0^*`` and
    ``R = x_k0 D^{1/n} a_1 ... a_{n-1} D^{1/n}`` with ``a_j = x_kj^* x_lj``.
    """
    d = A.power(1.0 / n)
    X = np.stack(xs)
    chains = d[None]
    for _ in range(n - 1):
        prods = np.einsum("kab,lbc->klac", X.conj().transpose(0, 2, 1), X).reshape(-1, A.N, A.N)
        chains = np.einsum("tab,sbc->tsac", chains, prods @ d).reshape(-1, A.N, A.N)
    L = np.einsum("tab,kbc->tkac", chains, X.conj().transpose(0, 2, 1)).reshape(-1, A.N, A.N)
    R = np.einsum("kab,tbc->ktac", X, chains).reshape(-1, A.N, A.N)
    return L, R


def max_correlations(A: StateAlgebra, selected: list, candidates: np.ndarray, n: int) -> np.ndarray:
    """For each candidate, the largest modulus of both twisted correlations over all tuples."""
    L, R = _correlation_kernels(A, selected, n)
    first = np.einsum("tab,cba->ct", L, candidates)
    second = np.einsum("tab,cab->ct", R, candidates.conj())
    return np.maximum(np.abs(first).max(axis=1), np.abs(second).max(axis=1))


@dataclass
class GreedyResult:
    indices: list
    K: float
    n: int
    constant: float
    log_constant: float
    complete: bool
    thresholds: list

    @property
    def p(self) -> int:
        return 2 * self.n


def greedy_lambda_select(B: OrthoSystem, n: int = 2, target_count: int = 8) -> GreedyResult:
    """Greedy extraction of a Lambda(2n) subfamily of an orthogonal system.

    The first element is always taken.  With k elements chosen, the smallest
    remaining index whose twisted correlations against every tuple of chosen
    elements are at most ``1 / (2 k^{2n-1} (k+1))`` is admitted next.  Stops
    at ``target_count`` or when the pool runs out (``complete`` is False).
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if len(B) == 0:
        raise ValueError("empty pool")
    A = B.algebra
    K = B.lp_bound(2 * n)
    pool = np.stack(B.elements)
    chosen = [0]
    thresholds = []
    while len(chosen) < target_count:
        k = len(chosen)
        rest = [i for i in range(len(B)) if i not in chosen]
        if not rest:
            break
        thr = selection_threshold(k, n)
        worst = max_correlations(A, [B.elements[i] for i in chosen], pool[rest], n)
        admissible = [i for i, w in zip(rest, worst) if w <= thr]
        if not admissible:
            break
        chosen.append(admissible[0])
        thresholds.append(thr)
    logc = certified_log_constant(K, n)
    return GreedyResult(chosen, K, n, certified_constant(K, n), logc,
                        len(chosen) >= target_count, thresholds)


def audit_selection(B: OrthoSystem, result: GreedyResult) -> float:
    """Worst ratio of realized correlation to admission threshold (<= 1 means valid)."""
    worst = 0.0
    for k in range(1, len(result.indices)):
        selected = [B.elements[i] for i in result.indices[:k]]
        cand = np.stack([B.elements[result.indices[k]]])
        corr = float(max_correlations(B.algebra, selected, cand, result.n)[0])
        worst = max(worst, corr / selection_threshold(k, result.n))
    return worst


def unit_sphere_samples(m: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    c = rng.standard_normal((trials, m)) + 1j * rng.standard_normal((trials, m))
    return c / np.linalg.norm(c, axis=1, keepdims=True)


def lambda_ratio_check(A: StateAlgebra, elements, p: float, trials: int = 1000, seed: int = 0) -> float:
    """Largest observed ``||sum c_k x_k||_p / ||c||_2`` over random and basis coefficients."""
    X = np.stack([np.asarray(x, dtype=complex) for x in elements])
    if len(X) == 0:
        raise ValueError("empty selection")
    rng = np.random.default_rng(seed)
    coeffs = np.vstack([np.eye(len(X)), unit_sphere_samples(len(X), trials, rng)])
    sums = np.einsum("tk,kab->tab", coeffs, X)
    return float(np.max(haagerup_lp_norm(A, sums, p)))


@dataclass
class KhintchineResult:
    lhs: float
    column: float
    row: float
    exact: bool
    patterns: int

    @property
    def crp(self) -> float:
        return max(self.column, self.row)


def khintchine_sample(A: StateAlgebra, elements, p: float, exhaustive_up_to: int = 12,
                      trials: int = 4096, seed: int = 0) -> KhintchineResult:
    """Both sides of the noncommutative Khintchine inequality.

    ``lhs = (E ||sum eps_k x_k||_p^p)^{1/p}`` over Rademacher signs, exact
    over all sign patterns when there are at most ``exhaustive_up_to``
    elements and Monte Carlo otherwise.  The column/row square functions are
    taken of ``x_k rho^{1/p}``.
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    X = np.stack([np.asarray(x, dtype=complex) for x in elements])
    Xt = X @ A.power(1.0 / p)
    m = len(X)
    if m <= exhaustive_up_to:
        signs = np.array(list(itertools.product((1.0, -1.0), repeat=m)))
        exact = True
    else:
        rng = np.random.default_rng(seed)
        signs = rng.choice((1.0, -1.0), size=(trials, m))
        exact = False
    lhs = 0.0
    for chunk in np.array_split(signs, max(1, len(signs) // 512)):
        sums = np.einsum("tk,kab->tab", chunk, Xt)
        lhs += float(np.sum(schatten_norm(sums, p) ** p))
    lhs = (lhs / len(signs)) ** (1.0 / p)
    col = np.einsum("kba,kbc->ac", Xt.conj(), Xt)
    row = np.einsum("kab,kcb->ac", Xt, Xt.conj())
    column = _psd_power_norm(col, p)
    rown = _psd_power_norm(row, p)
    return KhintchineResult(lhs, column, rown, exact, len(signs))


def _psd_power_norm(s: np.ndarray, p: float) -> float:
    """``|| s^{1/2} ||_p`` for positive semidefinite s."""
    w = np.clip(np.linalg.eigvalsh((s + s.conj().T) / 2), 0.0, None)
    return float(np.sum(w ** (p / 2)) ** (1.0 / p))


# --- named families --------------------------------------------------------

def matrix_units(N: int) -> list:
    out = []
    for i in range(N):
        for j in range(N):
            e = np.zeros((N, N), dtype=complex)
            e[i, j] = 1.0
            out.append(e)
    return out


def fourier_unitaries(N: int) -> list:
    """Clock-and-shift unitaries ``X^a Z^b``."""
    shift = np.roll(np.eye(N), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(N) / N))
    return [np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            for a in range(N) for b in range(N)]


def build_family(A: StateAlgebra, name: str, count: int | None = None, seed: int = 0,
                 normalize: bool = True) -> OrthoSystem:
    if name == "matrix-units":
        xs = matrix_units(A.N)
    elif name == "fourier-unitaries":
        xs = fourier_unitaries(A.N)
    elif name == "random-gs":
        rng = np.random.default_rng(seed)
        m = count or A.N * A.N
        xs = list(rng.standard_normal((m, A.N, A.N)) + 1j * rng.standard_normal((m, A.N, A.N)))
    else:
        raise ValueError(f"unknown family {name!r}")
    if count is not None:
        xs = xs[:count]
    return gram_schmidt_phi(A, xs, normalize=normalize)
