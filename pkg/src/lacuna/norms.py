"""Norms of central polynomials and of polynomials in the generators of SU_q(2).

Central polynomials ``f = sum_n c_n chi_n`` get exact L^2 and L^4 norms from
the fusion rules and the twisted character pairing.  Their sup norm is read
off the classical SU(2) torus, where ``chi_n(t) = sin((n+1)t) / sin(t)``.
Polynomials in alpha, gamma are normed in the standard representation on
l^2(N) compressed to its first N basis vectors, which gives lower bounds.
"""

from __future__ import annotations

import json
import math
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.linalg import eig_banded
from scipy.optimize import minimize_scalar

from .fourier import FourierElement, l2_norm, modular_transform
from .rep import Irrep, QuantumGroupModel, check_label, classical_dim, fuse_factor, q_matrix, quantum_dim, suq2


@dataclass(frozen=True, eq=False)
class CentralPoly:
    """``sum_pi c_pi chi_pi`` with finitely many nonzero coefficients."""

    model: QuantumGroupModel
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        coeffs = {}
        for label, c in self.coeffs.items():
            label = check_label(self.model, label)
            coeffs[label] = coeffs.get(label, 0j) + complex(c)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_list(cls, q: float, coeffs) -> "CentralPoly":
        """Single-factor polynomial with ``coeffs[n]`` on chi_n."""
        return cls(suq2(q), {n: c for n, c in enumerate(coeffs) if c != 0})

    def single_factor_coeffs(self) -> dict[int, complex]:
        if self.model.n_factors != 1:
            raise ValueError("operation is defined for a single SU_q(2) factor only")
        return {label.index(0): c for label, c in self.coeffs.items()}

    def to_json(self) -> dict:
        if self.model.n_factors == 1:
            items = sorted(self.single_factor_coeffs().items())
            return {"q": self.model.q, "coeffs": {str(n): [c.real, c.imag] for n, c in items}}
        return {"model": self.model.to_json(),
                "coeffs": {str(l): [c.real, c.imag] for l, c in sorted(self.coeffs.items())}}

    @classmethod
    def from_json(cls, data) -> "CentralPoly":
        if isinstance(data, str):
            data = json.loads(data)
        if "model" in data:
            model = QuantumGroupModel(tuple(data["model"]))
        elif "q" in data:
            model = suq2(float(data["q"]))
        else:
            raise ValueError("central polynomial needs 'q' or 'model'")
        coeffs = {}
        for key, value in data.get("coeffs", {}).items():
            try:
                coeffs[Irrep.parse(str(key))] = _parse_complex(value)
            except (TypeError, ValueError) as exc:
                raise ValueError(f"coeffs.{key}: {exc}") from exc
        return cls(model, coeffs)


def _parse_complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError("expected [re, im]")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def central_to_fourier(f: CentralPoly) -> FourierElement:
    """chi_pi has coefficient matrix I, hence Fourier block ``Q_pi^-1 / d_pi``."""
    blocks = {}
    for label, c in f.coeffs.items():
        blocks[label] = np.diag(c / q_matrix(f.model, label) / quantum_dim(f.model, label))
    return FourierElement(f.model, blocks)


def central_l2(f: CentralPoly) -> float:
    return math.sqrt(sum(abs(c) ** 2 for c in f.coeffs.values()))


def character_l4_pairing(model: QuantumGroupModel, m: int, n: int | None = None) -> float:
    """``h(chi_m sigma_{-i/2}(chi_n))``: ``(m+1)/d_m`` on the diagonal, 0 off it."""
    if n is not None and n != m:
        return 0.0
    q = model.q
    return (m + 1) / quantum_dim(suq2(q), m)


def square_coefficients(coeffs: Mapping[int, complex]) -> dict[int, complex]:
    """Character expansion of ``f^* f`` for ``f = sum c_n chi_n``."""
    t: dict[int, complex] = defaultdict(complex)
    items = sorted(coeffs.items())
    for i, ci in items:
        for j, cj in items:
            w = ci.conjugate() * cj
            for m in fuse_factor(i, j):
                t[m] += w
    return dict(t)


def central_l4(f: CentralPoly) -> float:
    """``||f||_4^4 = h(f^*f sigma_{-i/2}(f^*f)) = sum_m t_m^2 (m+1)/d_m``."""
    coeffs = f.single_factor_coeffs()
    t = square_coefficients(coeffs)
    terms = [(tm.real ** 2) * character_l4_pairing(f.model, m) for m, tm in t.items()]
    return math.fsum(terms) ** 0.25


def _character_values(ns: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """chi_n(theta) on the classical torus, with the limits at 0 and pi."""
    theta = np.asarray(theta, dtype=float)
    s = np.sin(theta)[:, None]
    vals = np.empty((theta.size, ns.size))
    interior = np.abs(s[:, 0]) > 1e-12
    vals[interior] = np.sin((ns[None, :] + 1) * theta[interior, None]) / s[interior]
    edge = ~interior
    if edge.any():
        sign = np.where(np.cos(theta[edge]) > 0, 1.0, -1.0)[:, None]
        vals[edge] = (sign ** ns[None, :]) * (ns[None, :] + 1)
    return vals


def central_sup_norm(f: CentralPoly, grid: int = 256, return_bound: bool = False):
    """Sup norm of a central polynomial via the classical torus.

    A grid on ``[0, pi]`` (endpoints included) locates the maximum of
    ``|sum c_n chi_n|``; a bounded scalar search refines it inside the two
    neighbouring cells.  With ``return_bound`` the result is
    ``(value, grid_error)`` where ``grid_error`` is the Lipschitz bound
    ``L h / 2`` on how far the grid maximum can sit below the true sup.
    """
    coeffs = f.single_factor_coeffs()
    if not coeffs:
        return (0.0, 0.0) if return_bound else 0.0
    ns = np.array(sorted(coeffs), dtype=float)
    cs = np.array([coeffs[int(n)] for n in ns])

    def g(theta):
        return np.abs(_character_values(ns, np.atleast_1d(theta)) @ cs)

    thetas = np.linspace(0.0, math.pi, grid + 1)
    vals = g(thetas)
    k = int(np.argmax(vals))
    best = float(vals[k])
    lo, hi = thetas[max(k - 1, 0)], thetas[min(k + 1, grid)]
    if hi > lo:
        res = minimize_scalar(lambda t: -float(g(t)[0]), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        best = max(best, -float(res.fun))
    if not return_bound:
        return best
    # chi_n = sum_k e^{i(n-2k)t}, so |chi_n'| <= sum_k |n - 2k|
    lip = sum(abs(c) * sum(abs(int(n) - 2 * j) for j in range(int(n) + 1)) for n, c in zip(ns, cs))
    return best, lip * (math.pi / grid) / 2.0


def l1_central(f: CentralPoly) -> float:
    """``sum_pi dim(pi) |c_pi|``."""
    return math.fsum(classical_dim(l) * abs(c) for l, c in f.coeffs.items())


# --- generator polynomials -------------------------------------------------

LETTERS = ("a", "a*", "g", "g*")
_WINDING = {"a": 0, "a*": 0, "g": 1, "g*": -1}


@dataclass(frozen=True)
class GeneratorPoly:
    """Noncommutative polynomial in alpha (``a``), gamma (``g``) and adjoints.

    Words are kept exactly as written; the empty word is the unit.
    """

    terms: tuple = ()

    def __post_init__(self):
        terms = []
        for word, coeff in self.terms:
            word = tuple(word)
            for letter in word:
                if letter not in LETTERS:
                    raise ValueError(f"unknown generator letter {letter!r}")
            terms.append((word, complex(coeff)))
        object.__setattr__(self, "terms", tuple(terms))

    @classmethod
    def parse(cls, text: str) -> "GeneratorPoly":
        """Parse ``"(1.0+0i)*a g* g + (-0.5)*g"``; a bare word has coefficient 1."""
        terms = []
        for chunk in _split_terms(text):
            if "*" in chunk and chunk.lstrip().startswith("("):
                coeff_txt, _, word_txt = chunk.partition(")*")
                coeff = complex(coeff_txt.strip().lstrip("(").replace("i", "j"))
            elif re.match(r"^\s*[-+0-9.]", chunk):
                coeff_txt, _, word_txt = chunk.partition("*")
                coeff = complex(coeff_txt.strip().replace("i", "j"))
            else:
                coeff, word_txt = 1.0, chunk
            word = tuple(w for w in word_txt.split() if w != "1")
            terms.append((word, coeff))
        return cls(tuple(terms))

    def __str__(self) -> str:
        parts = []
        for word, c in self.terms:
            parts.append(f"({c.real!r}{c.imag:+}i)*" + (" ".join(word) if word else "1"))
        return " + ".join(parts)

    def __add__(self, other: "GeneratorPoly") -> "GeneratorPoly":
        return GeneratorPoly(self.terms + other.terms)

    def scale(self, c) -> "GeneratorPoly":
        return GeneratorPoly(tuple((w, c * k) for w, k in self.terms))

    @property
    def max_length(self) -> int:
        return max((len(w) for w, _ in self.terms), default=0)


def _split_terms(text: str) -> list[str]:
    chunks, depth, cur = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "+" and depth == 0:
            chunks.append(cur)
            cur = ""
        else:
            cur += ch
    chunks.append(cur)
    return [c.strip() for c in chunks if c.strip()]


def generator_matrices(q: float, size: int) -> dict[str, np.ndarray]:
    """alpha, gamma and adjoints on span{e_0 .. e_{size-1}} at theta = 0."""
    k = np.arange(size)
    alpha = np.zeros((size, size))
    alpha[k[:-1], k[1:]] = np.sqrt(1.0 - q ** (2 * k[1:]))
    gamma = np.diag(q ** k.astype(float))
    return {"a": alpha, "a*": alpha.T.copy(), "g": gamma, "g*": gamma.copy()}


# relative allowance for SVD backward error; at least 1e-12 so that typical
# truncations share one factor and the estimate stays nondecreasing in N
_SVD_SLACK = 1e-12


def _check_q(q: float):
    if not 0.0 < q < 1.0:
        raise ValueError(f"truncated representation needs 0 < q < 1, got {q}")


def winding_components(p: GeneratorPoly, q: float, trunc: int) -> dict[int, np.ndarray]:
    """Compressions ``P_N pi_0(w) P_N`` grouped by gamma-winding number.

    ``pi_theta(w) = e^{i k theta} pi_0(w)`` with ``k = #g - #g*``.  Products
    are formed on ``trunc + max word length`` basis vectors, enough for every
    entry of the N x N corner to be exact.
    """
    size = trunc + p.max_length + 1
    mats = generator_matrices(q, size)
    comps: dict[int, np.ndarray] = defaultdict(lambda: np.zeros((trunc, trunc), dtype=complex))
    for word, c in p.terms:
        m = np.eye(size)
        for letter in word:
            m = m @ mats[letter]
        comps[sum(_WINDING[l] for l in word)] += c * m[:trunc, :trunc]
    return dict(comps)


def _top_singular_values(ops: np.ndarray) -> np.ndarray:
    """Largest singular value of each matrix in a stack.

    Narrow-banded stacks (the usual case: alpha, gamma and their adjoints
    are bidiagonal or diagonal) go through the top eigenvalue of the banded
    ``M^* M``; anything else uses a dense SVD.
    """
    N = ops.shape[-1]
    rows, cols = np.nonzero(np.any(ops != 0, axis=0))
    bw = int(np.max(np.abs(rows - cols))) if rows.size else 0
    if 4 * (2 * bw + 1) > N:
        return np.linalg.norm(ops, ord=2, axis=(1, 2))
    gram = ops.conj().transpose(0, 2, 1) @ ops
    u = 2 * bw
    out = np.empty(len(ops))
    band = np.zeros((u + 1, N), dtype=complex)
    for t, h in enumerate(gram):
        for k in range(u + 1):
            band[u - k, k:] = np.diagonal(h, k)
        top = eig_banded(band, eigvals_only=True, select="i", select_range=(N - 1, N - 1))[0]
        out[t] = math.sqrt(max(top, 0.0))
    return out


def gns_norm_estimate(p: GeneratorPoly, q: float, trunc: int = 64, theta_grid: int = 256) -> float:
    """Lower bound on the C*-norm of ``p`` in C(SU_q(2)).

    Maximum over ``theta = 2 pi j / theta_grid`` of the operator norm of the
    compression of ``pi_theta(p)`` to the first ``trunc`` basis vectors.
    """
    _check_q(q)
    if trunc < 2 or theta_grid < 1:
        raise ValueError("need trunc >= 2 and theta_grid >= 1")
    comps = winding_components(p, q, trunc)
    if not comps:
        return 0.0
    windings = np.array(sorted(comps))
    if windings.tolist() == [0]:
        top = float(np.linalg.norm(comps[0], 2))
    else:
        stack = np.stack([comps[int(w)] for w in windings])
        thetas = 2 * np.pi * np.arange(theta_grid) / theta_grid
        phases = np.exp(1j * np.outer(thetas, windings))
        ops = np.einsum("tw,wij->tij", phases, stack)
        top = float(np.max(_top_singular_values(ops)))
    # backward error of the SVD, so the value stays a lower bound in floating point
    slack = max(_SVD_SLACK, 8 * np.finfo(float).eps * trunc)
    return float(max(0.0, top * (1.0 - slack)))


def relation_residual(q: float, trunc: int) -> float:
    """Largest deviation from the unitarity relations of the fundamental matrix.

    Checks ``alpha^* alpha + gamma^* gamma = 1``, ``alpha alpha^* + q^2 gamma gamma^* = 1``
    and ``gamma^* gamma = gamma gamma^*`` on the compression.
    """
    _check_q(q)
    comps = [
        winding_components(GeneratorPoly.parse("a* a + g* g + (-1)*1"), q, trunc),
        winding_components(GeneratorPoly(((("a", "a*"), 1.0), (("g", "g*"), q * q), ((), -1.0))), q, trunc),
        winding_components(GeneratorPoly(((("g*", "g"), 1.0), (("g", "g*"), -1.0))), q, trunc),
    ]
    return max(float(np.max(np.abs(m))) for c in comps for m in c.values())


# u_11 = alpha, u_12 = -q gamma^*, u_21 = gamma, u_22 = alpha^*
def fundamental_entries(q: float) -> dict[tuple[int, int], GeneratorPoly]:
    return {
        (0, 0): GeneratorPoly(((("a",), 1.0),)),
        (0, 1): GeneratorPoly(((("g*",), -q),)),
        (1, 0): GeneratorPoly(((("g",), 1.0),)),
        (1, 1): GeneratorPoly(((("a*",), 1.0),)),
    }


def fundamental_combo(A, q: float) -> GeneratorPoly:
    """``d (id x Tr)[(1 x A Q) u]``: the polynomial with Fourier block A on u^(1)."""
    A = np.asarray(A, dtype=complex)
    if A.shape != (2, 2):
        raise ValueError("A must be 2 x 2")
    qd = q_matrix(suq2(q), 1)
    d = float(qd.sum())
    B = d * A * qd[None, :]
    entries = fundamental_entries(q)
    poly = GeneratorPoly()
    for i in range(2):
        for j in range(2):
            if B[i, j] != 0:
                poly = poly + entries[(j, i)].scale(B[i, j])
    return poly


def fundamental_combo_norm(A, q: float, trunc: int = 64, theta_grid: int = 256) -> float:
    _check_q(q)
    return gns_norm_estimate(fundamental_combo(A, q), q, trunc, theta_grid)


def l2_theta_norm(x: FourierElement, theta: float) -> float:
    """L^2 norm for the theta-embedding: ``||sigma_{-i theta/2}(x)||_2``."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    return l2_norm(modular_transform(-0.5j * theta, x))
