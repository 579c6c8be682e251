"""Fourier side of polynomials on SU_q(2) products.

A polynomial x is stored through its Fourier blocks x^(pi), one square matrix
per irrep, written in the Q-diagonal basis.  The Plancherel weight on a block
is ``d_pi Tr(Q_pi . )``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .rep import (
    Irrep,
    IrrepLike,
    QuantumGroupModel,
    check_label,
    classical_dim,
    q_matrix,
    quantum_dim,
)

EXACT_TOL = 1e-12


def _as_block(label: Irrep, mat) -> np.ndarray:
    block = np.asarray(mat, dtype=complex)
    dim = classical_dim(label)
    if block.shape != (dim, dim):
        raise ValueError(f"block for irrep {label} has shape {block.shape}, expected {(dim, dim)}")
    return block


def _normalize_blocks(model: QuantumGroupModel, blocks: Mapping[IrrepLike, object]) -> dict[Irrep, np.ndarray]:
    out: dict[Irrep, np.ndarray] = {}
    for label, mat in blocks.items():
        label = check_label(model, label)
        if label in out:
            raise ValueError(f"irrep {label} given twice")
        out[label] = _as_block(label, mat)
    return out


@dataclass(frozen=True, eq=False)
class FourierElement:
    """Finitely supported family of Fourier blocks."""

    model: QuantumGroupModel
    blocks: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "blocks", _normalize_blocks(self.model, self.blocks))

    def block(self, label: IrrepLike) -> np.ndarray:
        label = check_label(self.model, label)
        if label in self.blocks:
            return self.blocks[label]
        d = classical_dim(label)
        return np.zeros((d, d), dtype=complex)

    @property
    def support(self) -> list[Irrep]:
        return sorted(self.blocks)

    def allclose(self, other: "FourierElement", atol: float = EXACT_TOL) -> bool:
        """Equality up to zero-block padding."""
        if self.model != other.model:
            return False
        for label in set(self.blocks) | set(other.blocks):
            if not np.allclose(self.block(label), other.block(label), rtol=0.0, atol=atol):
                return False
        return True

    def max_block_diff(self, other: "FourierElement") -> float:
        labels = set(self.blocks) | set(other.blocks)
        if not labels:
            return 0.0
        return max(float(np.max(np.abs(self.block(l) - other.block(l)))) for l in labels)

    def __add__(self, other: "FourierElement") -> "FourierElement":
        _same_model(self, other)
        labels = set(self.blocks) | set(other.blocks)
        return FourierElement(self.model, {l: self.block(l) + other.block(l) for l in labels})

    def __mul__(self, c) -> "FourierElement":
        return FourierElement(self.model, {l: c * b for l, b in self.blocks.items()})

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {
            "model": self.model.to_json(),
            "blocks": [
                {"irrep": str(l), "re": self.blocks[l].real.tolist(), "im": self.blocks[l].imag.tolist()}
                for l in self.support
            ],
        }

    @classmethod
    def from_json(cls, data) -> "FourierElement":
        if isinstance(data, str):
            data = json.loads(data)
        model = QuantumGroupModel(tuple(data["model"]))
        blocks = {}
        for i, entry in enumerate(data["blocks"]):
            try:
                label = Irrep.parse(str(entry["irrep"]))
                re = np.asarray(entry["re"], dtype=float)
                im = np.asarray(entry.get("im", np.zeros_like(re)), dtype=float)
            except (KeyError, ValueError) as exc:
                raise ValueError(f"blocks[{i}]: {exc}") from exc
            blocks[label] = re + 1j * im
        return cls(model, blocks)


@dataclass(frozen=True, eq=False)
class MultiplierSymbol:
    """Family of matrices a_pi acting on Fourier blocks.

    Off-support blocks are zero unless ``identity_extend`` is set, in which
    case they act as the identity.
    """

    model: QuantumGroupModel
    blocks: dict = field(default_factory=dict)
    identity_extend: bool = False

    def __post_init__(self):
        object.__setattr__(self, "blocks", _normalize_blocks(self.model, self.blocks))

    def block(self, label: IrrepLike) -> np.ndarray:
        label = check_label(self.model, label)
        if label in self.blocks:
            return self.blocks[label]
        d = classical_dim(label)
        if self.identity_extend:
            return np.eye(d, dtype=complex)
        return np.zeros((d, d), dtype=complex)

    def __matmul__(self, other: "MultiplierSymbol") -> "MultiplierSymbol":
        labels = set(self.blocks) | set(other.blocks)
        return MultiplierSymbol(
            self.model,
            {l: self.block(l) @ other.block(l) for l in labels},
            identity_extend=self.identity_extend and other.identity_extend,
        )


def _same_model(x, y):
    if x.model != y.model:
        raise ValueError("elements live on different quantum group models")


def from_coefficients(model: QuantumGroupModel, coeffs: Mapping[IrrepLike, object]) -> FourierElement:
    """Fourier blocks of ``x = sum_ij x_ij u_ij``.

    ``coeffs[pi]`` is the matrix ``X_pi = [x_ji]`` (transposed coefficient
    array); the block is ``X_pi Q_pi^-1 / d_pi``.
    """
    blocks = {}
    for label, mat in _normalize_blocks(model, coeffs).items():
        blocks[label] = mat / q_matrix(model, label)[None, :] / quantum_dim(model, label)
    return FourierElement(model, blocks)


def coefficient_matrix(model: QuantumGroupModel, label: IrrepLike, i: int, j: int) -> np.ndarray:
    """``X_pi`` for the single matrix coefficient u_ij (0-based indices)."""
    label = check_label(model, label)
    d = classical_dim(label)
    X = np.zeros((d, d), dtype=complex)
    X[j, i] = 1.0
    return X


def haar_pair(model: QuantumGroupModel, label: IrrepLike, i: int, j: int, l: int, m: int,
              adjoint_first: bool = False, other: IrrepLike | None = None) -> float:
    """Haar state on a product of two matrix coefficients (0-based indices).

    Default: ``h(u_ij (u'_lm)^*) = delta_il (Q)_mj / d``.  With
    ``adjoint_first``: ``h(u_ij^* u'_lm) = delta_jm (Q^-1)_li / d``.
    ``other`` names the irrep of the second coefficient (same as ``label`` if
    omitted); distinct irreps pair to zero.
    """
    label = check_label(model, label)
    other = label if other is None else check_label(model, other)
    for idx, bound in ((i, classical_dim(label)), (j, classical_dim(label)),
                       (l, classical_dim(other)), (m, classical_dim(other))):
        if not 0 <= idx < bound:
            raise IndexError(f"matrix index {idx} out of range for dimension {bound}")
    if label != other:
        return 0.0
    qd = q_matrix(model, label)
    d = quantum_dim(model, label)
    if adjoint_first:
        return float(qd[l] ** -1 / d) if (j == m and l == i) else 0.0
    return float(qd[m] / d) if (i == l and m == j) else 0.0


def l2_norm(x: FourierElement) -> float:
    total = 0.0
    for label, block in x.blocks.items():
        qd = q_matrix(x.model, label)
        # Tr(Q x^* x) = sum_{ij} Q_jj |x_ij|^2
        total += quantum_dim(x.model, label) * float(np.sum(np.abs(block) ** 2 * qd[None, :]))
    return float(np.sqrt(total))


def l1_dual_norm(x: FourierElement) -> float:
    """``sum_pi d_pi ||x^(pi) Q_pi||_trace``."""
    total = 0.0
    for label, block in x.blocks.items():
        weighted = block * q_matrix(x.model, label)[None, :]
        total += quantum_dim(x.model, label) * float(np.sum(np.linalg.svd(weighted, compute_uv=False)))
    return total


def sup_block_norm(x: FourierElement) -> float:
    """``sup_pi ||x^(pi)||_op``."""
    if not x.blocks:
        return 0.0
    return max(float(np.linalg.norm(b, 2)) for b in x.blocks.values())


def convolve(phi: FourierElement, psi: FourierElement) -> FourierElement:
    """Convolution; on the Fourier side the blocks multiply in reversed order."""
    _same_model(phi, psi)
    labels = set(phi.blocks) & set(psi.blocks)
    return FourierElement(phi.model, {l: psi.blocks[l] @ phi.blocks[l] for l in labels})


def apply_multiplier(side: str, a: MultiplierSymbol, x: FourierElement) -> FourierElement:
    """Left: ``x^ -> x^ Q a Q^-1``.  Right: ``x^ -> a x^``."""
    _same_model(a, x)
    out = {}
    for label, block in x.blocks.items():
        sym = a.block(label)
        if side == "left":
            qd = q_matrix(x.model, label)
            out[label] = (block * qd[None, :]) @ sym / qd[None, :]
        elif side == "right":
            out[label] = sym @ block
        else:
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return FourierElement(x.model, out)


def q_power(model: QuantumGroupModel, label: IrrepLike, z: complex) -> np.ndarray:
    """Diagonal of Q_pi^z on the principal branch."""
    qd = q_matrix(model, label)
    return np.exp(z * np.log(qd))


def modular_transform(z: complex, x: FourierElement) -> FourierElement:
    """Fourier blocks of sigma_z(x): ``Q^{iz} x^ Q^{iz}``."""
    out = {}
    for label, block in x.blocks.items():
        w = q_power(x.model, label, 1j * z)
        out[label] = w[:, None] * block * w[None, :]
    return FourierElement(x.model, out)


def conjugate_symbol(a: MultiplierSymbol, z: complex) -> MultiplierSymbol:
    """``Q^z a Q^-z`` blockwise."""
    out = {}
    for label, block in a.blocks.items():
        w = q_power(a.model, label, z)
        out[label] = w[:, None] * block / w[None, :]
    return MultiplierSymbol(a.model, out, identity_extend=a.identity_extend)


def l2_multiplier_norm(a: MultiplierSymbol) -> float:
    """Norm of the right multiplier on L^2: ``sup_pi ||a_pi||_op``."""
    norms = [float(np.linalg.norm(b, 2)) for b in a.blocks.values()]
    if a.identity_extend:
        norms.append(1.0)
    return max(norms, default=0.0)


def random_element(model: QuantumGroupModel, labels, rng: np.random.Generator) -> FourierElement:
    blocks = {}
    for label in labels:
        label = check_label(model, label)
        d = classical_dim(label)
        blocks[label] = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return FourierElement(model, blocks)


def sampled_multiplier_norm(a: MultiplierSymbol, side: str = "right", samples: int = 1000,
                            iterations: int = 100, seed: int = 0) -> float:
    """Estimate ``||m_a||`` on L^2 from ratios ``||m_a x||_2 / ||x||_2``.

    Random starting vectors are pushed through rounds of the power method on
    ``m_a^* m_a``; the best ratio seen is returned.  The multiplier acts
    blockwise, so each irrep block is iterated on its own (``samples //
    iterations`` starts per block), which avoids slow convergence when two
    blocks have nearly equal norms.  The adjoint of the right multiplier for
    the Plancherel inner product is the right multiplier by ``a^*``; for the
    left one it is the left multiplier by ``Q^-1 a^* Q``, which acts as right
    multiplication by ``a^*``.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    rng = np.random.default_rng(seed)
    starts = max(1, samples // max(iterations, 1))
    best = 0.0
    for label in sorted(a.blocks):
        qd = q_matrix(a.model, label)
        b = a.blocks[label]
        # left: x -> x (Q b Q^-1), whose adjoint is x -> x Q (Q b Q^-1)^* Q^-1 = x b^*
        fwd = b if side == "right" else (qd[:, None] * b) / qd[None, :]
        adj = b.conj().T
        w = quantum_dim(a.model, label) * qd[None, None, :]
        d = classical_dim(label)
        x = rng.standard_normal((starts, d, d)) + 1j * rng.standard_normal((starts, d, d))
        for _ in range(max(iterations, 1)):
            nx = np.sqrt(np.sum(w * np.abs(x) ** 2, axis=(1, 2)))
            x = x / np.where(nx == 0.0, 1.0, nx)[:, None, None]
            y = fwd @ x if side == "right" else x @ fwd
            best = max(best, float(np.max(np.sqrt(np.sum(w * np.abs(y) ** 2, axis=(1, 2))))))
            x = adj @ y if side == "right" else y @ adj
    return best
