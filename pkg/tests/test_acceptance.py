"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run directly (``python tests/test_acceptance.py``) or through pytest; the
terminal summary lists every criterion.
"""

import math
import sys
import time

import numpy as np
import pytest

from lacuna.cli import sidon_battery
from lacuna.finvn import (
    StateAlgebra,
    audit_selection,
    build_family,
    greedy_lambda_select,
    haagerup_lp_norm,
    khintchine_sample,
    lambda_ratio_check,
    modular_sigma,
)
from lacuna.fourier import (
    MultiplierSymbol,
    apply_multiplier,
    conjugate_symbol,
    from_coefficients,
    haar_pair,
    l1_dual_norm,
    l2_multiplier_norm,
    l2_norm,
    modular_transform,
    random_element,
    sampled_multiplier_norm,
)
from lacuna.lacunary import IrrepSet, central_lambda4_ratio, check_q_boundedness, gap_set, kq_constant, sidon_bound
from lacuna.norms import (
    CentralPoly,
    GeneratorPoly,
    central_l4,
    central_sup_norm,
    central_to_fourier,
    fundamental_combo,
    fundamental_combo_norm,
    gns_norm_estimate,
)
from lacuna.rep import q_matrix, suq2


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def haar_gram(model, n):
    """G[(i,j),(l,m)] = h(u_ij^* u_lm), flattened row-major in (i, j)."""
    d = n + 1
    G = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            for l in range(d):
                for m in range(d):
                    G[i * d + j, l * d + m] = haar_pair(model, n, i, j, l, m, adjoint_first=True)
    return G


def test_c01_haar_plancherel_exactness(criterion):
    worst = 0.0
    with Timer() as t:
        for q in (0.3, 0.5, 0.9):
            model = suq2(q)
            grams = {n: haar_gram(model, n) for n in range(5)}
            rng = np.random.default_rng([1, int(q * 10)])
            for _ in range(1000):
                n = int(rng.integers(0, 5))
                X = rng.standard_normal((n + 1, n + 1)) + 1j * rng.standard_normal((n + 1, n + 1))
                xvec = X.T.reshape(-1)  # x_ij = X[j, i]
                gram = float(np.real(xvec.conj() @ grams[n] @ xvec))
                worst = max(worst, abs(l2_norm(from_coefficients(model, {n: X})) ** 2 - gram))
    ok = worst <= 1e-12 and t.elapsed < 5
    criterion(ok, f"max |l2^2 - gram| = {worst:.2e} over 3000 elements, {t.elapsed:.2f}s")
    assert ok


def test_c02_gap_set_lambda4_certificate(criterion):
    with Timer() as t:
        rep = central_lambda4_ratio(gap_set(8, q=0.5), trials=10000, multistarts=16, seed=7)
    ok = rep.estimate <= kq_constant(0.5) and rep.certified == kq_constant(0.5) and t.elapsed < 60
    criterion(ok, f"estimate {rep.estimate:.6f} <= K_q {rep.certified:.4f}, margin {rep.margin:.4f}, {t.elapsed:.2f}s")
    assert ok


def test_c03_classical_divergence_quantum_boundedness(criterion):
    with Timer() as t:
        classical = [central_l4(CentralPoly(suq2(1.0), {n: 1})) ** 4 for n in range(51)]
        quantum = [central_l4(CentralPoly(suq2(0.5), {n: 1})) ** 4 for n in range(41)]
    exact_err = max(abs(v - (n + 1)) for n, v in enumerate(classical))
    diffs = np.abs(np.diff(quantum))
    ok = exact_err < 1e-12 * 51 and diffs[-1] < 1e-6 and max(quantum) < 2.0 and t.elapsed < 5
    criterion(ok, f"q=1 max |l4^4 - (n+1)| = {exact_err:.1e}; q=0.5 diff at n=40 {diffs[-1]:.1e}, "
                  f"limit ~{quantum[-1]:.8f}, {t.elapsed:.2f}s")
    assert ok


def test_c04_appendix_extractor_certificate(criterion):
    worst_audit, worst_ratio_over_c, sizes = 0.0, -math.inf, []
    with Timer() as t:
        for seed in range(10):
            A = StateAlgebra.random(16, seed=seed)
            B = build_family(A, "matrix-units")
            res = greedy_lambda_select(B, n=2, target_count=8)
            sizes.append(len(res.indices))
            ratio = lambda_ratio_check(A, [B.elements[i] for i in res.indices], 4, 1000, seed)
            worst_audit = max(worst_audit, audit_selection(B, res))
            # compare in logs: C is astronomically large
            worst_ratio_over_c = max(worst_ratio_over_c, math.log(ratio) - res.log_constant)
    ok = all(s == 8 for s in sizes) and worst_ratio_over_c <= 0 and worst_audit <= 1 + 1e-12 and t.elapsed < 60
    criterion(ok, f"selected {sizes}, worst log(ratio/C) = {worst_ratio_over_c:.2f}, "
                  f"worst audit ratio {worst_audit:.3f}, {t.elapsed:.2f}s")
    assert ok


def test_c05_l2_multiplier_isometry(criterion):
    model = suq2(0.5)
    rng = np.random.default_rng(5)
    worst_sample, worst_exact = 0.0, 0.0
    with Timer() as t:
        for k in range(1000):
            count = int(rng.integers(1, 4))
            labels = list(rng.choice(5, size=count, replace=False))
            a = MultiplierSymbol(model, random_element(model, labels, rng).blocks)
            svd = max(np.linalg.svd(b, compute_uv=False)[0] for b in a.blocks.values())
            exact = l2_multiplier_norm(a)
            worst_exact = max(worst_exact, abs(exact - svd))
            est = sampled_multiplier_norm(a, "right", samples=1000, seed=k)
            worst_sample = max(worst_sample, abs(est - exact))
    ok = worst_sample <= 1e-3 and worst_exact <= 1e-12 and t.elapsed < 10
    criterion(ok, f"max |sampled - sup||a||| = {worst_sample:.2e}, max |analytic - SVD| = {worst_exact:.1e}, "
                  f"{t.elapsed:.2f}s")
    assert ok


def test_c06_modular_conjugation_identity(criterion):
    model = suq2(0.5)
    rng = np.random.default_rng(6)
    worst = 0.0
    with Timer() as t:
        for _ in range(1000):
            tt = float(rng.uniform(-10, 10))
            labels = list(rng.choice(4, size=int(rng.integers(1, 3)), replace=False))
            x = random_element(model, labels, rng)
            a = MultiplierSymbol(model, random_element(model, labels, rng).blocks)
            lhs = modular_transform(tt, apply_multiplier("left", a, modular_transform(-tt, x)))
            rhs = apply_multiplier("left", conjugate_symbol(a, -1j * tt), x)
            worst = max(worst, lhs.max_block_diff(rhs))
    ok = worst <= 1e-12 and t.elapsed < 5
    criterion(ok, f"max blockwise difference {worst:.2e} over 1000 cases, {t.elapsed:.2f}s")
    assert ok


def test_c07_theta_parameter_identity(criterion):
    worst = 0.0
    with Timer() as t:
        for N in (3, 5, 8):
            A = StateAlgebra.random(N, seed=N)
            rng = np.random.default_rng(N)
            X = rng.standard_normal((1000, N, N)) + 1j * rng.standard_normal((1000, N, N))
            for p in (2, 4, 6):
                for theta in (0.0, 0.25, 0.5, 1.0):
                    lhs = haagerup_lp_norm(A, X, p, theta)
                    shifted = np.stack([modular_sigma(A, -1j * theta / p, x) for x in X])
                    rhs = haagerup_lp_norm(A, shifted, p, 0.0)
                    worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    ok = worst <= 1e-10 and t.elapsed < 10
    criterion(ok, f"max |theta path - sigma path| = {worst:.2e}, {t.elapsed:.2f}s")
    assert ok


def test_c08_singleton_sidon_bound(criterion):
    details, ok = [], True
    with Timer() as t:
        for q in (0.2, 0.5, 0.9):
            ratios = sidon_battery(q, 100, seed=8, trunc=64, theta_grid=256)
            bound = sidon_bound(q) * 1.05
            ok &= max(ratios) <= bound
            val = gns_norm_estimate(GeneratorPoly(((("g*",), -q),)), q, 64, 256)
            ok &= q - 1e-6 <= val <= q
            details.append(f"q={q}: max ratio {max(ratios):.4f} <= {bound:.4f}, ||-q g*|| = {val:.12f}")
    ok &= t.elapsed < 120
    criterion(ok, "; ".join(details) + f", {t.elapsed:.2f}s")
    assert ok


def test_c09_fusion_ring_isometry_cross_check(criterion):
    q = 0.5
    chi1 = np.diag(1 / q_matrix(suq2(q), 1)) / 2.5
    rng = np.random.default_rng(9)
    worst_rel, violations = 0.0, 0
    with Timer() as t:
        for _ in range(100):
            c0, c1 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            poly = fundamental_combo(c1 * chi1, q) + GeneratorPoly(((((), c0),)))
            gns = gns_norm_estimate(poly, q, trunc=128)
            torus = central_sup_norm(CentralPoly(suq2(q), {0: c0, 1: c1}))
            violations += gns > torus * (1 + 1e-9)
            worst_rel = max(worst_rel, 1 - gns / torus)
    ok = violations == 0 and worst_rel <= 0.02 and t.elapsed < 60
    criterion(ok, f"gns <= torus in all 100 cases ({violations} violations), worst shortfall {worst_rel:.2%}, "
                  f"{t.elapsed:.2f}s")
    assert ok


def test_c10_khintchine_left_inequality(criterion):
    violations, worst_ratio, checked = 0, 0.0, 0
    with Timer() as t:
        for b in range(100):
            rng = np.random.default_rng([10, b])
            N = int(rng.integers(2, 5))
            m = int(rng.integers(1, 11))
            A = StateAlgebra.random(N, seed=int(rng.integers(2 ** 31)))
            xs = list(rng.standard_normal((m, N, N)) + 1j * rng.standard_normal((m, N, N)))
            for p in (2, 4):
                res = khintchine_sample(A, xs, p)
                checked += 1
                assert res.exact
                violations += res.crp > res.lhs * (1 + 1e-12)
                worst_ratio = max(worst_ratio, res.lhs / (math.sqrt(p) * res.crp))
    ok = violations == 0 and worst_ratio < 10 and t.elapsed < 60
    criterion(ok, f"{violations} violations in {checked} exact batteries, "
                  f"max E||sum eps x||_p / (sqrt(p) CR_p) = {worst_ratio:.3f}, {t.elapsed:.2f}s")
    assert ok


def test_c11_l1_and_central_formulas(criterion):
    rng = np.random.default_rng(11)
    worst_l1, sup_violations = 0.0, 0
    with Timer() as t:
        for _ in range(1000):
            size = int(rng.integers(1, 8))
            c = rng.standard_normal(size) + 1j * rng.standard_normal(size)
            f = CentralPoly.from_list(0.5, c)
            formula = math.fsum((n + 1) * abs(v) for n, v in enumerate(c))
            l1 = l1_dual_norm(central_to_fourier(f))
            worst_l1 = max(worst_l1, abs(l1 - formula) / formula)
            sup_violations += central_sup_norm(f) > formula * (1 + 1e-12)
    ok = worst_l1 <= 1e-12 and sup_violations == 0 and t.elapsed < 5
    criterion(ok, f"max rel |l1 - sum (n+1)|c|| = {worst_l1:.1e}, {sup_violations} sup violations, {t.elapsed:.2f}s")
    assert ok


def test_c12_q_screening(criterion):
    with Timer() as t:
        exact = all(check_q_boundedness(IrrepSet(tuple(range(n + 1))), suq2(0.5)).max_q == 2.0 ** n
                    for n in range(31))
        logs = [math.log2(check_q_boundedness(gap_set(k), suq2(0.5)).max_q) for k in range(1, 13)]
    growth = np.diff(logs)
    super_exp = all(b > a for a, b in zip(growth, growth[1:]))
    triangular = logs == [k * (k - 1) / 2 for k in range(1, 13)]
    ok = exact and super_exp and triangular and t.elapsed < 1
    criterion(ok, f"{{0..n}} screen = 2^n for n <= 30: {exact}; gap-set log2 max||Q|| = {logs[:6]}... "
                  f"with increasing increments, {t.elapsed:.3f}s")
    assert ok


def test_fundamental_combo_reference():
    """Fundamental combination reproducing -q gamma^* has norm q (used by criterion 8)."""
    q = 0.5
    assert fundamental_combo_norm(np.array([[0, 0], [q / 2.5, 0]]), q) == pytest.approx(q, abs=1e-6)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
