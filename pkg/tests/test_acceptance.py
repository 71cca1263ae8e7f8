"""End-to-end acceptance checks at their stated tolerances.

Every test prints one ``[PASS]`` / ``[FAIL]`` line (visible with ``pytest -v``).
"""

import math

import numpy as np
import pytest

from ulamlab.correct import average_step, conjugating_unitary, correction_guarantee, kazhdan_correct, \
    projection_spread, stabilize_projection
from ulamlab.deformation import DeformationOps, continuity_rhs_weighted, ps_continuity_gap, ps_structural_checks
from ulamlab.experiments import PIPELINES, run_experiment
from ulamlab.cli import render
from ulamlab.groups import all_subgroups, build_group, coset_system, normal_subgroups, quotient
from ulamlab.induction import compress, induce
from ulamlab.linalg import norm, polar_unitary
from ulamlab.quasirep import QuasiRep, SQRT3, defect, kernel_triviality_check, max_root_power_distance, pullback, \
    uniform_distance
from ulamlab.reps import near_identity, perturb, random_representation, random_unitary
from ulamlab.witnesses import brooks_phi, coboundary_sup, exp_circle, nearest_circle_hom, nearest_hom_search, rolli
from ulamlab.words import enumerate_ball


@pytest.fixture
def emit(capsys):
    def _emit(name, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return _emit


def random_map(G, d, rng):
    vals = np.stack([random_unitary(d, rng) for _ in range(G.order)])
    vals[G.identity] = np.eye(d)
    return QuasiRep(G, vals)


# -- averaging -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def correction_runs():
    runs = []
    for gi, spec in enumerate(("cyclic:5", "cyclic:7", "symmetric:3", "dihedral:4")):
        G = build_group(spec)
        for d in (2, 3, 4):
            for eps in (0.002, 0.01, 0.05):
                for trial in range(50):
                    rng = np.random.default_rng([gi, d, int(eps * 1e4), trial])
                    pi = perturb(random_representation(G, d, rng), eps, rng)
                    e = defect(pi).value
                    one = defect(average_step(pi)).value
                    tr = kazhdan_correct(pi, check=False)
                    runs.append((spec, d, eps, e, one, tr))
    return runs


def test_kazhdan_correction_bound(correction_runs, emit):
    worst, bad = 0.0, []
    for spec, d, eps, e, _, tr in correction_runs:
        bound = correction_guarantee(e)
        ok = tr.converged and tr.final_defect <= 1e-12 and e <= eps + 1e-12 and tr.distance <= bound + 1e-8
        worst = max(worst, tr.distance / bound if bound else 0.0)
        if not ok:
            bad.append((spec, d, eps))
    emit("kazhdan-correction-bound", not bad,
         f"{len(correction_runs)} runs, worst distance/(eps+120eps^2) = {worst:.4f}")
    assert not bad


def test_one_step_contraction(correction_runs, emit):
    ratios = [one / e ** 2 for *_, e, one, _ in correction_runs if e > 1e-9]
    ok = all(one <= 11 * e ** 2 + 1e-8 for *_, e, one, _ in correction_runs)
    emit("one-step-contraction", ok, f"{len(ratios)} runs, worst defect_1/eps^2 = {max(ratios):.4f} (bound 11)")
    assert ok


# -- induction ---------------------------------------------------------------------------

INDUCTION_GROUPS = ("cyclic:6", "dihedral:3", "dihedral:4", "dihedral:5", "dihedral:6", "symmetric:3", "symmetric:4")


def test_induction_equalities(emit):
    worst = 0.0
    rng = np.random.default_rng(1001)
    for case in range(20):
        G = build_group(INDUCTION_GROUPS[case % len(INDUCTION_GROUPS)])
        subs = [H for H in all_subgroups(G) if G.order // len(H) <= 6 and len(H) < G.order]
        cs = coset_system(G, subs[int(rng.integers(len(subs)))])
        H = cs.subgroup_group()
        d = int(rng.integers(1, 4))
        mu1, mu2 = random_map(H, d, rng), perturb(random_representation(H, d, rng), 0.2, rng)
        b1, b2 = induce(mu1, cs, check=False).total, induce(mu2, cs, check=False).total
        worst = max(worst, abs(defect(b1).value - defect(mu1).value), abs(defect(b2).value - defect(mu2).value),
                    abs(uniform_distance(b1, b2) - uniform_distance(mu1, mu2)))
    ok = worst <= 1e-12
    emit("induction-equalities", ok, f"20 (group, subgroup) pairs, worst gap {worst:.2e}")
    assert ok


def test_compression_chain(emit):
    rng = np.random.default_rng(1002)
    worst = {"pq": 0.0, "pv": 0.0, "final": 0.0}
    n, ok = 0, True
    while n < 100:
        G = build_group(INDUCTION_GROUPS[n % len(INDUCTION_GROUPS)])
        subs = [H for H in all_subgroups(G) if G.order // len(H) <= 6 and len(H) < G.order]
        cs = coset_system(G, subs[int(rng.integers(len(subs)))])
        d = int(rng.integers(1, 3))
        rho = random_representation(cs.subgroup_group(), d, rng)
        bar = induce(rho, cs).total
        nu = bar.conjugate(near_identity(bar.dim, rng.uniform(0.0, 0.025), rng))
        delta = uniform_distance(nu, bar)
        if delta > 0.05:
            continue
        c = compress(nu, rho, cs, delta)
        ok &= c.pq <= 4 * delta + 1e-8 and c.pv <= 8 * delta + 1e-8 and c.final <= 16 * delta + 1e-8
        for key in ("pq", "pv", "final"):
            if delta > 1e-9:
                worst[key] = max(worst[key], getattr(c, key) / delta)
        n += 1
    emit("compression-chain", ok, "100 cases, worst ratios to delta: "
         + ", ".join(f"{k} {v:.3f}" for k, v in worst.items()) + " (bounds 4, 8, 16)")
    assert ok


# -- projections and intertwiners ---------------------------------------------------------

def test_projection_stabilization(emit):
    rng = np.random.default_rng(1003)
    specs = ("cyclic:4", "cyclic:6", "cyclic:12", "dihedral:3", "dihedral:4", "dihedral:6", "symmetric:3")
    worst, n = 0.0, 0
    ok = True
    while n < 100:
        G = build_group(specs[n % len(specs)])
        d = int(rng.integers(2, 7))
        nu = random_representation(G, d, rng)
        D = np.diag(rng.normal(size=d))
        A = sum(nu(g) @ D @ nu(g).conj().T for g in range(G.order))
        U = np.linalg.eigh(A)[1]
        r = int(rng.integers(1, d))
        u = near_identity(d, rng.uniform(0, 0.05), rng)
        P = u @ U[:, :r] @ U[:, :r].conj().T @ u.conj().T
        delta = projection_spread(nu, P)
        if delta > 0.2:
            continue
        Q = stabilize_projection(nu, P, delta)
        comm = max(norm(nu(g) @ Q - Q @ nu(g)) for g in range(G.order))
        ok &= comm <= 1e-8 and norm(Q @ Q - Q) <= 1e-9 and norm(P - Q) <= 2 * delta + 1e-8
        if delta > 1e-9:
            worst = max(worst, norm(P - Q) / delta)
        n += 1
    emit("projection-stabilization", ok, f"100 cases, worst ||P-Q||/delta = {worst:.4f} (bound 2)")
    assert ok


def test_polar_bound(emit):
    rng = np.random.default_rng(1004)
    worst, ok = 0.0, True
    for _ in range(500):
        d = int(rng.integers(1, 7))
        eps = rng.uniform(0, 0.5)
        E = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        T = np.eye(d) + eps * E / norm(E)
        dev = norm(polar_unitary(T).matrix - np.eye(d))
        ok &= dev <= 2 * eps + 1e-9
        worst = max(worst, dev / eps)
    emit("polar-bound", ok, f"500 matrices, worst ||U-Id||/eps = {worst:.4f} (bound 2)")
    assert ok


def test_conjugating_unitary(emit):
    rng = np.random.default_rng(1005)
    specs = ("cyclic:5", "cyclic:7", "dihedral:4", "symmetric:3", "dihedral:6")
    worst, ok, n = 0.0, True, 0
    while n < 100:
        G = build_group(specs[n % len(specs)])
        d = int(rng.integers(1, 7))
        pi = random_representation(G, d, rng)
        omega = pi.conjugate(near_identity(d, rng.uniform(0, 0.3), rng))
        eps = uniform_distance(pi, omega)
        if eps * math.sqrt(d) >= 1:
            continue
        c = conjugating_unitary(pi, omega, eps)
        ok &= c.intertwining_error <= 1e-8 and c.deviation <= 3 * math.sqrt(d) * eps + 1e-8
        if eps > 1e-9:
            worst = max(worst, c.deviation / (math.sqrt(d) * eps))
        n += 1
    emit("conjugating-unitary", ok, f"100 pairs, worst ||u-Id||/(sqrt(d) eps) = {worst:.4f} (bound 3)")
    assert ok


# -- free-group witnesses ---------------------------------------------------------------------

def test_rolli_defect(emit):
    rows, ok = [], True
    for n in (2, 3, 4):
        for delta in (0.1, 0.3, 1.0):
            for L in (4, 6):
                mu = rolli(n, delta, seed=7, L=L)
                dv = defect(mu, L).value
                ok &= dv <= delta + 1e-10
                rows.append(dv / delta)
    far = nearest_hom_search(rolli(2, 1.0, seed=7, L=4), 4, 16, seed=7, refine_steps=100).distance
    emit("rolli-defect", ok, f"18 exhaustive scans (L = 4, 6), worst defect/delta = {max(rows):.4f}; "
         f"nearest homomorphism found at distance {far:.4f} (n = 2, delta = 1, reported)")
    assert ok


def test_circle_witnesses(emit):
    phi = brooks_phi("ab")
    c = coboundary_sup(phi, 8).value
    ok, parts = True, []
    for t in (0.1, 0.01, 0.001):
        mu = exp_circle(phi, t, 8)
        dv = defect(mu, 8).value
        ok &= dv <= 2 * math.pi * t * c + 1e-12
        fit = nearest_circle_hom(mu, 8, grid=32)
        parts.append(f"t={t}: defect {dv:.3e}, D8 {fit.distance:.4f}")
    emit("circle-witnesses", ok, f"sup |d phi| = {c:g}; " + "; ".join(parts))
    assert ok


# -- kernels of quotients -----------------------------------------------------------------------

def test_root_of_unity_mechanism(emit):
    roots_ok = all(max_root_power_distance(m) >= SQRT3 - 1e-12 for m in range(2, 25))
    rng = np.random.default_rng(1006)
    specs = ("cyclic:6", "cyclic:12", "dihedral:4", "dihedral:6", "symmetric:3", "symmetric:4")
    forced = True
    for case in range(20):
        G = build_group(specs[case % len(specs)])
        normals = [N for N in normal_subgroups(G) if 1 < len(N) < G.order]
        N = normals[int(rng.integers(len(normals)))]
        Q, proj = quotient(G, N)
        nu = pullback(random_representation(Q, int(rng.integers(1, 4)), rng), proj)
        forced &= all(v.forced_trivial for v in kernel_triviality_check(nu, N, SQRT3 - 1e-3))
    ok = roots_ok and forced
    emit("root-of-unity-mechanism", ok, f"orders 2..24 reach sqrt(3): {roots_ok}; 20 quotient kernels forced trivial: {forced}")
    assert ok


# -- deformation ----------------------------------------------------------------------------

@pytest.fixture(scope="module")
def continuity_sweep():
    ops = DeformationOps(2, 8)
    words = enumerate_ball(2, 3)
    rng = np.random.default_rng(1007)
    out = []
    for _ in range(50):
        z, w = (0.9 * math.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform()) for _ in range(2))
        for a in words:
            lhs, rhs = ps_continuity_gap(ops, z, w, a)
            out.append((a, z, w, lhs, rhs, continuity_rhs_weighted(ops, z, w, a)))
    return ops, words, out


def test_deformation_structure(continuity_sweep, emit):
    ops, words, _ = continuity_sweep
    reps = [ps_structural_checks(ops, a, check=False) for a in words]
    ok = all(r.passed for r in reps)
    emit("deformation-structure", ok, f"all {len(words)} words with |a| <= 3 at L = 8; "
         f"max ||P - lambda P lambda^-1|| = {max(r.difference_norm for r in reps):.4f} (bound 2)")
    assert ok


@pytest.mark.xfail(strict=True, reason="the unweighted estimate drops the factor ||S(a)||, which exceeds 1 for |a| >= 2")
def test_deformation_continuity_printed(continuity_sweep, emit):
    _, _, rows = continuity_sweep
    bad = [r for r in rows if r[3] > r[4] + 1e-9]
    worst = max(rows, key=lambda r: r[3] / r[4] if r[4] else 0.0)
    emit("deformation-continuity", not bad,
         f"{len(rows)} (z, w, a) cases, {len(bad)} violate lhs <= sum |z^n - w^n|; worst lhs/rhs = "
         f"{worst[3] / worst[4]:.4f} at a = {worst[0]}")
    assert not bad


def test_deformation_continuity_weighted(continuity_sweep, emit):
    _, _, rows = continuity_sweep
    ok = all(r[3] <= r[5] + 1e-9 for r in rows)
    worst = max(r[3] / r[5] for r in rows if r[5])
    emit("deformation-continuity-weighted", ok,
         f"{len(rows)} cases, lhs <= ||S(a)|| sum |z^n - w^n| holds, worst ratio {worst:.4f}")
    assert ok


# -- determinism ------------------------------------------------------------------------------

def test_determinism(emit):
    same = {}
    for command in PIPELINES:
        cfg = {"seed": 11}
        first = render(run_experiment(command, cfg), "json")
        second = render(run_experiment(command, cfg), "json")
        same[command] = first == second
    ok = all(same.values())
    emit("determinism", ok, ", ".join(f"{k} {'identical' if v else 'DIFFERS'}" for k, v in same.items()))
    assert ok
