import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ulamlab.correct import (average_raw, average_step, conjugating_unitary, correction_guarantee, kazhdan_correct,
                             projection_spread, stabilize_projection)
from ulamlab.errors import SingularMatrixError, SpectralGapError, UsageError
from ulamlab.groups import build_group, cyclic
from ulamlab.linalg import norm
from ulamlab.quasirep import QuasiRep, defect, uniform_distance
from ulamlab.reps import near_identity, perturb, random_representation, random_representation_split, trivial_rep

seeds = st.integers(0, 2 ** 32 - 1)
groups = st.sampled_from(["cyclic:5", "cyclic:7", "dihedral:3", "dihedral:4", "symmetric:3"])


def naive_average(pi):
    G = pi.domain
    out = []
    for h in range(G.order):
        acc = np.zeros((pi.dim, pi.dim), dtype=complex)
        for x in range(G.order):
            acc += pi(x).conj().T @ pi(G.mul(x, h))
        out.append(acc / G.order)
    return np.stack(out)


def test_average_matches_double_loop():
    rng = np.random.default_rng(0)
    G = cyclic(5)
    rho = random_representation(G, 2, rng)
    vals = rho.values.copy()
    vals[3] = vals[3] @ near_identity(2, 0.2, rng)
    pi = QuasiRep(G, vals)
    assert np.allclose(average_raw(pi), naive_average(pi), atol=1e-14)


@given(seeds, groups, st.integers(1, 3))
def test_average_matches_double_loop_random(seed, spec, d):
    rng = np.random.default_rng(seed)
    pi = perturb(random_representation(build_group(spec), d, rng), 0.3, rng)
    assert np.allclose(average_raw(pi), naive_average(pi), atol=1e-13)


@given(seeds, groups, st.integers(1, 4))
def test_homomorphisms_are_fixed(seed, spec, d):
    rho = random_representation(build_group(spec), d, np.random.default_rng(seed))
    assert uniform_distance(average_step(rho), rho) <= 1e-12
    tr = kazhdan_correct(rho)
    assert tr.iterations == [] and tr.distance == 0.0 and tr.converged


@given(seeds, groups, st.integers(1, 3))
def test_averaging_commutes_with_conjugation(seed, spec, d):
    rng = np.random.default_rng(seed)
    pi = perturb(random_representation(build_group(spec), d, rng), 0.1, rng)
    u = random_representation_split(pi.domain, d, rng)[1]
    lhs = average_step(pi.conjugate(u))
    rhs = average_step(pi).conjugate(u)
    assert uniform_distance(lhs, rhs) <= 1e-12


def test_one_step_quadratic_on_z5():
    rng = np.random.default_rng(1)
    pi = perturb(random_representation(cyclic(5), 2, rng), 0.05, rng)
    eps = defect(pi).value
    assert eps <= 0.05 + 1e-12
    assert defect(average_step(pi)).value <= 11 * eps ** 2 + 1e-8


def test_correct_d4_example():
    rng = np.random.default_rng(2)
    pi = perturb(random_representation(build_group("dihedral:4"), 3, rng), 0.01, rng)
    tr = kazhdan_correct(pi)
    assert tr.converged and tr.final_defect <= 1e-12
    assert tr.distance <= correction_guarantee(tr.initial_defect) + 1e-8
    assert tr.distance <= 0.022


@settings(max_examples=30)
@given(seeds, groups, st.integers(2, 4), st.sampled_from([0.002, 0.01, 0.05]))
def test_quadratic_convergence_trace(seed, spec, d, eps):
    rng = np.random.default_rng(seed)
    pi = perturb(random_representation(build_group(spec), d, rng), eps, rng)
    tr = kazhdan_correct(pi)
    assert tr.converged
    defects = [a for a, _ in tr.iterations] + [tr.final_defect]
    for a, b in zip(defects, defects[1:]):
        assert b <= 11 * a ** 2 + 1e-12


def test_guarantee_range():
    assert correction_guarantee(0.01) == pytest.approx(0.022)
    assert correction_guarantee(0.1) is None


def test_singular_average_reports_element():
    G = cyclic(2)
    vals = np.array([[[1.0]], [[1j]]])
    # pi'(1) = (1j + conj(1j)) / 2 = 0
    with pytest.raises(SingularMatrixError) as exc:
        average_step(QuasiRep(G, vals))
    assert exc.value.where == 1


def test_free_domain_rejected():
    free = QuasiRep.free(1, 2, lambda w: np.eye(1))
    with pytest.raises(UsageError):
        kazhdan_correct(free)


# -- projections ----------------------------------------------------------------

def rotated_projection(rng, nu, rank, t):
    """A nu-invariant projection moved by a unitary at distance t from Id."""
    d = nu.dim
    # invariant subspace: sum of eigenspaces of a generic element of the commutant
    D = np.diag(rng.normal(size=d))
    A = sum(nu(g) @ D @ nu(g).conj().T for g in range(nu.domain.order))
    w, U = np.linalg.eigh(A)
    P0 = U[:, :rank] @ U[:, :rank].conj().T
    u = near_identity(d, t, rng)
    return P0, u @ P0 @ u.conj().T


def test_stabilize_trivial_cases():
    rng = np.random.default_rng(3)
    G = cyclic(3)
    P = np.diag([1, 1, 0, 0]).astype(complex)
    assert np.allclose(stabilize_projection(trivial_rep(G, 4), P, 0.1), P, atol=1e-12)
    nu = random_representation(G, 4, rng)
    P0, _ = rotated_projection(rng, nu, 2, 0.0)
    assert np.allclose(stabilize_projection(nu, P0, 0.1), P0, atol=1e-10)


def test_stabilize_rotated_z3():
    rng = np.random.default_rng(4)
    nu = random_representation(cyclic(3), 4, rng)
    _, P = rotated_projection(rng, nu, 2, 0.03)
    delta = projection_spread(nu, P)
    Q = stabilize_projection(nu, P, delta)
    assert norm(P - Q) <= 2 * delta + 1e-8
    for g in range(3):
        assert norm(nu(g) @ Q - Q @ nu(g)) <= 1e-8
    assert norm(Q @ Q - Q) <= 1e-9


@given(seeds, groups, st.integers(2, 6), st.floats(0.0, 0.08))
def test_stabilize_property(seed, spec, d, t):
    rng = np.random.default_rng(seed)
    nu = random_representation(build_group(spec), d, rng)
    rank = int(rng.integers(1, d))
    _, P = rotated_projection(rng, nu, rank, t)
    delta = projection_spread(nu, P)
    if delta >= 0.2:
        return
    Q = stabilize_projection(nu, P, delta)
    assert norm(P - Q) <= 2 * delta + 1e-8
    assert round(np.trace(Q).real) == rank


def test_stabilize_errors():
    G = cyclic(2)
    nu = QuasiRep(G, np.array([np.eye(2), np.array([[0, 1], [1, 0]])], dtype=complex))
    P = np.diag([1.0, 0.0]).astype(complex)
    with pytest.raises(UsageError):
        stabilize_projection(nu, P, 0.5)
    with pytest.raises(UsageError):
        stabilize_projection(nu, P, 0.2)  # spread is 1
    with pytest.raises(UsageError):
        stabilize_projection(nu, np.diag([1.0, 0.5]), 0.4)
    # spread exactly 1 is allowed for delta < 1/2 only if measured spread fits; the swap
    # makes the average Q0 = Id/2, an eigenvalue in the gap
    with pytest.raises((UsageError, SpectralGapError)):
        stabilize_projection(nu, P, 0.49)


# -- conjugating unitary -------------------------------------------------------------

def test_conjugating_identity():
    rho = random_representation(build_group("dihedral:4"), 3, np.random.default_rng(5))
    c = conjugating_unitary(rho, rho, 0.1)
    assert norm(c.u.matrix - np.eye(3)) <= 1e-12


def test_conjugating_example_d4():
    rng = np.random.default_rng(6)
    pi = random_representation(build_group("dihedral:4"), 4, rng)
    v = near_identity(4, 0.01, rng)
    omega = pi.conjugate(v.conj().T)
    eps = uniform_distance(pi, omega)
    c = conjugating_unitary(pi, omega, eps)
    U = c.u.matrix
    assert c.intertwining_error <= 1e-8
    assert uniform_distance(omega, pi.conjugate(U.conj().T)) <= 1e-8
    assert norm(U - np.eye(4)) <= 3 * 2 * eps + 1e-12


@given(seeds, groups, st.integers(1, 6), st.floats(0.0, 0.3))
def test_conjugating_property(seed, spec, d, t):
    rng = np.random.default_rng(seed)
    pi = random_representation(build_group(spec), d, rng)
    omega = pi.conjugate(near_identity(d, t, rng))
    eps = uniform_distance(pi, omega)
    if eps * math.sqrt(d) >= 0.99:
        return
    c = conjugating_unitary(pi, omega, eps)
    assert c.deviation <= 3 * math.sqrt(d) * eps + 1e-8


def test_conjugating_gate():
    G = cyclic(2)
    pi = QuasiRep(G, np.array([np.eye(4), np.eye(4)], dtype=complex))
    omega = QuasiRep(G, np.array([np.eye(4), np.diag([1, 1, 1, -1])], dtype=complex))
    assert uniform_distance(pi, omega) < 2 + 1e-12
    with pytest.raises(UsageError):
        conjugating_unitary(pi, omega, 0.6)
