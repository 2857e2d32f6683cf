import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from semicausal.classical_semicausal import (COL, ROW, ClassicalGenNF, StochMat,
                                             check_classical_generator,
                                             check_classical_semicausal,
                                             check_classical_superchannel_generator,
                                             classical_superchannel_conditions,
                                             decompose_classical_generator, random_classical_nf,
                                             random_semicausal_nonneg, semilocalize,
                                             superchannel_generator_classical,
                                             synthesize_classical_generator)
from semicausal.choi import classical_choi_vec
from semicausal.errors import CheckFailed, InvariantViolation
from semicausal.tensor_linalg import BipartiteSystem

dims_st = st.sampled_from([(2, 2), (2, 3), (3, 2), (3, 3)])
picture_st = st.sampled_from([ROW, COL])


def _signals(m, dA, dB, picture):
    """Brute force over point masses: does B's input change A's output marginal (row picture)?"""
    m4 = m.reshape(dA, dB, dA, dB)
    if picture == COL:
        m4 = m.T.reshape(dA, dB, dA, dB)
    marg = m4.sum(axis=3)                                        # [a_in, b_in, a_out]
    return np.abs(marg - marg[:, :1, :]).max()


@given(dims_st, st.integers(1, 3), picture_st, st.integers(0, 10**6))
@settings(max_examples=30, deadline=None)
def test_synthesize_check_decompose_round_trip(dims, dE, picture, seed):
    d = BipartiteSystem(*dims)
    nf = random_classical_nf(*dims, dE, seed, picture)
    q = synthesize_classical_generator(nf, d)
    assert check_classical_generator(q, d, picture).passed
    nf2 = decompose_classical_generator(q, d, picture)
    nf2.validate()
    assert np.abs(synthesize_classical_generator(nf2, d) - q).max() < 1e-10


@given(dims_st, st.integers(1, 3), st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_semigroup_is_nonnegative_and_semicausal(dims, dE, seed):
    dA, dB = dims
    nf = random_classical_nf(dA, dB, dE, seed, ROW)
    q = synthesize_classical_generator(nf, BipartiteSystem(dA, dB))
    for t in (0.3, 2.0):
        m = scipy.linalg.expm(t * q)
        assert m.min() > -1e-12
        assert _signals(m, dA, dB, ROW) < 1e-10


def test_row_picture_formula_by_hand():
    # d_A = d_B = 2, d_E = 1: Q = (A (x) 1)(1 (x) U) - K_A (x) 1 + sum |i><i| (x) B_i
    A = np.array([[0.2, 0.5], [0.1, 0.3]])
    U = np.array([[0.6, 0.4], [0.1, 0.9]])
    K = np.array([0.4, -0.2])
    Bs = (np.array([[-1.0, 1.0], [0.0, 0.0]]), np.array([[0.0, 0.0], [2.0, -2.0]]))
    nf = ClassicalGenNF(1, U, A, K, Bs, ROW)
    q = synthesize_classical_generator(nf, BipartiteSystem(2, 2))
    expect = np.zeros((4, 4))
    for a in range(2):
        for b in range(2):
            for a2 in range(2):
                for b2 in range(2):
                    v = A[a, a2] * U[b, b2]
                    if a == a2:
                        v += Bs[a][b, b2] - (K[a] if b == b2 else 0.0)
                    expect[a * 2 + b, a2 * 2 + b2] = v
    assert np.allclose(q, expect)


def test_signalling_generator_is_rejected():
    # A's bit flips at a rate that depends on B's state
    q = np.zeros((4, 4))
    q[1 * 2 + 1, 0 * 2 + 1] = 1.0                                # |a=1,b=1> -> |a=0,b=1>
    q[3, 3] = -1.0
    d = BipartiteSystem(2, 2)
    rep = check_classical_generator(q, d, ROW)
    assert not rep.passed and rep.semicausal_residual >= 0.5
    with pytest.raises(CheckFailed):
        decompose_classical_generator(q, d)


def test_negative_off_diagonal_rejected():
    q = np.diag([0.0, 0.0, 0.0, 0.0])
    q[0, 2] = -0.5
    rep = check_classical_generator(q, BipartiteSystem(2, 2))
    assert not rep.verdicts["offdiag_nonneg"]


@given(dims_st, st.integers(0, 3), st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_semilocalize_reconstructs(dims, zero_rows, seed):
    d = BipartiteSystem(*dims)
    n = random_semicausal_nonneg(d, np.random.default_rng(seed), zero_rows=min(zero_rows, dims[0]))
    assert check_classical_semicausal(n, d)[0]
    A, U, dE = semilocalize(n, d)
    assert dE == dims[0] ** 2
    assert A.min() >= 0 and U.min() >= 0
    assert np.allclose(U.sum(axis=1), 1.0)
    recon = np.kron(A, np.eye(dims[1])) @ np.kron(np.eye(dims[0]), U)
    assert np.abs(recon - n).max() < 1e-9


def test_semilocalize_all_zero_map():
    d = BipartiteSystem(2, 2)
    A, U, _ = semilocalize(np.zeros((4, 4)), d)
    assert np.abs(np.kron(A, np.eye(2)) @ np.kron(np.eye(2), U)).max() == 0
    assert np.allclose(U.sum(axis=1), 1.0)


@given(dims_st, st.integers(1, 3), st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_superchannel_generator_is_choi_conjugate_of_column_generator(dims, dE, seed):
    d = BipartiteSystem(*dims)
    nf = random_classical_nf(*dims, dE, seed, COL)
    q_hat, S = superchannel_generator_classical(nf, d)
    m = np.random.default_rng(seed).random((dims[1], dims[0]))
    # S acts on the Choi vector exactly as Q_hat acts on vec(M)
    lhs = S @ classical_choi_vec(m)
    rhs_m = (q_hat @ m.reshape(-1)).reshape(dims[1], dims[0])
    assert np.allclose(lhs, classical_choi_vec(rhs_m))
    # S is a Schroedinger-picture semicausal generator assembled from the translated data
    rep = check_classical_generator(S, d, COL)
    assert rep.passed
    assert check_classical_superchannel_generator(q_hat, d).verdicts["preselecting"]


@given(dims_st, st.integers(1, 3), st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_superchannel_flavor_preserves_column_stochastic_maps(dims, dE, seed):
    dA, dB = dims
    d = BipartiteSystem(dA, dB)
    nf = random_classical_nf(dA, dB, dE, seed, COL, superchannel=True)
    assert classical_superchannel_conditions(nf, d) < 1e-12
    q_hat, _ = superchannel_generator_classical(nf, d, "superchannel")
    rep = check_classical_superchannel_generator(q_hat, d)
    assert rep.passed and rep.verdicts["reduced_unital"]
    rng = np.random.default_rng(seed)
    m = rng.random((dB, dA))
    m /= m.sum(axis=0)
    for t in (0.5, 2.0):
        mt = (scipy.linalg.expm(t * q_hat) @ m.reshape(-1)).reshape(dB, dA)
        assert mt.min() > -1e-10
        assert np.allclose(mt.sum(axis=0), 1.0, atol=1e-8)


def test_preselecting_only_classical_supermap():
    d = BipartiteSystem(2, 2)
    nf = random_classical_nf(2, 2, 2, 5, COL)
    assert classical_superchannel_conditions(nf, d) > 1e-3
    q_hat, _ = superchannel_generator_classical(nf, d, "preselecting")
    rep = check_classical_superchannel_generator(q_hat, d)
    assert rep.verdicts["preselecting"] and not rep.verdicts["reduced_unital"]
    with pytest.raises(InvariantViolation):
        superchannel_generator_classical(nf, d, "superchannel")
    with pytest.raises(InvariantViolation):
        superchannel_generator_classical(random_classical_nf(2, 2, 2, 5, ROW), d)


def test_stochmat_validation():
    StochMat(np.array([[0.5, 0.5], [1.0, 0.0]]), "row_stochastic")
    StochMat(np.array([[0.5, 0.5], [0.5, 0.5]]), "col_stochastic")
    with pytest.raises(InvariantViolation):
        StochMat(np.array([[0.5, 0.6], [1.0, 0.0]]), "row_stochastic")
    with pytest.raises(InvariantViolation):
        StochMat(np.array([[1.5, -0.5], [1.0, 0.0]]), "row_stochastic")
    with pytest.raises(ValueError):
        StochMat(np.eye(2), "doubly")


def test_normal_form_validation():
    nf = random_classical_nf(2, 2, 2, 0, ROW)
    bad_u = nf.U.copy()
    bad_u[0, 0] += 0.5
    with pytest.raises(InvariantViolation):
        ClassicalGenNF(2, bad_u, nf.A, nf.K_A, nf.B_list, ROW).validate()
    with pytest.raises(InvariantViolation):
        ClassicalGenNF(2, nf.U, -nf.A, nf.K_A, nf.B_list, ROW).validate()
