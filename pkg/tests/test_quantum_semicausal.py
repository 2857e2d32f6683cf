import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from semicausal.choi import (Superop, dual_superop, is_cp, is_tp, left_mult, right_mult,
                             sandwich, superop_from_function, superop_kron, superop_to_choi, unvec, vec)
from semicausal.errors import CheckFailed, DimensionMismatch, InvariantViolation
from semicausal.quantum_semicausal import (LOWERING, GklsForm, SemicausalNormalForm,
                                           amplitude_damping_generator,
                                           check_semicausal_generator, extract_normal_form,
                                           random_lindblad_generator, random_semicausal_nf,
                                           reduced_generator, stinespring_isometry,
                                           synthesize_semicausal, two_atom_example,
                                           zero_normal_form)
from semicausal.tensor_linalg import (BipartiteSystem, dagger, flip, ginibre, partial_trace,
                                      random_density_matrix, random_hermitian)

dims_st = st.sampled_from([(2, 2), (2, 3), (3, 2), (1, 2), (2, 1)])
env_st = st.sampled_from([1, 2, 4])


def _signals_b_to_a(L_heis, dA, dB, t, rng):
    """Brute force: largest deviation of exp(tL)(X_A (x) 1) from a product with 1_B."""
    d = dA * dB
    prop = scipy.linalg.expm(t * L_heis)
    worst = 0.0
    for _ in range(3):
        xa = ginibre(dA, dA, rng)
        out = unvec(prop @ vec(np.kron(xa, np.eye(dB))), d, d)
        reduced = partial_trace(out, BipartiteSystem(dA, dB), "B") / dB
        worst = max(worst, np.abs(out - np.kron(reduced, np.eye(dB))).max())
    return worst


def _nf_direct_generator(nf):
    """Heisenberg generator written out from its formula with explicit Kraus sums.

    L(X) = V^dagger (X (x) 1_E) V - K^dagger X - X K with
    V = (1_A (x) U)(A (x) 1_B) + 1_A (x) B and K = K_A (x) 1 + 1 (x) (B^dagger B / 2 + i H_B)
    plus the cross term, summed index by index over E.
    """
    dA, dB, dE = nf.d_A, nf.d_B, nf.d_E
    iA, iB = np.eye(dA), np.eye(dB)
    # A (x) 1_B maps A (x) B -> A (x) E (x) B, then U takes E (x) B -> B (x) E
    a_leg = np.kron(nf.A, iB)
    V = np.kron(iA, nf.U) @ a_leg + np.kron(iA, nf.B)
    K = (np.kron(nf.K_A, iB) + np.kron(iA, 0.5 * dagger(nf.B) @ nf.B + 1j * nf.H_B)
         + np.kron(iA, dagger(nf.B)) @ np.kron(iA, nf.U) @ a_leg)
    d = dA * dB

    def f(x):
        out = -dagger(K) @ x - x @ K
        for e in range(dE):
            ke = V.reshape(d, dE, d)[:, e, :]
            out = out + dagger(ke) @ x @ ke
        return out

    return superop_from_function(f, d, d)


# -- synthesis ----------------------------------------------------------------

@given(dims_st, env_st, st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_synthesis_matches_direct_formula(dims, dE, seed):
    nf = random_semicausal_nf(*dims, dE, seed)
    L, gkls = synthesize_semicausal(nf)
    assert np.allclose(L, _nf_direct_generator(nf), atol=1e-12)
    assert np.allclose(dual_superop(L), gkls.schrodinger(), atol=1e-12)


@given(dims_st, env_st, st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_synthesized_generator_passes_and_semigroup_is_semicausal(dims, dE, seed):
    dA, dB = dims
    nf = random_semicausal_nf(dA, dB, dE, seed)
    L, _ = synthesize_semicausal(nf)
    sys2 = BipartiteSystem(dA, dB)
    assert check_semicausal_generator(L, sys2).passed
    assert check_semicausal_generator(dual_superop(L), sys2, "schrodinger").passed
    rng = np.random.default_rng(seed)
    assert _signals_b_to_a(L, dA, dB, 0.7, rng) < 1e-9
    d = dA * dB
    choi = superop_to_choi(dual_superop(scipy.linalg.expm(0.7 * L)), d, d)
    assert is_cp(Superop(d, d, choi))[0]


def test_reduced_generator_is_restriction():
    nf = random_semicausal_nf(2, 3, 2, 11)
    L, _ = synthesize_semicausal(nf)
    red = reduced_generator(nf)
    xa = ginibre(2, 2, np.random.default_rng(0))
    out = unvec(L @ vec(np.kron(xa, np.eye(3))), 6, 6)
    assert np.allclose(out, np.kron(unvec(red @ vec(xa), 2, 2), np.eye(3)))


def test_stinespring_isometry_shape():
    nf = random_semicausal_nf(2, 3, 4, 1)
    assert stinespring_isometry(nf).shape == (2 * 3 * 4, 6)


def test_normal_form_validation():
    nf = random_semicausal_nf(2, 2, 2, 0)
    with pytest.raises(InvariantViolation):
        SemicausalNormalForm(2, 2, 2, 2 * nf.U, nf.A, nf.B, nf.K_A, nf.H_B).validate()
    with pytest.raises(InvariantViolation):
        SemicausalNormalForm(2, 2, 2, nf.U, nf.A, nf.B, nf.K_A, nf.H_B + np.eye(2)).validate()
    with pytest.raises(DimensionMismatch):
        SemicausalNormalForm(2, 2, 2, nf.U[:2, :2], nf.A, nf.B, nf.K_A, nf.H_B)


# -- checker ------------------------------------------------------------------

def test_two_atom_example_reduces_to_amplitude_damping():
    gkls, L_s = two_atom_example()
    sys2 = BipartiteSystem(2, 2)
    # published jump operators and the anticommutator term as written out in the example
    le, la, one = LOWERING, dagger(LOWERING), np.diag([0.0, 1.0])
    L1 = np.kron(le, la) + np.kron(np.eye(2), le)
    L2 = np.kron(le, one)
    K = 0.5 * (np.kron(np.eye(2), dagger(le) @ le) + np.kron(dagger(le) @ le, np.eye(2)))
    assert np.allclose(K, 0.5 * (dagger(L1) @ L1 + dagger(L2) @ L2))
    oracle = superop_from_function(
        lambda r: L1 @ r @ dagger(L1) + L2 @ r @ dagger(L2) - K @ r - r @ K, 4, 4)
    assert np.allclose(L_s, oracle)
    rep = check_semicausal_generator(L_s, sys2, "schrodinger")
    assert rep.passed and rep.verdicts["trace_preserving"]
    nf, _ = extract_normal_form(gkls.heisenberg(), sys2)
    assert np.abs(reduced_generator(nf, "schrodinger") - amplitude_damping_generator()).max() < 1e-9


def test_swap_hamiltonian_signals():
    F = flip(2, 2)
    L = 1j * (left_mult(F) - right_mult(F))
    rep = check_semicausal_generator(L, BipartiteSystem(2, 2))
    assert not rep.passed
    assert rep.verdicts["cond_cp"] and rep.verdicts["hermitian"]
    assert rep.semicausal_residual >= 0.5


def test_transpose_map_is_not_conditionally_cp():
    d = 4
    L = superop_from_function(lambda x: x.T, d, d)
    rep = check_semicausal_generator(L, BipartiteSystem(2, 2))
    assert not rep.verdicts["cond_cp"]
    assert rep.min_cond_cp_eig <= -0.9


def test_local_b_dissipator_is_semicausal_but_not_reverse():
    rng = np.random.default_rng(3)
    Lb = random_lindblad_generator(2, rng)                       # Schrodinger, on B only
    L = superop_kron(np.eye(4), Lb, (2, 2), (2, 2))
    assert check_semicausal_generator(L, BipartiteSystem(2, 2), "schrodinger").passed
    # interacting Hamiltonians signal both ways through phase kickback, local ones do not
    cz = np.diag([1, 1, 1, -1]).astype(complex)
    cx = np.kron(np.diag([0, 1]), np.array([[0, 1], [1, 0]]))
    rng2 = np.random.default_rng(4)
    local = np.kron(random_hermitian(2, rng2), np.eye(2)) + np.kron(np.eye(2), random_hermitian(2, rng2))
    for ham, expect in ((cz, False), (cx, False), (local, True)):
        Lh = 1j * (left_mult(ham) - right_mult(ham))
        assert check_semicausal_generator(Lh, BipartiteSystem(2, 2)).passed == expect


def test_tolerance_scaling_and_override():
    nf = random_semicausal_nf(2, 2, 2, 5)
    L, _ = synthesize_semicausal(nf)
    noise = 1e-6 * ginibre(16, 16, np.random.default_rng(0))
    sys2 = BipartiteSystem(2, 2)
    assert not check_semicausal_generator(L + noise, sys2).passed
    assert check_semicausal_generator(L + noise, sys2, rel_tol=1e-4).passed
    rep = check_semicausal_generator(L, sys2, tol=0.123)
    assert rep.tolerances["abs_tol"] == 0.123


def test_checker_rejects_bad_shape():
    with pytest.raises(DimensionMismatch):
        check_semicausal_generator(np.zeros((9, 9)), BipartiteSystem(2, 2))


# -- duality ------------------------------------------------------------------

@given(dims_st, env_st, st.integers(0, 10**6), st.booleans())
@settings(max_examples=25, deadline=None)
def test_pictures_agree_and_reduced_related_by_transpose_flip(dims, dE, seed, break_it):
    dA, dB = dims
    L, _ = synthesize_semicausal(random_semicausal_nf(dA, dB, dE, seed))
    if break_it:
        h = random_hermitian(dA * dB, np.random.default_rng(seed))
        L = L + 1j * (left_mult(h) - right_mult(h))
    sys2 = BipartiteSystem(dA, dB)
    rh = check_semicausal_generator(L, sys2, "heisenberg")
    rs = check_semicausal_generator(dual_superop(L), sys2, "schrodinger")
    assert rh.passed == rs.passed
    assert rh.semicausal_residual == pytest.approx(rs.semicausal_residual, abs=1e-9)
    F = flip(dA, dA)
    assert np.allclose(rs.reduced_choi, F @ rh.reduced_choi.T @ F, atol=1e-9)


# -- extraction ---------------------------------------------------------------

@given(dims_st, env_st, st.integers(0, 10**6))
@settings(max_examples=30, deadline=None)
def test_extract_synthesize_round_trip(dims, dE, seed):
    dA, dB = dims
    L, _ = synthesize_semicausal(random_semicausal_nf(dA, dB, dE, seed))
    nf, trace = extract_normal_form(L, BipartiteSystem(dA, dB))
    nf.validate()
    assert nf.d_E <= (dA * dB) ** 2
    L2, _ = synthesize_semicausal(nf)
    assert np.linalg.norm(L2 - L) <= 1e-7 * max(1.0, np.linalg.norm(L))
    assert trace.lstsq_residual < 1e-6 * (1 + np.linalg.norm(L))


def test_extract_zero_generator_gives_zero_nf():
    nf, _ = extract_normal_form(np.zeros((16, 16)), BipartiteSystem(2, 2))
    L2, _ = synthesize_semicausal(nf)
    assert np.abs(L2).max() < 1e-12
    assert np.abs(nf.A).max() < 1e-12 and np.abs(nf.K_A).max() < 1e-12


def test_extract_rejects_signalling_generator():
    F = flip(2, 2)
    with pytest.raises(CheckFailed) as info:
        extract_normal_form(1j * (left_mult(F) - right_mult(F)), BipartiteSystem(2, 2))
    assert info.value.report.semicausal_residual > 0.5


def test_extract_from_local_generators():
    rng = np.random.default_rng(7)
    la = random_lindblad_generator(2, rng, picture="heisenberg")
    lb = random_lindblad_generator(3, rng, picture="heisenberg")
    L = superop_kron(la, np.eye(9), (2, 2), (3, 3)) + superop_kron(np.eye(4), lb, (2, 2), (3, 3))
    nf, _ = extract_normal_form(L, BipartiteSystem(2, 3))
    assert np.allclose(reduced_generator(nf), la, atol=1e-9)
    assert np.allclose(synthesize_semicausal(nf)[0], L, atol=1e-9)


# -- invariants ---------------------------------------------------------------

@pytest.mark.parametrize("seed", range(5))
def test_a_zero_k_zero_leaves_alice_observables_fixed(seed):
    nf = random_semicausal_nf(2, 3, 2, seed)
    nf = SemicausalNormalForm(2, 3, 2, nf.U, np.zeros_like(nf.A), nf.B,
                              np.zeros_like(nf.K_A), nf.H_B)
    L, _ = synthesize_semicausal(nf)
    prop = scipy.linalg.expm(L)
    xa = ginibre(2, 2, np.random.default_rng(seed))
    x = np.kron(xa, np.eye(3))
    assert np.allclose(unvec(prop @ vec(x), 6, 6), x, atol=1e-10)


def test_zero_normal_form_and_gkls_trace_preservation():
    assert np.abs(synthesize_semicausal(zero_normal_form(2, 2))[0]).max() == 0
    L = random_lindblad_generator(3, np.random.default_rng(0))
    rho = random_density_matrix(3, np.random.default_rng(1))
    assert abs(np.trace(unvec(L @ vec(rho), 3, 3))) < 1e-12
    s = Superop(3, 3, superop_to_choi(scipy.linalg.expm(L), 3, 3))
    assert is_cp(s)[0] and is_tp(s)[0]
    g = GklsForm(2, (LOWERING,), np.zeros((2, 2)))
    assert np.allclose(g.heisenberg(), dual_superop(g.schrodinger()))
    assert np.allclose(sandwich(LOWERING), g.schrodinger())
