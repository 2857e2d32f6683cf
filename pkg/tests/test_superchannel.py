import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from semicausal.choi import (Superop, choi_to_superop, is_cp, is_tp, superop_from_function,
                             superop_kron, superop_to_choi, unvec, vec)
from semicausal.errors import CheckFailed, InvariantViolation
from semicausal.quantum_semicausal import random_lindblad_generator, synthesize_semicausal
from semicausal.superchannel import (PRESELECTING, SUPERCHANNEL, SuperchannelNormalForm,
                                     SupermapGen, TranslationTerm, check_superchannel_generator,
                                     compose_channels, dissipative_part, evolve_channel,
                                     extract_superchannel_nf, hamiltonian_part,
                                     pre_post_processing_generator, random_channel_choi,
                                     random_superchannel_nf, sandwich_supermap,
                                     semicausal_term_superop, synthesize_superchannel_generator,
                                     to_semicausal_nf, translate_semicausal_to_supermap)
from semicausal.tensor_linalg import dagger, ginibre, partial_trace_legs

flavor_st = st.sampled_from([PRESELECTING, SUPERCHANNEL])
dims_st = st.sampled_from([(2, 2), (1, 2), (2, 1), (2, 3)])


def _supermap_by_action(V_L, W_L, W_R, V_R, dA, dB, dC, dE):
    """Evaluate T -> [rho -> tr_E V_L (T (x) id_C)(W_L rho W_R^dag) V_R^dag] literally."""
    n = dA * dB

    def on_choi(c_T):
        s_T = choi_to_superop(c_T, dA, dB)
        s_TC = superop_kron(s_T, np.eye(dC * dC), (dA, dB), (dC, dC))

        def channel(rho):
            y = unvec(s_TC @ vec(W_L @ rho @ dagger(W_R)), dB * dC, dB * dC)
            return partial_trace_legs(V_L @ y @ dagger(V_R), [dB, dE], [1])

        return superop_to_choi(superop_from_function(channel, dA, dB), dA, dB)

    return superop_from_function(on_choi, n, n)


@given(dims_st, st.integers(1, 2), st.integers(1, 2), st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_sandwich_supermap_matches_literal_action(dims, dC, dE, seed):
    dA, dB = dims
    rng = np.random.default_rng(seed)
    V_L, V_R = ginibre(dB * dE, dB * dC, rng), ginibre(dB * dE, dB * dC, rng)
    W_L, W_R = ginibre(dA * dC, dA, rng), ginibre(dA * dC, dA, rng)
    fast = sandwich_supermap(V_L, W_L, W_R, V_R, dA, dB, dC, dE)
    slow = _supermap_by_action(V_L, W_L, W_R, V_R, dA, dB, dC, dE)
    assert np.allclose(fast, slow, atol=1e-12)


@given(dims_st, st.integers(1, 2), st.integers(1, 2), st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_translation_matches_semicausal_term(dims, dC, dE, seed):
    dA, dB = dims
    rng = np.random.default_rng(seed)
    term = TranslationTerm(ginibre(dA * dC, dA, rng), ginibre(dA * dC, dA, rng),
                           ginibre(dB * dE, dC * dB, rng), ginibre(dB * dE, dC * dB, rng), dC, dE)
    assert np.allclose(translate_semicausal_to_supermap(term), semicausal_term_superop(term),
                       atol=1e-12)


@given(dims_st, st.integers(1, 3), flavor_st, st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_two_synthesis_routes_agree(dims, dE, flavor, seed):
    nf = random_superchannel_nf(*dims, dE, seed, flavor)
    g = synthesize_superchannel_generator(nf, flavor)
    L_s, _ = synthesize_semicausal(to_semicausal_nf(nf), "schrodinger")
    assert np.allclose(g.L_hat, L_s, atol=1e-12)


@given(st.integers(1, 3), st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_dissipative_hamiltonian_split(dE, seed):
    nf = random_superchannel_nf(2, 2, dE, seed, SUPERCHANNEL)
    g = synthesize_superchannel_generator(nf, SUPERCHANNEL)
    assert np.allclose(dissipative_part(nf) + hamiltonian_part(nf), g.L_hat, atol=1e-12)
    # the Hamiltonian part alone generates reversible dynamics: anti-Hermitian
    h = hamiltonian_part(nf)
    assert np.allclose(h, -dagger(h), atol=1e-12)


@given(dims_st, st.integers(1, 3), flavor_st, st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_checker_verdicts_by_flavor(dims, dE, flavor, seed):
    nf = random_superchannel_nf(*dims, dE, seed, flavor)
    rep = check_superchannel_generator(synthesize_superchannel_generator(nf, flavor))
    assert rep.verdicts["preselecting"]
    if flavor == SUPERCHANNEL:
        assert rep.verdicts["superchannel"] and rep.passed


def test_preselecting_but_not_superchannel_fails_superchannel_only():
    nf = random_superchannel_nf(2, 2, 2, 3, PRESELECTING)
    assert nf.trace_condition_residual() > 0.1
    rep = check_superchannel_generator(synthesize_superchannel_generator(nf, PRESELECTING))
    assert rep.verdicts["preselecting"] and not rep.verdicts["superchannel"]
    assert not rep.verdicts["reduced_unital"]
    with pytest.raises(InvariantViolation):
        synthesize_superchannel_generator(nf, SUPERCHANNEL)


@pytest.mark.parametrize("seed", range(6))
def test_superchannel_semigroup_maps_channels_to_channels(seed):
    nf = random_superchannel_nf(2, 2, 2, seed, SUPERCHANNEL)
    g = synthesize_superchannel_generator(nf, SUPERCHANNEL)
    rng = np.random.default_rng(seed)
    for _ in range(3):
        c0 = random_channel_choi(2, 2, rng)
        for c in evolve_channel(g, c0, [0.3, 1.0, 2.0]):
            s = Superop(2, 2, c)
            assert is_cp(s, 1e-8)[0] and is_tp(s, 1e-8)[0]


def test_preselecting_semigroup_keeps_complete_positivity():
    nf = random_superchannel_nf(2, 2, 2, 9, PRESELECTING)
    g = synthesize_superchannel_generator(nf, PRESELECTING)
    c0 = random_channel_choi(2, 2, np.random.default_rng(0))
    tp = []
    for c in evolve_channel(g, c0, [0.5, 1.5]):
        assert is_cp(Superop(2, 2, c), 1e-8)[0]
        tp.append(is_tp(Superop(2, 2, c), 1e-8)[1])
    assert max(tp) > 1e-3


@given(dims_st, st.integers(1, 3), flavor_st, st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_extract_round_trip(dims, dE, flavor, seed):
    nf = random_superchannel_nf(*dims, dE, seed, flavor)
    g = synthesize_superchannel_generator(nf, flavor)
    nf2 = extract_superchannel_nf(g)
    g2 = synthesize_superchannel_generator(nf2, flavor)
    assert np.linalg.norm(g2.L_hat - g.L_hat) <= 1e-7 * max(1.0, np.linalg.norm(g.L_hat))
    if flavor == SUPERCHANNEL:
        assert nf2.trace_condition_residual() < 1e-7


def test_extract_rejects_non_preselecting():
    rng = np.random.default_rng(0)
    h = ginibre(16, 16, rng)
    bad = SupermapGen(2, 2, h)
    with pytest.raises(CheckFailed):
        extract_superchannel_nf(bad)


@pytest.mark.parametrize("seed", range(4))
def test_pre_post_processing_closed_form(seed):
    rng = np.random.default_rng(seed)
    L_A = random_lindblad_generator(2, rng)
    L_B = random_lindblad_generator(3, rng)
    g = pre_post_processing_generator(L_A, L_B, 2, 3, gamma_A=0.7, gamma_B=1.3)
    assert check_superchannel_generator(g).passed
    c0 = random_channel_choi(2, 3, rng)
    for t, c in zip([0.5, 1.0], evolve_channel(g, c0, [0.5, 1.0])):
        pre, post = scipy.linalg.expm(0.7 * t * L_A), scipy.linalg.expm(1.3 * t * L_B)
        s0 = choi_to_superop(c0, 2, 3)
        oracle = superop_to_choi(post @ s0 @ pre, 2, 3)
        assert np.allclose(c, oracle, atol=1e-10)
        assert np.allclose(c, compose_channels(c0, pre, post, 2, 3), atol=1e-10)


def test_pre_processing_with_non_tp_generator_is_not_semicausal():
    rng = np.random.default_rng(1)
    L_A = ginibre(4, 4, rng)
    g = pre_post_processing_generator(L_A, np.zeros((4, 4)), 2, 2)
    assert not check_superchannel_generator(g).passed


def test_evolve_at_zero_echoes_and_zero_generator_is_constant():
    c0 = random_channel_choi(2, 2, np.random.default_rng(2))
    g = synthesize_superchannel_generator(random_superchannel_nf(2, 2, 2, 0), SUPERCHANNEL)
    assert np.allclose(evolve_channel(g, c0, [0.0])[0], c0)
    z = SupermapGen(2, 2, np.zeros((16, 16)))
    assert all(np.allclose(c, c0) for c in evolve_channel(z, c0, [0.5, 3.0]))


def test_normal_form_dimension_checks():
    nf = random_superchannel_nf(2, 2, 2, 0)
    with pytest.raises(Exception):
        SuperchannelNormalForm(2, 2, 2, 5, nf.U, nf.A, nf.B, nf.K_A, nf.H_B)
    with pytest.raises(InvariantViolation):
        SuperchannelNormalForm(2, 2, 2, 0, 3 * nf.U, nf.A, nf.B, nf.K_A, nf.H_B).validate()


def test_sigma_index_choice():
    nf = random_superchannel_nf(2, 2, 3, 4, SUPERCHANNEL)
    nf1 = SuperchannelNormalForm(2, 2, 3, 1, nf.U, nf.A, nf.B, nf.K_A, nf.H_B)
    # K_A was fitted to sigma = |0><0|; a different sigma breaks the trace condition
    assert nf1.trace_condition_residual() > 1e-3
    K1 = 0.5 * nf1.traced_AdagA() + 1j * nf.H_A
    nf1 = SuperchannelNormalForm(2, 2, 3, 1, nf.U, nf.A, nf.B, K1, nf.H_B)
    assert check_superchannel_generator(synthesize_superchannel_generator(nf1, SUPERCHANNEL)).passed
