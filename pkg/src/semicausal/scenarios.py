"""End-to-end scenarios behind ``semicausal demo``.

Each scenario returns a list of :class:`Row` records (quantity, value,
threshold, ok) so the CLI can print a table and tests can assert on it.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .choi import Superop, is_cp, is_tp, superop_to_choi
from .classical_semicausal import check_classical_semicausal, semilocalize
from .quantum_semicausal import (GklsForm, amplitude_damping_generator, check_semicausal_generator,
                                 extract_normal_form, reduced_generator, synthesize_semicausal,
                                 two_atom_example)
from .superchannel import (check_superchannel_generator, compose_channels, evolve_channel,
                           pre_post_processing_generator)
from .tensor_linalg import BipartiteSystem, dagger, expm


@dataclass(frozen=True)
class Row:
    quantity: str
    value: float
    threshold: float
    ok: bool


def _row(name: str, value: float, threshold: float, larger_is_ok: bool = False) -> Row:
    ok = value >= threshold if larger_is_ok else value <= threshold
    return Row(name, float(value), float(threshold), bool(ok))


def two_atom() -> list[Row]:
    """Atom A decays into B; B cannot talk back."""
    start = time.perf_counter()
    sys2 = BipartiteSystem(2, 2)
    gkls, L_s = two_atom_example()
    rows = []
    rep_s = check_semicausal_generator(L_s, sys2, "schrodinger")
    rep_h = check_semicausal_generator(gkls.heisenberg(), sys2, "heisenberg")
    rows.append(_row("schrodinger semicausal residual", rep_s.semicausal_residual, 1e-9))
    rows.append(_row("schrodinger trace-preservation residual", rep_s.trace_or_unital_residual, 1e-9))
    rows.append(_row("heisenberg semicausal residual", rep_h.semicausal_residual, 1e-9))
    rows.append(_row("-min eig of P_perp L P_perp", -rep_s.min_cond_cp_eig, 1e-9))
    nf, _ = extract_normal_form(gkls.heisenberg(), sys2)
    red = reduced_generator(nf, "schrodinger")
    rows.append(_row("reduced generator vs amplitude damping",
                     np.abs(red - amplitude_damping_generator()).max(), 1e-9))
    L2, _ = synthesize_semicausal(nf)
    rows.append(_row("extract->synthesize residual", np.linalg.norm(L2 - gkls.heisenberg()), 1e-7))
    for t in (0.1, 1.0, 5.0):
        St = expm(L_s, t)
        s = Superop(4, 4, superop_to_choi(St, 4, 4))
        _, min_eig = is_cp(s)
        _, tp = is_tp(s)
        sc = check_semicausal_generator(St, sys2, "schrodinger").semicausal_residual
        rows.append(_row(f"t={t}: -min Choi eig", -min_eig, 1e-8))
        rows.append(_row(f"t={t}: TP residual", tp, 1e-8))
        rows.append(_row(f"t={t}: semicausal residual", sc, 1e-8))
    rows.append(_row("runtime [s]", time.perf_counter() - start, 1.0))
    return rows


def _photon_generators() -> tuple[np.ndarray, np.ndarray]:
    """Qutrit photon (vacuum, H, V): absorption plus polarization flips in each gap."""
    vac_h = np.zeros((3, 3), dtype=complex)
    vac_h[0, 1] = 1.0
    vac_v = np.zeros((3, 3), dtype=complex)
    vac_v[0, 2] = 1.0
    flip_hv = np.zeros((3, 3), dtype=complex)
    flip_hv[1, 2] = flip_hv[2, 1] = 1.0

    def lindblad(jumps):
        K = 0.5 * sum(dagger(j) @ j for j in jumps)
        return GklsForm(3, tuple(jumps), K).schrodinger()

    L_A = lindblad([0.6 * vac_h, 0.3 * vac_v, 0.4 * flip_hv])
    L_B = lindblad([0.2 * vac_h, 0.5 * vac_v])
    return L_A, L_B


def _material_channel() -> np.ndarray:
    """Polarization-dependent transmission: H passes with 0.9, V with 0.4."""
    k0 = np.diag([1.0, np.sqrt(0.9), np.sqrt(0.4)]).astype(complex)
    k1 = np.zeros((3, 3), dtype=complex)
    k1[0, 1] = np.sqrt(0.1)
    k2 = np.zeros((3, 3), dtype=complex)
    k2[0, 2] = np.sqrt(0.6)
    omega = np.eye(3).reshape(-1)
    choi = np.zeros((9, 9), dtype=complex)
    for k in (k0, k1, k2):
        v = np.kron(np.eye(3), k) @ omega
        choi += np.outer(v, v.conj())
    return choi


def aging_board(times=(0.0, 0.5, 1.0, 2.0, 4.0)) -> list[Row]:
    """A material channel between a source and a detector while particles leak in."""
    L_A, L_B = _photon_generators()
    g = pre_post_processing_generator(L_A, L_B, 3, 3)
    rep = check_superchannel_generator(g)
    rows = [_row("superchannel generator semicausal residual", rep.semicausal_residual, 1e-9),
            _row("reduced unitality residual", rep.trace_or_unital_residual, 1e-9),
            _row("-min eig of P_perp L P_perp", -rep.min_cond_cp_eig, 1e-9)]
    T0 = _material_channel()
    h_in = np.diag([0.0, 1.0, 0.0]).astype(complex)
    for t, choi in zip(times, evolve_channel(g, T0, times)):
        s = Superop(3, 3, choi)
        _, min_eig = is_cp(s)
        _, tp = is_tp(s)
        oracle = compose_channels(T0, expm(L_A, t), expm(L_B, t), 3, 3)
        rows.append(_row(f"t={t}: -min Choi eig", -min_eig, 1e-8))
        rows.append(_row(f"t={t}: TP residual", tp, 1e-8))
        rows.append(_row(f"t={t}: deviation from composed closed form", np.abs(choi - oracle).max(), 1e-8))
        detected = 1.0 - s(h_in)[0, 0].real
        rows.append(_row(f"t={t}: H-photon detection probability", detected, 0.0, larger_is_ok=True))
    return rows


def classical_copy(seed: int = 3) -> list[Row]:
    """Alice samples her output, copies input and output to Bob, Bob finishes the job."""
    rng = np.random.default_rng(seed)
    rows = []
    dims = BipartiteSystem(2, 2)
    # B flips its bit exactly when A's input is 1, A resets to 0 with probability 0.3
    NA = np.array([[1.0, 0.3], [0.0, 0.7]])
    n = np.zeros((2, 2, 2, 2))
    cnot = {0: np.eye(2), 1: np.array([[0.0, 1.0], [1.0, 0.0]])}
    for j in range(2):
        for k in range(2):
            n[j, :, k, :] = NA[j, k] * cnot[k]
    cases = [("controlled flip", n.reshape(4, 4), dims)]
    dims3 = BipartiteSystem(3, 2)
    NA3 = rng.random((3, 3))
    NA3[1, :] = 0.0
    n3 = np.zeros((3, 2, 3, 2))
    for j in range(3):
        for k in range(3):
            m = rng.random((2, 2))
            n3[j, :, k, :] = NA3[j, k] * m / m.sum(axis=1, keepdims=True)
    cases.append(("random map with a zero row in N^A", n3.reshape(6, 6), dims3))
    for label, nmat, d in cases:
        ok, _, res = check_classical_semicausal(nmat, d, "row")
        A, U, dE = semilocalize(nmat, d)
        recon = np.kron(A, np.eye(d.d_B)) @ np.kron(np.eye(d.d_A), U)
        rows.append(_row(f"{label}: semicausal residual", res, 1e-12))
        rows.append(_row(f"{label}: reconstruction error", np.abs(recon - nmat).max(), 1e-9))
        rows.append(_row(f"{label}: U row-sum deviation", np.abs(U.sum(axis=1) - 1).max(), 1e-9))
        rows.append(_row(f"{label}: min entry of A", A.min(), 0.0, larger_is_ok=True))
    return rows


SCENARIOS = {"two-atom": two_atom, "aging-board": aging_board, "classical-copy": classical_copy}
