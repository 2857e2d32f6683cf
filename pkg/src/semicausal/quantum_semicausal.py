"""Generators of semigroups of semicausal completely positive maps.

A bipartite map on ``B(H_A (x) H_B)`` is B-does-not-signal-to-A (semicausal)
when its action on ``X_A (x) 1_B`` (Heisenberg) or its reduction ``tr_B``
(Schroedinger) only involves system A.  This module decides that property for
GKLS generators from their Choi matrix, builds every such generator from the
normal form ``(U, A, B, K_A, H_B)`` and recovers a normal form from a valid
generator.

Superoperators follow the row-major vectorization of :mod:`semicausal.choi`.
The environment leg always comes last: ``V : H_A (x) H_B -> H_A (x) H_B (x) H_E``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .choi import CheckReport, cond_cp_check, omega_vector, superop_to_choi
from .errors import CheckFailed, DimensionMismatch, InvariantViolation, LstsqResidualTooLarge
from .tensor_linalg import (BipartiteSystem, as_cmat, dagger, extend_isometry_to_unitary,
                            flip, ginibre, haar_unitary, herm_eig, lstsq_solve,
                            partial_trace_legs, psd_sqrt, random_hermitian, tolerance)

HEISENBERG = "heisenberg"
SCHRODINGER = "schrodinger"


def _picture(picture: str) -> str:
    p = picture.lower().replace("ö", "o").replace("oe", "o")
    if p not in (HEISENBERG, SCHRODINGER):
        raise ValueError(f"picture must be 'heisenberg' or 'schrodinger', got {picture!r}")
    return p


@dataclass(frozen=True)
class GklsForm:
    """``L(X) = sum_j L_j^dagger X L_j - K^dagger X - X K`` (Heisenberg).

    The same data gives the Schroedinger generator
    ``L(rho) = sum_j L_j rho L_j^dagger - K rho - rho K^dagger``.
    """

    dim: int
    kraus: tuple = field(repr=False)
    K: np.ndarray = field(repr=False)

    def __post_init__(self):
        kraus = tuple(as_cmat(k, self.dim, self.dim) for k in self.kraus)
        object.__setattr__(self, "kraus", kraus)
        object.__setattr__(self, "K", as_cmat(self.K, self.dim, self.dim))

    def heisenberg(self) -> np.ndarray:
        ident = np.eye(self.dim)
        s = -np.kron(dagger(self.K), ident) - np.kron(ident, self.K.T)
        for k in self.kraus:
            s = s + np.kron(dagger(k), k.T)
        return s

    def schrodinger(self) -> np.ndarray:
        ident = np.eye(self.dim)
        s = -np.kron(self.K, ident) - np.kron(ident, self.K.conj())
        for k in self.kraus:
            s = s + np.kron(k, k.conj())
        return s

    def superop(self, picture: str = HEISENBERG) -> np.ndarray:
        return self.heisenberg() if _picture(picture) == HEISENBERG else self.schrodinger()


@dataclass(frozen=True)
class SemicausalNormalForm:
    """Normal form data of a semicausal generator.

    Shapes: ``U`` is ``(d_B d_E) x (d_E d_B)`` mapping ``E (x) B -> B (x) E``,
    ``A`` is ``(d_A d_E) x d_A``, ``B`` is ``(d_B d_E) x d_B``.
    """

    d_A: int
    d_B: int
    d_E: int
    U: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    K_A: np.ndarray = field(repr=False)
    H_B: np.ndarray = field(repr=False)

    def __post_init__(self):
        dA, dB, dE = self.d_A, self.d_B, self.d_E
        for name, shape in (("U", (dB * dE, dE * dB)), ("A", (dA * dE, dA)),
                            ("B", (dB * dE, dB)), ("K_A", (dA, dA)), ("H_B", (dB, dB))):
            try:
                object.__setattr__(self, name, as_cmat(getattr(self, name), *shape))
            except DimensionMismatch as exc:
                raise DimensionMismatch(f"{name}: {exc}") from None

    @property
    def system(self) -> BipartiteSystem:
        return BipartiteSystem(self.d_A, self.d_B)

    def validate(self, tol: float = 1e-9) -> None:
        n = self.U.shape[0]
        if np.linalg.norm(dagger(self.U) @ self.U - np.eye(n)) > tol * max(1.0, np.sqrt(n)):
            raise InvariantViolation("U is not unitary")
        if np.linalg.norm(self.H_B - dagger(self.H_B)) > tol * (1 + np.linalg.norm(self.H_B)):
            raise InvariantViolation("H_B is not Hermitian")
        if abs(np.trace(self.H_B)) > tol * (1 + np.linalg.norm(self.H_B)):
            raise InvariantViolation("H_B is not traceless")


@dataclass(frozen=True)
class ExtractionTrace:
    """Intermediate quantities of the extraction, in the order they are computed."""

    tau: np.ndarray
    V: np.ndarray
    B: np.ndarray
    V_sc: np.ndarray
    tau_sc: np.ndarray
    tau_sc_A: np.ndarray
    A_raw: np.ndarray
    U_raw: np.ndarray
    K: np.ndarray
    K_sc: np.ndarray
    beta_index: int = 0
    xi_index: int = 0
    lstsq_residual: float = 0.0
    dilation_rank: int = 0


# -- synthesis ----------------------------------------------------------------

def stinespring_isometry(nf: SemicausalNormalForm) -> np.ndarray:
    """``V = (1_A (x) U)(A (x) 1_B) + 1_A (x) B``."""
    iA, iB = np.eye(nf.d_A), np.eye(nf.d_B)
    return np.kron(iA, nf.U) @ np.kron(nf.A, iB) + np.kron(iA, nf.B)


def damping_operator(nf: SemicausalNormalForm) -> np.ndarray:
    """The operator ``K`` paired with :func:`stinespring_isometry`."""
    iA, iB = np.eye(nf.d_A), np.eye(nf.d_B)
    return (np.kron(iA, dagger(nf.B) @ nf.U) @ np.kron(nf.A, iB)
            + 0.5 * np.kron(iA, dagger(nf.B) @ nf.B)
            + np.kron(nf.K_A, iB)
            + 1j * np.kron(iA, nf.H_B))


def kraus_from_stinespring(V: np.ndarray, d: int, d_E: int) -> list[np.ndarray]:
    """Jump operators ``(1 (x) <e_j|) V`` of a dilation with the environment last."""
    v3 = as_cmat(V, d * d_E, d).reshape(d, d_E, d)
    return [v3[:, j, :].copy() for j in range(d_E)]


def stinespring_superop(V: np.ndarray, d: int, d_E: int) -> np.ndarray:
    """Heisenberg superoperator of ``X -> V^dagger (X (x) 1_E) V``."""
    v3 = as_cmat(V, d * d_E, d).reshape(d, d_E, d)
    t = np.einsum("xey,zew->ywxz", v3.conj(), v3)
    return t.reshape(d * d, d * d)


def stinespring_choi(V: np.ndarray, d: int, d_E: int) -> np.ndarray:
    """Choi matrix of ``X -> V^dagger (X (x) 1_E) V`` (legs input (x) output)."""
    v3 = as_cmat(V, d * d_E, d).reshape(d, d_E, d)
    return np.einsum("xey,zew->xyzw", v3.conj(), v3).reshape(d * d, d * d)


def synthesize_semicausal(nf: SemicausalNormalForm,
                          picture: str = HEISENBERG) -> tuple[np.ndarray, GklsForm]:
    """Generator in the requested picture together with its GKLS data."""
    nf.validate()
    d = nf.d_A * nf.d_B
    V = stinespring_isometry(nf)
    gkls = GklsForm(d, tuple(kraus_from_stinespring(V, d, nf.d_E)), damping_operator(nf))
    return gkls.superop(picture), gkls


def reduced_generator(nf: SemicausalNormalForm, picture: str = HEISENBERG) -> np.ndarray:
    """Generator of the reduced dynamics on A: ``A^dagger (X (x) 1) A - K_A^dagger X - X K_A``."""
    kraus = kraus_from_stinespring(nf.A, nf.d_A, nf.d_E)
    return GklsForm(nf.d_A, tuple(kraus), nf.K_A).superop(picture)


# -- checking -----------------------------------------------------------------

def check_semicausal_generator(L: np.ndarray, sys: BipartiteSystem,
                               picture: str = HEISENBERG, tol: float | None = None,
                               rel_tol: float | None = None) -> CheckReport:
    """Decide whether ``L`` generates a semigroup of semicausal CP maps.

    ``tol`` is an absolute slack; by default it is ``rel_tol * (1 + ||choi||_F)``.
    The reduced Choi matrix ``L^A`` is the normalized partial trace of the
    factorization candidate, so the semicausality residual is the distance of
    the data to the nearest factorized operator.
    """
    picture = _picture(picture)
    dA, dB = sys.d_A, sys.d_B
    d = sys.dim
    L = as_cmat(L, d * d, d * d)
    C = superop_to_choi(L, d, d)
    tol = tolerance(C, rel_tol) if tol is None else tol
    _, min_eig, herm_res = cond_cp_check(C, d, tol)
    legs = [dA, dB, dA, dB]
    iB = np.eye(dB)
    if picture == HEISENBERG:
        t = partial_trace_legs(C, legs, [1])                      # legs A1 A2 B2
        reduced = partial_trace_legs(t, [dA, dA, dB], [2]) / dB
        sc_res = float(np.linalg.norm(t - np.kron(reduced, iB)))
        trace_res = float(np.linalg.norm(partial_trace_legs(reduced, [dA, dA], [0])))
        trace_name = "unital"
    else:
        t = partial_trace_legs(C, legs, [3])                      # legs A1 B1 A2
        f = np.kron(flip(dA, dB), np.eye(dA))
        flipped = f @ t @ dagger(f)                               # legs B1 A1 A2
        reduced = partial_trace_legs(t, [dA, dB, dA], [1]) / dB
        sc_res = float(np.linalg.norm(flipped - np.kron(iB, reduced)))
        trace_res = float(np.linalg.norm(partial_trace_legs(reduced, [dA, dA], [1])))
        trace_name = "trace_preserving"
    verdicts = {
        "hermitian": herm_res <= tol,
        "cond_cp": min_eig >= -tol,
        "semicausal": sc_res <= tol,
        trace_name: trace_res <= tol,
    }
    return CheckReport(herm_res, min_eig, sc_res, trace_res, reduced, verdicts,
                       {"abs_tol": tol, "picture": picture})


# -- extraction ---------------------------------------------------------------

def _polar_unitary(u: np.ndarray) -> np.ndarray:
    w, _, vh = np.linalg.svd(u)
    return w @ vh


def extract_normal_form(L: np.ndarray, sys: BipartiteSystem, tol: float | None = None,
                        beta_index: int = 0,
                        rank_rel: float = 1e-10) -> tuple[SemicausalNormalForm, ExtractionTrace]:
    """Recover ``(U, A, B, K_A, H_B)`` from a Heisenberg semicausal generator.

    The environment is ``E = A1 (x) B1 (x) A2 (x) B2`` so ``d_E = (d_A d_B)^2``.
    Raises :class:`CheckFailed` when ``L`` does not pass the checker.
    """
    dA, dB = sys.d_A, sys.d_B
    d = sys.dim
    dE = d * d
    L = as_cmat(L, dE, dE)
    report = check_semicausal_generator(L, sys, HEISENBERG, tol)
    if not report.passed:
        raise CheckFailed("generator is not semicausal and conditionally CP", report)
    C = 0.5 * (superop_to_choi(L, d, d) + dagger(superop_to_choi(L, d, d)))
    c_norm = float(np.linalg.norm(C))
    iA, iB = np.eye(dA), np.eye(dB)

    omega = omega_vector(d)
    P = np.outer(omega, omega.conj()) / d
    P_perp = np.eye(dE) - P

    # CP part and a dilation with environment E = A1 B1 A2 B2
    tau = P_perp @ C @ P_perp
    tau = 0.5 * (tau + dagger(tau))
    root = psd_sqrt(tau, tol=report.tolerances["abs_tol"] + tolerance(tau))
    V = root.reshape(dE, d, d).transpose(1, 0, 2).reshape(d * dE, d)

    # split off the part acting on B alone
    B = np.einsum("arab->rb", V.reshape(dA, dB * dE, dA, dB)) / dA
    V_sc = V - np.kron(iA, B)

    # reduced CP map on A, read off with a fixed product vector on B
    tau_sc = stinespring_choi(V_sc, d, dE)
    t = partial_trace_legs(tau_sc, [dA, dB, dA, dB], [1])
    t = t.reshape(dA, dA, dB, dA, dA, dB)[:, :, beta_index, :, :, beta_index]
    tau_sc_A = 0.5 * (t.reshape(dA * dA, dA * dA) + dagger(t.reshape(dA * dA, dA * dA)))

    # minimal dilation of the reduced map on the range of its Choi matrix
    w, vecs = herm_eig(tau_sc_A)
    floor = max(rank_rel * max(w.max(initial=0.0), 0.0), 1e-13 * (1.0 + c_norm))
    keep = w > floor
    dF = int(keep.sum())
    W_F = vecs[:, keep]
    R = np.sqrt(w[keep])[:, None] * dagger(W_F)                  # F x (A1 A2)
    A_raw = R.reshape(dF, dA, dA).transpose(1, 0, 2).reshape(dA * dF, dA)

    # solve (1_A (x) U)(A (x) 1_B) = V_sc for U : F (x) B -> B (x) E
    coeff = A_raw.reshape(dA, dF, dA).transpose(0, 2, 1).reshape(dA * dA, dF)
    rhs = V_sc.reshape(dA, dB * dE, dA, dB).transpose(0, 2, 1, 3).reshape(dA * dA, dB * dE * dB)
    sol, residual = lstsq_solve(coeff, rhs)
    gate = 1e-7 * float(np.linalg.norm(V_sc)) + 1e-12 * (1.0 + c_norm)
    if residual > gate:
        raise LstsqResidualTooLarge(f"residual {residual:.3e} exceeds {gate:.3e}")
    U_raw = sol.reshape(dF, dB * dE, dB).transpose(1, 0, 2).reshape(dB * dE, dF * dB)

    # damping operator and its split into A-local and B-local parts
    K = -partial_trace_legs(P @ C @ P_perp + 0.5 * np.trace(P @ C) * P, [d, d], [0])
    K_sc = K - np.kron(iA, dagger(B)) @ V_sc - 0.5 * np.kron(iA, dagger(B) @ B)
    K_A = partial_trace_legs(K_sc, [dA, dB], [1]) / dB
    H_B = (-1j / dA) * partial_trace_legs(K_sc - np.kron(K_A, iB), [dA, dB], [0])
    H_B = 0.5 * (H_B + dagger(H_B))
    shift = np.trace(H_B).real / dB
    H_B = H_B - shift * iB
    K_A = K_A + 1j * shift * iA

    # embed F into E through A1 (x) |beta> (x) A2 (x) |beta> and complete U
    J_beta = np.zeros((dE, dA * dA), dtype=complex)
    for a1 in range(dA):
        for a2 in range(dA):
            J_beta[((a1 * dB + beta_index) * dA + a2) * dB + beta_index, a1 * dA + a2] = 1.0
    J = J_beta @ W_F
    A = np.kron(iA, J) @ A_raw
    U_hat = U_raw @ np.kron(dagger(J), iB)
    U = _polar_unitary(extend_isometry_to_unitary(U_hat))

    nf = SemicausalNormalForm(dA, dB, dE, U, A, B, K_A, H_B)
    trace = ExtractionTrace(tau, V, B, V_sc, tau_sc, tau_sc_A, A_raw, U_raw, K, K_sc,
                            beta_index=beta_index, lstsq_residual=residual, dilation_rank=dF)
    return nf, trace


# -- fixtures -----------------------------------------------------------------

def zero_normal_form(d_A: int, d_B: int, d_E: int = 1) -> SemicausalNormalForm:
    z = np.zeros
    return SemicausalNormalForm(d_A, d_B, d_E, np.eye(d_B * d_E), z((d_A * d_E, d_A)),
                                z((d_B * d_E, d_B)), z((d_A, d_A)), z((d_B, d_B)))


def random_semicausal_nf(d_A: int, d_B: int, d_E: int, seed: int,
                         scale: float = 0.5) -> SemicausalNormalForm:
    """Random normal form: Haar ``U``, Gaussian ``A``, ``B``, ``K_A``, traceless ``H_B``."""
    rng = np.random.default_rng(seed)
    U = haar_unitary(d_B * d_E, rng)
    A = ginibre(d_A * d_E, d_A, rng, scale)
    B = ginibre(d_B * d_E, d_B, rng, scale)
    K_A = ginibre(d_A, d_A, rng, scale)
    H_B = random_hermitian(d_B, rng, scale, traceless=True)
    return SemicausalNormalForm(d_A, d_B, d_E, U, A, B, K_A, H_B)


LOWERING = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)


def amplitude_damping_generator(picture: str = SCHRODINGER) -> np.ndarray:
    """``rho -> L_e rho L_e^dagger - {L_e^dagger L_e, rho}/2`` with ``L_e = |0><1|``."""
    k = 0.5 * dagger(LOWERING) @ LOWERING
    return GklsForm(2, (LOWERING,), k).superop(picture)


def two_atom_example() -> tuple[GklsForm, np.ndarray]:
    """Atom A radiating into a second atom B, which only absorbs from A.

    Jump operators ``L_1 = L_e (x) L_a + 1 (x) L_e`` and ``L_2 = L_e (x) |1><1|``
    with ``L_e = |0><1|`` and ``L_a = L_e^dagger``.  Returns the GKLS data and
    the trace-preserving Schroedinger generator.
    """
    le = LOWERING
    la = dagger(le)
    one = np.diag([0.0, 1.0]).astype(complex)
    l1 = np.kron(le, la) + np.kron(np.eye(2), le)
    l2 = np.kron(le, one)
    K = 0.5 * (dagger(l1) @ l1 + dagger(l2) @ l2)
    gkls = GklsForm(4, (l1, l2), K)
    return gkls, gkls.schrodinger()


def random_lindblad_generator(d: int, rng: np.random.Generator, n_jumps: int = 2,
                              scale: float = 0.5, picture: str = SCHRODINGER) -> np.ndarray:
    """Trace-preserving GKLS generator with Gaussian jump operators and Hamiltonian."""
    jumps = tuple(ginibre(d, d, rng, scale) for _ in range(n_jumps))
    H = random_hermitian(d, rng, scale)
    K = 0.5 * sum(dagger(j) @ j for j in jumps) + 1j * H
    return GklsForm(d, jumps, K).superop(picture)
