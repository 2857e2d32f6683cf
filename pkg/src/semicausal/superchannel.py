"""Generators of semigroups of quantum superchannels.

A channel ``T : B(H_A) -> B(H_B)`` is carried as its Choi matrix ``tau`` of
side ``d_A d_B``; a supermap generator ``L_hat`` is the matrix acting on the
row-major vectorization of ``tau``.  In this representation the conjugation
``C o L_hat o C^{-1}`` is the same matrix read as a superoperator on
``B(H_A (x) H_B)``, which is what the semicausal checker consumes in the
Schroedinger picture.

Normal form (``sigma = |xi><xi|`` on an environment E, ``xi`` a basis vector)::

    L_hat(T)(rho) = Phi_hat(T)(rho) - kappa_L(T)(rho) - kappa_R(T)(rho)

with ``A`` on ``A (x) E``, ``U`` unitary and ``B`` on ``B (x) E`` and
``K_A``, ``H_B`` as in :mod:`semicausal.quantum_semicausal`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .choi import CheckReport, choi_to_superop, superop_kron, superop_to_choi
from .errors import DimensionMismatch, InvariantViolation
from .quantum_semicausal import (SCHRODINGER, SemicausalNormalForm,
                                 check_semicausal_generator, extract_normal_form)
from .tensor_linalg import (BipartiteSystem, as_cmat, dagger, expm, flip, ginibre,
                            haar_unitary, ket, partial_trace_legs, partial_transpose,
                            random_hermitian)

PRESELECTING = "preselecting"
SUPERCHANNEL = "superchannel"


def _flavor(flavor: str) -> str:
    f = flavor.lower()
    if f not in (PRESELECTING, SUPERCHANNEL):
        raise ValueError(f"flavor must be 'preselecting' or 'superchannel', got {flavor!r}")
    return f


@dataclass(frozen=True)
class SupermapGen:
    d_A: int
    d_B: int
    L_hat: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = (self.d_A * self.d_B) ** 2
        object.__setattr__(self, "L_hat", as_cmat(self.L_hat, n, n))

    @property
    def system(self) -> BipartiteSystem:
        return BipartiteSystem(self.d_A, self.d_B)


@dataclass(frozen=True)
class SuperchannelNormalForm:
    """``U`` and ``B`` act on ``B (x) E``, ``A`` on ``A (x) E``; ``sigma = |e_sigma_index><.|``."""

    d_A: int
    d_B: int
    d_E: int
    sigma_index: int
    U: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    K_A: np.ndarray = field(repr=False)
    H_B: np.ndarray = field(repr=False)

    def __post_init__(self):
        dA, dB, dE = self.d_A, self.d_B, self.d_E
        if not 0 <= self.sigma_index < dE:
            raise DimensionMismatch("sigma_index outside the environment")
        for name, shape in (("U", (dB * dE, dB * dE)), ("A", (dA * dE, dA * dE)),
                            ("B", (dB * dE, dB * dE)), ("K_A", (dA, dA)), ("H_B", (dB, dB))):
            try:
                object.__setattr__(self, name, as_cmat(getattr(self, name), *shape))
            except DimensionMismatch as exc:
                raise DimensionMismatch(f"{name}: {exc}") from None

    @property
    def xi(self) -> np.ndarray:
        return ket(self.sigma_index, self.d_E)

    @property
    def H_A(self) -> np.ndarray:
        return (self.K_A - dagger(self.K_A)) / 2j

    def traced_AdagA(self) -> np.ndarray:
        """``tr_sigma[A^dagger A] = (1 (x) <xi|) A^dagger A (1 (x) |xi>)``."""
        xi_A = np.kron(np.eye(self.d_A), self.xi)
        return dagger(xi_A) @ dagger(self.A) @ self.A @ xi_A

    def trace_condition_residual(self) -> float:
        return float(np.linalg.norm(self.traced_AdagA() - self.K_A - dagger(self.K_A)))

    def validate(self, flavor: str = PRESELECTING, tol: float = 1e-9) -> None:
        n = self.U.shape[0]
        if np.linalg.norm(dagger(self.U) @ self.U - np.eye(n)) > tol * max(1.0, np.sqrt(n)):
            raise InvariantViolation("U is not unitary")
        if np.linalg.norm(self.H_B - dagger(self.H_B)) > tol * (1 + np.linalg.norm(self.H_B)):
            raise InvariantViolation("H_B is not Hermitian")
        if _flavor(flavor) == SUPERCHANNEL:
            res = self.trace_condition_residual()
            if res > tol * (1 + np.linalg.norm(self.K_A)):
                raise InvariantViolation(f"trace condition violated, residual {res:.3e}")


@dataclass(frozen=True)
class TranslationTerm:
    """One sandwich term ``X -> tr_E[(1 (x) L_B)(L_A (x) 1) X (R_A^dagger (x) 1)(1 (x) R_B^dagger)]``.

    ``L_A, R_A : A -> A (x) C`` and ``L_B, R_B : C (x) B -> B (x) E``.
    """

    L_A: np.ndarray
    R_A: np.ndarray
    L_B: np.ndarray
    R_B: np.ndarray
    d_C: int
    d_E: int

    def dims(self) -> tuple[int, int]:
        d_A = self.L_A.shape[1]
        d_B = self.L_B.shape[0] // self.d_E
        for m, shape in ((self.L_A, (d_A * self.d_C, d_A)), (self.R_A, (d_A * self.d_C, d_A)),
                         (self.L_B, (d_B * self.d_E, self.d_C * d_B)),
                         (self.R_B, (d_B * self.d_E, self.d_C * d_B))):
            as_cmat(m, *shape)
        return d_A, d_B


# -- supermap terms -----------------------------------------------------------

def sandwich_supermap(V_L: np.ndarray, W_L: np.ndarray, W_R: np.ndarray, V_R: np.ndarray,
                      d_A: int, d_B: int, d_C: int, d_E: int) -> np.ndarray:
    """Matrix of ``T -> [rho -> tr_E[V_L (T (x) id_C)(W_L rho W_R^dagger) V_R^dagger]]``.

    ``W : A -> A (x) C`` and ``V : B (x) C -> B (x) E``; acts on Choi vectors.
    """
    vl = as_cmat(V_L, d_B * d_E, d_B * d_C).reshape(d_B, d_E, d_B, d_C)
    vr = as_cmat(V_R, d_B * d_E, d_B * d_C).reshape(d_B, d_E, d_B, d_C).conj()
    wl = as_cmat(W_L, d_A * d_C, d_A).reshape(d_A, d_C, d_A)
    wr = as_cmat(W_R, d_A * d_C, d_A).reshape(d_A, d_C, d_A).conj()
    t = np.einsum("xebc,aci,pdj,yeqd->ixjyabpq", vl, wl, wr, vr, optimize=True)
    n = d_A * d_B
    return t.reshape(n * n, n * n)


def translate_semicausal_to_supermap(term: TranslationTerm) -> np.ndarray:
    """Supermap matrix of a semicausal sandwich term via the partial-transpose translation.

    ``W_L = L_A^{T_A}``, ``W_R = R_A^{T_A}``, ``V_L = L_B F_{B;C}``, ``V_R = R_B F_{B;C}``.
    """
    d_A, d_B = term.dims()
    sys_a = BipartiteSystem(d_A, 1)
    W_L = partial_transpose(term.L_A, sys_a, "A", d_out=term.d_C)
    W_R = partial_transpose(term.R_A, sys_a, "A", d_out=term.d_C)
    F = flip(d_B, term.d_C)
    return sandwich_supermap(term.L_B @ F, W_L, W_R, term.R_B @ F, d_A, d_B, term.d_C, term.d_E)


def semicausal_term_superop(term: TranslationTerm) -> np.ndarray:
    """Schroedinger superoperator of the term on ``B(H_A (x) H_B)`` (direct evaluation)."""
    d_A, d_B = term.dims()
    iA, iB = np.eye(d_A), np.eye(d_B)
    d = d_A * d_B
    ml = (np.kron(iA, term.L_B) @ np.kron(term.L_A, iB)).reshape(d, term.d_E, d)
    mr = (np.kron(iA, term.R_B) @ np.kron(term.R_A, iB)).reshape(d, term.d_E, d)
    return np.einsum("xeu,yev->xyuv", ml, mr.conj()).reshape(d * d, d * d)


# -- synthesis ----------------------------------------------------------------

def _pieces(nf: SuperchannelNormalForm):
    dA, dB, dE = nf.d_A, nf.d_B, nf.d_E
    xi_A = np.kron(np.eye(dA), nf.xi)                  # A -> A (x) E
    A_xi = nf.A @ xi_A
    I_BE = np.eye(dB * dE)
    H_BE = np.kron(nf.H_B, np.eye(dE))

    def term(V_L, W_L, W_R, V_R):
        return sandwich_supermap(V_L, W_L, W_R, V_R, dA, dB, dE, dE)

    U, B = nf.U, nf.B
    phi = (term(U, A_xi, A_xi, U) + term(B, xi_A, A_xi, U)
           + term(U, A_xi, xi_A, B) + term(B, xi_A, xi_A, B))
    kappa_L = (term(dagger(B) @ U, A_xi, xi_A, I_BE)
               + term(0.5 * dagger(B) @ B, xi_A, xi_A, I_BE)
               + term(I_BE, np.kron(nf.K_A, np.eye(dE)) @ xi_A, xi_A, I_BE)
               + term(1j * H_BE, xi_A, xi_A, I_BE))
    kappa_R = (term(I_BE, xi_A, A_xi, dagger(B) @ U)
               + term(I_BE, xi_A, xi_A, 0.5 * dagger(B) @ B)
               + term(I_BE, xi_A, np.kron(nf.K_A, np.eye(dE)) @ xi_A, I_BE)
               + term(I_BE, xi_A, xi_A, 1j * H_BE))
    return phi, kappa_L, kappa_R


def hamiltonian_part(nf: SuperchannelNormalForm) -> np.ndarray:
    """``H_hat(T)(rho) = -i[H_B, T(rho)] - i T([H_A, rho])`` on Choi vectors."""
    dA, dB = nf.d_A, nf.d_B
    iA2, iB2 = np.eye(dA * dA), np.eye(dB * dB)
    h_b = -1j * (np.kron(nf.H_B, np.eye(dB)) - np.kron(np.eye(dB), nf.H_B.T))
    h_a = -1j * (np.kron(nf.H_A, np.eye(dA)) - np.kron(np.eye(dA), nf.H_A.T))
    # post-composition acts on the output leg, pre-composition through the transpose
    return superop_kron(iA2, h_b, (dA, dA), (dB, dB)) + superop_kron(h_a.T, iB2, (dA, dA), (dB, dB))


def dissipative_part(nf: SuperchannelNormalForm) -> np.ndarray:
    """The dissipative part, assembled term by term from ``U``, ``A`` and ``B``."""
    dA, dB, dE = nf.d_A, nf.d_B, nf.d_E
    xi_A = np.kron(np.eye(dA), nf.xi)
    A_xi = nf.A @ xi_A
    I_BE = np.eye(dB * dE)
    U, B = nf.U, nf.B

    def term(V_L, W_L, W_R, V_R):
        return sandwich_supermap(V_L, W_L, W_R, V_R, dA, dB, dE, dE)

    AdA = dagger(nf.A) @ nf.A
    BdB = dagger(B) @ B
    out = term(U, A_xi, A_xi, U)                        # U (T(x)id)(A(rho(x)sigma)A^dag) U^dag
    out = out - 0.5 * (term(I_BE, AdA @ xi_A, xi_A, I_BE) + term(I_BE, xi_A, AdA @ xi_A, I_BE))
    out = out + term(B, xi_A, xi_A, B)
    out = out - 0.5 * (term(BdB, xi_A, xi_A, I_BE) + term(I_BE, xi_A, xi_A, BdB))
    # [U (T(x)id)(A(rho(x)sigma)), B^dag] and its adjoint
    out = out + term(U, A_xi, xi_A, B) - term(dagger(B) @ U, A_xi, xi_A, I_BE)
    out = out + term(B, xi_A, A_xi, U) - term(I_BE, xi_A, A_xi, dagger(B) @ U)
    return out


def synthesize_superchannel_generator(nf: SuperchannelNormalForm,
                                      flavor: str = PRESELECTING) -> SupermapGen:
    """Assemble ``L_hat = Phi_hat - kappa_L - kappa_R`` on Choi-vectorized channels.

    For the superchannel flavor the split into dissipative and Hamiltonian
    parts is recomputed and compared against the assembled generator.
    """
    flavor = _flavor(flavor)
    nf.validate(flavor)
    phi, kl, kr = _pieces(nf)
    L_hat = phi - kl - kr
    if flavor == SUPERCHANNEL:
        split = dissipative_part(nf) + hamiltonian_part(nf)
        if np.linalg.norm(split - L_hat) > 1e-10 * (1 + np.linalg.norm(L_hat)):
            raise InvariantViolation("dissipative/Hamiltonian split does not reproduce the generator")
    return SupermapGen(nf.d_A, nf.d_B, L_hat)


def to_semicausal_nf(nf: SuperchannelNormalForm) -> SemicausalNormalForm:
    """Normal form of the conjugated (Schroedinger) semicausal generator.

    Inverse of the translation ``U = U~ F_{B;E}``, ``B = B~ (1 (x) <xi|)``,
    ``A = A~^{T_A} (1 (x) <xi|)``, ``K_A = K~_A^T``.
    """
    dA, dB, dE = nf.d_A, nf.d_B, nf.d_E
    U_t = nf.U @ flip(dE, dB)
    B_t = nf.B @ np.kron(np.eye(dB), nf.xi)
    A_t = partial_transpose(nf.A @ np.kron(np.eye(dA), nf.xi), BipartiteSystem(dA, 1), "A", d_out=dE)
    H = 0.5 * (nf.H_B + dagger(nf.H_B))
    shift = np.trace(H).real / dB
    K_t = nf.K_A.T + 1j * shift * np.eye(dA)
    return SemicausalNormalForm(dA, dB, dE, U_t, A_t, B_t, K_t, H - shift * np.eye(dB))


# -- checking and extraction --------------------------------------------------

def check_superchannel_generator(g: SupermapGen, tol: float | None = None,
                                 rel_tol: float | None = None) -> CheckReport:
    """Preselecting verdict (cond-CP and factorization) plus the unital-reduction criterion.

    ``report.passed`` is the superchannel verdict; ``report.verdicts["preselecting"]``
    uses the first two criteria only.
    """
    base = check_semicausal_generator(g.L_hat, g.system, SCHRODINGER, tol, rel_tol)
    reduced = base.reduced_choi
    unital_res = float(np.linalg.norm(partial_trace_legs(reduced, [g.d_A, g.d_A], [0])))
    abs_tol = base.tolerances["abs_tol"]
    verdicts = {
        "hermitian": base.verdicts["hermitian"],
        "cond_cp": base.verdicts["cond_cp"],
        "semicausal": base.verdicts["semicausal"],
        "reduced_unital": unital_res <= abs_tol,
    }
    verdicts["preselecting"] = verdicts["hermitian"] and verdicts["cond_cp"] and verdicts["semicausal"]
    verdicts["superchannel"] = verdicts["preselecting"] and verdicts["reduced_unital"]
    return CheckReport(base.herm_residual, base.min_cond_cp_eig, base.semicausal_residual,
                       unital_res, reduced, verdicts, {"abs_tol": abs_tol},
                       required=("hermitian", "cond_cp", "semicausal", "reduced_unital"))


def extract_superchannel_nf(g: SupermapGen, tol: float | None = None) -> SuperchannelNormalForm:
    """Normal form of a preselecting generator; the superchannel trace condition holds when it passes.

    The semicausal extraction consumes the Heisenberg generator, which is the
    Hilbert-Schmidt adjoint of ``L_hat`` read as a superoperator.
    """
    dA, dB = g.d_A, g.d_B
    semi, _ = extract_normal_form(dagger(g.L_hat), g.system, tol)
    dE = semi.d_E
    xi = ket(0, dE)
    A = partial_transpose(semi.A, BipartiteSystem(dA, 1), "A", d_out=dE) @ np.kron(np.eye(dA), dagger(xi))
    B = semi.B @ np.kron(np.eye(dB), dagger(xi))
    U = semi.U @ flip(dB, dE)
    return SuperchannelNormalForm(dA, dB, dE, 0, U, A, B, semi.K_A.T, semi.H_B)


def evolve_channel(g: SupermapGen, T0_choi: np.ndarray, times) -> list[np.ndarray]:
    """Choi matrices of ``exp(t L_hat)(T0)`` at each requested time."""
    n = g.d_A * g.d_B
    v0 = as_cmat(T0_choi, n, n).reshape(-1)
    return [(expm(g.L_hat, float(t)) @ v0).reshape(n, n) for t in times]


# -- model generators ---------------------------------------------------------

def pre_post_processing_generator(L_A: np.ndarray, L_B: np.ndarray, d_A: int, d_B: int,
                                  gamma_A: float = 1.0, gamma_B: float = 1.0) -> SupermapGen:
    """``T -> gamma_B L_B o T + gamma_A T o L_A`` for Schroedinger generators ``L_A``, ``L_B``."""
    post = superop_kron(np.eye(d_A * d_A), L_B, (d_A, d_A), (d_B, d_B))
    pre = superop_kron(as_cmat(L_A, d_A * d_A, d_A * d_A).T, np.eye(d_B * d_B), (d_A, d_A), (d_B, d_B))
    return SupermapGen(d_A, d_B, gamma_B * post + gamma_A * pre)


def compose_channels(choi_T: np.ndarray, pre: np.ndarray, post: np.ndarray,
                     d_A: int, d_B: int) -> np.ndarray:
    """Choi matrix of ``post o T o pre`` for superoperator matrices ``pre``, ``post``."""
    s = choi_to_superop(choi_T, d_A, d_B)
    return superop_to_choi(post @ s @ pre, d_A, d_B)


def random_superchannel_nf(d_A: int, d_B: int, d_E: int, seed: int,
                           flavor: str = SUPERCHANNEL, scale: float = 0.5) -> SuperchannelNormalForm:
    """Random normal form; the superchannel flavor fixes ``K_A`` from the trace condition."""
    rng = np.random.default_rng(seed)
    U = haar_unitary(d_B * d_E, rng)
    A = ginibre(d_A * d_E, d_A * d_E, rng, scale)
    B = ginibre(d_B * d_E, d_B * d_E, rng, scale)
    H_B = random_hermitian(d_B, rng, scale, traceless=True)
    H_A = random_hermitian(d_A, rng, scale)
    nf = SuperchannelNormalForm(d_A, d_B, d_E, 0, U, A, B, np.zeros((d_A, d_A)), H_B)
    if _flavor(flavor) == SUPERCHANNEL:
        K_A = 0.5 * nf.traced_AdagA() + 1j * H_A
    else:
        K_A = ginibre(d_A, d_A, rng, scale)
    return SuperchannelNormalForm(d_A, d_B, d_E, 0, U, A, B, K_A, H_B)


def random_channel_choi(d_in: int, d_out: int, rng: np.random.Generator,
                        n_kraus: int | None = None) -> np.ndarray:
    """Choi matrix of a random channel built from a normalized Kraus set."""
    n_kraus = d_in * d_out if n_kraus is None else n_kraus
    g = ginibre(n_kraus * d_out, d_in, rng)
    w, v = np.linalg.eigh(dagger(g) @ g)
    iso = g @ (v / np.sqrt(w)) @ dagger(v)                        # stacked Kraus, iso^dag iso = 1
    kraus = iso.reshape(n_kraus, d_out, d_in)
    omega = np.eye(d_in).reshape(-1)
    c = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for k in kraus:
        col = np.kron(np.eye(d_in), k) @ omega
        c += np.outer(col, col.conj())
    return c
