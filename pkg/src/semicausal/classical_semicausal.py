"""Classical (stochastic-matrix) counterparts: semicausality, semilocalization,
generator normal forms and generators of classical superchannels.

Alphabets are index sets ``0..n-1``; a map on ``R^A (x) R^B`` is a real
matrix indexed A-major, ``(a, b) -> a * d_B + b``.  Row picture means maps
acting on functions (rows of a stochastic semigroup sum to one), column
picture means maps acting on probability vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CheckFailed, DimensionMismatch, InvariantViolation, NotNonnegative, NotSemicausal
from .tensor_linalg import BipartiteSystem, flip

ROW = "row"
COL = "col"
_STOCH_TOL = 1e-10


def _as_real(m, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    a = np.asarray(m)
    if np.iscomplexobj(a):
        if np.max(np.abs(a.imag), initial=0.0) > 1e-12:
            raise ValueError("classical maps must have real entries")
        a = a.real
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {a.shape}")
    if (rows is not None and a.shape[0] != rows) or (cols is not None and a.shape[1] != cols):
        raise DimensionMismatch(f"expected shape {(rows, cols)}, got {a.shape}")
    return a


def _picture(picture: str) -> str:
    p = {"heisenberg": ROW, "schrodinger": COL}.get(picture.lower(), picture.lower())
    if p not in (ROW, COL):
        raise ValueError(f"picture must be 'row' or 'col', got {picture!r}")
    return p


@dataclass(frozen=True)
class StochMat:
    m: np.ndarray
    kind: str

    def __post_init__(self):
        object.__setattr__(self, "m", _as_real(self.m))
        m = self.m
        ok = bool(np.all(m >= -1e-12))
        if self.kind == "row_stochastic":
            ok = ok and np.allclose(m.sum(axis=1), 1.0, atol=_STOCH_TOL, rtol=0)
        elif self.kind == "col_stochastic":
            ok = ok and np.allclose(m.sum(axis=0), 1.0, atol=_STOCH_TOL, rtol=0)
        elif self.kind == "row_sub":
            ok = ok and np.all(m.sum(axis=1) <= 1.0 + _STOCH_TOL)
        elif self.kind == "col_sub":
            ok = ok and np.all(m.sum(axis=0) <= 1.0 + _STOCH_TOL)
        elif self.kind != "nonneg":
            raise ValueError(f"unknown kind {self.kind!r}")
        if not ok:
            raise InvariantViolation(f"matrix is not {self.kind}")


@dataclass(frozen=True)
class ClassicalGenNF:
    """Normal form of a classical semicausal generator.

    Row picture: ``Q = (A (x) 1_B)(1_A (x) U) - K_A (x) 1_B + sum_i |i><i| (x) B_i``
    with ``A`` of shape ``d_A x d_A d_E`` and ``U`` row-stochastic ``d_E d_B x d_B``.
    Column picture: ``Q = (1_A (x) U)(A (x) 1_B) - K_A (x) 1_B + sum_i |i><i| (x) B_i``
    with ``A`` of shape ``d_A d_E x d_A`` and ``U`` column-stochastic ``d_B x d_E d_B``.
    """

    d_E: int
    U: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)
    K_A: np.ndarray = field(repr=False)
    B_list: tuple = field(repr=False)
    picture: str = ROW

    def __post_init__(self):
        object.__setattr__(self, "picture", _picture(self.picture))
        object.__setattr__(self, "U", _as_real(self.U))
        object.__setattr__(self, "A", _as_real(self.A))
        object.__setattr__(self, "K_A", np.asarray(self.K_A, dtype=float).reshape(-1))
        object.__setattr__(self, "B_list", tuple(_as_real(b) for b in self.B_list))

    @property
    def d_A(self) -> int:
        return self.K_A.size

    @property
    def d_B(self) -> int:
        return self.B_list[0].shape[0] if self.B_list else 0

    def validate(self) -> None:
        dA, dB, dE = self.d_A, self.d_B, self.d_E
        if len(self.B_list) != dA:
            raise InvariantViolation("need one B generator per letter of A")
        row = self.picture == ROW
        try:
            _as_real(self.A, *((dA, dA * dE) if row else (dA * dE, dA)))
            _as_real(self.U, *((dE * dB, dB) if row else (dB, dE * dB)))
        except DimensionMismatch as exc:
            raise InvariantViolation(str(exc)) from None
        StochMat(self.U, "row_stochastic" if row else "col_stochastic")
        StochMat(self.A, "nonneg")
        for b in self.B_list:
            _check_stochastic_generator(b, row)


def _check_stochastic_generator(b: np.ndarray, row: bool) -> None:
    b = _as_real(b)
    off = b - np.diag(np.diag(b))
    if off.min(initial=0.0) < -_STOCH_TOL:
        raise InvariantViolation("generator has a negative off-diagonal entry")
    sums = b.sum(axis=1) if row else b.sum(axis=0)
    if np.max(np.abs(sums), initial=0.0) > _STOCH_TOL * (1 + np.abs(b).max(initial=0.0)):
        raise InvariantViolation("generator does not conserve probability")


@dataclass(frozen=True)
class ClassicalCheckReport:
    offdiag_min: float
    semicausal_residual: float
    reduced: np.ndarray
    verdicts: dict
    tolerances: dict

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def summary(self) -> dict:
        return {"passed": self.passed, "verdicts": dict(self.verdicts),
                "residuals": {"offdiag_min": self.offdiag_min,
                              "semicausal_residual": self.semicausal_residual},
                "tolerances": dict(self.tolerances)}


def _default_tol(m: np.ndarray) -> float:
    return 1e-9 * (1.0 + float(np.abs(m).max(initial=0.0)))


def check_classical_semicausal(m: np.ndarray, dims: BipartiteSystem, picture: str = ROW,
                               tol: float | None = None) -> tuple[bool, np.ndarray, float]:
    """B-does-not-signal-to-A test; returns ``(ok, reduced map, max-norm residual)``."""
    dA, dB = dims.d_A, dims.d_B
    n = dims.dim
    m = _as_real(m, n, n)
    tol = _default_tol(m) if tol is None else tol
    ones = np.ones((dB, 1))
    if _picture(picture) == ROW:
        w = m @ np.kron(np.eye(dA), ones)                         # d_A d_B x d_A
        reduced = w.reshape(dA, dB, dA).mean(axis=1)
        residual = np.abs(w - np.kron(reduced, ones)).max(initial=0.0)
    else:
        w = np.kron(np.eye(dA), ones.T) @ m                       # d_A x d_A d_B
        reduced = w.reshape(dA, dA, dB).mean(axis=2)
        residual = np.abs(w - np.kron(reduced, ones.T)).max(initial=0.0)
    return bool(residual <= tol), reduced, float(residual)


def semilocalize(n: np.ndarray, dims: BipartiteSystem,
                 tol: float | None = None) -> tuple[np.ndarray, np.ndarray, int]:
    """Write a nonnegative row-semicausal ``N`` as ``(A (x) 1_B)(1_A (x) U)``.

    The environment is ``E = A x A``; letter ``(m, k)`` of E has index ``m * d_A + k``.
    ``A`` copies the A-transition ``k -> j`` into E, and ``U`` reads it and applies
    the conditional B-transition ``N[(n, r), (m, s)] / N^A[n, m]``.
    """
    dA, dB = dims.d_A, dims.d_B
    n = _as_real(n, dims.dim, dims.dim)
    if n.min(initial=0.0) < -1e-12:
        raise NotNonnegative("semilocalization needs a nonnegative map")
    ok, NA, residual = check_classical_semicausal(n, dims, ROW, tol)
    if not ok:
        raise NotSemicausal(f"semicausality residual {residual:.3e}")
    dE = dA * dA
    A = np.zeros((dA, dA * dE))
    for j in range(dA):
        for k in range(dA):
            A[j, k * dE + k * dA + j] = NA[j, k]
    zero = 1e-14 * (1.0 + np.abs(n).max(initial=0.0))
    N4 = n.reshape(dA, dB, dA, dB)                                # [n, r, m, s]
    U = np.zeros((dE * dB, dB))
    for mm in range(dA):
        for nn in range(dA):
            rows = slice((mm * dA + nn) * dB, (mm * dA + nn + 1) * dB)
            if abs(NA[nn, mm]) > zero:
                U[rows, :] = N4[nn, :, mm, :] / NA[nn, mm]
            else:
                U[rows, :] = np.eye(dB)
    return A, U, dE


def check_classical_generator(q: np.ndarray, dims: BipartiteSystem, picture: str = ROW,
                              tol: float | None = None) -> ClassicalCheckReport:
    """Off-diagonal nonnegativity plus semicausality of a rate matrix."""
    q = _as_real(q, dims.dim, dims.dim)
    tol = _default_tol(q) if tol is None else tol
    off = q - np.diag(np.diag(q))
    offdiag_min = float(off.min(initial=0.0))
    ok_sc, reduced, residual = check_classical_semicausal(q, dims, picture, tol)
    verdicts = {"offdiag_nonneg": offdiag_min >= -tol, "semicausal": ok_sc}
    return ClassicalCheckReport(offdiag_min, residual, reduced, verdicts,
                                {"abs_tol": tol, "picture": _picture(picture)})


def decompose_classical_generator(q: np.ndarray, dims: BipartiteSystem, picture: str = ROW,
                                  tol: float | None = None) -> ClassicalGenNF:
    """Split a semicausal rate matrix into its normal form.

    Off-diagonal A-blocks form a nonnegative semicausal map which is then
    semilocalized; the constant ``lambda_ii`` carried by each diagonal block is
    moved into ``K_A``.  The column picture is handled by transposition.
    """
    report = check_classical_generator(q, dims, picture, tol)
    if not report.passed:
        raise CheckFailed("not a semicausal generator of a nonnegative semigroup", report)
    dA, dB = dims.d_A, dims.d_B
    q = _as_real(q)
    if _picture(picture) == COL:
        nf = decompose_classical_generator(q.T, dims, ROW, tol)
        return ClassicalGenNF(nf.d_E, nf.U.T, nf.A.T, nf.K_A, tuple(b.T for b in nf.B_list), COL)
    QA = report.reduced
    blocks = q.reshape(dA, dB, dA, dB)
    phi = blocks.copy()
    B_list = []
    for i in range(dA):
        phi[i, :, i, :] = 0.0
        B_list.append(blocks[i, :, i, :] - QA[i, i] * np.eye(dB))
    phi = phi.reshape(dims.dim, dims.dim)
    A, U, dE = semilocalize(np.clip(phi, 0.0, None), dims)
    return ClassicalGenNF(dE, U, A, -np.diag(QA).copy(), tuple(B_list), ROW)


def synthesize_classical_generator(nf: ClassicalGenNF, dims: BipartiteSystem,
                                   picture: str | None = None) -> np.ndarray:
    picture = nf.picture if picture is None else _picture(picture)
    if picture != nf.picture:
        raise InvariantViolation(f"normal form is in the {nf.picture} picture")
    if (nf.d_A, nf.d_B) != (dims.d_A, dims.d_B):
        raise DimensionMismatch("normal form does not match the requested dimensions")
    nf.validate()
    iA, iB = np.eye(dims.d_A), np.eye(dims.d_B)
    if picture == ROW:
        q = np.kron(nf.A, iB) @ np.kron(iA, nf.U)
    else:
        q = np.kron(iA, nf.U) @ np.kron(nf.A, iB)
    q = q - np.kron(np.diag(nf.K_A), iB)
    for i, b in enumerate(nf.B_list):
        e = np.zeros((dims.d_A, dims.d_A))
        e[i, i] = 1.0
        q = q + np.kron(e, b)
    return q


def superchannel_generator_classical(nf: ClassicalGenNF, dims: BipartiteSystem,
                                     flavor: str = "preselecting",
                                     tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Generator on maps ``M : R^A -> R^B`` from a column-picture normal form.

    Returns ``(Q_hat, S)``: ``Q_hat`` acts on the row-major ``vec(M)`` through
    ``Q_hat(M) = U (M (x) 1_E) A - M K_A + sum_i B_i M |i><i|`` with the
    translated ``A = A~^{T_A}`` and ``U = U~ F_{B;E}``; ``S`` is the same map
    conjugated by the classical Choi vector ``(1 (x) M)|Omega>``.
    """
    if nf.picture != COL:
        raise InvariantViolation("classical superchannel generators use the column picture")
    nf.validate()
    dA, dB, dE = dims.d_A, dims.d_B, nf.d_E
    A_hat = nf.A.reshape(dA, dE, dA).transpose(2, 1, 0).reshape(dA * dE, dA)
    U_hat = nf.U @ flip(dB, dE).real
    if flavor == "superchannel":
        res = np.abs(nf.K_A - A_hat.sum(axis=0)).max(initial=0.0)
        if res > tol * (1.0 + np.abs(A_hat).max(initial=0.0)):
            raise InvariantViolation(f"trace condition violated, residual {res:.3e}")
    elif flavor != "preselecting":
        raise ValueError(f"unknown flavor {flavor!r}")
    u3 = U_hat.reshape(dB, dB, dE)
    a3 = A_hat.reshape(dA, dE, dA)
    q_hat = np.einsum("xbe,ceu->xubc", u3, a3).reshape(dB * dA, dB * dA)
    q_hat = q_hat - np.kron(np.eye(dB), np.diag(nf.K_A))
    for i, b in enumerate(nf.B_list):
        e = np.zeros((dA, dA))
        e[i, i] = 1.0
        q_hat = q_hat + np.kron(b, e)
    perm = flip(dB, dA).real                                      # vec(M) -> Choi vector
    return q_hat, perm @ q_hat @ perm.T


def check_classical_superchannel_generator(q_hat: np.ndarray, dims: BipartiteSystem,
                                           tol: float | None = None) -> ClassicalCheckReport:
    """Checker for a generator acting on row-major ``vec(M)``, ``M : R^A -> R^B``.

    The map is conjugated to Choi vectors, checked as a column-picture
    semicausal rate matrix, and its reduced generator must annihilate the
    all-ones vector (reduced semigroup stays unital).
    """
    dA, dB = dims.d_A, dims.d_B
    q_hat = _as_real(q_hat, dims.dim, dims.dim)
    perm = flip(dB, dA).real
    base = check_classical_generator(perm @ q_hat @ perm.T, dims, COL, tol)
    unital = float(np.abs(base.reduced.sum(axis=1)).max(initial=0.0))
    verdicts = dict(base.verdicts)
    verdicts["preselecting"] = base.passed
    verdicts["reduced_unital"] = unital <= base.tolerances["abs_tol"]
    tolerances = dict(base.tolerances, reduced_unital_residual=unital)
    return ClassicalCheckReport(base.offdiag_min, base.semicausal_residual, base.reduced,
                                verdicts, tolerances)


def classical_vec(m: np.ndarray) -> np.ndarray:
    """Row-major vectorization used by :func:`superchannel_generator_classical`."""
    return _as_real(m).reshape(-1)


def classical_superchannel_conditions(nf: ClassicalGenNF, dims: BipartiteSystem) -> float:
    """Residual of ``K_A[i] = <1_{AE}| A^ a_i>`` for the translated ``A^``."""
    dA, dE = dims.d_A, nf.d_E
    A_hat = nf.A.reshape(dA, dE, dA).transpose(2, 1, 0).reshape(dA * dE, dA)
    return float(np.abs(nf.K_A - A_hat.sum(axis=0)).max(initial=0.0))


# -- random instances ---------------------------------------------------------

def _stochastic(rows: int, cols: int, rng: np.random.Generator, axis: int) -> np.ndarray:
    m = rng.random((rows, cols))
    return m / m.sum(axis=axis, keepdims=True)


def random_stochastic_generator(d: int, rng: np.random.Generator, picture: str = ROW,
                                scale: float = 1.0) -> np.ndarray:
    off = scale * rng.random((d, d))
    np.fill_diagonal(off, 0.0)
    sums = off.sum(axis=1) if _picture(picture) == ROW else off.sum(axis=0)
    return off - np.diag(sums)


def random_classical_nf(d_A: int, d_B: int, d_E: int, seed: int, picture: str = ROW,
                        superchannel: bool = False) -> ClassicalGenNF:
    """Random normal form; ``superchannel`` fixes ``K_A`` from the trace condition (column picture)."""
    rng = np.random.default_rng(seed)
    picture = _picture(picture)
    if picture == ROW:
        A = rng.random((d_A, d_A * d_E))
        U = _stochastic(d_E * d_B, d_B, rng, axis=1)
    else:
        A = rng.random((d_A * d_E, d_A))
        U = _stochastic(d_B, d_E * d_B, rng, axis=0)
    K_A = rng.standard_normal(d_A)
    B_list = tuple(random_stochastic_generator(d_B, rng, picture) for _ in range(d_A))
    nf = ClassicalGenNF(d_E, U, A, K_A, B_list, picture)
    if superchannel:
        if picture != COL:
            raise ValueError("superchannel normal forms use the column picture")
        K_A = A.reshape(d_A, d_E, d_A).sum(axis=(1, 2))
        nf = ClassicalGenNF(d_E, U, A, K_A, B_list, picture)
    return nf


def random_semicausal_nonneg(dims: BipartiteSystem, rng: np.random.Generator,
                             zero_rows: int = 0) -> np.ndarray:
    """Random nonnegative row-semicausal map ``sum_{j,k} N^A[j,k] |j><k| (x) N_{jk}``.

    ``zero_rows`` rows of ``N^A`` are set to zero to exercise the degenerate branch.
    """
    dA, dB = dims.d_A, dims.d_B
    NA = rng.random((dA, dA))
    NA[rng.random((dA, dA)) < 0.2] = 0.0
    NA[:zero_rows, :] = 0.0
    n = np.zeros((dA, dB, dA, dB))
    for j in range(dA):
        for k in range(dA):
            n[j, :, k, :] = NA[j, k] * _stochastic(dB, dB, rng, axis=1)
    return n.reshape(dims.dim, dims.dim)

