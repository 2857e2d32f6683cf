"""Choi-Jamiolkowski isomorphism and positivity predicates.

Linear maps on operators are carried as *superoperator matrices* acting on
row-major vectorized operators, ``vec(X)[i * n + j] = X[i, j]``.  With this
convention ``vec(L X R) = kron(L, R.T) @ vec(X)`` and the Hilbert-Schmidt
adjoint of a map is the conjugate transpose of its matrix.

The Choi matrix of ``T`` uses the unnormalized ``|Omega> = sum_i |i>|i>`` and
legs ordered input (x) output::

    choi(T)[(i, k), (j, l)] = T(|i><j|)[k, l] = S[(k, l), (i, j)]

so conversion between the two is a pure index reshuffle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionMismatch
from .tensor_linalg import (BipartiteSystem, as_cmat, dagger, herm_eig, partial_trace,
                            tolerance)


def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=complex).reshape(-1)


def unvec(v: np.ndarray, rows: int, cols: int | None = None) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(rows, rows if cols is None else cols)


def omega_vector(d: int) -> np.ndarray:
    """Unnormalized maximally entangled vector ``sum_i |i> (x) |i>``."""
    return np.eye(d, dtype=complex).reshape(-1)


def superop_to_choi(s: np.ndarray, in_dim: int, out_dim: int) -> np.ndarray:
    s = as_cmat(s, out_dim * out_dim, in_dim * in_dim)
    t = s.reshape(out_dim, out_dim, in_dim, in_dim).transpose(2, 0, 3, 1)
    return t.reshape(in_dim * out_dim, in_dim * out_dim)


def choi_to_superop(c: np.ndarray, in_dim: int, out_dim: int) -> np.ndarray:
    n = in_dim * out_dim
    c = as_cmat(c, n, n)
    t = c.reshape(in_dim, out_dim, in_dim, out_dim).transpose(1, 3, 0, 2)
    return t.reshape(out_dim * out_dim, in_dim * in_dim)


def superop_from_function(f: Callable[[np.ndarray], np.ndarray], in_dim: int,
                          out_dim: int | None = None) -> np.ndarray:
    """Matrix of a linear map given as a Python callable (evaluated on matrix units)."""
    out_dim = in_dim if out_dim is None else out_dim
    s = np.zeros((out_dim * out_dim, in_dim * in_dim), dtype=complex)
    for i in range(in_dim):
        for j in range(in_dim):
            e = np.zeros((in_dim, in_dim), dtype=complex)
            e[i, j] = 1.0
            s[:, i * in_dim + j] = vec(f(e))
    return s


def sandwich(left: np.ndarray, right: np.ndarray | None = None) -> np.ndarray:
    """Superoperator of ``X -> left X right^dagger``."""
    right = left if right is None else right
    return np.kron(left, right.conj())


def left_mult(k: np.ndarray) -> np.ndarray:
    return np.kron(k, np.eye(k.shape[1]))


def right_mult(k: np.ndarray) -> np.ndarray:
    """Superoperator of ``X -> X k``."""
    return np.kron(np.eye(k.shape[0]), k.T)


def dual_superop(s: np.ndarray) -> np.ndarray:
    """Hilbert-Schmidt adjoint: Schroedinger <-> Heisenberg picture."""
    return dagger(as_cmat(s))


def superop_kron(s1: np.ndarray, s2: np.ndarray, d1: tuple[int, int],
                 d2: tuple[int, int]) -> np.ndarray:
    """Superoperator of ``S1 (x) S2`` on the composite space.

    ``d1`` and ``d2`` are ``(in_dim, out_dim)`` of the two factors.
    """
    (i1, o1), (i2, o2) = d1, d2
    a = as_cmat(s1, o1 * o1, i1 * i1).reshape(o1, o1, i1, i1)
    b = as_cmat(s2, o2 * o2, i2 * i2).reshape(o2, o2, i2, i2)
    t = np.einsum("acpr,bdqs->abcdpqrs", a, b)
    return t.reshape((o1 * o2) ** 2, (i1 * i2) ** 2)


@dataclass(frozen=True)
class Superop:
    """A linear map ``B(C^in) -> B(C^out)`` stored by its Choi matrix."""

    in_dim: int
    out_dim: int
    choi: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.in_dim * self.out_dim
        object.__setattr__(self, "choi", as_cmat(self.choi, n, n))

    @property
    def matrix(self) -> np.ndarray:
        return choi_to_superop(self.choi, self.in_dim, self.out_dim)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply_choi(self, rho)


@dataclass(frozen=True)
class CheckReport:
    """Residuals of a generator check plus the verdicts derived from them.

    ``verdicts`` maps criterion names to booleans; ``passed`` is the
    conjunction of the criteria named in ``required``.
    """

    herm_residual: float
    min_cond_cp_eig: float
    semicausal_residual: float
    trace_or_unital_residual: float
    reduced_choi: np.ndarray | None
    verdicts: dict
    tolerances: dict
    required: tuple = ("hermitian", "cond_cp", "semicausal")

    @property
    def passed(self) -> bool:
        return all(self.verdicts[k] for k in self.required)

    def summary(self) -> dict:
        return {
            "passed": self.passed,
            "verdicts": dict(self.verdicts),
            "residuals": {
                "herm_residual": self.herm_residual,
                "min_cond_cp_eig": self.min_cond_cp_eig,
                "semicausal_residual": self.semicausal_residual,
                "trace_or_unital_residual": self.trace_or_unital_residual,
            },
            "tolerances": dict(self.tolerances),
        }


def choi_of_map(apply: np.ndarray, in_dim: int, out_dim: int) -> Superop:
    return Superop(in_dim, out_dim, superop_to_choi(apply, in_dim, out_dim))


def apply_choi(s: Superop, rho: np.ndarray) -> np.ndarray:
    """``T(rho) = tr_A[(rho^T (x) 1) choi]``."""
    rho = as_cmat(rho, s.in_dim, s.in_dim)
    prod = np.kron(rho.T, np.eye(s.out_dim)) @ s.choi
    return partial_trace(prod, BipartiteSystem(s.in_dim, s.out_dim), "A")


def is_cp(s: Superop, tol: float | None = None) -> tuple[bool, float]:
    tol = tolerance(s.choi) if tol is None else tol
    min_eig = float(herm_eig(s.choi).eigenvalues[0])
    return min_eig >= -tol, min_eig


def is_tp(s: Superop, tol: float | None = None) -> tuple[bool, float]:
    tol = tolerance(s.choi) if tol is None else tol
    reduced = partial_trace(s.choi, BipartiteSystem(s.in_dim, s.out_dim), "B")
    residual = float(np.linalg.norm(reduced - np.eye(s.in_dim)))
    return residual <= tol, residual


def cond_cp_check(L_choi: np.ndarray, dim: int,
                  tol: float | None = None) -> tuple[bool, float, float]:
    """Conditional complete positivity of a generator's Choi matrix.

    Returns ``(ok, min eigenvalue of P_perp L P_perp, hermiticity residual)``
    where ``P_perp`` projects onto the complement of ``|Omega>``.
    """
    n = dim * dim
    c = as_cmat(L_choi, n, n)
    tol = tolerance(c) if tol is None else tol
    herm_residual = float(np.linalg.norm(c - dagger(c)))
    omega = omega_vector(dim)
    p_perp = np.eye(n) - np.outer(omega, omega.conj()) / dim
    min_eig = float(herm_eig(p_perp @ c @ p_perp).eigenvalues[0])
    return (herm_residual <= tol and min_eig >= -tol), min_eig, herm_residual


def classical_choi_vec(m: np.ndarray) -> np.ndarray:
    """``(1_A (x) M)|Omega>`` for ``M: R^A -> R^B``; entry ``a * d_B + b`` is ``M[b, a]``."""
    m = np.asarray(m)
    if np.iscomplexobj(m):
        if np.max(np.abs(m.imag), initial=0.0) > 1e-12:
            raise ValueError("classical maps must have real entries")
        m = m.real
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise DimensionMismatch("expected a matrix")
    return m.T.reshape(-1)


def classical_choi_unvec(v: np.ndarray, d_A: int, d_B: int) -> np.ndarray:
    """Inverse of :func:`classical_choi_vec`; returns the ``d_B x d_A`` matrix."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != d_A * d_B:
        raise DimensionMismatch(f"vector of length {v.size} does not match {d_A}x{d_B}")
    return v.reshape(d_A, d_B).T.copy()
