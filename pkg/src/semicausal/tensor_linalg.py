"""Dense complex linear algebra with bipartite tensor-leg bookkeeping.

Conventions used everywhere in the package:

* Operators are plain ``numpy`` arrays of dtype ``complex128``.
* Composite spaces are ordered A-major: the basis vector ``|i> (x) |j>`` of
  ``H_A (x) H_B`` has index ``i * d_B + j``.  This is exactly what
  ``numpy.kron`` and C-order reshapes produce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, NotPartialIsometry, NotPSD

DEFAULT_REL_TOL = 1e-9


def tolerance(m: np.ndarray | float, rel: float | None = None) -> float:
    """Absolute slack ``rel * (1 + ||m||_F)`` used by every checker.

    ``m`` may be a matrix or an already computed norm.
    """
    rel = DEFAULT_REL_TOL if rel is None else rel
    norm = float(m) if np.isscalar(m) else float(np.linalg.norm(m))
    return rel * (1.0 + norm)


@dataclass(frozen=True)
class BipartiteSystem:
    d_A: int
    d_B: int

    def __post_init__(self):
        if self.d_A < 1 or self.d_B < 1:
            raise DimensionMismatch(f"dimensions must be positive, got {self.d_A}, {self.d_B}")

    @property
    def dim(self) -> int:
        return self.d_A * self.d_B


class SpectralDecomp(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_cmat(x, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Coerce to a finite 2-d complex array, optionally checking its shape."""
    m = np.asarray(x, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got array of shape {m.shape}")
    if rows is not None and m.shape[0] != rows:
        raise DimensionMismatch(f"expected {rows} rows, got {m.shape[0]}")
    if cols is not None and m.shape[1] != cols:
        raise DimensionMismatch(f"expected {cols} columns, got {m.shape[1]}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def kron_all(*factors: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def ket(index: int, dim: int) -> np.ndarray:
    """Column vector ``|index>`` in dimension ``dim``."""
    v = np.zeros((dim, 1), dtype=complex)
    v[index, 0] = 1.0
    return v


# -- leg manipulation ---------------------------------------------------------

def partial_trace_legs(x: np.ndarray, dims: Sequence[int], traced: Sequence[int]) -> np.ndarray:
    """Trace out the legs listed in ``traced`` of a square operator on ``prod(dims)``."""
    dims = list(dims)
    n = len(dims)
    total = math.prod(dims)
    x = as_cmat(x, total, total)
    t = x.reshape(dims + dims)
    keep = [k for k in range(n) if k not in set(traced)]
    # einsum labels: row legs 0..n-1, column legs n..2n-1, traced pairs share a label
    row = list(range(n))
    col = [k if k in set(traced) else n + k for k in range(n)]
    out = np.einsum(t, row + col, [row[k] for k in keep] + [col[k] for k in keep])
    d = math.prod(dims[k] for k in keep)
    return out.reshape(d, d)


def partial_trace(x: np.ndarray, sys: BipartiteSystem, leg: str) -> np.ndarray:
    """``tr_A`` or ``tr_B`` of an operator on ``H_A (x) H_B``."""
    if leg not in ("A", "B"):
        raise ValueError(f"leg must be 'A' or 'B', got {leg!r}")
    return partial_trace_legs(x, [sys.d_A, sys.d_B], [0] if leg == "A" else [1])


def permute_legs(x: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder the tensor legs of a square operator.

    The returned operator acts on ``(x) dims[perm[k]]``; it equals
    ``P x P^dagger`` where ``P`` is the permutation sending leg ``perm[k]`` to slot ``k``.
    """
    dims = list(dims)
    n = len(dims)
    total = math.prod(dims)
    x = as_cmat(x, total, total)
    t = x.reshape(dims + dims).transpose(list(perm) + [n + p for p in perm])
    return t.reshape(total, total)


def partial_transpose(x: np.ndarray, sys: BipartiteSystem, leg: str = "A",
                      d_out: int | None = None) -> np.ndarray:
    """Partial transpose on the A leg (or B leg for square operators).

    For ``leg="A"`` the operator may be rectangular, mapping ``H_A (x) H_B`` to
    ``H_A (x) H_C`` with ``d_C = d_out`` (default ``d_B``).  The defining
    property is ``(<a_i| (x) 1) X^{T_A} (|a_j> (x) 1) = (<a_j| (x) 1) X (|a_i> (x) 1)``.
    """
    d_A, d_B = sys.d_A, sys.d_B
    d_C = d_B if d_out is None else d_out
    if leg == "A":
        x = as_cmat(x, d_A * d_C, d_A * d_B)
        t = x.reshape(d_A, d_C, d_A, d_B).transpose(2, 1, 0, 3)
        return t.reshape(d_A * d_C, d_A * d_B)
    if leg == "B":
        if d_C != d_B:
            raise DimensionMismatch("B-leg partial transpose needs a square operator")
        x = as_cmat(x, d_A * d_B, d_A * d_B)
        t = x.reshape(d_A, d_B, d_A, d_B).transpose(0, 3, 2, 1)
        return t.reshape(d_A * d_B, d_A * d_B)
    raise ValueError(f"leg must be 'A' or 'B', got {leg!r}")


def flip(dA: int, dB: int) -> np.ndarray:
    """Permutation matrix ``F_{A;B}``: ``|i> (x) |j>`` to ``|j> (x) |i>``."""
    f = np.zeros((dB * dA, dA * dB), dtype=complex)
    for i in range(dA):
        for j in range(dB):
            f[j * dA + i, i * dB + j] = 1.0
    return f


# -- spectral routines --------------------------------------------------------

def herm_eig(m: np.ndarray) -> SpectralDecomp:
    """Eigendecomposition of the Hermitian part ``(m + m^dagger)/2``, ascending."""
    m = as_cmat(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch("herm_eig needs a square matrix")
    h = 0.5 * (m + dagger(m))
    w, v = np.linalg.eigh(h)
    return SpectralDecomp(w, v)


def numerical_rank(singular_values: np.ndarray, shape: tuple[int, int]) -> int:
    """Count singular values above ``max(shape) * eps * s_max``."""
    s = np.asarray(singular_values)
    if s.size == 0 or s.max() == 0.0:
        return 0
    return int(np.sum(s > max(shape) * np.finfo(float).eps * s.max()))


def psd_sqrt(m: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Positive semidefinite square root.

    Eigenvalues at roundoff level are zeroed first: their square roots would
    otherwise inject noise of order sqrt(eps) into the result.
    """
    w, v = herm_eig(m)
    eps = tolerance(m) if tol is None else tol
    if w.size and w[0] < -eps:
        raise NotPSD(f"minimum eigenvalue {w[0]:.3e} below -{eps:.1e}")
    noise = w.size * np.finfo(float).eps * float(np.abs(w).max(initial=0.0))
    root = np.sqrt(np.where(w > noise, w, 0.0))
    return (v * root) @ dagger(v)


_PADE13 = (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
           1187353796428800.0, 129060195264000.0, 10559470521600.0,
           670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
           960960.0, 16380.0, 182.0, 1.0)
_THETA13 = 5.371920351148152


def expm(m: np.ndarray, t: float = 1.0) -> np.ndarray:
    """``exp(t m)`` by scaling and squaring with the degree-13 Pade approximant."""
    a = as_cmat(m) * t
    n = a.shape[0]
    if a.shape[1] != n:
        raise DimensionMismatch("expm needs a square matrix")
    norm1 = np.linalg.norm(a, 1)
    s = 0
    if norm1 > _THETA13:
        s = int(math.ceil(math.log2(norm1 / _THETA13)))
        a = a / (2.0 ** s)
    b = _PADE13
    ident = np.eye(n, dtype=complex)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
             + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r


def lstsq_solve(coeff: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, float]:
    """Minimum-norm least-squares solution and its Frobenius residual."""
    coeff = as_cmat(coeff)
    rhs = np.asarray(rhs, dtype=complex)
    vector_rhs = rhs.ndim == 1
    if vector_rhs:
        rhs = rhs[:, None]
    if rhs.shape[0] != coeff.shape[0]:
        raise DimensionMismatch("coefficient and right-hand side row counts differ")
    if coeff.size == 0:
        sol = np.zeros((coeff.shape[1], rhs.shape[1]), dtype=complex)
    else:
        sol = np.linalg.lstsq(coeff, rhs, rcond=None)[0]
    residual = float(np.linalg.norm(coeff @ sol - rhs))
    return (sol[:, 0] if vector_rhs else sol), residual


def extend_isometry_to_unitary(v: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Complete a square partial isometry to a unitary agreeing with it on its support."""
    v = as_cmat(v)
    n = v.shape[0]
    if v.shape[1] != n:
        raise DimensionMismatch("extend_isometry_to_unitary needs a square matrix")
    s = np.linalg.svd(v, compute_uv=False)
    if np.any(np.minimum(np.abs(s - 1.0), np.abs(s)) > tol):
        raise NotPartialIsometry(f"singular values not in {{0, 1}}: {s}")
    ident = np.eye(n, dtype=complex)
    w_in, f = herm_eig(ident - dagger(v) @ v)
    w_out, r = herm_eig(ident - v @ dagger(v))
    f = f[:, w_in > 0.5]
    r = r[:, w_out > 0.5]
    if f.shape[1] != r.shape[1]:
        raise NotPartialIsometry("kernel and cokernel dimensions differ")
    return v + r @ dagger(f)


# -- random instances ---------------------------------------------------------

def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR factorization of a Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    phases = np.where(np.abs(diag) > 0, diag / np.abs(diag), 1.0)
    return q * phases


def ginibre(rows: int, cols: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    z = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    return scale * z / math.sqrt(2.0)


def random_hermitian(d: int, rng: np.random.Generator, scale: float = 1.0,
                     traceless: bool = False) -> np.ndarray:
    g = ginibre(d, d, rng, scale)
    h = 0.5 * (g + dagger(g))
    if traceless:
        h = h - np.trace(h) / d * np.eye(d)
    return h


def random_density_matrix(d: int, rng: np.random.Generator) -> np.ndarray:
    g = ginibre(d, d, rng)
    rho = g @ dagger(g)
    return rho / np.trace(rho)
