"""JSON container for matrices, generators and normal forms.

Every document has the shape::

    {"schema_version": "1", "kind": ..., "dims": {"d_A": .., "d_B": .., ...},
     "data": ..., "meta": {...}}

Complex entries are ``[re, im]`` pairs; ``real_matrix`` data holds plain numbers.
Normal-form kinds store a mapping from field name to matrix.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classical_semicausal import ClassicalGenNF
from .errors import DimensionMismatch, SemicausalError
from .quantum_semicausal import SemicausalNormalForm
from .superchannel import SuperchannelNormalForm, SupermapGen

SCHEMA_VERSION = "1"
KINDS = ("complex_matrix", "real_matrix", "superop", "supermap_gen",
         "normal_form_semicausal", "normal_form_superchannel", "classical_gen_nf")


class ParseError(SemicausalError, ValueError):
    """The document is not valid JSON or does not follow the schema."""


def encode_matrix(m: np.ndarray, real: bool = False) -> list:
    m = np.asarray(m)
    if real:
        return [[float(x) for x in row] for row in np.real(m)]
    m = m.astype(complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(data) -> np.ndarray:
    """Accept nested lists of numbers or of ``[re, im]`` pairs."""
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"matrix data is not rectangular numeric: {exc}") from None
    if arr.ndim == 3 and arr.shape[2] == 2:
        out = arr[..., 0] + 1j * arr[..., 1]
    elif arr.ndim == 2:
        out = arr.astype(complex)
    elif arr.ndim == 1 and arr.size == 0:
        out = np.zeros((0, 0), dtype=complex)
    else:
        raise ParseError(f"matrix data has unexpected shape {arr.shape}")
    if not np.all(np.isfinite(out)):
        raise ParseError("matrix data has non-finite entries")
    return out


@dataclass
class MatrixFile:
    kind: str
    dims: dict
    data: object
    meta: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        d = {"schema_version": self.schema_version, "kind": self.kind,
             "dims": dict(self.dims), "data": self.data}
        if self.meta:
            d["meta"] = dict(self.meta)
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def from_dict(cls, d) -> "MatrixFile":
        if not isinstance(d, dict):
            raise ParseError("top-level JSON value must be an object")
        missing = [k for k in ("schema_version", "kind", "dims", "data") if k not in d]
        if missing:
            raise ParseError(f"missing keys: {missing}")
        if d["schema_version"] != SCHEMA_VERSION:
            raise ParseError(f"unsupported schema_version {d['schema_version']!r}")
        if d["kind"] not in KINDS:
            raise ParseError(f"unknown kind {d['kind']!r}")
        if not isinstance(d["dims"], dict):
            raise ParseError("dims must be an object")
        mf = cls(d["kind"], d["dims"], d["data"], d.get("meta", {}) or {})
        mf.validate()
        return mf

    @classmethod
    def loads(cls, text: str) -> "MatrixFile":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from None
        return cls.from_dict(d)

    @classmethod
    def read(cls, path: str | Path) -> "MatrixFile":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"cannot read {path}: {exc}") from None
        return cls.loads(text)

    def dim(self, key: str) -> int:
        v = self.dims.get(key)
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise DimensionMismatch(f"dims.{key} must be a positive integer, got {v!r}")
        return v

    def matrix(self) -> np.ndarray:
        return decode_matrix(self.data)

    def validate(self) -> None:
        """Check that the data decodes and its shapes agree with ``dims``."""
        k = self.kind
        if k in ("complex_matrix", "real_matrix"):
            m = self.matrix()
            if k == "real_matrix" and np.abs(m.imag).max(initial=0.0) > 0:
                raise ParseError("real_matrix carries imaginary parts")
            if "d_A" in self.dims and "d_B" in self.dims:
                _shape(m, _expected_square(self, k), "data")
        elif k in ("superop", "supermap_gen"):
            n = (self.dim("d_A") * self.dim("d_B")) ** 2
            _shape(self.matrix(), (n, n), "data")
        elif k == "normal_form_semicausal":
            to_semicausal_nf(self)
        elif k == "normal_form_superchannel":
            to_superchannel_nf(self)
        elif k == "classical_gen_nf":
            to_classical_nf(self)


def _expected_square(mf: MatrixFile, kind: str):
    role = mf.meta.get("role")
    dA, dB = mf.dim("d_A"), mf.dim("d_B")
    if role == "state":
        return (dA * dB, dA * dB) if kind == "complex_matrix" else (dA * dB, None)
    if role == "channel_choi":
        return (dA * dB, dA * dB)
    if role == "classical_map":
        return (dB, dA)
    return (dA * dB, dA * dB)


def _shape(m: np.ndarray, shape, name: str) -> None:
    rows, cols = shape
    if (rows is not None and m.shape[0] != rows) or (cols is not None and m.shape[1] != cols):
        raise DimensionMismatch(f"{name} has shape {m.shape}, expected {shape}")


def _fields(mf: MatrixFile, names) -> dict:
    if not isinstance(mf.data, dict):
        raise ParseError(f"{mf.kind} data must be an object of named matrices")
    missing = [n for n in names if n not in mf.data]
    if missing:
        raise ParseError(f"{mf.kind} data is missing {missing}")
    return {n: decode_matrix(mf.data[n]) for n in names}


# -- converters ---------------------------------------------------------------

def from_superop(L: np.ndarray, d_A: int, d_B: int, picture: str) -> MatrixFile:
    return MatrixFile("superop", {"d_A": d_A, "d_B": d_B}, encode_matrix(L), {"picture": picture})


def from_supermap(g: SupermapGen) -> MatrixFile:
    return MatrixFile("supermap_gen", {"d_A": g.d_A, "d_B": g.d_B}, encode_matrix(g.L_hat))


def to_supermap(mf: MatrixFile) -> SupermapGen:
    return SupermapGen(mf.dim("d_A"), mf.dim("d_B"), mf.matrix())


def from_semicausal_nf(nf: SemicausalNormalForm) -> MatrixFile:
    data = {n: encode_matrix(getattr(nf, n)) for n in ("U", "A", "B", "K_A", "H_B")}
    return MatrixFile("normal_form_semicausal", {"d_A": nf.d_A, "d_B": nf.d_B, "d_E": nf.d_E}, data)


def to_semicausal_nf(mf: MatrixFile) -> SemicausalNormalForm:
    f = _fields(mf, ("U", "A", "B", "K_A", "H_B"))
    return SemicausalNormalForm(mf.dim("d_A"), mf.dim("d_B"), mf.dim("d_E"), **f)


def from_superchannel_nf(nf: SuperchannelNormalForm) -> MatrixFile:
    data = {n: encode_matrix(getattr(nf, n)) for n in ("U", "A", "B", "K_A", "H_B")}
    dims = {"d_A": nf.d_A, "d_B": nf.d_B, "d_E": nf.d_E}
    return MatrixFile("normal_form_superchannel", dims, data, {"sigma_index": nf.sigma_index})


def to_superchannel_nf(mf: MatrixFile) -> SuperchannelNormalForm:
    f = _fields(mf, ("U", "A", "B", "K_A", "H_B"))
    sigma = mf.meta.get("sigma_index", 0)
    if not isinstance(sigma, int):
        raise ParseError("meta.sigma_index must be an integer")
    return SuperchannelNormalForm(mf.dim("d_A"), mf.dim("d_B"), mf.dim("d_E"), sigma, **f)


def from_classical_nf(nf: ClassicalGenNF) -> MatrixFile:
    data = {"U": encode_matrix(nf.U, real=True), "A": encode_matrix(nf.A, real=True),
            "K_A": encode_matrix(nf.K_A[None, :], real=True),
            "B_list": [encode_matrix(b, real=True) for b in nf.B_list]}
    return MatrixFile("classical_gen_nf", {"d_A": nf.d_A, "d_B": nf.d_B, "d_E": nf.d_E},
                      data, {"picture": nf.picture})


def to_classical_nf(mf: MatrixFile) -> ClassicalGenNF:
    f = _fields(mf, ("U", "A", "K_A"))
    if not isinstance(mf.data.get("B_list"), list):
        raise ParseError("classical_gen_nf data needs a B_list array")
    dA, dB, dE = mf.dim("d_A"), mf.dim("d_B"), mf.dim("d_E")
    B_list = [decode_matrix(b) for b in mf.data["B_list"]]
    if len(B_list) != dA or any(b.shape != (dB, dB) for b in B_list):
        raise DimensionMismatch("B_list must hold d_A matrices of size d_B x d_B")
    K_A = f["K_A"].reshape(-1)
    if K_A.size != dA:
        raise DimensionMismatch("K_A must have d_A entries")
    picture = mf.meta.get("picture", "row")
    row = picture == "row"
    _shape(f["A"], (dA, dA * dE) if row else (dA * dE, dA), "A")
    _shape(f["U"], (dE * dB, dB) if row else (dB, dE * dB), "U")
    return ClassicalGenNF(dE, f["U"].real, f["A"].real, K_A.real, tuple(b.real for b in B_list), picture)


def from_matrix(m: np.ndarray, dims: dict, real: bool = False, meta: dict | None = None) -> MatrixFile:
    kind = "real_matrix" if real else "complex_matrix"
    return MatrixFile(kind, dict(dims), encode_matrix(m, real=real), dict(meta or {}))


def finite_json_number(x: float):
    """JSON has no infinities; map them to strings for reports."""
    return x if math.isfinite(x) else str(x)
