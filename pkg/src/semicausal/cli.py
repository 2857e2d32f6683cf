"""Command line front end: ``semicausal check|extract|synthesize|evolve|demo``.

Exit codes: 0 pass, 1 criteria failed, 2 parse error, 3 dimension error,
4 invariant violation (and any other library error).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .choi import Superop, dual_superop, is_cp, is_tp, superop_to_choi
from .classical_semicausal import (COL, ROW, check_classical_generator,
                                   check_classical_superchannel_generator,
                                   decompose_classical_generator, random_classical_nf,
                                   superchannel_generator_classical,
                                   synthesize_classical_generator)
from .errors import CheckFailed, DimensionMismatch, SemicausalError
from .matrixfile import (MatrixFile, ParseError, finite_json_number, from_classical_nf,
                         from_matrix, from_semicausal_nf, from_superchannel_nf, from_superop,
                         from_supermap, to_classical_nf, to_semicausal_nf,
                         to_superchannel_nf, to_supermap)
from .quantum_semicausal import (HEISENBERG, SCHRODINGER, check_semicausal_generator,
                                 extract_normal_form, random_semicausal_nf,
                                 synthesize_semicausal)
from .scenarios import SCENARIOS
from .superchannel import (PRESELECTING, SUPERCHANNEL, check_superchannel_generator,
                           extract_superchannel_nf, random_superchannel_nf,
                           synthesize_superchannel_generator)
from .tensor_linalg import DEFAULT_REL_TOL, BipartiteSystem, expm, flip

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_DIMS, EXIT_INVARIANT = 0, 1, 2, 3, 4
CLASSICAL_SUPERMAP_ROLE = "classical_supermap_gen"
TOL_ENV = "SEMICAUSAL_TOL"


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ParseError):
        return EXIT_PARSE
    if isinstance(exc, DimensionMismatch):
        return EXIT_DIMS
    if isinstance(exc, CheckFailed):
        return EXIT_FAIL
    return EXIT_INVARIANT


def relative_tol(arg: float | None) -> float:
    """``--tol`` wins over ``$SEMICAUSAL_TOL``, which wins over the library default."""
    if arg is not None:
        return arg
    env = os.environ.get(TOL_ENV)
    if env:
        try:
            return float(env)
        except ValueError:
            raise ParseError(f"{TOL_ENV}={env!r} is not a number") from None
    return DEFAULT_REL_TOL


def _classical_abs_tol(m: np.ndarray, rel: float) -> float:
    return rel * (1.0 + float(np.abs(m).max(initial=0.0)))


def _dims(mf: MatrixFile) -> BipartiteSystem:
    return BipartiteSystem(mf.dim("d_A"), mf.dim("d_B"))


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        return finite_json_number(float(x))
    if isinstance(x, np.integer):
        return int(x)
    return x


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(_jsonable(obj), indent=1, sort_keys=True) + "\n"


# -- check --------------------------------------------------------------------

def _quantum_picture(mf: MatrixFile, arg: str | None) -> str:
    picture = arg or mf.meta.get("picture", HEISENBERG)
    if picture not in (HEISENBERG, SCHRODINGER):
        raise ParseError(f"picture {picture!r} is not valid for a superop")
    return picture


def _classical_picture(mf: MatrixFile, arg: str | None) -> str:
    picture = arg or mf.meta.get("picture", ROW)
    if picture not in (ROW, COL):
        raise ParseError(f"picture {picture!r} is not valid for a classical generator")
    return picture


def run_check(mf: MatrixFile, picture: str | None, flavor: str, rel: float) -> dict:
    """Dispatch on the file kind and return a report dictionary with ``passed``."""
    kind = mf.kind
    if kind == "normal_form_semicausal":
        nf = to_semicausal_nf(mf)
        L, _ = synthesize_semicausal(nf, HEISENBERG)
        mf = from_superop(L, nf.d_A, nf.d_B, HEISENBERG)
        kind = mf.kind
    elif kind == "normal_form_superchannel":
        nf = to_superchannel_nf(mf)
        mf = from_supermap(synthesize_superchannel_generator(nf, flavor))
        kind = mf.kind
    elif kind == "classical_gen_nf":
        nf = to_classical_nf(mf)
        q = synthesize_classical_generator(nf, BipartiteSystem(nf.d_A, nf.d_B))
        mf = from_matrix(q, {"d_A": nf.d_A, "d_B": nf.d_B}, real=True, meta={"picture": nf.picture})
        kind = mf.kind

    if kind == "superop":
        pic = _quantum_picture(mf, picture)
        rep = check_semicausal_generator(mf.matrix(), _dims(mf), pic, rel_tol=rel)
        return dict(rep.summary(), check="semicausal_generator", picture=pic)
    if kind == "supermap_gen":
        rep = check_superchannel_generator(to_supermap(mf), rel_tol=rel)
        summary = rep.summary()
        summary["passed"] = bool(rep.verdicts[flavor])
        return dict(summary, check="supermap_generator", flavor=flavor)
    if kind == "real_matrix":
        m = mf.matrix().real
        dims = _dims(mf)
        tol = _classical_abs_tol(m, rel)
        if mf.meta.get("role") == CLASSICAL_SUPERMAP_ROLE:
            rep = check_classical_superchannel_generator(m, dims, tol)
            key = "preselecting" if flavor == PRESELECTING else None
            summary = rep.summary()
            summary["passed"] = bool(rep.verdicts[key]) if key else rep.passed
            return dict(summary, check="classical_supermap_generator", flavor=flavor)
        pic = _classical_picture(mf, picture)
        rep = check_classical_generator(m, dims, pic, tol)
        return dict(rep.summary(), check="classical_generator", picture=pic)
    raise ParseError(f"cannot check a file of kind {mf.kind!r}")


def _check_one(path: str, args, rel: float) -> tuple[int, dict]:
    start = time.perf_counter()
    try:
        mf = MatrixFile.read(path)
        report = run_check(mf, args.picture, args.flavor, rel)
        code = EXIT_OK if report["passed"] else EXIT_FAIL
    except SemicausalError as exc:
        code = exit_code_for(exc)
        report = {"passed": False, "error": type(exc).__name__, "message": str(exc)}
    report["input"] = path
    report["exit_code"] = code
    report["wall_time_s"] = time.perf_counter() - start
    return code, report


def cmd_check(args) -> int:
    rel = relative_tol(args.tol)
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(lambda p: _check_one(p, args, rel), args.inputs))
    reports = [r for _, r in results]
    _emit(_dump(reports[0] if len(reports) == 1 else reports), args.out)
    return max(code for code, _ in results)


# -- extract ------------------------------------------------------------------

def _rel_err(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / max(1.0, np.linalg.norm(b)))


def run_extract(mf: MatrixFile, picture: str | None, flavor: str, rel: float) -> tuple[MatrixFile, dict]:
    report = run_check(mf, picture, flavor, rel)
    if not report["passed"]:
        raise CheckFailed("input does not pass the check; nothing extracted", report)
    if mf.kind == "superop":
        pic = report["picture"]
        L = mf.matrix()
        L_h = L if pic == HEISENBERG else dual_superop(L)
        nf, trace = extract_normal_form(L_h, _dims(mf))
        L2, _ = synthesize_semicausal(nf, pic)
        out = from_semicausal_nf(nf)
        extra = {"round_trip_residual": _rel_err(L2, L), "d_E": nf.d_E,
                 "lstsq_residual": trace.lstsq_residual}
    elif mf.kind == "supermap_gen":
        g = to_supermap(mf)
        nf = extract_superchannel_nf(g)
        g2 = synthesize_superchannel_generator(nf, PRESELECTING)
        out = from_superchannel_nf(nf)
        extra = {"round_trip_residual": _rel_err(g2.L_hat, g.L_hat), "d_E": nf.d_E,
                 "trace_condition_residual": nf.trace_condition_residual()}
    elif mf.kind == "real_matrix":
        dims = _dims(mf)
        m = mf.matrix().real
        tol = _classical_abs_tol(m, rel)
        if mf.meta.get("role") == CLASSICAL_SUPERMAP_ROLE:
            # decompose the Choi-vector form as a column-picture generator
            perm = flip(dims.d_B, dims.d_A).real
            target = perm @ m @ perm.T
            nf = decompose_classical_generator(target, dims, COL, tol)
        else:
            target = m
            nf = decompose_classical_generator(m, dims, report["picture"], tol)
        q2 = synthesize_classical_generator(nf, dims)
        out = from_classical_nf(nf)
        extra = {"round_trip_residual": _rel_err(q2, target), "d_E": nf.d_E}
    else:
        raise ParseError(f"cannot extract from a file of kind {mf.kind!r}")
    report.update(extra)
    return out, report


def cmd_extract(args) -> int:
    start = time.perf_counter()
    rel = relative_tol(args.tol)
    mf = MatrixFile.read(args.input)
    out, report = run_extract(mf, args.picture, args.flavor, rel)
    out.write(args.out)
    report["wall_time_s"] = time.perf_counter() - start
    report["input"], report["output"] = args.input, args.out
    sys.stdout.write(_dump(report))
    return EXIT_OK


# -- synthesize ---------------------------------------------------------------

def parse_dims(text: str) -> tuple[int, int, int]:
    try:
        parts = [int(p) for p in text.split(",")]
    except ValueError:
        raise ParseError(f"--dims expects integers like 2,2 or 2,2,4, got {text!r}") from None
    if len(parts) not in (2, 3) or min(parts) < 1:
        raise DimensionMismatch(f"--dims expects d_A,d_B[,d_E] >= 1, got {text!r}")
    return parts[0], parts[1], parts[2] if len(parts) == 3 else 2


def run_synthesize(kind: str, dims: tuple[int, int, int] | None, seed: int | None,
                   nf_file: MatrixFile | None, flavor: str, picture: str | None) -> MatrixFile:
    if (seed is None) == (nf_file is None):
        raise ParseError("give exactly one of --seed or --nf")
    if seed is not None and dims is None:
        raise ParseError("--seed needs --dims")
    dA, dB, dE = dims if dims else (None, None, None)
    if kind == "semicausal":
        pic = picture or HEISENBERG
        nf = to_semicausal_nf(nf_file) if nf_file else random_semicausal_nf(dA, dB, dE, seed)
        L, _ = synthesize_semicausal(nf, pic)
        return from_superop(L, nf.d_A, nf.d_B, pic)
    if kind == "superchannel":
        nf = to_superchannel_nf(nf_file) if nf_file else random_superchannel_nf(dA, dB, dE, seed, flavor)
        return from_supermap(synthesize_superchannel_generator(nf, flavor))
    if kind == "classical":
        pic = picture or (nf_file.meta.get("picture", ROW) if nf_file else ROW)
        nf = to_classical_nf(nf_file) if nf_file else random_classical_nf(dA, dB, dE, seed, pic)
        q = synthesize_classical_generator(nf, BipartiteSystem(nf.d_A, nf.d_B), pic)
        return from_matrix(q, {"d_A": nf.d_A, "d_B": nf.d_B}, real=True, meta={"picture": pic})
    if kind == "classical-superchannel":
        if nf_file:
            nf = to_classical_nf(nf_file)
        else:
            nf = random_classical_nf(dA, dB, dE, seed, COL, superchannel=flavor == SUPERCHANNEL)
        q_hat, _ = superchannel_generator_classical(nf, BipartiteSystem(nf.d_A, nf.d_B), flavor)
        return from_matrix(q_hat, {"d_A": nf.d_A, "d_B": nf.d_B}, real=True,
                           meta={"role": CLASSICAL_SUPERMAP_ROLE, "flavor": flavor})
    raise ParseError(f"unknown --kind {kind!r}")


def cmd_synthesize(args) -> int:
    dims = parse_dims(args.dims) if args.dims else None
    nf_file = MatrixFile.read(args.nf) if args.nf else None
    mf = run_synthesize(args.kind, dims, args.seed, nf_file, args.flavor, args.picture)
    _emit(mf.dumps(), args.out)
    return EXIT_OK


# -- evolve -------------------------------------------------------------------

def parse_times(text: str) -> list[float]:
    try:
        times = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ParseError(f"--times expects comma-separated numbers, got {text!r}") from None
    if not times or any(not np.isfinite(t) or t < 0 for t in times):
        raise ParseError("--times must list finite nonnegative numbers")
    return times


def _psd_min(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min(initial=0.0))


def run_evolve(gen: MatrixFile, init: MatrixFile, times: list[float],
               verify: bool, tol: float) -> tuple[list[MatrixFile], list[dict]]:
    """Trajectory files plus per-time verification rows."""
    if (gen.dims.get("d_A"), gen.dims.get("d_B")) != (init.dims.get("d_A"), init.dims.get("d_B")):
        raise DimensionMismatch("generator and initial file have different dims")
    dims = _dims(gen)
    d, dA, dB = dims.dim, dims.d_A, dims.d_B
    x0 = init.matrix()
    frames, checks = [], []
    if gen.kind == "superop":
        picture = gen.meta.get("picture", HEISENBERG)
        if x0.shape != (d, d):
            raise DimensionMismatch(f"initial operator must be {d}x{d}")
        L = gen.matrix()
        # trace preservation is only asserted for generators that have it
        L_s = L if picture == SCHRODINGER else dual_superop(L)
        conservative = np.abs(np.eye(d).reshape(-1).conj() @ L_s).max(initial=0.0) <= tol
        for t in times:
            prop = expm(L, t)
            x = (prop @ x0.reshape(-1)).reshape(d, d)
            schr = prop if picture == SCHRODINGER else dual_superop(prop)
            s = Superop(d, d, superop_to_choi(schr, d, d))
            row = {"t": t, "min_choi_eig": is_cp(s)[1], "tp_residual": is_tp(s)[1]}
            row["ok"] = row["min_choi_eig"] >= -tol and (not conservative or row["tp_residual"] <= tol)
            frames.append(from_matrix(x, dims_dict(dA, dB), meta={"role": "state", "t": t}))
            checks.append(row)
    elif gen.kind == "supermap_gen":
        if x0.shape != (d, d):
            raise DimensionMismatch(f"initial channel Choi matrix must be {d}x{d}")
        L_hat = gen.matrix()
        for t in times:
            c = (expm(L_hat, t) @ x0.reshape(-1)).reshape(d, d)
            s = Superop(dA, dB, c)
            row = {"t": t, "min_choi_eig": is_cp(s)[1], "tp_residual": is_tp(s)[1]}
            row["ok"] = row["min_choi_eig"] >= -tol and row["tp_residual"] <= tol
            frames.append(from_matrix(c, dims_dict(dA, dB), meta={"role": "channel_choi", "t": t}))
            checks.append(row)
    elif gen.kind == "real_matrix":
        q = gen.matrix().real
        if gen.meta.get("role") == CLASSICAL_SUPERMAP_ROLE:
            if x0.shape != (dB, dA):
                raise DimensionMismatch(f"initial classical map must be {dB}x{dA}")
            for t in times:
                m = (expm(q, t).real @ x0.real.reshape(-1)).reshape(dB, dA)
                row = {"t": t, "min_entry": float(m.min()),
                       "column_sum_residual": float(np.abs(m.sum(axis=0) - 1).max())}
                row["ok"] = row["min_entry"] >= -tol and row["column_sum_residual"] <= tol
                frames.append(from_matrix(m, dims_dict(dA, dB), real=True,
                                          meta={"role": "classical_map", "t": t}))
                checks.append(row)
        else:
            picture = gen.meta.get("picture", ROW)
            p0 = x0.real.reshape(-1)
            sums = q.sum(axis=1) if picture == ROW else q.sum(axis=0)
            conservative = np.abs(sums).max(initial=0.0) <= tol
            if p0.size != d:
                raise DimensionMismatch(f"initial distribution must have {d} entries")
            for t in times:
                prop = expm(q, t).real
                p = p0 @ prop if picture == ROW else prop @ p0
                row = {"t": t, "min_entry": float(p.min()),
                       "sum_residual": float(abs(p.sum() - p0.sum()))}
                row["ok"] = row["min_entry"] >= -tol and (not conservative or row["sum_residual"] <= tol)
                frames.append(from_matrix(p[:, None], dims_dict(dA, dB), real=True,
                                          meta={"role": "state", "t": t}))
                checks.append(row)
    else:
        raise ParseError(f"cannot evolve with a file of kind {gen.kind!r}")
    if not verify:
        for row in checks:
            row.pop("ok")
    return frames, checks


def dims_dict(d_A: int, d_B: int) -> dict:
    return {"d_A": d_A, "d_B": d_B}


def read_trajectory(text: str) -> list[MatrixFile]:
    try:
        items = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(items, list):
        raise ParseError("a trajectory is a JSON array of matrix files")
    return [MatrixFile.from_dict(it) for it in items]


def cmd_evolve(args) -> int:
    gen = MatrixFile.read(args.generator)
    init = MatrixFile.read(args.initial)
    times = parse_times(args.times)
    tol = 1e-8 if args.tol is None else args.tol
    frames, checks = run_evolve(gen, init, times, args.verify, tol)
    _emit(json.dumps([f.to_dict() for f in frames], indent=1, sort_keys=True) + "\n", args.out)
    if args.verify:
        bad = [row["t"] for row in checks if not row["ok"]]
        sys.stderr.write(_dump({"verify": checks, "failed_times": bad}))
        if bad:
            sys.stderr.write("verification failed at t = " + ", ".join(f"{t:g}" for t in bad) + "\n")
            return EXIT_FAIL
    return EXIT_OK


# -- demo ---------------------------------------------------------------------

def format_rows(name: str, rows) -> str:
    width = max(len(r.quantity) for r in rows)
    lines = [f"== {name} ==", f"{'quantity':<{width}}  {'value':>12}  {'threshold':>10}  status"]
    for r in rows:
        status = "ok" if r.ok else "FAIL"
        lines.append(f"{r.quantity:<{width}}  {r.value:>12.4e}  {r.threshold:>10.1e}  {status}")
    return "\n".join(lines) + "\n"


def cmd_demo(args) -> int:
    rows = SCENARIOS[args.name]()
    sys.stdout.write(format_rows(args.name, rows))
    return EXIT_OK if all(r.ok for r in rows) else EXIT_FAIL


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semicausal",
                                description="Check, extract, synthesize and evolve semicausal generators.")
    sub = p.add_subparsers(dest="command", required=True)
    tol_help = f"relative tolerance (default ${TOL_ENV} or {DEFAULT_REL_TOL:g})"

    c = sub.add_parser("check", help="test a generator file against the criteria for its kind")
    c.add_argument("inputs", nargs="+")
    c.add_argument("--picture", choices=[HEISENBERG, SCHRODINGER, ROW, COL])
    c.add_argument("--flavor", choices=[PRESELECTING, SUPERCHANNEL], default=SUPERCHANNEL)
    c.add_argument("--tol", type=float, help=tol_help)
    c.add_argument("--out")
    c.add_argument("--jobs", type=int, default=1)
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("extract", help="recover normal-form operators from a valid generator")
    e.add_argument("input")
    e.add_argument("--out", required=True, help="where to write the normal-form file")
    e.add_argument("--picture", choices=[HEISENBERG, SCHRODINGER, ROW, COL])
    e.add_argument("--flavor", choices=[PRESELECTING, SUPERCHANNEL], default=PRESELECTING)
    e.add_argument("--tol", type=float, help=tol_help)
    e.set_defaults(func=cmd_extract)

    s = sub.add_parser("synthesize", help="build a generator from a normal form or a seed")
    s.add_argument("--kind", required=True,
                   choices=["semicausal", "superchannel", "classical", "classical-superchannel"])
    s.add_argument("--dims", help="d_A,d_B[,d_E]; d_E defaults to 2")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--seed", type=int)
    src.add_argument("--nf", help="normal-form file")
    s.add_argument("--flavor", choices=[PRESELECTING, SUPERCHANNEL], default=SUPERCHANNEL)
    s.add_argument("--picture", choices=[HEISENBERG, SCHRODINGER, ROW, COL])
    s.add_argument("--out")
    s.set_defaults(func=cmd_synthesize)

    v = sub.add_parser("evolve", help="apply exp(tL) to an initial state, channel or stochastic map")
    v.add_argument("generator")
    v.add_argument("initial")
    v.add_argument("--times", default="0,1")
    v.add_argument("--verify", action="store_true",
                   help="assert positivity at each time, and normalization when the "
                        "generator preserves it (always for channels and stochastic maps)")
    v.add_argument("--tol", type=float, help="absolute slack for --verify (default 1e-8)")
    v.add_argument("--out")
    v.set_defaults(func=cmd_evolve)

    d = sub.add_parser("demo", help="run a worked scenario and print a residual table")
    d.add_argument("name", choices=sorted(SCENARIOS))
    d.set_defaults(func=cmd_demo)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CheckFailed as exc:
        payload = {"passed": False, "error": "CheckFailed", "message": str(exc)}
        if isinstance(exc.report, dict):
            payload["report"] = exc.report
        elif exc.report is not None and hasattr(exc.report, "summary"):
            payload["report"] = exc.report.summary()
        sys.stdout.write(_dump(payload))
        return EXIT_FAIL
    except SemicausalError as exc:
        sys.stderr.write(f"semicausal: {type(exc).__name__}: {exc}\n")
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
