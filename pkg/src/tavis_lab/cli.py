"""Command-line entry point: ``tavis-lab <command> [options]``.

Every command writes deterministic JSON (floats at 17 significant digits)
or RFC-4180 CSV with LF line endings. Exit status is 0 on success, 2 for
invalid input and 3 for a numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import approx, dicke, dynamics, oracle, validity
from .exact import NumericalError, full_eigensystem, solve_spectrum, Spectrum
from .qnum import BlockSpec, DomainError, HalfInt

SCHEMA_ID = "tavis-lab/result.v1"
EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3

SPECTRUM_METHODS = ("exact", "oracle", "diffeq", "avgfield", "avgfield-poly", "modtlm",
                    "modtlm-corrected", "avgtlm", "detuned")
STATE_METHODS = ("exact", "diffeq", "avgfield", "modtlm")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    r: HalfInt | None = None
    c: HalfInt | None = None
    beta: float = 0.0
    kappa: float = 1.0
    phi: float = 0.0
    method: str = "exact"
    output: str = "json"
    out_path: str | None = None
    parallelism: int = 1
    extra: dict = field(default_factory=dict)

    def block(self) -> BlockSpec:
        if self.r is None or self.c is None:
            raise UsageError("--r and --c are required")
        return BlockSpec(self.r, self.c, self.beta, self.kappa, self.phi)


# ---------------------------------------------------------------- formatting

def fmt_float(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise NumericalError(f"non-finite value {x!r} in output")
    if x == 0.0:
        x = 0.0  # drop the sign of negative zero
    return format(x, ".17g")


def to_json(obj, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}{_json_str(str(k))}: {to_json(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(to_json(v) for v in seq) + "]"
        return "[\n" + ",\n".join(inner + to_json(v, indent + 1) for v in seq) + "\n" + pad + "]"
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    return _json_str(str(obj))


def _json_str(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch in '"\\':
            out.append("\\" + ch)
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else fmt_float(v) if isinstance(v, (float, np.floating)) else v
                    for v in row])
    return buf.getvalue()


def _halfint_obj(h: HalfInt) -> dict:
    return {"doubled": h.doubled, "decimal": h.decimal_str(), "fraction": h.fraction_str()}


def _envelope(cfg: RunConfig, params: dict, result: dict) -> dict:
    return {"schema": SCHEMA_ID, "command": cfg.command, "params": params, "result": result}


def _block_params(cfg: RunConfig, spec: BlockSpec) -> dict:
    return {"r": _halfint_obj(spec.r), "c": _halfint_obj(spec.c), "beta": spec.beta,
            "kappa": spec.kappa_abs, "phi": spec.phi, "method": cfg.method}


# ---------------------------------------------------------------- commands

def _spectrum_for(spec: BlockSpec, method: str) -> Spectrum:
    if method == "exact":
        if spec.dim > 120:
            return full_eigensystem(spec).spectrum
        return solve_spectrum(spec)
    if method == "oracle":
        q = oracle.sturm_eigenvalues(oracle.build_tridiagonal(spec))
        return Spectrum(q, spec.c, spec.kappa_abs, "oracle")
    builders = {
        "diffeq": approx.diffeq,
        "avgfield": approx.avgfield_closed,
        "avgfield-poly": approx.avgfield_spectrum_poly,
        "modtlm": approx.modtlm,
        "modtlm-corrected": lambda s: approx.modtlm(s, corrected=True),
        "avgtlm": approx.avgtlm_spectrum,
        "detuned": approx.detuned,
    }
    return builders[method](spec).spectrum


def cmd_spectrum(cfg: RunConfig) -> str:
    spec = cfg.block()
    sp = _spectrum_for(spec, cfg.method)
    if cfg.output == "csv":
        rows = [(j, float(q), float(l)) for j, (q, l) in enumerate(zip(sp.q, sp.lam))]
        return to_csv(["j", "q", "lambda"], rows)
    result = {"r2": spec.r.doubled, "c2": spec.c.doubled, "beta": spec.beta, "dim": spec.dim,
              "method": sp.method, "q": [float(x) for x in sp.q], "lambda": [float(x) for x in sp.lam]}
    return to_json(_envelope(cfg, _block_params(cfg, spec), result)) + "\n"


def _state_for(spec: BlockSpec, j: int, method: str):
    if method == "exact":
        es = full_eigensystem(spec)
        if not 0 <= j < spec.dim:
            raise DomainError(f"j={j} outside 0..{spec.dim - 1}")
        return es.vectors[j], float(es.spectrum.q[j])
    if method == "diffeq":
        return approx.diffeq_vector(spec, j), approx.diffeq_q(spec, j)
    if method == "avgfield":
        q = (spec.c.value() - approx.avgfield_lambda_closed(spec, j)) / spec.kappa_abs
        return approx.avgfield_state(spec, j), q
    if method == "modtlm":
        q = (spec.c.value() - approx.modtlm_lambda(spec, j)) / spec.kappa_abs
        return approx.modtlm_state(spec, j), q
    raise UsageError(f"eigvec supports methods {', '.join(STATE_METHODS)}")


def cmd_eigvec(cfg: RunConfig) -> str:
    spec = cfg.block()
    j = cfg.extra.get("j")
    if j is None:
        raise UsageError("--j is required")
    vec, q = _state_for(spec, j, cfg.method)
    n = vec.photon_numbers
    p = vec.values ** 2
    n_mean = float(p @ n)
    sigma2 = float(p @ n ** 2 - n_mean ** 2)
    m_mean = spec.c.value() - n_mean
    if cfg.output == "csv":
        rows = [("meta", None, None, None, q, m_mean, sigma2)]
        rows += [(k, int(nn), float(a), float(a * a), None, None, None)
                 for k, (nn, a) in enumerate(zip(n, vec.values))]
        return to_csv(["row", "n", "A_n", "abs2", "q_j", "m_mean", "sigma2"], rows)
    result = {"j": j, "q_j": q, "m_mean": m_mean, "sigma2": sigma2, "n_min": int(vec.n_min),
              "amplitudes": [float(a) for a in vec.values]}
    params = dict(_block_params(cfg, spec), j=j)
    return to_json(_envelope(cfg, params, result)) + "\n"


def _parse_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}") from exc


def _frange(start: Fraction, stop: Fraction, step: Fraction) -> list[Fraction]:
    if step <= 0:
        raise UsageError("--step must be positive")
    out, x = [], start
    while x <= stop:
        out.append(x)
        x += step
    return out


def _sweep_point(args):
    r2, c2, beta, kappa, js = args
    spec = BlockSpec(HalfInt(r2), HalfInt(c2), beta, kappa)
    sp = _spectrum_for(spec, "exact")
    vecs = None
    rows = []
    for j in js:
        if j >= spec.dim:
            continue
        q_d = q_f = q_t = None
        try:
            q_d = approx.diffeq_q(spec, j)
        except DomainError:
            pass
        if beta == 0.0 and spec.c.doubled > 0 and j <= spec.r.doubled:
            q_f = (spec.c.value() - approx.avgfield_lambda_closed(spec, j)) / kappa
        if beta == 0.0 and spec.c.doubled <= spec.r.doubled:
            q_t = (spec.c.value() - approx.modtlm_lambda(spec, j)) / kappa
        if vecs is None:
            vecs = full_eigensystem(spec).vectors
        weight = float(np.max(vecs[j].values ** 2))
        rows.append((j, float(sp.q[j]), q_d, q_f, q_t, weight))
    return rows


def cmd_sweep(cfg: RunConfig) -> str:
    vary = cfg.extra["vary"]
    js = _parse_list(cfg.extra.get("jlist") or "0")
    if cfg.r is None:
        raise UsageError("--r is required")
    if vary == "c":
        start, stop, step = (HalfInt.of(cfg.extra[k]).fraction() for k in ("start", "stop", "step"))
        if cfg.c is not None:
            raise UsageError("--c conflicts with --vary c")
        points = [(cfg.r.doubled, HalfInt.of(x).doubled, cfg.beta, cfg.kappa, js)
                  for x in _frange(start, stop, step)]
        labels = [float(x) for x in _frange(start, stop, step)]
    else:
        if cfg.c is None:
            raise UsageError("--c is required for --vary beta")
        start, stop, step = (Fraction(str(cfg.extra[k])) for k in ("start", "stop", "step"))
        betas = [float(b) for b in _frange(start, stop, step)]
        points = [(cfg.r.doubled, cfg.c.doubled, b, cfg.kappa, js) for b in betas]
        labels = betas
    for r2, c2, b, k, _ in points:
        BlockSpec(HalfInt(r2), HalfInt(c2), b, k)
    if cfg.parallelism > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=cfg.parallelism) as pool:
            results = list(pool.map(_sweep_point, points))
    else:
        results = [_sweep_point(p) for p in points]
    header = [vary, "j", "q_exact", "q_diffeq", "q_avgfield", "q_modtlm", "max_weight"]
    rows = [(lab,) + row for lab, block in zip(labels, results) for row in block]
    if cfg.output == "csv":
        return to_csv(header, rows)
    result = {"columns": header, "rows": [list(r) for r in rows]}
    params = {"r": _halfint_obj(cfg.r), "vary": vary, "beta": cfg.beta, "kappa": cfg.kappa,
              "jlist": js, "method": "exact"}
    return to_json(_envelope(cfg, params, result)) + "\n"


def cmd_dicke(cfg: RunConfig) -> str:
    N = cfg.extra.get("N")
    if N is None:
        raise UsageError("--N is required")
    e = dicke.ThermalEnsemble(N, cfg.extra.get("beta_t", 0.0))
    closed = {"m_mean": dicke.thermal_inversion(e), "m_var": dicke.thermal_m_variance(e),
              "partition": dicke.partition_function(e)}
    m = cfg.extra.get("m")
    if m is not None:
        closed["r_r1_mean"] = dicke.mean_r_r1_given_m(N, m)
        closed["r_r1_var"] = dicke.var_r_r1_given_m(N, m)
    result = {"closed": closed}
    if N <= dicke.MAX_BRUTE_N:
        b = dicke.brute_thermal_stats(e)
        brute = {"m_mean": b.m_mean, "m_var": b.m_var, "partition": b.partition}
        if m is not None:
            m2 = HalfInt.of(m).doubled
            brute["r_r1_mean"] = b.r_r1_mean_by_m[m2]
            brute["r_r1_var"] = b.r_r1_var_by_m[m2]
        agree = all(abs(closed[k] - brute[k]) <= 1e-12 * max(1.0, abs(brute[k])) for k in brute)
        result["brute"] = brute
        result["agree"] = agree
    params = {"N": N, "beta_t": e.beta_t, "m": None if m is None else str(HalfInt.of(m))}
    if cfg.output == "csv":
        rows = [(k, float(v), float(result.get("brute", {}).get(k, float("nan")))
                 if "brute" in result else None) for k, v in closed.items()]
        return to_csv(["statistic", "closed", "brute"], rows)
    return to_json(_envelope(cfg, params, result)) + "\n"


def cmd_dynamics(cfg: RunConfig) -> str:
    x = cfg.extra
    times = np.linspace(0.0, x["t_max"], x["samples"])
    if x["path"] == "superradiant":
        if x["molecules"] != "all-excited" or x["field"] != "fock" or x["n0"] != 0:
            raise UsageError("the superradiant path needs all-excited molecules and an empty field")
        ts = dynamics.superradiant_vacuum_EmEp(x["N"], times, cfg.kappa, mixed_r=x["mixed_r"])
    else:
        fs = dynamics.FieldState(x["field"], n0=x["n0"], amplitude=x["alpha"], nbar=x["nbar"],
                                 cutoff=x["cutoff"])
        if x["molecules"] == "pure":
            ms = dynamics.MolecularState("pure", r=cfg.r, m=x["m"])
        else:
            ms = dynamics.MolecularState(x["molecules"], N=x["N"], beta_t=x["beta_t"])
        init = dynamics.InitialStateSpec(fs, ms, cfg.beta, cfg.kappa)
        if x["observable"] == "eminus":
            ts = dynamics.expectation_Eminus(init, times)
        else:
            ts = dynamics.expectation_EmEp(init, times)
    complex_vals = np.iscomplexobj(ts.values)
    if cfg.output == "csv":
        if complex_vals:
            rows = [(float(t), float(v.real), float(v.imag)) for t, v in zip(ts.times, ts.values)]
            return to_csv(["t", "re", "im"], rows)
        return to_csv(["t", "value"], [(float(t), float(v)) for t, v in zip(ts.times, ts.values)])
    result = {"observable": ts.observable, "time_unit": ts.time_unit,
              "prefactor_convention": ts.prefactor_convention, "t": [float(t) for t in ts.times]}
    if complex_vals:
        result["re"] = [float(v.real) for v in ts.values]
        result["im"] = [float(v.imag) for v in ts.values]
    else:
        result["value"] = [float(v) for v in ts.values]
    params = {k: (v if not isinstance(v, HalfInt) else str(v)) for k, v in sorted(x.items())}
    params.update(kappa=cfg.kappa, beta=cfg.beta)
    return to_json(_envelope(cfg, params, result)) + "\n"


def cmd_validity(cfg: RunConfig) -> str:
    spec = cfg.block()
    es = full_eigensystem(spec)
    dbl = validity.doubling_validity(spec, float(es.spectrum.q[0]))
    result = {"doubling": {"margin": dbl.margin, "satisfied": dbl.satisfied, "q0": dbl.detail["q0"]}}
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # small blocks: the margin itself is the report
            _, cub = validity.cubic_perturbed_q(spec, cfg.extra.get("j") or 0)
        result["cubic"] = {"margin": cub.margin, "satisfied": cub.satisfied, "alpha2": cub.detail["alpha2"]}
    except DomainError as exc:
        result["cubic"] = {"error": str(exc)}
    th = approx.decoupling_threshold(spec)
    result["thresholds"] = {"beta_high_c": th["beta_high_c"], "beta_low_c": th["beta_low_c"],
                            "uncoupled_state_index": th["uncoupled_state_index"]}
    if cfg.output == "csv":
        rows = [("doubling", dbl.margin, int(dbl.satisfied))]
        if "margin" in result["cubic"]:
            rows.append(("cubic", result["cubic"]["margin"], int(result["cubic"]["satisfied"])))
        return to_csv(["criterion", "margin", "satisfied"], rows)
    return to_json(_envelope(cfg, _block_params(cfg, spec), result)) + "\n"


COMMANDS = {"spectrum": cmd_spectrum, "eigvec": cmd_eigvec, "sweep": cmd_sweep,
            "dicke": cmd_dicke, "dynamics": cmd_dynamics, "validity": cmd_validity}


# ---------------------------------------------------------------- argument parsing

def _halfint_arg(text: str) -> HalfInt:
    try:
        return HalfInt.of(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--r", type=_halfint_arg, help='cooperation number, "12.5" or "25/2"')
    common.add_argument("--c", type=_halfint_arg, help="excitation number")
    common.add_argument("--beta", type=float, default=0.0, help="relative tuning")
    common.add_argument("--kappa", type=float, default=1.0, help="|kappa| = |gamma| / Omega")
    common.add_argument("--phi", type=float, default=0.0)
    common.add_argument("--j", type=int)
    common.add_argument("--method", default="exact")
    common.add_argument("--out", help="write here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--parallelism", type=int, default=1)

    p = argparse.ArgumentParser(prog="tavis-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="effective eigenvalues of one block")
    sub.add_parser("eigvec", parents=[common], help="one eigenvector with its observables")
    sw = sub.add_parser("sweep", parents=[common], help="spectra along a range of c or beta")
    sw.add_argument("--vary", choices=("c", "beta"), required=True)
    sw.add_argument("--start", required=True)
    sw.add_argument("--stop", required=True)
    sw.add_argument("--step", required=True)
    sw.add_argument("--jlist", default="0")
    dk = sub.add_parser("dicke", parents=[common], help="cooperation-number statistics")
    dk.add_argument("--N", type=int, required=True)
    dk.add_argument("--beta-t", type=float, default=0.0)
    dk.add_argument("--m", type=_halfint_arg)
    dy = sub.add_parser("dynamics", parents=[common], help="field observables in time")
    dy.add_argument("--N", type=int, default=1)
    dy.add_argument("--field", choices=("fock", "coherent", "thermal"), default="fock")
    dy.add_argument("--n0", type=int, default=0)
    dy.add_argument("--alpha", type=float, default=0.0)
    dy.add_argument("--nbar", type=float, default=0.0)
    dy.add_argument("--cutoff", type=int, default=0)
    dy.add_argument("--molecules", choices=("all-excited", "pure", "thermal"), default="all-excited")
    dy.add_argument("--m", type=_halfint_arg)
    dy.add_argument("--beta-t", type=float, default=0.0)
    dy.add_argument("--observable", choices=("emep", "eminus"), default="emep")
    dy.add_argument("--path", choices=("general", "superradiant"), default="general")
    dy.add_argument("--mixed-r", action="store_true")
    dy.add_argument("--t-max", type=float, default=10.0)
    dy.add_argument("--samples", type=int, default=101)
    sub.add_parser("validity", parents=[common], help="rotating-wave and continuum validity margins")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    base = {"r", "c", "beta", "kappa", "phi", "method", "format", "out", "parallelism", "command"}
    extra = {k: v for k, v in vars(ns).items() if k not in base}
    cfg = RunConfig(ns.command, ns.r, ns.c, ns.beta, ns.kappa, ns.phi, ns.method, ns.format,
                    ns.out, ns.parallelism, extra)
    if cfg.parallelism < 1:
        raise UsageError("--parallelism must be >= 1")
    if cfg.command == "spectrum" and cfg.method not in SPECTRUM_METHODS:
        raise UsageError(f"--method must be one of {', '.join(SPECTRUM_METHODS)}")
    if cfg.command == "eigvec" and cfg.method not in STATE_METHODS:
        raise UsageError(f"--method must be one of {', '.join(STATE_METHODS)}")
    if cfg.r is not None and cfg.c is not None:
        cfg.block()
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = config_from_args(ns)
        text = COMMANDS[cfg.command](cfg)
    except (UsageError, DomainError, ValueError, KeyError, TypeError) as exc:
        print(f"tavis-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"tavis-lab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if cfg.out_path:
        with open(cfg.out_path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
