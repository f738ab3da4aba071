"""Command-line interface.

Subcommands: simulate, estimate, certify, plan, figure2, validate.
Every option may also come from a JSON file given with ``--config`` (keys
are option names with underscores); explicit flags take precedence.

Exit codes: 0 ok, 2 invalid input, 3 design not informationally complete,
4 validation sweep flagged a cell.
"""

import argparse
import json
import math
import os
import sys

from . import __version__
from .bloch import is_physical, preset_state
from .confidence import (
    ErrorBudget,
    cls_confidence_level,
    confidence_level,
    closed_form_cl_k,
    figure2_curves,
    infidelity_preparation_bound,
    preparation_bound,
    required_samples,
)
from .errors import NotInformationallyComplete, TomographyError
from .estimators import estimate
from .io import (
    design_from_json,
    design_to_json,
    dumps,
    estimate_to_json,
    frequencies_from_csv,
    frequencies_to_csv,
    matrix_from_json,
    matrix_to_json,
    rows_to_csv,
)
from .loss import LossKind, loss as loss_fn, trace_distance
from .measurement import pauli_design, sample
from .validation import coverage_sweep, default_n_grid

EXIT_OK, EXIT_INPUT, EXIT_NOT_IC, EXIT_FLAGGED = 0, 2, 3, 4

DEFAULTS = {
    "simulate": {"qubits": 1, "eta": 1.0, "n": None, "state": "zero", "state_file": None, "seed": 0,
                 "out": None, "weighting": "trace"},
    "estimate": {"run": None, "freq": None, "design": None, "cls": False, "target": None,
                 "loss": ["hs", "trace", "infidelity"], "out": None, "max_iters": 10000, "tol": 1e-10},
    "certify": {"qubits": 1, "eta": 1.0, "delta": None, "N": None, "loss": "trace", "cls": False,
                "design": None, "target": None, "est": None, "xi": 0.0, "zeta": 0.0, "out": None},
    "plan": {"qubits": 1, "eta": 1.0, "delta": None, "loss": "trace", "target_cl": None},
    "figure2": {"qubits": [1, 2], "etas": [1.0, 0.9, 0.8], "delta": 0.07, "n_values": None,
                "points": 60, "loss": "trace", "out": None},
    "validate": {"qubits": [1, 2], "etas": [1.0, 0.9, 0.8], "delta": 0.07, "trials": 2000,
                 "states": ["mixed", "zero", "ghz"], "n_values": None, "seed": 0, "out": None,
                 "workers": 1, "losses": ["hs", "trace", "infidelity"]},
}


class UsageError(Exception):
    pass


def _parser():
    p = argparse.ArgumentParser(prog="tomocert", description="State tomography with finite-sample confidence levels.")
    p.add_argument("--version", action="version", version=f"tomocert {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", default=None, help="JSON file with option values")
        return sp

    sp = add("simulate", "simulate lossy Pauli tomography data")
    sp.add_argument("--qubits", type=int)
    sp.add_argument("--eta", type=float)
    sp.add_argument("--n", type=int, help="repetitions per measurement setting")
    sp.add_argument("--state", choices=["mixed", "zero", "ghz"])
    sp.add_argument("--state-file", help="JSON density matrix instead of a preset")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--weighting", choices=["none", "trace"])
    sp.add_argument("--out", help="output directory")

    sp = add("estimate", "compute LLS/ENM (and CLS) estimates from data")
    sp.add_argument("--run", help="directory written by simulate")
    sp.add_argument("--freq", help="frequency CSV (overrides --run)")
    sp.add_argument("--design", help="design sidecar JSON (overrides --run)")
    sp.add_argument("--cls", action="store_true", default=None)
    sp.add_argument("--target", help="JSON density matrix of the target state")
    sp.add_argument("--loss", nargs="+", choices=["hs", "trace", "infidelity"])
    sp.add_argument("--max-iters", type=int)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--out", help="output JSON path (default RUN/estimate.json)")

    sp = add("certify", "confidence level and preparation bounds")
    sp.add_argument("--qubits", type=int)
    sp.add_argument("--eta", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--N", type=int, help="total number of trials (defaults to the design's)")
    sp.add_argument("--loss", choices=["hs", "trace", "infidelity"])
    sp.add_argument("--cls", action="store_true", default=None)
    sp.add_argument("--design", help="design sidecar JSON instead of --qubits/--eta")
    sp.add_argument("--target", help="JSON density matrix of the target state")
    sp.add_argument("--est", help="estimate JSON written by 'estimate'")
    sp.add_argument("--xi", type=float, help="systematic error budget")
    sp.add_argument("--zeta", type=float, help="numerical error budget")
    sp.add_argument("--out", help="report JSON path")

    sp = add("plan", "smallest N reaching a target confidence level")
    sp.add_argument("--qubits", type=int)
    sp.add_argument("--eta", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--loss", choices=["hs", "trace", "infidelity"])
    sp.add_argument("--target-cl", type=float)

    sp = add("figure2", "closed-form confidence curves as CSV")
    sp.add_argument("--qubits", type=int, nargs="+")
    sp.add_argument("--etas", type=float, nargs="+")
    sp.add_argument("--delta", type=float)
    sp.add_argument("--n-values", type=int, nargs="+")
    sp.add_argument("--points", type=int)
    sp.add_argument("--loss", choices=["hs", "trace", "infidelity"])
    sp.add_argument("--out", help="CSV path (default: stdout)")

    sp = add("validate", "Monte Carlo coverage sweep")
    sp.add_argument("--qubits", type=int, nargs="+")
    sp.add_argument("--etas", type=float, nargs="+")
    sp.add_argument("--delta", type=float)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--states", nargs="+", choices=["mixed", "zero", "ghz"])
    sp.add_argument("--n-values", type=int, nargs="+")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--losses", nargs="+", choices=["hs", "trace", "infidelity"])
    sp.add_argument("--out", help="output directory")
    return p


def _resolve(args):
    cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"--config: cannot read {args.config}: {exc}") from None
    out = {}
    for key, default in DEFAULTS[args.command].items():
        val = getattr(args, key, None)
        out[key] = val if val is not None else cfg.get(key, default)
    return out


def _require(cfg, *keys):
    for k in keys:
        if cfg[k] is None:
            raise UsageError(f"--{k.replace('_', '-')} is required")


def _check_eta(eta, flag="--eta"):
    if not (0.0 <= eta <= 1.0):
        raise UsageError(f"{flag} must lie in [0, 1], got {eta}")


def _check_positive(cfg, key):
    if cfg[key] is not None and not cfg[key] > 0:
        raise UsageError(f"--{key.replace('_', '-')} must be positive, got {cfg[key]}")


def _metadata(argv):
    return {"tool": "tomocert", "version": __version__, "invocation": " ".join(["tomocert", *argv])}


def _header(argv):
    m = _metadata(argv)
    return [f"{m['tool']} {m['version']}", f"invocation: {m['invocation']}"]


def _write(path, text):
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _read_json(path, flag):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"{flag}: cannot read {path}: {exc}") from None


def cmd_simulate(cfg, argv):
    _require(cfg, "n", "out")
    _check_eta(cfg["eta"])
    _check_positive(cfg, "qubits")
    _check_positive(cfg, "n")
    k = cfg["qubits"]
    if cfg["state_file"]:
        rho = matrix_from_json(_read_json(cfg["state_file"], "--state-file"))
        state_name = os.path.basename(cfg["state_file"])
        if rho.shape != (2**k, 2**k):
            raise UsageError(f"--state-file: state has shape {rho.shape}, expected {2**k}x{2**k}")
        if not is_physical(rho):
            raise UsageError("--state-file: state is not a valid density matrix")
    else:
        state_name = cfg["state"]
        rho = preset_state(state_name, k)
    design = pauli_design(k, cfg["eta"], cfg["n"], weighting=cfg["weighting"])
    freq = sample(design, rho, cfg["seed"])
    out = cfg["out"]
    _write(os.path.join(out, "frequencies.csv"), frequencies_to_csv(design, freq, _header(argv)))
    sidecar = {
        "metadata": _metadata(argv),
        "qubits": k,
        "eta": cfg["eta"],
        "n_per_setting": cfg["n"],
        "seed": cfg["seed"],
        "state": {"name": state_name, "matrix": matrix_to_json(rho)},
        "design": design_to_json(design),
    }
    _write(os.path.join(out, "design.json"), dumps(sidecar))
    print(f"wrote {design.N} trials over {design.n_povms} settings to {out}")
    return EXIT_OK


def cmd_estimate(cfg, argv):
    run = cfg["run"]
    freq_path = cfg["freq"] or (os.path.join(run, "frequencies.csv") if run else None)
    design_path = cfg["design"] or (os.path.join(run, "design.json") if run else None)
    if not design_path or not os.path.exists(design_path):
        raise UsageError(f"design sidecar not found: {design_path}")
    if not freq_path or not os.path.exists(freq_path):
        raise UsageError(f"frequency CSV not found: {freq_path}")
    sidecar = _read_json(design_path, "--design")
    design = design_from_json(sidecar.get("design", sidecar))
    with open(freq_path) as fh:
        freq = frequencies_from_csv(design, fh.read())
    rec = estimate(design, freq, cls=bool(cfg["cls"]), max_iters=cfg["max_iters"], tol=cfg["tol"])
    doc = {"metadata": _metadata(argv), **estimate_to_json(rec)}
    if cfg["target"]:
        target = matrix_from_json(_read_json(cfg["target"], "--target"))
        dist = {}
        for name in cfg["loss"]:
            dist[name] = loss_fn(name, target, rec.rho_enm)
            print(f"{name}(target, ENM) = {dist[name]:.6g}")
        doc["target_distance_enm"] = dist
    out = cfg["out"] or os.path.join(run or ".", "estimate.json")
    _write(out, dumps(doc))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_certify(cfg, argv):
    _require(cfg, "delta")
    _check_positive(cfg, "delta")
    if cfg["design"]:
        sidecar = _read_json(cfg["design"], "--design")
        design = design_from_json(sidecar.get("design", sidecar))
    else:
        _check_eta(cfg["eta"])
        _check_positive(cfg, "qubits")
        design = pauli_design(cfg["qubits"], cfg["eta"], 1)
    _check_positive(cfg, "N")
    if cfg["xi"] < 0 or cfg["zeta"] < 0:
        raise UsageError("--xi and --zeta must be non-negative")
    budget = ErrorBudget(cfg["xi"], cfg["zeta"])
    N = cfg["N"]
    loss = LossKind.parse(cfg["loss"])
    delta = cfg["delta"]

    report = confidence_level(design, loss, delta, N)
    doc = {"metadata": _metadata(argv), "enm": report.to_dict(), "budget": {"xi": budget.xi, "zeta": budget.zeta}}
    print(f"N = {report.N}")
    print(f"CL[{loss.value}, ENM, delta={delta:g}] = {report.cl:.5f}")
    if cfg["cls"]:
        cls_rep = cls_confidence_level(design, loss, delta, N)
        doc["cls"] = cls_rep.to_dict()
        print(f"CL[{loss.value}, CLS, delta={delta:g}] = {cls_rep.cl:.5f}")

    if cfg["target"] or cfg["est"]:
        _require(cfg, "target", "est")
        target = matrix_from_json(_read_json(cfg["target"], "--target"))
        est_doc = _read_json(cfg["est"], "--est")
        use_cls = bool(cfg["cls"]) and "cls" in est_doc
        rho_est = matrix_from_json(est_doc["cls"]["rho_cls"] if use_cls else est_doc["rho_enm"])
        which = "CLS" if use_cls else "ENM"
        cl_for = (cls_confidence_level if use_cls else confidence_level)
        if loss is LossKind.INFIDELITY:
            dt = trace_distance(target, rho_est)
            inf_b, fid_b = infidelity_preparation_bound(dt, delta, budget)
            cl_t = cl_for(design, LossKind.TRACE, delta, N).cl
            doc["preparation"] = {
                "trace_distance_target_estimate": dt,
                "infidelity_bound": inf_b,
                "fidelity_bound": fid_b,
                "confidence_level": cl_t,
                "estimator": which,
            }
            print(f"trace(target, {which}) = {dt:.6g}")
            print(f"infidelity(target, prepared) <= {inf_b:.6g}  at CL[trace] = {cl_t:.5f}")
            print(f"fidelity(target, prepared) >= {fid_b:.6g}  at CL[trace] = {cl_t:.5f}")
        else:
            d_est = loss_fn(loss, target, rho_est)
            bound = preparation_bound(d_est, delta, loss, budget)
            cl_l = cl_for(design, loss, delta, N).cl
            doc["preparation"] = {
                "distance_target_estimate": d_est,
                "bound": bound,
                "confidence_level": cl_l,
                "estimator": which,
            }
            print(f"{loss.value}(target, {which}) = {d_est:.6g}")
            print(f"{loss.value}(target, prepared) <= {bound:.6g}  at CL = {cl_l:.5f}")
    if cfg["out"]:
        _write(cfg["out"], dumps(doc))
    return EXIT_OK


def cmd_plan(cfg, argv):
    _require(cfg, "delta", "target_cl")
    _check_eta(cfg["eta"])
    if cfg["eta"] == 0:
        raise UsageError("--eta must be positive for planning")
    _check_positive(cfg, "delta")
    t = cfg["target_cl"]
    if not 0 < t < 1:
        raise UsageError(f"--target-cl must lie in (0, 1), got {t}")
    k = cfg["qubits"]
    N = required_samples(k, cfg["eta"], cfg["delta"], cfg["loss"], t)
    cl = closed_form_cl_k(k, cfg["eta"], cfg["delta"], N, LossKind.parse(cfg["loss"]))
    print(f"N = {N}")
    print(f"n_per_setting = {math.ceil(N / 3**k)}")
    print(f"CL = {cl:.6f}")
    return EXIT_OK


def cmd_figure2(cfg, argv):
    for eta in cfg["etas"]:
        _check_eta(eta, "--etas")
        if eta == 0:
            raise UsageError("--etas must be positive")
    _check_positive(cfg, "delta")
    rows = figure2_curves(
        ks=cfg["qubits"], etas=cfg["etas"], delta=cfg["delta"], n_values=cfg["n_values"],
        points=cfg["points"], loss=cfg["loss"],
    )
    text = rows_to_csv(rows, _header(argv))
    if cfg["out"]:
        _write(cfg["out"], text)
        print(f"wrote {len(rows)} rows to {cfg['out']}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(cfg, argv):
    for eta in cfg["etas"]:
        _check_eta(eta, "--etas")
    _check_positive(cfg, "trials")
    _check_positive(cfg, "delta")
    rows = []
    block = 0
    for k in cfg["qubits"]:
        for eta in cfg["etas"]:
            grid = cfg["n_values"] or default_n_grid(k, eta, cfg["delta"])
            rows += coverage_sweep(
                k, eta, cfg["delta"], grid, list(cfg["states"]), cfg["trials"],
                base_seed=cfg["seed"] + block * 10**7, losses=cfg["losses"], workers=cfg["workers"],
            )
            block += 1
    flagged = [r for r in rows if r["flagged"]]
    if cfg["out"]:
        _write(os.path.join(cfg["out"], "coverage.csv"), rows_to_csv(rows, _header(argv)))
        _write(os.path.join(cfg["out"], "coverage.json"),
               dumps({"metadata": _metadata(argv), "flagged": len(flagged), "rows": rows}))
    for r in rows:
        mark = "FLAG" if r["flagged"] else "ok"
        print(f"{mark:4s} k={r['k']} eta={r['eta']:g} N={r['N']} state={r['state']} loss={r['loss']} "
              f"empirical={r['empirical']:.4g} bound={r['bound']:.4g}")
    print(f"{len(rows)} cells, {len(flagged)} flagged")
    return EXIT_FLAGGED if flagged else EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "certify": cmd_certify,
    "plan": cmd_plan,
    "figure2": cmd_figure2,
    "validate": cmd_validate,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = _parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        return COMMANDS[args.command](cfg, argv)
    except NotInformationallyComplete as exc:
        print(f"tomocert {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_NOT_IC
    except (UsageError, TomographyError, ValueError) as exc:
        print(f"tomocert {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
