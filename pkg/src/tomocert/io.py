"""JSON and CSV (de)serialisation for states, designs, data and estimates."""

import csv
import io
import json

import numpy as np

from .bloch import basis_from_spec
from .measurement import ExperimentDesign, FrequencyVector, Povm, pauli_design


def matrix_to_json(m):
    """``{"dim": d, "entries": [[re, im], ...]}`` with entries row-major."""
    m = np.asarray(m, dtype=np.complex128)
    return {"dim": int(m.shape[0]), "entries": [[float(z.real), float(z.imag)] for z in m.ravel()]}


def matrix_from_json(obj):
    d = int(obj["dim"])
    entries = np.asarray(obj["entries"], dtype=np.float64).reshape(-1, 2)
    if entries.shape[0] != d * d:
        raise ValueError(f"expected {d * d} entries for dim {d}, got {entries.shape[0]}")
    return (entries[:, 0] + 1j * entries[:, 1]).reshape(d, d)


def design_to_json(design):
    out = {
        "basis": design.basis.spec(),
        "weighting": design.weighting,
        "povms": [
            {"name": p.name, "counts": int(n), "effects": [matrix_to_json(e) for e in p.effects]}
            for p, n in zip(design.povms, design.counts)
        ],
    }
    if design.label == "pauli":
        out["pauli"] = {"qubits": design.qubits, "eta": design.eta, "n_per_setting": int(design.counts[0])}
    return out


def design_from_json(obj):
    if "pauli" in obj:
        p = obj["pauli"]
        return pauli_design(int(p["qubits"]), float(p["eta"]), int(p["n_per_setting"]), obj.get("weighting", "trace"))
    basis = basis_from_spec(obj["basis"])
    povms = [
        Povm(basis.dim, np.array([matrix_from_json(e) for e in p["effects"]]), name=p.get("name", ""))
        for p in obj["povms"]
    ]
    counts = [int(p["counts"]) for p in obj["povms"]]
    return ExperimentDesign(povms, counts, basis, weighting=obj.get("weighting", "none"))


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def frequencies_to_csv(design, freq, header_lines=()):
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["povm_index", "outcome_index", "count", "frequency"])
    counts = freq.counts if freq.counts is not None else [""] * design.n_outcomes
    for j, m, c, f in zip(design.povm_index, design.outcome_index, counts, freq.frequencies):
        w.writerow([int(j), int(m), c if c == "" else int(c), repr(float(f))])
    return buf.getvalue()


def frequencies_from_csv(design, text):
    rows = [r for r in csv.DictReader(line for line in text.splitlines() if not line.startswith("#"))]
    if len(rows) != design.n_outcomes:
        raise ValueError(f"expected {design.n_outcomes} rows, got {len(rows)}")
    flat = design.offsets[[int(r["povm_index"]) for r in rows]] + np.array([int(r["outcome_index"]) for r in rows])
    if all(r["count"] not in ("", None) for r in rows):
        counts = np.zeros(design.n_outcomes, dtype=np.int64)
        counts[flat] = [int(r["count"]) for r in rows]
        return FrequencyVector.from_counts(design, counts)
    freqs = np.zeros(design.n_outcomes)
    freqs[flat] = [float(r["frequency"]) for r in rows]
    return FrequencyVector.from_frequencies(design, freqs)


def estimate_to_json(rec):
    out = {
        "s_lls": rec.s_lls.tolist(),
        "rho_lls": matrix_to_json(rec.rho_lls),
        "s_enm": rec.s_enm.tolist(),
        "rho_enm": matrix_to_json(rec.rho_enm),
        "enm_residual": rec.enm_residual,
    }
    if rec.rho_cls is not None:
        out["cls"] = {
            "s_cls": rec.s_cls.tolist(),
            "rho_cls": matrix_to_json(rec.rho_cls),
            "iterations": rec.cls_iterations,
            "residual": rec.cls_residual,
            "converged": rec.cls_converged,
        }
    return out


def rows_to_csv(rows, header_lines=()):
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()
