"""JSON and CSV readers/writers.  Complex numbers are stored as ``[re, im]`` pairs everywhere.

A problem file holds ``lambdas``, ``index_offset``, optional ``gap_d`` and the
coefficients ``a``, ``b``; a base file is the same without coefficients.  The
design output is a problem file with extra fields, so it can be fed straight
back into ``verify`` or ``scan``.
"""
from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import numpy as np

from .assignment import AssignmentResult, parse_complex
from .charfn import CharFn, Zero
from .errors import ContractError
from .jordan import JordanChain
from .localization import ScanResult
from .operator_model import BaseOperator, PerturbationPair

__all__ = [
    "COMPLEX_SCHEMA",
    "PROBLEM_SCHEMA",
    "DESIGN_SCHEMA",
    "CHARFN_SCHEMA",
    "REPORT_SCHEMA",
    "ZEROS_HEADER",
    "SCAN_HEADER",
    "encode_complex",
    "decode_complex",
    "base_to_json",
    "base_from_json",
    "pair_to_json",
    "pair_from_json",
    "design_to_json",
    "charfn_to_json",
    "charfn_from_json",
    "load_json",
    "dump_json",
    "load_vector",
    "write_zeros_csv",
    "write_chain_csv",
    "chain_header",
    "write_scan_csv",
]

COMPLEX_SCHEMA = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_COMPLEX_LIST = {"type": "array", "items": COMPLEX_SCHEMA}

PROBLEM_SCHEMA = {
    "type": "object",
    "required": ["lambdas", "index_offset", "a", "b"],
    "properties": {
        "lambdas": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "index_offset": {"type": "integer"},
        "gap_d": {"type": ["number", "null"]},
        "a": _COMPLEX_LIST,
        "b": _COMPLEX_LIST,
    },
}

DESIGN_SCHEMA = {
    "type": "object",
    "required": PROBLEM_SCHEMA["required"] + ["c", "condition_estimate", "free_indices", "mode"],
    "properties": {
        **PROBLEM_SCHEMA["properties"],
        "c": _COMPLEX_LIST,
        "condition_estimate": {"type": "number"},
        "free_indices": {"type": "array", "items": {"type": "integer"}},
        "active": {"type": "array", "items": {"type": "integer"}},
        "mode": {"enum": ["residue", "confluent"]},
        "targets": {"type": ["string", "null"]},
    },
}

CHARFN_SCHEMA = {
    "type": "object",
    "required": ["poles", "c"],
    "properties": {"poles": {"type": "array", "items": {"type": "number"}}, "c": _COMPLEX_LIST},
}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["passed", "checks", "eigenvalues", "predicted", "strip_halfwidth"],
    "properties": {
        "passed": {"type": "boolean"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "passed", "detail"],
                "properties": {
                    "name": {"type": "string"},
                    "passed": {"type": "boolean"},
                    "detail": {"type": "string"},
                },
            },
        },
        "eigenvalues": _COMPLEX_LIST,
        "predicted": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["point", "multiplicity", "kind", "oracle_multiplicity", "chain_residuals"],
                "properties": {
                    "point": COMPLEX_SCHEMA,
                    "multiplicity": {"type": "integer"},
                    "kind": {"enum": ["zero", "surviving", "inherited"]},
                    "index": {"type": ["integer", "null"]},
                    "oracle_multiplicity": {"type": "integer"},
                    "chain_residuals": {"type": "array", "items": {"type": "number"}},
                },
            },
        },
        "strip_halfwidth": {"type": "number"},
    },
}

ZEROS_HEADER = ["re", "im", "multiplicity", "residual_order_check"]
SCAN_HEADER = ["n", "lambda", "mu_re", "mu_im", "deviation", "circle_count"]


def encode_complex(values) -> list:
    arr = np.asarray(values, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in arr]


def decode_complex(items) -> np.ndarray:
    try:
        return np.array([complex(re, im) for re, im in items], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ContractError("complex numbers must be [re, im] pairs") from exc


def base_to_json(base: BaseOperator) -> dict:
    return {
        "lambdas": base.eigenvalues.tolist(),
        "index_offset": base.index_offset,
        "gap_d": base.gap_d,
    }


def base_from_json(data: dict) -> BaseOperator:
    if "lambdas" not in data:
        raise ContractError("base description needs 'lambdas'")
    return BaseOperator(data["lambdas"], int(data.get("index_offset", 0)), data.get("gap_d"))


def pair_to_json(pair: PerturbationPair) -> dict:
    return {"a": encode_complex(pair.a_coeffs), "b": encode_complex(pair.b_coeffs)}


def pair_from_json(data: dict) -> PerturbationPair:
    if "a" not in data or "b" not in data:
        raise ContractError("pair description needs 'a' and 'b'")
    return PerturbationPair(decode_complex(data["a"]), decode_complex(data["b"]))


def design_to_json(base: BaseOperator, result: AssignmentResult) -> dict:
    out = base_to_json(base)
    out.update(pair_to_json(result.pair))
    out.update({
        "c": encode_complex(result.residues_c),
        "condition_estimate": float(result.condition_estimate),
        "free_indices": [int(p) for p in result.free_indices],
        "active": [int(p) for p in result.active],
        "mode": result.mode,
        "targets": None if result.targets is None else str(result.targets),
    })
    return out


def charfn_to_json(f: CharFn) -> dict:
    return {"poles": f.poles.tolist(), "c": encode_complex(f.c)}


def charfn_from_json(data: dict) -> CharFn:
    return CharFn(data["poles"], decode_complex(data["c"]))


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ContractError(f"{path}: invalid JSON ({exc})") from exc


def dump_json(data, path, indent: int | None = 2) -> None:
    text = json.dumps(data, indent=indent if indent is None or indent > 0 else None)
    if path is None or str(path) == "-":
        print(text)
    else:
        Path(path).write_text(text + "\n")


def load_vector(text: str) -> np.ndarray:
    """A coefficient vector from a JSON file or an inline comma list such as ``"1,1+2i,-i"``.

    The file may hold a bare ``[[re, im], ...]`` list or an object with ``a`` / ``b``.
    """
    path = Path(text)
    if path.suffix == ".json" or ("," not in text and path.is_file()):
        data = load_json(path)
        if isinstance(data, dict):
            key = "a" if "a" in data else "b"
            if key not in data:
                raise ContractError(f"{path}: expected a list or an object with 'a' or 'b'")
            data = data[key]
        return decode_complex(data)
    return np.array([parse_complex(tok) for tok in text.split(",") if tok.strip()], dtype=complex)


def _open_out(path):
    if path is None or str(path) == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def write_zeros_csv(zeros: list[Zero], path) -> None:
    """Rows ``re, im, multiplicity, residual_order_check``; the last column is the
    order confirmed by the derivative test (-1 if it could not be decided)."""
    fh, close = _open_out(path)
    try:
        w = csv.writer(fh)
        w.writerow(ZEROS_HEADER)
        for zr in zeros:
            w.writerow([repr(zr.point.real), repr(zr.point.imag), zr.multiplicity, zr.certified_order])
    finally:
        if close:
            fh.close()


def chain_header(dim: int) -> list[str]:
    cols = ["k"]
    for i in range(dim):
        cols += [f"re_{i}", f"im_{i}"]
    return cols + ["residual"]


def write_chain_csv(chain: JordanChain, path) -> None:
    fh, close = _open_out(path)
    try:
        w = csv.writer(fh)
        w.writerow(chain_header(chain.vectors.shape[1]))
        for k, (y, res) in enumerate(zip(chain.vectors, chain.residuals)):
            row = [k]
            for v in y:
                row += [repr(float(v.real)), repr(float(v.imag))]
            w.writerow(row + [repr(float(res))])
    finally:
        if close:
            fh.close()


def write_scan_csv(scan: ScanResult, counts: dict, path) -> None:
    """Unmatched indices have empty ``mu`` columns and ``nan`` deviation."""
    fh, close = _open_out(path)
    try:
        w = csv.writer(fh)
        w.writerow(SCAN_HEADER)
        for n, lam, mu, dev in scan.rows:
            mu_re = "" if mu is None else repr(mu.real)
            mu_im = "" if mu is None else repr(mu.imag)
            w.writerow([n, repr(lam), mu_re, mu_im, repr(dev), counts.get(n, "")])
    finally:
        if close:
            fh.close()
