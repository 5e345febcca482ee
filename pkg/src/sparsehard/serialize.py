"""JSON persistence for every instance type.

Files are structured text: supports are sorted integer arrays, exact
rationals travel as {"num", "den"} pairs, and dense matrices are never
written (supports plus dimensions reconstruct them). Writes are atomic
(temp file then rename) and payloads are dumped with sorted keys so a
fixed object always produces identical bytes.
"""

from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Any

from .errors import ParameterError
from .label_cover import Assignment, LabelCoverInstance, Max3SatFormula, MultilayeredInstance
from .reduction import (
    GadgetRef,
    IdentityRef,
    ReductionParams,
    SparseInstance,
    SupportColumn,
)

FORMAT_VERSION = 1

__all__ = [
    "FORMAT_VERSION",
    "from_payload",
    "load_file",
    "save_file",
    "to_payload",
]


def _frac(value: Fraction | None) -> dict | None:
    if value is None:
        return None
    return {"num": value.numerator, "den": value.denominator}


def _unfrac(payload: dict | None) -> Fraction | None:
    if payload is None:
        return None
    return Fraction(payload["num"], payload["den"])


def _assignment_payload(a: Assignment | None) -> list | None:
    if a is None:
        return None
    return [list(layer) for layer in a.layers]


def _assignment_from(payload: list | None) -> Assignment | None:
    if payload is None:
        return None
    return Assignment(tuple(tuple(layer) for layer in payload))


def to_payload(obj: Any) -> dict:
    """JSON-ready dictionary for any serializable instance type."""
    if isinstance(obj, Max3SatFormula):
        return {
            "format_version": FORMAT_VERSION,
            "type": "max3sat",
            "n_vars": obj.n_vars,
            "clauses": [list(c) for c in obj.clauses],
            "exactly_five": obj.exactly_five,
        }
    if isinstance(obj, LabelCoverInstance):
        return {
            "format_version": FORMAT_VERSION,
            "type": "label_cover",
            "n_left": obj.n_left,
            "n_right": obj.n_right,
            "sigma_v_size": obj.sigma_v_size,
            "sigma_w_size": obj.sigma_w_size,
            "edges": [list(e) for e in obj.edges],
            "constraints": [list(t) for t in obj.constraints],
            "flavor": obj.flavor,
            "planted": _assignment_payload(obj.planted),
            "declared_optimum": _frac(obj.declared_optimum),
        }
    if isinstance(obj, MultilayeredInstance):
        return {
            "format_version": FORMAT_VERSION,
            "type": "multilayered",
            "ell": obj.ell,
            "base": to_payload(obj.base),
        }
    if isinstance(obj, SparseInstance):
        provenance = []
        for ref in obj.provenance:
            if isinstance(ref, GadgetRef):
                provenance.append(
                    {"kind": "gadget", "layer": ref.layer, "vertex": ref.vertex, "label": ref.label}
                )
            else:
                provenance.append({"kind": "identity", "coordinate": ref.coordinate})
        params = obj.params
        return {
            "format_version": FORMAT_VERSION,
            "type": "sparse_instance",
            "m_dim": obj.m_dim,
            "k": obj.k,
            "block_width": obj.block_width,
            "n_blocks": obj.n_blocks,
            "columns": [list(c.support) for c in obj.columns],
            "provenance": provenance,
            "layer_sizes": list(obj.layer_sizes),
            "layer_label_counts": list(obj.layer_label_counts),
            "planted_support": (
                None if obj.planted_support is None else list(obj.planted_support)
            ),
            "params": {
                "kind": params.kind,
                "smoothness": _frac(params.smoothness),
                "gadget_mu_bound": _frac(params.gadget_mu_bound),
                "base_edges": [list(e) for e in params.base_edges],
                "code_order": params.code_order,
                "ell": params.ell,
                "d": params.d,
                "t_declared": params.t_declared,
                "identity_exceeds_gadget_bound": params.identity_exceeds_gadget_bound,
            },
        }
    raise ParameterError(f"cannot serialize {type(obj).__name__}")


def from_payload(payload: dict) -> Any:
    """Inverse of to_payload; dispatches on the embedded type tag."""
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ParameterError(f"unsupported format version {version!r}")
    kind = payload.get("type")
    if kind == "max3sat":
        return Max3SatFormula(
            payload["n_vars"],
            tuple(tuple(c) for c in payload["clauses"]),
            exactly_five=payload["exactly_five"],
        )
    if kind == "label_cover":
        return LabelCoverInstance(
            n_left=payload["n_left"],
            n_right=payload["n_right"],
            sigma_v_size=payload["sigma_v_size"],
            sigma_w_size=payload["sigma_w_size"],
            edges=tuple(tuple(e) for e in payload["edges"]),
            constraints=tuple(tuple(t) for t in payload["constraints"]),
            flavor=payload["flavor"],
            planted=_assignment_from(payload["planted"]),
            declared_optimum=_unfrac(payload["declared_optimum"]),
        )
    if kind == "multilayered":
        return MultilayeredInstance(payload["ell"], from_payload(payload["base"]))
    if kind == "sparse_instance":
        m_dim = payload["m_dim"]
        columns = tuple(SupportColumn(m_dim, tuple(s)) for s in payload["columns"])
        provenance: list[GadgetRef | IdentityRef] = []
        for ref in payload["provenance"]:
            if ref["kind"] == "gadget":
                provenance.append(GadgetRef(ref["layer"], ref["vertex"], ref["label"]))
            elif ref["kind"] == "identity":
                provenance.append(IdentityRef(ref["coordinate"]))
            else:
                raise ParameterError(f"unknown provenance kind {ref['kind']!r}")
        p = payload["params"]
        params = ReductionParams(
            kind=p["kind"],
            smoothness=_unfrac(p["smoothness"]),
            gadget_mu_bound=_unfrac(p["gadget_mu_bound"]),
            base_edges=tuple(tuple(e) for e in p["base_edges"]),
            code_order=p["code_order"],
            ell=p["ell"],
            d=p["d"],
            t_declared=p["t_declared"],
            identity_exceeds_gadget_bound=p["identity_exceeds_gadget_bound"],
        )
        return SparseInstance(
            m_dim=m_dim,
            k=payload["k"],
            block_width=payload["block_width"],
            n_blocks=payload["n_blocks"],
            columns=columns,
            provenance=tuple(provenance),
            layer_sizes=tuple(payload["layer_sizes"]),
            layer_label_counts=tuple(payload["layer_label_counts"]),
            params=params,
            planted_support=(
                None
                if payload["planted_support"] is None
                else tuple(payload["planted_support"])
            ),
        )
    raise ParameterError(f"unknown payload type {kind!r}")


def dumps(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def save_file(obj: Any, path: str | Path) -> None:
    """Serialize and write atomically (write-temp-then-rename)."""
    path = Path(path)
    payload = obj if isinstance(obj, dict) else to_payload(obj)
    text = dumps(payload)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_file(path: str | Path) -> Any:
    with open(path, "r", encoding="utf-8") as handle:
        payload = json.load(handle)
    if not isinstance(payload, dict):
        raise ParameterError("instance file must hold a JSON object")
    return from_payload(payload)


def load_payload(path: str | Path) -> dict:
    """Raw payload access, used when the caller needs the type tag."""
    with open(path, "r", encoding="utf-8") as handle:
        payload = json.load(handle)
    if not isinstance(payload, dict):
        raise ParameterError("instance file must hold a JSON object")
    return payload
