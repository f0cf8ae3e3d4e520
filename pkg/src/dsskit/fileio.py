"""Document schemas for states, operators, subspaces, bases and protocols.

Everything is JSON.  Matrices are stored either densely as
``{"re": [[...]], "im": [[...]]}`` or sparsely as a list of
``{"row", "col", "re", "im"}`` entries; vectors use the dense 1-D form.
Numbers are written with :func:`repr`-level precision so a save/load round
trip reproduces every entry exactly.  Schema problems raise
:class:`~dsskit.errors.SchemaError`; state invariant failures propagate as
:class:`~dsskit.errors.InvariantViolation` naming the failed invariant.
"""

from __future__ import annotations

import json
import os
from typing import Any, Callable, Mapping

import numpy as np

from .errors import SchemaError
from .localops import LocalFactor, ProductOperator
from .protocols import (
    Conditional,
    Filter,
    LocalUnitary,
    MeasureAndDiscard,
    Project,
    ProtocolStep,
)
from .states import DensityMatrix, Party, SystemShape
from .subspaces import LocalSubspace


def _require(doc: Mapping, key: str, context: str) -> Any:
    if not isinstance(doc, Mapping):
        raise SchemaError(f"{context}: expected an object, got {type(doc).__name__}")
    if key not in doc:
        raise SchemaError(f"{context}: missing required field {key!r}")
    return doc[key]


def matrix_to_doc(mat: np.ndarray) -> dict:
    arr = np.asarray(mat, dtype=np.complex128)
    return {"re": arr.real.tolist(), "im": arr.imag.tolist()}


def vector_to_doc(vec: np.ndarray) -> dict:
    arr = np.asarray(vec, dtype=np.complex128).reshape(-1)
    return {"re": arr.real.tolist(), "im": arr.imag.tolist()}


def matrix_from_doc(doc, rows: int, cols: int, context: str) -> np.ndarray:
    """Parse a dense or sparse matrix document of known dimensions."""
    if isinstance(doc, list):
        mat = np.zeros((rows, cols), dtype=np.complex128)
        for i, entry in enumerate(doc):
            where = f"{context}: sparse entry {i}"
            row = int(_require(entry, "row", where))
            col = int(_require(entry, "col", where))
            if not (0 <= row < rows and 0 <= col < cols):
                raise SchemaError(f"{where}: index ({row}, {col}) outside {rows}x{cols}")
            mat[row, col] = float(entry.get("re", 0.0)) + 1j * float(entry.get("im", 0.0))
        return mat
    re = np.asarray(_require(doc, "re", context), dtype=float)
    im_doc = doc.get("im")
    im = np.zeros_like(re) if im_doc is None else np.asarray(im_doc, dtype=float)
    if re.shape != (rows, cols) or im.shape != (rows, cols):
        raise SchemaError(
            f"{context}: expected a {rows}x{cols} matrix, got re {re.shape} / im {im.shape}"
        )
    return re + 1j * im


def vector_from_doc(doc, length: int, context: str) -> np.ndarray:
    re = np.asarray(_require(doc, "re", context), dtype=float)
    im_doc = doc.get("im")
    im = np.zeros_like(re) if im_doc is None else np.asarray(im_doc, dtype=float)
    if re.shape != (length,) or im.shape != (length,):
        raise SchemaError(f"{context}: expected a vector of length {length}")
    return re + 1j * im


def shape_from_doc(doc, context: str = "parties") -> SystemShape:
    parties_doc = _require(doc, "parties", context)
    if not isinstance(parties_doc, list) or not parties_doc:
        raise SchemaError(f"{context}: 'parties' must be a nonempty list")
    parties = []
    for i, entry in enumerate(parties_doc):
        where = f"{context}: party {i}"
        label = str(_require(entry, "label", where))
        if "dims" in entry:
            dims = tuple(int(d) for d in entry["dims"])
            if "dim" in entry and int(entry["dim"]) != int(np.prod(dims)):
                raise SchemaError(f"{where}: 'dim' disagrees with product of 'dims'")
        else:
            dims = (int(_require(entry, "dim", where)),)
        parties.append(Party(label, dims))
    return SystemShape(tuple(parties))


def shape_to_doc(shape: SystemShape) -> list[dict]:
    out = []
    for p in shape.parties:
        entry: dict[str, Any] = {"label": p.label, "dim": p.dim}
        if len(p.dims) > 1:
            entry["dims"] = list(p.dims)
        out.append(entry)
    return out


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------


def save_state(rho: DensityMatrix) -> dict:
    return {"parties": shape_to_doc(rho.shape), "matrix": matrix_to_doc(rho.mat)}


def load_state(doc) -> DensityMatrix:
    shape = shape_from_doc(doc, "state")
    d = shape.total_dim
    mat = matrix_from_doc(_require(doc, "matrix", "state"), d, d, "state: matrix")
    return DensityMatrix(shape, mat)


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------


def save_operator(op: ProductOperator) -> dict:
    return {
        "factors": [
            {"party": f.party, "matrix": matrix_to_doc(f.mat)} for f in op.factors
        ]
    }


def load_operator(doc) -> ProductOperator:
    """Parse a product operator; factors above unit spectral norm are rescaled.

    Rescaling only changes outcome probabilities; the applied divisor is
    recorded on each factor's ``scale``.  A sparse factor matrix needs an
    explicit ``dim`` on its entry; dense ones carry their own shape.
    """
    factors_doc = _require(doc, "factors", "operator")
    if not isinstance(factors_doc, list) or not factors_doc:
        raise SchemaError("operator: 'factors' must be a nonempty list")
    factors = []
    for i, entry in enumerate(factors_doc):
        where = f"operator: factor {i}"
        party = str(_require(entry, "party", where))
        mat_doc = _require(entry, "matrix", where)
        if isinstance(mat_doc, list):
            if "dim" not in entry:
                raise SchemaError(f"{where}: sparse factors need an explicit 'dim'")
            d = int(entry["dim"])
        else:
            re = np.asarray(_require(mat_doc, "re", where), dtype=float)
            if re.ndim != 2 or re.shape[0] != re.shape[1]:
                raise SchemaError(f"{where}: factor matrix must be square")
            d = re.shape[0]
        factors.append(LocalFactor.from_matrix(party, matrix_from_doc(mat_doc, d, d, where)))
    return ProductOperator(tuple(factors))


# ---------------------------------------------------------------------------
# Subspaces and bases
# ---------------------------------------------------------------------------


def save_subspace(subspace: LocalSubspace) -> dict:
    return {
        "parties": [
            {"label": label, "vectors": [vector_to_doc(v[:, j]) for j in range(v.shape[1])]}
            for label, v in subspace.parties
        ]
    }


def load_subspace(doc) -> LocalSubspace:
    parties_doc = _require(doc, "parties", "subspace")
    if not isinstance(parties_doc, list) or not parties_doc:
        raise SchemaError("subspace: 'parties' must be a nonempty list")
    parties = []
    for i, entry in enumerate(parties_doc):
        where = f"subspace: party {i}"
        label = str(_require(entry, "label", where))
        vecs_doc = _require(entry, "vectors", where)
        if not isinstance(vecs_doc, list) or not vecs_doc:
            raise SchemaError(f"{where}: 'vectors' must be a nonempty list")
        first_re = np.asarray(_require(vecs_doc[0], "re", where), dtype=float)
        length = first_re.shape[0] if first_re.ndim == 1 else 0
        if length == 0:
            raise SchemaError(f"{where}: vectors must be nonempty 1-D")
        cols = [vector_from_doc(v, length, f"{where} vector {j}") for j, v in enumerate(vecs_doc)]
        parties.append((label, np.column_stack(cols)))
    return LocalSubspace(tuple(parties))


def load_bases(doc, shape: SystemShape) -> dict[str, np.ndarray]:
    """Parse per-party bases (subspace schema with one full basis per party)."""
    subspace = load_subspace(doc)
    bases = {}
    for label, v in subspace.parties:
        if label not in shape.labels:
            raise SchemaError(f"bases: unknown party {label!r}")
        d = shape.party(label).dim
        if v.shape != (d, d):
            raise SchemaError(
                f"bases: party {label!r} needs a full {d}-vector basis, got {v.shape[1]} vectors"
            )
        bases[label] = v
    return bases


# ---------------------------------------------------------------------------
# Protocols
# ---------------------------------------------------------------------------


def _resolve_ref(value, base_dir: str, loader: Callable, context: str):
    """A step field may be an inline document or a path to one."""
    if isinstance(value, str):
        path = value if os.path.isabs(value) else os.path.join(base_dir, value)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                value = json.load(fh)
        except OSError as exc:
            raise SchemaError(f"{context}: cannot read referenced file {path!r}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{context}: referenced file {path!r} is not valid JSON") from exc
    return loader(value)


def _step_from_doc(doc, base_dir: str, context: str) -> ProtocolStep:
    kind = str(_require(doc, "kind", context))
    if kind == "project":
        sub = _resolve_ref(_require(doc, "subspace", context), base_dir, load_subspace, context)
        return Project(sub)
    if kind == "filter":
        op = _resolve_ref(_require(doc, "operator", context), base_dir, load_operator, context)
        return Filter(op)
    if kind == "local_unitary":
        gates_doc = _require(doc, "gates", context)
        if not isinstance(gates_doc, Mapping) or not gates_doc:
            raise SchemaError(f"{context}: 'gates' must be a nonempty object")
        gates = {}
        for label, mat_doc in gates_doc.items():
            re = np.asarray(_require(mat_doc, "re", f"{context}: gate {label!r}"), dtype=float)
            if re.ndim != 2 or re.shape[0] != re.shape[1]:
                raise SchemaError(f"{context}: gate {label!r} must be square")
            d = re.shape[0]
            gates[str(label)] = matrix_from_doc(mat_doc, d, d, f"{context}: gate {label!r}")
        return LocalUnitary(gates)
    if kind == "measure_and_discard":
        party = str(_require(doc, "party", context))
        subsystem = int(_require(doc, "subsystem", context))
        basis = None
        if doc.get("basis") is not None:
            re = np.asarray(_require(doc["basis"], "re", f"{context}: basis"), dtype=float)
            if re.ndim != 2 or re.shape[0] != re.shape[1]:
                raise SchemaError(f"{context}: measurement basis must be square")
            d = re.shape[0]
            basis = matrix_from_doc(doc["basis"], d, d, f"{context}: basis")
        return MeasureAndDiscard(party, subsystem, basis)
    if kind == "conditional":
        inner = _step_from_doc(_require(doc, "step", context), base_dir, f"{context}: step")
        if "parity" in doc:
            parity = str(doc["parity"])
            if parity not in ("odd", "even"):
                raise SchemaError(f"{context}: parity must be 'odd' or 'even', got {parity!r}")
            positions = doc.get("outcomes")
            want = 1 if parity == "odd" else 0

            def predicate(outcomes: tuple[int, ...], _pos=positions, _want=want) -> bool:
                values = outcomes if _pos is None else tuple(outcomes[int(i)] for i in _pos)
                return sum(values) % 2 == _want

            label = f"parity {parity}" + ("" if positions is None else f" of outcomes {positions}")
            return Conditional(predicate, inner, description=label)
        if "equals" in doc:
            expected = tuple(int(v) for v in doc["equals"])

            def predicate(outcomes: tuple[int, ...], _want=expected) -> bool:
                return outcomes[: len(_want)] == _want

            return Conditional(predicate, inner, description=f"outcomes start with {expected}")
        raise SchemaError(f"{context}: conditional needs 'parity' or 'equals'")
    raise SchemaError(f"{context}: unknown step kind {kind!r}")


def load_protocol(doc, base_dir: str = ".") -> list[ProtocolStep]:
    steps_doc = _require(doc, "steps", "protocol")
    if not isinstance(steps_doc, list) or not steps_doc:
        raise SchemaError("protocol: 'steps' must be a nonempty list")
    return [_step_from_doc(s, base_dir, f"protocol: step {i}") for i, s in enumerate(steps_doc)]


# ---------------------------------------------------------------------------
# File helpers
# ---------------------------------------------------------------------------


def read_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path!r} is not valid JSON: {exc}") from exc


def write_json(path: str, doc) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def read_state(path: str) -> DensityMatrix:
    return load_state(read_json(path))


def write_state(path: str, rho: DensityMatrix) -> None:
    write_json(path, save_state(rho))


def read_subspace(path: str) -> LocalSubspace:
    return load_subspace(read_json(path))


def write_subspace(path: str, subspace: LocalSubspace) -> None:
    write_json(path, save_subspace(subspace))


def read_operator(path: str) -> ProductOperator:
    return load_operator(read_json(path))


def write_operator(path: str, op: ProductOperator) -> None:
    write_json(path, save_operator(op))


def read_protocol(path: str) -> list[ProtocolStep]:
    return load_protocol(read_json(path), base_dir=os.path.dirname(os.path.abspath(path)))
