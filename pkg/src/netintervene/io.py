"""File formats: matrix CSV (dense or ``i,j,w`` triplets), instance/group/plan JSON, edge lists."""
from __future__ import annotations

import io as _io
import json
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .egal_group import GroupStructure
from .errors import ValidationError
from .instance import Instance, InterventionPlan

FORMAT_VERSION = 1
TRIPLET_HEADER = "i,j,w"
PathLike = Union[str, Path]


def _fmt(x: float) -> str:
    return repr(float(x))


def matrix_to_csv(matrix, sparse: bool = False) -> str:
    matrix = np.asarray(matrix, dtype=float)
    lines = []
    if sparse:
        lines.append(TRIPLET_HEADER)
        for i, j in zip(*np.nonzero(matrix)):
            lines.append(f"{i},{j},{_fmt(matrix[i, j])}")
    else:
        for row in matrix:
            lines.append(",".join(_fmt(x) for x in row))
    return "\n".join(lines) + "\n"


def matrix_from_csv(text: str, n: Optional[int] = None) -> np.ndarray:
    """Parse dense CSV, or triplets when the first line is the ``i,j,w`` header."""
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ValidationError("empty matrix CSV")
    if lines[0].replace(" ", "") == TRIPLET_HEADER:
        entries = []
        for ln in lines[1:]:
            parts = ln.split(",")
            if len(parts) != 3:
                raise ValidationError(f"bad triplet line: {ln!r}")
            entries.append((int(parts[0]), int(parts[1]), float(parts[2])))
        size = n if n is not None else 1 + max((max(i, j) for i, j, _ in entries), default=-1)
        out = np.zeros((size, size))
        for i, j, w in entries:
            if not (0 <= i < size and 0 <= j < size):
                raise ValidationError(f"triplet index ({i}, {j}) outside a {size}x{size} matrix")
            out[i, j] = w
        return out
    try:
        out = np.loadtxt(_io.StringIO("\n".join(lines)), delimiter=",", ndmin=2)
    except ValueError as exc:
        raise ValidationError(f"unreadable matrix CSV: {exc}") from exc
    if n is not None and out.shape != (n, n):
        raise ValidationError(f"matrix has shape {out.shape}, expected {(n, n)}")
    return out


def write_matrix(path: PathLike, matrix, sparse: bool = False):
    Path(path).write_text(matrix_to_csv(matrix, sparse))


def read_matrix(path: PathLike, n: Optional[int] = None) -> np.ndarray:
    return matrix_from_csv(Path(path).read_text(), n)


def _check_version(doc: dict, what: str):
    version = doc.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ValidationError(f"unsupported {what} format_version {version!r}")


def _resolve_matrix(spec, n: Optional[int], base: Path) -> np.ndarray:
    if isinstance(spec, list):
        return np.asarray(spec, dtype=float)
    if not isinstance(spec, str):
        raise ValidationError("wbar must be a path, an inline CSV string or a nested list")
    if "\n" in spec or "," in spec:
        return matrix_from_csv(spec, n)
    path = Path(spec)
    if not path.is_absolute():
        path = base / path
    return read_matrix(path, n)


def instance_to_dict(instance: Instance, wbar_ref: Optional[str] = None) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "n": instance.n,
        "omega": [
            {"weight": float(o.weight), "label": int(o.label), "preds": [int(x) for x in o.preds]}
            for o in instance.outcomes
        ],
        "wbar": wbar_ref if wbar_ref is not None else matrix_to_csv(instance.wbar),
    }


def instance_from_dict(doc: dict, base: PathLike = ".") -> Instance:
    _check_version(doc, "instance")
    try:
        n = int(doc["n"])
        omega = doc["omega"]
        weights = [float(o["weight"]) for o in omega]
        labels = [int(o["label"]) for o in omega]
        preds = np.array([o["preds"] for o in omega], dtype=int).reshape(len(omega), n)
        wbar = _resolve_matrix(doc["wbar"], n, Path(base))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed instance document: {exc}") from exc
    return Instance(weights, labels, preds, wbar)


def write_instance(path: PathLike, instance: Instance, wbar_path: Optional[PathLike] = None):
    """Write an instance; with ``wbar_path`` the matrix goes to a separate CSV."""
    path = Path(path)
    ref = None
    if wbar_path is not None:
        wbar_path = Path(wbar_path)
        write_matrix(wbar_path, instance.wbar)
        try:
            ref = str(wbar_path.resolve().relative_to(path.resolve().parent))
        except ValueError:
            ref = str(wbar_path.resolve())
    path.write_text(json.dumps(instance_to_dict(instance, ref), indent=1) + "\n")


def read_instance(path: PathLike) -> Instance:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc
    return instance_from_dict(doc, path.parent)


def group_to_dict(group: GroupStructure) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "colors": [str(c) for c in group.colors],
        "rho": group.rho,
        "err_indv": [float(e) for e in group.err_indv],
        "err_R": group.err_R,
        "prior_pos": group.prior_pos,
    }


def group_from_dict(doc: dict) -> GroupStructure:
    _check_version(doc, "group")
    try:
        return GroupStructure(doc["colors"], doc["rho"], doc["err_indv"], doc["err_R"], doc.get("prior_pos", 0.5))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed group document: {exc}") from exc


def write_group(path: PathLike, group: GroupStructure):
    Path(path).write_text(json.dumps(group_to_dict(group), indent=1) + "\n")


def read_group(path: PathLike) -> GroupStructure:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc
    return group_from_dict(doc)


def plan_to_dict(plan: InterventionPlan) -> dict:
    return {"format_version": FORMAT_VERSION, "S": list(plan.S), "phi": plan.phi, **plan.reports}


def plan_from_dict(doc: dict) -> InterventionPlan:
    _check_version(doc, "plan")
    try:
        return InterventionPlan(tuple(doc["S"]), float(doc.get("phi", 1.0)))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed plan document: {exc}") from exc


def read_err(path: PathLike) -> np.ndarray:
    """Error rates from JSON (list or ``{"err": [...]}``) or one-column CSV."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        return np.loadtxt(_io.StringIO(text.replace(",", " ")), ndmin=1).reshape(-1)
    if isinstance(doc, dict):
        doc = doc.get("err")
    if not isinstance(doc, list):
        raise ValidationError("error file must hold a list of rates")
    return np.asarray(doc, dtype=float)


def load_edge_list(path: PathLike, index_base: str = "auto", n: Optional[int] = None) -> np.ndarray:
    """Symmetric weight matrix from ``u v [w]`` lines (whitespace or comma separated).

    Lines starting with ``#`` or ``%`` are skipped. With ``index_base="auto"``
    the file is read as 0-based when any index is 0 and 1-based otherwise.
    """
    rows = []
    for ln in Path(path).read_text().splitlines():
        ln = ln.strip()
        if not ln or ln[0] in "#%":
            continue
        parts = ln.replace(",", " ").split()
        if len(parts) not in (2, 3):
            raise ValidationError(f"bad edge line: {ln!r}")
        rows.append((int(parts[0]), int(parts[1]), float(parts[2]) if len(parts) == 3 else 1.0))
    if not rows:
        raise ValidationError("edge list is empty")
    lowest = min(min(u, v) for u, v, _ in rows)
    if index_base == "auto":
        offset = 0 if lowest == 0 else 1
    elif index_base in ("0", "1"):
        offset = int(index_base)
    else:
        raise ValidationError(f"index_base must be auto, 0 or 1, got {index_base!r}")
    if lowest - offset < 0:
        raise ValidationError("edge list has an index below the declared base")
    size = n if n is not None else 1 + max(max(u, v) for u, v, _ in rows) - offset
    adj = np.zeros((size, size))
    for u, v, w in rows:
        u, v = u - offset, v - offset
        if u >= size or v >= size:
            raise ValidationError(f"edge ({u}, {v}) outside n = {size}")
        if w < 0:
            raise ValidationError("negative edge weight")
        if u != v:
            adj[u, v] = adj[v, u] = w
    return adj
