"""Free-format MPS export/import and ``name value`` solution files."""

from __future__ import annotations

import math
import re
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .solve import EQ, GE, LE, OPTIMAL, LinearProgram, SolveResult, SolverOptions, verify_point

OBJ_ROW = "OBJ"
_BAD_NAME = re.compile(r"\s")


class MPSError(ValueError):
    pass


class SolutionImportError(ValueError):
    pass


def _num(v: float) -> str:
    v = float(v)
    if v == 0:
        return "0"
    return repr(v)


def _check_names(lp: LinearProgram) -> None:
    for kind, names in (("column", lp.var_names), ("row", lp.row_names)):
        seen: set[str] = set()
        for name in names:
            if not name or _BAD_NAME.search(name):
                raise MPSError(f"{kind} name {name!r} is empty or contains whitespace")
            if name in seen:
                raise MPSError(f"duplicate {kind} name {name!r}")
            seen.add(name)
    if OBJ_ROW in set(lp.row_names):
        raise MPSError(f"row name {OBJ_ROW!r} is reserved for the objective")


def export_model(lp: LinearProgram, path: str | Path) -> Path:
    """Write ``lp`` as free MPS; names are validated before anything is written."""
    _check_names(lp)
    lines = [f"NAME {lp.name}", "ROWS", f" N {OBJ_ROW}"]
    lines += [f" {s} {name}" for s, name in zip(lp.sense, lp.row_names)]
    lines.append("COLUMNS")
    csc = lp.A.tocsc()
    integer = lp.integrality if lp.integrality is not None else np.zeros(lp.n_vars, dtype=bool)
    in_int = False
    marker = 0
    for j, name in enumerate(lp.var_names):
        if integer[j] != in_int:
            tag = "INTORG" if integer[j] else "INTEND"
            lines.append(f" M{marker} 'MARKER' '{tag}'")
            marker += 1
            in_int = bool(integer[j])
        entries = []
        if lp.c[j] != 0:
            entries.append((OBJ_ROW, lp.c[j]))
        start, end = csc.indptr[j], csc.indptr[j + 1]
        entries += [(lp.row_names[i], v) for i, v in zip(csc.indices[start:end], csc.data[start:end])]
        if not entries:
            entries.append((OBJ_ROW, 0.0))
        lines += [f" {name} {row} {_num(v)}" for row, v in entries]
    if in_int:
        lines.append(f" M{marker} 'MARKER' 'INTEND'")
    lines.append("RHS")
    if lp.offset != 0:
        lines.append(f" RHS {OBJ_ROW} {_num(-lp.offset)}")
    lines += [f" RHS {name} {_num(v)}" for name, v in zip(lp.row_names, lp.rhs) if v != 0]
    lines.append("BOUNDS")
    for j, name in enumerate(lp.var_names):
        lo, up = lp.lb[j], lp.ub[j]
        if lo == up:
            lines.append(f" FX BND {name} {_num(lo)}")
            continue
        if lo == -math.inf and up == math.inf:
            lines.append(f" FR BND {name}")
            continue
        if lo == -math.inf:
            lines.append(f" MI BND {name}")
        elif lo != 0 or integer[j]:
            lines.append(f" LO BND {name} {_num(lo)}")
        if up != math.inf:
            lines.append(f" UP BND {name} {_num(up)}")
        elif integer[j]:
            lines.append(f" PL BND {name}")
    lines.append("ENDATA")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_model(path: str | Path) -> LinearProgram:
    """Parse a free MPS file written by :func:`export_model` (or any plain free MPS)."""
    section = None
    name = "lp"
    row_names: list[str] = []
    senses: list[str] = []
    row_index: dict[str, int] = {}
    obj_name = None
    col_index: dict[str, int] = {}
    col_names: list[str] = []
    integer: list[bool] = []
    coef_c: dict[int, float] = {}
    entries: list[tuple[int, int, float]] = []
    rhs: dict[int, float] = {}
    offset = 0.0
    bounds: dict[int, list[float]] = {}
    in_int = False

    def col(cname: str) -> int:
        if cname not in col_index:
            col_index[cname] = len(col_names)
            col_names.append(cname)
            integer.append(in_int)
        return col_index[cname]

    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        if not raw.strip() or raw.startswith("*"):
            continue
        tok = raw.split()
        if not raw[0].isspace():
            section = tok[0].upper()
            if section == "NAME":
                name = tok[1] if len(tok) > 1 else "lp"
            if section == "ENDATA":
                break
            continue
        try:
            if section == "ROWS":
                s, rname = tok[0].upper(), tok[1]
                if s == "N":
                    if obj_name is None:
                        obj_name = rname
                    continue
                row_index[rname] = len(row_names)
                row_names.append(rname)
                senses.append(s)
            elif section == "COLUMNS":
                if len(tok) >= 3 and tok[1] == "'MARKER'":
                    in_int = tok[2] == "'INTORG'"
                    continue
                j = col(tok[0])
                for rname, val in zip(tok[1::2], tok[2::2]):
                    v = float(val)
                    if rname == obj_name:
                        coef_c[j] = coef_c.get(j, 0.0) + v
                    else:
                        entries.append((row_index[rname], j, v))
            elif section == "RHS":
                pairs = tok[1:] if len(tok) % 2 == 1 else tok
                for rname, val in zip(pairs[0::2], pairs[1::2]):
                    if rname == obj_name:
                        offset = -float(val)
                    else:
                        rhs[row_index[rname]] = float(val)
            elif section == "BOUNDS":
                kind, cname = tok[0].upper(), tok[2]
                j = col(cname)
                b = bounds.setdefault(j, [0.0, math.inf])
                val = float(tok[3]) if len(tok) > 3 else None
                if kind == "UP":
                    b[1] = val
                elif kind == "LO":
                    b[0] = val
                elif kind == "FX":
                    b[0] = b[1] = val
                elif kind == "FR":
                    b[0], b[1] = -math.inf, math.inf
                elif kind == "MI":
                    b[0] = -math.inf
                elif kind == "PL":
                    b[1] = math.inf
                elif kind == "BV":
                    b[0], b[1] = 0.0, 1.0
                    integer[j] = True
                else:
                    raise MPSError(f"line {lineno}: unsupported bound type {kind}")
            elif section == "RANGES":
                raise MPSError(f"line {lineno}: RANGES are not supported")
        except (IndexError, KeyError, ValueError) as exc:
            if isinstance(exc, MPSError):
                raise
            raise MPSError(f"line {lineno}: cannot parse {raw!r}") from None

    n, m = len(col_names), len(row_names)
    c = np.zeros(n)
    for j, v in coef_c.items():
        c[j] = v
    if entries:
        r, k, v = map(np.array, zip(*entries))
    else:
        r = k = np.zeros(0, dtype=np.int64)
        v = np.zeros(0)
    A = sp.csr_matrix((v, (r, k)), shape=(m, n))
    A.sum_duplicates()
    lb = np.zeros(n)
    ub = np.full(n, math.inf)
    for j, (lo, up) in bounds.items():
        lb[j], ub[j] = lo, up
    rvec = np.zeros(m)
    for i, val in rhs.items():
        rvec[i] = val
    integ = np.array(integer, dtype=bool)
    return LinearProgram(
        c=c, A=A, sense=np.array(senses, dtype="<U1"), rhs=rvec, lb=lb, ub=ub,
        var_names=col_names, row_names=row_names,
        integrality=integ if integ.any() else None, offset=offset, name=name,
    )


def write_solution(path: str | Path, lp: LinearProgram, x: np.ndarray) -> Path:
    path = Path(path)
    path.write_text("".join(f"{n} {_num(v)}\n" for n, v in zip(lp.var_names, x)))
    return path


def import_solution(path: str | Path, model, options: SolverOptions | None = None) -> SolveResult:
    """Map an external ``name value`` file onto ``model`` and re-verify feasibility."""
    lp: LinearProgram = getattr(model, "lp", model)
    opts = options or SolverOptions()
    index = {name: j for j, name in enumerate(lp.var_names)}
    x = np.full(lp.n_vars, np.nan)
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        if len(tok) != 2:
            raise SolutionImportError(f"line {lineno}: expected 'name value', got {raw!r}")
        if tok[0] not in index:
            raise SolutionImportError(f"line {lineno}: unknown variable {tok[0]!r}")
        try:
            x[index[tok[0]]] = float(tok[1])
        except ValueError:
            raise SolutionImportError(f"line {lineno}: bad value {tok[1]!r}") from None
    missing = np.flatnonzero(np.isnan(x))
    if missing.size:
        names = [lp.var_names[j] for j in missing[:5]]
        raise SolutionImportError(f"missing value for variable(s) {', '.join(names)}"
                                  + (" ..." if missing.size > 5 else ""))
    viol, worst = verify_point(lp, x)
    if viol > opts.tolerance:
        raise SolutionImportError(f"imported point is infeasible: row {worst} violated by {viol:.3g}")
    if lp.integrality is not None:
        frac = np.abs(x[lp.integrality] - np.round(x[lp.integrality]))
        if frac.size and frac.max() > 1e-6:
            j = np.flatnonzero(lp.integrality)[int(np.argmax(frac))]
            raise SolutionImportError(f"integer variable {lp.var_names[j]} has fractional value {x[j]}")
    return SolveResult(OPTIMAL, lp.objective(x), x, None, "imported", viol, worst)
