"""Sparse linear programs, a vectorised builder, and the reference solver.

The reference solver hands the (optionally geometric-mean scaled) problem to
HiGHS through :mod:`scipy.optimize` and re-verifies every OPTIMAL answer on
the unscaled rows. Mixed-integer models are accepted only up to a size cap;
larger ones must be exported and solved externally.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

OPTIMAL = "OPTIMAL"
INFEASIBLE = "INFEASIBLE"
UNBOUNDED = "UNBOUNDED"
ITERATION_LIMIT = "ITERATION_LIMIT"

LE, EQ, GE = "L", "E", "G"


class SolverError(RuntimeError):
    pass


class SizeCapExceeded(SolverError):
    """Integer model too large for the bundled branch-and-bound; export it instead."""


@dataclass(eq=False)
class LinearProgram:
    """``min c.x + offset`` subject to ``A x (sense) rhs`` and ``lb <= x <= ub``."""

    c: np.ndarray
    A: sp.csr_matrix
    sense: np.ndarray  # 'L', 'E' or 'G' per row
    rhs: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    var_names: list[str]
    row_names: list[str]
    integrality: np.ndarray | None = None
    offset: float = 0.0
    name: str = "lp"

    @property
    def n_vars(self) -> int:
        return len(self.c)

    @property
    def n_rows(self) -> int:
        return len(self.rhs)

    @property
    def is_mip(self) -> bool:
        return self.integrality is not None and bool(np.any(self.integrality))

    def objective(self, x: np.ndarray) -> float:
        return float(self.c @ x) + self.offset

    def row_violation(self, x: np.ndarray) -> np.ndarray:
        """Nonnegative violation of every row at ``x``."""
        act = self.A @ x
        v = np.zeros(self.n_rows)
        le = self.sense == LE
        ge = self.sense == GE
        eq = self.sense == EQ
        v[le] = np.maximum(act[le] - self.rhs[le], 0.0)
        v[ge] = np.maximum(self.rhs[ge] - act[ge], 0.0)
        v[eq] = np.abs(act[eq] - self.rhs[eq])
        return v

    def bound_violation(self, x: np.ndarray) -> np.ndarray:
        return np.maximum(self.lb - x, 0.0) + np.maximum(x - self.ub, 0.0)

    def check(self) -> None:
        if np.any(self.lb > self.ub):
            i = int(np.argmax(self.lb > self.ub))
            raise ValueError(f"variable {self.var_names[i]}: lower bound exceeds upper bound")
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.A.data)) and np.all(np.isfinite(self.rhs))):
            raise ValueError("non-finite coefficient in LP")


TINY_COEF = 1e-13


class LPBuilder:
    """Accumulate variables and rows in blocks.

    Variables are created in arrays and rows are added many at a time: each
    term ``(coef, ids)`` contributes ``coef[i] * x[ids[i]]`` to row ``i``.
    Scalars broadcast.
    """

    def __init__(self, name: str = "lp"):
        self.name = name
        self._lb: list[np.ndarray] = []
        self._ub: list[np.ndarray] = []
        self._int: list[np.ndarray] = []
        self._obj: list[tuple[np.ndarray, np.ndarray]] = []
        self.var_names: list[str] = []
        self.row_names: list[str] = []
        self._rows: list[np.ndarray] = []
        self._cols: list[np.ndarray] = []
        self._vals: list[np.ndarray] = []
        self._sense: list[np.ndarray] = []
        self._rhs: list[np.ndarray] = []
        self.n_vars = 0
        self.n_rows = 0
        self.offset = 0.0

    def add_vars(self, names: Sequence[str], lb=0.0, ub=np.inf, integer: bool = False) -> np.ndarray:
        n = len(names)
        ids = np.arange(self.n_vars, self.n_vars + n)
        self._lb.append(np.broadcast_to(np.asarray(lb, dtype=float), (n,)).copy())
        self._ub.append(np.broadcast_to(np.asarray(ub, dtype=float), (n,)).copy())
        self._int.append(np.full(n, integer))
        self.var_names.extend(names)
        self.n_vars += n
        return ids

    def add_var(self, name: str, lb=0.0, ub=np.inf, integer: bool = False) -> int:
        return int(self.add_vars([name], lb, ub, integer)[0])

    def set_bounds(self, ids, lb=None, ub=None) -> None:
        lbs = np.concatenate(self._lb) if len(self._lb) > 1 else self._lb[0]
        ubs = np.concatenate(self._ub) if len(self._ub) > 1 else self._ub[0]
        ids = np.atleast_1d(ids)
        if lb is not None:
            lbs[ids] = lb
        if ub is not None:
            ubs[ids] = ub
        self._lb, self._ub = [lbs], [ubs]

    def add_rows(self, terms: Iterable[tuple], sense: str, rhs, names: Sequence[str]) -> np.ndarray:
        n = len(names)
        rhs = np.broadcast_to(np.asarray(rhs, dtype=float), (n,))
        rows = np.arange(self.n_rows, self.n_rows + n)
        for coef, ids in terms:
            ids = np.broadcast_to(np.asarray(ids), (n,))
            coef = np.broadcast_to(np.asarray(coef, dtype=float), (n,))
            keep = (ids >= 0) & (coef != 0)
            self._rows.append(rows[keep])
            self._cols.append(ids[keep].astype(np.int64))
            self._vals.append(coef[keep])
        self._sense.append(np.full(n, sense))
        self._rhs.append(np.array(rhs, dtype=float))
        self.row_names.extend(names)
        self.n_rows += n
        return rows

    def add_row(self, ids, coefs, sense: str, rhs: float, name: str) -> int:
        """One row with arbitrarily many entries (repeated ids are summed at build)."""
        ids = np.asarray(ids, dtype=np.int64).ravel()
        coefs = np.broadcast_to(np.asarray(coefs, dtype=float), ids.shape)
        keep = (ids >= 0) & (coefs != 0)
        row = self.n_rows
        self._rows.append(np.full(int(keep.sum()), row))
        self._cols.append(ids[keep])
        self._vals.append(coefs[keep].copy())
        self._sense.append(np.array([sense]))
        self._rhs.append(np.array([float(rhs)]))
        self.row_names.append(name)
        self.n_rows += 1
        return row

    def add_objective(self, ids, coef) -> None:
        ids = np.atleast_1d(np.asarray(ids, dtype=np.int64))
        coef = np.broadcast_to(np.asarray(coef, dtype=float), ids.shape)
        self._obj.append((ids, coef.copy()))

    def build(self) -> LinearProgram:
        c = np.zeros(self.n_vars)
        for ids, coef in self._obj:
            np.add.at(c, ids, coef)
        if self._rows:
            r = np.concatenate(self._rows)
            k = np.concatenate(self._cols)
            v = np.concatenate(self._vals)
        else:
            r = k = np.zeros(0, dtype=np.int64)
            v = np.zeros(0)
        A = sp.csr_matrix((v, (r, k)), shape=(self.n_rows, self.n_vars))
        A.sum_duplicates()
        A.data[np.abs(A.data) < TINY_COEF] = 0.0  # HiGHS rejects denormal-scale entries
        A.eliminate_zeros()
        integ = np.concatenate(self._int) if self._int else np.zeros(0, dtype=bool)
        lp = LinearProgram(
            c=c, A=A,
            sense=np.concatenate(self._sense) if self._sense else np.zeros(0, dtype="<U1"),
            rhs=np.concatenate(self._rhs) if self._rhs else np.zeros(0),
            lb=np.concatenate(self._lb) if self._lb else np.zeros(0),
            ub=np.concatenate(self._ub) if self._ub else np.zeros(0),
            var_names=list(self.var_names), row_names=list(self.row_names),
            integrality=integ if integ.any() else None,
            offset=self.offset, name=self.name,
        )
        lp.check()
        return lp


@dataclass(frozen=True)
class SolverOptions:
    tolerance: float = 1e-7  # accepted scaled row violation
    max_iterations: int | None = None
    node_cap: int = 100_000
    integer_cap: int = 20_000  # largest integer model handled in-process
    mip_gap: float = 1e-6
    scaling: bool = True
    verify: bool = True
    method: str = "highs-ipm"  # LP algorithm; "highs-ds" for dual simplex


@dataclass(eq=False)
class SolveResult:
    status: str
    objective: float = float("nan")
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    message: str = ""
    max_violation: float = float("nan")
    worst_row: str | None = None
    solve_seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def geometric_scaling(A: sp.csr_matrix, passes: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Row and column factors r, s such that diag(r) A diag(s) has entries near 1."""
    m, n = A.shape
    r = np.ones(m)
    s = np.ones(n)
    if A.nnz == 0:
        return r, s
    coo = A.tocoo()
    logabs = np.log(np.abs(coo.data))
    for _ in range(passes):
        scaled = logabs + np.log(r[coo.row]) + np.log(s[coo.col])
        rmax = np.full(m, -np.inf)
        rmin = np.full(m, np.inf)
        np.maximum.at(rmax, coo.row, scaled)
        np.minimum.at(rmin, coo.row, scaled)
        has = np.isfinite(rmax)
        r[has] *= np.exp(-0.5 * (rmax[has] + rmin[has]))
        scaled = logabs + np.log(r[coo.row]) + np.log(s[coo.col])
        cmax = np.full(n, -np.inf)
        cmin = np.full(n, np.inf)
        np.maximum.at(cmax, coo.col, scaled)
        np.minimum.at(cmin, coo.col, scaled)
        has = np.isfinite(cmax)
        s[has] *= np.exp(-0.5 * (cmax[has] + cmin[has]))
    # powers of two keep the scaling exact in floating point
    r = np.exp2(np.round(np.log2(r)))
    s = np.exp2(np.round(np.log2(s)))
    return r, s


def verify_point(lp: LinearProgram, x: np.ndarray) -> tuple[float, str | None]:
    """Largest row violation relative to ``1 + |rhs|``, and the row it occurs in."""
    worst, name = 0.0, None
    if lp.n_rows:
        rel = lp.row_violation(x) / (1.0 + np.abs(lp.rhs))
        i = int(np.argmax(rel))
        worst, name = float(rel[i]), lp.row_names[i]
    bv = lp.bound_violation(x)
    if bv.size and bv.max() > worst:
        j = int(np.argmax(bv))
        worst, name = float(bv[j]), f"bound:{lp.var_names[j]}"
    return worst, name


def _polish(lp: LinearProgram, x: np.ndarray, opts: SolverOptions) -> np.ndarray:
    """Fix the rounded integers and re-solve the continuous part.

    Branch-and-bound accepts integers within its feasibility tolerance, so
    rounding them can leave the continuous columns slightly off.
    """
    k = lp.integrality
    if not np.any(~k):
        return x
    fixed = replace(lp, lb=np.where(k, x, lp.lb), ub=np.where(k, x, lp.ub), integrality=None)
    try:
        res = solve(fixed, replace(opts, verify=False))
    except SolverError:
        return x
    if not res.ok or verify_point(fixed, res.x)[0] >= verify_point(lp, x)[0]:
        return x
    out = res.x.copy()
    out[k] = x[k]
    return out


def solve(lp: LinearProgram, options: SolverOptions | None = None) -> SolveResult:
    """Solve ``lp`` deterministically; integer models go through branch-and-bound."""
    import time

    opts = options or SolverOptions()
    n = lp.n_vars
    if n == 0:
        return SolveResult(OPTIMAL, lp.offset, np.zeros(0), np.zeros(lp.n_rows), max_violation=0.0)
    if lp.is_mip and int(lp.integrality.sum()) > opts.integer_cap:
        raise SizeCapExceeded(
            f"{int(lp.integrality.sum())} integer variables exceed the in-process cap of "
            f"{opts.integer_cap}; export the model (MPS) for an external solve"
        )

    A, c, rhs, lb, ub = lp.A, lp.c, lp.rhs, lp.lb, lp.ub
    r = np.ones(lp.n_rows)
    s = np.ones(n)
    if opts.scaling and lp.n_rows:
        r, s = geometric_scaling(A)
        if lp.is_mip:
            s[lp.integrality] = 1.0  # integer columns stay unscaled
        A = sp.diags(r) @ A @ sp.diags(s)
        c = c * s
        rhs = rhs * r
        lb = lb / s
        ub = ub / s

    t0 = time.perf_counter()
    if lp.is_mip:
        lo = np.where(lp.sense == LE, -np.inf, rhs)
        hi = np.where(lp.sense == GE, np.inf, rhs)
        milp_opts = {"node_limit": opts.node_cap, "mip_rel_gap": opts.mip_gap, "presolve": True}
        res = milp(c, integrality=lp.integrality.astype(int), bounds=Bounds(lb, ub),
                   constraints=[LinearConstraint(A.tocsr(), lo, hi)] if lp.n_rows else None,
                   options=milp_opts)
        elapsed = time.perf_counter() - t0
        if res.status == 1:
            if res.x is None:
                raise SolverError(f"branch-and-bound hit the node cap ({opts.node_cap}) without an incumbent")
            raise SolverError(f"branch-and-bound hit the node cap ({opts.node_cap}); gap not closed")
        status = {0: OPTIMAL, 2: INFEASIBLE, 3: UNBOUNDED}.get(res.status)
        if status is None:
            raise SolverError(f"MILP solver failed: {res.message}")
        xs = res.x
        duals = None
    else:
        le, ge, eq = lp.sense == LE, lp.sense == GE, lp.sense == EQ
        A_ub = sp.vstack([A[le], -A[ge]]).tocsr() if (le.any() or ge.any()) else None
        b_ub = np.concatenate([rhs[le], -rhs[ge]]) if A_ub is not None else None
        A_eq = A[eq] if eq.any() else None
        b_eq = rhs[eq] if eq.any() else None
        hopts = {}
        if opts.max_iterations is not None:
            hopts["maxiter"] = opts.max_iterations
        methods = [opts.method] + [m for m in ("highs-ds", "highs-ipm") if m != opts.method]
        for method in methods:
            res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                          bounds=np.column_stack([lb, ub]), method=method, options=hopts)
            status = {0: OPTIMAL, 1: ITERATION_LIMIT, 2: INFEASIBLE, 3: UNBOUNDED}.get(res.status)
            if status is not None:
                break
        elapsed = time.perf_counter() - t0
        if status is None:
            raise SolverError(f"LP solver failed: {res.message}")
        xs = res.x
        duals = None
        if status == OPTIMAL:
            duals = np.zeros(lp.n_rows)
            ineq = getattr(res, "ineqlin", None)
            if ineq is not None and ineq.marginals is not None:
                m = np.asarray(ineq.marginals)
                nl = int(le.sum())
                duals[le] = m[:nl]
                duals[ge] = -m[nl:]
            eqm = getattr(res, "eqlin", None)
            if eqm is not None and eqm.marginals is not None and eq.any():
                duals[eq] = np.asarray(eqm.marginals)
            duals = duals * r

    if status != OPTIMAL:
        return SolveResult(status, message=str(res.message), solve_seconds=elapsed)

    x = np.asarray(xs) * s
    if lp.is_mip:
        x[lp.integrality] = np.round(x[lp.integrality])
        x = _polish(lp, x, opts)
    x = np.clip(x, lp.lb, lp.ub)
    viol, worst = verify_point(lp, x)
    if opts.verify and viol > max(opts.tolerance, 1e-7):
        raise SolverError(f"solution violates row {worst} by {viol:.3g} (scaled)")
    return SolveResult(OPTIMAL, lp.objective(x), x, duals, str(res.message), viol, worst, elapsed)
