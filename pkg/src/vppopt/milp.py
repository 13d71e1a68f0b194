"""Solver-agnostic MILP container, backend adapters, and a verifier.

A :class:`MilpModel` holds variables, linear constraints, SOS-2 sets and a
maximization objective. Solving goes through an adapter; the default wraps
``scipy.optimize.milp`` (HiGHS). Adapters that lack native SOS-2 support
declare it, and :func:`solve` falls back to the standard segment-binary
reformulation, projecting the solution back onto the original variables.

:func:`verify` re-checks any assignment against the model independently of
the backend, so every run can self-certify feasibility.
"""

from __future__ import annotations

import itertools
import math
import re
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Protocol, Sequence

import numpy as np
import scipy.optimize
import scipy.sparse

CONTINUOUS = "continuous"
BINARY = "binary"

_SENSES = ("<=", ">=", "==")


@dataclass(frozen=True)
class SolveOptions:
    gap_tol: float = 1e-6
    time_limit: float = 60.0
    feas_tol: float = 1e-6
    verbose: bool = False


@dataclass(frozen=True)
class Solution:
    """Solver outcome. An assignment is present exactly when the status is
    optimal or feasible."""

    status: str  # optimal | feasible | infeasible | unbounded | error
    objective: float | None = None
    values: np.ndarray | None = None
    gap: float | None = None
    runtime_s: float = 0.0
    message: str = ""

    def __post_init__(self):
        has_assignment = self.values is not None
        if has_assignment != (self.status in ("optimal", "feasible")):
            raise ValueError(
                f"status {self.status!r} inconsistent with assignment presence {has_assignment}")


@dataclass(frozen=True)
class Violation:
    kind: str  # constraint | bound | integrality | sos2
    name: str
    residual: float

    def __str__(self) -> str:
        return f"{self.kind} {self.name}: residual {self.residual:.3e}"


class MilpModel:
    """Mutable builder for a mixed-integer linear program (maximize)."""

    def __init__(self, name: str = ""):
        self.name = name
        self._kind: list[str] = []
        self._lb: list[float] = []
        self._ub: list[float] = []
        self._var_names: list[str] = []
        # each constraint: (coeffs dict var->coef, sense, rhs, name)
        self._constraints: list[tuple[dict[int, float], str, float, str]] = []
        self.sos2_sets: list[tuple[tuple[int, ...], str]] = []
        self._obj: dict[int, float] = {}
        self.obj_constant: float = 0.0

    # -- construction -------------------------------------------------

    def add_continuous(self, name: str = "", lb: float = 0.0, ub: float = math.inf) -> int:
        return self._add_var(CONTINUOUS, name, lb, ub)

    def add_binary(self, name: str = "") -> int:
        return self._add_var(BINARY, name, 0.0, 1.0)

    def _add_var(self, kind: str, name: str, lb: float, ub: float) -> int:
        self._kind.append(kind)
        self._lb.append(float(lb))
        self._ub.append(float(ub))
        self._var_names.append(name)
        return len(self._kind) - 1

    def add_constraint(self, coeffs: Mapping[int, float], sense: str, rhs: float,
                       name: str = "") -> int:
        if sense not in _SENSES:
            raise ValueError(f"unknown sense {sense!r}")
        self._constraints.append((dict(coeffs), sense, float(rhs), name))
        return len(self._constraints) - 1

    def add_sos2(self, members: Sequence[int], name: str = "") -> None:
        self.sos2_sets.append((tuple(members), name))

    def set_objective(self, coeffs: Mapping[int, float], constant: float = 0.0) -> None:
        self._obj = dict(coeffs)
        self.obj_constant = float(constant)

    def set_bounds(self, var_id: int, lb: float | None = None, ub: float | None = None) -> None:
        if lb is not None:
            self._lb[var_id] = float(lb)
        if ub is not None:
            self._ub[var_id] = float(ub)

    # -- inspection ---------------------------------------------------

    @property
    def n_vars(self) -> int:
        return len(self._kind)

    @property
    def n_constraints(self) -> int:
        return len(self._constraints)

    def kind(self, var_id: int) -> str:
        return self._kind[var_id]

    def bounds(self, var_id: int) -> tuple[float, float]:
        return self._lb[var_id], self._ub[var_id]

    def var_name(self, var_id: int) -> str:
        return self._var_names[var_id] or f"x{var_id}"

    def constraint(self, row: int) -> tuple[dict[int, float], str, float, str]:
        coeffs, sense, rhs, name = self._constraints[row]
        return dict(coeffs), sense, rhs, name

    def constraint_name(self, row: int) -> str:
        name = self._constraints[row][3]
        return name or f"c{row}"

    @property
    def objective_coeffs(self) -> dict[int, float]:
        return dict(self._obj)

    def lb_array(self) -> np.ndarray:
        return np.array(self._lb, dtype=float)

    def ub_array(self) -> np.ndarray:
        return np.array(self._ub, dtype=float)

    def copy(self, drop_sos2: bool = False) -> "MilpModel":
        out = MilpModel(self.name)
        out._kind = list(self._kind)
        out._lb = list(self._lb)
        out._ub = list(self._ub)
        out._var_names = list(self._var_names)
        out._constraints = [(dict(c), s, r, n) for c, s, r, n in self._constraints]
        out.sos2_sets = [] if drop_sos2 else list(self.sos2_sets)
        out._obj = dict(self._obj)
        out.obj_constant = self.obj_constant
        return out

    def validate(self) -> None:
        """Raise ValueError on any structural defect."""
        n = self.n_vars
        for i, (coeffs, sense, rhs, name) in enumerate(self._constraints):
            for v in coeffs:
                if not 0 <= v < n:
                    raise ValueError(f"constraint {name or i} references unknown variable {v}")
            if not math.isfinite(rhs):
                raise ValueError(f"constraint {name or i} has non-finite rhs {rhs}")
        for v in self._obj:
            if not 0 <= v < n:
                raise ValueError(f"objective references unknown variable {v}")
        for members, name in self.sos2_sets:
            if len(members) < 2:
                raise ValueError(f"SOS-2 set {name!r} needs at least 2 members")
            if len(set(members)) != len(members):
                raise ValueError(f"SOS-2 set {name!r} repeats a member")
            for m in members:
                if not 0 <= m < n:
                    raise ValueError(f"SOS-2 set {name!r} references unknown variable {m}")
                if self._kind[m] != CONTINUOUS:
                    raise ValueError(f"SOS-2 set {name!r} member {m} must be continuous")
        for i, (kind, lb, ub) in enumerate(zip(self._kind, self._lb, self._ub)):
            if kind == BINARY and not (0 <= lb and ub <= 1):
                raise ValueError(f"binary variable {self.var_name(i)} has bounds outside [0,1]")
            if math.isnan(lb) or math.isnan(ub):
                raise ValueError(f"variable {self.var_name(i)} has NaN bounds")


# ---------------------------------------------------------------------------
# Adapters
# ---------------------------------------------------------------------------

class SolverAdapter(Protocol):
    """Contract a backend must satisfy.

    ``supports_sos2`` False routes the model through the binary
    reformulation before the adapter ever sees it. Non-reentrant backends
    set ``reentrant`` False and are serialized by callers running
    concurrent solves.
    """

    supports_sos2: bool
    reentrant: bool

    def solve(self, model: MilpModel, options: SolveOptions) -> Solution: ...


class ScipyMilpAdapter:
    """HiGHS backend via scipy.optimize.milp. No native SOS-2 support, so
    models with SOS-2 sets take the reformulation path.

    Integer variables come back from the backend only to within its
    integrality tolerance; downstream identities (piecewise conversion,
    storage telescoping) amplify that noise. Assignments with integers are
    therefore polished: the integers are rounded and fixed, and the
    continuous variables are refit by one LP solve.
    """

    supports_sos2 = False
    reentrant = True

    def solve(self, model: MilpModel, options: SolveOptions) -> Solution:
        if model.sos2_sets:
            raise ValueError("scipy backend cannot take SOS-2 sets directly; use solve()")
        t0 = time.perf_counter()
        n = model.n_vars
        lb, ub = model.lb_array(), model.ub_array()
        if np.any(lb > ub):
            return Solution(status="infeasible", message="empty variable domain",
                            runtime_s=time.perf_counter() - t0)

        c = np.zeros(n)
        for v, coef in model.objective_coeffs.items():
            c[v] = -coef  # backend minimizes
        integrality = np.array([1 if model.kind(i) == BINARY else 0 for i in range(n)])

        constraints = []
        if model.n_constraints:
            rows, cols, data, clb, cub = [], [], [], [], []
            for r in range(model.n_constraints):
                coeffs, sense, rhs, _ = model.constraint(r)
                for v, coef in coeffs.items():
                    rows.append(r)
                    cols.append(v)
                    data.append(coef)
                if sense == "<=":
                    clb.append(-math.inf)
                    cub.append(rhs)
                elif sense == ">=":
                    clb.append(rhs)
                    cub.append(math.inf)
                else:
                    clb.append(rhs)
                    cub.append(rhs)
            mat = scipy.sparse.csr_matrix((data, (rows, cols)),
                                          shape=(model.n_constraints, n))
            constraints = [scipy.optimize.LinearConstraint(mat, clb, cub)]

        def call_backend(lo: np.ndarray, hi: np.ndarray, integ: np.ndarray):
            return scipy.optimize.milp(
                c,
                constraints=constraints,
                integrality=integ,
                bounds=scipy.optimize.Bounds(lo, hi),
                options={
                    "disp": options.verbose,
                    "presolve": True,
                    "time_limit": options.time_limit,
                    "mip_rel_gap": options.gap_tol,
                },
            )

        try:
            res = call_backend(lb, ub, integrality)
        except Exception as exc:  # backend failure surfaces as a status
            return Solution(status="error", message=f"backend failure: {exc}",
                            runtime_s=time.perf_counter() - t0)

        gap = getattr(res, "mip_gap", None)
        gap = float(gap) if gap is not None else None
        if res.status in (0, 1) and res.x is not None:
            status = "optimal" if res.status == 0 else "feasible"
            values = self._polish(np.asarray(res.x, dtype=float), call_backend,
                                  lb, ub, integrality)
            objective = float(c @ values)
            return Solution(status=status, objective=-objective + model.obj_constant,
                            values=values, gap=gap,
                            runtime_s=time.perf_counter() - t0, message=str(res.message))
        status = {1: "error", 2: "infeasible", 3: "unbounded"}.get(res.status, "error")
        return Solution(status=status, runtime_s=time.perf_counter() - t0,
                        message=str(res.message))

    @staticmethod
    def _polish(x: np.ndarray, call_backend, lb: np.ndarray, ub: np.ndarray,
                integrality: np.ndarray) -> np.ndarray:
        """Fix the integers at their rounded values and refit the rest.

        Keeps the incumbent when the refit fails, which can only happen
        through backend numerics: the rounded point is feasible whenever
        the incumbent satisfied the integrality tolerance.
        """
        mask = integrality > 0
        if not mask.any():
            return x
        snapped = np.clip(np.round(x[mask]), lb[mask], ub[mask])
        lo, hi = lb.copy(), ub.copy()
        lo[mask] = snapped
        hi[mask] = snapped
        try:
            res = call_backend(lo, hi, np.zeros(x.shape[0]))
        except Exception:
            return x
        if res.status == 0 and res.x is not None:
            polished = np.asarray(res.x, dtype=float)
            polished[mask] = snapped
            return polished
        return x


class Sos2EnumerationAdapter:
    """Exact SOS-2 handling by enumerating active segments.

    Each SOS-2 set allows exactly one adjacent pair of nonzero members;
    this adapter tries every combination of active pairs, zeroes out the
    remaining members through their upper bounds, delegates the residual
    MILP to a base backend, and keeps the best outcome. Exponential in the
    number of sets, so it suits small models and serves as an independent
    reference for the reformulation path.
    """

    supports_sos2 = True
    reentrant = True

    def __init__(self, base: SolverAdapter | None = None, combo_limit: int = 10000):
        self.base = base if base is not None else ScipyMilpAdapter()
        self.combo_limit = combo_limit

    def solve(self, model: MilpModel, options: SolveOptions) -> Solution:
        if not model.sos2_sets:
            return self.base.solve(model, options)
        for members, name in model.sos2_sets:
            for m in members:
                if model.bounds(m)[0] > 0:
                    raise ValueError(
                        f"SOS-2 set {name!r} member {m} has a positive lower bound; "
                        "members must admit zero")

        n_combos = math.prod(len(members) - 1 for members, _ in model.sos2_sets)
        if n_combos > self.combo_limit:
            raise ValueError(f"{n_combos} segment combinations exceed the enumeration limit")

        t0 = time.perf_counter()
        best: Solution | None = None
        any_limit = False
        any_error = False
        segment_choices = [range(len(members) - 1) for members, _ in model.sos2_sets]
        for combo in itertools.product(*segment_choices):
            sub = model.copy(drop_sos2=True)
            for (members, _), seg in zip(model.sos2_sets, combo):
                active = {members[seg], members[seg + 1]}
                for m in members:
                    if m not in active:
                        sub.set_bounds(m, ub=0.0)
            res = self.base.solve(sub, options)
            if res.status in ("optimal", "feasible"):
                if res.status == "feasible":
                    any_limit = True
                if best is None or res.objective > best.objective:
                    best = res
            elif res.status in ("unbounded", "error"):
                any_error = any_error or res.status == "error"
                if res.status == "unbounded":
                    return replace(res, runtime_s=time.perf_counter() - t0)
        runtime = time.perf_counter() - t0
        if best is None:
            if any_error:
                return Solution(status="error", runtime_s=runtime,
                                message="all segment subproblems failed")
            return Solution(status="infeasible", runtime_s=runtime,
                            message="every segment combination is infeasible")
        status = "feasible" if any_limit else "optimal"
        return replace(best, status=status, runtime_s=runtime)


# ---------------------------------------------------------------------------
# Solving, reformulation, verification
# ---------------------------------------------------------------------------

def solve(model: MilpModel, options: SolveOptions | None = None,
          adapter: SolverAdapter | None = None) -> Solution:
    """Solve a model through an adapter (default: scipy/HiGHS).

    When the model has SOS-2 sets and the adapter lacks native support,
    the segment-binary reformulation is solved instead and the assignment
    is projected back onto the original variables.
    """
    options = options or SolveOptions()
    adapter = adapter if adapter is not None else ScipyMilpAdapter()
    model.validate()

    if model.n_vars == 0:
        # nothing to decide; constraints reduce to constant comparisons
        for r in range(model.n_constraints):
            _, sense, rhs, name = model.constraint(r)
            ok = {"<=": 0 <= rhs, ">=": 0 >= rhs, "==": rhs == 0}[sense]
            if not ok:
                return Solution(status="infeasible",
                                message=f"constant constraint {name or r} fails")
        return Solution(status="optimal", objective=model.obj_constant,
                        values=np.zeros(0))

    if model.sos2_sets and not adapter.supports_sos2:
        reformulated = reformulate_sos2_as_binary(model)
        sol = adapter.solve(reformulated, options)
        if sol.values is not None:
            sol = replace(sol, values=sol.values[:model.n_vars])
        return sol
    return adapter.solve(model, options)


def reformulate_sos2_as_binary(model: MilpModel) -> MilpModel:
    """Replace each SOS-2 set by segment-selection binaries.

    A set of n weights gains n-1 binaries, one per adjacent pair; exactly
    one segment is active and each weight is capped at its upper bound
    times the activity of the segments it belongs to. Projecting the new
    feasible set onto the original variables reproduces the SOS-2 set
    exactly. Members must have finite upper bounds.
    """
    if not model.sos2_sets:
        return model.copy()
    out = model.copy(drop_sos2=True)
    for members, name in model.sos2_sets:
        label = name or f"sos{len(out.sos2_sets)}"
        for m in members:
            if not math.isfinite(model.bounds(m)[1]):
                raise ValueError(
                    f"SOS-2 set {name!r} member {m} needs a finite upper bound "
                    "for the binary reformulation")
        z = [out.add_binary(f"{label}_seg{j}") for j in range(len(members) - 1)]
        out.add_constraint({v: 1.0 for v in z}, "==", 1.0, f"{label}_one_segment")
        for i, m in enumerate(members):
            ub = model.bounds(m)[1]
            coeffs = {m: 1.0}
            if i > 0:
                coeffs[z[i - 1]] = -ub
            if i < len(members) - 1:
                coeffs[z[i]] = coeffs.get(z[i], 0.0) - ub
            out.add_constraint(coeffs, "<=", 0.0, f"{label}_link{i}")
    return out


def verify(model: MilpModel, solution: Solution, feas_tol: float = 1e-6) -> list[Violation]:
    """Independently re-check an assignment against the model.

    Returns one violation per failed constraint, bound, integrality or
    SOS-2 condition; an empty list certifies feasibility within the
    tolerance.
    """
    if solution.values is None:
        raise ValueError(f"solution with status {solution.status!r} has no assignment")
    x = np.asarray(solution.values, dtype=float)
    if x.shape != (model.n_vars,):
        raise ValueError(f"assignment has {x.shape[0]} values, model has {model.n_vars} variables")
    out: list[Violation] = []

    for r in range(model.n_constraints):
        coeffs, sense, rhs, _ = model.constraint(r)
        act = sum(coef * x[v] for v, coef in coeffs.items())
        if sense == "<=":
            residual = act - rhs
        elif sense == ">=":
            residual = rhs - act
        else:
            residual = abs(act - rhs)
        if residual > feas_tol:
            out.append(Violation("constraint", model.constraint_name(r), float(residual)))

    for i in range(model.n_vars):
        lb, ub = model.bounds(i)
        if x[i] < lb - feas_tol:
            out.append(Violation("bound", model.var_name(i), float(lb - x[i])))
        elif x[i] > ub + feas_tol:
            out.append(Violation("bound", model.var_name(i), float(x[i] - ub)))
        if model.kind(i) == BINARY:
            drift = abs(x[i] - round(x[i]))
            if drift > feas_tol:
                out.append(Violation("integrality", model.var_name(i), float(drift)))

    for members, name in model.sos2_sets:
        nz = [m for m in members if abs(x[m]) > feas_tol]
        label = (name or "sos2") + " adjacency"
        if len(nz) > 2:
            # everything beyond the largest adjacent pair must vanish
            residual = sorted((abs(x[m]) for m in nz), reverse=True)[2]
            out.append(Violation("sos2", label, float(residual)))
        elif len(nz) == 2:
            i, j = (members.index(nz[0]), members.index(nz[1]))
            if abs(i - j) != 1:
                out.append(Violation("sos2", label, float(min(abs(x[m]) for m in nz))))
    return out


def recompute_objective(model: MilpModel, values: np.ndarray) -> float:
    """Objective value implied by an assignment, independent of the solver."""
    x = np.asarray(values, dtype=float)
    return float(sum(coef * x[v] for v, coef in model.objective_coeffs.items())
                 + model.obj_constant)


# ---------------------------------------------------------------------------
# LP-format dump
# ---------------------------------------------------------------------------

_NAME_OK = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")


def _sanitize(raw: str, fallback: str, taken: set[str]) -> str:
    name = re.sub(r"[^A-Za-z0-9_.]", "_", raw) if raw else fallback
    if not _NAME_OK.match(name) or name[0] in "eE" and name[1:2].isdigit():
        name = f"v_{name}"
    if name in taken:
        name = f"{name}_{fallback}"
    taken.add(name)
    return name


def _coef_str(coef: float, name: str, first: bool) -> str:
    mag = abs(coef)
    body = name if mag == 1 else f"{mag:.12g} {name}"
    if first:
        return f"-{body}" if coef < 0 else body
    return f"- {body}" if coef < 0 else f"+ {body}"


def dump_lp(model: MilpModel, path: str | Path | None = None) -> str:
    """Render the model in LP-format-compatible text (with an SOS section).

    Names are sanitized to the LP character set; the objective constant,
    which the format cannot express, is recorded as a comment.
    """
    taken: set[str] = set()
    vnames = [_sanitize(model.var_name(i), f"x{i}", taken) for i in range(model.n_vars)]
    cnames = [_sanitize(model.constraint_name(r), f"c{r}", taken)
              for r in range(model.n_constraints)]

    def terms(coeffs: Mapping[int, float]) -> str:
        parts = []
        for v in sorted(coeffs):
            if coeffs[v] == 0:
                continue
            parts.append(_coef_str(coeffs[v], vnames[v], first=not parts))
        return " ".join(parts) if parts else "0 " + (vnames[0] if vnames else "x0")

    lines = []
    if model.name:
        lines.append(f"\\ {model.name}")
    if model.obj_constant:
        lines.append(f"\\ objective constant: {model.obj_constant!r}")
    lines.append("Maximize")
    lines.append(f" obj: {terms(model.objective_coeffs)}")
    lines.append("Subject To")
    sense_txt = {"<=": "<=", ">=": ">=", "==": "="}
    for r in range(model.n_constraints):
        coeffs, sense, rhs, _ = model.constraint(r)
        lines.append(f" {cnames[r]}: {terms(coeffs)} {sense_txt[sense]} {rhs:.12g}")
    lines.append("Bounds")
    for i in range(model.n_vars):
        lb, ub = model.bounds(i)
        if model.kind(i) == BINARY and lb == 0 and ub == 1:
            continue
        if lb == ub:
            lines.append(f" {vnames[i]} = {lb:.12g}")
        elif lb == -math.inf and ub == math.inf:
            lines.append(f" {vnames[i]} free")
        else:
            lo = "-inf" if lb == -math.inf else f"{lb:.12g}"
            hi = "+inf" if ub == math.inf else f"{ub:.12g}"
            lines.append(f" {lo} <= {vnames[i]} <= {hi}")
    binaries = [vnames[i] for i in range(model.n_vars) if model.kind(i) == BINARY]
    if binaries:
        lines.append("Binary")
        lines.extend(f" {b}" for b in binaries)
    if model.sos2_sets:
        lines.append("SOS")
        sos_taken: set[str] = set()
        for idx, (members, name) in enumerate(model.sos2_sets):
            sname = _sanitize(name, f"s{idx}", sos_taken)
            weights = " ".join(f"{vnames[m]}:{j + 1}" for j, m in enumerate(members))
            lines.append(f" {sname}: S2:: {weights}")
    lines.append("End")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
