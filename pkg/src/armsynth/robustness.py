"""Configuration robustness as a linear program, plus its companions.

Given a compiled robot model and a planned cell path, the robustness
program asks for per-step controls u (bounded by the budget plus slack
s^u), augmentation inputs v (direct state injections, bounded by slack
s^v), and state deviations that keep the linearized tip position inside
each path cell, while the per-step slack sums obey the growth bound
eps * (sum of earlier sums) <= current sum.  The certificate value is

    rho = - min max_i (s_i^u + s_i^v)

Both slack families are constrained nonnegative.  This is load-bearing:
if the control slack could run negative, the optimum would trade unused
control headroom for direct state injections, certifying tasks that no
bounded control sequence can perform and breaking the sign equivalence
with the direct feasibility program.  With nonnegative slacks, rho = 0
exactly when the task is achievable within the budget and rho < 0
quantifies the cheapest constraint violation otherwise.

Companions: ``feasibility`` solves the hard-constraint program (no slacks,
no augmentation) whose feasibility must match the sign of rho;
``min_slack`` minimizes the total nonnegative slack; ``zero_prefix`` counts
the leading near-zero entries of a slack sequence; ``validate_trajectory``
re-simulates a control witness through the exact nonlinear kinematics
against the original workspace, closing the linearization gap.

State deviations carry an explicit trust-region bound on the pose
components (same rows in every program here) so the linearization stays
meaningful; the exact re-validation catches whatever residual error
remains and feeds the counterexample loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import RobotModel, forward_kinematics, reach_annulus
from .errors import DomainError, ModelError, ParameterError
from .lp import LPResult, lp_to_text, solve_lp
from .planner import Path
from .workspace import FREE, TARGET, AbstractWorkspace, Workspace

LP_TOL = 1e-6
#: linearization trust region on pose deviations (radians)
TRUST_BOUND = 0.3
DEFAULT_EPS = 0.01


@dataclass
class RobustLP:
    """Assembled LP (shared by the robustness/feasibility/min-slack fronts)."""

    c: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    layout: "_Layout"

    def to_text(self) -> str:
        return lp_to_text(self.c, self.A_ub, self.b_ub, self.A_eq, self.b_eq)

    def solve(self) -> LPResult:
        return solve_lp(self.c, self.A_ub, self.b_ub, self.A_eq, self.b_eq)


@dataclass
class RobustnessResult:
    """Certificate value with its witnesses."""

    rho: float
    status: str  # "optimal" | "infeasible-LP" | "unbounded-guard"
    u: np.ndarray | None = None
    v: np.ndarray | None = None
    s_u: np.ndarray | None = None
    s_v: np.ndarray | None = None
    states: np.ndarray | None = None  # (k+1, 2n) deviations, row 0 zero


@dataclass
class FeasibilityResult:
    feasible: bool
    u: np.ndarray | None = None
    states: np.ndarray | None = None
    positions: np.ndarray | None = None  # exact tip positions along witness


@dataclass
class SlackProfile:
    f_k: float
    g_u: np.ndarray
    g_v: np.ndarray


@dataclass
class TrajectoryCheck:
    valid: bool
    violation_step: int | None = None
    reason: str | None = None


class _Layout:
    """Column offsets of the stacked decision vector."""

    def __init__(self, k: int, m: int, s: int, slacks: str):
        self.k, self.m, self.s = k, m, s
        self.with_v = slacks in ("robust", "minslack")
        self.slacks = slacks
        off = 0
        self.u0 = off
        off += k * m
        self.v0 = off
        if self.with_v:
            off += k * s
        self.x0 = off
        off += k * s
        self.su0 = off
        if slacks in ("robust", "minslack"):
            off += k
        self.sv0 = off
        if slacks in ("robust", "minslack"):
            off += k
        self.t0 = off
        if slacks == "robust":
            off += 1
        self.total = off

    def u(self, i: int, j: int = 0) -> int:
        return self.u0 + i * self.m + j

    def v(self, i: int, j: int = 0) -> int:
        return self.v0 + i * self.s + j

    def x(self, i: int, j: int = 0) -> int:
        # states x_1..x_k stored at indices i-1
        return self.x0 + (i - 1) * self.s + j

    def su(self, i: int) -> int:
        return self.su0 + i

    def sv(self, i: int) -> int:
        return self.sv0 + i


def _path_cells(aw: AbstractWorkspace, path: Path):
    return [aw.region_constraints(c) for c in path.cells]


def _check_model(model: RobotModel, path: Path) -> None:
    if model.horizon != path.horizon:
        raise ModelError(
            f"model horizon {model.horizon} does not match path length {path.horizon}")


def _nominal_in_cell(model: RobotModel, cell, step: int) -> bool:
    C, b = cell
    return bool(np.all(C @ model.positions[step] <= b + LP_TOL))


def build_robust_lp(model: RobotModel, aw: AbstractWorkspace, path: Path,
                    u_bound: float, eps: float = DEFAULT_EPS,
                    trust: float = TRUST_BOUND, mode: str = "robust") -> RobustLP:
    """Assemble the LP for one of the three program variants.

    mode "robust": slacked budget, augmentation inputs, epigraph objective.
    mode "minslack": nonnegative slacks, total-slack objective.
    mode "feasible": hard budget, no augmentation, zero objective.
    """
    _check_model(model, path)
    k = path.horizon
    n = model.n_links
    m, s = model.input_dim, model.state_dim
    lay = _Layout(k, m, s, mode)
    cells = _path_cells(aw, path)

    rows_ub: list[np.ndarray] = []
    rhs_ub: list[float] = []
    rows_eq: list[np.ndarray] = []
    rhs_eq: list[float] = []

    def row() -> np.ndarray:
        return np.zeros(lay.total)

    # dynamics: x_{i+1} - A_i x_i - B_i u_i - v_i = affine_i  (x_0 = 0)
    for i in range(k):
        A_i, B_i = model.A(i), model.B(i)
        aff = model.affine(i)
        for r in range(s):
            eq = row()
            eq[lay.x(i + 1, r)] = 1.0
            if i >= 1:
                eq[lay.x(i): lay.x(i) + s] -= A_i[r, :]
            eq[lay.u(i): lay.u(i) + m] -= B_i[r, :]
            if lay.with_v:
                eq[lay.v(i, r)] -= 1.0
            rows_eq.append(eq)
            rhs_eq.append(float(aff[r]))

    # region membership of the linearized tip position, plus trust region
    for i in range(1, k + 1):
        C, b = cells[i]
        J = model.jacobian(i)
        CJ = C @ J
        resid = b - C @ model.positions[i]
        for r in range(C.shape[0]):
            ub = row()
            ub[lay.x(i): lay.x(i) + n] = CJ[r, :]
            rows_ub.append(ub)
            rhs_ub.append(float(resid[r]))
        for j in range(n):
            for sign in (+1.0, -1.0):
                ub = row()
                ub[lay.x(i, j)] = sign
                rows_ub.append(ub)
                rhs_ub.append(trust)

    # control bounds
    for i in range(k):
        for j in range(m):
            for sign in (+1.0, -1.0):
                ub = row()
                ub[lay.u(i, j)] = sign
                if mode == "feasible":
                    rhs_ub.append(u_bound)
                else:
                    ub[lay.su(i)] = -1.0
                    rhs_ub.append(u_bound)
                rows_ub.append(ub)

    if mode != "feasible":
        # augmentation bounds and slack nonnegativity (both families; see
        # module docstring on why the control slack may not run negative)
        for i in range(k):
            for j in range(s):
                for sign in (+1.0, -1.0):
                    ub = row()
                    ub[lay.v(i, j)] = sign
                    ub[lay.sv(i)] = -1.0
                    rows_ub.append(ub)
                    rhs_ub.append(0.0)
            for col in (lay.sv(i), lay.su(i)):
                ub = row()
                ub[col] = -1.0
                rows_ub.append(ub)
                rhs_ub.append(0.0)
        # slack growth bound
        for i in range(1, k):
            ub = row()
            for l in range(i):
                ub[lay.su(l)] += eps
                ub[lay.sv(l)] += eps
            ub[lay.su(i)] -= 1.0
            ub[lay.sv(i)] -= 1.0
            rows_ub.append(ub)
            rhs_ub.append(0.0)

    c = np.zeros(lay.total)
    if mode == "robust":
        # epigraph: s_i^u + s_i^v <= t, minimize t
        for i in range(k):
            ub = row()
            ub[lay.su(i)] = 1.0
            ub[lay.sv(i)] = 1.0
            ub[lay.t0] = -1.0
            rows_ub.append(ub)
            rhs_ub.append(0.0)
        c[lay.t0] = 1.0
    elif mode == "minslack":
        c[lay.su0: lay.su0 + k] = 1.0
        c[lay.sv0: lay.sv0 + k] = 1.0

    return RobustLP(c=c,
                    A_ub=np.array(rows_ub), b_ub=np.array(rhs_ub),
                    A_eq=np.array(rows_eq), b_eq=np.array(rhs_eq),
                    layout=lay)


def _extract_states(x: np.ndarray, lay: _Layout) -> np.ndarray:
    states = np.zeros((lay.k + 1, lay.s))
    for i in range(1, lay.k + 1):
        states[i] = x[lay.x(i): lay.x(i) + lay.s]
    return states


def robustness(model: RobotModel, aw: AbstractWorkspace, path: Path,
               u_bound: float, eps: float = DEFAULT_EPS,
               trust: float = TRUST_BOUND) -> RobustnessResult:
    """Solve the slack-relaxed certificate program; rho = -optimum."""
    _check_model(model, path)
    if u_bound < 0 or eps <= 0:
        raise ParameterError("need u_bound >= 0 and eps > 0")
    k = path.horizon
    cells = _path_cells(aw, path)
    if not _nominal_in_cell(model, cells[0], 0):
        return RobustnessResult(rho=float("-inf"), status="infeasible-LP")
    if k == 0:
        return RobustnessResult(rho=0.0, status="optimal",
                                u=np.zeros((0, model.input_dim)),
                                v=np.zeros((0, model.state_dim)),
                                s_u=np.zeros(0), s_v=np.zeros(0),
                                states=np.zeros((1, model.state_dim)))
    lp = build_robust_lp(model, aw, path, u_bound, eps, trust, mode="robust")
    res = lp.solve()
    if res.status == "infeasible":
        return RobustnessResult(rho=float("-inf"), status="infeasible-LP")
    if res.status == "unbounded":
        return RobustnessResult(rho=float("inf"), status="unbounded-guard")
    lay = lp.layout
    x = res.x
    return RobustnessResult(
        rho=-float(res.value),
        status="optimal",
        u=x[lay.u0: lay.u0 + lay.k * lay.m].reshape(lay.k, lay.m),
        v=x[lay.v0: lay.v0 + lay.k * lay.s].reshape(lay.k, lay.s),
        s_u=x[lay.su0: lay.su0 + lay.k].copy(),
        s_v=x[lay.sv0: lay.sv0 + lay.k].copy(),
        states=_extract_states(x, lay))


def feasibility(model: RobotModel, aw: AbstractWorkspace, path: Path,
                u_bound: float, trust: float = TRUST_BOUND) -> FeasibilityResult:
    """Hard-constraint direct program: is the path trackable within budget?"""
    _check_model(model, path)
    k = path.horizon
    cells = _path_cells(aw, path)
    if not _nominal_in_cell(model, cells[0], 0):
        return FeasibilityResult(feasible=False)
    if k == 0:
        return FeasibilityResult(feasible=True,
                                 u=np.zeros((0, model.input_dim)),
                                 states=np.zeros((1, model.state_dim)),
                                 positions=model.positions.copy())
    lp = build_robust_lp(model, aw, path, u_bound, trust=trust, mode="feasible")
    res = lp.solve()
    if not res.optimal:
        return FeasibilityResult(feasible=False)
    lay = lp.layout
    u = res.x[lay.u0: lay.u0 + lay.k * lay.m].reshape(lay.k, lay.m)
    states = _extract_states(res.x, lay)
    n = model.n_links
    positions = np.array([forward_kinematics(model.lengths, model.q0[i] + states[i][:n])
                          for i in range(k + 1)])
    return FeasibilityResult(feasible=True, u=u, states=states, positions=positions)


def min_slack(model: RobotModel, aw: AbstractWorkspace, path: Path,
              u_bound: float, eps: float = DEFAULT_EPS,
              trust: float = TRUST_BOUND) -> SlackProfile:
    """Minimum total nonnegative slack needed to track the path."""
    _check_model(model, path)
    k = path.horizon
    cells = _path_cells(aw, path)
    if k == 0 or not _nominal_in_cell(model, cells[0], 0):
        return SlackProfile(f_k=0.0 if k == 0 else float("inf"),
                            g_u=np.zeros(k), g_v=np.zeros(k))
    lp = build_robust_lp(model, aw, path, u_bound, eps, trust, mode="minslack")
    res = lp.solve()
    if not res.optimal:
        return SlackProfile(f_k=float("inf"), g_u=np.zeros(k), g_v=np.zeros(k))
    lay = lp.layout
    return SlackProfile(f_k=float(res.value),
                        g_u=res.x[lay.su0: lay.su0 + k].copy(),
                        g_v=res.x[lay.sv0: lay.sv0 + k].copy())


def zero_prefix(g, eps: float) -> int:
    """Number of leading entries before the running sum first exceeds eps."""
    g = np.asarray(g, dtype=float)
    if eps <= 0:
        raise ParameterError("eps must be positive")
    if np.any(g < 0):
        raise DomainError("slack sequence entries must be nonnegative")
    total = 0.0
    for m, value in enumerate(g):
        total += float(value)
        if total > eps:
            return m
    return int(g.size)


def validate_trajectory(model: RobotModel, params, u, w: Workspace,
                        path: Path) -> TrajectoryCheck:
    """Re-simulate a control witness and check the task under the exact
    nonlinear kinematics against the original workspace."""
    n = model.n_links
    k = path.horizon
    u = np.zeros((0, model.input_dim)) if u is None else np.atleast_2d(np.asarray(u, dtype=float))
    if u.shape[0] != k:
        raise ModelError(f"witness has {u.shape[0]} controls for horizon {k}")
    state = np.zeros(model.state_dim)
    adjacency = w.adjacency
    prev_region = None
    for i in range(k + 1):
        q = model.q0[i] + state[:n]
        pos = forward_kinematics(params, q)
        try:
            region, prop = w.classify_point(pos)
        except Exception:
            return TrajectoryCheck(False, i, "tip position left the workspace")
        wanted = TARGET if i == k else FREE
        if prop != wanted:
            return TrajectoryCheck(False, i, f"step {i} is {prop}, expected {wanted}")
        if prev_region is not None and not adjacency[prev_region, region]:
            return TrajectoryCheck(False, i, "non-adjacent region transition")
        prev_region = region
        if i < k:
            state = model.A(i) @ state + model.B(i) @ u[i] + model.affine(i)
    return TrajectoryCheck(True)


def evaluate_configuration(word, lengths, aw: AbstractWorkspace, path: Path,
                           u_bound: float, eps: float = DEFAULT_EPS,
                           dt: float = 0.1, trust: float = TRUST_BOUND,
                           catalog=None) -> RobustnessResult:
    """Robustness of one (word, lengths) candidate on one path.

    The end-to-end oracle used by the length search: builds the nominal
    trajectory, compiles the model, and solves the certificate LP.
    Kinematic unreachability is folded into the -inf sentinel since it
    means the region-membership constraints cannot even be centered.
    """
    from .dynamics import compile_robot
    from .errors import ModelError, ReachabilityError

    try:
        targets = nominal_targets(lengths, aw, path)
        model = compile_robot(word, lengths, targets, dt=dt, catalog=catalog)
    except (ReachabilityError, ModelError):
        return RobustnessResult(rho=float("-inf"), status="infeasible-LP")
    return robustness(model, aw, path, u_bound, eps, trust)


def nominal_targets(params, aw: AbstractWorkspace, path: Path) -> np.ndarray:
    """Tracking targets for the nominal trajectory: the path cell centers,
    projected radially onto the reachable annulus when that projection stays
    inside the cell.  Raises ReachabilityError otherwise (via kinematics)."""
    from .errors import ReachabilityError

    inner, outer = reach_annulus(params)
    targets = []
    for cell in path.cells:
        cx, cy = aw.cell_center(cell)
        r = float(np.hypot(cx, cy))
        r_clip = min(max(r, inner), outer)
        if r_clip != r:
            if r <= 1e-12:
                raise ReachabilityError("cell center at the base has no direction")
            scale = r_clip / r
            px, py = cx * scale, cy * scale
            xlo, xhi, ylo, yhi = aw.cell_bounds(cell)
            if not (xlo - 1e-9 <= px <= xhi + 1e-9 and ylo - 1e-9 <= py <= yhi + 1e-9):
                raise ReachabilityError(
                    f"cell at ({cx:.3g}, {cy:.3g}) unreachable: annulus "
                    f"[{inner:.3g}, {outer:.3g}]")
            targets.append((px, py))
        else:
            targets.append((cx, cy))
    return np.asarray(targets)
