"""Robot dynamics compiled from a structure word and link lengths.

The assembly semantics walk the word token by token: a joint token leaves
the kinematic matrices unchanged, a link token appends one column.  The
net effect is a family of matrices (velocity offset E0, velocity-coupling
E1, geometry E2) whose length-weighted, stage-accumulated Gram products
assemble the linearized equations of motion

    M Δq̈ + C Δq̇ + K Δq = Δτ - F

about a nominal trajectory, with the time derivatives of the E matrices
taken by finite differences along that trajectory.  Links carry unit line
density so all masses are pure polynomials in the lengths.

The two-link arm additionally gets its exact closed-form inertia
(``two_link_D``, written in the relative elbow angle); ``compile_robot``
uses that exact model for two links and the assembled approximation for
other arities.  State is always the absolute link angles plus rates and
the inputs are the relative (per-joint) torque perturbations, so the same
torque bound applies uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import Catalog, default_catalog
from .errors import ModelError, ParameterError, ReachabilityError, StructureError
from .grammar import ConfigWord, link_count

IK_TOL = 1e-6


@dataclass(frozen=True)
class ModuleModel:
    """Dynamic role of one module symbol: how many pose coordinates, control
    channels, and parameters it contributes to the assembled robot."""

    tag: str
    role: str
    state_dim: int
    control_dim: int
    param_bounds: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.param_bounds is not None:
            lo, hi = self.param_bounds
            if not (0.0 < lo <= hi < float("inf")):
                raise ModelError("parameter bounds must be finite with positive lower bound")


def module_model(catalog: Catalog, tag: str) -> ModuleModel:
    sym = catalog.nodes.get(tag)
    if sym is None:
        raise ModelError(f"unknown module symbol {tag!r}")
    if sym.role == "link":
        return ModuleModel(tag, sym.role, state_dim=1, control_dim=0,
                           param_bounds=catalog.length_bounds(tag))
    if sym.role == "joint":
        return ModuleModel(tag, sym.role, state_dim=0, control_dim=1)
    return ModuleModel(tag, sym.role, state_dim=0, control_dim=0)


@dataclass(frozen=True)
class ParamAssignment:
    """Ordered link lengths, one per link token of the word (meters)."""

    lengths: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "lengths", tuple(float(v) for v in self.lengths))

    def check(self, word: ConfigWord, catalog: Catalog) -> None:
        n = link_count(word, catalog.role_tag("link"))
        if len(self.lengths) != n:
            raise ParameterError(f"{len(self.lengths)} lengths for {n} links")
        lo, hi = catalog.length_bounds()
        for value in self.lengths:
            if not (lo - 1e-12 <= value <= hi + 1e-12):
                raise ParameterError(f"length {value} outside [{lo}, {hi}]")

    def __len__(self) -> int:
        return len(self.lengths)


def _as_lengths(params) -> np.ndarray:
    if isinstance(params, ParamAssignment):
        return np.asarray(params.lengths, dtype=float)
    return np.asarray(params, dtype=float)


class EMatrices:
    """Kinematic matrices of an i-link chain at one nominal pose/rate.

    ``E2`` holds the per-link geometry columns, ``E1`` their velocity
    coupling, and ``E0_stages[:, m]`` the planar tip velocity of the m-link
    prefix.  ``gram`` returns the stage-accumulated, length-weighted
    products that appear in the equations of motion: adding a link extends
    the previous product with the new stage term, which is tested against
    direct summation.
    """

    def __init__(self, lengths, E1, E2, E0_stages):
        self.lengths = np.asarray(lengths, dtype=float)
        self.E1 = np.asarray(E1, dtype=float)
        self.E2 = np.asarray(E2, dtype=float)
        self.E0_stages = np.asarray(E0_stages, dtype=float)
        self.n = self.lengths.size

    @property
    def E0(self) -> np.ndarray:
        return self.E0_stages[:, -1]

    def stage_factor(self, which: int, m: int) -> np.ndarray:
        """2 x dim factor of matrix family `which` at stage m."""
        if which == 0:
            return self.E0_stages[:, m:m + 1]
        if which == 1:
            return self.E1[:, :m]
        if which == 2:
            return self.E2[:, :m]
        raise ValueError("matrix family index must be 0, 1, or 2")

    def gram(self, k: int, l: int) -> np.ndarray:
        return accumulated_product(self, k, self, l)


def accumulated_product(ea: EMatrices, k: int, eb: EMatrices, l: int) -> np.ndarray:
    """Length-weighted accumulated product of two E-matrix families.

    Stage m contributes lengths[m-1] * (factor_k at m)ᵀ (factor_l at m),
    padded into the final shape, so processing a joint token (no new stage)
    leaves the product unchanged.
    """
    n = ea.n
    dim_k = 1 if k == 0 else n
    dim_l = 1 if l == 0 else n
    out = np.zeros((dim_k, dim_l))
    for m in range(1, n + 1):
        term = ea.lengths[m - 1] * (ea.stage_factor(k, m).T @ eb.stage_factor(l, m))
        out[:term.shape[0], :term.shape[1]] += term
    return out


def assemble_E(word: ConfigWord, params, q0, qd0, catalog: Catalog | None = None) -> EMatrices:
    """Walk a structure word and assemble its E matrices at a nominal pose.

    Joint tokens keep the matrices as they are; each link token appends the
    column of the new link evaluated at its nominal angle and rate.
    """
    catalog = catalog or default_catalog()
    link_tag = catalog.role_tag("link")
    lengths = _as_lengths(params)
    q0 = np.asarray(q0, dtype=float)
    qd0 = np.asarray(qd0, dtype=float)
    n = link_count(word, link_tag)
    if not (lengths.size == q0.size == qd0.size == n):
        raise ModelError(
            f"word has {n} links but got {lengths.size} lengths, "
            f"{q0.size} poses, {qd0.size} rates")

    E1 = np.zeros((2, 0))
    E2 = np.zeros((2, 0))
    E0_stages = np.zeros((2, 1))
    i = 0
    for tok in word.tokens:
        if tok != link_tag:
            continue  # joints and other modules leave E unchanged
        L, q, qd = lengths[i], q0[i], qd0[i]
        col2 = np.array([[-L * np.sin(q)], [L * np.cos(q)]])
        col1 = qd * np.array([[-L * np.cos(q)], [-L * np.sin(q)]])
        E2 = np.hstack([E2, col2])
        E1 = np.hstack([E1, col1])
        E0_stages = np.hstack([E0_stages, (E2 @ qd0[:i + 1]).reshape(2, 1)])
        i += 1
    return EMatrices(lengths, E1, E2, E0_stages)


def e_matrices_rate(e_prev: EMatrices, e_next: EMatrices, dt: float) -> EMatrices:
    """Central finite-difference time derivative of the E matrices."""
    if dt <= 0:
        raise ParameterError("dt must be positive")
    scale = 1.0 / (2.0 * dt)
    return EMatrices(e_prev.lengths,
                     (e_next.E1 - e_prev.E1) * scale,
                     (e_next.E2 - e_prev.E2) * scale,
                     (e_next.E0_stages - e_prev.E0_stages) * scale)


@dataclass(eq=False)
class LinearizedModel:
    """Perturbation equations of motion M Δq̈ + C Δq̇ + K Δq = T Δτ - F."""

    M: np.ndarray
    C: np.ndarray
    K: np.ndarray
    T: np.ndarray
    F: np.ndarray

    @property
    def n(self) -> int:
        return self.M.shape[0]


def assemble_linearized(e: EMatrices, e_dot: EMatrices) -> LinearizedModel:
    """Build the linearized model from E matrices and their rates."""
    if e.n != e_dot.n:
        raise ModelError("E matrices and their rates disagree on link count")
    acc = accumulated_product
    M = acc(e, 2, e, 2)
    C = acc(e, 2, e, 1) + acc(e_dot, 2, e, 2) + acc(e, 2, e_dot, 2) - acc(e, 1, e, 2)
    K = acc(e_dot, 2, e, 1) + acc(e, 2, e_dot, 1) - acc(e, 1, e, 1)
    F = (acc(e_dot, 2, e, 0) + acc(e, 2, e_dot, 0) - acc(e, 1, e, 0)).ravel()
    return LinearizedModel(M=M, C=C, K=K, T=np.eye(e.n), F=F)


def two_link_D(l1: float, l2: float, theta2: float) -> np.ndarray:
    """Exact 2x2 inertia of the two-link arm in the relative elbow angle."""
    if l1 <= 0 or l2 <= 0:
        raise ParameterError("link lengths must be positive")
    c2 = np.cos(theta2)
    d11 = (l1**3 + l2**3 + 3.0 * l1**2 * l2) / 3.0 + l2**2 * l1 * c2
    d12 = l2**3 / 3.0 + 0.5 * l2**2 * l1 * c2
    d22 = l2**3 / 3.0
    return np.array([[d11, d12], [d12, d22]])


@dataclass(frozen=True)
class TwoLinkModel:
    """Two-link arm in relative coordinates (theta1, theta2 = elbow angle)."""

    l1: float
    l2: float

    def D(self, theta2: float) -> np.ndarray:
        return two_link_D(self.l1, self.l2, theta2)

    @property
    def E(self) -> np.ndarray:
        # no pose coupling in the perturbation model
        return np.zeros((2, 2))

    def state_matrices(self, theta2: float) -> tuple[np.ndarray, np.ndarray]:
        """Continuous-time (A, B) for state (Δθ, Δθ̇) and input Δτ."""
        D = self.D(theta2)
        A = np.zeros((4, 4))
        A[:2, 2:] = np.eye(2)
        A[2:, :2] = -np.linalg.solve(D, self.E)
        B = np.zeros((4, 2))
        B[2:, :] = np.linalg.inv(D)
        return A, B


def relative_to_absolute(theta) -> np.ndarray:
    return np.cumsum(np.asarray(theta, dtype=float))


def absolute_to_relative(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.concatenate([q[:1], np.diff(q)])


def forward_kinematics(params, q) -> tuple[float, float]:
    """Planar tip position from link lengths and absolute link angles."""
    lengths = _as_lengths(params)
    q = np.asarray(q, dtype=float)
    if lengths.size != q.size:
        raise ModelError(f"{lengths.size} lengths but {q.size} angles")
    return (float(np.dot(lengths, np.cos(q))), float(np.dot(lengths, np.sin(q))))


def fk_jacobian(params, q) -> np.ndarray:
    """2 x n Jacobian of the tip position w.r.t. the absolute angles."""
    lengths = _as_lengths(params)
    q = np.asarray(q, dtype=float)
    return np.vstack([-lengths * np.sin(q), lengths * np.cos(q)])


def reach_annulus(params) -> tuple[float, float]:
    """(inner, outer) radius of the reachable annulus."""
    lengths = _as_lengths(params)
    if lengths.size == 0:
        return 0.0, 0.0
    outer = float(lengths.sum())
    if lengths.size == 1:
        return outer, outer
    inner = max(0.0, float(2.0 * lengths.max() - lengths.sum()))
    return inner, outer


def _wrap_to(reference: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Shift each angle by multiples of 2π to sit nearest the reference."""
    return reference + np.angle(np.exp(1j * (q - reference)))


def ik_nominal(params, targets, tol: float = IK_TOL, max_iter: int = 200,
               seed_pose=None) -> np.ndarray:
    """Absolute-angle poses reaching each planar target in sequence.

    Consecutive poses minimize angle change: the two-link case uses the
    closed-form elbow solution with branch continuity, other arities run a
    damped least-squares iteration seeded from the previous pose.  Raises
    :class:`ReachabilityError` when a target lies outside the annulus or
    the iteration cannot close the gap.
    """
    lengths = _as_lengths(params)
    n = lengths.size
    if n == 0:
        raise ModelError("cannot solve kinematics of a chain without links")
    inner, outer = reach_annulus(lengths)
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    poses = np.zeros((targets.shape[0], n))
    prev = None if seed_pose is None else np.asarray(seed_pose, dtype=float)
    for idx, tgt in enumerate(targets):
        r = float(np.hypot(tgt[0], tgt[1]))
        if r < inner - tol or r > outer + tol:
            raise ReachabilityError(
                f"target {tuple(tgt)} at radius {r:.6g} outside annulus "
                f"[{inner:.6g}, {outer:.6g}]")
        if n == 1:
            q = np.array([np.arctan2(tgt[1], tgt[0])])
        elif n == 2:
            q = _ik_two_link(lengths, tgt, prev)
        else:
            q = _ik_damped_ls(lengths, tgt, prev, tol, max_iter)
        if prev is not None:
            q = _wrap_to(prev, q)
        err = np.hypot(*(np.asarray(forward_kinematics(lengths, q)) - tgt))
        if err > max(tol, 1e-9):
            raise ReachabilityError(f"kinematics residual {err:.3g} at target {tuple(tgt)}")
        poses[idx] = q
        prev = q
    return poses


def _ik_two_link(lengths, tgt, prev) -> np.ndarray:
    l1, l2 = lengths
    x, y = tgt
    r2 = x * x + y * y
    c2 = np.clip((r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0)
    elbow = float(np.arccos(c2))
    candidates = []
    for s in (+1.0, -1.0):
        th2 = s * elbow
        q1 = np.arctan2(y, x) - np.arctan2(l2 * np.sin(th2), l1 + l2 * np.cos(th2))
        candidates.append(np.array([q1, q1 + th2]))
    if prev is None:
        return candidates[0]
    def change(q):
        d = np.angle(np.exp(1j * (q - prev)))
        return float(np.dot(d, d))
    return min(candidates, key=change)


def _ik_damped_ls(lengths, tgt, prev, tol, max_iter) -> np.ndarray:
    rng = np.random.default_rng(0)
    n = lengths.size
    base = np.arctan2(tgt[1], tgt[0])
    for attempt in range(6):
        if prev is not None and attempt == 0:
            q = prev.copy()
        else:
            fan = 0.2 * (np.arange(n) - 0.5 * (n - 1))
            q = base + fan + (0.3 * rng.standard_normal(n) if attempt > 1 else 0.0)
        for _ in range(max_iter):
            err = np.asarray(tgt) - np.asarray(forward_kinematics(lengths, q))
            if np.hypot(*err) <= tol:
                return q
            J = fk_jacobian(lengths, q)
            lam = 0.05
            dq = J.T @ np.linalg.solve(J @ J.T + lam * lam * np.eye(2), err)
            q = q + np.clip(dq, -0.5, 0.5)
    raise ReachabilityError(f"damped least squares failed to reach {tuple(tgt)}")


def discretize(A_cont, B_cont, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Forward-Euler discretization A = I + dt A_c, B = dt B_c."""
    if dt <= 0:
        raise ParameterError("dt must be positive")
    A_cont = np.asarray(A_cont, dtype=float)
    B_cont = np.asarray(B_cont, dtype=float)
    return np.eye(A_cont.shape[0]) + dt * A_cont, dt * B_cont


@dataclass(eq=False)
class RobotModel:
    """A structure word plus lengths compiled into per-step discrete dynamics.

    State is (Δq, Δq̇) with absolute link angles, input is the per-joint
    relative torque perturbation; `A(i)`, `B(i)` give the step-i matrices of
    x_{i+1} = A x_i + B u_i (+ affine offset from the nominal forcing).
    """

    word: ConfigWord
    lengths: np.ndarray
    dt: float
    q0: np.ndarray        # (k+1, n) nominal absolute poses
    qd0: np.ndarray       # (k+1, n) nominal rates
    positions: np.ndarray  # (k+1, 2) nominal tip positions
    A_steps: list[np.ndarray]
    B_steps: list[np.ndarray]
    affine_steps: list[np.ndarray]
    jacobians: list[np.ndarray]

    @property
    def n_links(self) -> int:
        return int(self.lengths.size)

    @property
    def state_dim(self) -> int:
        return 2 * self.n_links

    @property
    def input_dim(self) -> int:
        return self.n_links

    @property
    def horizon(self) -> int:
        return self.q0.shape[0] - 1

    def A(self, i: int) -> np.ndarray:
        return self.A_steps[i]

    def B(self, i: int) -> np.ndarray:
        return self.B_steps[i]

    def affine(self, i: int) -> np.ndarray:
        return self.affine_steps[i]

    def jacobian(self, i: int) -> np.ndarray:
        return self.jacobians[i]


def _lower_triangular_ones(n: int) -> np.ndarray:
    return np.tril(np.ones((n, n)))


def compile_robot(word: ConfigWord, params, targets, dt: float = 0.1,
                  catalog: Catalog | None = None) -> RobotModel:
    """Compile (word, lengths) into discrete linearized dynamics along the
    nominal trajectory that tracks the given planar targets."""
    catalog = catalog or default_catalog()
    if isinstance(params, ParamAssignment):
        params.check(word, catalog)
    lengths = _as_lengths(params)
    _validate_robot_word(word, catalog)
    if dt <= 0:
        raise ParameterError("dt must be positive")

    n = lengths.size
    q0 = ik_nominal(lengths, targets)
    k = q0.shape[0] - 1
    qd0 = np.zeros_like(q0)
    if k > 0:
        qd0[:-1] = np.diff(q0, axis=0) / dt
        qd0[-1] = qd0[-2]
    positions = np.array([forward_kinematics(lengths, q) for q in q0])

    Jlow = _lower_triangular_ones(n)
    A_steps, B_steps, affine_steps, jacobians = [], [], [], []
    e_cache = [assemble_E(word, lengths, q0[i], qd0[i], catalog) for i in range(k + 1)]
    for i in range(k + 1):
        jacobians.append(fk_jacobian(lengths, q0[i]))
    for i in range(k):
        if n == 2:
            theta2 = q0[i][1] - q0[i][0]
            D = two_link_D(lengths[0], lengths[1], theta2)
            A_cont = np.zeros((4, 4))
            A_cont[:2, 2:] = np.eye(2)
            B_cont = np.zeros((4, 2))
            B_cont[2:, :] = Jlow @ np.linalg.inv(D)
            forcing = np.zeros(4)
        else:
            lo, hi = max(i - 1, 0), min(i + 1, k)
            e_dot = e_matrices_rate(e_cache[lo], e_cache[hi], (hi - lo) * dt / 2.0)
            lm = assemble_linearized(e_cache[i], e_dot)
            Minv = np.linalg.inv(lm.M)
            A_cont = np.zeros((2 * n, 2 * n))
            A_cont[:n, n:] = np.eye(n)
            A_cont[n:, :n] = -Minv @ lm.K
            A_cont[n:, n:] = -Minv @ lm.C
            B_cont = np.zeros((2 * n, n))
            B_cont[n:, :] = Minv @ np.linalg.inv(Jlow).T
            forcing = np.concatenate([np.zeros(n), -Minv @ lm.F])
        A_i, B_i = discretize(A_cont, B_cont, dt)
        A_steps.append(A_i)
        B_steps.append(B_i)
        affine_steps.append(dt * forcing)
    return RobotModel(word=word, lengths=lengths, dt=dt, q0=q0, qd0=qd0,
                      positions=positions, A_steps=A_steps, B_steps=B_steps,
                      affine_steps=affine_steps, jacobians=jacobians)


def _validate_robot_word(word: ConfigWord, catalog: Catalog) -> None:
    """A robot word starts with the base, has exactly one base, and every
    link is driven by the joint immediately before it."""
    base = catalog.role_tag("base")
    link = catalog.role_tag("link")
    joint = catalog.role_tag("joint")
    nodes = [t for t in word.tokens if t in catalog.nodes]
    if not nodes or nodes[0] != base or nodes.count(base) != 1:
        raise StructureError("robot word must start with the base module, used once")
    for i, tok in enumerate(nodes):
        if tok == link and (i == 0 or nodes[i - 1] != joint):
            raise ModelError("every link must be preceded by a joint module")
