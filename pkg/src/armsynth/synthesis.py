"""End-to-end correct-by-construction synthesis loop.

Starting from the smallest buildable arm, the loop alternates three moves
until a certified design emerges or the limits trip:

  1. plan a reach-avoid cell path on the workspace abstraction,
  2. search link lengths for a nonnegative robustness certificate on that
     path (surrogate-guided, budgeted),
  3. on failure, block the path and replan; when planning is exhausted for
     the current structure, relax it by appending a joint+link pair before
     the end-effector.

Every returned design has been re-validated through the exact nonlinear
kinematics against the original workspace; a validation failure also
produces a blocking clause, closing the abstraction/linearization gap.
Blocking clauses are structure-relative and reset on relaxation, since a
longer arm may well track a path its predecessor could not.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .catalog import Catalog
from .dynamics import compile_robot
from .errors import (ReachabilityError, SpecError, StructuralExhaustion)
from .grammar import ConfigWord, link_count
from .learner import optimize_params
from .planner import PathSpec, block, plan
from .robustness import (DEFAULT_EPS, TRUST_BOUND, evaluate_configuration,
                         feasibility, nominal_targets, validate_trajectory)
from .workspace import FREE, TARGET, Workspace, abstract


@dataclass
class Limits:
    """Termination guards for the synthesis loop."""

    max_links: int = 4
    gp_budget: int = 80
    k_max: int = 200
    wall_clock: float | None = None        # seconds
    max_paths_per_structure: int = 4

    def __post_init__(self) -> None:
        if min(self.max_links, self.gp_budget, self.k_max,
               self.max_paths_per_structure) < 1:
            raise ValueError("limits must be positive")


@dataclass
class SynthesisParams:
    """Numeric knobs of one synthesis run."""

    u_bound: float = 10.0
    eps: float = DEFAULT_EPS
    dt: float = 0.1
    grid_h: float = 0.1
    seed: int = 0
    trust: float = TRUST_BOUND
    grid_per_dim: int = 24


@dataclass
class DesignResult:
    """A certified design: structure, lengths, certificate, and witnesses."""

    word: ConfigWord
    lengths: tuple[float, ...]
    rho: float
    path: tuple[int, ...]
    control: np.ndarray            # (k, m) torque witness
    poses: np.ndarray              # (k+1, n) absolute link angles along witness
    positions: np.ndarray          # (k+1, 2) exact tip positions along witness
    log: list[dict] = field(default_factory=list)
    grid_h: float = 0.0


@dataclass
class Unsynthesizable:
    """Principled failure: what was tried and why the loop stopped."""

    reason: str
    log: list[dict] = field(default_factory=list)


def s_synthesis(word: ConfigWord, catalog: Catalog,
                max_links: int | None = None) -> ConfigWord:
    """Structural relaxation: insert a joint+link pair before the terminal
    end-effector, growing the arm by exactly one link."""
    link = catalog.role_tag("link")
    joint = catalog.role_tag("joint")
    effector = catalog.role_tag("effector")
    edge = next(iter(catalog.edges))
    if max_links is not None and link_count(word, link) >= max_links:
        raise StructuralExhaustion(f"structure already has {max_links} links")
    tokens = word.tokens
    if not tokens or tokens[-1] != effector:
        raise SpecError("expected a word ending in the end-effector module")
    return ConfigWord(tokens[:-1] + (joint, edge, link, edge, effector))


def smallest_robot_word(catalog: Catalog) -> ConfigWord:
    """The least structure the loop starts from: base, joint, link, effector."""
    edge = next(iter(catalog.edges))
    return ConfigWord((catalog.role_tag("base"), edge, catalog.role_tag("joint"),
                       edge, catalog.role_tag("link"), edge,
                       catalog.role_tag("effector")))


def correct_by_construction(catalog: Catalog, workspace: Workspace,
                            limits: Limits | None = None,
                            params: SynthesisParams | None = None):
    """Run the synthesis loop; returns DesignResult or Unsynthesizable."""
    limits = limits or Limits()
    params = params or SynthesisParams()
    log: list[dict] = []
    t_begin = time.monotonic()

    def out_of_time() -> bool:
        return (limits.wall_clock is not None
                and time.monotonic() - t_begin > limits.wall_clock)

    aw = abstract(workspace, params.grid_h)
    start_cell = aw.start_cell
    if aw.proposition(start_cell) not in (FREE, TARGET):
        raise SpecError("the start point falls in an obstacle cell")
    spec = PathSpec(start_cell=start_cell, k_max=limits.k_max)
    log.append({"event": "abstract", "cells": aw.n_cells,
                "hx": aw.hx, "hy": aw.hy, "start_cell": int(start_cell)})

    word = smallest_robot_word(catalog)
    lo, hi = catalog.length_bounds()
    structure_idx = 0
    while True:
        n = link_count(word, catalog.role_tag("link"))
        log.append({"event": "structure", "word": str(word), "links": n})
        blocked: list = []
        paths_tried = 0
        while paths_tried < limits.max_paths_per_structure:
            if out_of_time():
                log.append({"event": "halt", "reason": "wall-clock"})
                return Unsynthesizable("wall-clock cap reached", log)
            path = plan(aw, spec, blocked)
            if path is None:
                log.append({"event": "plan", "result": "infeasible",
                            "blocked": len(blocked)})
                break
            log.append({"event": "plan", "result": "path",
                        "length": len(path.cells),
                        "cells": [int(c) for c in path.cells]})

            def oracle(theta, _path=path):
                res = evaluate_configuration(
                    word, theta, aw, _path, params.u_bound, params.eps,
                    params.dt, params.trust, catalog)
                return res.rho

            seed = params.seed + 1009 * structure_idx + 31 * paths_tried
            opt = optimize_params(oracle, [(lo, hi)] * n,
                                  budget=limits.gp_budget, seed=seed,
                                  per_dim=params.grid_per_dim, target=0.0)
            log.append({"event": "optimize", "evaluations": opt.evaluations,
                        "best_rho": _json_float(opt.value),
                        "best_theta": ([float(v) for v in opt.theta]
                                       if opt.theta else None),
                        "history": [_history_record(e) for e in opt.history]})
            if opt.value >= 0.0 and opt.theta is not None:
                result = _certify(word, opt.theta, aw, workspace, path,
                                  params, catalog, log)
                if result is not None:
                    result.rho = opt.value
                    result.log = log
                    result.grid_h = aw.hx
                    return result
            blocked.append(block(path))
            paths_tried += 1
            log.append({"event": "block", "path_length": len(path.cells)})
        structure_idx += 1
        try:
            word = s_synthesis(word, catalog, limits.max_links)
            log.append({"event": "relax", "word": str(word)})
        except StructuralExhaustion:
            log.append({"event": "halt", "reason": "structural-exhaustion"})
            return Unsynthesizable("structural exhaustion", log)


def _certify(word, theta, aw, workspace, path, params, catalog, log):
    """Extract a hard-constraint control witness and validate it exactly."""
    try:
        targets = nominal_targets(theta, aw, path)
        model = compile_robot(word, theta, targets, dt=params.dt, catalog=catalog)
    except ReachabilityError:
        log.append({"event": "validate", "result": "unreachable-at-witness"})
        return None
    feas = feasibility(model, aw, path, params.u_bound, params.trust)
    if not feas.feasible:
        log.append({"event": "validate", "result": "witness-extraction-failed"})
        return None
    check = validate_trajectory(model, theta, feas.u, workspace, path)
    if not check.valid:
        log.append({"event": "validate", "result": "violation",
                    "step": check.violation_step, "reason": check.reason})
        return None
    log.append({"event": "validate", "result": "valid"})
    n = model.n_links
    poses = model.q0 + feas.states[:, :n]
    return DesignResult(word=word, lengths=tuple(float(v) for v in theta),
                        rho=0.0, path=tuple(int(c) for c in path.cells),
                        control=feas.u, poses=poses, positions=feas.positions)


def _json_float(value: float):
    if value == float("-inf"):
        return "-inf"
    if value == float("inf"):
        return "inf"
    return float(value)


def _history_record(entry) -> dict:
    return {"t": entry.t,
            "theta": [float(v) for v in entry.theta],
            "rho": _json_float(entry.value),
            "score": None if math.isnan(entry.score) else float(entry.score),
            "error": entry.error}
