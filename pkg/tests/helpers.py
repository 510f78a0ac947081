"""Shared test fixtures: workspaces, words, and the randomized two-link
instance generator used by the sign-equivalence and slack suites."""

from __future__ import annotations

import numpy as np

from armsynth.dynamics import compile_robot, reach_annulus
from armsynth.grammar import ConfigWord
from armsynth.planner import Path
from armsynth.workspace import abstract, parse_workspace

CASE_STUDY_WS = """
bbox 0 0 5 5
start 1.55 0.75
region obstacle
 -1  0 -1.7
  1  0  3
  0 -1 -2
  0  1  3
end
region target
 -1  0 -3.5
  1  0  4.2
  0 -1 -3.8
  0  1  4.5
end
"""

ONE_LINK = ConfigWord.parse("B ε JO ε L ε EN")
TWO_LINK = ConfigWord.parse("B ε JO ε L ε JO ε L ε EN")
THREE_LINK = ConfigWord.parse("B ε JO ε L ε JO ε L ε JO ε L ε EN")
FIG_1C = ConfigWord.parse("B ε JO ε JO ε JO ε L ε JO ε L ε JO ε EN")


def case_study_workspace():
    return parse_workspace(CASE_STUDY_WS)


def random_two_link_instance(seed: int, dt: float = 0.1):
    """One randomized (two-link model, random free-cell path) instance.

    The model is linearized about rest at the start-cell center, so tracking
    the path takes genuine control effort; the budget is drawn log-uniform
    to split instances between achievable and not.  Returns None when the
    draw is degenerate (caller retries with the next seed).
    """
    rng = np.random.default_rng(seed)
    h = 0.4
    l1, l2 = rng.uniform(0.9, 2.6, 2)
    inner, outer = reach_annulus([l1, l2])
    aw0 = abstract(parse_workspace("bbox 0 0 6 6\n"), h)
    r0 = rng.uniform(inner + 0.35 * (outer - inner), inner + 0.65 * (outer - inner))
    ang = rng.uniform(0.2, np.pi / 2 - 0.2)
    cells = [aw0.cell_of_point((r0 * np.cos(ang), r0 * np.sin(ang)))]
    n_moves = int(rng.integers(1, 3))
    moves_done = 0
    while moves_done < n_moves or len(cells) < 4:
        if len(cells) > 9:
            break
        if rng.random() < 0.55 or moves_done >= n_moves:
            cells.append(cells[-1])
        else:
            cells.append(int(rng.choice(aw0.neighbors4(cells[-1]))))
            moves_done += 1
    if cells[-1] == cells[0]:
        return None
    xlo, xhi, ylo, yhi = aw0.cell_bounds(cells[-1])
    sx, sy = aw0.cell_center(cells[0])
    text = (f"bbox 0 0 6 6\nstart {sx} {sy}\nregion target\n"
            f" -1 0 {-xlo}\n 1 0 {xhi}\n 0 -1 {-ylo}\n 0 1 {yhi}\nend\n")
    ws = parse_workspace(text)
    aw = abstract(ws, h)
    if any(aw.proposition(c) != "free" for c in cells[:-1]):
        return None
    if aw.proposition(cells[-1]) != "target":
        return None
    path = Path(tuple(cells))
    p_start = aw.cell_center(cells[0])
    if not (inner + 1e-6 <= float(np.hypot(*p_start)) <= outer - 1e-6):
        return None
    try:
        model = compile_robot(TWO_LINK, [l1, l2], [p_start] * len(cells), dt=dt)
    except Exception:
        return None
    ubound = float(10 ** rng.uniform(-0.5, 2.8))
    return {"model": model, "workspace": ws, "aw": aw, "path": path,
            "ubound": ubound, "lengths": (l1, l2)}


def collect_instances(count: int, start_seed: int = 1000):
    out = []
    seed = start_seed
    while len(out) < count:
        seed += 1
        inst = random_two_link_instance(seed)
        if inst is not None:
            inst["seed"] = seed
            out.append(inst)
    return out
