import itertools

import numpy as np
import pytest

from armsynth import planner as pl
from armsynth.errors import SpecError
from armsynth.sat import from_dimacs, solve_cnf, to_dimacs
from armsynth.workspace import abstract, parse_workspace

STRIP = """
bbox 0 0 3 1
start 0.5 0.5
region target
 -1 0 -2
 1 0 3
 0 -1 0
 0 1 1
end
"""

SEPARATED = """
bbox 0 0 3 3
start 0.5 0.5
region obstacle
 -1 0 -1
 1 0 2
 0 -1 0
 0 1 3
end
region target
 -1 0 -2
 1 0 3
 0 -1 -1
 0 1 2
end
"""


def strip_abstraction():
    return abstract(parse_workspace(STRIP), 1.0)


def all_models(cnf: pl.CNF, k: int):
    """Exhaustive assignment enumeration oracle."""
    found = []
    for bits in itertools.product([False, True], repeat=cnf.num_vars):
        assignment = {i + 1: bits[i] for i in range(cnf.num_vars)}
        if all(any(assignment[abs(l)] == (l > 0) for l in cl) for cl in cnf.clauses):
            found.append(pl.decode(cnf, assignment, k).cells)
    return found


# -- SAT kernel --------------------------------------------------------------

def test_sat_trivial():
    model = solve_cnf(2, [[1, 2], [-1]])
    assert model is not None and model[2] is True and model[1] is False
    assert solve_cnf(1, [[1], [-1]]) is None


def test_sat_random_vs_truth_table():
    rng = np.random.default_rng(7)
    for _ in range(60):
        n = int(rng.integers(3, 14))
        clauses = []
        for _ in range(int(3.0 * n)):
            vs = rng.choice(np.arange(1, n + 1), size=3, replace=False)
            signs = rng.choice([-1, 1], size=3)
            clauses.append([int(v * s) for v, s in zip(vs, signs)])
        model = solve_cnf(n, clauses)
        assignments = np.arange(2 ** n)
        sat_table = np.ones(2 ** n, dtype=bool)
        for cl in clauses:
            cl_sat = np.zeros(2 ** n, dtype=bool)
            for lit in cl:
                bit = (assignments >> (abs(lit) - 1)) & 1
                cl_sat |= (bit == 1) if lit > 0 else (bit == 0)
            sat_table &= cl_sat
        assert (model is not None) == bool(sat_table.any())
        if model is not None:
            assert all(any(model[abs(l)] == (l > 0) for l in cl) for cl in clauses)


def test_sat_pigeonhole_unsat():
    holes, pigeons = 4, 5
    var = lambda p, h: p * holes + h + 1
    clauses = [[var(p, h) for h in range(holes)] for p in range(pigeons)]
    for h in range(holes):
        for p1 in range(pigeons):
            for p2 in range(p1 + 1, pigeons):
                clauses.append([-var(p1, h), -var(p2, h)])
    assert solve_cnf(pigeons * holes, clauses) is None


def test_dimacs_round_trip():
    clauses = [[1, -2], [2, 3], [-1, -3]]
    text = to_dimacs(3, clauses)
    n, parsed = from_dimacs(text)
    assert n == 3 and parsed == clauses
    cnf = pl.CNF.parse_dimacs(text)
    assert cnf.num_vars == 3 and cnf.clauses == clauses


# -- encoding ----------------------------------------------------------------

def test_encode_strip_unique_model():
    aw = strip_abstraction()
    spec = pl.PathSpec(start_cell=0, k_max=10)
    cnf = pl.encode(aw, spec, 2)
    assert all(cnf.clauses), "no empty clause at construction"
    assert all_models(cnf, 2) == [(0, 1, 2)]


def test_encode_k0_start_in_target():
    ws = parse_workspace(STRIP.replace("start 0.5 0.5", "start 2.5 0.5"))
    aw = abstract(ws, 1.0)
    spec = pl.PathSpec(start_cell=2, k_max=5)
    cnf = pl.encode(aw, spec, 0)
    assert all_models(cnf, 0) == [(2,)]


def test_encode_separated_unsat_all_horizons():
    aw = abstract(parse_workspace(SEPARATED), 1.0)
    spec = pl.PathSpec(start_cell=aw.start_cell, k_max=12)
    # independent reachability oracle: BFS over free cells
    free = {int(c) for c in aw.cells_with_label("free")}
    seen, frontier = {aw.start_cell}, [aw.start_cell]
    while frontier:
        nxt = []
        for c in frontier:
            for nb in aw.neighbors4(c):
                if nb in free and nb not in seen:
                    seen.add(nb)
                    nxt.append(nb)
        frontier = nxt
    targets = set(int(c) for c in aw.cells_with_label("target"))
    assert not any(nb in seen for t in targets for nb in aw.neighbors4(t))
    for k in range(13):
        assert pl.solve(pl.encode(aw, spec, k)) is None


def test_encode_rejects_obstacle_start():
    aw = abstract(parse_workspace(SEPARATED), 1.0)
    obstacle_cell = int(aw.cells_with_label("obstacle")[0])
    with pytest.raises(SpecError):
        pl.encode(aw, pl.PathSpec(start_cell=obstacle_cell, k_max=4), 1)


def test_encode_rejects_missing_target():
    aw = abstract(parse_workspace("bbox 0 0 2 1\nstart 0.5 0.5\n"), 1.0)
    with pytest.raises(SpecError):
        pl.encode(aw, pl.PathSpec(start_cell=0, k_max=4), 1)


def test_encode_horizon_above_bound():
    aw = strip_abstraction()
    with pytest.raises(SpecError):
        pl.encode(aw, pl.PathSpec(start_cell=0, k_max=3), 4)


# -- planning and blocking ---------------------------------------------------

def test_plan_strip_shortest():
    aw = strip_abstraction()
    spec = pl.PathSpec(start_cell=0, k_max=10)
    path = pl.plan(aw, spec)
    assert path.cells == (0, 1, 2)
    pl.check_path(aw, spec, path)


def test_plan_start_equals_target():
    ws = parse_workspace(STRIP.replace("start 0.5 0.5", "start 2.5 0.5"))
    aw = abstract(ws, 1.0)
    path = pl.plan(aw, pl.PathSpec(start_cell=2, k_max=5))
    assert path.cells == (2,)


def test_block_unique_path_makes_longer_or_infeasible():
    aw = strip_abstraction()
    spec = pl.PathSpec(start_cell=0, k_max=2)
    first = pl.plan(aw, spec)
    blocked = [pl.block(first)]
    assert pl.plan(aw, spec, blocked) is None  # only path of length <= 2

    spec10 = pl.PathSpec(start_cell=0, k_max=10)
    alt = pl.plan(aw, spec10, blocked)
    assert alt is not None and alt.cells != first.cells


def test_blocking_is_idempotent():
    aw = strip_abstraction()
    spec = pl.PathSpec(start_cell=0, k_max=10)
    path = pl.plan(aw, spec)
    once = pl.encode(aw, spec, 2)
    pl.apply_blocking(once, [pl.block(path)])
    twice = pl.encode(aw, spec, 2)
    pl.apply_blocking(twice, [pl.block(path), pl.block(path)])
    assert all_models(once, 2) == all_models(twice, 2) == []


def test_blocked_paths_never_returned():
    aw = abstract(parse_workspace("""
bbox 0 0 3 2
start 0.5 0.5
region target
 -1 0 -2
 1 0 3
 0 -1 0
 0 1 1
end
"""), 1.0)
    spec = pl.PathSpec(start_cell=0, k_max=8)
    blocked = []
    seen = set()
    for _ in range(6):
        path = pl.plan(aw, spec, blocked)
        if path is None:
            break
        assert path.cells not in seen
        seen.add(path.cells)
        blocked.append(pl.block(path))
    assert len(seen) >= 3


def test_decode_soundness_on_case_study():
    from helpers import case_study_workspace

    aw = abstract(case_study_workspace(), 0.1)
    spec = pl.PathSpec(start_cell=aw.start_cell, k_max=150)
    path = pl.plan(aw, spec)
    assert path is not None
    pl.check_path(aw, spec, path)
    assert aw.proposition(path.cells[-1]) == "target"
