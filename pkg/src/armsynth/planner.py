"""Reach-avoid path planning on the abstract workspace via SAT.

A horizon-k path assigns one grid cell per step: the start cell at step 0,
free cells in between, a target cell at step k, consecutive cells adjacent
(4-connectivity, dwelling allowed).  ``encode`` builds a CNF whose models
are exactly those paths; ``plan`` searches horizons by iterative deepening
and honors blocking clauses that exclude previously failed paths.

The encoding restricts step i to cells reachable from the start in at most
i moves and from which the target is reachable in the remaining k-i moves;
every valid path satisfies both bounds, so the model set is unchanged while
the CNF stays small even for long horizons.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import SpecError
from .sat import from_dimacs, solve_cnf, to_dimacs
from .workspace import FREE, TARGET, AbstractWorkspace

DEFAULT_K_MAX = 200


@dataclass(frozen=True)
class PathSpec:
    """Reach-avoid task: start cell, target proposition, horizon bound."""

    start_cell: int
    k_max: int = DEFAULT_K_MAX
    target_label: str = TARGET

    def __post_init__(self) -> None:
        if self.k_max < 1:
            raise SpecError("horizon bound must be at least 1")


@dataclass(frozen=True)
class Path:
    """Cell-id sequence kappa_0..kappa_k."""

    cells: tuple[int, ...]

    @property
    def horizon(self) -> int:
        return len(self.cells) - 1

    def __len__(self) -> int:
        return len(self.cells)


@dataclass(frozen=True)
class BlockingClause:
    """Excludes every assignment extending one specific step/cell pattern."""

    steps: tuple[tuple[int, int], ...]  # (step index, cell id)


@dataclass
class CNF:
    """Propositional encoding with the (step, cell) -> variable map."""

    num_vars: int
    clauses: list[list[int]] = field(default_factory=list)
    var_map: dict[tuple[int, int], int] = field(default_factory=dict)

    def add_clause(self, lits: list[int]) -> None:
        if not lits:
            raise ValueError("refusing to add an empty clause")
        for lit in lits:
            if lit == 0 or abs(lit) > self.num_vars:
                raise ValueError(f"literal {lit} references an undeclared variable")
        self.clauses.append(list(lits))

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def to_dimacs(self) -> str:
        return to_dimacs(self.num_vars, self.clauses)

    @classmethod
    def parse_dimacs(cls, text: str) -> "CNF":
        num_vars, clauses = from_dimacs(text)
        return cls(num_vars=num_vars, clauses=clauses)


def _bfs_from(aw: AbstractWorkspace, sources, passable) -> np.ndarray:
    """Grid BFS distance from a source set, moving through passable cells."""
    dist = np.full(aw.n_cells, -1, dtype=int)
    queue = deque()
    for c in sources:
        dist[c] = 0
        queue.append(c)
    while queue:
        c = queue.popleft()
        for nb in aw.neighbors4(c):
            if dist[nb] < 0 and passable[nb]:
                dist[nb] = dist[c] + 1
                queue.append(nb)
    return dist


def reachability_bounds(aw: AbstractWorkspace, spec: PathSpec):
    """(d_start, d_goal): per-cell step bounds through free cells.

    d_start[c] is the fewest moves from the start to c, d_goal[c] the fewest
    moves from c to any target cell; -1 marks unreachable.
    """
    free = aw.labels == 0
    target = np.asarray(aw.labels == 2)
    d_start = _bfs_from(aw, [spec.start_cell], free)
    if not free[spec.start_cell]:
        d_start[:] = -1
        d_start[spec.start_cell] = 0
    # target cells are endpoints: one hop in from an adjacent free cell
    for t in np.flatnonzero(target):
        options = [d_start[nb] for nb in aw.neighbors4(int(t))
                   if free[nb] and d_start[nb] >= 0]
        d_start[t] = 1 + min(options) if options else -1
    # distance into the target set: target cells are endpoints only
    d_goal = np.full(aw.n_cells, -1, dtype=int)
    queue = deque()
    for t in np.flatnonzero(target):
        d_goal[t] = 0
        queue.append(int(t))
    while queue:
        c = queue.popleft()
        for nb in aw.neighbors4(c):
            if d_goal[nb] < 0 and free[nb]:
                d_goal[nb] = d_goal[c] + 1
                queue.append(nb)
    return d_start, d_goal


def encode(aw: AbstractWorkspace, spec: PathSpec, k: int) -> CNF:
    """CNF whose models are exactly the horizon-k reach-avoid paths."""
    if k > spec.k_max:
        raise SpecError(f"horizon {k} exceeds the bound {spec.k_max}")
    start_label = aw.proposition(spec.start_cell)
    if start_label not in (FREE, TARGET):
        raise SpecError("start cell must be a free or target cell")
    if len(aw.cells_with_label(TARGET)) == 0:
        raise SpecError("workspace abstraction has no target cell")

    d_start, d_goal = reachability_bounds(aw, spec)
    target_cells = set(int(c) for c in aw.cells_with_label(TARGET))

    def allowed(i: int) -> list[int]:
        if k == 0:
            return [spec.start_cell] if (i == 0 and spec.start_cell in target_cells) else []
        if i == 0:
            ok = (start_label == FREE and d_goal[spec.start_cell] >= 0
                  and d_goal[spec.start_cell] <= k)
            return [spec.start_cell] if ok else []
        if i == k:
            return [c for c in sorted(target_cells)
                    if 0 <= d_start[c] <= k]
        return [int(c) for c in np.flatnonzero(
            (aw.labels == 0)
            & (d_start >= 0) & (d_start <= i)
            & (d_goal >= 0) & (d_goal <= k - i))]

    cnf = CNF(num_vars=0)
    layers: list[list[int]] = []
    for i in range(k + 1):
        cells = allowed(i)
        layers.append(cells)
        for c in cells:
            cnf.var_map[(i, c)] = cnf.new_var()
    if any(not layer for layer in layers):
        v = cnf.new_var()
        cnf.add_clause([v])
        cnf.add_clause([-v])
        return cnf

    for i, cells in enumerate(layers):
        cnf.add_clause([cnf.var_map[(i, c)] for c in cells])
        for a in range(len(cells)):
            for b in range(a + 1, len(cells)):
                cnf.add_clause([-cnf.var_map[(i, cells[a])],
                                -cnf.var_map[(i, cells[b])]])
    cnf.add_clause([cnf.var_map[(0, spec.start_cell)]])
    for i in range(k):
        nxt = set(layers[i + 1])
        for c in layers[i]:
            succ = [cnf.var_map[(i + 1, nb)]
                    for nb in ([c] + aw.neighbors4(c)) if nb in nxt]
            cnf.add_clause([-cnf.var_map[(i, c)]] + succ)
    return cnf


def solve(cnf: CNF):
    """SAT(assignment) or UNSAT(None) via the embedded CDCL solver."""
    return solve_cnf(cnf.num_vars, cnf.clauses)


def decode(cnf: CNF, assignment: dict[int, bool], k: int) -> Path:
    cells = [-1] * (k + 1)
    for (i, c), var in cnf.var_map.items():
        if assignment.get(var, False):
            if cells[i] != -1:
                raise SpecError("assignment selects two cells for one step")
            cells[i] = c
    if any(c < 0 for c in cells):
        raise SpecError("assignment leaves a step without a cell")
    return Path(tuple(cells))


def check_path(aw: AbstractWorkspace, spec: PathSpec, path: Path) -> None:
    """Assert the path invariants independently of the solver."""
    cells = path.cells
    if cells[0] != spec.start_cell:
        raise SpecError("path must start at the start cell")
    if aw.proposition(cells[-1]) != TARGET:
        raise SpecError("path must end in a target cell")
    for c in cells[:-1]:
        if aw.proposition(c) != FREE:
            raise SpecError("intermediate path cells must be free")
    for a, b in zip(cells, cells[1:]):
        if b != a and b not in aw.neighbors4(a):
            raise SpecError("consecutive path cells must be adjacent")


def block(path: Path) -> BlockingClause:
    """Clause falsified exactly by assignments extending this path."""
    return BlockingClause(tuple(enumerate(path.cells)))


def apply_blocking(cnf: CNF, blocked) -> None:
    """Append blocking clauses that are expressible in this encoding.

    A blocked path mentioning a (step, cell) pair with no variable cannot be
    a model of this CNF at all, so its clause is vacuous and skipped.
    """
    for bc in blocked:
        try:
            lits = [-cnf.var_map[sc] for sc in bc.steps]
        except KeyError:
            continue
        if len(bc.steps) != len({s for s, _ in bc.steps}):
            continue
        mentioned_steps = {s for s, _ in bc.steps}
        max_step = max((s for s, _ in cnf.var_map), default=-1)
        if mentioned_steps != set(range(max_step + 1)):
            continue
        cnf.add_clause(lits)


def plan(aw: AbstractWorkspace, spec: PathSpec, blocked=()) -> Path | None:
    """Shortest-horizon path satisfying the reach-avoid spec, or None.

    Iterative deepening over the horizon; horizons below the grid shortest
    distance are skipped since their encodings are unsatisfiable by
    construction.
    """
    start_label = aw.proposition(spec.start_cell)
    if start_label not in (FREE, TARGET):
        raise SpecError("start cell must be a free or target cell")
    d_start, _ = reachability_bounds(aw, spec)
    target_cells = aw.cells_with_label(TARGET)
    if len(target_cells) == 0:
        raise SpecError("workspace abstraction has no target cell")
    reachable = [int(d_start[c]) for c in target_cells if d_start[c] >= 0]

    horizons = []
    if start_label == TARGET:
        horizons.append(0)
    if reachable:
        horizons.extend(range(min(reachable), spec.k_max + 1))
    for k in horizons:
        cnf = encode(aw, spec, k)
        apply_blocking(cnf, blocked)
        assignment = solve(cnf)
        if assignment is None:
            continue
        path = decode(cnf, assignment, k)
        check_path(aw, spec, path)
        return path
    return None
