"""Conflict-driven clause-learning SAT solver.

Self-contained solver for the propositional encodings of reach-avoid
planning: two watched literals per clause, first-UIP conflict analysis with
backjumping, activity-ordered decisions with phase saving, and geometric
restarts.  Sound and complete; an external DIMACS solver can be plugged in
behind the same interface for cross-checking.

Literals are nonzero integers, DIMACS style: variable v is literal +v,
its negation -v.
"""

from __future__ import annotations

import subprocess
import tempfile

from .errors import ResourceError


def solve_cnf(num_vars: int, clauses, max_conflicts: int | None = None):
    """Decide satisfiability; returns dict {var: bool} or None when UNSAT."""
    solver = _Cdcl(num_vars, clauses)
    return solver.solve(max_conflicts)


class _Cdcl:
    def __init__(self, num_vars: int, clauses):
        self.nv = num_vars
        self.assign: dict[int, bool] = {}
        self.level: dict[int, int] = {}
        self.reason: dict[int, list[int] | None] = {}
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.watches: dict[int, list[list[int]]] = {}
        self.clauses: list[list[int]] = []
        self.activity = [0.0] * (num_vars + 1)
        self.phase = [False] * (num_vars + 1)
        self.var_inc = 1.0
        self.units: list[int] = []
        self.ok = True
        for clause in clauses:
            self._add_clause(list(clause))

    # -- clause database --------------------------------------------------

    def _add_clause(self, lits: list[int]) -> None:
        lits = sorted(set(lits), key=abs)
        if any(-l in lits for l in lits):
            return  # tautology
        if not lits:
            self.ok = False
            return
        if len(lits) == 1:
            self.units.append(lits[0])
            return
        self.clauses.append(lits)
        self._watch(lits, lits[0])
        self._watch(lits, lits[1])

    def _watch(self, clause: list[int], lit: int) -> None:
        self.watches.setdefault(-lit, []).append(clause)

    # -- assignment -------------------------------------------------------

    def _value(self, lit: int):
        v = self.assign.get(abs(lit))
        if v is None:
            return None
        return v if lit > 0 else not v

    def _enqueue(self, lit: int, reason=None) -> bool:
        val = self._value(lit)
        if val is not None:
            return val
        v = abs(lit)
        self.assign[v] = lit > 0
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)
        return True

    def _propagate(self):
        """Unit propagation; returns a conflicting clause or None."""
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            watchers = self.watches.get(lit, [])
            i = 0
            while i < len(watchers):
                clause = watchers[i]
                # ensure clause[0]/clause[1] are the watched pair with the
                # falsified literal second
                if clause[0] == -lit:
                    clause[0], clause[1] = clause[1], clause[0]
                first = clause[0]
                if self._value(first) is True:
                    i += 1
                    continue
                moved = False
                for j in range(2, len(clause)):
                    if self._value(clause[j]) is not False:
                        clause[1], clause[j] = clause[j], clause[1]
                        watchers[i] = watchers[-1]
                        watchers.pop()
                        self._watch(clause, clause[1])
                        moved = True
                        break
                if moved:
                    continue
                if self._value(first) is False:
                    return clause  # conflict
                self._enqueue(first, clause)
                i += 1
        return None

    # -- conflict analysis --------------------------------------------------

    def _bump(self, var: int) -> None:
        self.activity[var] += self.var_inc
        if self.activity[var] > 1e100:
            self.activity = [a * 1e-100 for a in self.activity]
            self.var_inc *= 1e-100

    def _analyze(self, conflict: list[int]):
        """First-UIP learned clause and backjump level."""
        cur_level = len(self.trail_lim)
        learnt: list[int] = []
        seen: set[int] = set()
        counter = 0
        lits = conflict
        idx = len(self.trail) - 1
        while True:
            for lit in lits:
                v = abs(lit)
                if v in seen or self.level[v] == 0:
                    continue
                seen.add(v)
                self._bump(v)
                if self.level[v] == cur_level:
                    counter += 1
                else:
                    learnt.append(lit)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            pivot = self.trail[idx]
            idx -= 1
            counter -= 1
            if counter == 0:
                learnt.append(-pivot)
                break
            reason = self.reason[abs(pivot)]
            lits = [l for l in reason if abs(l) != abs(pivot)]
        if len(learnt) == 1:
            return learnt, 0
        back = max(self.level[abs(l)] for l in learnt[:-1])
        return learnt, back

    def _backjump(self, target_level: int) -> None:
        while self.trail_lim and len(self.trail_lim) > target_level:
            mark = self.trail_lim.pop()
            while len(self.trail) > mark:
                lit = self.trail.pop()
                v = abs(lit)
                self.phase[v] = lit > 0
                del self.assign[v], self.level[v], self.reason[v]
        self.qhead = len(self.trail)

    def _decide(self) -> int | None:
        best, best_act = None, -1.0
        for v in range(1, self.nv + 1):
            if v not in self.assign and self.activity[v] > best_act:
                best, best_act = v, self.activity[v]
        if best is None:
            return None
        return best if self.phase[best] else -best

    # -- main loop ----------------------------------------------------------

    def solve(self, max_conflicts: int | None = None):
        if not self.ok:
            return None
        for lit in self.units:
            if not self._enqueue(lit, None):
                return None
        conflicts = 0
        restart_limit = 128
        while True:
            conflict = self._propagate()
            if conflict is not None:
                conflicts += 1
                if max_conflicts is not None and conflicts > max_conflicts:
                    raise ResourceError("SAT conflict budget exceeded")
                if not self.trail_lim:
                    return None  # conflict at level 0: UNSAT
                learnt, back = self._analyze(conflict)
                self._backjump(back)
                self.var_inc /= 0.95
                if len(learnt) == 1:
                    if not self._enqueue(learnt[0], None):
                        return None
                else:
                    learnt.sort(key=lambda l: -self.level.get(abs(l), 1 << 30))
                    self.clauses.append(learnt)
                    self._watch(learnt, learnt[0])
                    self._watch(learnt, learnt[1])
                    self._enqueue(learnt[0], learnt)
                if conflicts >= restart_limit:
                    restart_limit = int(restart_limit * 1.5)
                    conflicts = 0
                    self._backjump(0)
                continue
            lit = self._decide()
            if lit is None:
                return {v: self.assign.get(v, False) for v in range(1, self.nv + 1)}
            self.trail_lim.append(len(self.trail))
            self._enqueue(lit, None)


# -- DIMACS interchange ----------------------------------------------------

def to_dimacs(num_vars: int, clauses) -> str:
    lines = [f"p cnf {num_vars} {len(clauses)}"]
    for clause in clauses:
        lines.append(" ".join(str(l) for l in clause) + " 0")
    return "\n".join(lines) + "\n"


def from_dimacs(text: str) -> tuple[int, list[list[int]]]:
    num_vars = 0
    clauses: list[list[int]] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            num_vars = int(line.split()[2])
            continue
        lits = [int(t) for t in line.split()]
        if lits and lits[-1] == 0:
            lits = lits[:-1]
        if lits:
            clauses.append(lits)
    return num_vars, clauses


def solve_with_external(num_vars: int, clauses, command: list[str]):
    """Run an external DIMACS solver for cross-checking; same contract as
    :func:`solve_cnf`."""
    with tempfile.NamedTemporaryFile("w", suffix=".cnf", delete=False) as fh:
        fh.write(to_dimacs(num_vars, clauses))
        path = fh.name
    proc = subprocess.run([*command, path], capture_output=True, text=True)
    out = proc.stdout
    if "UNSAT" in out:
        return None
    model: dict[int, bool] = {}
    for token in out.replace("v", " ").split():
        try:
            lit = int(token)
        except ValueError:
            continue
        if lit != 0 and abs(lit) <= num_vars:
            model[abs(lit)] = lit > 0
    for v in range(1, num_vars + 1):
        model.setdefault(v, False)
    return model
