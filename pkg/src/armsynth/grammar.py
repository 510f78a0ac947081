"""Structural assembly grammars and their automaton form.

A robot structure is a word over ``Z = nodes ∪ edges`` in which node and
edge tokens strictly alternate ("B ε JO ε L ε EN").  The grammar (SRG)
generates the set of buildable structures; its automaton form (SRA) decides
membership token by token and yields the assembly run.

The grammars handled here are left-linear (at most one nonterminal per
production, leftmost), so the automaton is a plain NFA simulated by subset
construction.  The full state space of the automaton is the infinite set of
word prefixes; states are materialized lazily as (prefix, NFA-subset) pairs.
``enumerate_language`` is an independent derivation-based oracle used to
cross-check the automaton.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import AlphabetError, GrammarError, ResourceError, StructureError

#: hard ceiling for bounded language enumeration
DEFAULT_ENUMERATION_CAP = 13


@dataclass(frozen=True)
class NodeSymbol:
    """A node token: a physical module type."""

    tag: str
    role: str  # one of {"base", "joint", "link", "effector"}


@dataclass(frozen=True)
class EdgeSymbol:
    """An edge token: a connection type between modules."""

    tag: str


@dataclass(frozen=True)
class ConfigWord:
    """A token sequence describing a robot structure.

    Serialized as whitespace-separated tokens with the edge token written
    literally, never elided, so parsing round-trips exactly.
    """

    tokens: tuple[str, ...]

    @classmethod
    def parse(cls, text: str) -> "ConfigWord":
        return cls(tuple(text.split()))

    def __str__(self) -> str:
        return " ".join(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Production:
    """One rewrite rule ``lhs -> rhs``; rhs tokens may name one nonterminal."""

    lhs: str
    rhs: tuple[str, ...]


@dataclass
class SRG:
    """Structural grammar: alphabets, nonterminals, productions, initial symbol."""

    nodes: dict[str, NodeSymbol]
    edges: dict[str, EdgeSymbol]
    productions: list[Production]
    init: str
    start: str
    accept_token: str

    def __post_init__(self) -> None:
        if self.init not in self.nodes:
            raise GrammarError(f"initial symbol {self.init!r} is not a declared node symbol")
        declared = self.terminals | self.nonterminals
        for prod in self.productions:
            for sym in prod.rhs:
                if sym not in declared:
                    raise GrammarError(
                        f"production {prod.lhs} -> {' '.join(prod.rhs)} references "
                        f"undeclared symbol {sym!r}")

    @property
    def terminals(self) -> set[str]:
        return set(self.nodes) | set(self.edges)

    @property
    def nonterminals(self) -> set[str]:
        return {self.start} | {p.lhs for p in self.productions}

    @property
    def alphabet(self) -> set[str]:
        return self.terminals

    def rules_for(self, nonterminal: str) -> list[Production]:
        return [p for p in self.productions if p.lhs == nonterminal]


@dataclass(frozen=True)
class LabeledGraph:
    """Directed graph with node labels in the node alphabet and edge labels
    in the edge alphabet; chain-shaped for manipulator words."""

    node_labels: tuple[str, ...]
    edges: tuple[tuple[int, int, str], ...]


@dataclass(frozen=True)
class SraState:
    """Lazily generated automaton state: the word prefix plus the NFA subset
    that tracks which derivations remain possible."""

    prefix: ConfigWord
    subset: frozenset = field(compare=False, hash=False)


class SRA:
    """Automaton form of an SRG.

    Built by :func:`srg_to_sra`.  The initial state is the one-token word of
    the grammar's initial symbol; ``step`` extends a state by one token and
    returns ``None`` when no derivation can extend the new prefix.
    """

    _INIT = "<init>"

    def __init__(self, srg: SRG) -> None:
        self.srg = srg
        self.alphabet = srg.terminals
        self._edges: dict[tuple[str | tuple, str], set] = {}
        self._silent: dict[str | tuple, set] = {}
        self._build()
        self._coreachable = self._compute_coreachable()

    # -- NFA construction (left-linear grammar -> NFA) ------------------

    def _add_edge(self, src, token, dst) -> None:
        self._edges.setdefault((src, token), set()).add(dst)

    def _add_silent(self, src, dst) -> None:
        self._silent.setdefault(src, set()).add(dst)

    def _build(self) -> None:
        nts = self.srg.nonterminals
        for idx, prod in enumerate(self.srg.productions):
            rhs = prod.rhs
            nt_positions = [i for i, sym in enumerate(rhs) if sym in nts]
            for pos in nt_positions:
                if rhs[pos] not in {p.lhs for p in self.srg.productions}:
                    raise GrammarError(
                        f"nonterminal {rhs[pos]!r} has no production rule")
            if len(nt_positions) > 1 or (nt_positions and nt_positions[0] != 0):
                raise GrammarError(
                    f"production {prod.lhs} -> {' '.join(rhs)} is not left-linear")
            if nt_positions:
                src = rhs[0]
                terminal_part = rhs[1:]
            else:
                src = self._INIT
                terminal_part = rhs
            # chain: src --t1--> (idx,1) --t2--> ... --tm--> lhs
            if not terminal_part:
                self._add_silent(src, prod.lhs)
                continue
            cur = src
            for j, tok in enumerate(terminal_part):
                dst = prod.lhs if j == len(terminal_part) - 1 else (idx, j)
                self._add_edge(cur, tok, dst)
                cur = dst

    def _closure(self, states: set) -> frozenset:
        out = set(states)
        stack = list(states)
        while stack:
            s = stack.pop()
            for nxt in self._silent.get(s, ()):
                if nxt not in out:
                    out.add(nxt)
                    stack.append(nxt)
        return frozenset(out)

    def _move(self, subset: frozenset, token: str) -> frozenset:
        nxt: set = set()
        for s in subset:
            nxt |= self._edges.get((s, token), set())
        return self._closure(nxt)

    def _compute_coreachable(self) -> frozenset:
        """States from which the start nonterminal is reachable (any tokens)."""
        preds: dict = {}
        for (src, _tok), dsts in self._edges.items():
            for d in dsts:
                preds.setdefault(d, set()).add(src)
        for src, dsts in self._silent.items():
            for d in dsts:
                preds.setdefault(d, set()).add(src)
        seen = {self.srg.start}
        queue = deque(seen)
        while queue:
            s = queue.popleft()
            for p in preds.get(s, ()):
                if p not in seen:
                    seen.add(p)
                    queue.append(p)
        return frozenset(seen)

    # -- automaton interface --------------------------------------------

    @property
    def initial(self) -> ConfigWord:
        return ConfigWord((self.srg.init,))

    def initial_state(self) -> SraState:
        subset = self._move(self._closure({self._INIT}), self.srg.init)
        return SraState(self.initial, subset)

    def step(self, state: SraState, token: str) -> SraState | None:
        """Deterministic transition on one appended token; None if no
        derivation can extend the resulting prefix."""
        if token not in self.alphabet:
            raise AlphabetError(f"token {token!r} is not in the alphabet")
        subset = self._move(state.subset, token)
        if not (subset & self._coreachable):
            return None
        return SraState(ConfigWord(state.prefix.tokens + (token,)), subset)

    def is_member(self, state: SraState) -> bool:
        """Whether the state's prefix is a complete derivable word."""
        return self.srg.start in state.subset

    def is_accepting(self, state: SraState) -> bool:
        """Accept predicate: derivable word containing the accept token."""
        return self.is_member(state) and self.srg.accept_token in state.prefix.tokens


def srg_to_sra(srg: SRG) -> SRA:
    """Construct the automaton equivalent of a grammar.

    The automaton's initial state is the word of the initial symbol; a
    transition exists from prefix q on token z exactly when some production
    sequence derives a word extending qz.
    """
    return SRA(srg)


def accepts(sra: SRA, word: ConfigWord) -> tuple[bool, tuple[ConfigWord, ...] | None]:
    """Decide acceptance of a word and return the run of visited states.

    The run is the sequence of word prefixes, one per consumed token, so an
    accepted run always has length equal to the token count and starts at
    the automaton's initial state.
    """
    for tok in word.tokens:
        if tok not in sra.alphabet:
            raise AlphabetError(f"token {tok!r} is not in the alphabet")
    if not word.tokens or word.tokens[0] != sra.srg.init:
        return False, None
    state = sra.initial_state()
    run = [state.prefix]
    if not (state.subset & sra._coreachable):
        return False, None
    for tok in word.tokens[1:]:
        state = sra.step(state, tok)
        if state is None:
            return False, None
        run.append(state.prefix)
    if not sra.is_accepting(state):
        return False, None
    return True, tuple(run)


def enumerate_language(srg: SRG, max_tokens: int,
                       cap: int = DEFAULT_ENUMERATION_CAP) -> set[ConfigWord]:
    """All terminal words of length <= max_tokens derivable from the start
    nonterminal, by brute-force expansion of derivation trees."""
    if max_tokens > cap:
        raise ResourceError(f"max_tokens {max_tokens} exceeds enumeration cap {cap}")
    nts = srg.nonterminals
    minlen = _min_terminal_lengths(srg)

    def lower_bound(form: tuple[str, ...]) -> int:
        total = 0
        for sym in form:
            total += minlen.get(sym, 1) if sym in nts else 1
        return total

    results: set[ConfigWord] = set()
    seen: set[tuple[str, ...]] = set()
    queue: deque[tuple[str, ...]] = deque([(srg.start,)])
    while queue:
        form = queue.popleft()
        nt_idx = next((i for i, sym in enumerate(form) if sym in nts), None)
        if nt_idx is None:
            if len(form) <= max_tokens:
                results.add(ConfigWord(form))
            continue
        for prod in srg.rules_for(form[nt_idx]):
            expanded = form[:nt_idx] + prod.rhs + form[nt_idx + 1:]
            if lower_bound(expanded) > max_tokens or expanded in seen:
                continue
            seen.add(expanded)
            queue.append(expanded)
    return results


def _min_terminal_lengths(srg: SRG) -> dict[str, int]:
    """Shortest terminal-string length derivable from each nonterminal."""
    inf = float("inf")
    minlen: dict[str, float] = {nt: inf for nt in srg.nonterminals}
    changed = True
    while changed:
        changed = False
        for prod in srg.productions:
            total = 0.0
            for sym in prod.rhs:
                total += minlen[sym] if sym in minlen else 1
            if total < minlen[prod.lhs]:
                minlen[prod.lhs] = total
                changed = True
    return {nt: int(v) for nt, v in minlen.items() if v != inf}


def word_to_graph(word: ConfigWord, srg: SRG) -> LabeledGraph:
    """Chain graph of a word: i-th node token becomes node i, the edge token
    between node tokens i and i+1 becomes the directed edge (i, i+1)."""
    toks = word.tokens
    if len(toks) % 2 == 0 or not toks:
        raise StructureError("word must alternate node/edge tokens, ends included")
    node_labels = []
    edges = []
    for i, tok in enumerate(toks):
        if i % 2 == 0:
            if tok not in srg.nodes:
                raise StructureError(f"expected node token at position {i}, got {tok!r}")
            node_labels.append(tok)
        else:
            if tok not in srg.edges:
                raise StructureError(f"expected edge token at position {i}, got {tok!r}")
            edges.append((i // 2, i // 2 + 1, tok))
    return LabeledGraph(tuple(node_labels), tuple(edges))


def graph_to_word(graph: LabeledGraph) -> ConfigWord:
    """Inverse of :func:`word_to_graph` on chain graphs."""
    n = len(graph.node_labels)
    succ: dict[int, tuple[int, str]] = {}
    indeg = {i: 0 for i in range(n)}
    for src, dst, tag in graph.edges:
        if src in succ:
            raise StructureError("graph is not a chain: node has two successors")
        succ[src] = (dst, tag)
        indeg[dst] += 1
    sources = [i for i in range(n) if indeg[i] == 0]
    if n and len(sources) != 1:
        raise StructureError("graph is not a chain: needs exactly one source node")
    tokens: list[str] = []
    cur = sources[0] if n else None
    visited = 0
    while cur is not None:
        tokens.append(graph.node_labels[cur])
        visited += 1
        if cur in succ:
            nxt, tag = succ[cur]
            tokens.append(tag)
            cur = nxt
        else:
            cur = None
    if visited != n:
        raise StructureError("graph is not a chain: unreachable nodes")
    return ConfigWord(tuple(tokens))


def link_count(word: ConfigWord, link_tag: str = "L") -> int:
    """Number of link tokens in a word (the parameter-space dimension)."""
    return sum(1 for tok in word.tokens if tok == link_tag)
