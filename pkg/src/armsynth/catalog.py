"""Module-catalog file parsing.

The catalog is a line-based text format declaring the node/edge alphabets,
the production rules of the assembly grammar, the initial node symbol, the
acceptance predicate, and per-symbol parameter bounds.  Format::

    # comment
    node B base
    node JO joint
    node L link
    node EN effector
    edge ε
    init B
    start N
    accept contains EN
    rule N -> B
    rule N -> N ε JO
    rule N -> N ε L
    rule N -> N ε EN
    param L 0.2 6.0

``node <tag> <role>`` declares a node symbol with role in
{base, joint, link, effector}.  ``edge <tag>`` declares an edge symbol.
``rule LHS -> tokens...`` declares one production; the right-hand side may
name at most one nonterminal and it must be the leftmost token.
``param <tag> <lo> <hi>`` gives the parameter interval of a link symbol.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CatalogError
from .grammar import EdgeSymbol, NodeSymbol, Production, SRG

ROLES = ("base", "joint", "link", "effector")

DEFAULT_CATALOG_TEXT = """\
# planar manipulator module catalog
node B base
node JO joint
node L link
node EN effector
edge ε
init B
start N
accept contains EN
rule N -> B
rule N -> N ε JO
rule N -> N ε L
rule N -> N ε EN
param L 0.2 6.0
"""


@dataclass
class Catalog:
    """Parsed module catalog: grammar plus per-symbol metadata."""

    srg: SRG
    param_bounds: dict[str, tuple[float, float]] = field(default_factory=dict)

    @property
    def nodes(self) -> dict[str, NodeSymbol]:
        return self.srg.nodes

    @property
    def edges(self) -> dict[str, EdgeSymbol]:
        return self.srg.edges

    def role_tag(self, role: str) -> str:
        """Tag of the unique node symbol with the given role."""
        tags = [t for t, sym in self.srg.nodes.items() if sym.role == role]
        if len(tags) != 1:
            raise CatalogError(f"catalog needs exactly one {role!r} symbol, found {tags}")
        return tags[0]

    def length_bounds(self, tag: str | None = None) -> tuple[float, float]:
        """Parameter interval of a link symbol (the unique link by default)."""
        if tag is None:
            tag = self.role_tag("link")
        if tag not in self.param_bounds:
            raise CatalogError(f"no parameter bounds declared for symbol {tag!r}")
        return self.param_bounds[tag]


def parse_catalog(text: str) -> Catalog:
    """Parse catalog text into a validated :class:`Catalog`."""
    nodes: dict[str, NodeSymbol] = {}
    edges: dict[str, EdgeSymbol] = {}
    productions: list[Production] = []
    param_bounds: dict[str, tuple[float, float]] = {}
    init = None
    start = None
    accept_token = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "node":
                tag, role = parts[1], parts[2]
                if role not in ROLES:
                    raise CatalogError(f"line {lineno}: unknown role {role!r}")
                nodes[tag] = NodeSymbol(tag, role)
            elif kind == "edge":
                edges[parts[1]] = EdgeSymbol(parts[1])
            elif kind == "init":
                init = parts[1]
            elif kind == "start":
                start = parts[1]
            elif kind == "accept":
                if parts[1] != "contains" or len(parts) != 3:
                    raise CatalogError(f"line {lineno}: accept predicate must be 'contains <tag>'")
                accept_token = parts[2]
            elif kind == "rule":
                if parts[2] != "->":
                    raise CatalogError(f"line {lineno}: rule must read 'rule LHS -> tokens...'")
                productions.append(Production(parts[1], tuple(parts[3:])))
            elif kind == "param":
                lo, hi = float(parts[2]), float(parts[3])
                if not (0.0 < lo <= hi):
                    raise CatalogError(f"line {lineno}: bounds must satisfy 0 < lo <= hi")
                param_bounds[parts[1]] = (lo, hi)
            else:
                raise CatalogError(f"line {lineno}: unknown directive {kind!r}")
        except (IndexError, ValueError) as exc:
            raise CatalogError(f"line {lineno}: cannot parse {line!r}") from exc

    if init is None or start is None or accept_token is None:
        raise CatalogError("catalog must declare init, start, and accept")
    srg = SRG(nodes=nodes, edges=edges, productions=productions, init=init,
              start=start, accept_token=accept_token)
    return Catalog(srg=srg, param_bounds=param_bounds)


def load_catalog(path: str) -> Catalog:
    with open(path, encoding="utf-8") as fh:
        return parse_catalog(fh.read())


def default_catalog() -> Catalog:
    """The four-module planar manipulator catalog."""
    return parse_catalog(DEFAULT_CATALOG_TEXT)
