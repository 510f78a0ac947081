import pytest

from armsynth import grammar as g
from armsynth.catalog import default_catalog, parse_catalog
from armsynth.errors import (AlphabetError, CatalogError, GrammarError,
                             ResourceError, StructureError)

from helpers import FIG_1C

CAT = default_catalog()
SRA = g.srg_to_sra(CAT.srg)


def test_initial_state_is_base_word():
    assert SRA.initial == g.ConfigWord(("B",))


def test_accepts_catalog_robot_word():
    ok, run = g.accepts(SRA, FIG_1C)
    assert ok
    assert len(run) == len(FIG_1C.tokens)
    assert run[0] == g.ConfigWord(("B",))
    assert run[-1] == FIG_1C


def test_rejects_word_without_effector():
    ok, run = g.accepts(SRA, g.ConfigWord.parse("B"))
    assert not ok and run is None


def test_rejects_word_not_starting_at_base():
    ok, run = g.accepts(SRA, g.ConfigWord.parse("JO ε EN"))
    assert not ok and run is None
    # cross-check: no derivation of depth <= 2 produces it
    assert g.ConfigWord.parse("JO ε EN") not in g.enumerate_language(CAT.srg, 3)


def test_accepts_is_pure():
    word = g.ConfigWord.parse("B ε JO ε L ε EN")
    assert g.accepts(SRA, word) == g.accepts(SRA, word)


def test_token_outside_alphabet():
    with pytest.raises(AlphabetError):
        g.accepts(SRA, g.ConfigWord.parse("B ε XX"))


def test_enumerate_small():
    lang = g.enumerate_language(CAT.srg, 3)
    assert g.ConfigWord.parse("B ε EN") in lang
    assert g.ConfigWord.parse("B ε JO") in lang
    assert g.enumerate_language(CAT.srg, 1) == {g.ConfigWord(("B",))}


def test_enumerate_cap():
    with pytest.raises(ResourceError):
        g.enumerate_language(CAT.srg, 20)


def test_language_equivalence_to_nine_tokens():
    lang = g.enumerate_language(CAT.srg, 9)
    accepted = {w for w in lang if g.accepts(SRA, w)[0]}
    with_effector = {w for w in lang if "EN" in w.tokens}
    assert accepted == with_effector


def test_every_member_is_viable_prefixwise():
    # accepted runs exist for each member containing the effector
    for word in g.enumerate_language(CAT.srg, 7):
        ok, run = g.accepts(SRA, word)
        assert ok == ("EN" in word.tokens)
        if ok:
            assert len(run) == len(word.tokens)


def test_empty_production_set_only_initial_state():
    srg = g.SRG(nodes={"B": g.NodeSymbol("B", "base")}, edges={},
                productions=[], init="B", start="N", accept_token="B")
    sra = g.srg_to_sra(srg)
    assert sra.initial == g.ConfigWord(("B",))
    state = sra.initial_state()
    assert sra.step(state, "B") is None


def test_undeclared_symbol_rejected():
    with pytest.raises(GrammarError):
        g.SRG(nodes={"B": g.NodeSymbol("B", "base")}, edges={},
              productions=[g.Production("N", ("B", "QQ"))],
              init="B", start="N", accept_token="B")


def test_nonterminal_without_rule_rejected():
    # M's right-hand side names the start nonterminal, which has no rule
    srg = g.SRG(nodes={"B": g.NodeSymbol("B", "base")}, edges={},
                productions=[g.Production("M", ("N", "B"))],
                init="B", start="N", accept_token="B")
    with pytest.raises(GrammarError):
        g.srg_to_sra(srg)


def test_non_left_linear_rejected():
    srg = g.SRG(nodes={"B": g.NodeSymbol("B", "base")}, edges={},
                productions=[g.Production("N", ("B", "N"))],
                init="B", start="N", accept_token="B")
    with pytest.raises(GrammarError):
        g.srg_to_sra(srg)


def test_word_to_graph_fig_shape():
    graph = g.word_to_graph(FIG_1C, CAT.srg)
    assert len(graph.node_labels) == 9
    assert len(graph.edges) == 8
    assert graph.node_labels[0] == "B" and graph.node_labels[-1] == "EN"
    assert all(tag == "ε" for _, _, tag in graph.edges)


def test_word_to_graph_single_node():
    graph = g.word_to_graph(g.ConfigWord(("B",)), CAT.srg)
    assert graph.node_labels == ("B",) and graph.edges == ()


def test_graph_word_round_trip():
    for word in g.enumerate_language(CAT.srg, 9):
        assert g.graph_to_word(g.word_to_graph(word, CAT.srg)) == word


def test_word_to_graph_alternation_violations():
    with pytest.raises(StructureError):
        g.word_to_graph(g.ConfigWord.parse("B ε"), CAT.srg)
    with pytest.raises(StructureError):
        g.word_to_graph(g.ConfigWord.parse("B JO B"), CAT.srg)


def test_link_count():
    assert g.link_count(FIG_1C) == 2
    assert g.link_count(g.ConfigWord.parse("B ε EN")) == 0
    assert g.link_count(g.ConfigWord.parse("B ε JO ε L ε JO ε L ε EN")) == 2


def test_word_serialization_round_trip():
    text = "B ε JO ε L ε EN"
    assert str(g.ConfigWord.parse(text)) == text


def test_catalog_parse_errors():
    with pytest.raises(CatalogError):
        parse_catalog("node B base\n")  # missing init/start/accept
    with pytest.raises(CatalogError):
        parse_catalog("node B sideways\ninit B\nstart N\naccept contains B\n")
    with pytest.raises(CatalogError):
        parse_catalog("node B base\nedge e\ninit B\nstart N\n"
                      "accept contains B\nparam B 0 1\n")


def test_catalog_roles_and_bounds():
    assert CAT.role_tag("link") == "L"
    assert CAT.role_tag("base") == "B"
    assert CAT.length_bounds() == (0.2, 6.0)


def test_catalog_is_data_driven():
    text = """
node BASE base
node HINGE joint
node ROD link
node HAND effector
edge -
init BASE
start S
accept contains HAND
rule S -> BASE
rule S -> S - HINGE
rule S -> S - ROD
rule S -> S - HAND
param ROD 0.5 2.0
"""
    cat = parse_catalog(text)
    sra = g.srg_to_sra(cat.srg)
    ok, run = g.accepts(sra, g.ConfigWord.parse("BASE - HINGE - ROD - HAND"))
    assert ok and len(run) == 7
