import pytest

from armsynth import synthesis as sy
from armsynth.catalog import default_catalog
from armsynth.errors import StructuralExhaustion
from armsynth.grammar import ConfigWord, accepts, link_count, srg_to_sra
from armsynth.workspace import parse_workspace

CAT = default_catalog()
SRA = srg_to_sra(CAT.srg)


def test_smallest_robot_word():
    word = sy.smallest_robot_word(CAT)
    assert str(word) == "B ε JO ε L ε EN"
    assert accepts(SRA, word)[0]


def test_s_synthesis_inserts_joint_link_pair():
    word = ConfigWord.parse("B ε JO ε L ε EN")
    grown = sy.s_synthesis(word, CAT)
    assert str(grown) == "B ε JO ε L ε JO ε L ε EN"
    assert accepts(SRA, grown)[0]
    assert link_count(grown) == link_count(word) + 1


def test_s_synthesis_accepted_after_repeated_growth():
    word = sy.smallest_robot_word(CAT)
    for expected in (2, 3, 4):
        word = sy.s_synthesis(word, CAT)
        ok, _run = accepts(SRA, word)
        assert ok and link_count(word) == expected


def test_s_synthesis_structural_exhaustion():
    word = ConfigWord.parse("B ε JO ε L ε JO ε L ε EN")
    with pytest.raises(StructuralExhaustion):
        sy.s_synthesis(word, CAT, max_links=2)


def test_limits_validation():
    with pytest.raises(ValueError):
        sy.Limits(max_links=0)


def test_start_in_target_succeeds_with_one_link():
    ws = parse_workspace("""
bbox 0 0 3 3
start 1.6 1.6
region target
 -1 0 -1
 1 0 2
 0 -1 -1
 0 1 2
end
""")
    result = sy.correct_by_construction(
        CAT, ws, sy.Limits(max_links=2, gp_budget=30, k_max=10),
        sy.SynthesisParams(grid_h=0.5, seed=0))
    assert isinstance(result, sy.DesignResult)
    assert link_count(result.word) == 1
    assert result.rho >= 0.0
    assert result.control.size == 0  # zero-move path needs no control
    assert result.path == (result.path[0],)


def test_unreachable_target_is_unsynthesizable():
    ws = parse_workspace("""
bbox 0 0 30 30
start 1.5 1.5
region target
 -1 0 -27
 1 0 29
 0 -1 -27
 0 1 29
end
""")
    result = sy.correct_by_construction(
        CAT, ws,
        sy.Limits(max_links=2, gp_budget=6, k_max=80, max_paths_per_structure=2),
        sy.SynthesisParams(grid_h=1.0, seed=0, grid_per_dim=6))
    assert isinstance(result, sy.Unsynthesizable)
    assert result.reason == "structural exhaustion"
    events = [e["event"] for e in result.log]
    assert "relax" in events and events[-1] == "halt"


def test_separated_workspace_is_unsynthesizable():
    # no structure can help when the abstraction itself has no path
    ws = parse_workspace("""
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
""")
    result = sy.correct_by_construction(
        CAT, ws, sy.Limits(max_links=2, gp_budget=5, k_max=12),
        sy.SynthesisParams(grid_h=1.0, seed=0))
    assert isinstance(result, sy.Unsynthesizable)
    plans = [e for e in result.log if e["event"] == "plan"]
    assert all(e["result"] == "infeasible" for e in plans)


def test_synthesis_log_is_json_serializable():
    import json

    ws = parse_workspace("""
bbox 0 0 3 3
start 1.6 1.6
region target
 -1 0 -1
 1 0 2
 0 -1 -1
 0 1 2
end
""")
    result = sy.correct_by_construction(
        CAT, ws, sy.Limits(max_links=2, gp_budget=10, k_max=10),
        sy.SynthesisParams(grid_h=0.5, seed=0))
    text = "\n".join(json.dumps(e, sort_keys=True) for e in result.log)
    assert '"event"' in text


def test_wall_clock_cap():
    ws = parse_workspace("""
bbox 0 0 30 30
start 1.5 1.5
region target
 -1 0 -27
 1 0 29
 0 -1 -27
 0 1 29
end
""")
    result = sy.correct_by_construction(
        CAT, ws,
        sy.Limits(max_links=4, gp_budget=80, k_max=120, wall_clock=0.0),
        sy.SynthesisParams(grid_h=1.0, seed=0))
    assert isinstance(result, sy.Unsynthesizable)
    assert "wall-clock" in result.reason


def test_escalates_to_three_links_when_two_cannot_reach():
    # target at radius ~14: beyond any two-link reach (catalog max 12),
    # within three links; budget sized for the heavier arm
    ws = parse_workspace("""
bbox 0 0 16 16
start 9.5 2.5
region target
 -1 0 -12.5
 1 0 14
 0 -1 -5
 0 1 6.5
end
""")
    result = sy.correct_by_construction(
        CAT, ws,
        sy.Limits(max_links=4, gp_budget=40, k_max=60, max_paths_per_structure=2),
        sy.SynthesisParams(u_bound=30.0, grid_h=1.0, dt=1.0, seed=0,
                           grid_per_dim=8))
    assert isinstance(result, sy.DesignResult)
    assert link_count(result.word) == 3
    assert result.rho >= 0.0
    events = [e["event"] for e in result.log]
    assert events.count("relax") == 2


def test_progress_loop_terminates_with_blocks_and_relaxations():
    # a corridor whose cells sit at several radii: one link always fails,
    # two links succeed; the log shows the loop's progress structure
    ws = parse_workspace("""
bbox 0 0 6 6
start 2.25 0.75
region target
 -1 0 -2
 1 0 2.5
 0 -1 -2
 0 1 2.5
end
""")
    result = sy.correct_by_construction(
        CAT, ws, sy.Limits(max_links=3, gp_budget=40, k_max=40),
        sy.SynthesisParams(grid_h=0.5, seed=0))
    assert isinstance(result, sy.DesignResult)
    events = [e["event"] for e in result.log]
    assert events.count("structure") >= 1
    assert events[-1] == "validate"
    # every returned success carries a validated trajectory
    assert result.positions.shape[0] == len(result.path)
