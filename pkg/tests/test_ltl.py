import pytest

from teamplan.ltl import (
    And,
    Atom,
    Eventually,
    Always,
    FormulaClass,
    Mission,
    MissionError,
    Next,
    NotAtom,
    Or,
    ParseError,
    TRUE,
    FALSE,
    Until,
    atoms_of,
    classify,
    format_formula,
    is_bad_prefix,
    is_good_prefix,
    mission_from_dict,
    mission_to_dict,
    parse_formula,
    to_pnf,
)


def test_parse_eventually_atom():
    assert parse_formula("F p1") == Eventually(Atom("p1"))


def test_parse_safety():
    assert parse_formula("G !p") == Always(NotAtom("p"))


def test_parse_until_with_nested_next():
    f = parse_formula("p U (q & X r)")
    assert f == Until(Atom("p"), And((Atom("q"), Next(Atom("r")))))


def test_precedence_until_binds_tighter_than_and():
    assert parse_formula("p U q & r") == And((Until(Atom("p"), Atom("q")), Atom("r")))


def test_precedence_and_binds_tighter_than_or():
    assert parse_formula("a | b & c") == Or((Atom("a"), And((Atom("b"), Atom("c")))))


def test_until_right_associative():
    assert parse_formula("a U b U c") == Until(Atom("a"), Until(Atom("b"), Atom("c")))


def test_chained_and_is_flat():
    assert parse_formula("a & b & c") == And((Atom("a"), Atom("b"), Atom("c")))


def test_constants_and_unary_chain():
    assert parse_formula("true") == TRUE
    assert parse_formula("X F p") == Next(Eventually(Atom("p")))


def test_parse_error_position():
    with pytest.raises(ParseError) as exc:
        parse_formula("F p &")
    assert exc.value.line == 1
    assert exc.value.col == 6


def test_parse_error_unknown_symbol():
    with pytest.raises(ParseError, match="unknown operator"):
        parse_formula("p % q")


def test_negation_restricted_to_atoms():
    with pytest.raises(ParseError, match="atoms"):
        parse_formula("!F p")


def test_unbalanced_parens():
    with pytest.raises(ParseError):
        parse_formula("((p)")


def test_multiline_error_position():
    with pytest.raises(ParseError) as exc:
        parse_formula("p &\n& q")
    assert exc.value.line == 2
    assert exc.value.col == 1


def test_format_round_trip():
    for src in ["F p1", "G !p", "p U (q & X r)", "a | b & c", "a U b U c", "(a | b) & c", "F (p & q) | true"]:
        f = parse_formula(src)
        assert parse_formula(format_formula(f)) == f


def test_pnf_is_identity_on_parsed_formulas():
    f = parse_formula("!p & F (q | X !r)")
    assert to_pnf(f) == f
    assert to_pnf(parse_formula("F p")) == parse_formula("F p")


def test_classify():
    assert classify(parse_formula("F p1")) is FormulaClass.COSAFE
    assert classify(parse_formula("G !p")) is FormulaClass.SAFE
    assert classify(parse_formula("F p & G q")) is FormulaClass.NEITHER
    # no G and no F/U fits both fragments; reported as COSAFE
    assert classify(parse_formula("X p")) is FormulaClass.COSAFE


def test_atoms_of():
    assert atoms_of(parse_formula("F p & (q U !r)")) == frozenset({"p", "q", "r"})


# finite-trace reference semantics, hand-derived cases


def test_good_prefix_eventually():
    f = parse_formula("F p")
    assert not is_good_prefix(f, [])
    assert not is_good_prefix(f, [set()])
    assert is_good_prefix(f, [{"p"}])
    assert is_good_prefix(f, [set(), {"p"}])
    assert is_good_prefix(f, [{"p"}, set()])


def test_good_prefix_until():
    f = parse_formula("p U q")
    assert is_good_prefix(f, [{"q"}])
    assert is_good_prefix(f, [{"p"}, {"p", "q"}])
    assert not is_good_prefix(f, [{"p"}])
    assert not is_good_prefix(f, [set(), {"q"}])
    assert not is_good_prefix(f, [])


def test_good_prefix_next_needs_position():
    f = parse_formula("X p")
    assert not is_good_prefix(f, [{"p"}])
    assert is_good_prefix(f, [set(), {"p"}])


def test_good_prefix_rejects_invariant_fragment():
    with pytest.raises(ValueError):
        is_good_prefix(parse_formula("G p"), [])


def test_bad_prefix_invariant():
    f = parse_formula("G !p")
    assert not is_bad_prefix(f, [])
    assert not is_bad_prefix(f, [set(), set()])
    assert is_bad_prefix(f, [{"p"}])
    assert is_bad_prefix(f, [set(), {"p"}, set()])


def test_bad_prefix_with_next():
    f = parse_formula("G X !p")
    assert not is_bad_prefix(f, [{"p"}])  # violation would sit past the end
    assert is_bad_prefix(f, [set(), {"p"}])


def test_bad_prefix_rejects_reachability_fragment():
    with pytest.raises(ValueError):
        is_bad_prefix(parse_formula("F p"), [])


# missions


def test_mission_from_dict():
    m = mission_from_dict({"tasks": ["F p1", "F p2"], "safety": "G !p"})
    assert len(m.tasks) == 2
    assert m.safety == Always(NotAtom("p"))
    assert m.atoms == frozenset({"p1", "p2", "p"})


def test_mission_safety_optional():
    m = mission_from_dict({"tasks": ["F p1"], "safety": None})
    assert m.safety is None
    assert mission_to_dict(m) == {"tasks": ["F p1"], "safety": None}


def test_mission_needs_tasks():
    with pytest.raises(MissionError):
        mission_from_dict({"tasks": []})


def test_mission_rejects_wrong_fragments():
    with pytest.raises(MissionError):
        mission_from_dict({"tasks": ["G p"]})
    with pytest.raises(MissionError):
        mission_from_dict({"tasks": ["F p"], "safety": "F q"})
