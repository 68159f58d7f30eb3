import pytest

from helpers import FIXTURES
from predkit.atoms import EQ, LE, lin
from predkit.formula import equivalent
from predkit.model import (
    ModelError,
    ParseError,
    extract_candidate_predicates,
    instantiate,
    load_model,
    parse_formula,
    parse_model,
    parse_property,
    parse_system,
    print_model,
)

TICKET = (FIXTURES / "ticket.pm").read_text()


def test_ticket_template():
    tpl = parse_model(TICKET)
    assert [v.name for v in tpl.shared] == ["s", "t", "z"]
    assert [v.name for v in tpl.local] == ["a", "pc"]
    assert [t.label for t in tpl.transitions] == ["try", "cr", "think"]
    assert tpl.instances == 2


@pytest.mark.parametrize("n, count", [(1, 3), (2, 6), (3, 9)])
def test_instantiation_counts(n, count):
    ts = instantiate(parse_model(TICKET), n)
    assert len(ts.transitions) == count
    assert {f"a{i}" for i in range(1, n + 1)} <= set(ts.names)


def test_larger_instance_extends_labels():
    tpl = parse_model(TICKET)
    small, large = instantiate(tpl, 2), instantiate(tpl, 3)
    assert set(small.labels) < set(large.labels)
    # the shared transitions of process 1 coincide up to the extra frame
    for lbl in small.labels:
        assert small.transition(lbl).vars() <= large.transition(lbl).vars()


def test_frames_and_enum_encoding():
    ts = load_model(FIXTURES / "ticket.pm", 2)
    r = ts.transition("cr_1")
    expected = parse_formula(
        "pc1 = try & s >= a1 & z' = z + 1 & pc1' = cr & s' = s & t' = t"
        " & a1' = a1 & a2' = a2 & pc2' = pc2", ts, allow_primes=True)
    assert equivalent(r, expected)
    assert ts.consts == {"think": 0, "try": 1, "cr": 2}
    assert equivalent(ts.state_space, parse_formula(
        "0 <= pc1 & pc1 <= 2 & 0 <= pc2 & pc2 <= 2", ts))


def test_print_round_trip():
    ts = load_model(FIXTURES / "ticket.pm", 2)
    back = parse_system(print_model(ts))
    assert back.labels == ts.labels
    assert equivalent(back.init, ts.init)
    assert equivalent(back.state_space, ts.state_space)
    for lbl in ts.labels:
        assert equivalent(back.transition(lbl), ts.transition(lbl))


@pytest.mark.parametrize("src, msg", [
    ("model m\nvar x : int\ninit x = 0\n", "no transitions"),
    ("model m\nvar x : int\ninit y = 0\nrelation t: x' = x\n", "y"),
    ("model m\nvar x : int\nvar x : bool\nrelation t: x' = x\n", "twice"),
    ("model m\nvar b : bool\ninit b + 1 = 0\nrelation t: b' = b\n", "b"),
    ("model m\nvar x : int\ninit x' = 0\nrelation t: x' = x\n", "x"),
])
def test_model_errors(src, msg):
    with pytest.raises((ModelError, ParseError)) as ei:
        parse_model(src)
    assert msg in str(ei.value)


def test_syntax_error_position():
    with pytest.raises(ParseError) as ei:
        parse_model("model m\nvar x : int\ninit x = = 0\nrelation t: x' = x\n")
    assert ei.value.line == 3


def test_candidate_predicates_ticket():
    ts = load_model(FIXTURES / "ticket.pm", 2)
    prop = parse_property("AG(z <= 1)", ts)
    ps = extract_candidate_predicates(ts, prop)
    atoms = [p.atom for p in ps]
    # the property bound and its two boundary pieces come first
    assert atoms[:3] == [lin(EQ, {"z": 1}, 1), lin(LE, {"z": 1}, 0), lin(LE, {"z": 1}, 1)]
    for text in ("s = t", "s >= a1", "s >= a2", "z = 0", "pc1 = think", "pc2 = cr"):
        (cube,) = parse_formula(text, ts).cubes
        (a,) = cube
        assert a in atoms, text
    assert len(atoms) == len(set(atoms)) == 13
    assert all("'" not in v for a in atoms for v in a.vars())


def test_candidate_predicates_dedupe_and_no_booleans():
    ts = parse_system(
        "model m\nvar x : int\nvar f : bool\ninit x = 0 & f\n"
        "relation t1: x <= 3 & f & x' = x + 1 & (f' <-> f)\n"
        "relation t2: x <= 3 & x' = x + 2 & (f' <-> !f)\n")
    ps = extract_candidate_predicates(ts)
    assert [str(p.atom) for p in ps] == ["x = 0", "x <= 3"]


def test_property_parsing():
    ts = load_model(FIXTURES / "ticket.pm", 2)
    p = parse_property("AG(pc1 = cr -> AF(pc1 = think))", ts)
    assert p.fragment == "ACTL"
    assert parse_property("EF(z = 2)", ts).fragment == "ECTL"
    with pytest.raises((ParseError, ModelError)):
        parse_property("AG(q <= 1)", ts)
