import random

import numpy as np
import pytest

from helpers import FIXTURES, random_boxed_system, random_state_prop
from predkit import _kernels as K
from predkit.model import load_model, parse_property, parse_system
from predkit.oracle import ClosureViolation, StateExplosion, explore, label, oracle_check

TICKET_BOX = {"s": (0, 6), "t": (0, 6), "z": (0, 4), "a1": (0, 6), "a2": (0, 6), "a3": (0, 6)}


@pytest.fixture(params=["numpy", "numba"] if K.HAVE_NUMBA else ["numpy"])
def backend(request):
    prev = K.use_backend(request.param)
    yield request.param
    K.use_backend(prev)


def _box(ts):
    return {k: v for k, v in TICKET_BOX.items() if k in ts.names}


@pytest.mark.parametrize("n, states", [(2, 531), (3, 4633)])
def test_ticket_oracle(backend, n, states):
    ts = load_model(FIXTURES / "ticket.pm", n)
    g = explore(ts, _box(ts), on_escape="truncate")
    assert len(g) == states and g.truncated
    assert oracle_check(ts, parse_property("AG(z <= 1)", ts), _box(ts), "truncate").holds
    v = oracle_check(ts, parse_property("AG(z <= 0)", ts), _box(ts), "truncate")
    assert not v.holds and v.witness is not None


def test_one_state_system(backend):
    ts = parse_system("model m\nvar x : int\ninit x = 0\nrelation t: x' = x\n")
    assert oracle_check(ts, parse_property("AG(x = 0)", ts), {"x": (0, 0)}).holds


def test_closure_violation():
    ts = load_model(FIXTURES / "ticket.pm", 2)
    with pytest.raises(ClosureViolation):
        explore(ts, _box(ts))


def test_state_explosion():
    ts = parse_system("model m\nvar x, y : int\nrelation t: x' = x & y' = y\n")
    with pytest.raises(StateExplosion):
        explore(ts, {"x": (0, 99), "y": (0, 99)}, max_states=1000)


def test_backends_agree():
    rng = random.Random(5)
    for _ in range(15):
        ts, box = random_boxed_system(rng, 3, 5, 4)
        names = [v.name for v in ts.vars]
        props = [parse_property(f"{op}({random_state_prop(rng, names, 5)})", ts)
                 for op in ("AG", "AF", "EG", "EF", "AX", "EX")]
        masks = {}
        for name in (["numpy", "numba"] if K.HAVE_NUMBA else ["numpy"]):
            prev = K.use_backend(name)
            try:
                g = explore(ts, box)
                masks[name] = [label(g, p) for p in props]
            finally:
                K.use_backend(prev)
        if len(masks) == 2:
            for a, b in zip(masks["numpy"], masks["numba"]):
                assert np.array_equal(a, b)


def test_until_operators():
    # x counts 0..3 then stays; y marks x >= 2
    ts = parse_system(
        "model m\nvar x : int\ninit x = 0\n"
        "relation up: x <= 2 & x' = x + 1\nrelation stay: x = 3 & x' = x\n")
    box = {"x": (0, 3)}
    assert oracle_check(ts, parse_property("A[x <= 2 U x = 3]", ts), box).holds
    assert oracle_check(ts, parse_property("E[x <= 1 U x = 2]", ts), box).holds
    assert not oracle_check(ts, parse_property("A[x <= 0 U x = 3]", ts), box).holds


def test_unknown_backend():
    with pytest.raises(ValueError):
        K.use_backend("fortran")
