"""Mass-function algebra: construction, combination, views, factors."""

import itertools
import math

import numpy as np
import pytest

from _helpers import binary_frame, random_proper_mass
from beliefnet.errors import (
    CapacityError,
    ConflictError,
    ImpossibleEventError,
    MassError,
    ScopeError,
)
from beliefnet.frames import ConfigSet, Frame
from beliefnet.mass import (
    MassFunction,
    approx_equal,
    belief,
    combine,
    commonality,
    commonality_table,
    condition,
    conditional_factor,
    extend,
    l1_distance,
    marginalize,
    mass_from_commonality,
    simple_support,
    vacuous,
)


@pytest.fixture
def x_ab():
    frame = Frame([("X", ["a", "b"])])
    return frame, frame.full_scope


def cs(scope, *tuples):
    return ConfigSet.of(scope, tuples)


def test_make_mass(x_ab):
    _, s = x_ab
    v = MassFunction(s, {ConfigSet.full(s): 1.0})
    assert v.is_proper and v.focal_count == 1
    m = MassFunction(s, {cs(s, ("a",)): 0.5, ConfigSet.full(s): 0.5})
    assert m.is_proper
    pseudo = MassFunction(s, {cs(s, ("a",)): 1.2, ConfigSet.full(s): -0.2})
    assert pseudo.kind == "pseudo"


def test_make_mass_errors(x_ab):
    _, s = x_ab
    with pytest.raises(MassError):
        MassFunction(s, {ConfigSet.empty(s): 0.3, ConfigSet.full(s): 0.7})
    with pytest.raises(MassError):
        MassFunction(s, {ConfigSet.full(s): 0.9})
    # auto-normalize flag accepts a non-unit sum
    m = MassFunction(s, {ConfigSet.full(s): 0.9}, normalize=True)
    assert abs(m.mass_of(ConfigSet.full(s)) - 1.0) < 1e-12


def test_simple_support(x_ab):
    _, s = x_ab
    assert simple_support(ConfigSet.full(s)) == vacuous(s)
    assert simple_support(cs(s, ("a",))).mass_of(cs(s, ("a",))) == 1.0
    f3 = Frame([("X", ["a", "b", "c"])])
    s3 = f3.full_scope
    two = cs(s3, ("a",), ("b",))
    assert simple_support(two).mass_of(two) == 1.0
    with pytest.raises(MassError):
        simple_support(ConfigSet.empty(s))


def test_combine_examples(x_ab):
    _, s = x_ab
    m = MassFunction(s, {cs(s, ("a",)): 0.5, ConfigSet.full(s): 0.5})
    assert combine(vacuous(s), m) == m
    # derived by brute-force convolution: both intersections equal {a}, K = 0
    out = combine(m, simple_support(cs(s, ("a",))))
    assert abs(out.mass_of(cs(s, ("a",))) - 1.0) < 1e-12
    with pytest.raises(ConflictError):
        combine(simple_support(cs(s, ("a",))), simple_support(cs(s, ("b",))))


def test_combine_auto_extends():
    frame = binary_frame(2)
    sx, sy = frame.scope(["X1"]), frame.scope(["X2"])
    out = combine(simple_support(cs(sx, ("a",))), simple_support(cs(sy, ("b",))))
    assert out.scope == frame.full_scope
    assert abs(out.mass_of(cs(frame.full_scope, ("a", "b"))) - 1.0) < 1e-12


def test_marginalize_examples():
    frame = Frame([("X", ["a", "b"]), ("Y", ["c", "d"])])
    full, sx = frame.full_scope, frame.scope(["X"])
    assert marginalize(vacuous(full), sx) == vacuous(sx)
    m1 = MassFunction(full, {cs(full, ("a", "c")): 1.0})
    assert abs(marginalize(m1, sx).mass_of(cs(sx, ("a",))) - 1.0) < 1e-12
    # derived by enumerating projections
    m2 = MassFunction(full, {cs(full, ("a", "c")): 0.3, cs(full, ("b", "c"), ("b", "d")): 0.7})
    out = marginalize(m2, sx)
    assert abs(out.mass_of(cs(sx, ("a",))) - 0.3) < 1e-12
    assert abs(out.mass_of(cs(sx, ("b",))) - 0.7) < 1e-12
    with pytest.raises(ScopeError):
        marginalize(m1, Frame([("Q", ["u", "v"])]).full_scope)


def test_extend_then_marginalize_is_identity():
    frame = Frame([("X", ["a", "b"]), ("Y", ["c", "d"]), ("Z", ["e", "f"])])
    rng = np.random.default_rng(5)
    sub = frame.scope(["X", "Z"])
    for _ in range(25):
        m = random_proper_mass(sub, rng)
        assert marginalize(extend(m, frame.full_scope), sub) == m


def test_condition_examples():
    f3 = Frame([("X", ["a", "b", "c"])])
    s = f3.full_scope
    m = MassFunction(s, {cs(s, ("a",)): 0.4, cs(s, ("b",)): 0.6})
    assert condition(m, ConfigSet.full(s)) == m
    out = condition(m, cs(s, ("a",)))
    assert abs(out.mass_of(cs(s, ("a",))) - 1.0) < 1e-12
    # derived by brute-force convolution
    m2 = MassFunction(s, {cs(s, ("a",), ("b",)): 0.5, cs(s, ("b",), ("c",)): 0.5})
    out2 = condition(m2, cs(s, ("a",), ("c",)))
    assert abs(out2.mass_of(cs(s, ("a",))) - 0.5) < 1e-12
    assert abs(out2.mass_of(cs(s, ("c",))) - 0.5) < 1e-12
    with pytest.raises(ImpossibleEventError):
        condition(MassFunction(s, {cs(s, ("a",)): 1.0}), cs(s, ("b",)))
    with pytest.raises(ImpossibleEventError):
        condition(m, ConfigSet.empty(s))


def test_condition_zeroes_outside_event():
    rng = np.random.default_rng(11)
    frame = binary_frame(2)
    s = frame.full_scope
    for _ in range(25):
        m = random_proper_mass(s, rng)
        event = ConfigSet(s, int(rng.integers(1, 1 << s.config_count)))
        try:
            out = condition(m, event)
        except ImpossibleEventError:
            continue
        for focal, _ in out.items():
            assert focal.issubset(event)


def test_belief_commonality(x_ab):
    _, s = x_ab
    m = MassFunction(s, {cs(s, ("a",)): 0.5, ConfigSet.full(s): 0.5})
    assert abs(belief(m, ConfigSet.full(s)) - 1.0) < 1e-12
    assert abs(commonality(m, ConfigSet.empty(s)) - 1.0) < 1e-12
    # derived by direct sums
    assert abs(belief(m, cs(s, ("a",))) - 0.5) < 1e-12
    assert abs(commonality(m, cs(s, ("a",))) - 1.0) < 1e-12
    assert abs(commonality(m, ConfigSet.full(s)) - 0.5) < 1e-12


def brute_commonality(m, mask):
    return sum(v for f, v in m._masses.items() if f & mask == mask)


def test_mobius_examples(x_ab):
    _, s = x_ab
    q = commonality_table(vacuous(s))
    assert mass_from_commonality(s, q) == vacuous(s)
    m = MassFunction(s, {cs(s, ("a",)): 0.5, ConfigSet.full(s): 0.5})
    assert l1_distance(mass_from_commonality(s, commonality_table(m)), m) < 1e-12


def test_mobius_roundtrip_random():
    rng = np.random.default_rng(3)
    frame = Frame([("X", ["a", "b"])])
    s = frame.full_scope
    for _ in range(50):
        m = random_proper_mass(s, rng, max_focal=3)
        # independent oracle: commonality by exhaustive superset sums
        q = np.array([brute_commonality(m, mask) for mask in range(1 << s.config_count)])
        back = mass_from_commonality(s, q)
        assert l1_distance(back, m) < 1e-12


def test_mobius_capacity():
    frame = Frame([("X", list("abcdefghij")), ("Y", ["0", "1"])])
    with pytest.raises(CapacityError):
        commonality_table(vacuous(frame.full_scope))
    with pytest.raises(CapacityError):
        conditional_factor(vacuous(frame.full_scope), frame.scope(["Y"]))


def test_l1_distance(x_ab):
    _, s = x_ab
    m = MassFunction(s, {cs(s, ("a",)): 0.5, ConfigSet.full(s): 0.5})
    assert l1_distance(m, m) == 0.0
    one = MassFunction(s, {cs(s, ("a",)): 1.0})
    other = MassFunction(s, {cs(s, ("b",)): 1.0})
    assert abs(l1_distance(one, other) - 2.0) < 1e-12
    # derived: perturbing two sets by +/- delta moves l1 by 2 delta
    delta = 0.125
    shifted = MassFunction(s, {cs(s, ("a",)): 0.5 - delta, ConfigSet.full(s): 0.5 + delta})
    assert abs(l1_distance(m, shifted) - 2 * delta) < 1e-12
    with pytest.raises(ScopeError):
        l1_distance(m, vacuous(Frame([("Q", ["u", "v"])]).full_scope))


# --- algebra properties ----------------------------------------------------


def test_combine_commutative_associative():
    rng = np.random.default_rng(7)
    frame = binary_frame(2)
    s = frame.full_scope
    for _ in range(60):
        m1, m2, m3 = (random_proper_mass(s, rng) for _ in range(3))
        try:
            ab = combine(m1, m2)
            ba = combine(m2, m1)
            abc = combine(ab, m3)
            bca = combine(combine(m2, m3), m1)
        except ConflictError:
            continue
        assert l1_distance(ab, ba) <= 1e-9
        assert l1_distance(abc, bca) <= 1e-9


def test_commonality_product_law():
    # Q(combine(m1, m2)) is proportional to Q(m1) * Q(m2) on nonempty sets
    rng = np.random.default_rng(13)
    frame = binary_frame(2)
    s = frame.full_scope
    for _ in range(40):
        m1, m2 = random_proper_mass(s, rng), random_proper_mass(s, rng)
        try:
            q12 = commonality_table(combine(m1, m2))
        except ConflictError:
            continue
        q = commonality_table(m1) * commonality_table(m2)
        scale = 1.0 - conflict_of(m1, m2)
        assert np.max(np.abs(q12[1:] * scale - q[1:])) <= 1e-9


def conflict_of(m1, m2):
    from beliefnet.mass import conflict

    return conflict(m1, m2)


# --- conditional factor ----------------------------------------------------


def test_conditional_factor_independent_case():
    # joint of independent marginals: the factor recombines exactly and the
    # extended first marginal is itself a valid solution
    rng = np.random.default_rng(21)
    frame = binary_frame(2)
    sx, sy, full = frame.scope(["X1"]), frame.scope(["X2"]), frame.full_scope
    for _ in range(20):
        mx, my = random_proper_mass(sx, rng), random_proper_mass(sy, rng)
        joint = combine(mx, my)
        r = conditional_factor(joint, sy)
        assert l1_distance(combine(marginalize(joint, sy), r), joint) <= 1e-6
        assert l1_distance(combine(my, extend(mx, full)), joint) <= 1e-9


def test_conditional_factor_vacuous():
    frame = binary_frame(2)
    r = conditional_factor(vacuous(frame.full_scope), frame.scope(["X1"]))
    assert r == vacuous(frame.full_scope)


def test_conditional_factor_random_binary_pairs():
    rng = np.random.default_rng(2)
    frame = binary_frame(2)
    full, sy = frame.full_scope, frame.scope(["X2"])
    for _ in range(100):
        m = random_proper_mass(full, rng, max_focal=8)
        r = conditional_factor(m, sy)
        assert l1_distance(combine(marginalize(m, sy), r), m) <= 1e-6


def test_conditional_factor_scope_errors():
    frame = binary_frame(2)
    with pytest.raises(ScopeError):
        conditional_factor(vacuous(frame.full_scope), frame.full_scope)
    with pytest.raises(ScopeError):
        conditional_factor(vacuous(frame.scope(["X1"])), frame.scope(["X2"]))


def test_vacuous_neutral_exhaustive():
    frame = Frame([("X", ["a", "b", "c"])])
    s = frame.full_scope
    rng = np.random.default_rng(17)
    for _ in range(30):
        m = random_proper_mass(s, rng)
        assert combine(vacuous(s), m) == m
