import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from orlicz_chord.chord_addition import lp_chord_add, orlicz_chord_combine, solve_half_chord
from orlicz_chord.inequalities import (
    check_decomposition,
    check_lp_bm,
    check_orlicz_bm,
    check_orlicz_minkowski,
    random_body,
)
from orlicz_chord.integrals import chord_integral
from orlicz_chord.orlicz_fn import Power, PowerMix
from orlicz_chord.quadrature import sphere_rule_n3
from orlicz_chord.serialize import decode_digest, encode_digest
from orlicz_chord.star_body import Dilate

RULE = sphere_rule_n3(12, 24)
FAST = settings(max_examples=25, deadline=None)

seeds = st.integers(0, 2**32 - 1)
indices = st.integers(0, 2)
powers = st.floats(1.0, 6.0)
gauges = st.one_of(
    powers.map(Power),
    st.tuples(st.floats(0.0, 1.0), powers, powers).map(lambda a: PowerMix(*a)),
)


def pair(seed):
    rng = np.random.default_rng(seed)
    return random_body(rng, 3), random_body(rng, 3)


@FAST
@given(seeds, indices, st.floats(0.1, 10.0))
def test_homogeneity(seed, i, c):
    K, _ = pair(seed)
    a = chord_integral(Dilate(c, K), i, RULE, estimate_error=False).value
    b = chord_integral(K, i, RULE, estimate_error=False).value
    assert abs(a / (c ** (3 - i) * b) - 1) < 1e-12


@FAST
@given(seeds, indices, gauges)
def test_orlicz_minkowski_holds(seed, i, phi):
    K, L = pair(seed)
    rep = check_orlicz_minkowski(K, L, i, phi, RULE)
    assert rep.relative_slack >= -1e-8 and rep.slack >= -1e-8 * max(abs(rep.lhs), 1)


@FAST
@given(seeds, indices, gauges, gauges)
def test_orlicz_bm_holds(seed, i, g1, g2):
    K, L = pair(seed)
    assert check_orlicz_bm(K, L, i, [g1, g2], RULE).relative_slack >= -1e-8


@FAST
@given(seeds, indices, powers)
def test_lp_bm_holds(seed, i, p):
    K, L = pair(seed)
    assert check_lp_bm(K, L, i, p, RULE).relative_slack >= -1e-8


@FAST
@given(seeds, indices, gauges, gauges)
def test_decomposition_identity(seed, i, g1, g2):
    K, L = pair(seed)
    assert abs(check_decomposition(K, L, i, g1, g2, RULE).relative_slack) < 1e-10


@FAST
@given(seeds, st.floats(0.2, 5.0), gauges, gauges)
def test_dilate_pairs_are_equality_cases(seed, c, g1, g2):
    K, _ = pair(seed)
    rep = check_orlicz_minkowski(K, Dilate(c, K), 1, g1, RULE)
    assert rep.equality_flag
    assert check_orlicz_bm(K, Dilate(c, K), 0, [g1, g2], RULE).equality_flag


@FAST
@given(seeds, powers, st.floats(0.1, 3.0), st.floats(0.1, 3.0))
def test_orlicz_power_sum_is_lp_sum(seed, p, a, b):
    K, L = pair(seed)
    x = orlicz_chord_combine([K, L], [a, b], Power(p)).half_chord_on(RULE)
    y = lp_chord_add(K, L, p, a, b).half_chord_on(RULE)
    assert np.max(np.abs(x / y - 1)) < 1e-10


@FAST
@given(st.lists(st.floats(1e-3, 1e3), min_size=2, max_size=4), gauges, st.floats(1.01, 2.0))
def test_solution_increases_with_each_chord(ds, phi, grow):
    D = np.array(ds)[:, None]
    base = solve_half_chord(D, [1.0] * len(ds), [phi] * len(ds))
    bigger = D.copy()
    bigger[0] *= grow
    grown = solve_half_chord(bigger, [1.0] * len(ds), [phi] * len(ds))[0]
    assert grown >= base[0]
    # strict only when the grown chord's term is resolvable next to the others
    if phi(ds[0] / base[0]) > 1e-8:
        assert grown > base[0]
    # envelope: min d / t <= lam <= max d / t with phi(t) = 1/m
    t = phi.inverse(1.0 / len(ds))
    assert D.min() / t * (1 - 1e-10) <= base[0] <= D.max() / t * (1 + 1e-10)


@FAST
@given(gauges, st.floats(1e-3, 1e3))
def test_inverse_round_trip(phi, t):
    assert abs(phi.inverse(phi(t)) / t - 1) < 1e-10


@settings(max_examples=100, deadline=None)
@given(st.recursive(
    st.one_of(st.floats(allow_nan=False, allow_infinity=False), st.integers(), st.text(), st.booleans(), st.none()),
    lambda inner: st.one_of(st.lists(inner, max_size=4), st.dictionaries(st.text(max_size=5), inner, max_size=4)),
    max_leaves=20,
))
def test_digest_round_trip(value):
    payload = {"v": value}
    assert decode_digest(encode_digest(payload)) == payload
