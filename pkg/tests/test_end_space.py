import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import derived, space_of_cnf
from slitsurf.end_space import (ANY_COUNTABLE, FINITE, OMEGA, ONE, OTHER, SELF_SIMILAR, TRANSLATABLE,
                                VIRTUALLY_CYCLIC, ZERO, DescriptorError, GenusMarking, Ordinal,
                                cb_derivative, cb_derivative_power, cb_rank_degree, char_system,
                                classify_trichotomy, descriptor_from_char_system, format_descriptor,
                                format_ordinal, iter_alphas, left_sub, ord_add, ord_mul, parse_descriptor,
                                parse_ordinal, realizable_isometry_groups)

SMALL = list(iter_alphas(4))


def w(e, c=1):
    return Ordinal.omega_power(Ordinal.of(e) if isinstance(e, int) else e, c)


# -- ordinals --------------------------------------------------------------------

def test_parse_format_round_trip():
    for text in ["0", "1", "7", "w", "w*3+2", "w^2*2+w+5", "w^(w)", "w^(w+1)*2+w^3"]:
        assert format_ordinal(parse_ordinal(text)) == text


def test_parse_normalizes_absorption():
    assert parse_ordinal("1+w") == OMEGA
    assert parse_ordinal("w+w^2") == w(2)
    assert parse_ordinal("w*2+w") == w(1, 3)


def test_parse_error_reports_position():
    with pytest.raises(DescriptorError) as e:
        parse_ordinal("w^")
    assert e.value.position == 2
    with pytest.raises(DescriptorError) as e:
        parse_ordinal("w+x")
    assert e.value.position == 2


def test_ordering_is_lexicographic_on_cnf():
    assert Ordinal.of(5) < OMEGA < w(1, 2) < w(2) < w(OMEGA)
    assert sorted(SMALL) == SMALL


def test_addition_absorbs_smaller_terms():
    assert ord_add(Ordinal.of(1), OMEGA) == OMEGA
    assert ord_add(OMEGA, Ordinal.of(1)) != OMEGA
    assert ord_add(w(1, 2), w(2)) == w(2)


def test_multiplication_examples():
    assert ord_mul(Ordinal.of(2), OMEGA) == OMEGA
    assert ord_mul(OMEGA, Ordinal.of(2)) == w(1, 2)
    assert ord_mul(OMEGA, OMEGA) == w(2)
    assert ord_mul(ord_add(OMEGA, ONE), Ordinal.of(2)) == ord_add(w(1, 2), ONE)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SMALL), st.sampled_from(SMALL), st.sampled_from(SMALL))
def test_addition_associative(a, b, c):
    assert ord_add(ord_add(a, b), c) == ord_add(a, ord_add(b, c))


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SMALL), st.sampled_from(SMALL), st.sampled_from(SMALL))
def test_left_distributive(a, b, c):
    assert ord_mul(a, ord_add(b, c)) == ord_add(ord_mul(a, b), ord_mul(a, c))


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SMALL), st.sampled_from(SMALL))
def test_left_subtraction_inverts_addition(a, b):
    assert left_sub(ord_add(a, b), a) == b


def test_iter_alphas_counts_small_sizes():
    # size 1: 0, 1;  size 2 adds 2, w
    assert [format_ordinal(a) for a in iter_alphas(2)] == ["0", "1", "2", "w"]


def test_fundamental_sequence_converges_from_below():
    lim = w(OMEGA)
    seq = [lim.fundamental(k) for k in range(1, 5)]
    assert all(x < lim for x in seq) and seq == sorted(seq)
    assert w(1, 2).fundamental(3) == ord_add(OMEGA, Ordinal.of(3))


# -- descriptors ---------------------------------------------------------------------

def test_descriptor_requires_successor():
    with pytest.raises(DescriptorError):
        parse_descriptor("w")
    with pytest.raises(DescriptorError):
        parse_descriptor("0")


def test_char_system_examples():
    assert str(char_system(parse_descriptor("w*1+1"))) == "(1, 1)"
    assert str(char_system(parse_descriptor("w^2*2+1"))) == "(2, 2)"
    assert str(char_system(parse_descriptor("w^(w)*2+1"))) == "(w, 2)"
    assert str(char_system(parse_descriptor("3"))) == "(0, 3)"
    assert str(char_system(parse_descriptor("w*2+w+4"))) == "(1, 3)"


def test_char_system_round_trip():
    for a in SMALL:
        for n in range(1, 4):
            d = descriptor_from_char_system(char_system(parse_descriptor(
                format_ordinal(ord_add(w(a, n), ONE)) if a else str(n))))
            assert char_system(d).degree == n and char_system(d).alpha == a


def test_cantor_has_no_char_system():
    with pytest.raises(DescriptorError):
        char_system(parse_descriptor("cantor"))


@pytest.mark.parametrize("terms", [
    [(0, 1)], [(0, 3)], [(1, 1), (0, 1)], [(1, 2), (0, 3)], [(2, 1), (0, 1)],
    [(2, 2), (1, 1), (0, 4)], [(2, 3), (0, 2)], [(1, 3), (0, 1)],
])
def test_derivative_matches_nested_oracle(terms):
    d = parse_descriptor("+".join(f"w^{e}*{c}" if e else str(c) for e, c in terms))
    model = space_of_cnf(terms)
    for _ in range(4):
        d = cb_derivative(d)
        model = derived(model)
        if d.atom == "empty":
            assert model == ()
            break
        got = [(e.finite_value(), c) for e, c in d.space.terms]
        assert space_of_cnf(got) == model


def test_derivative_of_cantor_is_perfect():
    d = parse_descriptor("cantor+seq")
    assert cb_derivative(d).atom == "cantor"
    assert cb_derivative(parse_descriptor("cantor")).atom == "cantor"


def test_transfinite_derivative():
    d = parse_descriptor("w^(w)*2+w^3+1")
    # survivors of beta derivatives are the nonzero multiples of w^beta
    assert format_descriptor(cb_derivative_power(d, Ordinal.of(3))) == "w^(w)*2+2"
    assert format_descriptor(cb_derivative_power(d, OMEGA)) == "2"
    assert cb_derivative_power(d, ord_add(OMEGA, ONE)).atom == "empty"


def test_rank_degree():
    assert cb_rank_degree(parse_descriptor("w^2*3+w+1")) == (Ordinal.of(3), 3)
    assert cb_rank_degree(parse_descriptor("4")) == (ONE, 4)


def test_genus_marking_propagates():
    d = parse_descriptor("w+1", GenusMarking("none"))
    assert cb_derivative(d).genus.kind == "none"
    with pytest.raises(ValueError):
        cb_derivative(parse_descriptor("w+1", GenusMarking.parse("rays:1,2")))


# -- classification --------------------------------------------------------------------

@pytest.mark.parametrize("text,cls,groups", [
    ("w*1+1", SELF_SIMILAR, ANY_COUNTABLE),
    ("w^2*2+1", TRANSLATABLE, VIRTUALLY_CYCLIC),
    ("w^(w)*2+1", OTHER, FINITE),
    ("1", SELF_SIMILAR, ANY_COUNTABLE),
    ("2", TRANSLATABLE, VIRTUALLY_CYCLIC),
    ("3", OTHER, FINITE),
    ("cantor", SELF_SIMILAR, ANY_COUNTABLE),
])
def test_classification_examples(text, cls, groups):
    d = parse_descriptor(text)
    assert classify_trichotomy(d) == cls
    assert realizable_isometry_groups(d) == groups


def test_classification_requires_full_genus():
    with pytest.raises(DescriptorError):
        classify_trichotomy(parse_descriptor("w+1", GenusMarking("none")))


def test_classification_exhaustive_small():
    for a, n in itertools.product(SMALL, range(1, 5)):
        text = format_ordinal(ord_add(w(a, n), ONE)) if a else str(n)
        got = classify_trichotomy(parse_descriptor(text))
        if n == 1:
            assert got == SELF_SIMILAR
        elif n == 2 and (a == ZERO or a.is_successor):
            assert got == TRANSLATABLE
        else:
            assert got == OTHER
