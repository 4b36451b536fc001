import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kernelafa.errors import DimensionMismatch, IndexOutOfRange, NonFinite, NOutOfRange, ParseError
from kernelafa.game import (
    CoalitionGame,
    additive_game,
    coalition_sizes,
    grand_gap,
    is_additive,
    make_game,
    marginal_to_grand,
    mask_of,
    members,
    popcount,
)
from kernelafa.kernels import SymmetricKernel, weight_of


def test_smallest_game():
    g = make_game(1, [0, 5])
    assert g.empty_value == 0 and g.grand_value == 5


@pytest.mark.parametrize(
    "n, values, exc",
    [
        (2, [0, 1, 3], DimensionMismatch),
        (0, [0], NOutOfRange),
        (21, [0.0] * 4, NOutOfRange),
        (1, [0, float("nan")], NonFinite),
        (1, [0, float("inf")], NonFinite),
    ],
)
def test_make_game_rejects(n, values, exc):
    with pytest.raises(exc):
        make_game(n, values)


def test_values_are_immutable(g2):
    with pytest.raises(ValueError):
        g2.values[0] = 1.0


def test_empty_value_not_normalized():
    g = make_game(1, [4.0, 5.0])
    assert g(0) == 4.0


@pytest.mark.parametrize(
    "n, values, gap",
    [(2, [0, 1, 3, 6], 6), (3, [0, 0, 0, 1, 0, 1, 0, 1], 1), (2, [4.2] * 4, 0)],
)
def test_grand_gap(n, values, gap):
    assert grand_gap(make_game(n, values)) == gap


def test_is_additive_on_built_game(gadd):
    cert = is_additive(gadd, 1e-12)
    assert cert.additive
    np.testing.assert_array_equal(cert.a, [1, 2, 3])


def test_g3_not_additive(g3):
    cert = is_additive(g3, 1e-9)
    assert not cert.additive and cert.a is None
    assert cert.max_residual == pytest.approx(1.0)


def test_constant_game_additive():
    cert = is_additive(make_game(3, [4.2] * 8), 1e-9)
    assert cert.additive
    np.testing.assert_array_equal(cert.a, np.zeros(3))


def test_is_additive_needs_positive_tol(g3):
    with pytest.raises(ValueError):
        is_additive(g3, 0.0)


@pytest.mark.parametrize("j, expected", [(1, 1.0), (2, 0.0), (3, 0.0)])
def test_marginal_to_grand_g3(g3, j, expected):
    assert marginal_to_grand(g3, j) == expected


def test_marginal_to_grand_additive(gadd):
    assert marginal_to_grand(gadd, 3) == 3.0


@pytest.mark.parametrize("j", [0, 4])
def test_marginal_to_grand_range(g3, j):
    with pytest.raises(IndexOutOfRange):
        marginal_to_grand(g3, j)


def test_mask_helpers():
    assert mask_of([1, 3]) == 0b101
    assert members(0b101) == [1, 3]
    assert popcount(0b1011) == 3
    np.testing.assert_array_equal(coalition_sizes(3), [0, 1, 1, 2, 1, 2, 2, 3])


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.data())
def test_certificate_roundtrip(n, data):
    v0 = data.draw(st.floats(-100, 100))
    a = data.draw(st.lists(st.floats(-100, 100), min_size=n, max_size=n))
    game = additive_game(v0, a)
    cert = is_additive(game)
    assert cert.additive
    rebuilt = additive_game(game.empty_value, cert.a)
    again = is_additive(rebuilt)
    assert again.additive
    # the rebuilt game sums a in the same order, so it is reproduced exactly
    assert is_additive(rebuilt, 1e-300).max_residual == 0.0
    for j in range(1, n + 1):
        assert marginal_to_grand(game, j) == pytest.approx(a[j - 1], abs=1e-9 * game.scale)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.data())
def test_json_roundtrip_bit_exact(n, data):
    values = data.draw(st.lists(st.floats(allow_nan=False, allow_infinity=False),
                                min_size=1 << n, max_size=1 << n))
    game = make_game(n, values)
    back = CoalitionGame.from_dict(json.loads(game.to_json()))
    assert back == game
    assert back.values.tobytes() == game.values.tobytes()


@pytest.mark.parametrize(
    "doc",
    [
        {"n": 2, "values": [0, 1, 3]},
        {"n": 2, "values": [0, 1, 3, 6], "extra": 1},
        {"n": "2", "values": [0, 1, 3, 6]},
        {"values": [0, 1]},
        {"n": 1, "values": [0, "x"]},
        [0, 1],
    ],
)
def test_from_dict_rejects(doc):
    with pytest.raises((ParseError, DimensionMismatch)):
        CoalitionGame.from_dict(doc)


def test_popcount_matches_kernel_lookup():
    k = SymmetricKernel(5, [0, 1, 2, 3, 4, 5])
    sizes = coalition_sizes(5)
    for mask in range(32):
        assert weight_of(k, mask) == sizes[mask] == popcount(mask)
