"""Characteristic-function games over feature coalitions.

A coalition ``S`` of features ``{1, ..., n}`` is a bitmask: bit ``j - 1`` is
set iff feature ``j`` belongs to ``S``. A game stores ``v(S)`` for all
``2**n`` masks in a flat array indexed by the mask itself, so ``v(empty)`` is
``values[0]`` and ``v(N)`` is ``values[-1]``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, NonFinite, NOutOfRange, ParseError

MAX_FEATURES = 20


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_of(features) -> int:
    """Bitmask for an iterable of 1-based feature indices."""
    mask = 0
    for j in features:
        mask |= 1 << (j - 1)
    return mask


def members(mask: int) -> list[int]:
    """1-based feature indices contained in ``mask``, ascending."""
    out = []
    j = 1
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return out


@lru_cache(maxsize=32)
def membership(n: int) -> np.ndarray:
    """``(n, 2**n)`` 0/1 matrix; row ``j`` flags the masks containing feature ``j + 1``."""
    masks = np.arange(1 << n, dtype=np.int64)
    rows = np.stack([(masks >> j) & 1 for j in range(n)]).astype(float)
    rows.setflags(write=False)
    return rows


@lru_cache(maxsize=32)
def coalition_sizes(n: int) -> np.ndarray:
    """Vector of ``|S|`` for every mask ``0 .. 2**n - 1`` (read-only)."""
    masks = np.arange(1 << n, dtype=np.int64)
    sizes = np.zeros(1 << n, dtype=np.int64)
    for j in range(n):
        sizes += (masks >> j) & 1
    sizes.setflags(write=False)
    return sizes


@dataclass(frozen=True)
class CoalitionGame:
    """A game ``(N, v)`` with ``v`` tabulated over every coalition mask.

    ``v(empty)`` is kept as given; it is not shifted to zero.
    """

    n: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise NOutOfRange(f"n must be an integer, got {self.n!r}")
        if not 1 <= self.n <= MAX_FEATURES:
            raise NOutOfRange(f"n must be in [1, {MAX_FEATURES}], got {self.n}")
        values = np.array(self.values, dtype=float).ravel()
        if values.shape[0] != 1 << self.n:
            raise DimensionMismatch(
                f"a game with n={self.n} needs {1 << self.n} values, got {values.shape[0]}"
            )
        if not np.all(np.isfinite(values)):
            raise NonFinite("game values must all be finite")
        values.setflags(write=False)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "values", values)

    def __call__(self, mask: int) -> float:
        return float(self.values[mask])

    @property
    def grand(self) -> int:
        return (1 << self.n) - 1

    @property
    def empty_value(self) -> float:
        return float(self.values[0])

    @property
    def grand_value(self) -> float:
        return float(self.values[-1])

    @property
    def scale(self) -> float:
        """``max(1, max_S |v(S)|)``, the reference magnitude for tolerances."""
        return max(1.0, float(np.max(np.abs(self.values))))

    def __eq__(self, other):
        if not isinstance(other, CoalitionGame):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.n, self.values.tobytes()))

    def to_dict(self) -> dict:
        return {"n": self.n, "values": [float(x) for x in self.values]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data) -> "CoalitionGame":
        if not isinstance(data, dict):
            raise ParseError("game JSON must be an object")
        unknown = set(data) - {"n", "values"}
        if unknown:
            raise ParseError(f"unknown keys in game JSON: {sorted(unknown)}")
        if "n" not in data or "values" not in data:
            raise ParseError('game JSON needs "n" and "values"')
        n, values = data["n"], data["values"]
        if not isinstance(n, int) or isinstance(n, bool):
            raise ParseError('"n" must be an integer')
        if not isinstance(values, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in values
        ):
            raise ParseError('"values" must be a list of numbers')
        return make_game(n, values)


def make_game(n: int, values: Sequence[float]) -> CoalitionGame:
    return CoalitionGame(n, values)


def grand_gap(game: CoalitionGame) -> float:
    """``v(N) - v(empty)``: the total that an additive attribution distributes."""
    return game.grand_value - game.empty_value


@dataclass(frozen=True)
class AdditivityCertificate:
    additive: bool
    max_residual: float
    a: np.ndarray | None = None


def default_additivity_tol(game: CoalitionGame) -> float:
    return 1e-9 * game.scale


def is_additive(game: CoalitionGame, tol: float | None = None) -> AdditivityCertificate:
    """Check whether ``v(S) - v(empty) = sum_{j in S} a_j`` for all ``S``.

    ``a_j`` is read off the singletons as ``v({j}) - v(empty)``. The largest
    deviation over all coalitions is reported either way.
    """
    if tol is None:
        tol = default_additivity_tol(game)
    if not tol > 0:
        raise ValueError("tol must be positive")
    n = game.n
    v0 = game.empty_value
    a = np.array([game.values[1 << j] - v0 for j in range(n)])
    masks = np.arange(1 << n, dtype=np.int64)
    predicted = np.full(1 << n, v0)
    for j in range(n):
        predicted += ((masks >> j) & 1) * a[j]
    max_residual = float(np.max(np.abs(game.values - predicted)))
    additive = max_residual <= tol
    return AdditivityCertificate(additive, max_residual, a if additive else None)


def additive_game(v_empty: float, a: Sequence[float]) -> CoalitionGame:
    """Build the additive game ``v(S) = v_empty + sum_{j in S} a_j``."""
    a = [float(x) for x in a]
    n = len(a)
    values = []
    for mask in range(1 << n):
        total = v_empty
        for j in members(mask):
            total += a[j - 1]
        values.append(total)
    return CoalitionGame(n, values)


def marginal_to_grand(game: CoalitionGame, j: int) -> float:
    """``v(N) - v(N \\ {j})`` for 1-based feature ``j``."""
    if not 1 <= j <= game.n:
        raise IndexOutOfRange(f"feature index {j} outside 1..{game.n}")
    return game.grand_value - float(game.values[game.grand & ~(1 << (j - 1))])


def random_game(n: int, rng: np.random.Generator) -> CoalitionGame:
    """Game with every value (``v(empty)`` included) i.i.d. uniform on [-1, 1]."""
    return CoalitionGame(n, rng.uniform(-1.0, 1.0, size=1 << n))


def binomial(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)
