"""Named attributions computed directly from their definitions.

None of these touch a kernel. They are the independent side of the
kernel-route equivalences (Shapley, equal surplus, FESP, least-squares
prenucleolus, linear-model attribution).
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import permutations

import numpy as np

from .errors import DimensionMismatch, NTooLargeForPermutations, NumericalFailure, WeightOutOfRange
from .game import CoalitionGame, grand_gap
from .solver import Attribution

PERMUTATION_CAP = 9


def shapley(game: CoalitionGame) -> Attribution:
    """Shapley value from the subset formula.

    ``phi_j = sum_{S not containing j} |S|! (n-|S|-1)! / n! * (v(S+j) - v(S))``
    """
    n = game.n
    v = game.values
    coef = np.array(
        [math.factorial(s) * math.factorial(n - s - 1) / math.factorial(n) for s in range(n)]
    )
    masks = np.arange(1 << n, dtype=np.int64)
    sizes = np.zeros_like(masks)
    for j in range(n):
        sizes += (masks >> j) & 1
    phi = np.empty(n)
    for j in range(n):
        without = masks[((masks >> j) & 1) == 0]
        phi[j] = np.sum(coef[sizes[without]] * (v[without | (1 << j)] - v[without]))
    return Attribution.from_phi(game, phi, "shapley")


@lru_cache(maxsize=None)
def _orderings(n: int) -> np.ndarray:
    perms = np.array(list(permutations(range(n))), dtype=np.int64)
    perms.setflags(write=False)
    return perms


def shapley_permutation_oracle(game: CoalitionGame) -> Attribution:
    """Average marginal contribution over all ``n!`` arrival orders."""
    n = game.n
    if n > PERMUTATION_CAP:
        raise NTooLargeForPermutations(f"n={n} exceeds the permutation cap {PERMUTATION_CAP}")
    perms = _orderings(n)
    # bits are disjoint, so running sums of 1 << j are running unions
    after = np.cumsum(1 << perms, axis=1)
    before = after - (1 << perms)
    gains = game.values[after] - game.values[before]
    totals = np.zeros(n)
    np.add.at(totals, perms.ravel(), gains.ravel())
    return Attribution.from_phi(game, totals / len(perms), "shapley-perm")


def es(game: CoalitionGame) -> Attribution:
    """Equal surplus: ``v({j})`` plus an equal share of what singletons leave over."""
    n = game.n
    single = np.array([game.values[1 << j] for j in range(n)])
    phi = single + (grand_gap(game) - single.sum()) / n
    return Attribution.from_phi(game, phi, "es")


def fesp_raw(game: CoalitionGame, w: float) -> Attribution:
    """``w (v({j}) - v(empty)) + (1 - w) (v(empty) - v(N \\ {j}))``.

    Not efficient in general; compare with the ``fesp`` kernel route, which
    differs from this by a constant vector.
    """
    if not 0.0 < w < 1.0:
        raise WeightOutOfRange(f"w must lie in (0, 1), got {w}")
    v0 = game.empty_value
    full = game.grand
    phi = [
        w * (game.values[1 << j] - v0) + (1.0 - w) * (v0 - game.values[full & ~(1 << j)])
        for j in range(game.n)
    ]
    return Attribution.from_phi(game, phi, f"fesp-raw:{w:g}")


def ls_prenucleolus_oracle(game: CoalitionGame) -> Attribution:
    """Efficient minimizer of the unweighted squared excesses over nonempty ``S``.

    The constraint is eliminated by writing ``phi_n = gap - sum(phi_1..n-1)``
    and the remaining unconstrained problem is handed to ``lstsq``.
    """
    n = game.n
    gap = grand_gap(game)
    if n == 1:
        return Attribution.from_phi(game, [gap], "lsprenucleolus")
    rows, rhs = [], []
    for mask in range(1, 1 << n):
        z = [(mask >> j) & 1 for j in range(n)]
        target = game.values[mask] - game.values[0] - z[n - 1] * gap
        rows.append([z[j] - z[n - 1] for j in range(n - 1)])
        rhs.append(target)
    x, _, rank, _ = np.linalg.lstsq(np.array(rows, dtype=float), np.array(rhs), rcond=None)
    if rank < n - 1:
        raise NumericalFailure("least-squares prenucleolus system is rank deficient")
    phi = np.append(x, gap - x.sum())
    return Attribution.from_phi(game, phi, "lsprenucleolus")


def linear_model_attribution(beta0, beta, means, instance) -> Attribution:
    """``beta_j (x_j - mean_j)`` for a linear model ``beta0 + beta . x``.

    The grand gap recorded is that of the induced game, ``beta . (x - mean)``,
    so ``efficiency_gap`` is zero up to rounding.
    """
    beta = np.asarray(beta, dtype=float)
    means = np.asarray(means, dtype=float)
    x = np.asarray(instance, dtype=float)
    if not (beta.ndim == means.ndim == x.ndim == 1 and beta.shape == means.shape == x.shape):
        raise DimensionMismatch("beta, means and instance must be vectors of one length")
    phi = beta * (x - means)
    gap = (float(beta0) + float(beta @ x)) - (float(beta0) + float(beta @ means))
    return Attribution(len(beta), phi, "lm", float(phi.sum() - gap), gap)
