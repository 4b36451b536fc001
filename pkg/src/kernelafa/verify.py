"""Randomized invariant checks over seeded games.

Each check returns a :class:`CheckResult` carrying the worst deviation seen
and the tolerance it was held to. Tolerances are relative to the game's
magnitude: ``rel * max(1, max_S |v(S)|)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .game import (
    CoalitionGame,
    additive_game,
    binomial,
    grand_gap,
    is_additive,
    marginal_to_grand,
    random_game,
)
from .kernels import (
    SymmetricKernel,
    builtin_kernels,
    es_kernel,
    fesp_kernel,
    scale_kernel,
    shap_kernel,
    shap_kernel_original,
    uniform_kernel,
)
from .models import (
    AdditiveModel,
    Dataset,
    InteractionModel,
    LinearModel,
    estimate_value_function,
    feature_means,
    predict,
)
from .reference import (
    es,
    fesp_raw,
    linear_model_attribution,
    ls_prenucleolus_oracle,
    shapley,
    shapley_permutation_oracle,
)
from .solver import (
    solve_constrained,
    solve_unconstrained,
    wls_oracle_constrained,
    wls_oracle_unconstrained,
)

DEFAULT_REL_TOL = 1e-8


@dataclass
class CheckResult:
    name: str
    description: str
    trials: int = 0
    failures: int = 0
    worst: float = 0.0
    tolerance: float = 0.0

    @property
    def passed(self) -> bool:
        return self.trials > 0 and self.failures == 0

    def record(self, deviation: float, tol: float) -> None:
        self.trials += 1
        if not deviation <= tol:
            self.failures += 1
        if deviation > self.worst or math.isnan(deviation):
            self.worst = deviation
            self.tolerance = tol
        elif self.tolerance == 0.0:
            self.tolerance = tol


def max_abs_diff(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def symmetrize(game: CoalitionGame, i: int, j: int) -> CoalitionGame:
    """Average ``v`` with its image under swapping features ``i`` and ``j`` (1-based)."""
    bi, bj = 1 << (i - 1), 1 << (j - 1)
    masks = np.arange(1 << game.n)
    has_i, has_j = (masks & bi) != 0, (masks & bj) != 0
    swapped = masks & ~(bi | bj)
    swapped = swapped | np.where(has_i, bj, 0) | np.where(has_j, bi, 0)
    return CoalitionGame(game.n, 0.5 * (game.values + game.values[swapped]))


def pairwise_difference(game: CoalitionGame, k: SymmetricKernel, i: int, j: int) -> float:
    """``sum_{S in N \\ {i,j}} [pi(S+i) v(S+i) - pi(S+j) v(S+j)]`` with ``pi`` normalized.

    Evaluated by explicit subset enumeration.
    """
    n = game.n
    d = sum(binomial(n - 2, s - 1) * k.w[s] for s in range(1, n))
    bi, bj = 1 << (i - 1), 1 << (j - 1)
    total = 0.0
    for mask in range(1 << n):
        if mask & (bi | bj):
            continue
        si, sj = mask | bi, mask | bj
        size = bin(si).count("1")
        total += k.w[size] / d * (game.values[si] - game.values[sj])
    return total


def random_additive_model(n: int, rng: np.random.Generator) -> AdditiveModel:
    degree = rng.integers(1, 4)
    return AdditiveModel(tuple(rng.uniform(-1, 1, size=degree + 1) for _ in range(n)))


def random_linear_model(n: int, rng: np.random.Generator) -> LinearModel:
    return LinearModel(float(rng.uniform(-1, 1)), rng.uniform(-2, 2, size=n))


def random_background(n: int, rng: np.random.Generator, t_max: int = 64) -> Dataset:
    t = int(rng.integers(1, t_max + 1))
    return Dataset(rng.normal(size=(t, n)))


def games(seed: int, trials: int, n_values) -> Iterator[CoalitionGame]:
    rng = np.random.default_rng(seed)
    for n in n_values:
        for _ in range(trials):
            yield random_game(n, rng)


def run_all(seed: int = 42, trials: int = 100, n_max: int = 6,
            rel_tol: float = DEFAULT_REL_TOL) -> list[CheckResult]:
    """Run every invariant; ``n`` ranges over ``2..n_max`` with ``trials`` games each."""
    if not 2 <= n_max <= 8:
        raise ValueError("n_max must lie in [2, 8]")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    results = {}

    def check(name, description):
        if name not in results:
            results[name] = CheckResult(name, description)
        return results[name]

    ns = range(2, n_max + 1)
    aux = np.random.default_rng([seed, 1])
    for game in games(seed, trials, ns):
        n = game.n
        tau = rel_tol * game.scale
        gap = grand_gap(game)
        kernels = builtin_kernels(n)

        for k in kernels:
            afa = solve_constrained(game, k)
            oracle, _ = wls_oracle_constrained(game, k)
            free, _ = solve_unconstrained(game, k)
            free_oracle, _ = wls_oracle_unconstrained(game, k)
            check("solver.1", "closed forms agree with KKT / normal-equation oracles").record(
                max(max_abs_diff(afa.phi, oracle.phi), max_abs_diff(free.phi, free_oracle.phi)), tau)
            check("solver.2", "efficiency of the constrained solution").record(
                abs(afa.phi.sum() - gap), tau)
            dev = max(max_abs_diff(solve_constrained(game, k.with_grand_weight(wn)).phi, afa.phi)
                      for wn in (0.0, 1.0, 1e6))
            check("solver.3", "insensitivity to the grand-coalition weight").record(dev, tau)
            dev = 0.0
            for c in (1e-6, 3.0, 1e6):
                scaled = scale_kernel(k, c)
                dev = max(dev, max_abs_diff(solve_constrained(game, scaled).phi, afa.phi),
                          max_abs_diff(solve_unconstrained(game, scaled)[0].phi, free.phi))
            check("solver.4", "invariance under kernel scaling").record(dev, tau)
            dev = 0.0
            for i in range(1, n + 1):
                for j in range(i + 1, n + 1):
                    dev = max(dev, abs((afa.phi[i - 1] - afa.phi[j - 1])
                                       - pairwise_difference(game, k, i, j)))
            check("solver.7", "pairwise-difference identity").record(dev, tau)

        sym = symmetrize(game, 1, n)
        tau_sym = rel_tol * sym.scale
        for k in kernels:
            phi = solve_constrained(sym, k).phi
            check("solver.5", "symmetric features receive equal attributions").record(
                abs(phi[0] - phi[-1]), tau_sym)

        add = additive_game(float(game.values[0]), aux.uniform(-1, 1, size=n))
        target = [marginal_to_grand(add, j) for j in range(1, n + 1)]
        tau_add = rel_tol * add.scale
        for k in kernels:
            check("solver.6", "additive games: every kernel gives v(N) - v(N\\{j})").record(
                max_abs_diff(solve_constrained(add, k).phi, target), tau_add)

        if n <= 3:
            dev = max_abs_diff(solve_constrained(game, shap_kernel(n)).phi,
                               solve_constrained(game, uniform_kernel(n)).phi)
            if n == 2:
                base = solve_constrained(game, kernels[0]).phi
                dev = max([dev] + [max_abs_diff(solve_constrained(game, k).phi, base)
                                   for k in kernels])
            check("solver.8", "small-n collapse (shap = uniform for n <= 3, all equal for n = 2)"
                  ).record(dev, tau)

        limit = check("solver.9", "unconstrained solution tends to the constrained one as w[n] grows")
        for k in kernels:
            afa = solve_constrained(game, k).phi
            seq = [max_abs_diff(solve_unconstrained(game, k.with_grand_weight(10.0 ** e))[0].phi, afa)
                   for e in (2, 4, 6)]
            # monotone up to rounding noise
            monotone = seq[0] + 1e-14 >= seq[1] and seq[1] + 1e-14 >= seq[2]
            limit.record(seq[2] if monotone else math.inf, 1e-3 * max(1.0, abs(gap)))

        sv = shapley(game)
        dev = max(max_abs_diff(solve_constrained(game, shap_kernel(n)).phi, sv.phi),
                  max_abs_diff(solve_constrained(game, shap_kernel_original(n)).phi, sv.phi))
        check("reference.1", "shap kernel generates the Shapley value").record(dev, tau)
        if n <= 7:
            check("reference.2", "subset Shapley = permutation Shapley").record(
                max_abs_diff(sv.phi, shapley_permutation_oracle(game).phi), 1e-10)
        check("reference.3", "es kernel generates equal surplus").record(
            max_abs_diff(solve_constrained(game, es_kernel(n)).phi, es(game).phi), tau)
        if n >= 3:
            dev = 0.0
            for w in (0.2, 0.5, 0.8):
                raw = fesp_raw(game, w).phi
                shift = solve_constrained(game, fesp_kernel(n, w)).phi - raw
                correction = (gap - raw.sum()) / n
                dev = max(dev, float(shift.max() - shift.min()), float(np.max(np.abs(shift - correction))))
            check("reference.4", "fesp kernel = printed FESP + efficiency correction").record(dev, tau)
        lsp = ls_prenucleolus_oracle(game)
        check("reference.5", "uniform kernel generates the LS prenucleolus").record(
            max_abs_diff(solve_constrained(game, uniform_kernel(n)).phi, lsp.phi), tau)
        if n <= 3:
            check("reference.6", "Shapley = LS prenucleolus for n <= 3").record(
                max_abs_diff(sv.phi, lsp.phi), tau)

    rng = np.random.default_rng([seed, 2])
    for n in ns:
        for _ in range(max(1, trials // 10)):
            bg = random_background(n, rng)
            x = rng.normal(size=n)
            for model in (random_linear_model(n, rng), random_additive_model(n, rng)):
                game = estimate_value_function(model, bg, x)
                scale = game.scale
                preds = model.predict_rows(bg.rows)
                dev = max(abs(game.grand_value - predict(model, x)),
                          abs(game.empty_value - preds.mean()))
                check("models.1", "v(N) = f(x) and v(empty) = mean background prediction").record(
                    dev, 4 * np.finfo(float).eps * scale)
                cert = is_additive(game, 1e-9 * scale)
                check("models.2", "additive models induce additive games").record(
                    cert.max_residual, 1e-9 * scale)
                if isinstance(model, LinearModel):
                    lm = linear_model_attribution(model.beta0, model.beta, feature_means(bg), x)
                    masks = np.arange(1 << n)
                    z = ((masks[:, None] >> np.arange(n)) & 1).astype(float)
                    check("models.3", "linear models: v(S) - v(empty) = sum beta_j (x_j - mean_j)"
                          ).record(max_abs_diff(game.values - game.empty_value, z @ lm.phi),
                                   1e-9 * scale)
                    dev = max(max_abs_diff(solve_constrained(game, k).phi, lm.phi)
                              for k in builtin_kernels(n))
                    check("models.4", "linear models: every kernel gives beta_j (x_j - mean_j)"
                          ).record(dev, 1e-9 * scale)

    inter = estimate_value_function(
        InteractionModel(0.0, [0.0, 0.0], ((1, 2, 1.0),)), Dataset([[0.0, 0.0], [2.0, 2.0]]), [1.0, 3.0])
    check("models.5", "interaction model yields a non-additive game").record(
        0.0 if not is_additive(inter, 1e-9).additive else math.inf, 0.0)

    group = {"solver": 0, "reference": 1, "models": 2}
    return sorted(results.values(),
                  key=lambda r: (group[r.name.split(".")[0]], int(r.name.split(".")[1])))
