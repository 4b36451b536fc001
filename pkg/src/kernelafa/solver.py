"""Attributions as minimizers of the kernel-weighted local least-squares loss.

For a game ``v`` and a symmetric kernel ``pi`` the loss is

    L(phi) = sum_S pi(S) * (sum_{i in S} phi_i - (v(S) - v(empty)))**2

minimized either freely or subject to ``sum(phi) = v(N) - v(empty)``.

:func:`solve_constrained` and :func:`solve_unconstrained` evaluate the closed
forms. Both closed forms hold verbatim once the kernel is normalized so that

    D = sum_{s=1}^{n-1} C(n-2, s-1) w[s] = 1,

which every printed kernel already satisfies; other kernels (for example
``shap_kernel_original``) are rescaled by ``1/D`` first. ``D`` is the
difference of the two distinct entries of the normal matrix and must be
positive for the minimizer to be unique.

The ``wls_oracle_*`` functions assemble the normal equations from the design
matrix over all coalitions and solve them with a dense solver. They share no
code with the closed forms and serve as ground truth in tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegenerateKernel, DimensionMismatch, NumericalFailure, SingularSystem
from .game import CoalitionGame, binomial, coalition_sizes, grand_gap, membership
from .kernels import SymmetricKernel

COND_LIMIT = 1e12


@dataclass(frozen=True)
class Attribution:
    """Per-feature contributions ``phi[j-1]`` for features ``j = 1..n``.

    ``efficiency_gap`` is ``sum(phi) - (v(N) - v(empty))``; it is zero up to
    rounding for every method that enforces efficiency.
    """

    n: int
    phi: np.ndarray
    method: str
    efficiency_gap: float
    grand_gap: float

    def __post_init__(self):
        phi = np.array(self.phi, dtype=float)
        if phi.shape != (self.n,):
            raise DimensionMismatch(f"phi must have length {self.n}")
        if not np.all(np.isfinite(phi)):
            raise NumericalFailure(f"{self.method}: attribution is not finite")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_phi(cls, game: CoalitionGame, phi, method: str) -> "Attribution":
        gap = grand_gap(game)
        phi = np.asarray(phi, dtype=float)
        return cls(game.n, phi, method, float(np.sum(phi) - gap), gap)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "phi": [float(x) for x in self.phi],
            "grand_gap": self.grand_gap,
            "efficiency_gap": self.efficiency_gap,
        }


@dataclass(frozen=True)
class SolverDiagnostics:
    """Scalars of the normal equations ``((A - B) I + B J) phi = r``.

    ``A`` is the total weight of coalitions containing a given feature, ``B``
    that of coalitions containing a given pair. ``T`` is ``sum(phi)`` at the
    optimum; ``lam`` the efficiency multiplier when a constrained oracle ran.
    """

    T: float
    A: float
    B: float
    lam: float | None = None
    residual: float | None = None


def _check(game: CoalitionGame, k: SymmetricKernel):
    if k.n != game.n:
        raise DimensionMismatch(f"kernel is for n={k.n}, game has n={game.n}")


def _pair_gap(k: SymmetricKernel) -> float:
    n = k.n
    return sum(binomial(n - 2, s - 1) * k.w[s] for s in range(1, n))


def normal_scalars(k: SymmetricKernel) -> tuple[float, float]:
    """``(A, B)`` computed from the size table."""
    n = k.n
    a = sum(binomial(n - 1, s - 1) * k.w[s] for s in range(1, n + 1))
    b = sum(binomial(n - 2, s - 2) * k.w[s] for s in range(2, n + 1))
    return a, b


def _member_sums(game: CoalitionGame, weights: np.ndarray) -> np.ndarray:
    """``p_j = sum_{S contains j, S != N} pi(S) v(S)`` for each feature."""
    pv = weights[coalition_sizes(game.n)] * game.values
    pv[0] = 0.0
    pv[-1] = 0.0
    return membership(game.n) @ pv


def solve_constrained(game: CoalitionGame, k: SymmetricKernel | None) -> Attribution:
    """Efficient attribution generated by the kernel ``k``.

    ``phi_j = p_j + (v(N) - v(empty) - sum_i p_i) / n`` where ``p_j`` sums
    ``pi(S) v(S)`` over the coalitions holding ``j``, with ``pi`` normalized
    as described in the module docstring. The empty and grand coalitions are
    left out of ``p_j``: their terms are identical for every ``j`` and cancel.

    For a single feature the constraint alone fixes ``phi_1`` and ``k`` is
    ignored.
    """
    gap = grand_gap(game)
    if game.n == 1:
        return Attribution.from_phi(game, [gap], "afa" if k is None else f"afa[{k.label}]")
    _check(game, k)
    d = _pair_gap(k)
    if not d > 0:
        raise DegenerateKernel(f"kernel {k.label!r} has no positive weight on sizes 1..n-1")
    p = _member_sums(game, k.weights / d)
    phi = p + (gap - p.sum()) / game.n
    return Attribution.from_phi(game, phi, f"afa[{k.label}]")


def solve_unconstrained(game: CoalitionGame, k: SymmetricKernel):
    """Free minimizer of the weighted loss and its normal-equation scalars.

    Summing the first-order conditions over features gives

        T = sum(phi) = sum_S |S| pi(S) (v(S) - v(empty)) / (A + (n-1) B),

    and ``phi_j = p_j + (T - sum_i p_i) / n`` as in the efficient case.
    Returns ``(Attribution, SolverDiagnostics)``.
    """
    _check(game, k)
    n = game.n
    if n < 2:
        raise DimensionMismatch("the unconstrained problem needs n >= 2")
    d = _pair_gap(k)
    if not d > 0:
        raise SingularSystem(f"kernel {k.label!r}: normal equations are singular (A == B)")
    a, b = normal_scalars(k)
    w = k.weights / d
    sizes = coalition_sizes(n)
    excess = game.values - game.empty_value
    total = float(np.sum(sizes * w[sizes] * excess))
    t = total / ((a + (n - 1) * b) / d)
    p = _member_sums(game, w)
    phi = p + (t - p.sum()) / n
    return Attribution.from_phi(game, phi, f"lsq[{k.label}]"), SolverDiagnostics(t, a, b)


# -- numerical oracles -------------------------------------------------------


@lru_cache(maxsize=32)
def _design(n: int) -> np.ndarray:
    """Binary design matrix: row ``m`` is the indicator vector of mask ``m``."""
    rows = ((np.arange(1 << n)[:, None] >> np.arange(n)[None, :]) & 1).astype(float)
    rows.setflags(write=False)
    return rows


def _normal_equations(game: CoalitionGame, k: SymmetricKernel):
    z = _design(game.n)
    pi = np.asarray(k.w)[z.sum(axis=1).astype(int)]
    y = game.values - game.values[0]
    m = z.T @ (pi[:, None] * z)
    r = z.T @ (pi * y)
    return z, pi, y, m, r


def _solve_dense(mat: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    cond = np.linalg.cond(mat)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise NumericalFailure(f"{what}: condition number {cond:.3g} exceeds {COND_LIMIT:g}")
    return np.linalg.solve(mat, rhs)


def weighted_loss(game: CoalitionGame, k: SymmetricKernel, phi) -> float:
    """Value of the weighted least-squares objective at ``phi``."""
    z, pi, y, _, _ = _normal_equations(game, k)
    resid = z @ np.asarray(phi, dtype=float) - y
    return float(np.sum(pi * resid**2))


def wls_oracle_constrained(game: CoalitionGame, k: SymmetricKernel | None):
    """Efficient minimizer via the KKT system ``[[2M, -1], [1', 0]]``.

    ``M`` is rescaled by its largest entry before the solve; this changes the
    multiplier by the same factor (undone on return) but not the minimizer.
    """
    gap = grand_gap(game)
    n = game.n
    if n == 1:
        attr = Attribution.from_phi(game, [gap], "kkt")
        return attr, SolverDiagnostics(gap, float("nan"), 0.0, float("nan"), 0.0)
    _check(game, k)
    if not k.has_interior_weight():
        raise DegenerateKernel(f"kernel {k.label!r} has no positive weight on sizes 1..n-1")
    z, pi, y, m, r = _normal_equations(game, k)
    c = float(np.max(np.abs(m)))
    kkt = np.zeros((n + 1, n + 1))
    kkt[:n, :n] = 2.0 * m / c
    kkt[:n, n] = -1.0
    kkt[n, :n] = 1.0
    rhs = np.concatenate([2.0 * r / c, [gap]])
    sol = _solve_dense(kkt, rhs, "constrained KKT system")
    phi, lam = sol[:n], sol[n] * c
    resid = float(np.sum(pi * (z @ phi - y) ** 2))
    diag = SolverDiagnostics(float(phi.sum()), float(m[0, 0]), float(m[0, 1]), float(lam), resid)
    return Attribution.from_phi(game, phi, f"kkt[{k.label}]"), diag


def wls_oracle_unconstrained(game: CoalitionGame, k: SymmetricKernel):
    """Free minimizer from the normal equations ``M phi = r``."""
    _check(game, k)
    n = game.n
    if n < 2:
        raise DimensionMismatch("the unconstrained problem needs n >= 2")
    if not k.has_interior_weight():
        raise SingularSystem(f"kernel {k.label!r}: normal equations are singular (A == B)")
    z, pi, y, m, r = _normal_equations(game, k)
    c = float(np.max(np.abs(m)))
    phi = _solve_dense(m / c, r / c, "normal equations")
    resid = float(np.sum(pi * (z @ phi - y) ** 2))
    diag = SolverDiagnostics(float(phi.sum()), float(m[0, 0]), float(m[0, 1]), None, resid)
    return Attribution.from_phi(game, phi, f"normal[{k.label}]"), diag
