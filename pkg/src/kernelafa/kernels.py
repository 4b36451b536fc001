"""Symmetric coalition kernels.

Every kernel here assigns the same weight to all coalitions of equal size, so
it is stored as a table ``w[0..n]`` indexed by ``|S|``. ``w[0]`` is always 0:
the empty coalition contributes nothing to the local least-squares objective.

The constructors store the printed constants as-is. The solvers only depend
on the kernel up to a positive multiple, see :func:`scale_kernel`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    AllZeroInterior,
    DegenerateBand,
    MaskOutOfRange,
    NegativeWeight,
    NonFinite,
    NonPositiveScale,
    NOutOfRange,
    Overflow,
    UsageError,
    ValidationError,
    WeightOutOfRange,
    WidthOutOfRange,
)
from .game import MAX_FEATURES, binomial, coalition_sizes, popcount

# sigma at which consecutive sizes differ by a factor of exactly 2
DOUBLING_SIGMA = math.sqrt(1.0 / math.log(2.0))


@dataclass(frozen=True)
class SymmetricKernel:
    """Per-size weights ``w[s]``, ``s = 0..n``.

    Only nonnegativity, finiteness and ``w[0] == 0`` are enforced here. A
    kernel with no positive weight on sizes ``1..n-1`` can be represented,
    but the solvers reject it.
    """

    n: int
    w: tuple
    name: str = "custom"
    params: tuple = field(default=())

    def __post_init__(self):
        if not 1 <= self.n <= MAX_FEATURES:
            raise NOutOfRange(f"kernel n must be in [1, {MAX_FEATURES}], got {self.n}")
        w = tuple(float(x) for x in self.w)
        if len(w) != self.n + 1:
            raise ValidationError(f"kernel table needs {self.n + 1} entries, got {len(w)}")
        if not all(math.isfinite(x) for x in w):
            raise NonFinite("kernel weights must be finite")
        if any(x < 0 for x in w):
            raise NegativeWeight("kernel weights must be nonnegative")
        if w[0] != 0.0:
            raise ValidationError("w[0] must be 0")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "params", tuple(self.params))

    @property
    def weights(self) -> np.ndarray:
        return np.array(self.w)

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        return f"{self.name}:{','.join(f'{p:g}' for p in self.params)}"

    def has_interior_weight(self) -> bool:
        return any(x > 0 for x in self.w[1 : self.n])

    def with_grand_weight(self, value: float) -> "SymmetricKernel":
        """Copy with ``w[n]`` replaced; used to probe insensitivity to the grand coalition."""
        w = list(self.w)
        w[self.n] = float(value)
        return SymmetricKernel(self.n, w, f"{self.name}[w_n={value:g}]", self.params)

    def per_coalition(self) -> np.ndarray:
        """Weight of every coalition mask ``0 .. 2**n - 1``."""
        return self.weights[coalition_sizes(self.n)]


def _require_n(n: int, lo: int = 2):
    if not isinstance(n, (int, np.integer)) or not lo <= n <= MAX_FEATURES:
        raise NOutOfRange(f"n must be an integer in [{lo}, {MAX_FEATURES}], got {n!r}")


def _table(n: int, fn) -> list:
    return [0.0] + [fn(s) for s in range(1, n + 1)]


def shap_kernel(n: int) -> SymmetricKernel:
    """Kernel SHAP weights rescaled by ``n / (n - 1)``.

    ``w[s] = n / (C(n, s) s (n - s))``. The size-``n`` weight is infinite in
    the formula and stored as 0; the efficient solution does not depend on it.
    """
    _require_n(n)
    return SymmetricKernel(
        n, _table(n, lambda s: n / (binomial(n, s) * s * (n - s)) if s < n else 0.0), "shap"
    )


def shap_kernel_original(n: int) -> SymmetricKernel:
    """Kernel SHAP weights as usually published, ``(n - 1) / (C(n, s) s (n - s))``."""
    _require_n(n)
    return SymmetricKernel(
        n,
        _table(n, lambda s: (n - 1) / (binomial(n, s) * s * (n - s)) if s < n else 0.0),
        "shap-orig",
    )


def es_kernel(n: int) -> SymmetricKernel:
    """Weight 1 on singletons only (equal surplus)."""
    _require_n(n)
    return SymmetricKernel(n, _table(n, lambda s: 1.0 if s == 1 else 0.0), "es")


def fesp_kernel(n: int, w_tau: float) -> SymmetricKernel:
    """``w_tau`` on singletons, ``1 - w_tau`` on sizes ``n-1`` and ``n``, 0 between.

    ``n = 2`` is rejected because the singleton band and the ``n-1`` band
    would be the same size.
    """
    _require_n(n)
    if not 0.0 < w_tau < 1.0:
        raise WeightOutOfRange(f"w_tau must lie in (0, 1), got {w_tau}")
    if n == 2:
        raise DegenerateBand("fesp_kernel needs n >= 3: sizes 1 and n-1 coincide at n = 2")

    def weight(s):
        if s == 1:
            return w_tau
        if s >= n - 1:
            return 1.0 - w_tau
        return 0.0

    return SymmetricKernel(n, _table(n, weight), "fesp", (w_tau,))


def uniform_kernel(n: int) -> SymmetricKernel:
    """Flat kernel ``1 / 2**(n-2)``; generates the least-squares prenucleolus."""
    _require_n(n)
    c = 2.0 ** -(n - 2)
    return SymmetricKernel(n, _table(n, lambda s: c), "uniform")


def linear_kernel(n: int) -> SymmetricKernel:
    _require_n(n)
    denom = n * 2.0 ** (n - 3)
    return SymmetricKernel(n, _table(n, lambda s: s / denom), "linear")


def exp_kernel(n: int, sigma: float) -> SymmetricKernel:
    """LIME exponential kernel on binary inputs, normalized.

    With ``r = exp(1 / sigma**2)`` the weights are ``r**(s-1) / (r+1)**(n-2)``.
    Raises :class:`Overflow` instead of saturating when ``r**(n-1)`` is not a
    finite double.
    """
    _require_n(n)
    if not (isinstance(sigma, (int, float)) and math.isfinite(sigma) and sigma > 0):
        raise WidthOutOfRange(f"sigma must be positive and finite, got {sigma}")
    try:
        r = math.exp(1.0 / sigma**2)
        top = r ** (n - 1)
        denom = (r + 1.0) ** (n - 2)
    except OverflowError as exc:
        raise Overflow(f"exp kernel weights overflow for n={n}, sigma={sigma}") from exc
    if not (math.isfinite(top) and math.isfinite(denom)):
        raise Overflow(f"exp kernel weights overflow for n={n}, sigma={sigma}")
    return SymmetricKernel(n, _table(n, lambda s: r ** (s - 1) / denom), "exp", (sigma,))


def simplified_exp_kernel(n: int) -> SymmetricKernel:
    """Exponential kernel at ``sigma = sqrt(1/ln 2)``: ``2**(s-1) / 3**(n-2)``."""
    _require_n(n)
    denom = 3.0 ** (n - 2)
    return SymmetricKernel(
        n, _table(n, lambda s: 2.0 ** (s - 1) / denom), "exp", (DOUBLING_SIGMA,)
    )


def concave_kernel(n: int) -> SymmetricKernel:
    _require_n(n)
    denom = (3 * n * n - n + 2) * 2.0 ** (n - 4)
    return SymmetricKernel(n, _table(n, lambda s: s * (2 * n - s) / denom), "concave")


def scale_kernel(k: SymmetricKernel, c: float) -> SymmetricKernel:
    if not (math.isfinite(c) and c > 0):
        raise NonPositiveScale(f"scale must be positive and finite, got {c}")
    return SymmetricKernel(k.n, [c * x for x in k.w], f"{k.name}*{c:g}", k.params)


def weight_of(k: SymmetricKernel, mask: int) -> float:
    if not 0 <= mask < (1 << k.n):
        raise MaskOutOfRange(f"mask {mask} is not a coalition of {k.n} features")
    return k.w[popcount(mask)]


def custom_kernel(n: int, weights: Sequence[float]) -> SymmetricKernel:
    """User kernel from weights for sizes ``1..n``."""
    _require_n(n)
    weights = [float(x) for x in weights]
    if len(weights) != n:
        raise ValidationError(f"custom kernel for n={n} needs {n} weights, got {len(weights)}")
    if any(not math.isfinite(x) for x in weights):
        raise NonFinite("custom kernel weights must be finite")
    if any(x < 0 for x in weights):
        raise NegativeWeight("custom kernel weights must be nonnegative")
    k = SymmetricKernel(n, [0.0] + weights, "custom")
    if not k.has_interior_weight():
        raise AllZeroInterior("custom kernel has no positive weight on sizes 1..n-1")
    return k


def builtin_kernels(n: int, fesp_weight: float = 0.5, sigma: float = 1.0) -> list:
    """One instance of each built-in kernel family valid for ``n``.

    ``fesp`` is omitted for ``n = 2`` and ``exp`` with the given ``sigma`` is
    included next to the simplified (doubling) variant.
    """
    out = [
        shap_kernel(n),
        shap_kernel_original(n),
        es_kernel(n),
        uniform_kernel(n),
        linear_kernel(n),
        exp_kernel(n, sigma),
        simplified_exp_kernel(n),
        concave_kernel(n),
    ]
    if n >= 3:
        out.insert(3, fesp_kernel(n, fesp_weight))
    return out


def display_normalized(k: SymmetricKernel) -> SymmetricKernel:
    """Rescale so that ``sum_{s=1}^{n-1} C(n, s) w[s] = 1``. Presentation only."""
    total = sum(binomial(k.n, s) * k.w[s] for s in range(1, k.n))
    if total <= 0:
        raise AllZeroInterior("cannot normalize a kernel without interior weight")
    return scale_kernel(k, 1.0 / total)


KERNEL_NAMES = ("shap", "shap-orig", "es", "fesp:<w>", "uniform", "linear",
                "exp", "exp:<sigma>", "concave", "custom:<w1,...,wn>")


def parse_kernel(spec: str, n: int) -> SymmetricKernel:
    """Build a kernel from a CLI spec string such as ``"fesp:0.3"``."""
    name, _, arg = spec.strip().partition(":")
    simple = {
        "shap": shap_kernel,
        "shap-orig": shap_kernel_original,
        "es": es_kernel,
        "uniform": uniform_kernel,
        "linear": linear_kernel,
        "concave": concave_kernel,
    }
    if name in simple:
        if arg:
            raise UsageError(f"kernel {name!r} takes no argument")
        return simple[name](n)
    if name == "exp" and not arg:
        return simplified_exp_kernel(n)
    if not arg:
        raise UsageError(f"unknown kernel spec {spec!r}; expected one of {', '.join(KERNEL_NAMES)}")
    try:
        numbers = [float(x) for x in arg.split(",")]
    except ValueError:
        raise UsageError(f"bad numeric argument in kernel spec {spec!r}") from None
    if name == "fesp" and len(numbers) == 1:
        return fesp_kernel(n, numbers[0])
    if name == "exp" and len(numbers) == 1:
        return exp_kernel(n, numbers[0])
    if name == "custom":
        return custom_kernel(n, numbers)
    raise UsageError(f"unknown kernel spec {spec!r}; expected one of {', '.join(KERNEL_NAMES)}")
