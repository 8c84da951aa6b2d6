"""Closed-form round and probability bounds.

Every evaluator returns an unrounded float.  Asymptotic correction terms
(the ``o(1)`` factor of the quasi-random upper bound, the ``O(1)`` term of
the fully-random bound) are explicit slack arguments defaulting to the
leading term only.
"""

import math
import warnings
from dataclasses import dataclass

from .errors import ConfigurationError, LemmaRegimeWarning

PITTEL_SLACK = 3.0
#: i below ``REGIME_FACTOR * ln(n)**2`` triggers :class:`LemmaRegimeWarning`.
REGIME_FACTOR = 10.0


@dataclass(frozen=True)
class BoundParams:
    n: int
    ell: int = 1
    epsilon: float = 0.0
    i: int = 0
    m: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ConfigurationError(f"n must be >= 2, got {self.n}")
        if not 0 <= self.epsilon < 1:
            raise ConfigurationError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if not 1 <= self.ell <= self.n:
            raise ConfigurationError(f"ell must lie in [1, {self.n}], got {self.ell}")
        if self.i < 0 or self.m < 0:
            raise ConfigurationError("i and m must be non-negative")


def _log_sum(x):
    return math.log2(x) + math.log(x)


def theorem_lower_bound(n, ell, epsilon):
    """``(1 - eps)(log2 n + ln n - log2 ell - ln ell) + ell - 1``.

    ``epsilon = 0`` is accepted as the limiting value.
    """
    BoundParams(n, ell, epsilon)
    return (1 - epsilon) * (_log_sum(n) - _log_sum(ell)) + ell - 1


def adhp_upper_bound(n, o1=0.0):
    """Quasi-random broadcast time ``(1 + o1)(log2 n + ln n)``; ``o1`` defaults to 0."""
    if n < 2:
        raise ConfigurationError(f"n must be >= 2, got {n}")
    return (1 + o1) * _log_sum(n)


def pittel_reference(n):
    """Leading term ``log2 n + ln n`` of the fully-random push broadcast time."""
    if n < 2:
        raise ConfigurationError(f"n must be >= 2, got {n}")
    return _log_sum(n)


def pittel_window(n, slack=PITTEL_SLACK):
    """``(low, high)`` around :func:`pittel_reference` for an additive ``O(1)`` of size ``slack``."""
    center = pittel_reference(n)
    return center - slack, center + slack


def lemma_threshold(n, i, epsilon, warn=True):
    """Free-interval length ``k = (n / i)(1 - eps) ln n`` guaranteed by the marking bound."""
    if i < 1:
        raise ConfigurationError(f"number of random markings must be >= 1, got {i}")
    if not 0 < epsilon < 1:
        raise ConfigurationError(f"epsilon must lie in (0, 1), got {epsilon}")
    if warn and i < REGIME_FACTOR * math.log(n) ** 2:
        warnings.warn(
            f"i={i} is below {REGIME_FACTOR:g} ln^2 n = {REGIME_FACTOR * math.log(n) ** 2:.1f}; "
            "the bound assumes i grows faster than ln^2 n",
            LemmaRegimeWarning,
            stacklevel=2,
        )
    return (n / i) * (1 - epsilon) * math.log(n)


def lemma_failure_bound(n, m, i, epsilon, variant="proof", warn=True):
    """Upper bound on P[no unmarked interval of length k], clamped to ``[0, 1]``.

    ``variant="proof"`` (default) evaluates ``exp(-1/2 n^(eps-1) (n/k - m))``,
    the form the derivation establishes.  ``variant="statement"`` evaluates
    ``exp(-1/2 (n^eps / k + m n^(eps-1)))``; the two differ in the sign of
    the ``m`` term.
    """
    if m < 0:
        raise ConfigurationError(f"m must be non-negative, got {m}")
    k = lemma_threshold(n, i, epsilon, warn=warn)
    if k <= 0:
        raise ConfigurationError(f"threshold k must be positive, got {k}")
    scale = n ** (epsilon - 1)
    if variant == "proof":
        exponent = -0.5 * scale * (n / k - m)
    elif variant == "statement":
        exponent = -0.5 * (n**epsilon / k + m * scale)
    else:
        raise ConfigurationError(f"unknown variant {variant!r}")
    return 1.0 if exponent >= 0 else math.exp(exponent)


def all_bounds(params):
    """Every closed form for ``params`` as a flat dict (the CLI ``bounds`` view)."""
    out = {
        "n": params.n,
        "ell": params.ell,
        "epsilon": params.epsilon,
        "theorem_lower_bound": theorem_lower_bound(params.n, params.ell, params.epsilon),
        "adhp_upper_bound": adhp_upper_bound(params.n),
        "pittel_reference": pittel_reference(params.n),
    }
    low, high = pittel_window(params.n)
    out["pittel_window_low"] = low
    out["pittel_window_high"] = high
    if params.i >= 1 and params.epsilon > 0:
        out["i"] = params.i
        out["m"] = params.m
        out["lemma_threshold"] = lemma_threshold(params.n, params.i, params.epsilon)
        out["lemma_failure_bound"] = lemma_failure_bound(params.n, params.m, params.i, params.epsilon)
        out["lemma_failure_bound_statement"] = lemma_failure_bound(
            params.n, params.m, params.i, params.epsilon, variant="statement"
        )
    return out
