"""Job-level semantics of rational rates.

A channel with rate ``p/q`` and initial tokens ``[c]`` moves a whole token
only when the accumulated fractional credit crosses an integer. The
functions here convert between that encoding and explicit per-job token
sequences.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence


class NotGenerable(ValueError):
    """No (rate, initial tokens) pair reproduces the given sequence."""


def tokens_at_job(job_index: int, rate, initial_tokens=0) -> int:
    """Tokens moved by job ``job_index`` (1-based).

    Positive ``rate`` is a production rate, negative a consumption rate
    (sign convention of the topology matrix).
    """
    if job_index < 1:
        raise ValueError(f"job index must be >= 1, got {job_index}")
    rate = Fraction(rate)
    if rate == 0:
        raise ValueError("rate must be non-zero")
    init = Fraction(initial_tokens)
    r = init - math.floor(init)
    n = job_index
    if rate > 0:
        return math.floor(n * rate + r) - math.floor((n - 1) * rate + r)
    g = -rate
    return math.ceil(n * g - r) - math.ceil((n - 1) * g - r)


def _sequence(rate: Fraction, initial_tokens, length: int, sign: int) -> list[int]:
    # integer form of the floor/ceil differences in tokens_at_job
    init = Fraction(initial_tokens)
    r = init - math.floor(init)
    a, b, c, d = rate.numerator, rate.denominator, r.numerator, r.denominator
    den, cb = b * d, c * b
    if sign > 0:
        cum = [(j * a * d + cb) // den for j in range(length + 1)]
    else:
        cum = [-((cb - j * a * d) // den) for j in range(length + 1)]
    return [y - x for x, y in zip(cum, cum[1:])]


def production_sequence(rate, initial_tokens, length: int) -> list[int]:
    rate = Fraction(rate)
    if rate <= 0:
        raise ValueError("rate must be positive")
    return _sequence(rate, initial_tokens, length, 1)


def consumption_sequence(rate, initial_tokens, length: int) -> list[int]:
    rate = Fraction(rate)
    if rate <= 0:
        raise ValueError("rate must be positive")
    return _sequence(rate, initial_tokens, length, -1)


def cumulative_production(jobs: int, rate, initial_tokens=0) -> int:
    """Tokens produced by jobs 1..``jobs`` (initial tokens excluded)."""
    init = Fraction(initial_tokens)
    r = init - math.floor(init)
    return math.floor(jobs * Fraction(rate) + r) - math.floor(r)


def cumulative_consumption(jobs: int, rate, initial_tokens=0) -> int:
    init = Fraction(initial_tokens)
    r = init - math.floor(init)
    return math.ceil(jobs * Fraction(rate) - r) - math.ceil(-r)


def _search(seq: Sequence[int], generate, direction: int) -> tuple[Fraction, Fraction]:
    """Smallest phase credit k/n reproducing ``seq``.

    Every prefix sum bounds the credit from below; the least multiple of
    1/n above the tightest bound is the only candidate worth generating.
    """
    seq = [int(x) for x in seq]
    n = len(seq)
    if n == 0 or not any(seq):
        raise ValueError("sequence must be non-empty and not all zero")
    if any(x < 0 for x in seq):
        raise ValueError("sequence entries must be non-negative")
    rate = Fraction(sum(seq), n)
    lower = Fraction(0)
    total = 0
    for j, x in enumerate(seq, start=1):
        total += x
        lower = max(lower, direction * (total - j * rate))
    k = math.ceil(lower * n)
    if k < n:
        init = Fraction(k, n)
        if generate(rate, init, n) == seq:
            return rate, init
    raise NotGenerable(f"no rate/initial-token pair generates {seq}")


def rate_init_from_production_sequence(seq: Sequence[int]) -> tuple[Fraction, Fraction]:
    """Rate and initial tokens whose production pattern is ``seq``."""
    return _search(seq, production_sequence, 1)


def rate_init_from_consumption_sequence(seq: Sequence[int]) -> tuple[Fraction, Fraction]:
    """Rate and initial tokens whose consumption pattern is ``seq``."""
    return _search(seq, consumption_sequence, -1)
