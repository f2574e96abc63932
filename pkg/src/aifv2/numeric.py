"""Exact dyadic probabilities.

Every probability, cost and x-coordinate in the package is a
:class:`fractions.Fraction`.  Input probabilities must have power-of-two
denominators so that the bit-width ``b`` of a distribution is well defined.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

ExactScalar = Fraction

_FRACTION_RE = re.compile(r"^\s*(\d+)\s*/\s*(\d+)\s*$")
_BINARY_RE = re.compile(r"^\s*([01])\.([01]+)\s*$")


class DistributionError(ValueError):
    """Raised for malformed probabilities or distributions."""


def is_power_of_two(k: int) -> bool:
    return k > 0 and k & (k - 1) == 0


def dyadic_exponent(q: Fraction) -> int:
    """Return k such that the reduced denominator of ``q`` is 2**k."""
    den = q.denominator
    if not is_power_of_two(den):
        raise DistributionError(f"denominator of {format_exact(q)} is not a power of two")
    return den.bit_length() - 1


def format_exact(q: Fraction) -> str:
    """Canonical text form ``num/den`` (lowest terms, always with a slash)."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_exact(text: str) -> Fraction:
    """Parse a canonical ``num/den`` (or plain integer) without range checks."""
    text = text.strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise DistributionError(f"not a rational number: {text!r}") from exc


def parse_prob(text: str) -> Fraction:
    """Parse ``"c/2^k"`` or a binary fraction ``"0.d1d2..."`` into an exact value in (0, 1]."""
    m = _FRACTION_RE.match(text)
    if m:
        num, den = int(m.group(1)), int(m.group(2))
        if not is_power_of_two(den):
            raise DistributionError(f"denominator {den} is not a power of two: {text!r}")
        value = Fraction(num, den)
    else:
        m = _BINARY_RE.match(text)
        if not m:
            raise DistributionError(f"malformed probability: {text!r}")
        digits = m.group(2)
        value = int(m.group(1)) + Fraction(int(digits, 2), 1 << len(digits))
    if value <= 0 or value > 1:
        raise DistributionError(f"probability must lie in (0, 1]: {text!r}")
    return value


@dataclass(frozen=True)
class SourceDist:
    """A probability vector sorted non-increasingly, with its bit-width ``b``.

    ``order[i]`` is the position (in the caller's original order) of the
    symbol now at sorted index ``i``; ``labels`` follow the sorted order.
    """

    probs: tuple[Fraction, ...]
    b: int
    order: tuple[int, ...]
    labels: tuple[str, ...] = field(default=())

    @property
    def n(self) -> int:
        return len(self.probs)

    @property
    def counts(self) -> tuple[int, ...]:
        """Integer numerators c_i with p_i = c_i / 2**b."""
        scale = 1 << self.b
        return tuple(int(p * scale) for p in self.probs)

    def label_index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    def __str__(self) -> str:
        return "(" + ", ".join(format_exact(p) for p in self.probs) + ")"


def make_dist(values: Sequence[Fraction], labels: Sequence[str] | None = None) -> SourceDist:
    values = [Fraction(v) for v in values]
    if len(values) < 2:
        raise DistributionError("a distribution needs at least two symbols")
    if any(v <= 0 for v in values):
        raise DistributionError("probabilities must be positive")
    if sum(values) != 1:
        raise DistributionError(f"probabilities sum to {format_exact(sum(values))}, not 1")
    b = max(dyadic_exponent(v) for v in values)
    if labels is None:
        labels = [str(i) for i in range(len(values))]
    elif len(labels) != len(values):
        raise DistributionError("one label per probability is required")
    elif len(set(labels)) != len(labels):
        raise DistributionError("symbol labels must be distinct")
    # stable: equal probabilities keep file order
    order = sorted(range(len(values)), key=lambda i: -values[i])
    return SourceDist(
        probs=tuple(values[i] for i in order),
        b=b,
        order=tuple(order),
        labels=tuple(labels[i] for i in order),
    )


def dist_from_counts(counts: Iterable[int], b: int) -> SourceDist:
    """Build a distribution from integer numerators over 2**b."""
    return make_dist([Fraction(c, 1 << b) for c in counts])


def parse_dist_text(text: str) -> SourceDist:
    """Parse the distribution file format.

    One probability per line, optionally followed by a symbol label;
    ``#`` starts a comment line and blank lines are ignored.
    """
    values: list[Fraction] = []
    labels: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) > 2:
            raise DistributionError(f"line {lineno}: expected 'probability [label]'")
        try:
            values.append(parse_prob(parts[0]))
        except DistributionError as exc:
            raise DistributionError(f"line {lineno}: {exc}") from None
        labels.append(parts[1] if len(parts) == 2 else str(len(labels)))
    return make_dist(values, labels)


def read_dist(path) -> SourceDist:
    with open(path, encoding="utf-8") as fh:
        return parse_dist_text(fh.read())


def format_dist_text(dist: SourceDist) -> str:
    """Inverse of :func:`parse_dist_text`, written in the caller's original order."""
    rows = [None] * dist.n
    for i, orig in enumerate(dist.order):
        rows[orig] = f"{format_exact(dist.probs[i])} {dist.labels[i]}"
    return "\n".join(rows) + "\n"


def dyadic_grid(n: int, bits: int):
    """Every sorted distribution of ``n`` multiples of 2**-bits (each >= 2**-bits)."""
    total = 1 << bits

    def parts(remaining, k, cap):
        if k == 1:
            if 1 <= remaining <= cap:
                yield (remaining,)
            return
        # the largest part first; the rest must fit below it
        for first in range(min(cap, remaining - (k - 1)), 0, -1):
            if first * k < remaining:
                break
            for rest in parts(remaining - first, k - 1, first):
                yield (first,) + rest

    for counts in parts(total, n, total):
        yield dist_from_counts(counts, bits)


def random_dist(rng, n: int, bits: int) -> SourceDist:
    """Uniformly random composition of 2**bits into ``n`` positive parts."""
    total = 1 << bits
    if n > total:
        raise DistributionError(f"cannot split 2**{bits} into {n} positive parts")
    cuts = sorted(rng.sample(range(1, total), n - 1))
    counts = [b - a for a, b in zip([0] + cuts, cuts + [total])]
    return dist_from_counts(counts, bits)
