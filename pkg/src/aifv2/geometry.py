"""Cost lines, the two lower envelopes, and a separation oracle for the
region under their minimum."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from .codetree import T0, CodeTree, metrics
from .treeopt import best_tree


@dataclass(frozen=True)
class CostLine:
    """y = intercept + slope * x, with the tree that induces it."""

    intercept: Fraction
    slope: Fraction
    tree: CodeTree | None = None

    def __call__(self, x) -> Fraction:
        return self.intercept + self.slope * x

    def key(self):
        return (self.intercept, self.slope)


class PlanePoint(NamedTuple):
    x1: Fraction
    x2: Fraction


class EnvelopeSample(NamedTuple):
    e0: Fraction
    e1: Fraction
    t0: CodeTree
    t1: CodeTree

    @property
    def m(self) -> Fraction:
        return min(self.e0, self.e1)


@dataclass(frozen=True)
class SeparationResult:
    """Either ``inside`` or a cut ``a . z <= bound`` valid for all of K.

    For a separator the query satisfies ``a . q > bound``.
    """

    inside: bool
    a: tuple[Fraction, Fraction] | None = None
    bound: Fraction | None = None
    line: CostLine | None = None
    boundary: str | None = None


INSIDE = SeparationResult(True)


def line_of(tree: CodeTree, dist) -> CostLine:
    met = metrics(tree, dist)
    if tree.kind is T0:
        return CostLine(met.L, met.q1, tree)
    return CostLine(met.L, -met.q0, tree)


def envelope_at(x, dist) -> EnvelopeSample:
    x = Fraction(x)
    t0, e0 = best_tree(x, dist, "T0")
    t1, e1 = best_tree(x, dist, "T1")
    return EnvelopeSample(e0, e1, t0, t1)


def intersect_lines(a: CostLine, b: CostLine) -> PlanePoint | None:
    """Crossing point of two lines, or ``None`` when they are parallel."""
    if a.slope == b.slope:
        return None
    x = (b.intercept - a.intercept) / (a.slope - b.slope)
    return PlanePoint(x, a(x))


def _lower(lines: Sequence[CostLine], x) -> Fraction:
    return min(ln(x) for ln in lines)


def crossing_in_interval(l, r, lines0: Sequence[CostLine], lines1: Sequence[CostLine]) -> PlanePoint:
    """The point in [l, r] where min(lines0) meets min(lines1).

    Requires min(lines0) <= min(lines1) at ``l`` and >= at ``r``.
    """
    l, r = Fraction(l), Fraction(r)
    if l > r or not lines0 or not lines1:
        raise ValueError("empty interval or no lines")
    diff_l = _lower(lines0, l) - _lower(lines1, l)
    diff_r = _lower(lines0, r) - _lower(lines1, r)
    if diff_l > 0 or diff_r < 0:
        raise ValueError(f"no crossing in [{l}, {r}]: differences {diff_l}, {diff_r}")
    candidates = {l, r}
    for a in lines0:
        for b in lines1:
            p = intersect_lines(a, b)
            if p is not None and l <= p.x1 <= r:
                candidates.add(p.x1)
    for x in sorted(candidates):
        y0 = _lower(lines0, x)
        if y0 == _lower(lines1, x):
            return PlanePoint(x, y0)
    # the difference of two piecewise-linear functions changes sign only at a candidate
    raise AssertionError("sign change without a crossing candidate")


def separation_oracle(q: PlanePoint, dist) -> SeparationResult:
    """Membership in K = {0 <= x1 <= 1, 0 <= x2 <= min(E0(x1), E1(x1))}."""
    x1, x2 = Fraction(q[0]), Fraction(q[1])
    zero, one = Fraction(0), Fraction(1)
    if x1 < 0:
        return SeparationResult(False, (-one, zero), zero, boundary="x1>=0")
    if x1 > 1:
        return SeparationResult(False, (one, zero), one, boundary="x1<=1")
    if x2 < 0:
        return SeparationResult(False, (zero, -one), zero, boundary="x2>=0")
    env = envelope_at(x1, dist)
    if x2 <= env.m:
        return INSIDE
    # cut along the envelope that attains the minimum (f first on ties)
    tree = env.t0 if env.e0 <= env.e1 else env.t1
    line = line_of(tree, dist)
    # K lies below the line: x2 - slope*x1 <= intercept
    return SeparationResult(False, (-line.slope, one), line.intercept, line=line)


def m_value(x, dist) -> Fraction:
    return envelope_at(x, dist).m


# ---------------------------------------------------------------------------
# full lower envelopes of explicit line sets (small n only)


def lower_envelope(lines: Sequence[CostLine]) -> list[tuple[CostLine, Fraction | None, Fraction | None]]:
    """Pieces ``(line, x_from, x_to)`` of min over ``lines`` on the whole real axis.

    Pieces run left to right; the outer ends are ``None``.
    """
    best: dict = {}
    for ln in lines:
        if ln.slope not in best or ln.intercept < best[ln.slope].intercept:
            best[ln.slope] = ln
    # leftmost piece has the largest slope
    ordered = [best[s] for s in sorted(best, reverse=True)]
    hull: list[CostLine] = []
    starts: list[Fraction | None] = []
    for ln in ordered:
        while hull:
            top = hull[-1]
            x = (ln.intercept - top.intercept) / (top.slope - ln.slope)
            if starts[-1] is not None and x <= starts[-1]:
                hull.pop()
                starts.pop()
                continue
            hull.append(ln)
            starts.append(x)
            break
        else:
            hull.append(ln)
            starts.append(None)
    pieces = []
    for i, ln in enumerate(hull):
        end = starts[i + 1] if i + 1 < len(hull) else None
        pieces.append((ln, starts[i], end))
    return pieces


def breakpoints(lines: Sequence[CostLine]) -> list[Fraction]:
    return [start for _, start, _ in lower_envelope(lines)[1:]]
