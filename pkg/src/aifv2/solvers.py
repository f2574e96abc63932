"""Constructing optimal AIFV-2 code pairs.

All three methods search for the x where the envelopes E0 (non-decreasing)
and E1 (non-increasing) cross; the witness trees at that point form an
optimal pair.
"""
from __future__ import annotations

import enum
import logging
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .codec import CodePair, aifv_cost, entropy, huffman
from .codetree import metrics, serialize
from .geometry import (
    PlanePoint, crossing_in_interval, envelope_at, line_of, separation_oracle,
)
from .numeric import format_exact
from .treeopt import best_tree, exhaustive_optimum

log = logging.getLogger(__name__)


class Method(enum.Enum):
    BINARY_SEARCH = "binary-search"
    ELLIPSOID = "ellipsoid"
    ITERATIVE = "iterative"
    EXHAUSTIVE = "exhaustive"


class SolverError(RuntimeError):
    pass


@dataclass
class SolveReport:
    dist: object
    pair: CodePair
    x_star: Fraction | None
    cost: Fraction
    method: Method
    iterations: int
    oracle_calls: int
    degenerate: bool
    extra: dict = field(default_factory=dict)

    def to_text(self) -> str:
        dist = self.dist
        _, huff = huffman(dist)
        lines = [
            f"method\t{self.method.value}",
            f"n\t{dist.n}",
            f"b\t{dist.b}",
            f"probs\t{' '.join(format_exact(p) for p in dist.probs)}",
            f"labels\t{' '.join(dist.labels)}",
            f"x_star\t{'-' if self.x_star is None else format_exact(self.x_star)}",
            f"cost\t{format_exact(self.cost)}",
            f"cost_decimal\t{float(self.cost):.12f}",
            f"huffman\t{format_exact(huff)}",
            f"entropy\t{entropy(dist):.12f}",
            f"degenerate\t{str(self.degenerate).lower()}",
            f"iterations\t{self.iterations}",
            f"oracle_calls\t{self.oracle_calls}",
        ]
        for key in sorted(self.extra):
            lines.append(f"{key}\t{self.extra[key]}")
        lines.append("")
        lines.append(serialize(self.pair.t0).rstrip("\n"))
        lines.append("")
        lines.append(serialize(self.pair.t1).rstrip("\n"))
        return "\n".join(lines) + "\n"


def eps0(b: int) -> Fraction:
    return Fraction(1, 1 << (2 * (b + 1)))


def eps1(b: int) -> Fraction:
    return Fraction(1, 1 << (3 * (b + 1)))


def _report(dist, pair, x_star, method, iterations, calls, **extra) -> SolveReport:
    cost = aifv_cost(pair, dist)
    degenerate = metrics(pair.t0, dist).q1 == 0
    return SolveReport(dist, pair, x_star, cost, method, iterations, calls, degenerate, extra)


def _pair_at(x, dist) -> CodePair:
    t0, _ = best_tree(x, dist, "T0")
    t1, _ = best_tree(x, dist, "T1")
    return CodePair(t0, t1)


def _lines_at(points, dist):
    lines0, lines1 = {}, {}
    for x in points:
        env = envelope_at(x, dist)
        for tree, bucket in ((env.t0, lines0), (env.t1, lines1)):
            ln = line_of(tree, dist)
            bucket.setdefault(ln.key(), ln)
    return list(lines0.values()), list(lines1.values())


def solve_binary_search(dist) -> SolveReport:
    """Halve [0, 1] down to width 2**-(2(b+1)), then solve the crossing exactly."""
    target = eps0(dist.b)
    l, r = Fraction(0), Fraction(1)
    halvings = 0
    while r - l != target:
        mid = (l + r) / 2
        env = envelope_at(mid, dist)
        if env.e0 < env.e1:
            l = mid
        else:
            r = mid
        halvings += 1
    # one breakpoint at most per envelope inside [l, r]
    lines0, lines1 = _lines_at((l, r), dist)
    x_star = crossing_in_interval(l, r, lines0, lines1).x1
    pair = _pair_at(x_star, dist)
    return _report(dist, pair, x_star, Method.BINARY_SEARCH, halvings, halvings + 3,
                   interval=f"[{format_exact(l)}, {format_exact(r)}]")


def default_start(b: int) -> Fraction:
    """2 - log2(3) rounded to the grid 2**-(2(b+2))."""
    grid = 1 << (2 * (b + 2))
    return Fraction(round((2 - math.log2(3)) * grid), grid)


def solve_iterative(dist, start=None, max_iter: int = 10 ** 6) -> SolveReport:
    """Fixed-point iteration on the crossing of the two supporting lines."""
    c = default_start(dist.b) if start is None else Fraction(start)
    if not 0 <= c <= 1:
        raise ValueError(f"start must lie in [0, 1], got {c}")
    for it in range(1, max_iter + 1):
        t0, _ = best_tree(c, dist, "T0")
        t1, _ = best_tree(c, dist, "T1")
        m0, m1 = metrics(t0, dist), metrics(t1, dist)
        nxt = (m1.L - m0.L) / (m0.q1 + m1.q0)
        if nxt == c:
            return _report(dist, CodePair(t0, t1), c, Method.ITERATIVE, it, 2 * it,
                           start=format_exact(start if start is not None else default_start(dist.b)))
        if not 0 <= nxt <= 1:
            raise SolverError(f"iterate left [0, 1]: {nxt}")
        c = nxt
    raise SolverError(f"no fixed point after {max_iter} iterations")


def solve_exhaustive(dist) -> SolveReport:
    pair, cost = exhaustive_optimum(dist)
    report = _report(dist, pair, None, Method.EXHAUSTIVE, 0, 0)
    assert report.cost == cost
    return report


# ---------------------------------------------------------------------------
# ellipsoid


def oracle_budget(n: int, b: int) -> float:
    """Oracle-call bound 3m(log 1/eps + 2m log 2R + m log 1/eps1) at m=2, R=4n, eps=1/2 (log base 2)."""
    m = 2
    return 3 * m * (1 + 2 * m * math.log2(8 * n) + m * 3 * (b + 1))


def default_precision(n: int, b: int) -> int:
    env = os.environ.get("AIFV2_PRECISION")
    if env:
        return int(env)
    return 6 * (b + 1) + math.ceil(math.log2(n)) + 64


@dataclass
class EllipsoidState:
    """Center and shape matrix of {z : (z-c)^T A^-1 (z-c) <= 1}."""

    ctx: mpmath.ctx_mp.MPContext
    center: list
    shape: list
    iteration: int = 0

    @classmethod
    def ball(cls, ctx, radius) -> "EllipsoidState":
        r2 = ctx.mpf(radius) ** 2
        return cls(ctx, [ctx.mpf(0), ctx.mpf(0)], [[r2, ctx.mpf(0)], [ctx.mpf(0), r2]])

    def positive_definite(self) -> bool:
        (a, b), (c, d) = self.shape
        return a > 0 and d > 0 and a * d - b * c > 0 and b == c

    def cut(self, a) -> None:
        """Central cut keeping {z : a.z <= a.center}."""
        ctx = self.ctx
        (p, q), (_, s) = self.shape
        a1, a2 = ctx.mpf(a[0]), ctx.mpf(a[1])
        g1 = p * a1 + q * a2
        g2 = q * a1 + s * a2
        den = a1 * g1 + a2 * g2
        if den <= 0:
            raise _PrecisionLoss
        root = ctx.sqrt(den)
        g1, g2 = g1 / root, g2 / root
        # m = 2: step 1/(m+1), scale m^2/(m^2-1), rank-one weight 2/(m+1)
        self.center = [self.center[0] - g1 / 3, self.center[1] - g2 / 3]
        k = ctx.mpf(4) / 3
        w = ctx.mpf(2) / 3
        off = k * (q - w * g1 * g2)
        self.shape = [[k * (p - w * g1 * g1), off], [off, k * (s - w * g2 * g2)]]
        self.iteration += 1
        if not self.positive_definite():
            raise _PrecisionLoss

    def top(self):
        """Largest x2 over the ellipsoid."""
        return self.center[1] + self.ctx.sqrt(self.shape[1][1])


class _PrecisionLoss(ArithmeticError):
    pass


def _exact(v) -> Fraction:
    """The exact dyadic value of a finite mpf."""
    sign, man, exp, _ = v._mpf_
    value = Fraction(int(man)) * Fraction(2) ** exp
    return -value if sign else value


def _mpf(ctx, q: Fraction):
    return ctx.mpf(q.numerator) / q.denominator


def _phase1(dist, prec: int, budget: int):
    ctx = mpmath.MPContext()
    ctx.prec = prec
    state = EllipsoidState.ball(ctx, 4 * dist.n)
    target = eps1(dist.b)
    margin = _mpf(ctx, target) / 2
    best = None
    calls = 0
    certified = False
    while calls < budget:
        q = PlanePoint(_exact(state.center[0]), _exact(state.center[1]))
        res = separation_oracle(q, dist)
        calls += 1
        if res.inside:
            if best is None or q.x2 > best.x2:
                best = q
            a = (0, -1)
        else:
            a = (_mpf(ctx, res.a[0]), _mpf(ctx, res.a[1]))
        state.cut(a)
        if best is not None and state.top() - _mpf(ctx, best.x2) <= margin:
            certified = True
            break
    return best, calls, certified


def solve_ellipsoid(dist, precision: int | None = None) -> SolveReport:
    """Approximate the top of K with the ellipsoid method, then finish exactly.

    Phase 1 finds a feasible point within 2**-(3(b+1)) of the highest point
    of K.  Phase 2 uses the four witness lines at x1 -/+ eps0/2 and returns
    the trees at the maximizer of their lower envelope.
    """
    b = dist.b
    budget = math.floor(oracle_budget(dist.n, b))
    prec = precision or default_precision(dist.n, b)
    while True:
        try:
            best, calls, certified = _phase1(dist, prec, budget)
            break
        except _PrecisionLoss:
            log.info("ellipsoid lost positive definiteness at %d bits; retrying", prec)
            prec *= 2
    if best is None:
        raise SolverError(f"no feasible point within {budget} oracle calls")

    half = eps0(b) / 2
    l = max(Fraction(0), best.x1 - half)
    r = min(best.x1 + half, Fraction(1))
    lines0, lines1 = _lines_at((l, r), dist)
    lines = lines0 + lines1

    def m_local(x):
        return min(min(ln(x) for ln in lines0), min(ln(x) for ln in lines1))

    candidates = {l, r}
    for i, a in enumerate(lines):
        for c in lines[i + 1:]:
            if a.slope != c.slope:
                x = (c.intercept - a.intercept) / (a.slope - c.slope)
                if l <= x <= r:
                    candidates.add(x)
    # maximizer; ties go to the largest x
    x_prime = max(candidates, key=lambda x: (m_local(x), x))
    pair = _pair_at(x_prime, dist)
    return _report(dist, pair, x_prime, Method.ELLIPSOID, calls, calls,
                   precision=prec, certified=str(certified).lower(),
                   phase1_point=f"({format_exact(best.x1)}, {format_exact(best.x2)})",
                   budget=budget)


SOLVERS = {
    Method.BINARY_SEARCH: solve_binary_search,
    Method.ELLIPSOID: solve_ellipsoid,
    Method.ITERATIVE: solve_iterative,
    Method.EXHAUSTIVE: solve_exhaustive,
}


def solve(dist, method="binary-search") -> SolveReport:
    return SOLVERS[Method(method)](dist)
