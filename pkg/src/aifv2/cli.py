"""Command line front end: ``aifv2 <subcommand> ...``."""
from __future__ import annotations

import argparse
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import codec
from .codec import CodecError, CodePair
from .codetree import TreeError, read_tree, write_tree
from .geometry import envelope_at
from .numeric import (
    DistributionError, dyadic_grid, format_dist_text, format_exact, random_dist, read_dist,
)
from .solvers import Method, SolverError, solve
from .treeopt import CapacityError

EXIT_OK, EXIT_USAGE, EXIT_INPUT = 0, 1, 2
METHODS = [m.value for m in Method]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _out(path):
    """Open ``path`` for writing, or stdout for ``None``/``-``."""
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8"), True


# ---------------------------------------------------------------------------
# subcommands


def cmd_solve(args):
    dist = read_dist(args.input)
    report = solve(dist, args.method)
    text = report.to_text()
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        write_tree(report.pair.t0, out / "t0.tree")
        write_tree(report.pair.t1, out / "t1.tree")
        (out / "dist.txt").write_text(format_dist_text(dist), encoding="utf-8")
        (out / "report.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def _load_code(directory):
    d = Path(directory)
    pair = CodePair(read_tree(d / "t0.tree"), read_tree(d / "t1.tree"))
    labels = None
    if (d / "dist.txt").exists():
        dist = read_dist(d / "dist.txt")
        if dist.n != pair.n:
            raise TreeError(f"dist.txt has {dist.n} symbols, trees have {pair.n}")
        labels = list(dist.labels)
    else:
        labels = [str(i) for i in range(pair.n)]
    return pair, labels


def cmd_encode(args):
    pair, labels = _load_code(args.trees)
    index = {lab: i for i, lab in enumerate(labels)}
    text = Path(args.input).read_text(encoding="utf-8")
    message = []
    for tok in text.split():
        if tok not in index:
            raise CodecError(f"unknown symbol label {tok!r}")
        message.append(index[tok])
    stream = codec.encode(message, pair)
    data = codec.pack(stream, pair.n, len(message))
    if args.output in (None, "-"):
        sys.stdout.buffer.write(data)
    else:
        Path(args.output).write_bytes(data)
    return EXIT_OK


def cmd_decode(args):
    pair, labels = _load_code(args.trees)
    stream, n, count = codec.unpack(Path(args.input).read_bytes())
    if n != pair.n:
        raise CodecError(f"container was written for n={n}, trees have n={pair.n}")
    message = codec.decode(stream, count, pair)
    fh, close = _out(args.output)
    try:
        fh.write(" ".join(labels[s] for s in message) + "\n")
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_compare(args):
    dist = read_dist(args.input)
    report = solve(dist, args.method)
    _, huff = codec.huffman(dist)
    h = codec.entropy(dist)
    rows = [
        ("entropy", f"{h:.12f}", ""),
        ("huffman", format_exact(huff), f"{float(huff):.12f}"),
        ("aifv2", format_exact(report.cost), f"{float(report.cost):.12f}"),
        ("redundancy_huffman", "", f"{float(huff) - h:.12f}"),
        ("redundancy_aifv2", "", f"{float(report.cost) - h:.12f}"),
        ("gain", format_exact(huff - report.cost), f"{float(huff - report.cost):.12f}"),
    ]
    cost = report.cost
    ok = codec.entropy_sign(dist, cost) <= 0 and cost <= huff and codec.entropy_sign(dist, cost - Fraction(1, 2)) >= 0
    sys.stdout.write("".join("\t".join(r) + "\n" for r in rows))
    sys.stdout.write(f"bounds\t{'ok' if ok else 'VIOLATED'}\t\n")
    return EXIT_OK


def envelope_rows(dist, samples):
    if samples < 2:
        raise UsageError("--samples must be at least 2")
    rows = []
    for k in range(samples):
        x = Fraction(k, samples - 1)
        env = envelope_at(x, dist)
        rows.append((x, env.e0, env.e1, env.m))
    return rows


def cmd_envelope(args):
    dist = read_dist(args.input)
    rows = envelope_rows(dist, args.samples)
    fh, close = _out(args.output)
    try:
        for row in rows:
            fh.write("\t".join(format_exact(v) for v in row) + "\n")
    finally:
        if close:
            fh.close()
    if args.output not in (None, "-") and not args.no_figure:
        from .plotting import plot_envelope
        x_star = solve(dist, "binary-search").x_star
        plot_envelope(rows, Path(args.output).with_suffix(".png"), x_star=x_star, title=str(dist))
    return EXIT_OK


def _sweep_one(job):
    dist, method = job
    report = solve(dist, method)
    _, huff = codec.huffman(dist)
    return {
        "dist": dist,
        "entropy": codec.entropy(dist),
        "huffman": huff,
        "aifv2": report.cost,
        "x_star": report.x_star,
        "degenerate": report.degenerate,
    }


SWEEP_HEADER = "probs\tb\tentropy\thuffman\taifv2\tredundancy\tgain\tx_star\tdegenerate\n"


def sweep_line(row) -> str:
    dist = row["dist"]
    x = "-" if row["x_star"] is None else format_exact(row["x_star"])
    return "\t".join([
        " ".join(format_exact(p) for p in dist.probs),
        str(dist.b),
        f"{row['entropy']:.12f}",
        format_exact(row["huffman"]),
        format_exact(row["aifv2"]),
        f"{float(row['aifv2']) - row['entropy']:.12f}",
        format_exact(row["huffman"] - row["aifv2"]),
        x,
        str(row["degenerate"]).lower(),
    ]) + "\n"


def cmd_sweep(args):
    if args.max_n < 2:
        raise UsageError("--max-n must be at least 2")
    dists = [d for n in range(2, args.max_n + 1) for d in dyadic_grid(n, args.bits)]
    if args.random:
        rng = random.Random(args.seed)
        for _ in range(args.random):
            n = rng.randint(2, args.max_n)
            dists.append(random_dist(rng, n, args.bits))
    jobs = [(d, args.method) for d in dists]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_sweep_one, jobs, chunksize=8))
    else:
        rows = [_sweep_one(j) for j in jobs]
    out_dir = Path(args.output) if args.output else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        fh = open(out_dir / "sweep.tsv", "w", encoding="utf-8")
    else:
        fh = sys.stdout
    try:
        fh.write(SWEEP_HEADER)
        for row in rows:
            fh.write(sweep_line(row))
    finally:
        if out_dir:
            fh.close()
    if out_dir and not args.no_figure:
        from .plotting import plot_sweep
        plot_sweep(rows, out_dir / "sweep.png")
    better = sum(1 for r in rows if r["aifv2"] < r["huffman"])
    print(f"# {len(rows)} distributions, AIFV-2 beats Huffman on {better}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="aifv2", description="Optimal binary AIFV-2 codes.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="construct an optimal code pair")
    s.add_argument("-i", "--input", required=True, help="distribution file")
    s.add_argument("-o", "--output", help="directory for t0.tree, t1.tree, dist.txt, report.txt")
    s.add_argument("--method", choices=METHODS, default="binary-search")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("encode", help="encode a message with a solved code")
    s.add_argument("--trees", required=True, help="directory written by 'solve -o'")
    s.add_argument("-i", "--input", required=True, help="whitespace-separated symbol labels")
    s.add_argument("-o", "--output", help="container file (default stdout)")
    s.set_defaults(func=cmd_encode)

    s = sub.add_parser("decode", help="decode a container")
    s.add_argument("--trees", required=True)
    s.add_argument("-i", "--input", required=True)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_decode)

    s = sub.add_parser("compare", help="entropy, Huffman and AIFV-2 costs")
    s.add_argument("-i", "--input", required=True)
    s.add_argument("--method", choices=METHODS, default="binary-search")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("envelope", help="E0, E1 and M on a grid of x in [0, 1]")
    s.add_argument("-i", "--input", required=True)
    s.add_argument("-o", "--output", help="TSV file; a .png figure is written next to it")
    s.add_argument("--samples", type=int, default=256)
    s.add_argument("--no-figure", action="store_true")
    s.set_defaults(func=cmd_envelope)

    s = sub.add_parser("sweep", help="solve every dyadic distribution on a grid")
    s.add_argument("--max-n", type=int, default=4)
    s.add_argument("--bits", type=int, default=4)
    s.add_argument("--method", choices=METHODS, default="binary-search")
    s.add_argument("--random", type=int, default=0, help="extra random distributions")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("-o", "--output", help="directory for sweep.tsv and sweep.png")
    s.add_argument("--no-figure", action="store_true")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (OSError, DistributionError, TreeError, CodecError, CapacityError, SolverError,
            ValueError) as exc:
        print(f"aifv2: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
