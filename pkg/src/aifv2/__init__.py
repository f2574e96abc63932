"""Optimal binary AIFV-2 codes with exact rational arithmetic."""
from .codec import BitStream, CodePair, aifv_cost, decode, encode, entropy, huffman
from .codetree import CodeTree, TreeKind, metrics, validate
from .numeric import SourceDist, make_dist, parse_dist_text, read_dist
from .solvers import Method, SolveReport, solve

__all__ = [
    "BitStream", "CodePair", "CodeTree", "Method", "SolveReport", "SourceDist", "TreeKind",
    "aifv_cost", "decode", "encode", "entropy", "huffman", "make_dist", "metrics",
    "parse_dist_text", "read_dist", "solve", "validate",
]
