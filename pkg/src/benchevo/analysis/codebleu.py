"""Asymmetric source-code similarity built from four sub-scores.

The total is a convex combination of plain n-gram precision (BLEU with
brevity penalty, no smoothing), keyword-weighted n-gram precision, an AST
subtree-shape overlap, and a def-use dataflow overlap. The last two need a
parseable source on both sides; when parsing fails they are dropped and the
remaining weights are renormalized, with the score flagged as degraded.

Overlap scores are clipped by the candidate's own counts and normalized by
the reference, which is what makes the measure asymmetric.
"""

from __future__ import annotations

import ast
import io
import keyword
import math
import re
import tokenize
from collections import Counter
from dataclasses import dataclass

DEFAULT_LAMBDAS = (0.25, 0.25, 0.25, 0.25)
DEFAULT_MAX_N = 4
KEYWORD_WEIGHT = 5.0

_KEYWORDS = frozenset(keyword.kwlist) | frozenset(keyword.softkwlist)
_TOKEN_TYPES = {tokenize.NAME, tokenize.NUMBER, tokenize.STRING, tokenize.OP}
_FALLBACK_RE = re.compile(r"\w+|[^\w\s]")


@dataclass(frozen=True)
class TokenSeq:
    tokens: tuple[str, ...]
    keyword_flags: tuple[bool, ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.keyword_flags):
            raise ValueError("tokens and keyword_flags must align")


@dataclass(frozen=True)
class CodeBleuScore:
    total: float
    b: float
    bw: float
    ast_match: float
    df_match: float
    lambdas: tuple[float, float, float, float]
    degraded: bool = False


def tokenize_source(source: str) -> TokenSeq:
    """Lexical tokens of a source string; regex fallback for broken code."""
    toks: list[str] = []
    try:
        for tok in tokenize.generate_tokens(io.StringIO(source).readline):
            if tok.type in _TOKEN_TYPES:
                toks.append(tok.string)
    except (tokenize.TokenError, IndentationError, SyntaxError):
        toks = _FALLBACK_RE.findall(source)
    return TokenSeq(tuple(toks), tuple(t in _KEYWORDS for t in toks))


def _ngrams(tokens: tuple[str, ...], n: int) -> list[tuple[str, ...]]:
    return [tokens[i : i + n] for i in range(len(tokens) - n + 1)]


def ngram_precision(
    candidate: TokenSeq, reference: TokenSeq, n: int, weights: dict[str, float] | None = None
) -> float:
    """Clipped n-gram precision; each match capped by its reference count.

    With ``weights``, every n-gram counts with the mean weight of its tokens
    (missing tokens weigh 1.0). Returns 0 when the candidate has no n-grams.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    cand_counts = Counter(_ngrams(candidate.tokens, n))
    if not cand_counts:
        return 0.0
    ref_counts = Counter(_ngrams(reference.tokens, n))
    numerator = 0.0
    denominator = 0.0
    for gram, count in cand_counts.items():
        if weights is None:
            w = 1.0
        else:
            w = sum(weights.get(tok, 1.0) for tok in gram) / n
        denominator += w * count
        numerator += w * min(count, ref_counts.get(gram, 0))
    return numerator / denominator if denominator else 0.0


def _bleu(
    candidate: TokenSeq,
    reference: TokenSeq,
    max_n: int,
    weights: dict[str, float] | None = None,
) -> float:
    c, r = len(candidate.tokens), len(reference.tokens)
    if c == 0:
        return 0.0
    precisions = [
        ngram_precision(candidate, reference, n, weights) for n in range(1, max_n + 1)
    ]
    if any(p == 0.0 for p in precisions):
        return 0.0  # no smoothing: a missing order zeroes the geometric mean
    log_mean = sum(math.log(p) for p in precisions) / max_n
    brevity = 1.0 if c >= r else math.exp(1.0 - r / c)
    return brevity * math.exp(log_mean)


# Fields whose values are identifier spellings; dropped so renaming a
# variable or function leaves the subtree signature unchanged.
_IDENTIFIER_FIELDS = {"id", "name", "arg", "attr", "module", "asname", "rest"}


def ast_subtrees(source: str) -> Counter:
    """Multiset of shape signatures, one per node of the parse tree."""
    tree = ast.parse(source)
    counts: Counter = Counter()

    def visit(node: ast.AST) -> str:
        if isinstance(node, ast.Constant):
            sig = f"Constant:{type(node.value).__name__}"
            counts[sig] += 1
            return sig
        parts = []
        for field, value in ast.iter_fields(node):
            if field == "ctx" or field in _IDENTIFIER_FIELDS:
                continue
            if isinstance(value, ast.AST):
                parts.append(visit(value))
            elif isinstance(value, list):
                parts.extend(visit(v) for v in value if isinstance(v, ast.AST))
        sig = f"{type(node).__name__}({','.join(parts)})"
        counts[sig] += 1
        return sig

    visit(tree)
    return counts


class _FlowVisitor(ast.NodeVisitor):
    """Collects def-use items with variables renamed by appearance order."""

    def __init__(self, rename: dict[str, str]):
        self.rename = rename
        self.items: Counter = Counter()

    def _var(self, name: str) -> str:
        return self.rename[name]

    def _loads(self, node: ast.AST) -> list[str]:
        return [
            self._var(n.id)
            for n in ast.walk(node)
            if isinstance(n, ast.Name) and isinstance(n.ctx, ast.Load)
        ]

    def _stores(self, node: ast.AST) -> list[str]:
        return [
            self._var(n.id)
            for n in ast.walk(node)
            if isinstance(n, ast.Name) and isinstance(n.ctx, ast.Store)
        ]

    def _bind(self, targets: list[ast.AST], value: ast.AST | None) -> None:
        sources = self._loads(value) if value is not None else []
        for target in targets:
            for dst in self._stores(target):
                if sources:
                    for src in sources:
                        self.items[(dst, "from", src)] += 1
                else:
                    self.items[(dst, "bound")] += 1

    def visit_Assign(self, node):
        self._bind(node.targets, node.value)
        self.generic_visit(node)

    def visit_AnnAssign(self, node):
        self._bind([node.target], node.value)
        self.generic_visit(node)

    def visit_AugAssign(self, node):
        for dst in self._stores(node.target):
            self.items[(dst, "from", dst)] += 1
        self._bind([node.target], node.value)
        self.generic_visit(node)

    def visit_NamedExpr(self, node):
        self._bind([node.target], node.value)
        self.generic_visit(node)

    def visit_For(self, node):
        self._bind([node.target], node.iter)
        self.generic_visit(node)

    visit_AsyncFor = visit_For

    def visit_comprehension(self, node):
        self._bind([node.target], node.iter)
        self.generic_visit(node)

    def visit_withitem(self, node):
        if node.optional_vars is not None:
            self._bind([node.optional_vars], node.context_expr)
        self.generic_visit(node)

    def _params(self, node):
        args = node.args
        every = list(args.posonlyargs) + list(args.args) + list(args.kwonlyargs)
        if args.vararg:
            every.append(args.vararg)
        if args.kwarg:
            every.append(args.kwarg)
        for a in every:
            self.items[(self._var(a.arg), "param")] += 1

    def visit_FunctionDef(self, node):
        self._params(node)
        self.generic_visit(node)

    visit_AsyncFunctionDef = visit_FunctionDef

    def visit_Lambda(self, node):
        self._params(node)
        self.generic_visit(node)


def _appearance_order(tree: ast.AST) -> dict[str, str]:
    """First-appearance renaming over Name and parameter identifiers."""
    rename: dict[str, str] = {}

    def register(name: str) -> None:
        if name not in rename:
            rename[name] = f"var_{len(rename)}"

    def visit(node: ast.AST) -> None:
        if isinstance(node, ast.Name):
            register(node.id)
        elif isinstance(node, ast.arg):
            register(node.arg)
        for child in ast.iter_child_nodes(node):
            visit(child)

    visit(tree)
    return rename


def dataflow_items(source: str) -> Counter:
    """Multiset of def-use items, independent of identifier spelling."""
    tree = ast.parse(source)
    visitor = _FlowVisitor(_appearance_order(tree))
    visitor.visit(tree)
    return visitor.items


def _clipped_overlap(cand: Counter, ref: Counter, *, empty_value: float) -> float:
    if not ref:
        return empty_value if not cand else 0.0
    matched = sum(min(count, ref.get(item, 0)) for item, count in cand.items())
    return matched / sum(ref.values())


def _check_lambdas(lambdas) -> tuple[float, float, float, float]:
    lams = tuple(float(v) for v in lambdas)
    if len(lams) != 4 or any(v < 0 for v in lams):
        raise ValueError("lambdas must be four non-negative weights")
    if abs(sum(lams) - 1.0) > 1e-9:
        raise ValueError("lambdas must sum to 1")
    return lams


def codebleu(
    candidate: str,
    reference: str,
    lambdas=DEFAULT_LAMBDAS,
    max_n: int = DEFAULT_MAX_N,
    keyword_weight: float = KEYWORD_WEIGHT,
) -> CodeBleuScore:
    """Similarity of ``candidate`` measured against ``reference``."""
    lams = _check_lambdas(lambdas)
    cand_tokens = tokenize_source(candidate)
    ref_tokens = tokenize_source(reference)
    kw_weights = {kw: keyword_weight for kw in _KEYWORDS}
    b = _bleu(cand_tokens, ref_tokens, max_n)
    bw = _bleu(cand_tokens, ref_tokens, max_n, kw_weights)

    try:
        ast_score = _clipped_overlap(
            ast_subtrees(candidate), ast_subtrees(reference), empty_value=1.0
        )
        df_score = _clipped_overlap(
            dataflow_items(candidate), dataflow_items(reference), empty_value=1.0
        )
        degraded = False
    except SyntaxError:
        ast_score = 0.0
        df_score = 0.0
        degraded = True
        text_mass = lams[0] + lams[1]
        if text_mass <= 0:
            raise ValueError(
                "both sources must parse when lambda puts no weight on token scores"
            )
        lams = (lams[0] / text_mass, lams[1] / text_mass, 0.0, 0.0)

    total = lams[0] * b + lams[1] * bw + lams[2] * ast_score + lams[3] * df_score
    return CodeBleuScore(
        total=total,
        b=b,
        bw=bw,
        ast_match=ast_score,
        df_match=df_score,
        lambdas=lams,
        degraded=degraded,
    )


@dataclass(frozen=True)
class SimilarityMatrix:
    """Pairwise lineage similarity, populated strictly above the diagonal."""

    size: int
    cells: dict[tuple[int, int], CodeBleuScore]

    def value(self, i: int, j: int) -> float:
        return self.cells[(i, j)].total

    def rows(self) -> list[list[float | None]]:
        out: list[list[float | None]] = []
        for i in range(self.size):
            out.append(
                [
                    self.cells[(i, j)].total if j > i else None
                    for j in range(self.size)
                ]
            )
        return out


def similarity_matrix(codes, lambdas=DEFAULT_LAMBDAS, max_n: int = DEFAULT_MAX_N) -> SimilarityMatrix:
    """Each later code scored against every earlier one as its reference."""
    codes = list(codes)
    if len(codes) < 2:
        raise ValueError("need at least two codes to compare")
    cells = {}
    for i in range(len(codes)):
        for j in range(i + 1, len(codes)):
            cells[(i, j)] = codebleu(codes[j], codes[i], lambdas=lambdas, max_n=max_n)
    return SimilarityMatrix(size=len(codes), cells=cells)
