"""Mamdani fuzzy classifier for candidate feature vectors.

Semantics: ``AND`` is min, ``OR`` is max, implication clips the consequent
(min), rules are aggregated by pointwise max on a 1001-point grid over
[0, 1] and the aggregate is defuzzified by its centroid.

Rulebase grammar (one statement per line, ``#`` starts a comment)::

    set <input> <name> tri  <a> <b> <c>
    set <input> <name> trap <a> <b> <c> <d>
    set out <small|medium|large> tri|trap ...
    IF <input> is <name> [AND|OR ...] THEN out is <small|medium|large>

``AND`` binds tighter than ``OR``; parentheses group.  Breakpoints must be
non-decreasing; ``inf`` is accepted for open shoulders.  Inputs are the nine
feature names (``amp1 amp2 ampbaseline durA durB dur1 dur2 slope1 slope2``)
plus the ratios ``amp_ratio`` (amp2/amp1) and ``dur_ratio`` (durB/durA).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .exceptions import ConfigError

GRID_POINTS = 1001
OUTPUT_GRID = np.linspace(0.0, 1.0, GRID_POINTS)
OUTPUT_CLASSES = ("small", "medium", "large")
EPILEPTIFORM_THRESHOLD = 0.8
POSSIBLE_FLOOR = 0.5

_FEATURE_COLUMNS = {
    "amp1": 0,
    "amp2": 1,
    "ampbaseline": 2,
    "durA": 3,
    "durB": 4,
    "dur1": 5,
    "dur2": 6,
    "slope1": 7,
    "slope2": 8,
}
INPUT_NAMES = (*_FEATURE_COLUMNS, "amp_ratio", "dur_ratio")


def input_values(X: np.ndarray, name: str) -> np.ndarray:
    """Column ``name`` of an ``(n, 9)`` feature matrix, derived ratios included."""
    if name in _FEATURE_COLUMNS:
        return X[:, _FEATURE_COLUMNS[name]]
    with np.errstate(divide="ignore", invalid="ignore"):
        if name == "amp_ratio":
            r = X[:, 1] / X[:, 0]
        elif name == "dur_ratio":
            r = X[:, 4] / X[:, 3]
        else:
            raise ConfigError(f"unknown input {name!r}")
    return np.where(np.isfinite(r), r, np.inf)


@dataclass(frozen=True)
class MembershipFunction:
    kind: str
    breakpoints: tuple[float, ...]

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        need = {"tri": 3, "triangular": 3, "trap": 4, "trapezoidal": 4}.get(self.kind)
        if need is None:
            raise ConfigError(f"unknown membership kind {self.kind!r}")
        if len(bp) != need:
            raise ConfigError(f"{self.kind} needs {need} breakpoints, got {len(bp)}")
        if any(math.isnan(b) for b in bp) or any(b2 < b1 for b1, b2 in zip(bp, bp[1:])):
            raise ConfigError(f"breakpoints must be non-decreasing: {bp}")
        if need == 3:
            bp = (bp[0], bp[1], bp[1], bp[2])
        object.__setattr__(self, "kind", "trap" if need == 4 else "tri")
        object.__setattr__(self, "breakpoints", bp)

    @property
    def support(self) -> tuple[float, float]:
        return self.breakpoints[0], self.breakpoints[3]

    def __call__(self, x):
        a, b, c, d = self.breakpoints
        x = np.asarray(x, dtype=float)
        mu = np.zeros(x.shape)
        plateau = (x >= b) & (x <= c)
        mu[plateau] = 1.0
        if b > a:
            rise = (x >= a) & (x < b)
            mu[rise] = (x[rise] - a) / (b - a)
        if d > c:
            fall = (x > c) & (x <= d)
            mu[fall] = (d - x[fall]) / (d - c)
        return mu if mu.ndim else float(mu)


def membership(x, mf: MembershipFunction):
    return mf(x)


# -- rule AST -------------------------------------------------------------------


class Clause(NamedTuple):
    input: str
    set_name: str


@dataclass(frozen=True)
class Op:
    op: str  # "and" | "or"
    args: tuple


@dataclass(frozen=True)
class Rule:
    antecedent: object
    consequent: str
    text: str = ""
    line: int = 0


def _clauses(node):
    if isinstance(node, Clause):
        yield node
    else:
        for a in node.args:
            yield from _clauses(a)


def _evaluate(node, degrees: dict[Clause, np.ndarray]) -> np.ndarray:
    if isinstance(node, Clause):
        return degrees[node]
    vals = [_evaluate(a, degrees) for a in node.args]
    fn = np.minimum if node.op == "and" else np.maximum
    out = vals[0]
    for v in vals[1:]:
        out = fn(out, v)
    return out


@dataclass(frozen=True, eq=False)
class FuzzyRuleBase:
    input_sets: dict[str, dict[str, MembershipFunction]]
    output_sets: dict[str, MembershipFunction]
    rules: tuple[Rule, ...]
    source: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        missing = [c for c in OUTPUT_CLASSES if c not in self.output_sets]
        if missing:
            raise ConfigError(f"output sets {missing} are not declared")
        for name, mf in self.output_sets.items():
            lo, hi = mf.support
            if lo < 0 or hi > 1:
                raise ConfigError(f"output set {name!r} support {mf.support} leaves [0, 1]")
        if not self.rules:
            raise ConfigError("rulebase has no rules")
        if not any(r.consequent == "large" for r in self.rules):
            raise ConfigError("no rule concludes 'large'")
        for r in self.rules:
            if r.consequent not in self.output_sets:
                raise ConfigError(f"line {r.line}: undeclared output set {r.consequent!r}")
            for cl in _clauses(r.antecedent):
                if cl.set_name not in self.input_sets.get(cl.input, {}):
                    raise ConfigError(f"line {r.line}: undeclared set {cl.input} is {cl.set_name!r}")

    def output_curves(self) -> dict[str, np.ndarray]:
        return {name: mf(OUTPUT_GRID) for name, mf in self.output_sets.items()}


# -- parsing --------------------------------------------------------------------

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _parse_antecedent(tokens: list[str], line: int):
    pos = 0

    def peek():
        return tokens[pos].upper() if pos < len(tokens) else None

    def take():
        nonlocal pos
        if pos >= len(tokens):
            raise ConfigError(f"line {line}: unexpected end of rule")
        tok = tokens[pos]
        pos += 1
        return tok

    def atom():
        if peek() == "(":
            take()
            node = disjunction()
            if take() != ")":
                raise ConfigError(f"line {line}: expected ')'")
            return node
        name = take()
        if take().lower() != "is":
            raise ConfigError(f"line {line}: expected 'is' after {name!r}")
        set_name = take()
        if name not in INPUT_NAMES:
            raise ConfigError(f"line {line}: unknown input {name!r}")
        return Clause(name, set_name)

    def conjunction():
        args = [atom()]
        while peek() == "AND":
            take()
            args.append(atom())
        return args[0] if len(args) == 1 else Op("and", tuple(args))

    def disjunction():
        args = [conjunction()]
        while peek() == "OR":
            take()
            args.append(conjunction())
        return args[0] if len(args) == 1 else Op("or", tuple(args))

    node = disjunction()
    if pos != len(tokens):
        raise ConfigError(f"line {line}: unexpected token {tokens[pos]!r}")
    return node


def parse_rulebase(text: str, source: str = "<string>") -> FuzzyRuleBase:
    inputs: dict[str, dict[str, MembershipFunction]] = {}
    outputs: dict[str, MembershipFunction] = {}
    rules = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stmt = raw.split("#", 1)[0].strip()
        if not stmt:
            continue
        tokens = _TOKEN.findall(stmt)
        head = tokens[0].lower()
        if head == "set":
            if len(tokens) < 5:
                raise ConfigError(f"{source}:line {lineno}: incomplete set declaration")
            target, name, kind = tokens[1], tokens[2], tokens[3].lower()
            try:
                bp = [float(t) for t in tokens[4:]]
            except ValueError:
                raise ConfigError(f"{source}:line {lineno}: non-numeric breakpoint") from None
            try:
                mf = MembershipFunction(kind, tuple(bp))
            except ConfigError as exc:
                raise ConfigError(f"{source}:line {lineno}: {exc}") from None
            if target == "out":
                outputs[name] = mf
            elif target in INPUT_NAMES:
                inputs.setdefault(target, {})[name] = mf
            else:
                raise ConfigError(f"{source}:line {lineno}: unknown input {target!r}")
        elif head == "if":
            upper = [t.upper() for t in tokens]
            if "THEN" not in upper:
                raise ConfigError(f"{source}:line {lineno}: rule without THEN")
            k = upper.index("THEN")
            tail = tokens[k + 1 :]
            if len(tail) != 3 or tail[0] != "out" or tail[1].lower() != "is":
                raise ConfigError(f"{source}:line {lineno}: consequent must read 'out is <class>'")
            try:
                ante = _parse_antecedent(tokens[1:k], lineno)
            except ConfigError as exc:
                raise ConfigError(f"{source}:{exc}") from None
            rules.append(Rule(ante, tail[2], stmt, lineno))
        else:
            raise ConfigError(f"{source}:line {lineno}: syntax error near {tokens[0]!r}")
    try:
        return FuzzyRuleBase(inputs, outputs, tuple(rules), source)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_rulebase(path=None) -> FuzzyRuleBase:
    """Load a rulebase file; ``None`` loads the packaged default."""
    if path is None:
        text = resources.files("eegspike.data").joinpath("default.rules").read_text(encoding="utf-8")
        return parse_rulebase(text, "default.rules")
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read rulebase {path}: {exc.strerror}") from None
    return parse_rulebase(text, str(path))


# -- inference ------------------------------------------------------------------


def _as_matrix(features) -> np.ndarray:
    X = np.asarray(features, dtype=float)
    return X[np.newaxis, :] if X.ndim == 1 else X


def rule_degrees(features, base: FuzzyRuleBase) -> np.ndarray:
    """Firing degree of every rule, shape ``(n_events, n_rules)``."""
    X = _as_matrix(features)
    cache: dict[Clause, np.ndarray] = {}
    for r in base.rules:
        for cl in _clauses(r.antecedent):
            if cl not in cache:
                cache[cl] = base.input_sets[cl.input][cl.set_name](input_values(X, cl.input))
    return np.column_stack([_evaluate(r.antecedent, cache) for r in base.rules])


def consequent_degrees(features, base: FuzzyRuleBase) -> dict[str, np.ndarray]:
    """Max firing degree per output set (max-aggregation of min-clipped sets commutes)."""
    deg = rule_degrees(features, base)
    out = {}
    for name in base.output_sets:
        cols = [i for i, r in enumerate(base.rules) if r.consequent == name]
        out[name] = deg[:, cols].max(axis=1) if cols else np.zeros(len(deg))
    return out


def aggregate(degrees: dict[str, np.ndarray], base: FuzzyRuleBase) -> np.ndarray:
    curves = base.output_curves()
    n = len(next(iter(degrees.values())))
    agg = np.zeros((n, GRID_POINTS))
    for name, d in degrees.items():
        np.maximum(agg, np.minimum(d[:, np.newaxis], curves[name][np.newaxis, :]), out=agg)
    return agg


def infer(features, base: FuzzyRuleBase) -> np.ndarray:
    """Aggregate output set on :data:`OUTPUT_GRID`; 2-D input gives one row per event."""
    agg = aggregate(consequent_degrees(features, base), base)
    return agg[0] if np.asarray(features).ndim == 1 else agg


def defuzzify_centroid(aggregate_set, grid=OUTPUT_GRID):
    """Centroid of the aggregate; rows that are identically zero give 0."""
    mu = np.asarray(aggregate_set, dtype=float)
    total = mu.sum(axis=-1)
    moment = (mu * grid).sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        score = np.where(total > 0, moment / np.where(total > 0, total, 1.0), 0.0)
    score = np.clip(score, 0.0, 1.0)
    return float(score) if score.ndim == 0 else score


def label_for(score, threshold: float = EPILEPTIFORM_THRESHOLD, floor: float = POSSIBLE_FLOOR):
    if score >= threshold:
        return "epileptiform"
    if score >= floor:
        return "possible"
    return "non_epileptiform"


class Classification(NamedTuple):
    score: float
    label: str
    fired: bool


def classify(features, base: FuzzyRuleBase, threshold: float = EPILEPTIFORM_THRESHOLD) -> Classification:
    agg = infer(np.asarray(features, dtype=float), base)
    score = defuzzify_centroid(agg)
    return Classification(score, label_for(score, threshold), bool(agg.max() > 0))


def classify_batch(X, base: FuzzyRuleBase, chunk: int = 4096) -> tuple[np.ndarray, np.ndarray]:
    """Scores and a fired mask for an ``(n, 9)`` matrix, evaluated in chunks."""
    X = _as_matrix(X)
    scores = np.zeros(len(X))
    fired = np.zeros(len(X), dtype=bool)
    for lo in range(0, len(X), chunk):
        agg = aggregate(consequent_degrees(X[lo : lo + chunk], base), base)
        scores[lo : lo + chunk] = defuzzify_centroid(agg)
        fired[lo : lo + chunk] = agg.max(axis=1) > 0
    return scores, fired
