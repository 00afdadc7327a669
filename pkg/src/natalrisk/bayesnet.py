"""Bayesian-network learning and exact inference.

Structure search is greedy hill climbing over add/delete/reverse edge moves
with a decomposable score (BIC by default, BDeu optional), starting from the
empty graph.  CPTs are add-alpha smoothed so every probability is strictly
inside (0,1) and any evidence combination remains answerable.  Inference is
exact variable elimination with a min-degree ordering.

Records with a missing value in a family (child or any parent) are skipped
when counting that family; smoothing absorbs the sparsity.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field

import numpy as np

from .dataset import DatasetView
from .errors import (
    BadModelFile,
    BadValue,
    CyclicGraph,
    EmptyView,
    QueryInEvidence,
    UnknownVariable,
    VariableMismatch,
)

FORMAT_VERSION = 1
KIND = "bayes_net"


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph over named variables.

    ``variables`` order is the canonical node order; parent lists follow it.
    """

    variables: tuple[str, ...]
    edges: tuple[tuple[str, str], ...] = ()  # (parent, child)

    def __post_init__(self):
        declared = set(self.variables)
        seen = set()
        for parent, child in self.edges:
            if parent not in declared:
                raise UnknownVariable(parent)
            if child not in declared:
                raise UnknownVariable(child)
            if parent == child:
                raise CyclicGraph(f"self-loop on {parent}")
            if (parent, child) in seen:
                raise ValueError(f"duplicate edge {parent}->{child}")
            seen.add((parent, child))
        # Kahn's algorithm; leftovers mean a cycle
        indeg = {v: 0 for v in self.variables}
        for _, child in self.edges:
            indeg[child] += 1
        ready = [v for v in self.variables if indeg[v] == 0]
        removed = 0
        while ready:
            v = ready.pop()
            removed += 1
            for p, c in self.edges:
                if p == v:
                    indeg[c] -= 1
                    if indeg[c] == 0:
                        ready.append(c)
        if removed != len(self.variables):
            raise CyclicGraph("graph contains a directed cycle")

    def parents_of(self, var: str) -> tuple[str, ...]:
        order = {v: i for i, v in enumerate(self.variables)}
        ps = [p for p, c in self.edges if c == var]
        return tuple(sorted(ps, key=order.__getitem__))

    def children_of(self, var: str) -> tuple[str, ...]:
        order = {v: i for i, v in enumerate(self.variables)}
        cs = [c for p, c in self.edges if p == var]
        return tuple(sorted(cs, key=order.__getitem__))


@dataclass(frozen=True)
class StructureParams:
    max_parents: int = 3
    score: str = "bic"  # "bic" | "bdeu"
    equivalent_sample_size: float = 10.0  # BDeu only
    restarts: int = 0
    seed: int = 0
    smoothing_alpha: float = 1.0

    def __post_init__(self):
        if self.max_parents < 1:
            raise ValueError(f"max_parents must be >= 1, got {self.max_parents}")
        if self.score not in ("bic", "bdeu"):
            raise ValueError(f"score must be 'bic' or 'bdeu', got {self.score!r}")
        if self.equivalent_sample_size <= 0:
            raise ValueError("equivalent_sample_size must be positive")
        if self.restarts < 0:
            raise ValueError(f"restarts must be >= 0, got {self.restarts}")
        if self.smoothing_alpha <= 0:
            raise ValueError(f"smoothing_alpha must be positive, got {self.smoothing_alpha}")


@dataclass(frozen=True)
class Cpt:
    """P(var | parents); rows follow itertools.product over parent domains."""

    var: str
    parents: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class BayesNetModel:
    dag: Dag
    domains: dict  # variable -> tuple of values
    cpts: dict  # variable -> Cpt
    class_var: str
    smoothing_alpha: float
    trained_on: int


@dataclass(frozen=True)
class BnPrediction:
    predicted: str
    distribution: dict  # class value -> probability
    influence: tuple[str, ...]  # evidence vars in the class Markov blanket


# --- counting and scores -----------------------------------------------------

class _ScoreContext:
    """Integer-encoded view plus a (child, parent-set) local-score cache."""

    def __init__(self, view: DatasetView, params: StructureParams):
        self.params = params
        self.variables = _view_variables(view)
        self.domains = {v: view.values_of(v) for v in self.variables}
        self.cards = {v: len(self.domains[v]) for v in self.variables}
        pos = {v: i for i, v in enumerate(self.variables)}
        self.pos = pos
        idx = {v: {val: i for i, val in enumerate(self.domains[v])}
               for v in self.variables}
        self.matrix = [
            tuple(-1 if r.get(v) is None else idx[v][r.get(v)] for v in self.variables)
            for r in view.records
        ]
        self.n_known = {v: sum(1 for row in self.matrix if row[pos[v]] >= 0)
                        for v in self.variables}
        self.cache: dict = {}

    def family_counts(self, child: str, parents: tuple[str, ...]):
        """config tuple -> per-child-value counts, family-complete records only."""
        ci = self.pos[child]
        pi = [self.pos[p] for p in parents]
        counts: dict = {}
        for row in self.matrix:
            c = row[ci]
            if c < 0:
                continue
            cfg = tuple(row[i] for i in pi)
            if any(x < 0 for x in cfg):
                continue
            bucket = counts.get(cfg)
            if bucket is None:
                bucket = counts[cfg] = [0] * self.cards[child]
            bucket[c] += 1
        return counts

    def local_score(self, child: str, parents) -> float:
        key = (child, frozenset(parents))
        if key in self.cache:
            return self.cache[key]
        parents = tuple(sorted(parents, key=self.pos.__getitem__))
        counts = self.family_counts(child, parents)
        if not counts and parents and self.n_known[child] > 0:
            # the parent set wiped out an observable child's records; an
            # empty family must never look better than a scored one
            self.cache[key] = float("-inf")
            return float("-inf")
        r = self.cards[child]
        q = 1
        for p in parents:
            q *= self.cards[p]
        if self.params.score == "bic":
            score = _bic_local(counts, r, q)
        else:
            score = _bdeu_local(counts, r, q, self.params.equivalent_sample_size)
        self.cache[key] = score
        return score


def _bic_local(counts: dict, r: int, q: int) -> float:
    n_total = sum(sum(b) for b in counts.values())
    if n_total == 0:
        return 0.0
    ll = 0.0
    for bucket in counts.values():
        n_cfg = sum(bucket)
        for n in bucket:
            if n > 0:
                ll += n * math.log(n / n_cfg)
    return ll - 0.5 * (r - 1) * q * math.log(n_total)


def _bdeu_local(counts: dict, r: int, q: int, ess: float) -> float:
    # unobserved parent configurations contribute exactly 0
    a_cfg = ess / q
    a_cell = ess / (q * r)
    score = 0.0
    for bucket in counts.values():
        n_cfg = sum(bucket)
        score += math.lgamma(a_cfg) - math.lgamma(a_cfg + n_cfg)
        for n in bucket:
            score += math.lgamma(a_cell + n) - math.lgamma(a_cell)
    return score


def _view_variables(view: DatasetView) -> tuple[str, ...]:
    """Target plus predictors in canonical schema order."""
    names = set(view.predictors) | {view.target}
    return tuple(sorted(names, key=view.schema.index_of))


def score_network(dag: Dag, view: DatasetView,
                  params: StructureParams = StructureParams()) -> float:
    """Decomposable network score (higher is better).

    A family left with no complete records by its parent set scores -inf
    when the child itself has data, and 0 when the child is fully missing.
    """
    expected = set(_view_variables(view))
    if set(dag.variables) != expected:
        raise VariableMismatch(
            f"dag variables {sorted(dag.variables)} != view variables {sorted(expected)}")
    ctx = _ScoreContext(view, params)
    return sum(ctx.local_score(v, dag.parents_of(v)) for v in dag.variables)


# --- structure search --------------------------------------------------------

def _has_path(adj: dict, src: str, dst: str) -> bool:
    stack = [src]
    seen = set()
    while stack:
        v = stack.pop()
        if v == dst:
            return True
        if v in seen:
            continue
        seen.add(v)
        stack.extend(adj[v])
    return False


def _score_delta(new: float, old: float) -> float:
    # -inf to -inf is "still unscorable", not NaN
    return 0.0 if new == old else new - old


def _join_deltas(d1: float, d2: float) -> float:
    if d1 == float("-inf") or d2 == float("-inf"):
        return float("-inf")
    return d1 + d2


def _climb(ctx: _ScoreContext, edges: set, max_parents: int) -> tuple[set, float]:
    variables = ctx.variables
    parents = {v: set() for v in variables}
    children = {v: set() for v in variables}
    for p, c in edges:
        parents[c].add(p)
        children[p].add(c)
    local = {v: ctx.local_score(v, parents[v]) for v in variables}

    eps = 1e-9
    while True:
        best = None  # (delta, move); first-seen wins ties, and moves are
        # enumerated in lexicographic (child, parent) order
        for child in sorted(variables):
            for parent in sorted(variables):
                if parent == child:
                    continue
                if parent in parents[child]:
                    # delete parent->child
                    delta = _score_delta(
                        ctx.local_score(child, parents[child] - {parent}), local[child])
                    if best is None or delta > best[0] + eps:
                        best = (delta, ("del", parent, child))
                    # reverse parent->child (child becomes the parent)
                    if len(parents[parent]) < max_parents:
                        children[parent].discard(child)
                        creates_cycle = _has_path(children, parent, child)
                        children[parent].add(child)
                        if not creates_cycle:
                            delta_rev = _join_deltas(
                                _score_delta(
                                    ctx.local_score(child, parents[child] - {parent}),
                                    local[child]),
                                _score_delta(
                                    ctx.local_score(parent, parents[parent] | {child}),
                                    local[parent]))
                            if best is None or delta_rev > best[0] + eps:
                                best = (delta_rev, ("rev", parent, child))
                else:
                    # add parent->child
                    if len(parents[child]) >= max_parents:
                        continue
                    if _has_path(children, child, parent):
                        continue
                    delta = _score_delta(
                        ctx.local_score(child, parents[child] | {parent}), local[child])
                    if best is None or delta > best[0] + eps:
                        best = (delta, ("add", parent, child))
        if best is None or best[0] <= eps:
            break
        kind, p, c = best[1]
        if kind == "add":
            edges.add((p, c))
            parents[c].add(p)
            children[p].add(c)
        elif kind == "del":
            edges.discard((p, c))
            parents[c].discard(p)
            children[p].discard(c)
        else:
            edges.discard((p, c))
            parents[c].discard(p)
            children[p].discard(c)
            edges.add((c, p))
            parents[p].add(c)
            children[c].add(p)
        local[c] = ctx.local_score(c, parents[c])
        local[p] = ctx.local_score(p, parents[p])
    return edges, sum(local.values())


def _random_start(ctx: _ScoreContext, rng: random.Random, max_parents: int) -> set:
    variables = ctx.variables
    edges: set = set()
    parents = {v: set() for v in variables}
    children = {v: set() for v in variables}
    for _ in range(2 * len(variables)):
        p = variables[rng.randrange(len(variables))]
        c = variables[rng.randrange(len(variables))]
        if p == c or (p, c) in edges or len(parents[c]) >= max_parents:
            continue
        if _has_path(children, c, p):
            continue
        if ctx.local_score(c, parents[c] | {p}) == float("-inf"):
            continue  # never start inside an unscorable family
        edges.add((p, c))
        parents[c].add(p)
        children[p].add(c)
    return edges


def learn_structure(view: DatasetView,
                    params: StructureParams = StructureParams()) -> Dag:
    """Greedy hill climbing from the empty graph; optional seeded restarts."""
    if len(view) == 0:
        raise EmptyView("cannot learn a structure from an empty view")
    ctx = _ScoreContext(view, params)
    eps = 1e-9

    def canonical(edges: set) -> tuple:
        return tuple(sorted(edges))

    edges, score = _climb(ctx, set(), params.max_parents)
    best = (score, canonical(edges))
    rng = random.Random(params.seed)
    for _ in range(params.restarts):
        start = _random_start(ctx, rng, params.max_parents)
        e, s = _climb(ctx, start, params.max_parents)
        cand = (s, canonical(e))
        if s > best[0] + eps or (abs(s - best[0]) <= eps and cand[1] < best[1]):
            best = cand
    return Dag(variables=ctx.variables, edges=best[1])


# --- parameter fitting -------------------------------------------------------

def fit_cpts(dag: Dag, view: DatasetView,
             smoothing_alpha: float = 1.0) -> BayesNetModel:
    """Add-alpha CPT estimation; unseen parent configurations are uniform."""
    if smoothing_alpha <= 0:
        raise ValueError(f"smoothing_alpha must be positive, got {smoothing_alpha}")
    expected = set(_view_variables(view))
    if set(dag.variables) != expected:
        raise VariableMismatch(
            f"dag variables {sorted(dag.variables)} != view variables {sorted(expected)}")
    ctx = _ScoreContext(view, StructureParams())
    domains = {v: ctx.domains[v] for v in dag.variables}
    cpts = {}
    for v in dag.variables:
        parents = dag.parents_of(v)
        counts = ctx.family_counts(v, parents)
        card = ctx.cards[v]
        rows = []
        for cfg in itertools.product(*(range(ctx.cards[p]) for p in parents)):
            bucket = counts.get(cfg, [0] * card)
            total = sum(bucket) + smoothing_alpha * card
            rows.append(tuple((n + smoothing_alpha) / total for n in bucket))
        cpts[v] = Cpt(var=v, parents=parents, rows=tuple(rows))
    return BayesNetModel(dag=dag, domains=domains, cpts=cpts,
                         class_var=view.target, smoothing_alpha=smoothing_alpha,
                         trained_on=len(view))


# --- variable elimination ----------------------------------------------------

@dataclass
class _Factor:
    scope: tuple[str, ...]
    values: np.ndarray  # one axis per scope variable


def _cpt_factor(model: BayesNetModel, var: str) -> _Factor:
    cpt = model.cpts[var]
    card = len(model.domains[var])
    parent_cards = [len(model.domains[p]) for p in cpt.parents]
    arr = np.asarray(cpt.rows, dtype=float)  # (configs, card)
    arr = arr.T.reshape([card] + parent_cards)
    return _Factor(scope=(var,) + cpt.parents, values=arr)


def _reduce(factor: _Factor, var: str, index: int) -> _Factor:
    axis = factor.scope.index(var)
    values = np.take(factor.values, index, axis=axis)
    scope = factor.scope[:axis] + factor.scope[axis + 1:]
    return _Factor(scope=scope, values=values)


def _multiply(a: _Factor, b: _Factor, cards: dict) -> _Factor:
    scope = a.scope + tuple(v for v in b.scope if v not in a.scope)

    def aligned(f: _Factor) -> np.ndarray:
        order = sorted(range(len(f.scope)), key=lambda i: scope.index(f.scope[i]))
        arr = f.values.transpose(order)
        shape = [cards[v] if v in f.scope else 1 for v in scope]
        return arr.reshape(shape)

    return _Factor(scope=scope, values=aligned(a) * aligned(b))


def _sum_out(factor: _Factor, var: str) -> _Factor:
    axis = factor.scope.index(var)
    return _Factor(scope=factor.scope[:axis] + factor.scope[axis + 1:],
                   values=factor.values.sum(axis=axis))


def _check_value(model: BayesNetModel, var: str, value) -> int:
    if var not in model.domains:
        raise UnknownVariable(var)
    try:
        return model.domains[var].index(value)
    except ValueError:
        raise BadValue(None, var, value) from None


def eliminate(model: BayesNetModel, query: str, evidence: dict) -> dict:
    """Exact posterior P(query | evidence) via variable elimination.

    Elimination order is min-degree over the current factor scopes, ties
    broken lexicographically.
    """
    if query not in model.domains:
        raise UnknownVariable(query)
    if query in evidence:
        raise QueryInEvidence(f"query variable {query!r} appears in evidence")
    ev_idx = {var: _check_value(model, var, val) for var, val in evidence.items()}

    cards = {v: len(model.domains[v]) for v in model.dag.variables}
    factors = []
    for v in model.dag.variables:
        f = _cpt_factor(model, v)
        for var, i in ev_idx.items():
            if var in f.scope:
                f = _reduce(f, var, i)
        factors.append(f)

    to_eliminate = set(model.dag.variables) - {query} - set(ev_idx)
    while to_eliminate:
        # min-degree: fewest distinct neighbours across current scopes
        degree = {}
        for v in to_eliminate:
            neigh = set()
            for f in factors:
                if v in f.scope:
                    neigh.update(f.scope)
            neigh.discard(v)
            degree[v] = len(neigh)
        var = min(to_eliminate, key=lambda v: (degree[v], v))
        to_eliminate.discard(var)
        related = [f for f in factors if var in f.scope]
        rest = [f for f in factors if var not in f.scope]
        product = related[0]
        for f in related[1:]:
            product = _multiply(product, f, cards)
        rest.append(_sum_out(product, var))
        factors = rest

    result = _Factor(scope=(), values=np.asarray(1.0))
    for f in factors:
        result = _multiply(result, f, cards)
    if result.scope != (query,):
        axis_order = [result.scope.index(query)]
        result = _Factor(scope=(query,),
                         values=result.values.transpose(axis_order).reshape(cards[query]))
    total = float(result.values.sum())
    return {val: float(result.values[i]) / total
            for i, val in enumerate(model.domains[query])}


def markov_blanket(model: BayesNetModel, var: str) -> set:
    """Parents, children, and the children's other parents."""
    if var not in model.domains:
        raise UnknownVariable(var)
    dag = model.dag
    blanket = set(dag.parents_of(var)) | set(dag.children_of(var))
    for child in dag.children_of(var):
        blanket.update(dag.parents_of(child))
    blanket.discard(var)
    return blanket


def predict_bn(model: BayesNetModel, evidence: dict) -> BnPrediction:
    """Class posterior under the evidence; ties go to the lower value index."""
    if model.class_var in evidence:
        raise QueryInEvidence(f"class variable {model.class_var!r} appears in evidence")
    distribution = eliminate(model, model.class_var, evidence)
    domain = model.domains[model.class_var]
    predicted = domain[0]
    for v in domain[1:]:
        if distribution[v] > distribution[predicted]:
            predicted = v
    blanket = markov_blanket(model, model.class_var)
    influence = tuple(sorted(v for v in evidence if v in blanket))
    return BnPrediction(predicted=predicted, distribution=distribution,
                        influence=influence)


# --- export ------------------------------------------------------------------

def export_bn_dot(model: BayesNetModel) -> str:
    """Stable DOT rendering; the class node is filled."""
    lines = ["digraph bayes_net {", "  rankdir=LR;"]
    for v in model.dag.variables:
        if v == model.class_var:
            lines.append(f'  "{v}" [shape=ellipse, style=filled, fillcolor=lightgrey];')
        else:
            lines.append(f'  "{v}" [shape=ellipse];')
    for parent, child in sorted(model.dag.edges):
        lines.append(f'  "{parent}" -> "{child}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def bn_to_json(model: BayesNetModel) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": KIND,
        "class_var": model.class_var,
        "variables": list(model.dag.variables),
        "domains": {v: list(model.domains[v]) for v in model.dag.variables},
        "edges": [list(e) for e in model.dag.edges],
        "cpts": {v: {"parents": list(c.parents), "rows": [list(r) for r in c.rows]}
                 for v, c in model.cpts.items()},
        "smoothing_alpha": model.smoothing_alpha,
        "trained_on": model.trained_on,
    }
    return json.dumps(doc, indent=2) + "\n"


def bn_from_json(text: str) -> BayesNetModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadModelFile(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format_version") != FORMAT_VERSION:
        raise BadModelFile("unsupported or missing format_version")
    if doc.get("kind") != KIND:
        raise BadModelFile(f"expected kind {KIND!r}, got {doc.get('kind')!r}")
    try:
        variables = tuple(doc["variables"])
        dag = Dag(variables=variables,
                  edges=tuple((p, c) for p, c in doc["edges"]))
        domains = {v: tuple(doc["domains"][v]) for v in variables}
        cpts = {}
        for v in variables:
            c = doc["cpts"][v]
            cpts[v] = Cpt(var=v, parents=tuple(c["parents"]),
                          rows=tuple(tuple(float(x) for x in row) for row in c["rows"]))
            expected_rows = 1
            for p in cpts[v].parents:
                expected_rows *= len(domains[p])
            if len(cpts[v].rows) != expected_rows:
                raise BadModelFile(f"cpt for {v!r} has wrong row count")
        return BayesNetModel(dag=dag, domains=domains, cpts=cpts,
                             class_var=doc["class_var"],
                             smoothing_alpha=float(doc["smoothing_alpha"]),
                             trained_on=int(doc["trained_on"]))
    except BadModelFile:
        raise
    except (KeyError, TypeError, ValueError, UnknownVariable, CyclicGraph) as exc:
        raise BadModelFile(f"malformed network file: {exc}") from exc
