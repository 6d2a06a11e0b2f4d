"""Structure recovery: spanning-tree and polytree learners, plus metrics.

The tree learner scores every unordered variable pair with its dependence
weight and keeps a maximum-weight spanning tree (heaviest edges first, ties
broken by the lexicographically smaller name pair).  The polytree learner
reuses that skeleton, marks head-to-head meetings wherever the collider
score of two edges sharing a node exceeds the threshold, and then
propagates direction away from oriented-into nodes.  Edges with conflicting
demands stay undirected and are reported in the warnings.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .dependence import BackgroundSkipWarning, ScoreContext, collider_score, dependence_weight
from .errors import CapacityError, ConflictError, GraphError, NoSolutionError
from .network import Dag


@dataclass(frozen=True)
class LearnedStructure:
    """Output of a structure learner.

    ``skeleton`` pairs and ``oriented`` (parent, child) pairs use variable
    names; oriented edges are a subset of the skeleton.  ``edge_weights``
    carries the dependence weight of every skeleton edge and
    ``collider_scores`` the score of every evaluated edge pair, keyed
    ``(x1, x2, center)``.
    """

    variables: tuple[str, ...]
    skeleton: tuple[tuple[str, str], ...]
    oriented: tuple[tuple[str, str], ...] = ()
    edge_weights: Mapping[tuple[str, str], float] = field(default_factory=dict)
    collider_scores: Mapping[tuple[str, str, str], float] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class StructureMetrics:
    """Agreement of a learned structure with a ground-truth dag."""

    skeleton_precision: float
    skeleton_recall: float
    orientation_accuracy: float
    spurious_colliders: int


class _UnionFind:
    def __init__(self, items: Iterable[str]):
        self._parent = {x: x for x in items}

    def find(self, x: str) -> str:
        while self._parent[x] != x:
            self._parent[x] = self._parent[self._parent[x]]
            x = self._parent[x]
        return x

    def union(self, a: str, b: str) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self._parent[ra] = rb
        return True


def _pair_key(ctx: ScoreContext, a: str, b: str) -> tuple[str, str]:
    return (a, b) if ctx.frame.index_of(a) < ctx.frame.index_of(b) else (b, a)


def learn_tree(ctx: ScoreContext) -> LearnedStructure:
    """Unoriented maximum-dependence spanning tree over the context's variables."""
    names = ctx.variables
    if len(names) < 2:
        raise GraphError("tree learning needs at least two variables")
    weights: dict[tuple[str, str], float] = {}
    notes: list[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                weights[(a, b)] = dependence_weight(ctx, a, b)
    notes.extend(str(w.message) for w in caught if issubclass(w.category, BackgroundSkipWarning))
    ranked = sorted(weights, key=lambda pair: (-weights[pair], pair))
    forest = _UnionFind(names)
    skeleton: list[tuple[str, str]] = []
    for pair in ranked:
        if forest.union(*pair):
            skeleton.append(pair)
            if len(skeleton) == len(names) - 1:
                break
    skeleton.sort()
    return LearnedStructure(
        variables=tuple(names),
        skeleton=tuple(skeleton),
        edge_weights={pair: weights[pair] for pair in skeleton},
        warnings=tuple(notes),
    )


def learn_polytree(ctx: ScoreContext, theta: float = 0.0) -> LearnedStructure:
    """Skeleton from the tree learner plus collider-driven edge orientation.

    ``theta`` is the positivity threshold of the collider score; zero is
    faithful for exact distributions, sampled data may want a small margin.
    """
    names = ctx.variables
    if len(names) < 3:
        raise GraphError("polytree learning needs at least three variables")
    base = learn_tree(ctx)
    notes = list(base.warnings)
    neighbors: dict[str, list[str]] = {n: [] for n in names}
    for a, b in base.skeleton:
        neighbors[a].append(b)
        neighbors[b].append(a)
    scores: dict[tuple[str, str, str], float] = {}
    for center in names:
        around = sorted(neighbors[center], key=ctx.frame.index_of)
        for i, u in enumerate(around):
            for v in around[i + 1:]:
                try:
                    scores[(u, v, center)] = collider_score(ctx, u, v, center)
                except (NoSolutionError, ConflictError, CapacityError) as exc:
                    notes.append(f"collider ({u},{v})->{center} not scored: {exc}")

    # Phase 1: every positive score demands both of its edges point at the center.
    heads: dict[tuple[str, str], set[str]] = {}
    for (u, v, center), score in scores.items():
        if score > theta:
            for tail in (u, v):
                heads.setdefault(_pair_key(ctx, tail, center), set()).add(center)
    frozen: set[tuple[str, str]] = set()
    oriented: dict[tuple[str, str], str] = {}
    for edge, demanded in heads.items():
        if len(demanded) > 1:
            notes.append(f"edge {edge[0]}--{edge[1]}: conflicting head-to-head demands; left undirected")
            frozen.add(edge)
        else:
            oriented[edge] = next(iter(demanded))

    # Phase 2: orient remaining edges away from any node something points into.
    # A surviving undirected edge was never part of a positive collider pair,
    # so pointing it away from the entered node is the only consistent choice.
    while True:
        entered = {head for head in oriented.values()}
        demands: dict[tuple[str, str], set[str]] = {}
        for edge in base.skeleton:
            if edge in oriented or edge in frozen:
                continue
            a, b = edge
            if a in entered:
                demands.setdefault(edge, set()).add(b)
            if b in entered:
                demands.setdefault(edge, set()).add(a)
        changed = False
        for edge, demanded in demands.items():
            if len(demanded) > 1:
                notes.append(f"edge {edge[0]}--{edge[1]}: conflicting propagation demands; left undirected")
                frozen.add(edge)
            else:
                oriented[edge] = next(iter(demanded))
            changed = True
        if not changed:
            break

    oriented_pairs = tuple(
        sorted((b, a) if head == a else (a, b) for (a, b), head in oriented.items())
    )
    return LearnedStructure(
        variables=base.variables,
        skeleton=base.skeleton,
        oriented=oriented_pairs,
        edge_weights=base.edge_weights,
        collider_scores=scores,
        warnings=tuple(notes),
    )


def compare_structures(
    truth: Dag, learned: LearnedStructure, names: Sequence[str]
) -> StructureMetrics:
    """Skeleton precision/recall and collider agreement against a true dag.

    Orientation accuracy is the recovered fraction of true head-to-head
    pairs (two parents of a common child, themselves nonadjacent); spurious
    colliders are learned head-to-head pairs absent from the truth.
    """
    if set(names) != set(learned.variables):
        raise GraphError("learned structure is over a different variable set")
    index = {name: i for i, name in enumerate(names)}
    truth_skeleton = {frozenset(e) for e in truth.edges}
    learned_skeleton = {frozenset((index[a], index[b])) for a, b in learned.skeleton}
    hit = len(truth_skeleton & learned_skeleton)
    precision = hit / len(learned_skeleton) if learned_skeleton else 1.0
    recall = hit / len(truth_skeleton) if truth_skeleton else 1.0

    adjacent = truth_skeleton
    truth_colliders: set[tuple[int, int, int]] = set()
    for child in range(truth.n):
        ps = truth.parents(child)
        for i, p1 in enumerate(ps):
            for p2 in ps[i + 1:]:
                if frozenset((p1, p2)) not in adjacent:
                    truth_colliders.add((min(p1, p2), max(p1, p2), child))
    incoming: dict[int, set[int]] = {}
    for a, b in learned.oriented:
        incoming.setdefault(index[b], set()).add(index[a])
    learned_colliders: set[tuple[int, int, int]] = set()
    for child, parents in incoming.items():
        ps = sorted(parents)
        for i, p1 in enumerate(ps):
            for p2 in ps[i + 1:]:
                learned_colliders.add((p1, p2, child))
    recovered = len(truth_colliders & learned_colliders)
    accuracy = recovered / len(truth_colliders) if truth_colliders else 1.0
    spurious = len(learned_colliders - truth_colliders)
    return StructureMetrics(
        skeleton_precision=precision,
        skeleton_recall=recall,
        orientation_accuracy=accuracy,
        spurious_colliders=spurious,
    )
