"""Belief networks over directed acyclic graphs.

A belief network couples a frame with a DAG over its variables and stores,
at every node, one valuation: a mass function over the node's family scope
(the node plus its parents).  The joint distribution represented by the
network is the combination of all node valuations.  d-separation is decided
graphically; the conditional-independence test compares a joint's marginal
against the recombination of its conditional factors.

Network file format (line oriented, UTF-8)::

    frame X=a|b,Y=c|d          variable declarations, as in dataset headers
    edge X->Y                  one line per directed edge (all before nodes)
    node Y                     starts the valuation block of a node
    set a.c;b.d 0.25           focal set over the family scope, then its mass

Masses are printed with 17 significant digits, so write/read round trips
are lossless.  Blank lines and '#' comments are ignored.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CapacityError,
    ConflictError,
    FormatError,
    GenerationError,
    GraphError,
    NoSolutionError,
)
from .mass import MassFunction, RESIDUAL_TOL, combine, conditional_factor, extend, l1_distance, marginalize
from .frames import Frame, Scope
from .population import atomic_write_text, format_configs_expr, format_frame_decl, parse_configs_expr, parse_frame_decl


class Dag:
    """A directed acyclic graph over nodes ``0 .. n-1``."""

    __slots__ = ("n", "edges", "_parents", "_children", "topological_order")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        if n < 1:
            raise GraphError("a dag needs at least one node")
        es = []
        seen = set()
        parents: list[list[int]] = [[] for _ in range(n)]
        children: list[list[int]] = [[] for _ in range(n)]
        for parent, child in edges:
            if not (0 <= parent < n and 0 <= child < n):
                raise GraphError(f"edge ({parent},{child}) out of node range")
            if parent == child:
                raise GraphError(f"self loop at node {parent}")
            if (parent, child) in seen:
                raise GraphError(f"parallel edge ({parent},{child})")
            seen.add((parent, child))
            es.append((parent, child))
            parents[child].append(parent)
            children[parent].append(child)
        self.n = n
        self.edges = tuple(sorted(es))
        self._parents = tuple(tuple(sorted(p)) for p in parents)
        self._children = tuple(tuple(sorted(c)) for c in children)
        self.topological_order = self._topological_sort()

    def _topological_sort(self) -> tuple[int, ...]:
        indeg = [len(self._parents[i]) for i in range(self.n)]
        ready = [i for i in range(self.n) if indeg[i] == 0]
        order: list[int] = []
        while ready:
            node = ready.pop()
            order.append(node)
            for c in self._children[node]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        if len(order) != self.n:
            raise GraphError("graph contains a directed cycle")
        return tuple(order)

    def parents(self, node: int) -> tuple[int, ...]:
        return self._parents[node]

    def children(self, node: int) -> tuple[int, ...]:
        return self._children[node]

    def __eq__(self, other) -> bool:
        return isinstance(other, Dag) and self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Dag({self.n} nodes, {len(self.edges)} edges)"


def _check_node_sets(dag: Dag, groups: Sequence[Iterable[int]]) -> list[frozenset[int]]:
    out = []
    taken: set[int] = set()
    for group in groups:
        g = frozenset(group)
        for node in g:
            if not 0 <= node < dag.n:
                raise GraphError(f"unknown node {node}")
        if g & taken:
            raise GraphError("node sets must be pairwise disjoint")
        taken |= g
        out.append(g)
    return out


def d_separated(dag: Dag, j: Iterable[int], k: Iterable[int], l: Iterable[int]) -> bool:
    """True iff no trail between ``j`` and ``k`` is active given ``l``.

    Reachability over trail states: a state records the node and whether the
    trail arrived from a child.  Head-to-head nodes pass the trail on only
    when they are in ``l`` or have a descendant there.
    """
    j, k, l = _check_node_sets(dag, (j, k, l))
    if not j or not k:
        return True
    ancestors_of_l = set(l)
    stack = list(l)
    while stack:
        node = stack.pop()
        for p in dag.parents(node):
            if p not in ancestors_of_l:
                ancestors_of_l.add(p)
                stack.append(p)
    visited: set[tuple[int, bool]] = set()
    frontier: list[tuple[int, bool]] = [(s, True) for s in j]
    while frontier:
        state = frontier.pop()
        if state in visited:
            continue
        visited.add(state)
        node, from_child = state
        if node in k:
            return False
        if from_child:
            if node not in l:
                for p in dag.parents(node):
                    frontier.append((p, True))
                for c in dag.children(node):
                    frontier.append((c, False))
        else:
            if node not in l:
                for c in dag.children(node):
                    frontier.append((c, False))
            if node in ancestors_of_l:
                for p in dag.parents(node):
                    frontier.append((p, True))
    return True


class BeliefNetwork:
    """A frame, a DAG over its variables, and one valuation per node family."""

    __slots__ = ("frame", "dag", "valuations")

    def __init__(self, frame: Frame, dag: Dag, valuations: Sequence[MassFunction]):
        if dag.n != len(frame):
            raise GraphError("dag node count differs from the frame's variable count")
        vals = tuple(valuations)
        if len(vals) != dag.n:
            raise GraphError("need exactly one valuation per node")
        for node, valuation in enumerate(vals):
            if valuation.scope != family_scope(frame, dag, node):
                raise GraphError(
                    f"valuation of node {node} is not over its family scope"
                )
        self.frame = frame
        self.dag = dag
        self.valuations = vals

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BeliefNetwork)
            and self.frame == other.frame
            and self.dag == other.dag
            and self.valuations == other.valuations
        )

    def __repr__(self) -> str:
        return f"BeliefNetwork({self.frame!r}, {self.dag!r})"


def family_scope(frame: Frame, dag: Dag, node: int) -> Scope:
    return Scope(frame, (node, *dag.parents(node)))


def joint_distribution(net: BeliefNetwork) -> MassFunction:
    """Combination of all node valuations, in topological order.

    Combination order does not matter beyond floating noise; total conflict
    during any step raises.
    """
    acc: MassFunction | None = None
    for node in net.dag.topological_order:
        v = net.valuations[node]
        acc = v if acc is None else combine(acc, v)
    return extend(acc, net.frame.full_scope)


@dataclass(frozen=True)
class IndependenceStatement:
    """Verdict of a conditional-independence test.

    ``independent`` is ``None`` when the test was inconclusive (a conditional
    factor could not be computed), which is distinct from a negative verdict.
    """

    j: tuple[str, ...]
    k: tuple[str, ...]
    l: tuple[str, ...]
    independent: bool | None
    residual: float | None
    detail: str = ""


def independence_test(
    m: MassFunction,
    j: Iterable[str],
    k: Iterable[str],
    l: Iterable[str] = (),
    eps: float = RESIDUAL_TOL,
) -> IndependenceStatement:
    """Tests whether variable sets ``j`` and ``k`` are independent given ``l``.

    The left side of the defining equation collapses to the plain marginal
    over ``j + k + l`` (forced by the factor equation, which sidesteps the
    factor's non-uniqueness); the right side recombines the conditional
    factors of both sides with the marginal of ``l``.  Empty ``l`` reduces to
    plain (unconditional) independence.
    """
    frame = m.scope.frame
    js, ks, ls = frozenset(j), frozenset(k), frozenset(l)
    if not js or not ks:
        raise GraphError("both tested variable sets must be nonempty")
    if js & ks or js & ls or ks & ls:
        raise GraphError("tested variable sets must be pairwise disjoint")
    j_scope, k_scope, l_scope = (frame.scope(g) for g in (js, ks, ls))
    if not j_scope.union(k_scope).union(l_scope).is_subscope_of(m.scope):
        raise GraphError("tested variables outside the distribution's scope")
    key = tuple(sorted(js)), tuple(sorted(ks)), tuple(sorted(ls))
    lhs = marginalize(m, j_scope.union(k_scope).union(l_scope))
    try:
        r_j = conditional_factor(marginalize(m, j_scope.union(l_scope)), l_scope)
        r_k = conditional_factor(marginalize(m, k_scope.union(l_scope)), l_scope)
        rhs = combine(combine(r_j, r_k), marginalize(m, l_scope))
    except (NoSolutionError, ConflictError) as exc:
        return IndependenceStatement(*key, independent=None, residual=None, detail=str(exc))
    residual = l1_distance(lhs, rhs)
    return IndependenceStatement(*key, independent=residual <= eps, residual=residual)


# ---------------------------------------------------------------------------
# random structures and networks


def _random_labeled_tree(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Uniform random labeled tree via a random Pruefer sequence."""
    if n == 2:
        return [(0, 1)]
    seq = [int(rng.integers(0, n)) for _ in range(n - 2)]
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    leaves: list[int] = []
    for node in range(n):
        if degree[node] == 1:
            heappush(leaves, node)
    edges = []
    for x in seq:
        leaf = heappop(leaves)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heappush(leaves, x)
    u = heappop(leaves)
    v = heappop(leaves)
    edges.append((u, v))
    return edges


def random_tree(n: int, seed: int) -> Dag:
    """A random tree oriented away from a random root; deterministic per seed."""
    if n < 2:
        raise GraphError("need at least two nodes")
    rng = np.random.default_rng(seed)
    undirected = _random_labeled_tree(n, rng)
    adjacency: list[list[int]] = [[] for _ in range(n)]
    for a, b in undirected:
        adjacency[a].append(b)
        adjacency[b].append(a)
    root = int(rng.integers(0, n))
    edges = []
    seen = {root}
    queue = [root]
    while queue:
        node = queue.pop(0)
        for nb in sorted(adjacency[node]):
            if nb not in seen:
                seen.add(nb)
                edges.append((node, nb))
                queue.append(nb)
    return Dag(n, edges)


def random_polytree(n: int, seed: int) -> Dag:
    """A random tree skeleton with random edge orientations.

    For three or more nodes, orientations are redrawn until at least one
    head-to-head node exists.  Deterministic per seed.
    """
    if n < 2:
        raise GraphError("need at least two nodes")
    rng = np.random.default_rng(seed)
    skeleton = _random_labeled_tree(n, rng)
    for _ in range(1000):
        flips = rng.integers(0, 2, size=len(skeleton))
        edges = [(b, a) if flip else (a, b) for (a, b), flip in zip(skeleton, flips)]
        dag = Dag(n, edges)
        if n == 2 or any(len(dag.parents(i)) >= 2 for i in range(n)):
            return dag
    raise GenerationError("could not orient a head-to-head meeting")  # pragma: no cover


def _random_valuation(
    frame: Frame, dag: Dag, node: int, focal_budget: int, rng: np.random.Generator
) -> MassFunction:
    """Random proper valuation over a node's family scope.

    Every focal set projects onto the full parent configuration space: for
    each parent configuration it carries a nonempty set of child values.
    Without this, marginalizing away the child would leave a coupling over
    the parents and the network's graphical independences (head-to-head
    parents in particular) would not hold in the joint.
    """
    fam = family_scope(frame, dag, node)
    pa = Scope(frame, dag.parents(node))
    child_pos = fam.indices.index(node)
    parent_positions = [fam.indices.index(i) for i in pa.indices]
    pa_index = []
    child_digit = []
    for idx in range(fam.config_count):
        digits = fam.digits_of(idx)
        pa_index.append(pa.index_of_digits([digits[p] for p in parent_positions]))
        child_digit.append(digits[child_pos])
    child_size = len(frame.variables[node][1])
    column_choices = (1 << child_size) - 1
    available = column_choices ** pa.config_count
    budget = min(focal_budget, available)
    masks: set[int] = set()
    tries = 0
    while len(masks) < budget and tries < 200 * budget:
        tries += 1
        columns = [int(rng.integers(1, 1 << child_size)) for _ in range(pa.config_count)]
        mask = 0
        for idx in range(fam.config_count):
            if (columns[pa_index[idx]] >> child_digit[idx]) & 1:
                mask |= 1 << idx
        masks.add(mask)
    ordered = sorted(masks)
    weights = rng.dirichlet(np.ones(len(ordered)))
    return MassFunction(fam, {m: float(w) for m, w in zip(ordered, weights)}, normalize=True)


def random_network(
    dag: Dag,
    frame: Frame,
    focal_budget: int,
    seed: int,
    *,
    max_resamples: int = 32,
) -> BeliefNetwork:
    """Random proper valuations for every node of ``dag``; deterministic per seed.

    Nodes are filled in topological order; a node whose valuation makes the
    running combination totally conflicting is resampled, up to
    ``max_resamples`` times before generation fails.
    """
    if focal_budget < 1:
        raise GraphError("focal budget must be at least 1")
    rng = np.random.default_rng(seed)
    valuations: list[MassFunction | None] = [None] * dag.n
    running: MassFunction | None = None
    for node in dag.topological_order:
        for _ in range(max_resamples + 1):
            candidate = _random_valuation(frame, dag, node, focal_budget, rng)
            try:
                stepped = candidate if running is None else combine(running, candidate)
            except ConflictError:
                continue
            running = stepped
            valuations[node] = candidate
            break
        else:
            raise GenerationError(
                f"node {node} still totally conflicting after {max_resamples} resamples"
            )
    return BeliefNetwork(frame, dag, tuple(valuations))


# ---------------------------------------------------------------------------
# network files


def write_network(net: BeliefNetwork, path: str) -> None:
    lines = [f"frame {format_frame_decl(net.frame)}"]
    names = net.frame.names
    for parent, child in net.dag.edges:
        lines.append(f"edge {names[parent]}->{names[child]}")
    for node in range(net.dag.n):
        lines.append(f"node {names[node]}")
        for focal, mass in net.valuations[node].items():
            lines.append(f"set {format_configs_expr(focal)} {mass:.17g}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_network(path: str) -> BeliefNetwork:
    frame: Frame | None = None
    edges: list[tuple[int, int]] = []
    nodes_seen = False
    entries: dict[int, list[tuple[str, float, int]]] = {}
    current: int | None = None
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            keyword, _, rest = line.partition(" ")
            rest = rest.strip()
            if keyword == "frame":
                if frame is not None:
                    raise FormatError(f"{path}:{lineno}: duplicate frame line")
                frame = parse_frame_decl(rest)
                continue
            if frame is None:
                raise FormatError(f"{path}:{lineno}: {keyword!r} before frame line")
            if keyword == "edge":
                if nodes_seen:
                    raise FormatError(f"{path}:{lineno}: edges must precede node blocks")
                if "->" not in rest:
                    raise FormatError(f"{path}:{lineno}: edge {rest!r} lacks '->'")
                a, _, b = rest.partition("->")
                try:
                    edges.append((frame.index_of(a.strip()), frame.index_of(b.strip())))
                except Exception as exc:
                    raise FormatError(f"{path}:{lineno}: {exc}") from exc
            elif keyword == "node":
                nodes_seen = True
                try:
                    current = frame.index_of(rest)
                except Exception as exc:
                    raise FormatError(f"{path}:{lineno}: {exc}") from exc
                if current in entries:
                    raise FormatError(f"{path}:{lineno}: duplicate node block for {rest!r}")
                entries[current] = []
            elif keyword == "set":
                if current is None:
                    raise FormatError(f"{path}:{lineno}: 'set' outside a node block")
                expr, _, mass_text = rest.rpartition(" ")
                if not expr:
                    raise FormatError(f"{path}:{lineno}: 'set' needs an expression and a mass")
                try:
                    mass = float(mass_text)
                except ValueError:
                    raise FormatError(f"{path}:{lineno}: bad mass {mass_text!r}") from None
                entries[current].append((expr, mass, lineno))
            else:
                raise FormatError(f"{path}:{lineno}: unknown keyword {keyword!r}")
    if frame is None:
        raise FormatError(f"{path}: missing frame line")
    try:
        dag = Dag(len(frame), edges)
    except GraphError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    valuations: list[MassFunction] = []
    for node in range(dag.n):
        rows = entries.get(node)
        if not rows:
            name = frame.names[node]
            raise FormatError(f"{path}: node {name!r} has no valuation")
        fam = family_scope(frame, dag, node)
        focal: dict[int, float] = {}
        for expr, mass, lineno in rows:
            try:
                cs = parse_configs_expr(fam, expr)
            except FormatError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
            focal[cs.mask] = focal.get(cs.mask, 0.0) + mass
        try:
            valuations.append(MassFunction(fam, focal))
        except Exception as exc:
            raise FormatError(
                f"{path}: invalid valuation for node {frame.names[node]!r}: {exc}"
            ) from exc
    return BeliefNetwork(frame, dag, valuations)
