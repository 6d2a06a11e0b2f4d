"""Dependence scoring between variables of a joint belief distribution.

The central quantity is an agreement score in [0, 1] between a candidate
mass function and a reference: 1 means the candidate reproduces the
reference's focal weights exactly, 0 means it misses (or assigns
non-positive weight to) part of the reference's support.  From it are built
a pairwise dependence weight, used as the edge weight of the spanning-tree
learner, and a collider score whose positive sign indicates a head-to-head
meeting of two edges.

All scores are pure functions of a :class:`ScoreContext`, which memoizes
the marginal mass functions of either an exact joint distribution or a
dataset's empirical frequencies.
"""

from __future__ import annotations

import warnings
from math import exp, fsum, log
from typing import Callable, Iterable

from .errors import CapacityError, ConflictError, MassError, NoSolutionError, ScopeError
from .frames import Frame, Scope
from .mass import MassFunction, combine, conditional_factor, marginalize
from .population import Dataset, empirical_mass


class BackgroundSkipWarning(UserWarning):
    """A background variable was skipped because its reconstruction failed."""


class ScoreContext:
    """Provides and memoizes marginal mass functions for requested scopes.

    Construct with :meth:`from_joint` (exact marginals of one joint mass
    function) or :meth:`from_dataset` (empirical marginals).  Repeated
    requests for the same scope return the identical object, so sharing a
    context read-only across threads behaves as if marginals were
    recomputed.
    """

    def __init__(self, frame: Frame, variables: tuple[str, ...], provider: Callable[[Scope], MassFunction]):
        self.frame = frame
        self.variables = variables
        self._provider = provider
        self._cache: dict[tuple[int, ...], MassFunction] = {}

    @classmethod
    def from_joint(cls, joint: MassFunction) -> "ScoreContext":
        frame = joint.scope.frame
        return cls(frame, joint.scope.variables, lambda scope: marginalize(joint, scope))

    @classmethod
    def from_dataset(cls, ds: Dataset) -> "ScoreContext":
        return cls(ds.frame, ds.frame.names, lambda scope: empirical_mass(ds, scope))

    def marginal(self, names: Iterable[str]) -> MassFunction:
        scope = self.frame.scope(names)
        key = scope.indices
        hit = self._cache.get(key)
        if hit is None:
            hit = self._cache[key] = self._provider(scope)
        return hit


def cross_log_score(x: MassFunction, p: MassFunction) -> float:
    """Support-weighted log score of ``x`` under the proper reference ``p``.

    Sums ``p(A) * ln x(A)`` over the focal sets of ``p``; minus infinity as
    soon as ``x`` puts non-positive weight on any of them.  For proper ``x``
    the score never exceeds the reference's self score.
    """
    if x.scope != p.scope:
        raise ScopeError("candidate and reference scopes differ")
    if not p.is_proper:
        raise MassError("reference must be a proper mass function")
    terms = []
    for mask in p.focal_masks():
        xv = x.mass_of(mask)
        if xv <= 0.0:
            return float("-inf")
        terms.append(p.mass_of(mask) * log(xv))
    return fsum(terms)


def relative_log_score(x: MassFunction, p: MassFunction) -> float:
    """Self-normalized log score; 1 at perfect agreement, growing with mismatch."""
    self_score = cross_log_score(p, p)
    if self_score == 0.0:
        raise MassError("categorical reference: relative score undefined")
    score = cross_log_score(x, p)
    if score == float("-inf"):
        return float("inf")
    return score / self_score


def agreement(x: MassFunction, p: MassFunction) -> float:
    """Agreement of ``x`` with reference ``p`` in [0, 1]; 1 iff exact on support.

    A categorical reference (self score zero) degenerates to an exact-match
    indicator.  Pseudo candidates can overshoot the reference self score;
    the result is capped at 1 so the score stays in range.
    """
    self_score = cross_log_score(p, p)
    score = cross_log_score(x, p)
    if self_score == 0.0:
        return 1.0 if score == 0.0 else 0.0
    ratio = score / self_score if score != float("-inf") else float("inf")
    if ratio <= 1.0:
        return 1.0
    return exp(1.0 - ratio)


def pair_joint_via_background(ctx: ScoreContext, x1: str, x2: str, background: str) -> MassFunction:
    """Reconstructs the pair joint of ``x1, x2`` through one background variable.

    Combines the conditional factors of both pairwise marginals given the
    background with the background's own marginal, then projects back to the
    pair scope.  The result may be pseudo; how far it falls from the true
    pair marginal is evidence about structure.
    """
    if len({x1, x2, background}) != 3:
        raise ScopeError("pair and background variables must be distinct")
    given = ctx.frame.scope([background])
    r1 = conditional_factor(ctx.marginal([x1, background]), given)
    r2 = conditional_factor(ctx.marginal([x2, background]), given)
    joint = combine(combine(r1, r2), ctx.marginal([background]))
    return marginalize(joint, ctx.frame.scope([x1, x2]))


def _ordered(ctx: ScoreContext, x1: str, x2: str) -> tuple[str, str]:
    if ctx.frame.index_of(x1) > ctx.frame.index_of(x2):
        return x2, x1
    return x1, x2


def dependence_weight(ctx: ScoreContext, x1: str, x2: str) -> float:
    """Pairwise dependence in [0, 1]; near zero for independent pairs.

    One minus the best agreement achieved by either the independent-product
    approximation of the pair joint or any single-background reconstruction.
    Backgrounds whose reconstruction fails (no factor, vanishing normalizer,
    or capacity) are skipped with a :class:`BackgroundSkipWarning`: an
    unsolvable background contributes no evidence of independence.
    """
    x1, x2 = _ordered(ctx, x1, x2)
    p = ctx.marginal([x1, x2])
    product = combine(ctx.marginal([x1]), ctx.marginal([x2]))
    best = agreement(product, p)
    for x3 in ctx.variables:
        if x3 == x1 or x3 == x2:
            continue
        try:
            reconstruction = pair_joint_via_background(ctx, x1, x2, x3)
        except (NoSolutionError, ConflictError, CapacityError) as exc:
            warnings.warn(
                BackgroundSkipWarning(
                    f"pair ({x1},{x2}): background {x3} skipped: {exc}"
                ),
                stacklevel=2,
            )
            continue
        best = max(best, agreement(reconstruction, p))
    return 1.0 - best


def collider_score(ctx: ScoreContext, x1: str, x2: str, center: str) -> float:
    """Positive iff the evidence favors a head-to-head meeting at ``center``.

    Compares the defect of the reconstruction through ``center`` with the
    defect of the independent-product approximation: if the product explains
    the pair better than conditioning through ``center`` does, the edges
    meet head to head at ``center``.
    """
    x1, x2 = _ordered(ctx, x1, x2)
    p = ctx.marginal([x1, x2])
    product = combine(ctx.marginal([x1]), ctx.marginal([x2]))
    reconstruction = pair_joint_via_background(ctx, x1, x2, center)
    return agreement(product, p) - agreement(reconstruction, p)
