"""Mass functions and the combination / marginalization / conditioning algebra.

A mass function assigns real weights to nonempty configuration sets of one
scope, summing to one.  Proper mass functions have nonnegative weights;
pseudo mass functions may carry negative weights (still summing to one) and
arise as conditional factors.  All operations are pure: they never mutate
their arguments and are safe to evaluate in parallel.
"""

from __future__ import annotations

from math import fsum
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    CapacityError,
    ConflictError,
    ImpossibleEventError,
    MassError,
    NoSolutionError,
    ScopeError,
)
from .frames import ConfigSet, Scope, cylinder_mask, project_mask

#: Focal entries at or below this magnitude are dropped during canonicalization.
DROP_EPS = 1e-12
#: Required closeness of a total mass to one.
SUM_TOL = 1e-9
#: Normalizer guard for combination and general algebra tolerance.
ALGEBRA_TOL = 1e-9
#: Recombination tolerance for conditional factors and distribution equality.
RESIDUAL_TOL = 1e-6
#: Largest scope (in configurations) for dense subset-lattice operations.
DENSE_CAP = 16


class MassFunction:
    """An immutable map from nonempty configuration sets to real masses.

    ``kind`` is ``"proper"`` when every stored mass is positive and
    ``"pseudo"`` otherwise.  Entries with magnitude at most ``DROP_EPS`` are
    dropped, and the total must be one within ``SUM_TOL`` unless
    ``normalize=True`` rescales it.
    """

    __slots__ = ("scope", "_masses", "kind")

    def __init__(
        self,
        scope: Scope,
        entries: Mapping | Iterable[tuple],
        *,
        normalize: bool = False,
    ):
        items = entries.items() if isinstance(entries, Mapping) else entries
        masses: dict[int, float] = {}
        limit = 1 << scope.config_count
        for key, value in items:
            if isinstance(key, ConfigSet):
                if key.scope != scope:
                    raise ScopeError(f"focal set {key!r} not over {scope!r}")
                mask = key.mask
            else:
                mask = int(key)
                if not 0 <= mask < limit:
                    raise MassError(f"focal mask {mask:#x} out of range for {scope!r}")
            masses[mask] = masses.get(mask, 0.0) + float(value)
        empty = masses.pop(0, 0.0)
        if abs(empty) > DROP_EPS:
            raise MassError(f"mass {empty!r} assigned to the empty set")
        total = fsum(masses.values())
        if normalize:
            if abs(total) <= SUM_TOL:
                raise MassError(f"cannot normalize: total mass {total!r} is (near) zero")
            masses = {m: v / total for m, v in masses.items()}
        elif abs(total - 1.0) > SUM_TOL:
            raise MassError(f"masses sum to {total!r}, not 1")
        masses = {m: v for m, v in masses.items() if abs(v) > DROP_EPS}
        if not masses:
            raise MassError("mass function has no focal elements")
        self.scope = scope
        self._masses = masses
        self.kind = "proper" if all(v > 0.0 for v in masses.values()) else "pseudo"

    @property
    def is_proper(self) -> bool:
        return self.kind == "proper"

    @property
    def focal_count(self) -> int:
        return len(self._masses)

    def mass_of(self, a: ConfigSet | int) -> float:
        if isinstance(a, ConfigSet):
            if a.scope != self.scope:
                raise ScopeError("configuration set not over this mass function's scope")
            return self._masses.get(a.mask, 0.0)
        return self._masses.get(int(a), 0.0)

    def items(self) -> Iterable[tuple[ConfigSet, float]]:
        for mask in sorted(self._masses):
            yield ConfigSet(self.scope, mask), self._masses[mask]

    def focal_masks(self) -> tuple[int, ...]:
        return tuple(sorted(self._masses))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MassFunction)
            and self.scope == other.scope
            and self._masses == other._masses
        )

    def __hash__(self):
        return hash((self.scope, tuple(sorted(self._masses.items()))))

    def __repr__(self) -> str:
        parts = [f"{set('.'.join(c) for c in a.configs()) or '{}'}: {v:.4g}" for a, v in self.items()]
        body = ", ".join(parts) if len(parts) <= 4 else f"{len(parts)} focal elements"
        return f"MassFunction({self.kind} over {','.join(self.scope.variables) or 'empty'}; {body})"


def vacuous(scope: Scope) -> MassFunction:
    """Total ignorance: all mass on the full configuration space."""
    return MassFunction(scope, {(1 << scope.config_count) - 1: 1.0})


def simple_support(scope_set: ConfigSet) -> MassFunction:
    """All mass on one nonempty set (the evidence of that set)."""
    if scope_set.is_empty:
        raise MassError("simple support on the empty set is degenerate")
    return MassFunction(scope_set.scope, {scope_set.mask: 1.0})


def extend(m: MassFunction, target: Scope) -> MassFunction:
    """Vacuous extension: cylinder-extends each focal set, masses unchanged."""
    if target == m.scope:
        return m
    if not m.scope.is_subscope_of(target):
        raise ScopeError(f"{m.scope!r} is not a subscope of {target!r}")
    entries = {cylinder_mask(m.scope, target, mask): v for mask, v in m._masses.items()}
    return MassFunction(target, entries)


def marginalize(m: MassFunction, target: Scope) -> MassFunction:
    """Projects each focal set to ``target``, accumulating masses."""
    if target == m.scope:
        return m
    if not target.is_subscope_of(m.scope):
        raise ScopeError(f"{target!r} is not a subscope of {m.scope!r}")
    entries: dict[int, float] = {}
    for mask, v in m._masses.items():
        p = project_mask(m.scope, target, mask)
        entries[p] = entries.get(p, 0.0) + v
    return MassFunction(target, entries)


def _convolve(a: MassFunction, b: MassFunction) -> tuple[dict[int, float], float]:
    """Unnormalized intersection convolution over a shared scope."""
    acc: dict[int, float] = {}
    for m1, v1 in a._masses.items():
        for m2, v2 in b._masses.items():
            c = m1 & m2
            acc[c] = acc.get(c, 0.0) + v1 * v2
    return acc, acc.pop(0, 0.0)


def conflict(m1: MassFunction, m2: MassFunction) -> float:
    """Mass the unnormalized combination assigns to the empty set."""
    target = m1.scope.union(m2.scope)
    _, k = _convolve(extend(m1, target), extend(m2, target))
    return k


def combine(m1: MassFunction, m2: MassFunction, *, tol: float = ALGEBRA_TOL) -> MassFunction:
    """Combination by intersection convolution with conflict renormalization.

    Operands are vacuously extended to the union of their scopes first.
    Commutative and associative within floating tolerance; the vacuous mass
    is the neutral element.
    """
    target = m1.scope.union(m2.scope)
    acc, k = _convolve(extend(m1, target), extend(m2, target))
    norm = 1.0 - k
    if abs(norm) <= tol:
        if m1.is_proper and m2.is_proper:
            raise ConflictError(f"total conflict: empty-intersection mass is {k!r}")
        raise ConflictError(f"vanishing normalizer: empty-intersection mass is {k!r}")
    return MassFunction(target, {mask: v / norm for mask, v in acc.items()})


def condition(m: MassFunction, event: ConfigSet) -> MassFunction:
    """Conditions ``m`` on an event: combine with the event's simple support.

    Equivalent to rejecting focal sets disjoint from the event, intersecting
    the rest with it, and renormalizing.
    """
    if not event.scope.is_subscope_of(m.scope):
        raise ScopeError("event scope must be a subscope of the mass function's scope")
    if event.is_empty:
        raise ImpossibleEventError("conditioning on the empty event")
    try:
        return combine(m, simple_support(event))
    except ConflictError as exc:
        raise ImpossibleEventError(f"event has zero plausibility: {exc}") from exc


def belief(m: MassFunction, a: ConfigSet) -> float:
    """Total mass of nonempty focal subsets of ``a``."""
    if a.scope != m.scope:
        raise ScopeError("argument scope differs from the mass function's scope")
    return fsum(v for mask, v in m._masses.items() if mask & ~a.mask == 0)


def commonality(m: MassFunction, a: ConfigSet) -> float:
    """Total mass of focal supersets of ``a``; equals the total mass at the empty set."""
    if a.scope != m.scope:
        raise ScopeError("argument scope differs from the mass function's scope")
    return fsum(v for mask, v in m._masses.items() if mask & a.mask == a.mask)


def l1_distance(m1: MassFunction, m2: MassFunction) -> float:
    """Sum of absolute mass differences over the union of focal supports."""
    if m1.scope != m2.scope:
        raise ScopeError("mass functions live on different scopes")
    keys = set(m1._masses) | set(m2._masses)
    return fsum(abs(m1._masses.get(k, 0.0) - m2._masses.get(k, 0.0)) for k in keys)


def approx_equal(m1: MassFunction, m2: MassFunction, tol: float = RESIDUAL_TOL) -> bool:
    return l1_distance(m1, m2) <= tol


def _require_dense(scope: Scope) -> None:
    if scope.config_count > DENSE_CAP:
        raise CapacityError(
            f"scope with {scope.config_count} configurations exceeds the dense cap of {DENSE_CAP}"
        )


def _superset_zeta(values: np.ndarray, n_bits: int) -> np.ndarray:
    """In place: values[A] becomes the sum of values over supersets of A."""
    t = values.reshape((2,) * n_bits) if n_bits else values
    for axis in range(n_bits):
        lo = tuple(slice(None) if i != axis else 0 for i in range(n_bits))
        hi = tuple(slice(None) if i != axis else 1 for i in range(n_bits))
        t[lo] += t[hi]
    return values


def _superset_mobius(values: np.ndarray, n_bits: int) -> np.ndarray:
    """In place: inverse of the superset-sum transform."""
    t = values.reshape((2,) * n_bits) if n_bits else values
    for axis in range(n_bits):
        lo = tuple(slice(None) if i != axis else 0 for i in range(n_bits))
        hi = tuple(slice(None) if i != axis else 1 for i in range(n_bits))
        t[lo] -= t[hi]
    return values


def commonality_table(m: MassFunction) -> np.ndarray:
    """Dense commonality values indexed by configuration-set bit mask."""
    _require_dense(m.scope)
    n = m.scope.config_count
    dense = np.zeros(1 << n, dtype=np.float64)
    for mask, v in m._masses.items():
        dense[mask] += v
    return _superset_zeta(dense, n)


def mass_from_commonality(scope: Scope, q, *, normalize: bool = False) -> MassFunction:
    """Inverts commonality values on all nonempty subsets back to masses.

    ``q`` is either a dense array of length ``2 ** config_count`` indexed by
    set bit mask, or a mapping from sets (or masks) to values with missing
    entries read as zero.  The entry for the empty set is ignored.  Round
    trip with :func:`commonality_table` is the identity.
    """
    _require_dense(scope)
    n = scope.config_count
    size = 1 << n
    if isinstance(q, Mapping):
        dense = np.zeros(size, dtype=np.float64)
        for key, value in q.items():
            mask = key.mask if isinstance(key, ConfigSet) else int(key)
            if not 0 <= mask < size:
                raise MassError(f"subset mask {mask:#x} out of range")
            dense[mask] = float(value)
    else:
        dense = np.asarray(q, dtype=np.float64).copy()
        if dense.shape != (size,):
            raise MassError(f"expected {size} commonality values, got shape {dense.shape}")
    _superset_mobius(dense, n)
    entries = {
        int(mask): float(dense[mask])
        for mask in range(1, size)
        if abs(dense[mask]) > DROP_EPS
    }
    return MassFunction(scope, entries, normalize=normalize)


def conditional_factor(
    m: MassFunction, given: Scope, *, tol: float = RESIDUAL_TOL
) -> MassFunction:
    """A (possibly pseudo) factor ``r`` with ``combine(marginalize(m, given), r) == m``.

    Solved on the dense subset lattice by dividing the commonality of ``m``
    pointwise by the commonality of the extended marginal, inverting back to
    masses, and normalizing to total one.  Such factors are generally not
    unique; this returns the commonality-quotient solution.  The recombination
    residual is always verified: cells where both commonalities vanish are
    first filled with zero, then retried with one, and if neither candidate
    recombines to ``m`` within ``tol`` (L1 over focal supports) the solver
    raises instead of returning an unverified result.
    """
    if not (given.is_subscope_of(m.scope) and given != m.scope):
        raise ScopeError("conditioning scope must be a proper subscope")
    _require_dense(m.scope)
    marg = marginalize(m, given)
    q_m = commonality_table(m)
    q_ext = commonality_table(extend(marg, m.scope))
    zero = np.abs(q_ext) <= DROP_EPS
    incompatible = zero & (np.abs(q_m) > ALGEBRA_TOL)
    if incompatible.any():
        raise NoSolutionError(
            "marginal commonality vanishes where the joint commonality does not"
        )
    quotient = np.zeros_like(q_m)
    np.divide(q_m, q_ext, out=quotient, where=~zero)
    best: float | None = None
    for fill in (0.0, 1.0):
        q = quotient.copy()
        q[zero] = fill
        try:
            candidate = mass_from_commonality(m.scope, q, normalize=True)
            residual = l1_distance(combine(marg, candidate), m)
        except (MassError, ConflictError):
            continue
        if residual <= tol:
            return candidate
        best = residual if best is None else min(best, residual)
    raise NoSolutionError(
        f"no conditional factor recombines within {tol!r}"
        + (f" (best residual {best!r})" if best is not None else "")
    )
