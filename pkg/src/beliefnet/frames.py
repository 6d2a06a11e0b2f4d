"""Frames of discernment, variable scopes, and configuration-set algebra.

A frame declares ordered variables with finite ordered domains.  A scope is
a subset of the frame's variables in canonical (declaration) order.  Joint
configurations of a scope are indexed mixed-radix with the last variable
varying fastest, and subsets of the configuration space are stored as
integer bit masks, so set operations are exact and every set over the same
scope shares one bit layout.

Frames, scopes, and configuration sets are immutable after construction and
safe to share across threads.
"""

from __future__ import annotations

from functools import lru_cache
from math import prod
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import FrameError, ScopeError

# Characters that would collide with the text formats built on top of frames
# (dataset rows, network files, CLI event expressions).
_RESERVED = set(" \t\n\r,|;=.:#>")


def _check_token(kind: str, token: str) -> str:
    if not token or any(ch in _RESERVED for ch in token):
        raise FrameError(
            f"invalid {kind} {token!r}: must be nonempty and free of "
            "whitespace and of the characters ,|;=.:#>"
        )
    return token


class Frame:
    """Ordered variables, each with a finite ordered domain of size >= 2."""

    __slots__ = ("variables", "_index")

    def __init__(self, variables: Iterable[tuple[str, Sequence[str]]]):
        vs = tuple((str(name), tuple(str(v) for v in domain)) for name, domain in variables)
        if not vs:
            raise FrameError("a frame needs at least one variable")
        names = [name for name, _ in vs]
        if len(set(names)) != len(names):
            raise FrameError("duplicate variable names in frame")
        for name, domain in vs:
            _check_token("variable name", name)
            if len(domain) < 2:
                raise FrameError(f"domain of {name!r} needs at least two values")
            if len(set(domain)) != len(domain):
                raise FrameError(f"duplicate value labels in domain of {name!r}")
            for label in domain:
                _check_token("value label", label)
        self.variables = vs
        self._index = {name: i for i, (name, _) in enumerate(vs)}

    def __len__(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.variables)

    def domain(self, name: str) -> tuple[str, ...]:
        return self.variables[self.index_of(name)][1]

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise FrameError(f"unknown variable {name!r}") from None

    def scope(self, names: Iterable[str]) -> "Scope":
        return Scope(self, (self.index_of(n) for n in names))

    @property
    def full_scope(self) -> "Scope":
        return Scope(self, range(len(self.variables)))

    def __eq__(self, other) -> bool:
        return isinstance(other, Frame) and self.variables == other.variables

    def __hash__(self) -> int:
        return hash(self.variables)

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}({len(d)})" for n, d in self.variables)
        return f"Frame[{inner}]"


class Scope:
    """A canonically ordered subset of a frame's variables.

    The empty scope is valid and has exactly one (empty) configuration.
    """

    __slots__ = ("frame", "indices", "sizes", "config_count")

    def __init__(self, frame: Frame, indices: Iterable[int]):
        idx = tuple(sorted(indices))
        if len(set(idx)) != len(idx):
            raise ScopeError("duplicate variables in scope")
        if idx and (idx[0] < 0 or idx[-1] >= len(frame.variables)):
            raise ScopeError(f"variable index out of range for {frame!r}")
        self.frame = frame
        self.indices = idx
        self.sizes = tuple(len(frame.variables[i][1]) for i in idx)
        self.config_count = prod(self.sizes)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(self.frame.variables[i][0] for i in self.indices)

    @property
    def is_empty(self) -> bool:
        return not self.indices

    def is_subscope_of(self, other: "Scope") -> bool:
        return self.frame == other.frame and set(self.indices) <= set(other.indices)

    def union(self, other: "Scope") -> "Scope":
        if self.frame != other.frame:
            raise ScopeError("cannot combine scopes over different frames")
        return Scope(self.frame, set(self.indices) | set(other.indices))

    def digits_of(self, index: int) -> tuple[int, ...]:
        """Per-variable value indices of a configuration (last varies fastest)."""
        if not 0 <= index < self.config_count:
            raise ScopeError(f"configuration index {index} out of range")
        out = []
        for size in reversed(self.sizes):
            index, d = divmod(index, size)
            out.append(d)
        return tuple(reversed(out))

    def index_of_digits(self, digits: Sequence[int]) -> int:
        idx = 0
        for size, d in zip(self.sizes, digits):
            idx = idx * size + d
        return idx

    def labels_of(self, index: int) -> tuple[str, ...]:
        return tuple(
            self.frame.variables[i][1][d] for i, d in zip(self.indices, self.digits_of(index))
        )

    def index_of_labels(self, labels: Sequence[str]) -> int:
        if len(labels) != len(self.indices):
            raise FrameError(
                f"expected {len(self.indices)} labels for scope {self.variables}, got {len(labels)}"
            )
        digits = []
        for i, label in zip(self.indices, labels):
            name, domain = self.frame.variables[i]
            try:
                digits.append(domain.index(label))
            except ValueError:
                raise FrameError(f"label {label!r} not in domain of {name!r}") from None
        return self.index_of_digits(digits)

    def config_index(self, assignment: Mapping[str, str]) -> int:
        """Mixed-radix index of a full assignment of this scope's variables."""
        names = self.variables
        for key in assignment:
            if key not in names:
                raise FrameError(f"variable {key!r} not in scope {names}")
        missing = [n for n in names if n not in assignment]
        if missing:
            raise FrameError(f"assignment missing variables {missing}")
        return self.index_of_labels([assignment[n] for n in names])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Scope)
            and self.frame == other.frame
            and self.indices == other.indices
        )

    def __hash__(self) -> int:
        return hash((self.frame, self.indices))

    def __repr__(self) -> str:
        return f"Scope({', '.join(self.variables) if self.indices else 'empty'})"


@lru_cache(maxsize=None)
def _projection_table(scope: Scope, target: Scope) -> np.ndarray:
    """Maps every configuration index of ``scope`` to its restriction in ``target``."""
    positions = [scope.indices.index(i) for i in target.indices]
    out = np.empty(scope.config_count, dtype=np.int64)
    for idx in range(scope.config_count):
        digits = scope.digits_of(idx)
        out[idx] = target.index_of_digits([digits[p] for p in positions])
    out.setflags(write=False)
    return out


def _mask_to_bits(mask: int, count: int) -> np.ndarray:
    data = mask.to_bytes((count + 7) // 8, "little")
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
    return bits[:count].astype(bool)


def _bits_to_mask(bits: np.ndarray) -> int:
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


def project_mask(scope: Scope, target: Scope, mask: int) -> int:
    """Restriction of a configuration-set bit mask to a subscope."""
    if target.indices == scope.indices:
        return mask
    table = _projection_table(scope, target)
    if scope.config_count > 64:
        hit = np.zeros(target.config_count, dtype=bool)
        hit[table[_mask_to_bits(mask, scope.config_count)]] = True
        return _bits_to_mask(hit)
    out = 0
    while mask:
        low = mask & -mask
        out |= 1 << int(table[low.bit_length() - 1])
        mask ^= low
    return out


def cylinder_mask(scope: Scope, target: Scope, mask: int) -> int:
    """Cylinder extension of a configuration-set bit mask to a superscope."""
    if target.indices == scope.indices:
        return mask
    table = _projection_table(target, scope)
    if target.config_count > 64:
        src = _mask_to_bits(mask, scope.config_count)
        return _bits_to_mask(src[table])
    out = 0
    for t in range(target.config_count):
        if (mask >> int(table[t])) & 1:
            out |= 1 << t
    return out


class ConfigSet:
    """A subset of a scope's configuration space, stored as a bit mask."""

    __slots__ = ("scope", "mask")

    def __init__(self, scope: Scope, mask: int):
        if not 0 <= mask < (1 << scope.config_count):
            raise ScopeError(f"mask {mask:#x} out of range for {scope!r}")
        self.scope = scope
        self.mask = mask

    @classmethod
    def empty(cls, scope: Scope) -> "ConfigSet":
        return cls(scope, 0)

    @classmethod
    def full(cls, scope: Scope) -> "ConfigSet":
        return cls(scope, (1 << scope.config_count) - 1)

    @classmethod
    def of(cls, scope: Scope, items: Iterable) -> "ConfigSet":
        """Builds a set from configuration indices, label tuples, or assignments."""
        mask = 0
        for item in items:
            if isinstance(item, int):
                if not 0 <= item < scope.config_count:
                    raise ScopeError(f"configuration index {item} out of range")
                mask |= 1 << item
            elif isinstance(item, Mapping):
                mask |= 1 << scope.config_index(item)
            else:
                mask |= 1 << scope.index_of_labels(tuple(item))
        return cls(scope, mask)

    @property
    def cardinality(self) -> int:
        return self.mask.bit_count()

    @property
    def is_empty(self) -> bool:
        return self.mask == 0

    @property
    def is_full(self) -> bool:
        return self.mask == (1 << self.scope.config_count) - 1

    def indices(self) -> Iterator[int]:
        mask = self.mask
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low

    def configs(self) -> Iterator[tuple[str, ...]]:
        for idx in self.indices():
            yield self.scope.labels_of(idx)

    def _require_same_scope(self, other: "ConfigSet") -> None:
        if self.scope != other.scope:
            raise ScopeError("configuration sets live on different scopes")

    def intersection(self, other: "ConfigSet") -> "ConfigSet":
        self._require_same_scope(other)
        return ConfigSet(self.scope, self.mask & other.mask)

    def union(self, other: "ConfigSet") -> "ConfigSet":
        self._require_same_scope(other)
        return ConfigSet(self.scope, self.mask | other.mask)

    def difference(self, other: "ConfigSet") -> "ConfigSet":
        self._require_same_scope(other)
        return ConfigSet(self.scope, self.mask & ~other.mask)

    def issubset(self, other: "ConfigSet") -> bool:
        self._require_same_scope(other)
        return self.mask & ~other.mask == 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ConfigSet)
            and self.scope == other.scope
            and self.mask == other.mask
        )

    def __hash__(self) -> int:
        return hash((self.scope, self.mask))

    def __repr__(self) -> str:
        if self.cardinality <= 6:
            inner = ";".join(".".join(c) for c in self.configs())
        else:
            inner = f"{self.cardinality} configs"
        return f"ConfigSet({inner} over {','.join(self.scope.variables) or 'empty'})"


def project_set(a: ConfigSet, target: Scope) -> ConfigSet:
    """Restricts every configuration in ``a`` to ``target``.

    The projection of a nonempty set is nonempty.
    """
    if not target.is_subscope_of(a.scope):
        raise ScopeError(f"{target!r} is not a subscope of {a.scope!r}")
    return ConfigSet(target, project_mask(a.scope, target, a.mask))


def cylinder_set(a: ConfigSet, target: Scope) -> ConfigSet:
    """Extends ``a`` to ``target`` with all configurations that restrict into it."""
    if not a.scope.is_subscope_of(target):
        raise ScopeError(f"{a.scope!r} is not a subscope of {target!r}")
    return ConfigSet(target, cylinder_mask(a.scope, target, a.mask))


def product_set(parts: Sequence[ConfigSet]) -> ConfigSet:
    """Cartesian product of sets over pairwise disjoint scopes.

    Equals the intersection of the cylinder extensions of the parts.
    """
    if not parts:
        raise ScopeError("product of no parts is undefined")
    frame = parts[0].scope.frame
    seen: set[int] = set()
    for p in parts:
        if p.scope.frame != frame:
            raise ScopeError("product parts live on different frames")
        overlap = seen & set(p.scope.indices)
        if overlap:
            raise ScopeError(f"product parts overlap on variable indices {sorted(overlap)}")
        seen |= set(p.scope.indices)
    target = Scope(frame, seen)
    mask = (1 << target.config_count) - 1
    for p in parts:
        mask &= cylinder_mask(p.scope, target, p.mask)
    return ConfigSet(target, mask)


def is_product(a: ConfigSet) -> bool:
    """True iff ``a`` equals the product of its per-variable projections."""
    if len(a.scope.indices) <= 1:
        return True
    parts = [project_set(a, Scope(a.scope.frame, (i,))) for i in a.scope.indices]
    return product_set(parts).mask == a.mask


def decompose_product(a: ConfigSet) -> tuple[ConfigSet, ...]:
    """Per-variable factors of a product set; raises ValueError otherwise."""
    if not is_product(a):
        raise ValueError("configuration set is not a product of per-variable sets")
    return tuple(project_set(a, Scope(a.scope.frame, (i,))) for i in a.scope.indices)
