"""Set-valued datasets: estimation, sampling, conditioning, and file I/O.

A dataset is an ordered multiset of records over a frame's full scope; each
record is one nonempty configuration set, the most specific commitment made
for one observed object.  Relative frequencies of records define an
empirical mass function, and conditioning a dataset on an event rejects the
records disjoint from it and intersects the rest with it.  The headline
property (tested exhaustively in the suite) is that conditioning the
dataset and conditioning its empirical mass function commute exactly.

Dataset file format (line oriented, UTF-8)::

    #vars X=a|b,Y=c|d          header; declaration order fixes the bit layout
    a|b,c                      product record: per-variable sets, ','-separated
    J:a.c;b.d                  general record: explicit configuration list
    # free comment             blank lines and '#' comments are ignored

Malformed rows are hard errors carrying their line number.
"""

from __future__ import annotations

import os
import tempfile
from collections import Counter
from functools import lru_cache
from typing import Iterable

import numpy as np

from .errors import FormatError, ImpossibleEventError, MassError, ScopeError
from .frames import (
    ConfigSet,
    Frame,
    Scope,
    cylinder_set,
    decompose_product,
    is_product,
    product_set,
    project_mask,
)
from .mass import MassFunction


class Dataset:
    """An immutable, ordered multiset of records over a frame's full scope."""

    __slots__ = ("frame", "records", "provenance")

    def __init__(self, frame: Frame, records: Iterable[ConfigSet], provenance: str = ""):
        recs = tuple(records)
        if not recs:
            raise MassError("a dataset needs at least one record")
        full = frame.full_scope
        for r in recs:
            if r.scope != full:
                raise ScopeError("records must be scoped to the frame's full scope")
            if r.is_empty:
                raise MassError("records must be nonempty")
        self.frame = frame
        self.records = recs
        self.provenance = provenance

    def __len__(self) -> int:
        return len(self.records)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Dataset)
            and self.frame == other.frame
            and self.records == other.records
        )

    def __repr__(self) -> str:
        return f"Dataset({len(self.records)} records over {self.frame!r})"


# Record masks repeat heavily across scope requests; memoize their projections.
@lru_cache(maxsize=65536)
def _project_record(scope: Scope, target: Scope, mask: int) -> int:
    if not target.is_subscope_of(scope):
        raise ScopeError(f"{target!r} is not a subscope of {scope!r}")
    return project_mask(scope, target, mask)


def empirical_mass(ds: Dataset, scope: Scope) -> MassFunction:
    """Relative frequencies of record projections onto ``scope``; always proper."""
    n = len(ds.records)
    counts: Counter[int] = Counter(r.mask for r in ds.records)
    entries: dict[int, float] = {}
    for mask, count in counts.items():
        p = _project_record(ds.frame.full_scope, scope, mask)
        entries[p] = entries.get(p, 0.0) + count / n
    return MassFunction(scope, entries)


def sample_dataset(m: MassFunction, n: int, seed: int) -> Dataset:
    """Draws ``n`` records i.i.d. with probability equal to focal mass.

    Uses NumPy's PCG64 generator seeded with ``seed``; identical arguments
    produce identical datasets.  Only proper mass functions over the frame's
    full scope can be sampled.
    """
    if not m.is_proper:
        raise MassError("cannot sample from a pseudo mass function")
    frame = m.scope.frame
    if m.scope != frame.full_scope:
        raise ScopeError("sampling requires a mass function over the full frame scope")
    if n < 1:
        raise MassError("sample size must be at least 1")
    masks = m.focal_masks()
    probs = np.array([m.mass_of(mask) for mask in masks], dtype=np.float64)
    probs /= probs.sum()
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(masks), size=n, p=probs)
    full = frame.full_scope
    records = tuple(ConfigSet(full, masks[i]) for i in picks)
    return Dataset(frame, records, provenance=f"sampled seed={seed} n={n}")


def condition_dataset(ds: Dataset, event: ConfigSet) -> Dataset:
    """Rejects records disjoint from the event; intersects the survivors with it."""
    full = ds.frame.full_scope
    b = cylinder_set(event, full)
    if b.is_empty:
        raise ImpossibleEventError("conditioning on the empty event")
    kept = []
    for r in ds.records:
        inter = r.mask & b.mask
        if inter:
            kept.append(ConfigSet(full, inter))
    if not kept:
        raise ImpossibleEventError("event rejects every record in the dataset")
    return Dataset(ds.frame, kept, provenance=f"{ds.provenance} | conditioned")


# ---------------------------------------------------------------------------
# text formats


def atomic_write_text(path: str, text: str) -> None:
    """Writes via a temporary file in the same directory, then renames."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_frame_decl(frame: Frame) -> str:
    return ",".join(f"{name}={'|'.join(domain)}" for name, domain in frame.variables)


def parse_frame_decl(text: str) -> Frame:
    pairs = []
    for chunk in text.split(","):
        if "=" not in chunk:
            raise FormatError(f"variable declaration {chunk!r} lacks '='")
        name, _, values = chunk.partition("=")
        pairs.append((name.strip(), [v.strip() for v in values.split("|")]))
    try:
        return Frame(pairs)
    except Exception as exc:
        raise FormatError(f"bad frame declaration: {exc}") from exc


def format_configs_expr(a: ConfigSet) -> str:
    """';'-separated '.'-joined label tuples, ascending configuration index."""
    return ";".join(".".join(labels) for labels in a.configs())


def parse_configs_expr(scope: Scope, text: str) -> ConfigSet:
    if not text.strip():
        raise FormatError("empty configuration-set expression")
    mask = 0
    for chunk in text.split(";"):
        labels = chunk.strip().split(".")
        try:
            mask |= 1 << scope.index_of_labels(labels)
        except Exception as exc:
            raise FormatError(f"bad configuration {chunk!r}: {exc}") from exc
    return ConfigSet(scope, mask)


def _format_record(frame: Frame, record: ConfigSet) -> str:
    if is_product(record):
        parts = decompose_product(record)
        return ",".join("|".join(lbl for (lbl,) in part.configs()) for part in parts)
    return "J:" + format_configs_expr(record)


def _parse_record(frame: Frame, row: str) -> ConfigSet:
    full = frame.full_scope
    if row.startswith("J:"):
        return parse_configs_expr(full, row[2:])
    chunks = row.split(",")
    if len(chunks) != len(frame.variables):
        raise FormatError(
            f"expected {len(frame.variables)} per-variable sets, got {len(chunks)}"
        )
    parts = []
    for (name, domain), chunk in zip(frame.variables, chunks):
        labels = [v.strip() for v in chunk.split("|")]
        scope = frame.scope([name])
        try:
            parts.append(ConfigSet.of(scope, [(lbl,) for lbl in labels]))
        except Exception as exc:
            raise FormatError(f"bad value set {chunk!r} for {name!r}: {exc}") from exc
    return product_set(parts)


def write_dataset(ds: Dataset, path: str) -> None:
    lines = [f"#vars {format_frame_decl(ds.frame)}"]
    rendered: dict[int, str] = {}
    for record in ds.records:
        row = rendered.get(record.mask)
        if row is None:
            row = _format_record(ds.frame, record)
            rendered[record.mask] = row
        lines.append(row)
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_dataset(path: str) -> Dataset:
    frame: Frame | None = None
    records: list[ConfigSet] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#vars"):
                if frame is not None:
                    raise FormatError(f"{path}:{lineno}: duplicate #vars header")
                frame = parse_frame_decl(line[len("#vars"):].strip())
                continue
            if line.startswith("#"):
                continue
            if frame is None:
                raise FormatError(f"{path}:{lineno}: record before #vars header")
            try:
                record = _parse_record(frame, line)
            except FormatError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
            if record.is_empty:
                raise FormatError(f"{path}:{lineno}: record denotes the empty set")
            records.append(record)
    if frame is None:
        raise FormatError(f"{path}: missing #vars header")
    if not records:
        raise FormatError(f"{path}: dataset has no records")
    return Dataset(frame, records, provenance=f"file {os.path.basename(path)}")


def parse_event(frame: Frame, text: str) -> ConfigSet:
    """Parses a conditioning event.

    Either per-variable constraints like ``X=a|b,Y=c`` (a product event over
    the mentioned variables) or ``J:`` followed by an explicit configuration
    list over the full frame.
    """
    text = text.strip()
    if not text:
        raise FormatError("empty event expression")
    if text.startswith("J:"):
        return parse_configs_expr(frame.full_scope, text[2:])
    parts = []
    seen: set[str] = set()
    for chunk in text.split(","):
        if "=" not in chunk:
            raise FormatError(f"event constraint {chunk!r} lacks '='")
        name, _, values = chunk.partition("=")
        name = name.strip()
        if name in seen:
            raise FormatError(f"variable {name!r} constrained twice")
        seen.add(name)
        try:
            scope = frame.scope([name])
            labels = [v.strip() for v in values.split("|")]
            parts.append(ConfigSet.of(scope, [(lbl,) for lbl in labels]))
        except Exception as exc:
            raise FormatError(f"bad constraint {chunk!r}: {exc}") from exc
    return product_set(parts)
