"""Ordered abelian groups used as K0 data.

Three presentations are supported:

* :class:`Simplicial` -- ``Z^k`` with the coordinatewise cone.
* :class:`TorsionExtended` -- ``Z^k + Z/o_1 + ... + Z/o_t`` with the strict
  cone ``{(s, f) : s >= 0, s != 0} u {(0, 0)}``.
* :class:`BratteliLimit` -- an inductive limit of simplicial groups given by
  nonnegative integer connecting matrices, truncated at ``stage_cap``.

Positivity is tri-state in a Bratteli limit: an element that is neither
eventually positive nor eventually negative by ``stage_cap`` is reported as
undecided rather than guessed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, StageOutOfRange, Undecided, ValidationError


class Positivity(enum.Enum):
    POSITIVE = "positive"
    ZERO = "zero"
    NOT_POSITIVE = "not_positive"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class GroupElement:
    free: tuple[int, ...]
    torsion: tuple[int, ...] = ()
    stage: int = 1

    def __post_init__(self):
        object.__setattr__(self, "free", tuple(int(v) for v in self.free))
        object.__setattr__(self, "torsion", tuple(int(v) for v in self.torsion))

    def to_json(self):
        out = {"free": list(self.free)}
        if self.torsion:
            out["torsion"] = list(self.torsion)
        if self.stage != 1:
            out["stage"] = self.stage
        return out


def _int_array(rows) -> np.ndarray:
    arr = np.array(rows, dtype=object)
    if arr.size and max(abs(int(v)) for v in arr.flat) < 2**62:
        return arr.astype(np.int64)
    return arr


class GroupSpec:
    """Base class; subclasses implement the cone and the embedding used for
    batched comparisons."""

    kind = ""

    # -- construction helpers -------------------------------------------
    def element(self, free, torsion=(), stage=1) -> GroupElement:
        g = GroupElement(tuple(free), tuple(torsion), stage)
        return self.normalize(g)

    def zero(self, stage=1) -> GroupElement:
        return self.element([0] * self.rank(stage), [0] * len(self.orders), stage)

    @property
    def orders(self) -> tuple[int, ...]:
        return ()

    def rank(self, stage: int = 1) -> int:
        raise NotImplementedError

    def normalize(self, g: GroupElement) -> GroupElement:
        self.check(g)
        return g

    def check(self, g: GroupElement) -> None:
        if len(g.free) != self.rank(g.stage):
            raise DimensionMismatch(
                f"free part has length {len(g.free)}, expected {self.rank(g.stage)}"
            )
        if len(g.torsion) != len(self.orders):
            raise DimensionMismatch(
                f"torsion part has length {len(g.torsion)}, expected {len(self.orders)}"
            )

    # -- arithmetic -------------------------------------------------------
    def add(self, a: GroupElement, b: GroupElement) -> GroupElement:
        s = max(a.stage, b.stage)
        fa, fb = self._at(a, s), self._at(b, s)
        tors = [(x + y) % o for x, y, o in zip(a.torsion, b.torsion, self.orders)]
        return self.element([x + y for x, y in zip(fa, fb)], tors, s)

    def neg(self, a: GroupElement) -> GroupElement:
        tors = [(-x) % o for x, o in zip(a.torsion, self.orders)]
        return self.element([-x for x in a.free], tors, a.stage)

    def sub(self, a: GroupElement, b: GroupElement) -> GroupElement:
        return self.add(a, self.neg(b))

    def total(self, elements: Sequence[GroupElement], stage=None) -> GroupElement:
        acc = self.zero(stage or 1)
        for g in elements:
            acc = self.add(acc, g)
        return acc

    def scale(self, n: int, g: GroupElement) -> GroupElement:
        tors = [(n * x) % o for x, o in zip(g.torsion, self.orders)]
        return self.element([n * x for x in g.free], tors, g.stage)

    def equal(self, a: GroupElement, b: GroupElement) -> bool:
        return self.is_positive(self.sub(a, b)) is Positivity.ZERO

    def _at(self, g: GroupElement, stage: int) -> list[int]:
        return list(g.free)

    # -- order ------------------------------------------------------------
    def is_positive(self, g: GroupElement) -> Positivity:
        raise NotImplementedError

    def leq(self, a: GroupElement, b: GroupElement):
        """``True``/``False`` when decided, ``None`` when undecided."""
        p = self.is_positive(self.sub(b, a))
        if p is Positivity.UNDECIDED:
            return None
        return p in (Positivity.POSITIVE, Positivity.ZERO)

    # -- batched comparisons ---------------------------------------------
    def embed(self, elements: Sequence[GroupElement]) -> np.ndarray:
        """Integer rows whose partial sums can be compared by
        :meth:`leq_rows`."""
        raise NotImplementedError

    def leq_rows(self, lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        """Vectorised ``lhs <= rhs`` over the last axis of embedded rows."""
        raise NotImplementedError

    def flow_coordinates(self, elements: Sequence[GroupElement]) -> np.ndarray:
        """Nonnegative integer coordinates for per-coordinate max-flow."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Simplicial(GroupSpec):
    k: int
    kind = "simplicial"

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("simplicial rank must be >= 1")

    def rank(self, stage=1):
        return self.k

    def is_positive(self, g):
        self.check(g)
        if all(v == 0 for v in g.free):
            return Positivity.ZERO
        if all(v >= 0 for v in g.free):
            return Positivity.POSITIVE
        return Positivity.NOT_POSITIVE

    def embed(self, elements):
        return _int_array([list(g.free) for g in elements]).reshape(len(elements), self.k)

    def leq_rows(self, lhs, rhs):
        return np.all(rhs - lhs >= 0, axis=-1)

    def flow_coordinates(self, elements):
        return self.embed(elements)

    def to_json(self):
        return {"kind": "simplicial", "k": self.k}


@dataclass(frozen=True)
class TorsionExtended(GroupSpec):
    k: int
    torsion_orders: tuple[int, ...]
    kind = "torsion"

    def __post_init__(self):
        object.__setattr__(self, "torsion_orders", tuple(int(o) for o in self.torsion_orders))
        if self.k < 1:
            raise ValidationError("free rank must be >= 1")
        if any(o < 2 for o in self.torsion_orders):
            raise ValidationError("torsion orders must be >= 2")

    @property
    def orders(self):
        return self.torsion_orders

    def rank(self, stage=1):
        return self.k

    def normalize(self, g):
        self.check(g)
        tors = tuple(t % o for t, o in zip(g.torsion, self.orders))
        return GroupElement(g.free, tors, g.stage)

    def is_positive(self, g):
        self.check(g)
        free_zero = all(v == 0 for v in g.free)
        if free_zero and all(t % o == 0 for t, o in zip(g.torsion, self.orders)):
            return Positivity.ZERO
        if not free_zero and all(v >= 0 for v in g.free):
            return Positivity.POSITIVE
        return Positivity.NOT_POSITIVE

    def embed(self, elements):
        rows = [list(g.free) + list(g.torsion) for g in elements]
        return _int_array(rows).reshape(len(elements), self.k + len(self.orders))

    def leq_rows(self, lhs, rhs):
        diff = rhs - lhs
        free, tors = diff[..., : self.k], diff[..., self.k :]
        orders = np.asarray(self.orders, dtype=np.int64)
        free_zero = np.all(free == 0, axis=-1)
        tors_zero = np.all(tors % orders == 0, axis=-1) if len(self.orders) else True
        positive = np.all(free >= 0, axis=-1) & ~free_zero
        return positive | (free_zero & tors_zero)

    def flow_coordinates(self, elements):
        return _int_array([list(g.free) for g in elements]).reshape(len(elements), self.k)

    def to_json(self):
        return {"kind": "torsion", "k": self.k, "orders": list(self.orders)}


@dataclass(frozen=True)
class BratteliLimit(GroupSpec):
    """Inductive limit ``Z^{r(1)} -> Z^{r(2)} -> ...``.

    ``maps[n-1]`` carries stage ``n`` to stage ``n+1`` and has shape
    ``(r(n+1), r(n))``. When fewer maps than ``stage_cap - 1`` are given the
    last one is repeated (a stationary tail).
    """

    maps: tuple = field(default=())
    stage_cap: int = 1
    kind = "bratteli"

    def __post_init__(self):
        mats = tuple(tuple(tuple(int(v) for v in row) for row in m) for m in self.maps)
        object.__setattr__(self, "maps", mats)
        if not mats:
            raise ValidationError("bratteli presentation needs at least one connecting map")
        if self.stage_cap < 1:
            raise ValidationError("stage_cap must be >= 1")
        for n, m in enumerate(mats):
            cols = {len(row) for row in m}
            if len(cols) != 1:
                raise ValidationError(f"connecting map {n} is ragged")
            if any(v < 0 for row in m for v in row):
                raise ValidationError(f"connecting map {n} has a negative entry")
            for j in range(len(m[0])):
                if all(row[j] == 0 for row in m):
                    raise ValidationError(f"connecting map {n} has a zero column {j}")
            if n + 1 < len(mats) and len(mats[n + 1][0]) != len(m):
                raise ValidationError(f"connecting maps {n} and {n + 1} do not compose")
        last = mats[-1]
        if len(mats) < self.stage_cap - 1 and len(last) != len(last[0]):
            raise ValidationError("a repeated tail map must be square")

    def map_at(self, stage: int) -> np.ndarray:
        m = self.maps[min(stage, len(self.maps)) - 1]
        return np.array(m, dtype=object)

    def rank(self, stage=1):
        if stage < 1 or stage > self.stage_cap:
            raise StageOutOfRange(f"stage {stage} outside 1..{self.stage_cap}")
        if stage == 1:
            return len(self.maps[0][0])
        return len(self.maps[min(stage - 1, len(self.maps)) - 1])

    def push(self, free: Sequence[int], start: int, stop: int) -> list[int]:
        if stop < start or stop > self.stage_cap or start < 1:
            raise StageOutOfRange(f"cannot push from stage {start} to {stop}")
        v = np.array(list(free), dtype=object)
        for s in range(start, stop):
            v = self.map_at(s).dot(v)
        return [int(x) for x in v]

    def _at(self, g, stage):
        return self.push(g.free, g.stage, stage)

    def is_positive(self, g):
        self.check(g)
        v = list(g.free)
        s = g.stage
        while True:
            if all(x == 0 for x in v):
                return Positivity.ZERO
            if all(x >= 0 for x in v):
                return Positivity.POSITIVE
            if all(x <= 0 for x in v):
                return Positivity.NOT_POSITIVE
            if s >= self.stage_cap:
                return Positivity.UNDECIDED
            v = self.push(v, s, s + 1)
            s += 1

    def embed(self, elements):
        rows = [self.push(g.free, g.stage, self.stage_cap) for g in elements]
        return _int_array(rows).reshape(len(elements), self.rank(self.stage_cap))

    def leq_rows(self, lhs, rhs):
        diff = rhs - lhs
        ok = np.all(diff >= 0, axis=-1)
        refuted = np.all(diff <= 0, axis=-1)
        if np.any(~ok & ~refuted):
            raise Undecided(
                "comparison not decided by stage_cap; raise stage_cap",
                stage_cap=self.stage_cap,
            )
        return ok

    def flow_coordinates(self, elements):
        return self.embed(elements)

    def to_json(self):
        return {
            "kind": "bratteli",
            "maps": [[list(row) for row in m] for m in self.maps],
            "stage_cap": self.stage_cap,
        }


def is_positive(g: GroupElement, spec: GroupSpec) -> Positivity:
    return spec.is_positive(g)


def leq(a: GroupElement, b: GroupElement, spec: GroupSpec):
    return spec.leq(a, b)


def push_to_stage(g: GroupElement, spec: GroupSpec, n: int) -> list[int]:
    if not isinstance(spec, BratteliLimit):
        if n != g.stage:
            raise StageOutOfRange("only Bratteli presentations have stages")
        return list(g.free)
    if n < g.stage:
        raise StageOutOfRange(f"stage {n} precedes element stage {g.stage}")
    return spec.push(g.free, g.stage, n)


def spec_from_json(obj: dict) -> GroupSpec:
    kind = obj.get("kind")
    if kind == "simplicial":
        return Simplicial(int(obj["k"]))
    if kind == "torsion":
        return TorsionExtended(int(obj["k"]), tuple(obj["orders"]))
    if kind == "bratteli":
        return BratteliLimit(tuple(obj["maps"]), int(obj["stage_cap"]))
    raise ValidationError(f"unknown group kind {kind!r}")


def element_from_json(obj: dict, spec: GroupSpec) -> GroupElement:
    g = GroupElement(tuple(obj["free"]), tuple(obj.get("torsion", ())), int(obj.get("stage", 1)))
    return spec.normalize(g)


# -- trace weights ----------------------------------------------------------


def parse_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        raise ValidationError("rationals must be given as integers or 'p/q' strings")
    return Fraction(v)


def format_fraction(q: Fraction) -> str:
    return str(q)


def trace_leq(a: Sequence[Fraction], b: Sequence[Fraction]) -> bool:
    return all(x <= y for x, y in zip(a, b))


def trace_lt(a: Sequence[Fraction], b: Sequence[Fraction]) -> bool:
    return all(x < y for x, y in zip(a, b))


def common_denominator(rows: Sequence[Sequence[Fraction]]) -> int:
    den = 1
    for row in rows:
        for q in row:
            den = den * q.denominator // np.gcd(den, q.denominator)
    return int(den)


def scale_to_integers(rows: Sequence[Sequence[Fraction]]) -> tuple[np.ndarray, int]:
    """Scale rational rows to integers by one common denominator."""
    den = common_denominator(rows)
    ints = [[int(q * den) for q in row] for row in rows]
    return _int_array(ints).reshape(len(rows), len(rows[0]) if rows else 0), den
