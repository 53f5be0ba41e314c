"""Finite-spectrum homomorphisms: atoms carrying K0 classes.

A :class:`ModelSpec` describes the ambient algebra through its ordered K0
group, the class of the unit and a rational pairing from K0 to the
extreme traces. An :class:`AtomicHom` is a list of planar atoms, each
carrying a positive K0 class, with classes summing to the unit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import NonPositiveClass, Undecided, UnitMismatch, ValidationError
from .geometry import MERGE_TOL, as_points, merge_labels
from .groups import (
    BratteliLimit,
    GroupElement,
    GroupSpec,
    Positivity,
    Simplicial,
    element_from_json,
    parse_fraction,
    spec_from_json,
)


@dataclass(frozen=True)
class ModelSpec:
    """Ordered K0 data of the ambient algebra.

    ``pairing`` is an ``m x r`` rational matrix sending a class's free part
    (pushed to ``stage_cap`` for Bratteli limits) to its values on the
    ``m`` extreme traces.
    """

    group: GroupSpec
    unit: GroupElement
    pairing: tuple[tuple[Fraction, ...], ...]
    simple: bool = True

    def __post_init__(self):
        pairing = tuple(tuple(parse_fraction(v) for v in row) for row in self.pairing)
        object.__setattr__(self, "pairing", pairing)
        self.group.check(self.unit)
        width = self.group.rank(self._pairing_stage())
        if not pairing or any(len(row) != width for row in pairing):
            raise ValidationError(f"pairing must be an m x {width} matrix")
        if self.group.is_positive(self.unit) is not Positivity.POSITIVE:
            raise ValidationError("unit class must be positive")
        if any(v != 1 for v in self.trace(self.unit)):
            raise ValidationError("pairing must send the unit to the all-ones vector")
        if any(v < 0 for row in pairing for v in row):
            raise ValidationError("pairing must be order preserving (nonnegative entries)")
        if self.simple:
            # generators of the cone must have nonzero trace on every extreme
            # trace, otherwise strict comparison degenerates
            for j in range(width):
                if all(row[j] == 0 for row in pairing):
                    raise ValidationError(f"pairing kills cone generator {j}")

    @property
    def trace_count(self) -> int:
        return len(self.pairing)

    def _pairing_stage(self) -> int:
        return self.group.stage_cap if isinstance(self.group, BratteliLimit) else 1

    def trace(self, g: GroupElement) -> tuple[Fraction, ...]:
        if isinstance(self.group, BratteliLimit):
            free = self.group.push(g.free, g.stage, self.group.stage_cap)
        else:
            free = g.free
        return tuple(sum((q * v for q, v in zip(row, free)), Fraction(0)) for row in self.pairing)

    def to_json(self):
        return {
            "group": self.group.to_json(),
            "unit": self.unit.to_json(),
            "pairing": [[str(q) for q in row] for row in self.pairing],
            "simple": self.simple,
        }


def matrix_model(n: int) -> ModelSpec:
    """``M_n``: one trace, ``K0 = Z``, unit ``n``, pairing ``1/n``."""
    grp = Simplicial(1)
    return ModelSpec(grp, grp.element([n]), ((Fraction(1, n),),))


def model_from_json(obj: dict) -> ModelSpec:
    if "matrix" in obj:
        return matrix_model(int(obj["matrix"]))
    grp = spec_from_json(obj["group"])
    unit = element_from_json(obj["unit"], grp)
    return ModelSpec(grp, unit, tuple(tuple(row) for row in obj["pairing"]), bool(obj.get("simple", True)))


@dataclass(frozen=True)
class AtomicHom:
    points: np.ndarray
    classes: tuple[GroupElement, ...]
    model: ModelSpec

    def __len__(self):
        return len(self.points)

    @property
    def masses(self) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(self.model.trace(c) for c in self.classes)

    def to_json(self):
        return {
            "atoms": [
                {"point": [float(p.real), float(p.imag)], "class": c.to_json()}
                for p, c in zip(self.points, self.classes)
            ]
        }


def _require_positive(g: GroupElement, spec: GroupSpec, index: int) -> None:
    p = spec.is_positive(g)
    if p is Positivity.UNDECIDED:
        raise Undecided(f"positivity of atom {index} undecided at stage_cap")
    if p is not Positivity.POSITIVE:
        raise NonPositiveClass(f"atom {index} has a non-positive class", atom=index)


def make_atomic(
    points,
    classes: Sequence[GroupElement],
    model: ModelSpec,
    merge_tol: float = MERGE_TOL,
) -> AtomicHom:
    """Build and validate a finite-spectrum homomorphism.

    Points closer than ``merge_tol`` are merged and their classes added.
    """
    z = as_points(points)
    if len(z) == 0:
        raise ValidationError("an atomic homomorphism needs at least one atom")
    if len(z) != len(classes):
        raise ValidationError("points and classes differ in length")
    spec = model.group
    for i, c in enumerate(classes):
        spec.check(c)
        _require_positive(c, spec, i)
    labels = merge_labels(z, merge_tol)
    pts, merged = [], []
    for k in range(labels.max() + 1):
        idx = np.flatnonzero(labels == k)
        pts.append(z[idx[0]])
        merged.append(spec.total([classes[i] for i in idx], stage=min(classes[i].stage for i in idx)))
    total = spec.total(merged)
    p = spec.is_positive(spec.sub(total, model.unit))
    if p is Positivity.UNDECIDED:
        raise Undecided("unit equality undecided at stage_cap")
    if p is not Positivity.ZERO:
        raise UnitMismatch("classes do not sum to the unit")
    pts = np.array(pts, dtype=complex)
    pts.setflags(write=False)
    return AtomicHom(pts, tuple(merged), model)


def atomic_from_json(obj: dict, model: ModelSpec, merge_tol: float = MERGE_TOL) -> AtomicHom:
    atoms = obj["atoms"]
    points = [a["point"] for a in atoms]
    classes = [element_from_json(a["class"], model.group) for a in atoms]
    return make_atomic(np.asarray(points, dtype=float).reshape(-1, 2), classes, model, merge_tol)


def trace_mass(h: AtomicHom, A, model: ModelSpec | None = None) -> tuple[Fraction, ...]:
    """Exact trace mass of the atoms indexed by ``A``."""
    model = model or h.model
    out = [Fraction(0)] * model.trace_count
    for i in A:
        for s, v in enumerate(model.trace(h.classes[i])):
            out[s] += v
    return tuple(out)


def from_spectrum(values, multiplicities, n: int | None = None) -> AtomicHom:
    """Atomic homomorphism into ``M_n`` from eigenvalues with multiplicities."""
    mult = [int(k) for k in multiplicities]
    n = n or sum(mult)
    model = matrix_model(n)
    return make_atomic(values, [model.group.element([k]) for k in mult], model)
