"""Complement components and the K1 obstruction bounds.

The plane minus the thickened spectrum is rasterised at pitch ``h/2`` on a
grid aligned to integer multiples of the pitch. A cell is a wall when its
closed square meets a closed ``h``-disc around a point, so gaps shorter
than ``2h`` between consecutive points always seal. Free cells are grouped
by 4-connectivity; the component touching the border is the unbounded one.

K1 classes cannot be read off a finite spectrum, so labels per bounded
component are supplied by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .errors import InconsistentInterval, MissingLabel, ResolutionTooCoarse, ValidationError
from .geometry import as_points, hausdorff


@dataclass
class ComponentMap:
    h: float
    origin: tuple[int, int]
    shape: tuple[int, int]
    labels: np.ndarray
    ids: list[str]
    bounded: list[bool]
    dist_x: np.ndarray
    dist_y: np.ndarray

    @property
    def pitch(self) -> float:
        return self.h / 2

    def centres(self) -> np.ndarray:
        iy, ix = np.indices(self.shape)
        return ((ix + self.origin[0]) + 1j * (iy + self.origin[1])) * self.pitch

    def component_of(self, z: complex) -> str | None:
        ix = round(z.real / self.pitch) - self.origin[0]
        iy = round(z.imag / self.pitch) - self.origin[1]
        if not (0 <= iy < self.shape[0] and 0 <= ix < self.shape[1]):
            return self.ids[0]
        k = self.labels[iy, ix]
        return self.ids[k - 1] if k else None

    def bounded_ids(self) -> list[str]:
        return [i for i, b in zip(self.ids, self.bounded) if b]

    def to_json(self):
        return {
            "h": self.h,
            "grid": {"pitch": self.pitch, "origin": list(self.origin), "shape": list(self.shape)},
            "components": [
                {"id": i, "bounded": b, "cells": int((self.labels == k + 1).sum())}
                for k, (i, b) in enumerate(zip(self.ids, self.bounded))
            ],
        }


def complement_components(X, Y, h: float) -> ComponentMap:
    if not (h > 0 and math.isfinite(h)):
        raise ValidationError("h must be a positive finite number")
    x, y = as_points(X), as_points(Y)
    pts = np.concatenate([x, y])
    if len(pts) == 0:
        raise ValidationError("need at least one point")
    diam = float(np.abs(pts[:, None] - pts[None, :]).max())
    if diam > 0 and h > diam / 4:
        raise ResolutionTooCoarse("wall thickness exceeds a quarter of the support diameter", h=h, diameter=diam)
    g = h / 2
    lo_x = math.floor((pts.real.min() - 4 * h) / g)
    hi_x = math.ceil((pts.real.max() + 4 * h) / g)
    lo_y = math.floor((pts.imag.min() - 4 * h) / g)
    hi_y = math.ceil((pts.imag.max() + 4 * h) / g)
    shape = (hi_y - lo_y + 1, hi_x - lo_x + 1)
    if shape[0] * shape[1] > 40_000_000:
        raise ValidationError("grid too large for this h")
    wall = np.zeros(shape, dtype=bool)
    reach = int(math.ceil(h / g)) + 1
    for p in pts:
        cx, cy = round(p.real / g), round(p.imag / g)
        ix = np.arange(cx - reach, cx + reach + 1)
        iy = np.arange(cy - reach, cy + reach + 1)
        dx = np.maximum(np.abs(ix * g - p.real) - g / 2, 0)
        dy = np.maximum(np.abs(iy * g - p.imag) - g / 2, 0)
        hit = dy[:, None] ** 2 + dx[None, :] ** 2 <= h * h
        wall[iy[0] - lo_y:iy[-1] - lo_y + 1, ix[0] - lo_x:ix[-1] - lo_x + 1] |= hit
    raw, count = ndimage.label(~wall)
    # renumber by first cell in row-major order
    flat = raw.ravel()
    _, first = np.unique(flat, return_index=True)
    order = [int(flat[i]) for i in sorted(first) if flat[i]]
    remap = np.zeros(count + 1, dtype=np.int64)
    for new, old in enumerate(order, start=1):
        remap[old] = new
    labels = remap[raw]
    border = set(np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]])).tolist()) - {0}
    ids = [f"component-{k}" for k in range(len(order))]
    bounded = [k + 1 not in border for k in range(len(order))]
    iy, ix = np.indices(shape)
    c = ((ix + lo_x) + 1j * (iy + lo_y)).ravel() * g
    cxy = np.column_stack([c.real, c.imag])
    dist_x = cKDTree(np.column_stack([x.real, x.imag])).query(cxy)[0].reshape(shape)
    dist_y = cKDTree(np.column_stack([y.real, y.imag])).query(cxy)[0].reshape(shape)
    return ComponentMap(h, (lo_x, lo_y), shape, labels, ids, bounded, dist_x, dist_y)


@dataclass
class K1Labeling:
    labels_x: dict
    labels_y: dict

    @classmethod
    def from_json(cls, obj: dict) -> "K1Labeling":
        lx, ly = {}, {}
        for cid, lab in obj.get("labels", {}).items():
            lx[cid] = tuple(int(v) for v in lab["x"])
            ly[cid] = tuple(int(v) for v in lab["y"])
        return cls(lx, ly)

    def to_json(self):
        return {"labels": {k: {"x": list(self.labels_x[k]), "y": list(self.labels_y[k])} for k in sorted(self.labels_x)}}


def trivial_labeling(cm: ComponentMap) -> K1Labeling:
    return K1Labeling({i: (0,) for i in cm.bounded_ids()}, {i: (0,) for i in cm.bounded_ids()})


def _mismatched(cm: ComponentMap, lab: K1Labeling) -> list[int]:
    known = set(cm.ids)
    for cid in set(lab.labels_x) | set(lab.labels_y):
        if cid not in known:
            raise ValidationError(f"label for unknown component {cid}")
    out = []
    for k, (cid, b) in enumerate(zip(cm.ids, cm.bounded)):
        if not b:
            lx, ly = lab.labels_x.get(cid), lab.labels_y.get(cid)
            if any(v for v in (lx or ())) or any(v for v in (ly or ())):
                raise ValidationError("the unbounded component carries the zero class")
            continue
        if cid not in lab.labels_x or cid not in lab.labels_y:
            raise MissingLabel(f"no label for bounded component {cid}", component=cid)
        if lab.labels_x[cid] != lab.labels_y[cid]:
            out.append(k + 1)
    return out


@dataclass
class RhoValues:
    rho_x: float
    rho_y: float
    rho_1: float
    rho: float
    error_bound: float

    def to_json(self):
        return {"rho_x": self.rho_x, "rho_y": self.rho_y, "rho_1": self.rho_1, "rho": self.rho,
                "error_bound": self.error_bound}


def rho(cm: ComponentMap, lab: K1Labeling, X, Y) -> RhoValues:
    """Obstruction radii over cells of components where the labels differ."""
    bad = _mismatched(cm, lab)
    dH = hausdorff(X, Y)
    if not bad:
        return RhoValues(0.0, 0.0, 0.0, dH, 2 * cm.h)
    mask = np.isin(cm.labels, bad)
    dx, dy = cm.dist_x[mask], cm.dist_y[mask]
    r1 = float((dx + dy).max())
    return RhoValues(float(dx.max()), float(dy.max()), r1, max(dH, r1), 2 * cm.h)


@dataclass
class MT2Bounds:
    D_1: float
    D_2: tuple[float, float]

    def to_json(self):
        return {"D_1": _fin(self.D_1), "D_2": [_fin(self.D_2[0]), _fin(self.D_2[1])]}


def _fin(v):
    return v if math.isfinite(v) else "inf"


def mt2_bounds(report, rho_x: float, rho_y: float) -> MT2Bounds:
    lo, hi = min(rho_x, rho_y), max(rho_x, rho_y)
    D_1 = max(report.D_upper, hi) + lo
    D_2 = (report.dce.lower + 2 * lo, report.dce.upper + 2 * lo)
    return MT2Bounds(D_1, D_2)


@dataclass
class Interval:
    lower: float
    upper: float
    slack: float

    def to_json(self):
        return {"lower": self.lower, "upper": _fin(self.upper), "slack": self.slack}


def mt3_interval(report, rho_values: RhoValues, C: float = 1 / 3, slack: float | None = None) -> Interval:
    """Certified interval for the orbit distance; raises when the labels
    contradict the metrics beyond grid and numerical slack."""
    mt2 = mt2_bounds(report, rho_values.rho_x, rho_values.rho_y)
    lower = max(C * report.D_T, report.d_T, rho_values.rho_1)
    upper = min(mt2.D_1, mt2.D_2[1])
    if slack is None:
        slack = 2 * rho_values.error_bound + report.disc_error_bound + 1e-9
    if lower > upper + slack:
        raise InconsistentInterval("lower bound exceeds upper bound; check the K1 labels",
                                   lower=lower, upper=upper)
    return Interval(lower, upper, slack)
