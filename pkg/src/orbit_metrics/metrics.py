"""Spectral transport metrics between finite-spectrum homomorphisms.

``D_T`` and ``D_c`` are bottleneck radii of the trace order and the K0
order. ``D^T`` asks for *strict* growth of trace mass on every proper
subset. The disc variants ``d_T`` and ``d_c`` only test open discs and are
evaluated by scanning disc centres.

Why subsets suffice: for atomic measures the mass of an open set ``O``
depends only on which atoms it contains, and shrinking ``O`` to a small
neighbourhood of ``A = O n supp(mu)`` keeps ``mu(O)`` while only shrinking
``nu(O_r)``. The extremal open sets are therefore neighbourhoods of atom
subsets, and ``nu(O_r)`` becomes the mass of atoms within ``r`` of ``A``.
Infima over open dilations are attained at the closed threshold.

Disc scans: for a centre ``lam`` the worst disc needs
``max_i (s_i - t_i)`` where ``t_i = |lam - x_i|`` and ``s_i`` is the least
``|lam - y_j|`` whose closed disc carries at least the mass inside radius
``t_i``. The value is 2-Lipschitz in ``lam``, so a pitch-``h`` grid is off
by at most ``sqrt(2) h``. Support points and far-field half-planes are
always added as centres; every evaluated centre is a genuine disc (or a
limit of discs), so the scan never overestimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .atomic import AtomicHom
from .errors import InvalidPitch, ValidationError
from .geometry import (
    directed_hausdorff,
    eps_components,
    hausdorff,
    pairwise_distances,
    set_distance,
)
from .groups import scale_to_integers
from .transport import (
    PairRelation,
    bottleneck,
    candidate_radii,
    first_feasible,
    strict_hall_check,
)

DEFAULT_PITCH = 0.05
DEFAULT_TOL = 1e-9
FAR_FIELD_DIRECTIONS = 720
_CHUNK = 4_000_000


def _same_model(phi: AtomicHom, psi: AtomicHom):
    if phi.model != psi.model:
        raise ValidationError("both homomorphisms must share one model")


def metric_DT(phi: AtomicHom, psi: AtomicHom) -> float:
    _same_model(phi, psi)
    return bottleneck(phi, psi, order="trace", with_plan=False).radius


def metric_Dc(phi: AtomicHom, psi: AtomicHom) -> float:
    _same_model(phi, psi)
    return bottleneck(phi, psi, order="group", with_plan=False).radius


def metric_D_upper(phi: AtomicHom, psi: AtomicHom) -> float:
    """Strict-growth metric; ``inf`` if some proper subset never gains mass."""
    _same_model(phi, psi)
    a_term = directed_hausdorff(psi.points, phi.points)
    if len(phi) < 2:
        return a_term
    D = pairwise_distances(phi.points, psi.points)
    cands = candidate_radii(phi.points, psi.points)
    a, b = list(phi.masses), list(psi.masses)

    def strict(r):
        return strict_hall_check(a, b, PairRelation.from_mask(D <= r))

    if not strict(cands[-1]):
        return math.inf
    return max(a_term, float(cands[first_feasible(cands, strict)]))


# -- disc scans ------------------------------------------------------------------


def _delta_rows(dx, dy, wx, wy, leq_rows) -> np.ndarray:
    """Per-centre worst disc defect. ``dx`` (G, m), ``dy`` (G, n) are
    distance-like arrays; ``wx`` (m, k), ``wy`` (n, k) embedded weights."""
    G, m = dx.shape
    n = dy.shape[1]
    k = wx.shape[1]
    out = np.empty(G)
    step = max(1, _CHUNK // max(1, m * n * k))
    for lo in range(0, G, step):
        sx = np.argsort(dx[lo:lo + step], axis=1, kind="stable")
        sy = np.argsort(dy[lo:lo + step], axis=1, kind="stable")
        tx = np.take_along_axis(dx[lo:lo + step], sx, axis=1)
        ty = np.take_along_axis(dy[lo:lo + step], sy, axis=1)
        cx = np.cumsum(wx[sx], axis=1)
        cy = np.cumsum(wy[sy], axis=1)
        ok = leq_rows(cx[:, :, None, :], cy[:, None, :, :])
        first = np.argmax(ok, axis=2)
        s = np.take_along_axis(ty, first, axis=1)
        out[lo:lo + step] = np.maximum(s - tx, 0.0).max(axis=1)
    return out


def disc_centres(X, Y, pitch: float, exact: bool = False) -> np.ndarray:
    """Grid over the joint bounding box inflated by the diameter, plus the
    support points (and extra analytic centres when ``exact``)."""
    if not pitch > 0 or not math.isfinite(pitch):
        raise InvalidPitch("grid pitch must be a positive finite number")
    pts = np.concatenate([X, Y])
    diam = float(np.abs(pts[:, None] - pts[None, :]).max())
    pad = max(diam, pitch)
    lo_re, hi_re = pts.real.min() - pad, pts.real.max() + pad
    lo_im, hi_im = pts.imag.min() - pad, pts.imag.max() + pad
    gx = np.arange(math.floor(lo_re / pitch), math.ceil(hi_re / pitch) + 1) * pitch
    gy = np.arange(math.floor(lo_im / pitch), math.ceil(hi_im / pitch) + 1) * pitch
    if len(gx) * len(gy) > 50_000_000:
        raise InvalidPitch("grid pitch too fine for the support diameter")
    grid = (gx[None, :] + 1j * gy[:, None]).ravel()
    extra = [pts]
    if exact:
        extra.append(_analytic_centres(X, Y, pitch))
    return np.concatenate([grid] + extra)


def _analytic_centres(X, Y, pitch):
    pts = np.concatenate([X, Y])
    out = [(pts[:, None] + pts[None, :]).ravel() / 2]
    # just past each x along the ray from each y, where |lam-y|-|lam-x| peaks
    for src, dst in ((X, Y), (Y, X)):
        d = src[:, None] - dst[None, :]
        nz = np.abs(d) > 0
        u = np.where(nz, d / np.where(nz, np.abs(d), 1), 0)
        for eps in (1e-9, pitch / 8, pitch / 2):
            out.append((src[:, None] + eps * u).ravel())
    if len(pts) <= 40:
        a, b, c = np.meshgrid(pts, pts, pts, indexing="ij")
        sel = np.triu(np.ones((len(pts),) * 2, dtype=bool), 1)
        a, b, c = a.ravel(), b.ravel(), c.ravel()
        den = 2 * ((a.real * (b.imag - c.imag) + b.real * (c.imag - a.imag) + c.real * (a.imag - b.imag)))
        good = np.abs(den) > 1e-12
        ax, ay, bx, by, cx, cy = a.real, a.imag, b.real, b.imag, c.real, c.imag
        ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay) + (cx**2 + cy**2) * (ay - by))
        uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx) + (cx**2 + cy**2) * (bx - ax))
        cc = (ux[good] + 1j * uy[good]) / den[good]
        out.append(cc)
        del sel
    return np.concatenate(out)


def _far_field(X, Y) -> tuple[np.ndarray, np.ndarray]:
    """Projections standing in for discs whose centres recede to infinity."""
    theta = np.linspace(0, 2 * np.pi, FAR_FIELD_DIRECTIONS, endpoint=False)
    dirs = [np.exp(1j * theta)]
    d = (X[:, None] - Y[None, :]).ravel()
    d = d[np.abs(d) > 0]
    if len(d):
        dirs += [d / np.abs(d), -d / np.abs(d)]
    u = np.concatenate(dirs)
    # distance from lam = -R u is R + <p, u> + O(1/R)
    px = (np.conj(u)[:, None] * X[None, :]).real
    py = (np.conj(u)[:, None] * Y[None, :]).real
    return px, py


def _disc_delta(X, Y, wx, wy, leq_rows, centres) -> float:
    dx = np.abs(centres[:, None] - X[None, :])
    dy = np.abs(centres[:, None] - Y[None, :])
    best = _delta_rows(dx, dy, wx, wy, leq_rows).max()
    px, py = _far_field(X, Y)
    return float(max(best, _delta_rows(px, py, wx, wy, leq_rows).max()))


def _trace_embedding(phi, psi):
    rows, _ = scale_to_integers([list(w) for w in list(phi.masses) + list(psi.masses)])
    rows = rows.astype(np.int64) if rows.dtype == object else rows
    return rows[: len(phi)], rows[len(phi):], lambda lhs, rhs: np.all(rhs - lhs >= 0, axis=-1)


def _group_embedding(phi, psi):
    spec = phi.model.group
    return spec.embed(list(phi.classes)), spec.embed(list(psi.classes)), spec.leq_rows


def _disc_metric(phi, psi, embedding, pitch, exact):
    _same_model(phi, psi)
    X, Y = np.asarray(phi.points), np.asarray(psi.points)
    centres = disc_centres(X, Y, pitch, exact)
    wx, wy, leq_rows = embedding(phi, psi)
    forward = _disc_delta(X, Y, wx, wy, leq_rows, centres)
    backward = _disc_delta(Y, X, wy, wx, leq_rows, centres)
    return max(forward, backward)


def metric_dT(phi, psi, pitch: float = DEFAULT_PITCH, exact: bool = False) -> float:
    """Disc metric in trace order; a lower estimate within ``2 * pitch``."""
    return _disc_metric(phi, psi, _trace_embedding, pitch, exact)


def metric_dc(phi, psi, pitch: float = DEFAULT_PITCH, exact: bool = False) -> float:
    """Disc metric in K0 order; a lower estimate within ``2 * pitch``."""
    return _disc_metric(phi, psi, _group_embedding, pitch, exact)


# -- anchored variant ---------------------------------------------------------------


@dataclass
class Hub:
    found: bool
    condition: int | None = None
    approximate: bool = False

    def to_json(self):
        if not self.found:
            return {"status": "unknown"}
        return {"status": "yes", "condition": self.condition, "approximate": self.approximate}


def _intersection(X, Y, tol):
    return X[pairwise_distances(X, Y).min(axis=1) <= tol]


def _covering_radius(S, tol, reach, max_cells=1_000_000) -> float | None:
    """Largest ``r`` with a disc ``B(c, r)``, ``c`` in ``S``, all of whose
    grid points lie within ``tol`` of ``S``. ``None`` if too costly."""
    pitch = tol / 2
    lo_re, hi_re = S.real.min() - reach - tol, S.real.max() + reach + tol
    lo_im, hi_im = S.imag.min() - reach - tol, S.imag.max() + reach + tol
    nx_, ny_ = int((hi_re - lo_re) / pitch) + 2, int((hi_im - lo_im) / pitch) + 2
    if nx_ * ny_ > max_cells:
        return None
    g = (lo_re + pitch * np.arange(nx_))[None, :] + 1j * (lo_im + pitch * np.arange(ny_))[:, None]
    g = g.ravel()
    uncovered = g[np.abs(g[:, None] - S[None, :]).min(axis=1) > tol]
    if len(uncovered) == 0:
        return math.inf
    return float(np.abs(S[:, None] - uncovered[None, :]).min(axis=1).max())


def has_hub(phi, psi, tol: float = DEFAULT_TOL, Dc: float | None = None) -> Hub:
    """Sufficient conditions for a hub at the overlap of the supports,
    checked at tolerance ``tol``. Condition 2 uses a covering-radius
    surrogate for "contains a ball of radius D_c" and is flagged approximate."""
    X, Y = np.asarray(phi.points), np.asarray(psi.points)
    if Dc is None:
        Dc = metric_Dc(phi, psi)
    if hausdorff(X, Y) <= tol and len(eps_components(X, tol)) == 1:
        return Hub(True, 1)
    XY = _intersection(X, Y, tol)
    if len(XY):
        if len(eps_components(XY, tol)) == 1:
            r = _covering_radius(XY, tol, Dc)
            if r is not None and r >= Dc:
                return Hub(True, 2, approximate=True)
        ok = True
        for block in eps_components(X, tol):
            S = X[block]
            inside = pairwise_distances(S, XY).min(axis=1) <= tol
            if inside.all():
                continue
            if set_distance(S, XY) > Dc:
                continue
            ok = False
            break
        if ok:
            return Hub(True, 3)
    if set_distance(X, Y) > tol:
        return Hub(True, 4)
    return Hub(False)


@dataclass
class DceInterval:
    lower: float
    upper: float
    exact: bool
    reason: str

    def to_json(self):
        return {"lower": self.lower, "upper": self.upper, "exact": self.exact, "reason": self.reason}


def dce_estimate(phi, psi, tol: float = DEFAULT_TOL, Dc=None, D_upper=None, hub: Hub | None = None) -> DceInterval:
    """Certified sandwich for the anchored metric; exact in the disjoint,
    connected and hub cases."""
    X, Y = np.asarray(phi.points), np.asarray(psi.points)
    Dc = metric_Dc(phi, psi) if Dc is None else Dc
    D_upper = metric_D_upper(phi, psi) if D_upper is None else D_upper
    if set_distance(X, Y) > tol:
        return DceInterval(Dc, Dc, True, "disjoint supports")
    if len(eps_components(X, tol)) == 1 or len(eps_components(Y, tol)) == 1:
        return DceInterval(Dc, Dc, True, "connected support")
    hub = has_hub(phi, psi, tol, Dc) if hub is None else hub
    if hub.found:
        return DceInterval(Dc, Dc, True, f"hub condition {hub.condition}")
    return DceInterval(Dc, min(2 * Dc, D_upper), False, "sandwich")


# -- report ---------------------------------------------------------------------------


@dataclass
class MetricReport:
    D_T: float
    D_upper: float
    d_T: float
    d_c: float
    D_c: float
    hausdorff: float
    dce: DceInterval
    hub: Hub
    pitch: float
    tol: float
    disc_error_bound: float = field(init=False)

    def __post_init__(self):
        self.disc_error_bound = 2 * self.pitch

    def violations(self, slack: float = 1e-9) -> list[str]:
        """Inequalities among the reported values that fail by more than
        ``slack``."""
        checks = [
            ("d_T <= d_c", self.d_T <= self.d_c + slack),
            ("d_c <= D_c", self.d_c <= self.D_c + slack),
            ("D_T <= D_c", self.D_T <= self.D_c + slack),
            ("D_c <= D_upper", self.D_c <= self.D_upper + slack),
            ("hausdorff <= d_T", self.hausdorff <= self.d_T + slack),
            ("hausdorff <= D_T", self.hausdorff <= self.D_T + slack),
            ("dce.lower == D_c", abs(self.dce.lower - self.D_c) <= slack),
            ("D_c <= dce.upper", self.D_c <= self.dce.upper + slack),
            ("dce.upper <= 2 D_c", self.dce.upper <= 2 * self.D_c + slack),
            ("dce.upper <= D_upper", self.dce.upper <= self.D_upper + slack),
        ]
        return [name for name, ok in checks if not ok]

    def to_json(self):
        return {
            "D_T": self.D_T,
            "D_upper": _finite_or_str(self.D_upper),
            "d_T": self.d_T,
            "d_c": self.d_c,
            "D_c": self.D_c,
            "hausdorff": self.hausdorff,
            "dce": self.dce.to_json() | {"upper": _finite_or_str(self.dce.upper)},
            "hub": self.hub.to_json(),
            "error_bounds": {"disc_grid": self.disc_error_bound, "pitch": self.pitch, "tol": self.tol},
        }


def _finite_or_str(v):
    return v if math.isfinite(v) else "inf"


def compute_metrics(phi, psi, pitch: float = DEFAULT_PITCH, tol: float = DEFAULT_TOL, exact: bool = False) -> MetricReport:
    _same_model(phi, psi)
    Dc = metric_Dc(phi, psi)
    D_upper = metric_D_upper(phi, psi)
    hub = has_hub(phi, psi, tol, Dc)
    return MetricReport(
        D_T=metric_DT(phi, psi),
        D_upper=D_upper,
        d_T=metric_dT(phi, psi, pitch, exact),
        d_c=metric_dc(phi, psi, pitch, exact),
        D_c=Dc,
        hausdorff=hausdorff(phi.points, psi.points),
        dce=dce_estimate(phi, psi, tol, Dc, D_upper, hub),
        hub=hub,
        pitch=pitch,
        tol=tol,
    )
