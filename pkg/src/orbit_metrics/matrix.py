"""Normal matrices: spectra, unitaries realising a plan, orbit distances.

Eigenvectors of a normal ``M`` come from the commuting Hermitian pair
``H = (M + M*)/2`` and ``K = (M - M*)/2i``: diagonalise a generic real
combination ``H + tK`` and, inside any block where that combination is
degenerate, split by ``H`` and then by ``K``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .atomic import AtomicHom, make_atomic, matrix_model
from .errors import (
    ClusterAmbiguity,
    DimensionMismatch,
    MarginalMismatch,
    NotHermitian,
    NotNormal,
    ValidationError,
)
from .geometry import merge_labels
from .groups import GroupElement
from .transport import TransportPlan, bottleneck

DAVIDSON_C = 1 / 3
NORMAL_TOL = 1e-8


def op_norm(M) -> float:
    return float(np.linalg.norm(M, 2)) if np.size(M) else 0.0


def as_matrix(M) -> np.ndarray:
    """Accept complex arrays or nested ``[re, im]`` arrays."""
    a = np.asarray(M)
    if a.ndim == 3 and a.shape[-1] == 2 and not np.iscomplexobj(a):
        a = a[..., 0] + 1j * a[..., 1]
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionMismatch("matrix must be square and nonempty")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix entries must be finite")
    return a


def matrix_to_json(M) -> list:
    M = as_matrix(M)
    return [[[float(v.real), float(v.imag)] for v in row] for row in M]


def normality_defect(M) -> float:
    M = as_matrix(M)
    H = M.conj().T
    return op_norm(H @ M - M @ H)


def _require_normal(M):
    scale = max(op_norm(M), 1.0)
    if normality_defect(M) > NORMAL_TOL * scale:
        raise NotNormal("matrix is not normal", defect=normality_defect(M))


@dataclass
class EigenData:
    values: np.ndarray
    basis: np.ndarray
    clusters: list[list[int]]

    def reassemble(self) -> np.ndarray:
        return self.basis @ np.diag(self.values) @ self.basis.conj().T


def _groups(vals, tol):
    """Runs of sorted real values whose consecutive gaps are <= tol."""
    order = np.argsort(vals, kind="stable")
    out, cur = [], [order[0]]
    for a, b in zip(order[:-1], order[1:]):
        if vals[b] - vals[a] <= tol:
            cur.append(b)
        else:
            out.append(cur)
            cur = [b]
    out.append(cur)
    return out


def _split(V, mats, tol):
    """Refine the columns of ``V`` by successive Hermitian matrices."""
    if not mats or V.shape[1] == 1:
        return V
    A = V.conj().T @ mats[0] @ V
    w, Q = np.linalg.eigh((A + A.conj().T) / 2)
    W = V @ Q
    return np.concatenate([_split(W[:, g], mats[1:], tol) for g in _groups(w, tol)], axis=1)


def _joint_basis(M, seed, tol):
    H = (M + M.conj().T) / 2
    K = (M - M.conj().T) / 2j
    t = np.random.default_rng(seed).uniform(0.5, 1.5)
    w, V = np.linalg.eigh(H + t * K)
    blocks = [_split(V[:, g], [H, K], tol) for g in _groups(w, tol)]
    return np.concatenate(blocks, axis=1)


def eigen_normal(M, cluster_tol: float | None = None, n: int | None = None, seed: int = 0):
    """Eigen data and the atomic homomorphism into ``M_n`` with atoms at
    eigenvalue clusters and classes equal to multiplicities."""
    M = as_matrix(M)
    _require_normal(M)
    size = M.shape[0]
    scale = op_norm(M)
    tol = cluster_tol if cluster_tol is not None else 1e-8 * max(scale, 1.0)
    if tol <= 0:
        raise ValidationError("cluster_tol must be positive")
    B = _joint_basis(M, seed, tol)
    # re-orthonormalise against drift in the recursive split
    Q, Rr = np.linalg.qr(B)
    B = Q * (np.diag(Rr) / np.abs(np.diag(Rr)))
    vals = np.einsum("ij,ij->j", B.conj(), M @ B)
    labels = merge_labels(vals, tol)
    clusters = [np.flatnonzero(labels == k).tolist() for k in range(labels.max() + 1)]
    centres = np.array([vals[c].mean() for c in clusters])
    if len(centres) > 1:
        d = np.abs(centres[:, None] - centres[None, :])
        d[np.diag_indices_from(d)] = np.inf
        if d.min() < 2 * tol:
            raise ClusterAmbiguity("eigenvalue clusters closer than 2 * cluster_tol", gap=float(d.min()))
    model = matrix_model(n or size)
    if (n or size) != size:
        raise DimensionMismatch("model unit must equal the matrix size")
    hom = make_atomic(centres, [model.group.element([len(c)]) for c in clusters], model, merge_tol=0.0)
    return EigenData(vals, B, clusters), hom


@dataclass
class UnitaryCertificate:
    U: np.ndarray
    achieved: float
    plan_bottleneck: float

    def to_json(self):
        return {"U": matrix_to_json(self.U), "achieved": self.achieved, "plan_bottleneck": self.plan_bottleneck}


def _count(c) -> int:
    if isinstance(c, GroupElement):
        return int(c.free[0])
    v = c[0] if isinstance(c, (tuple, list)) else c
    return int(v)


def construct_unitary(x, y, plan: TransportPlan | None = None, cluster_tol: float | None = None) -> UnitaryCertificate:
    """Unitary ``U`` with ``|U*xU - y|`` at most the plan's bottleneck: each
    x-eigenspace is cut into sub-blocks of sizes ``c_ij`` and matched with
    the corresponding sub-blocks of the y-eigenspaces."""
    x, y = as_matrix(x), as_matrix(y)
    if x.shape != y.shape:
        raise DimensionMismatch("x and y must have the same size")
    ex, hx = eigen_normal(x, cluster_tol)
    ey, hy = eigen_normal(y, cluster_tol)
    if plan is None:
        plan = bottleneck(hx, hy, order="group").plan
    counts = {k: _count(v) for k, v in plan.entries.items() if _count(v)}
    for i, cl in enumerate(ex.clusters):
        if sum(c for (a, _), c in counts.items() if a == i) != len(cl):
            raise MarginalMismatch(f"plan row {i} does not match multiplicity")
    for j, cl in enumerate(ey.clusters):
        if sum(c for (_, b), c in counts.items() if b == j) != len(cl):
            raise MarginalMismatch(f"plan column {j} does not match multiplicity")
    used_x = [0] * len(ex.clusters)
    used_y = [0] * len(ey.clusters)
    U = np.zeros_like(x)
    worst = 0.0
    for (i, j) in sorted(counts):
        c = counts[(i, j)]
        cx = ex.clusters[i][used_x[i]:used_x[i] + c]
        cy = ey.clusters[j][used_y[j]:used_y[j] + c]
        used_x[i] += c
        used_y[j] += c
        U += ex.basis[:, cx] @ ey.basis[:, cy].conj().T
        worst = max(worst, abs(hx.points[i] - hy.points[j]))
    return UnitaryCertificate(U, op_norm(U.conj().T @ x @ U - y), float(worst))


def hermitian_dist(x, y) -> float:
    x, y = as_matrix(x), as_matrix(y)
    if x.shape != y.shape:
        raise DimensionMismatch("x and y must have the same size")
    for M in (x, y):
        if op_norm(M - M.conj().T) > NORMAL_TOL * max(op_norm(M), 1.0):
            raise NotHermitian("matrix is not Hermitian")
    a = np.linalg.eigvalsh((x + x.conj().T) / 2)
    b = np.linalg.eigvalsh((y + y.conj().T) / 2)
    return float(np.abs(a - b).max())


# -- orbit distance estimate ------------------------------------------------------


def _haar(n, rng):
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def _smooth(x, y, U, p):
    """Schatten-p norm of ``U*xU - y`` and its Riemannian gradient in the
    skew-Hermitian direction ``K`` of ``U -> U exp(K)``."""
    W = U.conj().T @ x @ U
    Us, s, Vh = np.linalg.svd(W - y)
    top = s[0]
    if top == 0:
        return 0.0, np.zeros_like(U)
    r = s / top
    norm = top * np.sum(r**p) ** (1 / p)
    G = (Us * (s / norm) ** (p - 1)) @ Vh
    # d/dt |W(t) - y|_p = Re tr(G* (WK - KW)) = Re tr((G*W - WG*) K)
    A = G.conj().T @ W - W @ G.conj().T
    S = (A.conj().T - A) / 2
    return norm, S


def _descend(x, y, U, iters):
    best = op_norm(U.conj().T @ x @ U - y)
    best_U = U
    step = 0.5 / max(op_norm(x), 1e-12)
    for p in (8, 16, 32, 64):
        f, S = _smooth(x, y, U, p)
        for _ in range(iters):
            g2 = float(np.vdot(S, S).real)
            if g2 < 1e-28:
                break
            t = step
            while t > 1e-14:
                V = U @ expm(-t * S)
                fv, Sv = _smooth(x, y, V, p)
                if fv <= f - 1e-4 * t * g2:
                    break
                t /= 2
            else:
                break
            U, f, S = V, fv, Sv
            step = min(2 * t, 10.0)
            val = op_norm(U.conj().T @ x @ U - y)
            if val < best:
                best, best_U = val, U
    return best, best_U


def estimate_dist(x, y, seed: int = 0, budget: int = 4, iters: int = 60) -> float:
    """Smallest achieved ``|u*xu - y|`` over ``budget`` restarts.

    Restart 0 starts from the unitary realising the bottleneck plan, the
    others from Haar-random unitaries seeded by ``(seed, k)``. The result is
    an achieved value, hence an upper bound on the orbit distance, and is
    nonincreasing in ``budget``."""
    x, y = as_matrix(x), as_matrix(y)
    if x.shape != y.shape:
        raise DimensionMismatch("x and y must have the same size")
    _require_normal(x)
    _require_normal(y)
    if budget < 1:
        raise ValidationError("budget must be at least 1")
    n = x.shape[0]
    best = math.inf
    for k in range(budget):
        U0 = construct_unitary(x, y).U if k == 0 else _haar(n, np.random.default_rng([seed, k]))
        val, _ = _descend(x, y, U0, iters)
        best = min(best, val)
        if best == 0.0:
            break
    return float(best)


# -- audit ---------------------------------------------------------------------------


@dataclass
class AuditCheck:
    name: str
    lhs: float
    rhs: float
    passed: bool

    def to_json(self):
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "passed": self.passed}


def audit_bounds(x, y, rho_1: float = 0.0, seed: int = 0, budget: int = 4, C: float = DAVIDSON_C,
                 tol: float = 1e-8, pitch: float = 0.05, cluster_tol: float | None = None) -> dict:
    """Compare the achieved orbit distance with the metric bounds."""
    from .metrics import compute_metrics

    x, y = as_matrix(x), as_matrix(y)
    _, hx = eigen_normal(x, cluster_tol)
    _, hy = eigen_normal(y, cluster_tol)
    report = compute_metrics(hx, hy, pitch=pitch)
    est = estimate_dist(x, y, seed=seed, budget=budget)
    cert = construct_unitary(x, y, cluster_tol=cluster_tol)
    checks = [
        AuditCheck("estimate >= d_T", est, report.d_T, est >= report.d_T - tol),
        AuditCheck("estimate >= rho_1", est, rho_1, est >= rho_1 - tol),
        AuditCheck("estimate >= C * D_T", est, C * report.D_T, est >= C * report.D_T - tol),
        AuditCheck("achieved <= D_c", cert.achieved, report.D_c, cert.achieved <= report.D_c + tol),
        AuditCheck("estimate <= D_c", est, report.D_c, est <= report.D_c + tol),
    ]
    return {
        "metrics": report.to_json(),
        "estimate": est,
        "unitary": {"achieved": cert.achieved, "plan_bottleneck": cert.plan_bottleneck},
        "checks": [c.to_json() for c in checks],
        "passed": all(c.passed for c in checks),
        "options": {"seed": seed, "budget": budget, "C": C, "tol": tol, "pitch": pitch},
    }
