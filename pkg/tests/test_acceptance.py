"""Exit criteria. Each test records one PASS/FAIL line, printed in the
terminal summary."""

import itertools
import math
import time

import numpy as np
import pytest
from conftest import (
    CRITERIA_LINES,
    brute_hall,
    elements,
    random_hermitian,
    random_matrix_hom,
    random_normal_matrix,
    random_transport_instance,
)

from orbit_metrics.atomic import from_spectrum
from orbit_metrics.cli import corpus, dumps, selftest
from orbit_metrics.errors import TorsionObstruction
from orbit_metrics.groups import Simplicial, TorsionExtended
from orbit_metrics.k1 import K1Labeling, complement_components, mt3_interval, rho
from orbit_metrics.matrix import DAVIDSON_C, construct_unitary, eigen_normal, estimate_dist
from orbit_metrics.metrics import compute_metrics, metric_Dc, metric_DT
from orbit_metrics.transport import PairRelation, hall_check, refine

pytestmark = pytest.mark.acceptance

SQRT2 = math.sqrt(2)


def report(n, ok, detail):
    CRITERIA_LINES.append(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def _pairs(count=200, seed=7):
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        n = 2 + k % 7
        out.append((random_normal_matrix(rng, n, repeat=k % 5 == 0), random_normal_matrix(rng, n, repeat=k % 7 == 0)))
    return out


@pytest.fixture(scope="module")
def normal_pairs():
    pairs = []
    for x, y in _pairs():
        _, hx = eigen_normal(x)
        _, hy = eigen_normal(y)
        pairs.append((x, y, compute_metrics(hx, hy, pitch=0.05)))
    return pairs


def test_criterion_1_roots_of_unity():
    t0 = time.perf_counter()
    x = np.exp(1j * np.pi * np.arange(4) / 4)
    r = compute_metrics(from_spectrum(x, [1] * 4), from_spectrum(0.5 * x, [1] * 4), pitch=0.01)
    dt = time.perf_counter() - t0
    ok = (r.D_T == 0.5 and r.D_c == 0.5 and abs(r.d_T - 0.5) <= 0.02 and abs(r.d_c - 0.5) <= 0.02
          and r.violations() == [] and dt < 1.0)
    report(1, ok, f"D_T={r.D_T} D_c={r.D_c} d_T={r.d_T:.4f} d_c={r.d_c:.4f} t={dt:.2f}s")


def test_criterion_2_cross():
    t0 = time.perf_counter()
    r = compute_metrics(from_spectrum([-1, 0, 1], [1] * 3), from_spectrum([-1j, 0, 1j], [1] * 3), pitch=0.01)
    dt = time.perf_counter() - t0
    ok = (r.D_T == SQRT2 and r.D_c == SQRT2 and r.D_upper == SQRT2
          and abs(r.d_T - 1) <= 0.02 and abs(r.d_c - 1) <= 0.02 and dt < 5.0)
    report(2, ok, f"D_T={r.D_T} D_c={r.D_c} D^T={r.D_upper} d_T={r.d_T:.4f} d_c={r.d_c:.4f} t={dt:.2f}s")


def test_criterion_3_circle():
    t0 = time.perf_counter()
    X = np.exp(2j * np.pi * np.arange(64) / 64)
    h = from_spectrum(X, [1] * 64)
    r = compute_metrics(h, h, pitch=0.05)
    cm = complement_components(X, X, 0.05)
    lab = K1Labeling({"component-1": (1,)}, {"component-1": (0,)})
    iv = mt3_interval(r, rho(cm, lab, X, X))
    dt = time.perf_counter() - t0
    ok = r.D_c == 0 and abs(iv.lower - 2) <= 0.12 and abs(iv.upper - 2) <= 0.12 and dt < 10.0
    report(3, ok, f"interval=[{iv.lower:.4f}, {iv.upper:.4f}] D_c={r.D_c} t={dt:.2f}s")


def test_criterion_4_unitary_realises_Dc(normal_pairs):
    t0 = time.perf_counter()
    worst = -math.inf
    for x, y, r in normal_pairs:
        cert = construct_unitary(x, y)
        worst = max(worst, cert.achieved - r.D_c)
        U = cert.U
        assert np.abs(U.conj().T @ U - np.eye(len(U))).max() < 1e-10
    dt = time.perf_counter() - t0
    report(4, worst <= 1e-8 and dt < 30, f"max(achieved - D_c)={worst:.2e} over 200 pairs t={dt:.2f}s")


def _haar_batch(rng, count, n):
    Z = (rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))) / SQRT2
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=1, axis2=2)
    return Q * (d / np.abs(d))[:, None, :]


def test_criterion_5_lower_bounds(normal_pairs):
    rng = np.random.default_rng(55)
    worst_rand, worst_est, over = math.inf, math.inf, -math.inf
    for x, y, r in normal_pairs:
        lower = max(r.d_T, DAVIDSON_C * r.D_T)
        U = _haar_batch(rng, 1000, len(x))
        vals = np.linalg.norm(U.conj().transpose(0, 2, 1) @ x @ U - y, ord=2, axis=(1, 2))
        worst_rand = min(worst_rand, float(vals.min() - lower))
        est = estimate_dist(x, y, budget=2, iters=25)
        worst_est = min(worst_est, est - lower)
        over = max(over, est - r.D_c)
    ok = worst_rand >= -1e-8 and worst_est >= -1e-8 and over <= 1e-8
    report(5, ok, f"min(random - lower)={worst_rand:.3e} min(est - lower)={worst_est:.3e} "
                  f"max(est - D_c)={over:.2e}")


def _line_matching(a, b):
    return min(max(abs(p - q) for p, q in zip(a, perm)) for perm in itertools.permutations(b))


def test_criterion_6_hermitian_oracle():
    rng = np.random.default_rng(66)
    est_err, dc_err = 0.0, 0.0
    for k in range(100):
        n = 1 + k % 6
        x, y = random_hermitian(rng, n), random_hermitian(rng, n)
        if k % 4 == 0 and n > 1:
            Q = np.linalg.qr(rng.standard_normal((n, n)))[0]
            x = Q @ np.diag(np.repeat(rng.standard_normal(1), n)) @ Q.T
        _, hx = eigen_normal(x)
        _, hy = eigen_normal(y)
        a = np.repeat(hx.points.real, [c.free[0] for c in hx.classes])
        b = np.repeat(hy.points.real, [c.free[0] for c in hy.classes])
        sorted_dist = float(np.abs(np.sort(a) - np.sort(b)).max())
        assert _line_matching(a, b) == sorted_dist
        dc_err = max(dc_err, abs(metric_Dc(hx, hy) - sorted_dist))
        est_err = max(est_err, abs(estimate_dist(x, y) - sorted_dist))
    report(6, est_err <= 1e-6 and dc_err == 0, f"max|est - sorted|={est_err:.2e} max|D_c - sorted|={dc_err}")


def test_criterion_7_transport_oracle():
    rng = np.random.default_rng(77)
    disagreements, bad_plans, plans, obstructions = 0, 0, 0, 0
    for k in range(500):
        torsion = k % 2 == 1
        inst = random_transport_instance(rng, torsion=torsion)
        mask = inst["mask"]
        R = PairRelation.from_mask(mask)
        if torsion:
            spec = TorsionExtended(inst["k"], inst["orders"])
            a, b = elements(spec, inst["a"], inst["at"]), elements(spec, inst["b"], inst["bt"])
            oracle = brute_hall(inst["a"], inst["b"], mask, inst["at"], inst["bt"], inst["orders"])
        else:
            spec = Simplicial(inst["k"])
            a, b = elements(spec, inst["a"]), elements(spec, inst["b"])
            oracle = brute_hall(inst["a"], inst["b"], mask)
        cert = hall_check(a, b, R, spec)
        disagreements += cert.feasible != (oracle is None)
        if not cert.feasible:
            continue
        try:
            plan = refine(a, b, R, spec)
        except TorsionObstruction:
            obstructions += 1
            continue
        plans += 1
        bad_plans += not _plan_ok(plan, inst)
    ok = disagreements == 0 and bad_plans == 0
    report(7, ok, f"{disagreements} disagreements in 500; {bad_plans}/{plans} plans rejected; "
                  f"{obstructions} torsion obstructions")


def _plan_ok(plan, inst):
    mask, m, n = inst["mask"], *inst["mask"].shape
    free = np.zeros((m, n, inst["k"]), dtype=np.int64)
    orders = inst.get("orders", ())
    tors = np.zeros((m, n, len(orders)), dtype=np.int64)
    for (i, j), c in plan.entries.items():
        f = np.asarray(c.free, dtype=np.int64)
        if not mask[i, j] or (f < 0).any() or not f.any():
            return False
        free[i, j] = f
        if orders:
            tors[i, j] = c.torsion
    ok = np.array_equal(free.sum(1), inst["a"]) and np.array_equal(free.sum(0), inst["b"])
    if orders:
        o = np.array(orders)
        ok = ok and np.array_equal(tors.sum(1) % o, inst["at"] % o) and np.array_equal(tors.sum(0) % o, inst["bt"] % o)
    return bool(ok)


def test_criterion_8_metric_axioms():
    rng = np.random.default_rng(88)
    tol = 1e-9
    failures = []
    for k in range(200):
        n = int(rng.integers(1, 6))
        lattice = k % 2 == 0
        x, y, z = (random_matrix_hom(rng, n, lattice=lattice) for _ in range(3))
        rxy = compute_metrics(x, y, pitch=0.05, exact=True)
        ryz = compute_metrics(y, z, pitch=0.05, exact=True)
        rxz = compute_metrics(x, z, pitch=0.05, exact=True)
        ryx = compute_metrics(y, x, pitch=0.05, exact=True)
        for r in (rxy, ryz, rxz):
            failures += [f"{k}: {v}" for v in r.violations(tol)]
        for name in ("D_T", "D_c", "D_upper", "d_T", "d_c"):
            a, b, c = getattr(rxy, name), getattr(ryz, name), getattr(rxz, name)
            if c > a + b + tol:
                failures.append(f"{k}: triangle {name}")
            if abs(getattr(ryx, name) - a) > tol:
                failures.append(f"{k}: symmetry {name}")
        same = compute_metrics(x, x, pitch=0.05)
        if max(same.D_T, same.D_c, same.d_T, same.d_c) > tol:
            failures.append(f"{k}: identity")
    report(8, not failures, f"{len(failures)} violations" + (f", first {failures[:3]}" if failures else ""))


def test_criterion_9_unique_trace_and_infinitesimal():
    rng = np.random.default_rng(99)
    mismatches = 0
    for k in range(200):
        n = int(rng.integers(1, 8))
        x, y = random_matrix_hom(rng, n, lattice=k % 2 == 0), random_matrix_hom(rng, n, lattice=k % 2 == 0)
        mismatches += metric_DT(x, y) != metric_Dc(x, y)
    from orbit_metrics.io import load_instance

    inst = load_instance(dict(corpus())["infinitesimal.json"])
    gap = metric_Dc(inst.x, inst.y) > metric_DT(inst.x, inst.y)
    report(9, mismatches == 0 and gap, f"{mismatches}/200 with D_T != D_c; infinitesimal D_c > D_T: {gap}")


def test_criterion_10_selftest_determinism():
    first, second = dumps(selftest()), dumps(selftest())
    report(10, first == second and '"passed": true' in first, f"identical={first == second}")
