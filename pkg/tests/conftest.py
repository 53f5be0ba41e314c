import itertools
import math

import numpy as np
import pytest

from orbit_metrics.atomic import from_spectrum, make_atomic
from orbit_metrics.groups import Simplicial

CRITERIA_LINES = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def subsets(m):
    for k in range(1, m + 1):
        yield from itertools.combinations(range(m), k)


def strict_cone_leq(diff_free, diff_tors, orders):
    """``a <= b`` for ``b - a = (diff_free, diff_tors)`` in Z^k + T with the
    strict cone."""
    free = np.asarray(diff_free)
    if np.all(free == 0):
        return all(int(t) % o == 0 for t, o in zip(diff_tors, orders))
    return bool(np.all(free >= 0))


def brute_hall(a_free, b_free, mask, a_tors=None, b_tors=None, orders=()):
    """Exhaustive Hall check; returns the first violating subset or None."""
    a_free, b_free = np.asarray(a_free), np.asarray(b_free)
    m = a_free.shape[0]
    for A in subsets(m):
        nb = np.flatnonzero(mask[list(A)].any(axis=0))
        df = b_free[nb].sum(axis=0) - a_free[list(A)].sum(axis=0)
        if orders:
            dt = np.asarray(b_tors)[nb].sum(axis=0) - np.asarray(a_tors)[list(A)].sum(axis=0)
            ok = strict_cone_leq(df, dt if len(nb) or len(A) else np.zeros(len(orders)), orders)
        else:
            ok = bool(np.all(df >= 0))
        if not ok:
            return A
    return None


def brute_bottleneck(x, y):
    """Bottleneck perfect matching for equal-size unit-weight point lists."""
    best = math.inf
    for perm in itertools.permutations(range(len(y))):
        best = min(best, max(abs(x[i] - y[p]) for i, p in enumerate(perm)))
    return best


def random_transport_instance(rng, torsion=False):
    """Random weights with equal totals built from a hidden plan, plus a
    random relation (feasible or not)."""
    while True:
        m, n = rng.integers(1, 11), rng.integers(1, 11)
        k = int(rng.integers(1, 4))
        support = rng.random((m, n)) < rng.uniform(0.15, 0.6)
        c = rng.integers(0, 3, size=(m, n, k)) * support[:, :, None]
        a, b = c.sum(axis=1), c.sum(axis=0)
        if (a.sum(axis=1) > 0).all() and (b.sum(axis=1) > 0).all():
            break
    mask = rng.random((m, n)) < rng.uniform(0.2, 0.9)
    if rng.random() < 0.5:
        mask |= support
    out = {"a": a, "b": b, "mask": mask, "k": k}
    if torsion:
        orders = (2,) if rng.random() < 0.5 else (2, 3)
        ct = rng.integers(0, 6, size=(m, n, len(orders))) * support[:, :, None]
        at, bt = ct.sum(axis=1), ct.sum(axis=0)
        # occasionally scramble torsion while keeping the totals
        if rng.random() < 0.5 and m > 1:
            at[0] += 1
            at[-1] -= 1
        out.update(at=at % orders, bt=bt % orders, orders=orders)
    return out


def elements(spec, free_rows, tors_rows=None):
    if tors_rows is None:
        return [spec.element([int(v) for v in row]) for row in free_rows]
    return [spec.element([int(v) for v in f], [int(t) for t in s]) for f, s in zip(free_rows, tors_rows)]


def random_matrix_hom(rng, n=None, lattice=False, spread=2.0):
    """Atomic homomorphism into M_n with random points and multiplicities.
    ``lattice`` draws points from a half-integer grid so that many
    distances tie."""
    n = n or int(rng.integers(1, 7))
    k = int(rng.integers(1, n + 1))
    cuts = np.sort(rng.choice(np.arange(1, n), size=k - 1, replace=False)) if k > 1 else np.array([], int)
    mult = np.diff(np.concatenate([[0], cuts, [n]])).astype(int)
    if lattice:
        grid = (np.arange(-3, 4)[:, None] + 1j * np.arange(-3, 4)[None, :]).ravel() / 2
        pts = rng.choice(grid, size=k, replace=False)
    else:
        pts = spread * (rng.standard_normal(k) + 1j * rng.standard_normal(k))
    return from_spectrum(pts, mult, n)


def random_normal_matrix(rng, n, repeat=False):
    vals = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    if repeat and n > 2:
        vals[1] = vals[0]
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    Q = Q * (np.diag(R) / np.abs(np.diag(R)))
    return Q @ np.diag(vals) @ Q.conj().T


def random_hermitian(rng, n):
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (Z + Z.conj().T) / 2


@pytest.fixture
def m3_pair():
    return from_spectrum([-1, 0, 1], [1, 1, 1]), from_spectrum([-1j, 0, 1j], [1, 1, 1])


@pytest.fixture
def roots_pair():
    x = np.exp(1j * np.pi * np.arange(4) / 4)
    return from_spectrum(x, [1] * 4), from_spectrum(0.5 * x, [1] * 4)


@pytest.fixture
def infinitesimal_pair():
    from fractions import Fraction

    from orbit_metrics.atomic import ModelSpec

    grp = Simplicial(2)
    model = ModelSpec(grp, grp.element([1, 1]), ((Fraction(1, 2), Fraction(1, 2)),))
    e1, e2 = grp.element([1, 0]), grp.element([0, 1])
    return make_atomic([0, 1], [e1, e2], model), make_atomic([0, 1], [e2, e1], model)

