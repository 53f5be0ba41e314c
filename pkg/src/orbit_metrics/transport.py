"""Hall-condition feasibility, refinement and bottleneck radii.

Weights are either K0 classes (a :class:`~orbit_metrics.groups.GroupSpec`
is passed as ``spec``) or trace vectors of :class:`fractions.Fraction`
(``spec=None``). Feasibility is decided by exact integer max-flow, one
flow per coordinate; the per-coordinate integral flows are stacked into the
refinement.

For torsion-extended groups the free coordinates are checked by flow and
the torsion part on *tight* sets, i.e. sets ``A`` whose neighbourhood has
exactly the same free mass. Tight sets form a lattice; the smallest tight
set containing atom ``i`` is the residual closure of ``i`` under any
saturating flow, and the torsion defect is modular on the lattice, so it
suffices to check those closures.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from .errors import (
    HallViolation,
    NonPositiveClass,
    SumMismatch,
    TorsionObstruction,
    Undecided,
    ValidationError,
)
from .geometry import pairwise_distances
from .groups import (
    BratteliLimit,
    GroupElement,
    GroupSpec,
    Positivity,
    TorsionExtended,
    scale_to_integers,
)

STRICT_ENUMERATION_LIMIT = 14


@dataclass(frozen=True)
class PairRelation:
    pairs: frozenset
    m: int
    n: int

    def __init__(self, pairs, m: int, n: int):
        pairs = frozenset((int(i), int(j)) for i, j in pairs)
        for i, j in pairs:
            if not (0 <= i < m and 0 <= j < n):
                raise ValidationError(f"pair ({i}, {j}) out of range")
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "n", n)

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "PairRelation":
        ii, jj = np.nonzero(mask)
        return cls(zip(ii.tolist(), jj.tolist()), mask.shape[0], mask.shape[1])

    @classmethod
    def full(cls, m, n):
        return cls(((i, j) for i in range(m) for j in range(n)), m, n)

    def neighbours(self, A) -> set[int]:
        A = set(A)
        return {j for i, j in self.pairs if i in A}

    def mask(self) -> np.ndarray:
        out = np.zeros((self.m, self.n), dtype=bool)
        for i, j in self.pairs:
            out[i, j] = True
        return out


@dataclass
class TransportPlan:
    """Sparse refinement ``{c_ij}``; absent entries are zero."""

    entries: dict
    m: int
    n: int
    spec: GroupSpec | None = None

    @property
    def support(self) -> set:
        return set(self.entries)

    def to_json(self):
        out = []
        for (i, j) in sorted(self.entries):
            c = self.entries[(i, j)]
            val = c.to_json() if isinstance(c, GroupElement) else [str(q) for q in c]
            out.append([i, j, val])
        return out


@dataclass
class HallCertificate:
    feasible: bool
    violating_set: tuple = ()
    deficiency: object = None
    coordinate: int | None = None
    reason: str = ""

    def to_json(self):
        out = {"feasible": self.feasible}
        if not self.feasible:
            out["violating_set"] = list(self.violating_set)
            d = self.deficiency
            if isinstance(d, GroupElement):
                out["deficiency"] = d.to_json()
            elif d is not None:
                out["deficiency"] = [str(q) for q in d]
            if self.reason:
                out["reason"] = self.reason
        return out


# -- weight arithmetic --------------------------------------------------------


class _Weights:
    """Uniform view of group-valued and trace-valued weights."""

    def __init__(self, spec: GroupSpec | None, sample):
        self.spec = spec
        if spec is None:
            self.width = len(sample)

    def zero(self):
        if self.spec is None:
            return tuple(Fraction(0) for _ in range(self.width))
        return self.spec.zero()

    def add(self, a, b):
        if self.spec is None:
            return tuple(x + y for x, y in zip(a, b))
        return self.spec.add(a, b)

    def sub(self, a, b):
        if self.spec is None:
            return tuple(x - y for x, y in zip(a, b))
        return self.spec.sub(a, b)

    def total(self, items):
        acc = self.zero()
        for w in items:
            acc = self.add(acc, w)
        return acc

    def positivity(self, g) -> Positivity:
        if self.spec is None:
            if all(v == 0 for v in g):
                return Positivity.ZERO
            if all(v >= 0 for v in g):
                return Positivity.POSITIVE
            return Positivity.NOT_POSITIVE
        return self.spec.is_positive(g)

    def flow_rows(self, a, b) -> tuple[np.ndarray, np.ndarray, int]:
        """Integer coordinates of both families on one common scale."""
        if self.spec is None:
            rows, den = scale_to_integers([list(w) for w in list(a) + list(b)])
            return rows[: len(a)], rows[len(a):], den
        return self.spec.flow_coordinates(a), self.spec.flow_coordinates(b), 1


def _check_inputs(a, b, R: PairRelation, w: _Weights):
    if len(a) != R.m or len(b) != R.n:
        raise ValidationError("weight lists do not match the relation's sides")
    for side, items in (("a", a), ("b", b)):
        for i, g in enumerate(items):
            p = w.positivity(g)
            if p is Positivity.UNDECIDED:
                raise Undecided(f"positivity of {side}[{i}] undecided")
            if p is not Positivity.POSITIVE:
                raise NonPositiveClass(f"{side}[{i}] is not positive")
    p = w.positivity(w.sub(w.total(a), w.total(b)))
    if p is Positivity.UNDECIDED:
        raise Undecided("equality of the two totals undecided")
    if p is not Positivity.ZERO:
        raise SumMismatch("the two weight families have different totals")


# -- flows ------------------------------------------------------------------------


def _network(caps_a, caps_b, R: PairRelation) -> nx.DiGraph:
    G = nx.DiGraph()
    G.add_node("s")
    G.add_node("t")
    for i, c in enumerate(caps_a):
        G.add_edge("s", ("x", i), capacity=int(c))
    for j, c in enumerate(caps_b):
        G.add_edge(("y", j), "t", capacity=int(c))
    for i, j in sorted(R.pairs):
        G.add_edge(("x", i), ("y", j))  # no capacity attribute: infinite
    return G


def _max_flow(caps_a, caps_b, R):
    G = _network(caps_a, caps_b, R)
    value, flow = nx.maximum_flow(G, "s", "t")
    return value, flow, G


def _source_side(G, flow) -> set[int]:
    """x-indices reachable from the source in the residual network."""
    seen = {"s"}
    queue = deque(["s"])
    while queue:
        u = queue.popleft()
        for v, attr in G.succ[u].items():
            cap = attr.get("capacity", float("inf"))
            if v not in seen and flow[u][v] < cap:
                seen.add(v)
                queue.append(v)
        for v in G.pred[u]:
            if v not in seen and flow[v][u] > 0:
                seen.add(v)
                queue.append(v)
    return {node[1] for node in seen if isinstance(node, tuple) and node[0] == "x"}


def _deficiency(a, b, R, A, w: _Weights):
    return w.sub(w.total(a[i] for i in A), w.total(b[j] for j in sorted(R.neighbours(A))))


def _free_check(a, b, R, w: _Weights):
    """Per-coordinate flow feasibility. Returns (certificate or None, flows)."""
    rows_a, rows_b, _ = w.flow_rows(a, b)
    flows = []
    for s in range(rows_a.shape[1]):
        caps_a, caps_b = rows_a[:, s], rows_b[:, s]
        value, flow, G = _max_flow(caps_a, caps_b, R)
        if value < sum(int(c) for c in caps_a):
            A = tuple(sorted(_source_side(G, flow)))
            return HallCertificate(False, A, _deficiency(a, b, R, A, w), coordinate=s), flows
        flows.append(flow)
    return None, flows


def _tight_closures(a, b, R, w: _Weights) -> list[tuple[int, ...]]:
    """Smallest tight set containing each atom, from one saturating flow of
    the summed free coordinates."""
    rows_a, rows_b, _ = w.flow_rows(a, b)
    _, flow, _ = _max_flow(rows_a.sum(axis=1), rows_b.sum(axis=1), R)
    adj_y = {j: [i for i in range(R.m) if flow[("x", i)].get(("y", j), 0) > 0] for j in range(R.n)}
    adj_x = {i: sorted(j for ii, j in R.pairs if ii == i) for i in range(R.m)}
    closures = []
    for start in range(R.m):
        seen_x, seen_y = {start}, set()
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for j in adj_x[i]:
                if j not in seen_y:
                    seen_y.add(j)
                    for i2 in adj_y[j]:
                        if i2 not in seen_x:
                            seen_x.add(i2)
                            queue.append(i2)
        closures.append(tuple(sorted(seen_x)))
    return closures


def hall_check(a: Sequence, b: Sequence, R: PairRelation, spec: GroupSpec | None = None) -> HallCertificate:
    """Decide ``sum_{i in A} a_i <= sum_{j in R_A} b_j`` for every ``A``.

    On failure the certificate names a violating set (a min-cut source side,
    or a tight set with a torsion defect) and its deficiency
    ``sum_A a - sum_{R_A} b``.
    """
    w = _Weights(spec, a[0] if a else None)
    _check_inputs(a, b, R, w)
    cert, _ = _free_check(a, b, R, w)
    if cert is not None:
        if isinstance(spec, BratteliLimit):
            g = w.sub(w.total(b[j] for j in sorted(R.neighbours(cert.violating_set))),
                      w.total(a[i] for i in cert.violating_set))
            p = spec.is_positive(g)
            if p is Positivity.UNDECIDED:
                raise Undecided(
                    "Hall inequality undecided at stage_cap",
                    violating_set=list(cert.violating_set),
                )
        return cert
    if isinstance(spec, TorsionExtended):
        seen = set()
        for A in _tight_closures(a, b, R, w):
            if A in seen:
                continue
            seen.add(A)
            d = _deficiency(a, b, R, A, w)
            if spec.is_positive(spec.neg(d)) is not Positivity.ZERO:
                return HallCertificate(False, A, d, reason="torsion defect on a tight set")
    return HallCertificate(True)


# -- strict Hall (for the strict-inequality metric) -------------------------------


def strict_hall_check(a, b, R: PairRelation) -> bool:
    """``mu(A) < nu(R_A)`` entrywise for every proper nonempty ``A``.

    Trace weights only. Enumerates subsets for small ``m``; otherwise one
    forced min-cut per ordered pair ``(i in A, k not in A)``.
    """
    m = R.m
    if m < 2:
        return True
    rows, _ = scale_to_integers([list(x) for x in list(a) + list(b)])
    rows_a, rows_b = rows[:m], rows[m:]
    mask = R.mask()
    if m <= STRICT_ENUMERATION_LIMIT:
        codes = np.arange(1, 2**m - 1)
        bits = ((codes[:, None] >> np.arange(m)) & 1).astype(np.int64)
        reach = (bits @ mask.astype(np.int64)) > 0
        lhs = bits @ rows_a
        rhs = reach.astype(np.int64) @ rows_b
        return bool(np.all(lhs < rhs))
    # the defect nu(R_A) - mu(A) is submodular, so pinning atom 0 inside
    # (resp. outside) A and one other atom outside (resp. inside) covers
    # every proper nonempty A with 2(m - 1) cuts per coordinate
    for s in range(rows_a.shape[1]):
        total = int(rows_a[:, s].sum())
        for k in range(1, m):
            for inside, outside in ((0, k), (k, 0)):
                if _forced_cut(rows_a[:, s], rows_b[:, s], mask, inside, outside) - total <= 0:
                    return False
    return True


def _forced_cut(caps_a, caps_b, mask, inside, outside) -> int:
    """Min cut ``mu(X - A) + nu(R_A)`` over ``A`` with ``inside`` in ``A``
    and ``outside`` not in ``A``."""
    caps_a = [int(c) for c in caps_a]
    caps_b = [int(c) for c in caps_b]
    m, n = len(caps_a), len(caps_b)
    big = sum(caps_a) + sum(caps_b) + 1
    if big >= 2**31 - 1:
        G = _network(caps_a, caps_b, PairRelation.from_mask(mask))
        G["s"][("x", inside)].pop("capacity")
        G.add_edge(("x", outside), "t")
        return int(nx.maximum_flow_value(G, "s", "t"))
    src, sink = m + n, m + n + 1
    rows, cols, caps = [], [], []
    for i, c in enumerate(caps_a):
        rows.append(src), cols.append(i), caps.append(big if i == inside else c)
    for j, c in enumerate(caps_b):
        rows.append(m + j), cols.append(sink), caps.append(c)
    ii, jj = np.nonzero(mask)
    rows += ii.tolist()
    cols += (m + jj).tolist()
    caps += [big] * len(ii)
    rows.append(outside), cols.append(sink), caps.append(big)
    graph = csr_matrix((np.array(caps, dtype=np.int32), (rows, cols)), shape=(m + n + 2,) * 2)
    return int(maximum_flow(graph, src, sink).flow_value)


# -- refinement ----------------------------------------------------------------


def _stack_flows(flows, m, n):
    k = len(flows)
    c = np.zeros((m, n, k), dtype=object)
    for s, flow in enumerate(flows):
        for i in range(m):
            for (tag, j), v in flow[("x", i)].items():
                c[i, j, s] = int(v)
    return c


def refine(a: Sequence, b: Sequence, R: PairRelation, spec: GroupSpec | None = None) -> TransportPlan:
    """Positive ``c_ij`` with row sums ``a_i``, column sums ``b_j`` and
    support inside ``R``."""
    w = _Weights(spec, a[0] if a else None)
    cert = hall_check(a, b, R, spec)
    if not cert.feasible:
        raise HallViolation("Hall condition fails", violating_set=list(cert.violating_set))
    _, flows = _free_check(a, b, R, w)
    m, n = R.m, R.n
    c = _stack_flows(flows, m, n)
    if spec is None:
        _, _, den = w.flow_rows(a, b)
        entries = {
            (i, j): tuple(Fraction(int(v), den) for v in c[i, j])
            for i in range(m) for j in range(n) if any(c[i, j])
        }
        return TransportPlan(entries, m, n, None)
    if isinstance(spec, TorsionExtended):
        return _refine_torsion(a, b, R, spec, c)
    stage = spec.stage_cap if isinstance(spec, BratteliLimit) else 1
    entries = {
        (i, j): spec.element([int(v) for v in c[i, j]], (), stage)
        for i in range(m) for j in range(n) if any(c[i, j])
    }
    return TransportPlan(entries, m, n, spec)


def _components(support, m, n):
    parent = list(range(m + n))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for i, j in support:
        parent[find(i)] = find(m + j)
    comp = {}
    for u in range(m + n):
        comp.setdefault(find(u), []).append(u)
    return list(comp.values())


def _torsion_balance(nodes, a, b, m, orders):
    tot = [0] * len(orders)
    for u in nodes:
        t = a[u].torsion if u < m else b[u - m].torsion
        sign = 1 if u < m else -1
        tot = [(x + sign * v) % o for x, v, o in zip(tot, t, orders)]
    return all(x == 0 for x in tot)


def _merge_cycle(c, R: PairRelation, i0, j0, s):
    """Alternating cycle through the new edge (i0, j0) that moves one unit of
    coordinate ``s`` without emptying any existing entry."""
    m, n = R.m, R.n
    adj_x = {i: sorted(j for ii, j in R.pairs if ii == i) for i in range(m)}

    def reducible(i, j):
        v = c[i, j]
        return v[s] >= 1 and any(v[t] != (1 if t == s else 0) for t in range(len(v)))

    prev = {("y", j0): None}
    queue = deque([("y", j0)])
    while queue:
        node = queue.popleft()
        if node[0] == "y":
            j = node[1]
            for i in range(m):
                if (i, j) == (i0, j0) or not reducible(i, j):
                    continue
                nxt = ("x", i)
                if i == i0:
                    prev[nxt] = node
                    path = [nxt]
                    while prev[path[-1]] is not None:
                        path.append(prev[path[-1]])
                    return list(reversed(path))
                if nxt not in prev:
                    prev[nxt] = node
                    queue.append(nxt)
        else:
            i = node[1]
            for j in adj_x[i]:
                nxt = ("y", j)
                if nxt not in prev:
                    prev[nxt] = node
                    queue.append(nxt)
    return None


def _refine_torsion(a, b, R, spec: TorsionExtended, c) -> TransportPlan:
    m, n = R.m, R.n
    orders = spec.orders
    k = spec.k

    def support():
        return {(i, j) for i in range(m) for j in range(n) if any(c[i, j])}

    while True:
        comps = _components(support(), m, n)
        bad = [set(cp) for cp in comps if not _torsion_balance(cp, a, b, m, orders)]
        if not bad:
            break
        comp_of = {}
        for idx, cp in enumerate(comps):
            for u in cp:
                comp_of[u] = idx
        merged = False
        for i0, j0 in sorted(R.pairs):
            if comp_of[i0] == comp_of[m + j0]:
                continue
            if i0 not in set().union(*bad) and (m + j0) not in set().union(*bad):
                continue
            for s in range(k):
                path = _merge_cycle(c, R, i0, j0, s)
                if path is None:
                    continue
                # path: y_j0, x_i1, y_j1, ..., x_i0 ; signs alternate starting with -
                c[i0, j0, s] += 1
                for p in range(len(path) - 1):
                    u, v = path[p], path[p + 1]
                    if u[0] == "y":
                        c[v[1], u[1], s] -= 1
                    else:
                        c[u[1], v[1], s] += 1
                merged = True
                break
            if merged:
                break
        if not merged:
            raise TorsionObstruction(
                "Hall condition holds but no torsion-consistent refinement was found",
                components=[sorted(cp) for cp in bad],
            )
    # torsion on a spanning forest of each component, leaves first
    tors = {e: [0] * len(orders) for e in support()}
    need = {i: list(a[i].torsion) for i in range(m)}
    need.update({m + j: list(b[j].torsion) for j in range(n)})
    for comp in _components(support(), m, n):
        comp = set(comp)
        edges = [(i, j) for (i, j) in support() if i in comp]
        tree = nx.minimum_spanning_tree(nx.Graph([(i, m + j) for i, j in edges])) if edges else nx.Graph()
        tree = nx.Graph(tree)
        while tree.number_of_edges():
            leaf = next(u for u in sorted(tree.nodes) if tree.degree(u) == 1)
            other = next(iter(tree[leaf]))
            val = [v % o for v, o in zip(need[leaf], orders)]
            e = (leaf, other - m) if leaf < m else (other, leaf - m)
            tors[e] = val
            need[other] = [(x - v) % o for x, v, o in zip(need[other], val, orders)]
            need[leaf] = [0] * len(orders)
            tree.remove_node(leaf)
    entries = {
        (i, j): spec.element([int(v) for v in c[i, j]], tors[(i, j)])
        for (i, j) in sorted(support())
    }
    return TransportPlan(entries, m, n, spec)


def verify_plan(a, b, R: PairRelation, plan: TransportPlan, spec: GroupSpec | None = None) -> list[str]:
    """Independent check of a plan's marginals, positivity and support.
    Returns a list of problems (empty when the plan is valid)."""
    w = _Weights(spec, a[0] if a else None)
    problems = []
    for (i, j), cij in plan.entries.items():
        if (i, j) not in R.pairs:
            problems.append(f"entry ({i},{j}) outside the relation")
        p = w.positivity(cij)
        if p is not Positivity.POSITIVE:
            problems.append(f"entry ({i},{j}) is {p.value}")
    for i in range(R.m):
        row = w.total(v for (ii, _), v in plan.entries.items() if ii == i)
        if w.positivity(w.sub(row, a[i])) is not Positivity.ZERO:
            problems.append(f"row {i} does not sum to a[{i}]")
    for j in range(R.n):
        col = w.total(v for (_, jj), v in plan.entries.items() if jj == j)
        if w.positivity(w.sub(col, b[j])) is not Positivity.ZERO:
            problems.append(f"column {j} does not sum to b[{j}]")
    return problems


# -- bottleneck ----------------------------------------------------------------


@dataclass
class BottleneckResult:
    radius: float
    plan: TransportPlan | None
    tight: HallCertificate | None
    relation: PairRelation
    note: str = ""

    def to_json(self):
        out = {"radius": self.radius, "plan": self.plan.to_json() if self.plan else None}
        if self.tight is not None:
            out["tight"] = self.tight.to_json()
        if self.note:
            out["note"] = self.note
        return out


def candidate_radii(X, Y) -> np.ndarray:
    d = pairwise_distances(X, Y)
    return np.unique(np.concatenate([[0.0], d.ravel()]))


def _weights_of(h, order):
    if order == "trace":
        return list(h.masses), None
    return list(h.classes), h.model.group


def first_feasible(cands, feasible) -> int:
    """Smallest index with ``feasible(cands[idx])``; feasibility is monotone."""
    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return lo


def bottleneck(phi, psi, order: str = "group", with_plan: bool = True) -> BottleneckResult:
    """Smallest candidate radius at which the distance-threshold relation
    passes Hall's condition, with a refinement and the infeasibility
    certificate one candidate below."""
    if order not in ("group", "trace"):
        raise ValidationError("order must be 'group' or 'trace'")
    a, spec = _weights_of(phi, order)
    b, _ = _weights_of(psi, order)
    D = pairwise_distances(phi.points, psi.points)
    cands = candidate_radii(phi.points, psi.points)

    def relation(r):
        return PairRelation.from_mask(D <= r)

    idx = first_feasible(cands, lambda r: hall_check(a, b, relation(r), spec).feasible)
    r = float(cands[idx])
    R = relation(r)
    if not hall_check(a, b, R, spec).feasible:
        raise ValidationError("infeasible at the largest radius; totals must differ")
    tight = hall_check(a, b, relation(cands[idx - 1]), spec) if idx > 0 else None
    plan, note = None, ""
    if with_plan:
        try:
            plan = refine(a, b, R, spec)
        except TorsionObstruction as exc:
            note = str(exc)
    return BottleneckResult(r, plan, tight, R, note)

