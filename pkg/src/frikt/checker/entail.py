"""Entailment for conjunctions of difference constraints ``x - y <= c``.

A conjunction of such constraints over the integers is encoded as a weighted
graph with an edge ``y -> x`` of weight ``c``.  It is unsatisfiable exactly
when the graph has a negative cycle, and when satisfiable the tightest
implied bound on ``x - y`` is the shortest-path distance from ``y`` to ``x``.
Both facts are decided by Bellman-Ford, which keeps the procedure complete
for this fragment.  Every edge carries a label so that callers can report
which hypotheses a conclusion used.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

ZERO = "0"


@dataclass(frozen=True)
class DiffConstraint:
    """``x - y <= c``.  Use :data:`ZERO` for a constant side."""

    x: str
    y: str
    c: int
    label: str = ""

    def __str__(self):
        if self.y == ZERO:
            return f"{self.x} <= {self.c}"
        if self.x == ZERO:
            return f"{self.y} >= {-self.c}"
        return f"{self.x} - {self.y} <= {self.c}"

    def negated(self, label="negated goal") -> "DiffConstraint":
        """``not (x - y <= c)`` is ``y - x <= -c - 1`` over the integers."""
        return DiffConstraint(self.y, self.x, -self.c - 1, label)


def upper(x, c, label=""):
    return DiffConstraint(x, ZERO, c, label)


def lower(x, c, label=""):
    return DiffConstraint(ZERO, x, -c, label)


class DiffGraph:
    def __init__(self, constraints: Iterable[DiffConstraint]):
        best = {}
        for k in constraints:
            if k.x == k.y:
                if k.c < 0:
                    best[(k.y, k.x)] = k  # x - x <= negative: immediately infeasible
                continue
            key = (k.y, k.x)
            if key not in best or k.c < best[key].c:
                best[key] = k
        self.edges = list(best.values())
        self.nodes = sorted({ZERO} | {k.x for k in self.edges} | {k.y for k in self.edges})
        self._infeasible = None

    def _relax_all(self, dist, pred):
        changed = None
        for k in self.edges:
            du = dist.get(k.y)
            if du is None:
                continue
            nd = du + k.c
            if k.x not in dist or nd < dist[k.x]:
                dist[k.x] = nd
                pred[k.x] = k
                changed = k.x
        return changed

    def negative_cycle(self) -> Optional[list]:
        """Edges of some negative cycle, or None if the constraints are satisfiable."""
        if self._infeasible is not None:
            return self._infeasible or None
        for k in self.edges:
            if k.x == k.y and k.c < 0:
                self._infeasible = [k]
                return self._infeasible
        dist = {n: 0 for n in self.nodes}
        pred = {}
        last = None
        for _ in range(len(self.nodes) + 1):
            last = self._relax_all(dist, pred)
            if last is None:
                break
        if last is None:
            self._infeasible = []
            return None
        v = last
        for _ in range(len(self.nodes)):
            v = pred[v].y
        cycle, u = [], v
        while True:
            k = pred[u]
            cycle.append(k)
            u = k.y
            if u == v:
                break
        self._infeasible = cycle[::-1]
        return self._infeasible

    def feasible(self) -> bool:
        return self.negative_cycle() is None

    def shortest(self, src: str, dst: str):
        """(distance, path edges) from src to dst; distance None if unreachable.

        Only meaningful when the graph is feasible.
        """
        if src == dst:
            return 0, []
        dist = {src: 0}
        pred = {}
        for _ in range(len(self.nodes)):
            if self._relax_all(dist, pred) is None:
                break
        if dst not in dist:
            return None, []
        path, u = [], dst
        while u != src:
            k = pred[u]
            path.append(k)
            u = k.y
        return dist[dst], path[::-1]

    def max_diff(self, x: str, y: str):
        """Tightest implied upper bound on x - y with supporting edges (None if unbounded)."""
        return self.shortest(y, x)

    def upper_bound(self, x: str):
        return self.shortest(ZERO, x)

    def lower_bound(self, x: str):
        d, path = self.shortest(x, ZERO)
        return (None if d is None else -d), path


def entails_with_support(facts: Iterable[DiffConstraint], goal: DiffConstraint):
    """(entailed?, labels of the facts the conclusion rests on)."""
    g = DiffGraph(facts)
    cycle = g.negative_cycle()
    if cycle is not None:
        return True, frozenset(k.label for k in cycle)
    d, path = g.max_diff(goal.x, goal.y)
    if d is not None and d <= goal.c:
        return True, frozenset(k.label for k in path)
    return False, frozenset()


def entails(facts: Iterable[DiffConstraint], goal: DiffConstraint) -> bool:
    """Sound and complete for difference logic over the integers."""
    return entails_with_support(facts, goal)[0]
