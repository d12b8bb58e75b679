"""Two-pattern conjunctive joins over a :class:`TripleStore`.

Queries are grouped by how much is left unbound:

* A, B, C: the non-join subject/object of each pattern is a constant; zero,
  one or two predicates are variables. Each side reduces to an ascending
  list of join values and the lists are merge-intersected.
* D, E, F: at least one non-join subject/object is a variable. One pattern
  seeds the join values, which are substituted into the other pattern.
  E and F repeat D for every predicate of the unbound side(s).
"""

from __future__ import annotations

import bisect
import enum
from dataclasses import dataclass, field
from typing import Sequence

from .triplestore import TriplePattern, TripleStore, is_var

SUBJECT, PREDICATE, OBJECT = 0, 1, 2


class JoinError(ValueError):
    pass


class Axis(str, enum.Enum):
    SS = "SS"
    OO = "OO"
    SO = "SO"


@dataclass(frozen=True)
class JoinQuery:
    left: TriplePattern
    right: TriplePattern
    join_var: str = field(init=False)
    axis: Axis = field(init=False)

    def __post_init__(self):
        left, right = TriplePattern(*self.left), TriplePattern(*self.right)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        for pat in (left, right):
            names = pat.variables
            if len(set(names)) != len(names):
                raise JoinError(f"variable repeated inside pattern {pat}")
        shared = set(left.variables) & set(right.variables)
        if len(shared) != 1:
            raise JoinError(f"patterns must share exactly one variable, found {len(shared)}"
                            + (f": {sorted(shared)}" if shared else ""))
        var = shared.pop()
        lpos, rpos = left.index(var), right.index(var)
        if PREDICATE in (lpos, rpos):
            raise JoinError(f"join variable ?{var} may not sit in a predicate position")
        axis = Axis.SS if lpos == rpos == SUBJECT else Axis.OO if lpos == rpos == OBJECT else Axis.SO
        object.__setattr__(self, "join_var", var)
        object.__setattr__(self, "axis", axis)

    @property
    def variables(self) -> tuple[str, ...]:
        """Join variable first, then the rest in order of appearance."""
        out = [self.join_var]
        for pat in (self.left, self.right):
            out.extend(v for v in pat.variables if v not in out)
        return tuple(out)

    def __str__(self) -> str:
        return f"{self.left} {self.right}"


@dataclass
class BindingSet:
    variables: tuple[str, ...]
    rows: list[tuple[int, ...]]

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def as_dicts(self) -> list[dict[str, int]]:
        return [dict(zip(self.variables, row)) for row in self.rows]


def classify(q: JoinQuery) -> str:
    unbound_preds = is_var(q.left.p) + is_var(q.right.p)
    free = any(
        is_var(pat[pos]) and pat[pos] != q.join_var
        for pat in (q.left, q.right)
        for pos in (SUBJECT, OBJECT)
    )
    return ("DEF" if free else "ABC")[unbound_preds]


def intersect_sorted(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Merge-intersect two strictly ascending lists in one pass."""
    assert all(x < y for x, y in zip(a, a[1:])), "left input not strictly ascending"
    assert all(x < y for x, y in zip(b, b[1:])), "right input not strictly ascending"
    out = []
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        x, y = a[i], b[j]
        if x < y:
            i += 1
        elif x > y:
            j += 1
        else:
            out.append(x)
            i += 1
            j += 1
    return out


def execute(store: TripleStore, q: JoinQuery, touched: set[int] | None = None) -> BindingSet:
    """All bindings satisfying both patterns, sorted by join value then the other variables."""
    category = classify(q)
    # Subject-only and object-only IDs above |SO| name different terms.
    limit = store.sizes[0] if q.axis is Axis.SO else None
    runner = _ListJoin if category in "ABC" else _SeedJoin
    rows = runner(store, q, limit, touched).run()
    order = q.variables
    out = sorted({tuple(row[v] for v in order) for row in rows})
    return BindingSet(order, out)


def tree_access_count(store: TripleStore, q: JoinQuery) -> int:
    touched: set[int] = set()
    execute(store, q, touched)
    return len(touched)


def _clip(values: list[int], limit: int | None) -> list[int]:
    if limit is None:
        return values
    return values[:bisect.bisect_right(values, limit)]


def _predicates(store: TripleStore, pat: TriplePattern) -> list[int]:
    if is_var(pat.p):
        return list(range(1, store.num_predicates + 1))
    return [pat.p]


class _Join:
    def __init__(self, store: TripleStore, q: JoinQuery, limit: int | None, touched: set[int] | None):
        self.store = store
        self.q = q
        self.var = q.join_var
        self.limit = limit
        self.touched = touched


class _ListJoin(_Join):
    """Categories A, B and C."""

    def values(self, pat: TriplePattern, p: int) -> list[int]:
        if pat.s == self.var:
            found = self.store.subjects(p, pat.o, self.touched)
        else:
            found = self.store.objects(pat.s, p, self.touched)
        return _clip(found, self.limit)

    def run(self) -> list[dict[str, int]]:
        left, right = self.q.left, self.q.right
        # Bounded sides are resolved once; unbounded sides once per predicate.
        left_lists = {p: self.values(left, p) for p in _predicates(self.store, left)}
        right_lists = {p: self.values(right, p) for p in _predicates(self.store, right)}
        rows = []
        for p1, lvals in left_lists.items():
            if not lvals:
                continue
            for p2, rvals in right_lists.items():
                for v in intersect_sorted(lvals, rvals):
                    row = {self.var: v}
                    if is_var(left.p):
                        row[left.p] = p1
                    if is_var(right.p):
                        row[right.p] = p2
                    rows.append(row)
        return rows


class _SeedJoin(_Join):
    """Categories D, E and F."""

    def __init__(self, *args):
        super().__init__(*args)
        # With unbounded predicates the same bound pattern recurs across predicate pairs.
        self._memo: dict[TriplePattern, list[tuple[int, int, int]]] = {}

    def solve(self, pat: TriplePattern) -> list[tuple[int, int, int]]:
        found = self._memo.get(pat)
        if found is None:
            found = self._memo[pat] = list(self.store.solve(pat, self.touched))
        return found

    def run(self) -> list[dict[str, int]]:
        left, right = self.q.left, self.q.right
        rows = []
        for p2 in _predicates(self.store, right):
            for p1 in _predicates(self.store, left):
                bound_left = left._replace(p=p1)
                bound_right = right._replace(p=p2)
                for row in self.seeded(bound_left, bound_right):
                    if is_var(left.p):
                        row[left.p] = p1
                    if is_var(right.p):
                        row[right.p] = p2
                    rows.append(row)
        return rows

    def other_slot(self, pat: TriplePattern):
        return pat.o if pat.s == self.var else pat.s

    def choose_seed(self, left: TriplePattern, right: TriplePattern) -> tuple[TriplePattern, TriplePattern]:
        left_const = not is_var(self.other_slot(left))
        right_const = not is_var(self.other_slot(right))
        if left_const != right_const:
            return (left, right) if left_const else (right, left)
        # No constant to anchor on: enumerate the sparser predicate first.
        if self.store.trees[right.p - 1].ones < self.store.trees[left.p - 1].ones:
            return right, left
        return left, right

    def seeded(self, left: TriplePattern, right: TriplePattern) -> list[dict[str, int]]:
        seed, probe = self.choose_seed(left, right)
        seed_pos = seed.index(self.var)
        groups: dict[int, list[dict[str, int]]] = {}
        for triple in self.solve(seed):
            v = triple[seed_pos]
            if self.limit is not None and v > self.limit:
                continue
            groups.setdefault(v, []).append(_bindings(seed, triple))
        rows = []
        for v in sorted(groups):
            bound = probe.bind(self.var, v)
            for triple in self.solve(bound):
                extra = _bindings(probe, triple)
                for base in groups[v]:
                    rows.append({**base, **extra})
        return rows


def _bindings(pat: TriplePattern, triple: tuple[int, int, int]) -> dict[str, int]:
    return {x: value for x, value in zip(pat, triple) if is_var(x)}
