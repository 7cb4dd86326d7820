"""Relation instances and normalization to standard form.

Every rewrite step is justified by an explicit relation instance, so a run
can be replayed and audited: if a step turns ``c*m`` into ``c*out`` using
instance ``R`` with leading monomial ``L`` (coefficient ``c_L`` inside
``R``) and quotient ``Q = m / L``, then ``c*m - c*out = (c/c_L) * Q * R``.
Summing over the recorded steps telescopes to ``input - output``, which is
what :meth:`Certificate.verify` checks.

Instance families
-----------------

``R1a``
    ``(d(i,j) + K[j]) * D(I)`` for an ordered pair ``i, j`` in ``I``.
``R1b``
    ``(d(i,k) - d(j,k)) * D(I)`` for ``i, j`` in ``I`` and ``k`` outside.
``R2``
    ``prod_{j in I, j != i} (d(i,j) - E(I))`` where ``E(I)`` sums ``D(J)``
    over all supersets ``J`` of ``I``.
``R3``
    the block family built from a strictly increasing index sequence; see
    :func:`instance_R3`.  Vertex reductions are its main consumer.
``V0``
    ``D(I) * D(J)`` for two sets that overlap without nesting.
``V1``
    a single monomial that vanishes for dimension reasons: either it has a
    kappa index above ``g - 2``, or its non-exceptional part has markings
    inside the marking set ``S`` of its forest but degree above
    ``g - 2 + |S|``.
``CS``
    ``d(i,j)^2 + d(i,j)*K[i]`` with ``i < j`` (diagonal self-intersection).
``CK``
    ``d(i,j)*K[j] - d(i,j)*K[i]`` with ``i < j``.
``CD``
    ``d(i,j)*d(j,k) - d(i,j)*d(i,k)`` for distinct indices (transitivity
    along a diagonal).

The normalizer applies a fixed priority of steps until no step applies;
the result is supported on standard monomials whenever the context uses the
``complement`` marking-set mode.  Termination is enforced by a step budget
and, on the memoized path, by cycle detection.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .core import (
    DIAG,
    KAPPA,
    Monomial,
    POINT,
    Polynomial,
    RingContext,
    diag,
    exc,
    point_k,
    relabel,
)
from .forest import ZERO_CLASS, build_forest, marking_set, nested_or_disjoint


class NonTermination(RuntimeError):
    """Normalization exceeded its step budget or found a rewrite cycle."""


class ReductionStuck(NonTermination):
    """An over-bound vertex is fully covered by its children, so no block
    relation with that vertex as its head exists.  Needs n >= 6 to occur."""


@dataclass(frozen=True)
class RelationInstance:
    family: str
    params: tuple
    poly: Polynomial

    def describe(self) -> dict:
        return {
            "family": self.family,
            "params": _jsonable(self.params),
            "relation": repr(self.poly),
        }


def _jsonable(obj):
    if isinstance(obj, Monomial):
        return repr(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (tuple, list)):
        return [_jsonable(x) for x in obj]
    return obj


def _mono(*symbols) -> Monomial:
    return Monomial.from_symbols(*symbols)


def _poly(m: Monomial, c=1) -> Polynomial:
    return Polynomial.monomial(m, Fraction(c))


def superset_sum(ctx: RingContext, members: Iterable[int]) -> Polynomial:
    """Sum of ``D(J)`` over all supersets ``J`` of ``members`` (``|J| >= 3``)."""
    base = frozenset(members)
    rest = sorted(set(ctx.markings) - base)
    out = Polynomial.zero()
    for r in range(len(rest) + 1):
        for extra in itertools.combinations(rest, r):
            J = tuple(sorted(base | set(extra)))
            if len(J) >= 3:
                out = out + _poly(_mono(exc(J)))
    return out


def derived_pair_class(ctx: RingContext, i: int, j: int) -> Polynomial:
    """The boundary class of a two-element set, expressed in generators:
    ``d(i,j) - sum of D(J) over J strictly containing {i, j}``."""
    if i == j:
        raise ValueError("need two distinct markings")
    return _poly(_mono(diag(i, j))) - superset_sum(ctx, (i, j))


def instance_R1a(ctx: RingContext, members: Sequence[int], i: int, j: int) -> RelationInstance:
    I = tuple(sorted(members))
    if i not in I or j not in I or i == j:
        raise ValueError(f"R1a needs distinct i, j inside I, got {i}, {j}, {I}")
    poly = (_poly(_mono(diag(i, j))) + _poly(_mono(point_k(j)))) * _poly(_mono(exc(I)))
    return RelationInstance("R1a", (I, i, j), poly)


def instance_R1b(ctx: RingContext, members: Sequence[int], i: int, j: int, k: int) -> RelationInstance:
    I = tuple(sorted(members))
    if i not in I or j not in I or i == j or k in I:
        raise ValueError(f"R1b needs i != j inside I and k outside, got {i}, {j}, {k}, {I}")
    poly = (_poly(_mono(diag(i, k))) - _poly(_mono(diag(j, k)))) * _poly(_mono(exc(I)))
    return RelationInstance("R1b", (I, i, j, k), poly)


def instance_R2(ctx: RingContext, members: Sequence[int], pivot: Optional[int] = None) -> RelationInstance:
    I = tuple(sorted(members))
    if len(I) < 3:
        raise ValueError("R2 needs a set of at least three markings")
    if pivot is None:
        pivot = I[0]
    if pivot not in I:
        raise ValueError(f"pivot {pivot} not in {I}")
    E = superset_sum(ctx, I)
    out = Polynomial.one()
    for j in I:
        if j != pivot:
            out = out * (_poly(_mono(diag(pivot, j))) - E)
    return RelationInstance("R2", (I, pivot), out)


def instance_R3(ctx: RingContext, rseq: Sequence[int],
                sigma: Optional[Sequence[int]] = None) -> RelationInstance:
    """Block relation for a strictly increasing sequence ``r_1 < ... < r_{k+1}``.

    Under identity labels the head set is ``I_0 = {1..r_{k+1}}`` (at least
    three elements) and the blocks are the runs ``I_j = {r_j + 1 .. r_{j+1}}``.
    The relation is ``P(-E(I_0)) * prod_j [I_j]`` where

    * ``P(t) = prod_{i=2}^{r_1} (t + d(1,i)) * prod_{j=1}^{k} (t + d(1, r_j+1))``,
    * ``[I_j]`` is ``D(I_j)`` when the block has three or more elements and
      the :func:`derived_pair_class` when it has exactly two,

    and the whole polynomial is finally relabeled by ``sigma`` (a sequence
    with ``sigma[t-1]`` the image of ``t``; identity when omitted).  Blocks
    of size one are rejected.  The coefficient of
    ``D(I_0)^B * prod_j D(I_j)`` is ``(-1)^B`` with ``B = r_1 - 1 + k``.
    """
    rseq = tuple(rseq)
    if not rseq or any(b <= a for a, b in zip(rseq, rseq[1:])):
        raise ValueError(f"need a strictly increasing sequence, got {rseq}")
    if rseq[0] < 1 or rseq[-1] > ctx.n:
        raise ValueError(f"sequence {rseq} leaves the marking range of n={ctx.n}")
    if rseq[-1] < 3:
        raise ValueError("head set needs at least three markings")
    blocks = [tuple(range(a + 1, b + 1)) for a, b in zip(rseq, rseq[1:])]
    if any(len(b) == 1 for b in blocks):
        raise ValueError("blocks of size one are not allowed")
    E = superset_sum(ctx, range(1, rseq[-1] + 1))
    out = Polynomial.one()
    for i in range(2, rseq[0] + 1):
        out = out * (_poly(_mono(diag(1, i))) - E)
    for r in rseq[:-1]:
        out = out * (_poly(_mono(diag(1, r + 1))) - E)
    for b in blocks:
        if len(b) == 2:
            out = out * derived_pair_class(ctx, *b)
        else:
            out = out * _poly(_mono(exc(b)))
    if sigma is None:
        sigma = tuple(ctx.markings)
    else:
        sigma = tuple(sigma)
        out = relabel(ctx, out, sigma)
    return RelationInstance("R3", (rseq, sigma), out)


def instance_V0(ctx: RingContext, members_a: Sequence[int], members_b: Sequence[int]) -> RelationInstance:
    I = tuple(sorted(members_a))
    J = tuple(sorted(members_b))
    if nested_or_disjoint(frozenset(I), frozenset(J)):
        raise ValueError(f"{I} and {J} nest or are disjoint; their product is not zero on shape grounds")
    return RelationInstance("V0", (I, J), _poly(_mono(exc(I), exc(J))))


def instance_V1(ctx: RingContext, m: Monomial, reason: str) -> RelationInstance:
    if reason not in ("kappa", "degree"):
        raise ValueError(f"unknown V1 reason {reason!r}")
    return RelationInstance("V1", (reason, m), _poly(m))


def instance_CS(ctx: RingContext, i: int, j: int) -> RelationInstance:
    if not i < j:
        raise ValueError("need i < j")
    d = _mono(diag(i, j))
    poly = _poly(d * d) + _poly(d * _mono(point_k(i)))
    return RelationInstance("CS", (i, j), poly)


def instance_CK(ctx: RingContext, i: int, j: int) -> RelationInstance:
    if not i < j:
        raise ValueError("need i < j")
    d = _mono(diag(i, j))
    poly = _poly(d * _mono(point_k(j))) - _poly(d * _mono(point_k(i)))
    return RelationInstance("CK", (i, j), poly)


def instance_CD(ctx: RingContext, i: int, j: int, k: int) -> RelationInstance:
    if len({i, j, k}) != 3:
        raise ValueError("need three distinct markings")
    dij = _mono(diag(i, j))
    poly = _poly(dij * _mono(diag(j, k))) - _poly(dij * _mono(diag(i, k)))
    return RelationInstance("CD", (i, j, k), poly)


# ---------------------------------------------------------------------------
# vertex reduction


Step = tuple[RelationInstance, Monomial, Fraction]


def vertex_reduction(ctx: RingContext, forest, vertex: int, pivot: str = "min") -> Step:
    """Reduction step data for an over-bound forest vertex.

    Returns ``(instance, L, c_L)`` where ``L = D(V)^B * prod children`` is
    the leading monomial of the relation and ``c_L = (-1)^B`` its
    coefficient.  Raises :class:`ReductionStuck` when the vertex is fully
    covered by its children so that no block relation is headed by it.
    """
    V = forest.vertex_set(vertex)
    child_sets = sorted(
        (forest.vertex_set(c) for c in forest.children[vertex]), key=lambda s: s[0]
    )
    covered = set().union(*map(set, child_sets)) if child_sets else set()
    free = sorted(set(V) - covered)
    if not free:
        raise ReductionStuck(
            f"vertex {V} is covered by its children {child_sets}; "
            "no reduction relation is headed by it"
        )
    anchor = free[0] if pivot == "min" else free[-1]
    images = [anchor] + [x for x in free if x != anchor]
    rseq = [len(free)]
    for c in child_sets:
        images.extend(c)
        rseq.append(rseq[-1] + len(c))
    if rseq[-1] != len(V):
        raise AssertionError("children must partition a subset of the vertex")
    used = set(images)
    images.extend(x for x in ctx.markings if x not in used)
    sigma = [0] * ctx.n
    for t, img in enumerate(images, start=1):
        sigma[t - 1] = img
    inst = instance_R3(ctx, rseq, tuple(sigma))
    B = forest.bound_total(vertex)
    L = Monomial.from_pairs([(exc(V), B)] + [(exc(c), 1) for c in child_sets])
    return inst, L, Fraction(-1) ** B


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class CertificateStep:
    instance: RelationInstance
    quotient: Monomial
    coeff: Fraction

    def contribution(self) -> Polynomial:
        return self.instance.poly.mul_monomial(self.quotient, self.coeff)

    def describe(self) -> dict:
        out = self.instance.describe()
        out["quotient"] = repr(self.quotient)
        out["coeff"] = str(self.coeff)
        return out


@dataclass(frozen=True)
class Certificate:
    steps: tuple[CertificateStep, ...]

    def total(self) -> Polynomial:
        out = Polynomial.zero()
        for s in self.steps:
            out = out + s.contribution()
        return out

    def residual(self, source: Polynomial, result: Polynomial) -> Polynomial:
        return (source - result) - self.total()

    def verify(self, source: Polynomial, result: Polynomial) -> bool:
        return self.residual(source, result).is_zero

    def describe(self) -> dict:
        return {"steps": [s.describe() for s in self.steps]}


def apply_step(m: Monomial, step: Step) -> Polynomial:
    """Rewrite ``m`` by one step: ``m -> m - (1/c_L) * (m/L) * relation``."""
    inst, L, c_L = step
    Q = m.try_div(L)
    if Q is None:
        raise ValueError(f"leading monomial {L!r} does not divide {m!r}")
    rest = inst.poly - _poly(L, c_L)
    return rest.mul_monomial(Q, Fraction(-1) / c_L)


# ---------------------------------------------------------------------------
# the normalizer


class _Frame:
    __slots__ = ("m", "terms", "idx", "acc")

    def __init__(self, m: Monomial):
        self.m = m
        self.terms = None
        self.idx = 0
        self.acc = Polynomial.zero()


class Normalizer:
    """Rewrites polynomials to their standard normal form.

    ``pivot`` picks the anchor of vertex reductions ("min" or "max"); both
    must produce equal normal forms, which the test suite exercises.
    ``max_steps`` caps the number of rewrite steps a single call may take.
    """

    def __init__(self, ctx: RingContext, pivot: str = "min", max_steps: int = 10 ** 6):
        if pivot not in ("min", "max"):
            raise ValueError(f"pivot must be 'min' or 'max', got {pivot!r}")
        self.ctx = ctx
        self.pivot = pivot
        self.max_steps = max_steps
        self._memo: dict[Monomial, Polynomial] = {}
        self._budget = 0

    # -- step search ------------------------------------------------------

    def find_step(self, m: Monomial) -> Optional[Step]:
        """First applicable rewrite step for ``m`` in priority order."""
        ctx = self.ctx
        for s, _ in m.pairs:
            if s.kind == KAPPA and s.params[0] > ctx.g - 2:
                return instance_V1(ctx, m, "kappa"), m, Fraction(1)
        forest = build_forest(ctx, m)
        if forest is ZERO_CLASS:
            items = m.exc_items()
            for (a, _), (b, _) in itertools.combinations(items, 2):
                if not nested_or_disjoint(frozenset(a), frozenset(b)):
                    inst = instance_V0(ctx, a, b)
                    return inst, _mono(exc(a), exc(b)), Fraction(1)
            raise AssertionError("zero class without an overlapping pair")

        root_sets = [forest.vertex_set(r) for r in forest.roots]
        root_of = {}
        for rs in root_sets:
            for x in rs:
                root_of[x] = rs

        # diagonal inside a root: replace it by -K on the root minimum
        for s, _ in m.pairs:
            if s.kind != DIAG:
                continue
            u, v = s.params
            ru = root_of.get(u)
            if ru is not None and ru is root_of.get(v):
                inst = instance_R1a(ctx, ru, v, u)
                return inst, _mono(s, exc(ru)), Fraction(1)

        # K on a covered marking that is not its root minimum
        for s, _ in m.pairs:
            if s.kind != POINT:
                continue
            x = s.params[0]
            rx = root_of.get(x)
            if rx is not None and x != rx[0]:
                inst = instance_R1a(ctx, rx, rx[0], x)
                return inst, _mono(s, exc(rx)), Fraction(1)

        # diagonal leg on a covered non-minimal marking, other leg outside
        for s, _ in m.pairs:
            if s.kind != DIAG:
                continue
            u, v = s.params
            for a, b in ((u, v), (v, u)):
                ra = root_of.get(a)
                if ra is not None and b not in ra and a != ra[0]:
                    inst = instance_R1b(ctx, ra, a, ra[0], b)
                    return inst, _mono(s, exc(ra)), Fraction(1)

        # dimension kill of the non-exceptional part
        S = marking_set(ctx, forest)
        apart = m.a_part()
        if apart.degree > ctx.g - 2 + len(S) and apart.marking_indices() <= S:
            return instance_V1(ctx, m, "degree"), m, Fraction(1)

        # over-bound vertices, deepest first
        over = [
            i for i in range(len(forest.vertices))
            if forest.exponent(i) > forest.exponent_bound(i)
        ]
        if over:
            over.sort(key=lambda i: (-forest.depth[i], -forest.exponent(i), forest.vertex_set(i)))
            return vertex_reduction(ctx, forest, over[0], self.pivot)

        # cluster form: squares of diagonals
        for s, e in m.pairs:
            if s.kind == DIAG and e >= 2:
                i, j = s.params
                return instance_CS(ctx, i, j), _mono(s, s), Fraction(1)

        # cluster form: re-anchor chained diagonals at the smaller index
        diags = [s for s, _ in m.pairs if s.kind == DIAG]
        for f, h in itertools.permutations(diags, 2):
            shared = set(f.params) & set(h.params)
            if len(shared) != 1:
                continue
            y = shared.pop()
            x = f.params[0] if f.params[1] == y else f.params[1]
            z = h.params[0] if h.params[1] == y else h.params[1]
            if x < y:
                inst = instance_CD(ctx, x, y, z)
                return inst, _mono(f, h), Fraction(1)

        # cluster form: K belongs on the anchor of its cluster
        points = [s for s, _ in m.pairs if s.kind == POINT]
        for p in points:
            y = p.params[0]
            for f in diags:
                if y == f.params[1]:
                    x = f.params[0]
                    inst = instance_CK(ctx, x, y)
                    return inst, _mono(f, p), Fraction(1)
        return None

    # -- bookkeeping ------------------------------------------------------

    def _spend(self, m: Monomial) -> None:
        self._budget -= 1
        if self._budget < 0:
            raise NonTermination(
                f"gave up after {self.max_steps} rewrite steps (last monomial: {m!r})"
            )

    # -- memoized normalization (no certificate) ---------------------------

    def normalize_monomial(self, m: Monomial) -> Polynomial:
        self._budget = self.max_steps
        return self._normalize_monomial(m)

    def _normalize_monomial(self, m: Monomial) -> Polynomial:
        memo = self._memo
        if m in memo:
            return memo[m]
        gray = {m}
        stack = [_Frame(m)]
        while stack:
            fr = stack[-1]
            if fr.terms is None:
                step = self.find_step(fr.m)
                if step is None:
                    memo[fr.m] = _poly(fr.m)
                    gray.discard(fr.m)
                    stack.pop()
                    continue
                self._spend(fr.m)
                fr.terms = list(apply_step(fr.m, step).items())
            while fr.idx < len(fr.terms):
                child, coeff = fr.terms[fr.idx]
                got = memo.get(child)
                if got is None:
                    break
                fr.acc = fr.acc + got.scale(coeff)
                fr.idx += 1
            if fr.idx < len(fr.terms):
                child = fr.terms[fr.idx][0]
                if child in gray:
                    raise NonTermination(f"rewrite cycle through {child!r}")
                gray.add(child)
                stack.append(_Frame(child))
                continue
            memo[fr.m] = fr.acc
            gray.discard(fr.m)
            stack.pop()
        return memo[m]

    # -- certified normalization -------------------------------------------

    def normalize_recorded(self, poly: Polynomial) -> tuple[Polynomial, Certificate]:
        self._budget = self.max_steps
        work: dict[Monomial, Fraction] = {}
        for m, c in poly.items():
            work[m] = work.get(m, Fraction(0)) + c
        done: dict[Monomial, Fraction] = {}
        steps: list[CertificateStep] = []
        while work:
            m = min(work)
            c = work.pop(m)
            if c == 0:
                continue
            step = self.find_step(m)
            if step is None:
                done[m] = done.get(m, Fraction(0)) + c
                continue
            self._spend(m)
            inst, L, c_L = step
            steps.append(CertificateStep(inst, m.try_div(L), c / c_L))
            for m2, c2 in apply_step(m, step).items():
                work[m2] = work.get(m2, Fraction(0)) + c * c2
        result = Polynomial(done)
        return result, Certificate(tuple(steps))

    def normalize(self, poly: Polynomial, record: bool = False):
        """Normal form of ``poly``; with ``record=True`` also the certificate."""
        if record:
            return self.normalize_recorded(poly)
        self._budget = self.max_steps
        out = Polynomial.zero()
        for m, c in poly.items():
            out = out + self._normalize_monomial(m).scale(c)
        return out
