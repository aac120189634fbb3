"""Lifting problems, coalgebra/algebra witnesses and certificates.

Witness searches are exhaustive and deterministic: the first filler in the
lexicographic order of :meth:`Ambient.hom_enum` is returned.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from itertools import islice

from .ambient import FINSET, Ambient, FinSetMap, FinSetObject, ambient_of
from .kernel import Functor, Report, StructuralError
from .shapes import (
    FactorizationAssignment, FactorizationOfMorphism, Square, Universe, describe,
)


@dataclass(frozen=True)
class LiftingProblem:
    """Square ``right . top == bottom . left``; a filler goes ``cod left -> dom right``."""

    left: object
    right: object
    top: object
    bottom: object

    def __post_init__(self):
        amb = ambient_of(self.left)
        if (amb.dom(self.top) != amb.dom(self.left) or amb.cod(self.top) != amb.dom(self.right)
                or amb.dom(self.bottom) != amb.cod(self.left) or amb.cod(self.bottom) != amb.cod(self.right)):
            raise StructuralError("lifting problem edges do not line up")

    @property
    def ambient(self) -> Ambient:
        return ambient_of(self.left)

    def commutes(self) -> bool:
        amb = self.ambient
        return amb.compose(self.right, self.top) == amb.compose(self.bottom, self.left)

    def is_filler(self, d) -> bool:
        amb = self.ambient
        return (amb.dom(d) == amb.cod(self.left) and amb.cod(d) == amb.dom(self.right)
                and amb.compose(d, self.left) == self.top and amb.compose(self.right, d) == self.bottom)


@dataclass(frozen=True)
class LiftWitness:
    problem: LiftingProblem
    diagonal: object

    def check(self) -> bool:
        return self.problem.is_filler(self.diagonal)


class _Fibre:
    """Morphisms sent by ``functor`` to ``value``, as a membership test."""

    __slots__ = ("functor", "value")

    def __init__(self, functor, value):
        self.functor, self.value = functor, value

    def __contains__(self, m) -> bool:
        return self.functor.mor(m) == self.value


def _constraints(p: LiftingProblem):
    """Allowed images for the filler, per object and per morphism."""
    amb = p.ambient
    b = amb.cod(p.left)
    x = amb.dom(p.right)
    if amb is FINSET:
        fibre: dict = {}
        for e in x.elements:
            fibre.setdefault(p.right(e), set()).add(e)
        allowed = {e: fibre.get(p.bottom(e), set()) for e in b.elements}
        for a in amb.dom(p.left).elements:
            y = p.left(a)
            allowed[y] = allowed[y] & {p.top(a)}
        return allowed, None
    ofib: dict = {}
    for o in x.objects():
        ofib.setdefault(p.right.obj(o), set()).add(o)
    oal = {o: ofib.get(p.bottom.obj(o), set()) for o in b.objects()}
    # morphism fibres are tested on demand; the domain of ``right`` may be
    # too large to enumerate its morphisms
    mal = {m: _Fibre(p.right, p.bottom.mor(m)) for m in b.morphisms()}
    a = amb.dom(p.left)
    for o in a.objects():
        y = p.left.obj(o)
        oal[y] = oal[y] & {p.top.obj(o)}
    for m in a.morphisms():
        y = p.left.mor(m)
        t = p.top.mor(m)
        mal[y] = {t} if t in mal[y] else set()
    return oal, mal


def iter_lifts(p: LiftingProblem):
    """All fillers in lexicographic order."""
    if not p.commutes():
        raise StructuralError("lifting problem square does not commute")
    amb = p.ambient
    oal, mal = _constraints(p)
    # named by objects: describing a functor tabulates its whole source
    what = f"lift search {amb.show(amb.cod(p.left))} -> {amb.show(amb.dom(p.right))}"
    for d in amb.search(amb.cod(p.left), amb.dom(p.right), oal, mal, what=what):
        if p.is_filler(d):
            yield d


def solve_lift(p: LiftingProblem) -> LiftWitness | None:
    for d in islice(iter_lifts(p), 1):
        return LiftWitness(p, d)
    return None


# Coalgebra / algebra structures ---------------------------------------------------

@dataclass(frozen=True)
class Witness:
    """``kind`` is ``"coalg"`` (section ``cod f -> M f``) or ``"alg"``
    (retraction ``M f -> dom f``)."""

    kind: str
    morphism: object
    section: object
    constructed: bool = False


def coalg_problem(f, fa: FactorizationAssignment) -> LiftingProblem:
    amb = fa.ambient
    return LiftingProblem(f, fa.rho(f), fa.lam(f), amb.identity(amb.cod(f)))


def alg_problem(f, fa: FactorizationAssignment) -> LiftingProblem:
    amb = fa.ambient
    return LiftingProblem(fa.lam(f), f, amb.identity(amb.dom(f)), fa.rho(f))


def check_witness(w: Witness, fa: FactorizationAssignment) -> bool:
    p = coalg_problem(w.morphism, fa) if w.kind == "coalg" else alg_problem(w.morphism, fa)
    return p.is_filler(w.section)


def coalg_structure(f, fa: FactorizationAssignment) -> Witness | None:
    lw = solve_lift(coalg_problem(f, fa))
    return Witness("coalg", f, lw.diagonal) if lw else None


def alg_structure(f, fa: FactorizationAssignment) -> Witness | None:
    lw = solve_lift(alg_problem(f, fa))
    return Witness("alg", f, lw.diagonal) if lw else None


def digest(m) -> str:
    """Short stable fingerprint of a morphism's tables."""
    if isinstance(m, FinSetMap):
        payload = repr((m.dom.elements, m.cod.elements, m.images))
    else:
        payload = repr(m.tables())
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


# Certificates -------------------------------------------------------------------------

@dataclass
class WfsCertificate:
    factorization: FactorizationAssignment
    universe: Universe
    coalg_witnesses: dict = field(default_factory=dict)
    alg_witnesses: dict = field(default_factory=dict)
    _coalg_cache: dict = field(default_factory=dict, repr=False)
    _alg_cache: dict = field(default_factory=dict, repr=False)

    @property
    def ambient(self) -> Ambient:
        return self.universe.ambient

    def coalg(self, f) -> Witness | None:
        """Coalgebra witness for any morphism, searched once and cached."""
        if f not in self._coalg_cache:
            self._coalg_cache[f] = coalg_structure(f, self.factorization)
        return self._coalg_cache[f]

    def alg(self, f) -> Witness | None:
        if f not in self._alg_cache:
            self._alg_cache[f] = alg_structure(f, self.factorization)
        return self._alg_cache[f]

    def in_left(self, f) -> bool:
        return self.coalg(f) is not None

    def in_right(self, f) -> bool:
        return self.alg(f) is not None

    def revalidate(self) -> Report:
        fa = self.factorization
        rep = Report(f"certificate for {fa.name}")
        for f, w in self.coalg_witnesses.items():
            rep.record("coalg_witness", describe(f), check_witness(w, fa))
        for f, w in self.alg_witnesses.items():
            rep.record("alg_witness", describe(f), check_witness(w, fa))
        return rep

    def records(self):
        """``(kind, morphism description, digest)`` rows in a fixed order."""
        rows = []
        for f, w in self.coalg_witnesses.items():
            rows.append(("coalg", describe(f), digest(w.section)))
        for f, w in self.alg_witnesses.items():
            rows.append(("alg", describe(f), digest(w.section)))
        return rows


def certify(fa: FactorizationAssignment, universe: Universe, provider=None) -> tuple[WfsCertificate | None, Report]:
    """Search a coalgebra witness for every ``lambda f`` and an algebra
    witness for every ``rho f``, ``f`` ranging over the universe.

    ``provider(kind, f)`` may propose a constructed witness; it is used only
    after it revalidates, otherwise the search runs.
    """
    cert = WfsCertificate(fa, universe)
    rep = Report(f"weak factorization structure {fa.name}")
    rep.note(universe.describe())
    rep.note("classes are only certified on this universe")
    amb = universe.ambient
    for f in universe.morphisms:
        if not rep.record("factorization", describe(f), amb.compose(fa.rho(f), fa.lam(f)) == f):
            rep.note(f"first failure: the factorization of {describe(f)} does not compose back to it")
            return None, rep
        for kind in ("coalg", "alg"):
            g = fa.lam(f) if kind == "coalg" else fa.rho(f)
            w = None
            if provider is not None:
                cand = provider(kind, f)
                if cand is not None and check_witness(cand, fa):
                    w = cand
            if w is None:
                w = cert.coalg(g) if kind == "coalg" else cert.alg(g)
            label = "lambda" if kind == "coalg" else "rho"
            if not rep.record(f"{label}_{kind}", describe(f), w is not None and check_witness(w, fa)):
                rep.note(f"first failure: {label}({describe(f)}) has no {kind} witness")
                return None, rep
            (cert.coalg_witnesses if kind == "coalg" else cert.alg_witnesses)[g] = w
    return cert, rep


def is_wfs(fa: FactorizationAssignment, universe: Universe) -> WfsCertificate | None:
    return certify(fa, universe)[0]


def _composites(universe: Universe, depth: int = 2) -> list:
    amb = universe.ambient
    out = list(universe.morphisms)
    seen = set(out)
    if depth >= 2:
        for f in universe.morphisms:
            for g in universe.morphisms:
                if amb.dom(g) == amb.cod(f):
                    h = amb.compose(g, f)
                    if h not in seen:
                        seen.add(h)
                        out.append(h)
    return out


def llp_squares(cert: WfsCertificate, limit: int | None = None):
    """Commuting squares from left-class to right-class morphisms whose
    horizontal edges are universe composites of length at most two."""
    amb = cert.ambient
    u = cert.universe
    lefts = list(cert.coalg_witnesses) + [f for f in u.morphisms if cert.in_left(f)]
    rights = list(cert.alg_witnesses) + [f for f in u.morphisms if cert.in_right(f)]
    lefts, rights = list(dict.fromkeys(lefts)), list(dict.fromkeys(rights))
    comps = _composites(u)
    by_ends: dict = {}
    for m in comps:
        by_ends.setdefault((amb.dom(m), amb.cod(m)), []).append(m)
    for x in u.objects:
        by_ends.setdefault((x, x), []).append(amb.identity(x))
    extra_objs = {amb.dom(m) for m in lefts + rights} | {amb.cod(m) for m in lefts + rights}
    for x in extra_objs:
        ident = amb.identity(x)
        if ident not in by_ends.setdefault((x, x), []):
            by_ends[(x, x)].append(ident)
    seen = set()
    count = 0
    for l_ in lefts:
        for r in rights:
            for top in by_ends.get((amb.dom(l_), amb.dom(r)), ()):
                rt = amb.compose(r, top)
                for bottom in by_ends.get((amb.cod(l_), amb.cod(r)), ()):
                    if amb.compose(bottom, l_) != rt:
                        continue
                    key = (l_, r, top, bottom)
                    if key in seen:
                        continue
                    seen.add(key)
                    yield LiftingProblem(l_, r, top, bottom)
                    count += 1
                    if limit is not None and count >= limit:
                        return


def check_llp_pairs(cert: WfsCertificate, limit: int | None = 400) -> Report:
    rep = Report(f"lifting between classes of {cert.factorization.name}")
    rep.note(cert.universe.describe())
    n = 0
    for p in llp_squares(cert, limit):
        n += 1
        w = solve_lift(p)
        rep.record("lift_exists", f"{describe(p.left)} / {describe(p.right)} top {describe(p.top)} bottom {describe(p.bottom)}",
                   w is not None and w.check())
    rep.note(f"{n} squares checked")
    return rep


def is_fibrant(x, cert: WfsCertificate) -> bool:
    amb = cert.ambient
    return cert.in_right(amb.to_terminal(x))


def check_type_theoretic(cert: WfsCertificate, universe: Universe | None = None) -> Report:
    """All objects fibrant, and left class stable under pullback along the
    right class, both over the universe."""
    u = universe or cert.universe
    amb = u.ambient
    rep = Report(f"type-theoretic check for {cert.factorization.name}")
    rep.note(u.describe())
    for x in u.objects:
        rep.record("fibrant", amb.show(x), is_fibrant(x, cert))
    lefts = [f for f in u.morphisms if cert.in_left(f)]
    rights = [f for f in u.morphisms if cert.in_right(f)]
    pairs = 0
    for l_ in lefts:
        for r in rights:
            if amb.cod(l_) != amb.cod(r):
                continue
            pairs += 1
            cone = amb.pullback(r, l_)
            pulled = cone.legs[0]
            rep.record("pullback_stable", f"{describe(l_)} along {describe(r)}", cert.in_left(pulled))
    rep.note(f"{pairs} (left, right) pairs with a common codomain checked")
    return rep


def equivalent_wfs(fa: FactorizationAssignment, ga: FactorizationAssignment, universe: Universe) -> Report:
    """Compare class membership of every universe morphism under both."""
    rep = Report(f"{fa.name} versus {ga.name}")
    rep.note(universe.describe())
    c1, c2 = WfsCertificate(fa, universe), WfsCertificate(ga, universe)
    for f in universe.morphisms:
        rep.record("same_left", describe(f), c1.in_left(f) == c2.in_left(f),
                   f"{c1.in_left(f)} vs {c2.in_left(f)}")
        rep.record("same_right", describe(f), c1.in_right(f) == c2.in_right(f),
                   f"{c1.in_right(f)} vs {c2.in_right(f)}")
    return rep


# Example factorizations ---------------------------------------------------------

def cylinder_factorization() -> FactorizationAssignment:
    """Finite sets: ``X -> X + Y -> Y`` via the first injection and
    ``[f, 1]``.  A weak factorization structure with a non-fibrant empty set."""

    def factor(f):
        x, y = f.dom, f.cod
        mid = FinSetObject([(0, e) for e in x.elements] + [(1, e) for e in y.elements],
                           name=f"{x.name}+{y.name}")
        lam = FinSetMap(x, mid, [(0, e) for e in x.elements])
        rho = FinSetMap(mid, y, [f(e) if i == 0 else e for i, e in mid.elements])
        return FactorizationOfMorphism(f, mid, lam, rho)

    def square(sq: Square):
        src, dst = factor(sq.f).mid, factor(sq.g).mid
        return FinSetMap(src, dst, [(0, sq.top(e)) if i == 0 else (1, sq.bottom(e)) for i, e in src.elements])

    return FactorizationAssignment("cylinder", FINSET, factor, square, functorial=True)


def corrupt_rho(fa: FactorizationAssignment, target_f, new_rho) -> FactorizationAssignment:
    """Copy of ``fa`` whose right factor at ``target_f`` is replaced."""

    def factor(f):
        p = fa.at(f)
        if f == target_f:
            return FactorizationOfMorphism(p.f, p.mid, p.lam, new_rho)
        return p

    return FactorizationAssignment(f"{fa.name}*", fa.ambient, factor, fa.square)


def is_functor(m) -> bool:
    return isinstance(m, Functor)
