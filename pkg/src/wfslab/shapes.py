"""Relations, relational factorizations and factorizations.

Single-object / single-morphism data are small frozen records.  The
assignments over a whole ambient category are procedures; their laws are
only ever checked on an explicit finite :class:`Universe`.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

from .ambient import (
    FINCAT, FINSET, Ambient, ExponentialCategory, FinSetMap, FinSetObject, LimitCone, ambient_of, show_morphism,
)
from .kernel import Functor, Report, StructuralError, walking_iso


class UniverseError(ValueError):
    pass


def describe(m) -> str:
    return show_morphism(m)


def first_difference(f, g) -> str:
    """Name an element (or object/morphism) where two parallel maps differ."""
    if isinstance(f, FinSetMap):
        for x, a, b in zip(f.dom.elements, f.images, g.images):
            if a != b:
                return f"at element {x!r}: {a!r} != {b!r}"
        return ""
    s = f.source
    for o in s.objects():
        if f.obj(o) != g.obj(o):
            return f"at object {s.show_object(o)}"
    for m in s.morphisms():
        if f.mor(m) != g.mor(m):
            return f"at morphism {s.show_morphism(m)}"
    return ""


def check_equal(rep: Report, name: str, subject, lhs, rhs) -> bool:
    if lhs == rhs:
        return rep.record(name, subject, True)
    return rep.record(name, subject, False, first_difference(lhs, rhs))


def _require(amb: Ambient, m, dom, cod, what: str) -> None:
    if amb.dom(m) != dom or amb.cod(m) != cod:
        raise StructuralError(f"{what} has the wrong endpoints")


# Single-object data ------------------------------------------------------------

@dataclass(frozen=True)
class RelationOnObject:
    base: object
    total: object
    eta: object
    eps0: object
    eps1: object

    @property
    def ambient(self) -> Ambient:
        return ambient_of(self.base)

    def eps(self, i: int):
        return self.eps1 if i else self.eps0


@dataclass(frozen=True)
class RelationalFactorizationOfMorphism:
    f: object
    mid: object
    lam: object
    kap: object
    rho: object

    def underlying(self) -> FactorizationOfMorphism:
        return FactorizationOfMorphism(self.f, self.mid, self.lam, self.rho)


@dataclass(frozen=True)
class FactorizationOfMorphism:
    f: object
    mid: object
    lam: object
    rho: object


def validate_relation_on_object(r: RelationOnObject) -> Report:
    amb = r.ambient
    _require(amb, r.eta, r.base, r.total, "eta")
    _require(amb, r.eps0, r.total, r.base, "eps0")
    _require(amb, r.eps1, r.total, r.base, "eps1")
    rep = Report("relation on an object")
    one = amb.identity(r.base)
    subject = amb.show(r.base)
    check_equal(rep, "eps0.eta=1", subject, amb.compose(r.eps0, r.eta), one)
    check_equal(rep, "eps1.eta=1", subject, amb.compose(r.eps1, r.eta), one)
    return rep


def validate_relational_factorization(p: RelationalFactorizationOfMorphism) -> Report:
    amb = ambient_of(p.f)
    x, y = amb.dom(p.f), amb.cod(p.f)
    _require(amb, p.lam, x, p.mid, "lambda")
    _require(amb, p.kap, p.mid, x, "kappa")
    _require(amb, p.rho, p.mid, y, "rho")
    rep = Report("relational factorization")
    subject = describe(p.f)
    check_equal(rep, "kappa.lambda=1", subject, amb.compose(p.kap, p.lam), amb.identity(x))
    check_equal(rep, "rho.lambda=f", subject, amb.compose(p.rho, p.lam), p.f)
    return rep


def validate_factorization(p: FactorizationOfMorphism) -> Report:
    amb = ambient_of(p.f)
    _require(amb, p.lam, amb.dom(p.f), p.mid, "lambda")
    _require(amb, p.rho, p.mid, amb.cod(p.f), "rho")
    rep = Report("factorization")
    check_equal(rep, "rho.lambda=f", describe(p.f), amb.compose(p.rho, p.lam), p.f)
    return rep


# Squares ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Square:
    """A commuting square ``<top, bottom>: f -> g`` with ``g.top == bottom.f``."""

    f: object
    g: object
    top: object
    bottom: object

    def describe(self) -> str:
        return f"<{describe(self.top)},{describe(self.bottom)}>: {describe(self.f)} -> {describe(self.g)}"


def identity_square(amb: Ambient, f) -> Square:
    return Square(f, f, amb.identity(amb.dom(f)), amb.identity(amb.cod(f)))


# Assignments -------------------------------------------------------------------------

class RelationAssignment:
    """A relation on the whole ambient category, given by procedures.

    ``tuple_into(cone, legs)`` must return the morphism ``Z -> Psi(apex)``
    whose composites with ``Psi`` of the cone legs are ``legs``; it is the
    inverse of the comparison map for limits that ``Psi`` preserves and is
    needed only by the strict Moore checks.
    """

    def __init__(
        self,
        name: str,
        ambient: Ambient,
        object_part: Callable[[object], RelationOnObject],
        morphism_part: Callable[[object], object],
        functorial: bool = False,
        tuple_into: Callable | None = None,
    ):
        self.name = name
        self.ambient = ambient
        self._object_part = object_part
        self._morphism_part = morphism_part
        self.functorial = functorial
        self._tuple_into = tuple_into
        self._objects: dict = {}
        self._maps: dict = {}

    def at(self, x) -> RelationOnObject:
        try:
            return self._objects[x]
        except KeyError:
            r = self._objects[x] = self._object_part(x)
            return r

    def psi(self, x):
        return self.at(x).total

    def eta(self, x):
        return self.at(x).eta

    def eps(self, i: int, x):
        return self.at(x).eps(i)

    def map(self, f):
        try:
            return self._maps[f]
        except KeyError:
            m = self._maps[f] = self._morphism_part(f)
            return m

    def tuple_into(self, cone: LimitCone, legs: Sequence):
        if self._tuple_into is None:
            raise StructuralError(f"relation {self.name} provides no limit comparison inverse")
        return self._tuple_into(cone, tuple(legs))

    def __repr__(self) -> str:
        return f"<RelationAssignment {self.name}>"


class FactorizationAssignment:
    """A factorization on the whole ambient category.

    ``factor(f)`` returns the factorization of ``f``; ``square(sq)`` the
    mediator ``M f -> M g`` for a commuting square ``sq: f -> g``.  When
    ``relational`` is given, it returns the relational factorization whose
    underlying factorization is ``factor(f)``.
    """

    def __init__(
        self,
        name: str,
        ambient: Ambient,
        factor: Callable[[object], FactorizationOfMorphism],
        square: Callable[[Square], object],
        functorial: bool = False,
        relational: Callable[[object], RelationalFactorizationOfMorphism] | None = None,
        source: object = None,
    ):
        self.name = name
        self.ambient = ambient
        self._factor = factor
        self._square = square
        self.functorial = functorial
        self._relational = relational
        self.source = source
        self._memo: dict = {}
        self._rmemo: dict = {}
        self._smemo: dict = {}

    def at(self, f) -> FactorizationOfMorphism:
        try:
            return self._memo[f]
        except KeyError:
            if self._relational is not None:
                p = self._memo[f] = self.relational_at(f).underlying()
            else:
                p = self._memo[f] = self._factor(f)
            return p

    def relational_at(self, f) -> RelationalFactorizationOfMorphism:
        if self._relational is None:
            raise StructuralError(f"factorization {self.name} carries no retraction of lambda")
        try:
            return self._rmemo[f]
        except KeyError:
            p = self._rmemo[f] = self._relational(f)
            return p

    @property
    def is_relational(self) -> bool:
        return self._relational is not None

    def mid(self, f):
        return self.at(f).mid

    def lam(self, f):
        return self.at(f).lam

    def rho(self, f):
        return self.at(f).rho

    def kap(self, f):
        return self.relational_at(f).kap

    def square(self, sq: Square):
        try:
            return self._smemo[sq]
        except KeyError:
            m = self._smemo[sq] = self._square(sq)
            return m

    def __repr__(self) -> str:
        return f"<FactorizationAssignment {self.name}>"


# Universes ---------------------------------------------------------------------------

@dataclass
class Universe:
    """A finite family of ambient objects and morphisms.

    ``core`` morphisms are closed under composition; ``extra`` morphisms
    (structure maps added by closure) take part in every per-morphism check
    but not in composition checks.
    """

    ambient: Ambient
    objects: tuple
    core: tuple
    extra: tuple = ()
    name: str = "universe"
    depth: int = 1
    _squares: dict = field(default_factory=dict, repr=False)

    @property
    def morphisms(self) -> tuple:
        return self.core + self.extra

    def describe(self) -> str:
        amb = self.ambient
        objs = ", ".join(amb.show(x) for x in self.objects)
        return (f"{self.name} over {amb.name}: {len(self.objects)} objects [{objs}], "
                f"{len(self.core)} core + {len(self.extra)} derived morphisms, closure depth {self.depth}")

    def morphisms_between(self, x, y) -> list:
        amb = self.ambient
        return [m for m in self.morphisms if amb.dom(m) == x and amb.cod(m) == y]

    def composable_pairs(self):
        """Pairs ``(g, f)`` of core morphisms with ``cod f == dom g``; raises
        :class:`UniverseError` if a composite is missing from the core."""
        amb = self.ambient
        core_set = set(self.core)
        for f in self.core:
            for g in self.core:
                if amb.dom(g) != amb.cod(f):
                    continue
                gf = amb.compose(g, f)
                if gf not in core_set:
                    raise UniverseError(f"composite {describe(g)} . {describe(f)} is missing from {self.name}")
                yield g, f, gf

    def squares(self, limit: int | None = None) -> list[Square]:
        """Commuting squares between universe morphisms, in a fixed order,
        at most ``limit`` of them.  Identity squares come first."""
        key = limit
        if key in self._squares:
            return self._squares[key]
        amb = self.ambient
        ms = self.morphisms
        out = [identity_square(amb, f) for f in ms]
        seen = set(out)
        by_ends: dict = {}
        for m in ms:
            by_ends.setdefault((amb.dom(m), amb.cod(m)), []).append(m)
        done = limit is not None and len(out) >= limit
        for f in ms:
            if done:
                break
            for g in ms:
                if done:
                    break
                tops = by_ends.get((amb.dom(f), amb.dom(g)), [])
                bottoms = by_ends.get((amb.cod(f), amb.cod(g)), [])
                for top in tops:
                    gt = amb.compose(g, top)
                    for bottom in bottoms:
                        if amb.compose(bottom, f) != gt:
                            continue
                        sq = Square(f, g, top, bottom)
                        if sq in seen:
                            continue
                        seen.add(sq)
                        out.append(sq)
                        if limit is not None and len(out) >= limit:
                            done = True
                            break
                    if done:
                        break
        if limit is not None:
            out = out[:limit]
        self._squares[key] = out
        return out


def universe_from_seeds(amb: Ambient, seeds: Sequence, name: str = "universe") -> Universe:
    """Seeds together with every morphism between them."""
    seeds = tuple(dict.fromkeys(seeds))
    for x in seeds:
        amb.admit(x)
    core = []
    for x in seeds:
        for y in seeds:
            core.extend(amb.hom_enum(x, y))
    return Universe(amb, seeds, tuple(core), (), name, 1)


def close_universe(base: Universe, fa: FactorizationAssignment, depth: int = 2,
                   products: bool = False, name: str | None = None) -> Universe:
    """Grow ``base`` by factorization middles of its morphisms (with lambda,
    rho and, for relational factorizations, kappa), repeated ``depth - 1``
    times; optionally also binary products of the seed objects with their
    projections."""
    amb = base.ambient
    objects = list(base.objects)
    extra = list(base.extra)
    known = set(base.morphisms)
    frontier = list(base.morphisms)
    if products:
        for x in base.objects:
            for y in base.objects:
                cone = amb.product(x, y)
                if cone.apex not in objects:
                    objects.append(cone.apex)
                for leg in cone.legs:
                    if leg not in known:
                        known.add(leg)
                        extra.append(leg)
    for _ in range(max(0, depth - 1)):
        nxt = []
        for f in frontier:
            p = fa.at(f)
            if p.mid not in objects:
                objects.append(p.mid)
            maps = [p.lam, p.rho]
            if fa.is_relational:
                maps.append(fa.kap(f))
            for m in maps:
                if m not in known:
                    known.add(m)
                    extra.append(m)
                    nxt.append(m)
        frontier = nxt
    return Universe(amb, tuple(objects), base.core, tuple(extra), name or f"{base.name}+{fa.name}", depth)


# Validation of assignments -------------------------------------------------------

def validate_assignment(r, universe: Universe, square_limit: int = 400) -> Report:
    if isinstance(r, RelationAssignment):
        return _validate_relation_assignment(r, universe)
    if isinstance(r, FactorizationAssignment):
        return _validate_factorization_assignment(r, universe, square_limit)
    raise TypeError(f"not an assignment: {r!r}")


def _validate_relation_assignment(r: RelationAssignment, u: Universe) -> Report:
    amb = u.ambient
    rep = Report(f"relation {r.name}")
    rep.note(u.describe())
    for x in u.objects:
        rx = r.at(x)
        rep.record("section", amb.show(x), rx.base == x)
        rep.extend(validate_relation_on_object(rx))
    for f in u.morphisms:
        x, y = amb.dom(f), amb.cod(f)
        pf = r.map(f)
        subject = describe(f)
        if not rep.record("psi_endpoints", subject, amb.dom(pf) == r.psi(x) and amb.cod(pf) == r.psi(y)):
            continue
        check_equal(rep, "prism_eta", subject, amb.compose(pf, r.eta(x)), amb.compose(r.eta(y), f))
        for i in (0, 1):
            check_equal(rep, f"prism_eps{i}", subject, amb.compose(r.eps(i, y), pf), amb.compose(f, r.eps(i, x)))
    if r.functorial:
        for x in u.objects:
            check_equal(rep, "functor_identity", amb.show(x), r.map(amb.identity(x)), amb.identity(r.psi(x)))
        for g, f, gf in u.composable_pairs():
            check_equal(rep, "functor_composition", f"({describe(g)}, {describe(f)})",
                        r.map(gf), amb.compose(r.map(g), r.map(f)))
        rep.note("functoriality checked on core composable pairs")
    else:
        rep.note("not declared functorial; functoriality not checked")
    return rep


def _validate_factorization_assignment(fa: FactorizationAssignment, u: Universe, square_limit: int) -> Report:
    amb = u.ambient
    rep = Report(f"factorization {fa.name}")
    rep.note(u.describe())
    for f in u.morphisms:
        subject = describe(f)
        p = fa.at(f)
        rep.record("section", subject, p.f == f)
        rep.extend(validate_factorization(p))
        if fa.is_relational:
            rep.extend(validate_relational_factorization(fa.relational_at(f)))
    squares = u.squares(square_limit)
    for sq in squares:
        m = fa.square(sq)
        subject = sq.describe()
        if not rep.record("square_endpoints", subject, amb.dom(m) == fa.mid(sq.f) and amb.cod(m) == fa.mid(sq.g)):
            continue
        check_equal(rep, "ladder_lambda", subject, amb.compose(m, fa.lam(sq.f)), amb.compose(fa.lam(sq.g), sq.top))
        check_equal(rep, "ladder_rho", subject, amb.compose(fa.rho(sq.g), m), amb.compose(sq.bottom, fa.rho(sq.f)))
        if fa.is_relational:
            check_equal(rep, "ladder_kappa", subject, amb.compose(fa.kap(sq.g), m), amb.compose(sq.top, fa.kap(sq.f)))
    rep.note(f"{len(squares)} commuting squares checked (limit {square_limit})")
    if fa.functorial:
        for f in u.morphisms:
            check_equal(rep, "functor_identity", describe(f), fa.square(identity_square(amb, f)), amb.identity(fa.mid(f)))
        count = 0
        for s1 in squares:
            for s2 in squares:
                if s2.f != s1.g or count >= square_limit:
                    continue
                comp = Square(s1.f, s2.g, amb.compose(s2.top, s1.top), amb.compose(s2.bottom, s1.bottom))
                count += 1
                check_equal(rep, "functor_composition", f"{s2.describe()} after {s1.describe()}",
                            fa.square(comp), amb.compose(fa.square(s2), fa.square(s1)))
        rep.note(f"{count} composable square pairs checked for functoriality")
    return rep


# Example relations -----------------------------------------------------------------

def identity_relation(amb: Ambient) -> RelationAssignment:
    """``Psi X = X`` with every structure map the identity."""

    def obj(x):
        one = amb.identity(x)
        return RelationOnObject(x, x, one, one, one)

    return RelationAssignment("identity", amb, obj, lambda f: f, functorial=True,
                              tuple_into=lambda cone, legs: cone.mediate(legs))


def walking_iso_relation() -> RelationAssignment:
    """``Psi X = X ** J`` for the walking isomorphism ``J``: paths are
    isomorphisms, ``eta`` is the constant path, ``eps_i`` evaluates at ``i``."""
    return path_relation(walking_iso(), 0, 1, "walking_iso")


def path_relation(J, start, end, name: str = "") -> RelationAssignment:
    """``Psi X = X ** J`` with ``eps0``/``eps1`` evaluating at ``start``/``end``."""
    cache: dict = {}

    def psi(x):
        try:
            return cache[x]
        except KeyError:
            e = cache[x] = ExponentialCategory(x, J, name=f"{x.name}^J")
            return e

    def obj(x):
        e = psi(x)
        return RelationOnObject(x, e, e.constant(), e.evaluation(start), e.evaluation(end))

    def mor(f):
        return psi(f.source).postcompose(f, psi(f.target))

    def tuple_into(cone, legs):
        z = legs[0].source if legs else None
        apex = cone.apex
        target = psi(apex)
        n_o, n_m = len(J.objects()), len(J.morphisms())

        def on_obj(o):
            vals = [leg.obj(o) for leg in legs]
            return (tuple(tuple(v[0][k] for v in vals) for k in range(n_o)),
                    tuple(tuple(v[1][k] for v in vals) for k in range(n_m)))

        def on_mor(m):
            vals = [leg.mor(m) for leg in legs]
            return (on_obj(z.dom(m)), on_obj(z.cod(m)), tuple(tuple(v[2][k] for v in vals) for k in range(n_o)))

        return Functor(z, target, on_obj, on_mor, name="zip")

    r = RelationAssignment(name or f"paths({J.name})", FINCAT, obj, mor, functorial=True, tuple_into=tuple_into)
    r.path_shape = J
    return r


def fold_relation() -> RelationAssignment:
    """``Psi X = X + X`` in finite sets, ``eta`` the first injection and
    both ``eps_i`` the fold map."""

    def psi(x):
        return FinSetObject([(i, e) for i in (0, 1) for e in x.elements], name=f"{x.name}+{x.name}")

    def obj(x):
        p = psi(x)
        fold = FinSetMap(p, x, [e for _, e in p.elements], name="fold")
        return RelationOnObject(x, p, FinSetMap(x, p, [(0, e) for e in x.elements], name="in0"), fold, fold)

    def mor(f):
        return FinSetMap(psi(f.dom), psi(f.cod), [(i, f(e)) for i, e in psi(f.dom).elements])

    return RelationAssignment("fold", FINSET, obj, mor, functorial=True)
