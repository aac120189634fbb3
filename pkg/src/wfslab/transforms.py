"""Passing between relations and factorizations.

``sigma_lower_star`` is the mapping-path construction, ``iota_upper_star``
factors ``1_X x f``; ``tau`` and ``rho`` are the two composites.  Morphisms
of assignments and the bijection between them also live here.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

from .ambient import Ambient, LimitCone
from .kernel import Report, StructuralError
from .shapes import (
    FactorizationAssignment, FactorizationOfMorphism, RelationAssignment, RelationOnObject,
    RelationalFactorizationOfMorphism, Square, Universe, check_equal, describe, identity_square,
    validate_factorization,
)


def mapping_path_cone(r: RelationAssignment, f) -> LimitCone:
    """The chosen pullback ``X x_Y Psi Y`` of ``f`` along ``eps0``."""
    cones = r.__dict__.setdefault("_mapping_path_cones", {})
    try:
        return cones[f]
    except KeyError:
        amb = r.ambient
        cone = cones[f] = amb.pullback(f, r.eps(0, amb.cod(f)))
        if hasattr(cone.apex, "factors"):
            cone.apex.name = f"M({amb.show(amb.dom(f))} {describe(f)} {amb.show(amb.cod(f))})"
        return cone


def sigma_lower_star(r: RelationAssignment, f) -> RelationalFactorizationOfMorphism:
    amb = r.ambient
    x, y = amb.dom(f), amb.cod(f)
    cone = mapping_path_cone(r, f)
    lam = cone.mediate([amb.identity(x), amb.compose(r.eta(y), f)])
    rho = amb.compose(r.eps(1, y), cone.legs[1])
    return RelationalFactorizationOfMorphism(f, cone.apex, lam, cone.legs[0], rho)


def mapping_path_square(r: RelationAssignment, sq: Square):
    """Mediator ``M f -> M g`` induced by ``Psi`` of the bottom edge."""
    amb = r.ambient
    src, dst = mapping_path_cone(r, sq.f), mapping_path_cone(r, sq.g)
    # a cone whenever the square commutes; squares are checked by the validators
    return dst.mediate([amb.compose(sq.top, src.legs[0]), amb.compose(r.map(sq.bottom), src.legs[1])], check=False)


def sigma_lower_star_assignment(r: RelationAssignment) -> FactorizationAssignment:
    return FactorizationAssignment(
        f"sigma_*({r.name})", r.ambient, None, lambda sq: mapping_path_square(r, sq),
        functorial=r.functorial, relational=lambda f: sigma_lower_star(r, f), source=r,
    )


def iota_lower_star(p: FactorizationAssignment) -> FactorizationAssignment:
    """Forget the retraction of lambda."""
    return FactorizationAssignment(
        f"iota_*({p.name})", p.ambient, lambda f: p.relational_at(f).underlying(), p.square,
        functorial=p.functorial, source=p.source,
    )


def tau(r: RelationAssignment) -> FactorizationAssignment:
    """Relation to factorization: ``f = eps1 pi . (1 x eta f)``."""
    fa = iota_lower_star(sigma_lower_star_assignment(r))
    fa.name = f"tau({r.name})"
    fa.source = r
    return fa


def sigma_upper_star(p: FactorizationAssignment) -> RelationAssignment:
    """Restrict a relational factorization to identities."""
    amb = p.ambient

    def obj(x):
        q = p.relational_at(amb.identity(x))
        return RelationOnObject(x, q.mid, q.lam, q.kap, q.rho)

    def mor(f):
        x, y = amb.dom(f), amb.cod(f)
        return p.square(Square(amb.identity(x), amb.identity(y), f, f))

    r = RelationAssignment(f"sigma^*({p.name})", amb, obj, mor, functorial=p.functorial)
    r.origin = p
    return r


def graph_map(amb: Ambient, f):
    """``1_X x f: X -> X x Y``."""
    x, y = amb.dom(f), amb.cod(f)
    return amb.product(x, y).mediate([amb.identity(x), f])


def iota_upper_star(fa: FactorizationAssignment, f) -> RelationalFactorizationOfMorphism:
    amb = fa.ambient
    x, y = amb.dom(f), amb.cod(f)
    g = graph_map(amb, f)
    q = fa.at(g)
    if q.f != g or amb.compose(q.rho, q.lam) != g:
        raise StructuralError(f"{fa.name} does not factor 1 x {describe(f)}")
    cone = amb.product(x, y)
    return RelationalFactorizationOfMorphism(f, q.mid, q.lam, amb.compose(cone.legs[0], q.rho),
                                             amb.compose(cone.legs[1], q.rho))


def iota_upper_star_assignment(fa: FactorizationAssignment) -> FactorizationAssignment:
    amb = fa.ambient

    def square(sq):
        x, y = amb.dom(sq.f), amb.cod(sq.f)
        w, z = amb.dom(sq.g), amb.cod(sq.g)
        src, dst = amb.product(x, y), amb.product(w, z)
        cross = dst.mediate([amb.compose(sq.top, src.legs[0]), amb.compose(sq.bottom, src.legs[1])])
        return fa.square(Square(graph_map(amb, sq.f), graph_map(amb, sq.g), sq.top, cross))

    return FactorizationAssignment(
        f"iota^*({fa.name})", amb, None, square, functorial=fa.functorial,
        relational=lambda f: iota_upper_star(fa, f), source=fa,
    )


def rho(fa: FactorizationAssignment) -> RelationAssignment:
    """Factorization to relation through the diagonal."""
    r = sigma_upper_star(iota_upper_star_assignment(fa))
    r.name = f"rho({fa.name})"
    r.factorization = fa
    return r


def rho_direct(fa: FactorizationAssignment, x) -> RelationOnObject:
    """``(lambda(D), pi0 rho(D), pi1 rho(D))`` for the diagonal ``D`` of ``x``."""
    amb = fa.ambient
    d = amb.diagonal(x)
    q = fa.at(d)
    cone = amb.product(x, x)
    return RelationOnObject(x, q.mid, q.lam, amb.compose(cone.legs[0], q.rho), amb.compose(cone.legs[1], q.rho))


# Morphisms of assignments ---------------------------------------------------------

@dataclass
class AssignmentMorphism:
    """Components of a morphism between two relations (indexed by objects)
    or two factorizations (indexed by morphisms); naturality is not asked."""

    source: object
    target: object
    component: Callable
    name: str = ""

    def at(self, key):
        return self.component(key)


def _component(rep: Report, a: AssignmentMorphism, key, subject: str):
    """The component at ``key``, or ``None`` after recording why it could
    not be formed (for instance a mediator whose legs are not a cone)."""
    try:
        return a.at(key)
    except StructuralError as exc:
        rep.record("component", subject, False, str(exc))
        return None


def validate_assignment_morphism(a: AssignmentMorphism, universe: Universe) -> Report:
    amb = universe.ambient
    rep = Report(f"assignment morphism {a.name}")
    rep.note(universe.describe())
    if isinstance(a.source, RelationAssignment):
        for x in universe.objects:
            subject = amb.show(x)
            c = _component(rep, a, x, subject)
            s, t = a.source.at(x), a.target.at(x)
            if c is None or not rep.record("endpoints", subject, amb.dom(c) == s.total and amb.cod(c) == t.total):
                continue
            check_equal(rep, "eta", subject, amb.compose(c, s.eta), t.eta)
            check_equal(rep, "eps0", subject, amb.compose(t.eps0, c), s.eps0)
            check_equal(rep, "eps1", subject, amb.compose(t.eps1, c), s.eps1)
        return rep
    relational = a.source.is_relational and a.target.is_relational
    for f in universe.morphisms:
        subject = describe(f)
        c = _component(rep, a, f, subject)
        s, t = a.source.at(f), a.target.at(f)
        if c is None or not rep.record("endpoints", subject, amb.dom(c) == s.mid and amb.cod(c) == t.mid):
            continue
        check_equal(rep, "lambda", subject, amb.compose(c, s.lam), t.lam)
        check_equal(rep, "rho", subject, amb.compose(t.rho, c), s.rho)
        if relational:
            check_equal(rep, "kappa", subject, amb.compose(a.target.kap(f), c), a.source.kap(f))
    return rep


def identity_morphism(r) -> AssignmentMorphism:
    amb = r.ambient
    if isinstance(r, RelationAssignment):
        return AssignmentMorphism(r, r, lambda x: amb.identity(r.psi(x)), "1")
    return AssignmentMorphism(r, r, lambda f: amb.identity(r.mid(f)), "1")


def compose_morphisms(b: AssignmentMorphism, a: AssignmentMorphism) -> AssignmentMorphism:
    amb = a.source.ambient
    return AssignmentMorphism(a.source, b.target, lambda k: amb.compose(b.at(k), a.at(k)), f"{b.name}.{a.name}")


def adjunction_i(alpha: AssignmentMorphism, p: FactorizationAssignment | None = None,
                 r: RelationAssignment | None = None) -> AssignmentMorphism:
    """From ``sigma^* P -> R`` to ``P -> sigma_* R``."""
    p = p or alpha.source.origin
    r = r or alpha.target
    amb = r.ambient
    target = sigma_lower_star_assignment(r)

    def comp(f):
        y = amb.cod(f)
        cone = mapping_path_cone(r, f)
        to_id = p.square(Square(f, amb.identity(y), f, amb.identity(y)))
        return cone.mediate([p.kap(f), amb.compose(alpha.at(y), to_id)])

    return AssignmentMorphism(p, target, comp, f"i({alpha.name})")


def adjunction_j(beta: AssignmentMorphism, p: FactorizationAssignment | None = None,
                 r: RelationAssignment | None = None) -> AssignmentMorphism:
    """From ``P -> sigma_* R`` to ``sigma^* P -> R``."""
    p = p or beta.source
    r = r or beta.target.source
    amb = r.ambient

    def comp(x):
        one = amb.identity(x)
        return amb.compose(mapping_path_cone(r, one).legs[1], beta.at(one))

    return AssignmentMorphism(sigma_upper_star(p), r, comp, f"j({beta.name})")


def adjunction_roundtrip(alpha: AssignmentMorphism, universe: Universe, p=None, r=None) -> Report:
    """Compare ``j(i alpha)`` with ``alpha`` on objects and ``i(j i alpha)``
    with ``i alpha`` on morphisms."""
    amb = universe.ambient
    rep = Report("adjunction roundtrip")
    rep.note(universe.describe())
    ia = adjunction_i(alpha, p, r)
    jia = adjunction_j(ia, p, r)
    for x in universe.objects:
        check_equal(rep, "j.i=1", amb.show(x), jia.at(x), alpha.at(x))
    ija = adjunction_i(jia, p, r)
    for f in universe.morphisms:
        check_equal(rep, "i.j=1", describe(f), ija.at(f), ia.at(f))
    return rep


def factorization_from_table(amb: Ambient, f, mid, lam, rho) -> FactorizationOfMorphism:
    p = FactorizationOfMorphism(f, mid, lam, rho)
    if not validate_factorization(p).ok:
        raise StructuralError(f"rho . lambda != {describe(f)}")
    return p
