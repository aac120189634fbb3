"""Id-presentations and the type formers they support.

A relation ``R`` is an Id-presentation when ``tau(R)`` is a weak
factorization structure and every endpoint map ``eps0 x eps1`` carries an
algebra structure.  Certification, the endpoint swap, the override of
``rho(W)`` at a single object and the comparison maps ``R <-> rho(tau(R))``
live here, next to identity types of maps in slices and dependent products
of finite sets.

Every class membership statement means "has a witness for the given
certificate's factorization", and every quantifier ranges over a finite
universe.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field

from .ambient import FINSET, FinSetMap, FinSetObject, LimitCone, UnsupportedOperation, search_maps
from .kernel import Report, StructuralError
from .lifting import (
    LiftingProblem, WfsCertificate, Witness, certify, check_type_theoretic, check_witness, digest,
    equivalent_wfs, solve_lift,
)
from .moore import ConstructionError, endpoint_map
from .shapes import (
    FactorizationAssignment, RelationAssignment, RelationOnObject, Universe, describe, validate_assignment,
)
from .transforms import AssignmentMorphism, rho, tau


def failed_stage(rep: Report) -> str | None:
    """Stage of the first failed check (the part of its name before ``:``)."""
    bad = rep.violations
    return bad[0].name.split(":")[0] if bad else None


# The endpoint swap ------------------------------------------------------------------

def involution_swap(r: RelationAssignment) -> RelationAssignment:
    """``r`` with ``eps0`` and ``eps1`` exchanged; applying it twice gives
    back ``r`` itself."""
    original = getattr(r, "swap_of", None)
    if original is not None:
        return original
    cached = r.__dict__.get("_swap")
    if cached is not None:
        return cached

    def obj(x):
        p = r.at(x)
        return RelationOnObject(p.base, p.total, p.eta, p.eps1, p.eps0)

    s = RelationAssignment(f"swap({r.name})", r.ambient, obj, r.map, functorial=r.functorial,
                           tuple_into=r._tuple_into)
    s.swap_of = r
    r._swap = s
    return s


def pulled_point(r: RelationAssignment, f, i: int):
    """``f* eta``: the chosen pullback of ``eta_Y`` along ``f`` for the
    endpoint ``eps_i``.  For ``i = 0`` this is ``lambda f`` of ``tau(r)``,
    for ``i = 1`` it is ``lambda f`` of ``tau(swap(r))``."""
    return tau(involution_swap(r) if i else r).lam(f)


# Certificates -------------------------------------------------------------------------

@dataclass
class IdPresentationCertificate:
    relation: RelationAssignment
    wfs: WfsCertificate
    endpoint_algebras: dict = field(default_factory=dict)
    pullback_coalgebras: dict = field(default_factory=dict)
    report: Report | None = None

    @property
    def factorization(self) -> FactorizationAssignment:
        return self.wfs.factorization

    @property
    def universe(self) -> Universe:
        return self.wfs.universe

    def revalidate(self) -> Report:
        r = self.relation
        fa = self.factorization
        amb = r.ambient
        rep = Report(f"Id-presentation certificate for {r.name}")
        rep.extend(self.wfs.revalidate(), "wfs:")
        for x, w in self.endpoint_algebras.items():
            rep.record("endpoint_alg", amb.show(x), w.morphism == endpoint_map(r, x) and check_witness(w, fa))
        for (f, i), w in self.pullback_coalgebras.items():
            rep.record(f"pullback_coalg[{i}]", describe(f),
                       w.morphism == pulled_point(r, f, i) and check_witness(w, fa))
        return rep

    def records(self):
        """``(kind, subject, digest)`` rows in a fixed order."""
        amb = self.relation.ambient
        rows = list(self.wfs.records())
        for x, w in self.endpoint_algebras.items():
            rows.append(("endpoint_alg", amb.show(x), digest(w.section)))
        for (f, i), w in self.pullback_coalgebras.items():
            rows.append((f"pullback_coalg[{i}]", describe(f), digest(w.section)))
        return rows


def is_id_presentation(r: RelationAssignment, universe: Universe, cert: WfsCertificate | None = None,
                       provider=None) -> tuple[IdPresentationCertificate | None, Report]:
    """Certify ``r`` as an Id-presentation over ``universe``.

    Stages: ``wfs`` (certify ``tau(r)``, unless ``cert`` is given),
    ``endpoint_alg`` (an algebra on ``eps0 x eps1`` at every object) and
    ``pullback_coalg`` (a coalgebra on ``f* eta`` for both endpoints at
    every morphism).  On failure the certificate is ``None`` and
    :func:`failed_stage` names the stage.
    """
    amb = universe.ambient
    rep = Report(f"Id-presentation {r.name}")
    rep.note(universe.describe())
    if cert is None:
        cert, wrep = certify(tau(r), universe, provider)
        rep.extend(wrep, "wfs:")
        if cert is None:
            rep.note("stage wfs failed")
            return None, rep
    elif cert.factorization.source is not r:
        raise StructuralError(f"certificate {cert.factorization.name} is not for tau({r.name})")
    idp = IdPresentationCertificate(r, cert, report=rep)
    for x in universe.objects:
        w = cert.alg(endpoint_map(r, x))
        if not rep.record("endpoint_alg", amb.show(x), w is not None):
            rep.note(f"stage endpoint_alg failed: eps0 x eps1 at {amb.show(x)} has no algebra structure")
            return None, rep
        idp.endpoint_algebras[x] = w
    for f in universe.morphisms:
        for i in (0, 1):
            g = pulled_point(r, f, i)
            w = cert.coalg_witnesses.get(g) or cert.coalg(g)
            if not rep.record(f"pullback_coalg[{i}]", describe(f), w is not None):
                rep.note(f"stage pullback_coalg failed: the eps{i} pullback of eta along {describe(f)}")
                return None, rep
            idp.pullback_coalgebras[(f, i)] = w
    rep.note("eps1 pullbacks of eta are the lambda maps of tau(swap(R))")
    return idp, rep


# Overriding rho(W) at one object -----------------------------------------------------

def _endpoints(amb, rel: RelationOnObject):
    return amb.product(rel.base, rel.base).mediate([rel.eps0, rel.eps1])


def single_object_override(w_cert: WfsCertificate, y, r_y: RelationOnObject, universe: Universe | None = None,
                           verify: bool = True, endpoints=None) -> FactorizationAssignment:
    """``tau(S)`` for the relation ``S`` equal to ``rho(W)`` away from ``y``
    and to ``r_y`` at ``y``.

    ``S`` acts on a morphism touching ``y`` by a lift of its point against
    the endpoint map at the codomain.  With ``verify`` the relation ``S``
    is validated and ``tau(S)`` compared with ``W`` on the universe; the
    combined report is kept as ``.report`` of the result.

    ``endpoints`` is the map required to be in the right class, by default
    ``eps0 x eps1`` into ``y x y``; over a base ``Y`` it is the map into the
    kernel pair, the product in the slice.
    """
    fa = w_cert.factorization
    amb = fa.ambient
    if r_y.base != y:
        raise StructuralError(f"relation is not on {amb.show(y)}")
    if w_cert.coalg(r_y.eta) is None:
        raise ConstructionError("precondition", f"the point at {amb.show(y)} is not in the left class")
    if w_cert.alg(_endpoints(amb, r_y) if endpoints is None else endpoints) is None:
        raise ConstructionError("precondition", f"the endpoint map at {amb.show(y)} is not in the right class")
    base = rho(fa)

    def obj(x):
        return r_y if x == y else base.at(x)

    def mor(f):
        x, z = amb.dom(f), amb.cod(f)
        if x != y and z != y:
            return base.map(f)
        sx, sz = obj(x), obj(z)
        ends = amb.product(z, z).mediate([amb.compose(f, sx.eps0), amb.compose(f, sx.eps1)])
        lift = solve_lift(LiftingProblem(sx.eta, _endpoints(amb, sz), amb.compose(sz.eta, f), ends))
        if lift is None:
            raise ConstructionError("lift", f"no action of the overridden relation on {describe(f)}")
        return lift.diagonal

    s = RelationAssignment(f"{base.name}[{amb.show(y)}]", amb, obj, mor)
    out = tau(s)
    if verify:
        u = universe or w_cert.universe
        rep = Report(f"override of {base.name} at {amb.show(y)}")
        rep.extend(validate_assignment(s, u), "relation:")
        rep.extend(equivalent_wfs(out, fa, u), "equivalence:")
        for f in u.morphisms:
            rep.record("left_factor:in_left", describe(f), w_cert.in_left(out.lam(f)))
            rep.record("right_factor:in_right", describe(f), w_cert.in_right(out.rho(f)))
        if not rep.ok:
            bad = rep.violations[0]
            raise ConstructionError(failed_stage(rep), f"{bad.name} fails at {bad.subject}")
        out.report = rep
    return out


# From a factorization ------------------------------------------------------------------

def facttorel_is_idpres(w_cert: WfsCertificate, universe: Universe | None = None) -> IdPresentationCertificate:
    """``rho(W)`` certified as an Id-presentation; ``W`` must pass the
    type-theoretic check."""
    u = universe or w_cert.universe
    fa = w_cert.factorization
    amb = fa.ambient
    tt = check_type_theoretic(w_cert, u)
    if not tt.ok:
        bad = tt.violations[0]
        raise ConstructionError("type-theoretic", f"{bad.name} fails at {bad.subject}")
    r = rho(fa)
    rep = Report(f"rho({fa.name}) as an Id-presentation")
    for x in u.objects:
        d = amb.diagonal(x)
        subject = amb.show(x)
        rep.record("inherit:endpoints_are_rho_diagonal", subject, endpoint_map(r, x) == fa.rho(d))
        rep.record("inherit:rho_diagonal_alg", subject, w_cert.in_right(fa.rho(d)))
    if not rep.ok:
        bad = rep.violations[0]
        raise ConstructionError("inherit", f"{bad.name} fails at {bad.subject}")
    idp, irep = is_id_presentation(r, u)
    rep.extend(irep)
    if idp is None:
        bad = irep.violations[0]
        raise ConstructionError(failed_stage(irep), f"{bad.name} fails at {bad.subject}")
    idp.report = rep
    return idp


# R versus rho(tau(R)) ------------------------------------------------------------------

def roundtrip_maps(idp: IdPresentationCertificate) -> tuple[AssignmentMorphism, AssignmentMorphism]:
    """Morphisms ``R -> rho(tau(R))`` and back, each component a lift of a
    point against an endpoint map at the diagonal."""
    rev = idp.revalidate()
    if not rev.ok:
        bad = rev.violations[0]
        raise ConstructionError("certificate", f"{bad.name} fails at {bad.subject}")
    r = idp.relation
    fa = idp.factorization
    amb = r.ambient
    target = rho(fa)
    cache: dict = {}

    def component(direction, x):
        key = (direction, x)
        if key in cache:
            return cache[key]
        d = amb.diagonal(x)
        e = endpoint_map(r, x)
        if direction == "forward":
            p = LiftingProblem(r.eta(x), fa.rho(d), fa.lam(d), e)
        else:
            p = LiftingProblem(fa.lam(d), e, r.eta(x), fa.rho(d))
        lift = solve_lift(p)
        if lift is None:
            raise ConstructionError(f"{direction} lift", f"no lift at {amb.show(x)}")
        cache[key] = lift.diagonal
        return lift.diagonal

    there = AssignmentMorphism(r, target, lambda x: component("forward", x), "tau_X")
    back = AssignmentMorphism(target, r, lambda x: component("backward", x), "tau_X^-")
    return there, back


# Identity types in slices -------------------------------------------------------------

@dataclass(frozen=True)
class SliceRelation:
    """A relation on ``f: X -> Y`` over ``Y``: ``point: X -> total`` and
    ``endpoints: total -> X x_Y X`` into the chosen kernel pair."""

    f: object
    total: object
    point: object
    endpoints: object
    kernel: LimitCone

    def eps(self, i: int):
        amb = self.kernel.ambient
        return amb.compose(self.kernel.legs[i], self.endpoints)

    def display(self):
        amb = self.kernel.ambient
        return amb.chain(self.f, self.kernel.legs[0], self.endpoints)


def _alphas(universe: Universe | None, x, amb) -> list:
    out = [amb.identity(x)]
    if universe is not None:
        out += [a for a in universe.morphisms if amb.cod(a) == x and a not in out]
    return out


def pulled_slice_point(cand: SliceRelation, alpha, i: int):
    """``alpha* r_f`` for the endpoint ``eps_i``, via the chosen pullback."""
    amb = cand.kernel.ambient
    cone = amb.pullback(alpha, cand.eps(i))
    return cone.mediate([amb.identity(amb.dom(alpha)), amb.compose(cand.point, alpha)])


def check_id_type_def(cert: WfsCertificate, f, cand: SliceRelation, universe: Universe | None = None,
                      alphas: Iterable | None = None) -> Report:
    """Identity-type conditions for ``cand`` against the display maps
    with algebra witnesses for ``cert``.

    ``alphas`` defaults to the identity of ``dom f`` and every morphism of
    the universe into it; the report states how many were checked.
    """
    amb = cert.ambient
    x = amb.dom(f)
    rep = Report(f"identity type of {describe(f)}")
    subject = describe(f)
    if cand.f != f or amb.dom(cand.point) != x:
        raise StructuralError(f"candidate is not a relation on {subject}")
    rep.record("relation:reflexive", subject, amb.compose(cand.endpoints, cand.point)
               == cand.kernel.mediate([amb.identity(x), amb.identity(x)]))
    rep.record("relation:over_base", subject, amb.compose(cand.display(), cand.point) == f)
    rep.record("eps_alg", subject, cert.alg(cand.endpoints) is not None)
    family = list(alphas) if alphas is not None else _alphas(universe or cert.universe, x, amb)
    for alpha in family:
        for i in (0, 1):
            pulled = pulled_slice_point(cand, alpha, i)
            rep.record(f"pullback_coalg[{i}]", describe(alpha), cert.coalg(pulled) is not None)
    rep.note(f"{len(family)} morphisms alpha into {amb.show(x)} checked, not every morphism of the ambient")
    return rep


def slice_id_presentation(idp: IdPresentationCertificate, y, f, alphas: Iterable | None = None
                          ) -> tuple[SliceRelation, Report]:
    """The relation ``X -> X x_{Delta, eps0} Id(X x_Y X) -> X x_Y X`` on an
    algebra-witnessed ``f``, checked as an identity type.

    The pullback conditions are also matched against the left factors of
    the single-object override at ``X`` by the relation itself (``i = 0``)
    and by its swap (``i = 1``).
    """
    cert = idp.wfs
    fa = cert.factorization
    amb = fa.ambient
    if amb.cod(f) != y:
        raise ConstructionError("precondition", f"{describe(f)} does not lie over {amb.show(y)}")
    if cert.alg(f) is None:
        raise ConstructionError("precondition", f"{describe(f)} has no algebra witness")
    x = amb.dom(f)
    kernel = amb.pullback(f, f)
    d = kernel.mediate([amb.identity(x), amb.identity(x)])
    cand = SliceRelation(f, fa.mid(d), fa.lam(d), fa.rho(d), kernel)
    family = list(alphas) if alphas is not None else _alphas(idp.universe, x, amb)
    rep = check_id_type_def(cert, f, cand, alphas=family)
    rel = RelationOnObject(x, cand.total, cand.point, cand.eps(0), cand.eps(1))
    swapped = RelationOnObject(x, cand.total, cand.point, cand.eps(1), cand.eps(0))
    # the kernel pair is the product over Y; its twist carries the swapped endpoints
    flip = amb.compose(kernel.mediate([kernel.legs[1], kernel.legs[0]]), cand.endpoints)
    for i, r_x in ((0, rel), (1, swapped)):
        try:
            over = single_object_override(cert, x, r_x, verify=False, endpoints=cand.endpoints if i == 0 else flip)
        except ConstructionError as exc:
            rep.record(f"override[{i}]", describe(f), False, str(exc))
            continue
        for alpha in family:
            rep.record(f"override[{i}]", describe(alpha), over.lam(alpha) == pulled_slice_point(cand, alpha, i))
    return cand, rep


# Dependent products of finite sets -------------------------------------------------

@dataclass
class DependentProduct:
    """``Pi_f g`` for ``g: W -> X`` and ``f: X -> Y`` in finite sets.

    Elements of ``apex`` are pairs ``(y, section)`` with ``section`` the
    tuple of pairs ``(x, w)`` over the fibre of ``f`` at ``y``;
    ``evaluation: f*(Pi_f g) -> W`` is the counit.
    """

    f: FinSetMap
    g: FinSetMap
    apex: FinSetObject
    display: FinSetMap
    evaluation: FinSetMap

    def pullback_of(self, y_map: FinSetMap) -> LimitCone:
        """Chosen ``f* y``: ``V x_Y X`` with legs to ``V`` and ``X``."""
        return FINSET.pullback(y_map, self.f)

    def transpose(self, h: FinSetMap, y_map: FinSetMap) -> FinSetMap:
        """``i``: from ``f* y -> W`` over ``X`` to ``V -> Pi_f g`` over ``Y``."""
        fib = _fibres(self.f)

        def rule(v):
            b = y_map(v)
            return (b, tuple((x, h((v, x))) for x in fib[b]))

        return FinSetMap.from_rule(y_map.dom, self.apex, rule)

    def untranspose(self, k: FinSetMap, y_map: FinSetMap) -> FinSetMap:
        """``j``: ``evaluation . (k x_Y X)``."""
        cone = self.pullback_of(y_map)
        at_pi = FINSET.pullback(self.display, self.f)
        m = at_pi.mediate([FINSET.compose(k, cone.legs[0]), cone.legs[1]])
        return FINSET.compose(self.evaluation, m)

    def over_x(self, y_map: FinSetMap) -> list:
        cone = self.pullback_of(y_map)
        src = cone.apex
        allowed = {e: _fibres(self.g).get(x, ()) for e, x in zip(src.elements, cone.legs[1].images)}
        return list(search_maps(src, self.g.dom, allowed, what="maps over X"))

    def over_y(self, y_map: FinSetMap) -> list:
        by_base: dict = {}
        for p, b in zip(self.apex.elements, self.display.images):
            by_base.setdefault(b, []).append(p)
        allowed = {v: by_base.get(y_map(v), ()) for v in y_map.dom.elements}
        return list(search_maps(y_map.dom, self.apex, allowed, what="maps over Y"))

    def bijection(self, y_map: FinSetMap) -> tuple[dict, dict]:
        """Tables of ``i`` and ``j`` on the two hom-sets, keyed by image tuples."""
        i_table = {h.images: self.transpose(h, y_map).images for h in self.over_x(y_map)}
        j_table = {k.images: self.untranspose(k, y_map).images for k in self.over_y(y_map)}
        return i_table, j_table


def _fibres(m: FinSetMap) -> dict:
    out: dict = {b: [] for b in m.cod.elements}
    for a, b in zip(m.dom.elements, m.images):
        out[b].append(a)
    return out


def pushforward_finset(f, g) -> DependentProduct:
    if not (isinstance(f, FinSetMap) and isinstance(g, FinSetMap)):
        raise UnsupportedOperation("dependent products are computed in finite sets only")
    if g.cod != f.dom:
        raise StructuralError("g must land in the domain of f")
    fib_f, fib_g = _fibres(f), _fibres(g)
    elems = []
    for b in f.cod.elements:
        xs = fib_f[b]
        sections = [()]
        for x in xs:
            sections = [s + ((x, w),) for s in sections for w in fib_g[x]]
        elems.extend((b, s) for s in sections)
    apex = FinSetObject(elems, name=f"Pi({f.dom.name}->{f.cod.name})")
    display = FinSetMap(apex, f.cod, [b for b, _ in elems], name="Pi_f g")
    at_pi = FINSET.pullback(display, f)
    evaluation = FinSetMap(at_pi.apex, g.dom, [dict(p[1])[x] for p, x in at_pi.apex.elements], name="ev")
    return DependentProduct(f, g, apex, display, evaluation)


def check_bijection(pi: DependentProduct, y_map: FinSetMap) -> Report:
    rep = Report(f"Pi bijection at {describe(y_map)}")
    i_table, j_table = pi.bijection(y_map)
    subject = describe(y_map)
    rep.record("i_lands_over_Y", subject, all(k in j_table for k in i_table.values()))
    rep.record("j_lands_over_X", subject, all(h in i_table for h in j_table.values()))
    rep.record("j.i=1", subject, all(j_table.get(k) == h for h, k in i_table.items()))
    rep.record("i.j=1", subject, all(i_table.get(h) == k for k, h in j_table.items()))
    return rep


def transpose_algebra(cert: WfsCertificate, pi: DependentProduct) -> Witness:
    """Algebra structure on ``Pi_f g`` as ``i(sigma)`` for a filler
    ``sigma`` of the transposed square ``f* lambda`` against ``g``."""
    fa = cert.factorization
    amb = FINSET
    p = pi.display
    lam, rh = fa.lam(p), fa.rho(p)
    at_mid = pi.pullback_of(rh)
    at_pi = pi.pullback_of(p)
    pulled_lam = at_mid.mediate([amb.compose(lam, at_pi.legs[0]), at_pi.legs[1]])
    top = pi.untranspose(amb.identity(pi.apex), p)
    problem = LiftingProblem(pulled_lam, pi.g, top, at_mid.legs[1])
    if not problem.commutes():
        raise ConstructionError("transpose", f"transposed square does not commute for {describe(p)}")
    lift = solve_lift(problem)
    if lift is None:
        raise ConstructionError("transpose", f"no filler for the transposed square of {describe(p)}")
    try:
        section = pi.transpose(lift.diagonal, rh)
    except StructuralError as exc:
        raise ConstructionError("untranspose", str(exc)) from exc
    w = Witness("alg", p, section, constructed=True)
    if not check_witness(w, fa):
        raise ConstructionError("untranspose", f"i(sigma) is not an algebra structure on {describe(p)}")
    return w


def check_pi(cert: WfsCertificate, universe: Universe | None = None) -> Report:
    """For every composable pair of algebra-witnessed ``g``, ``f`` of the
    universe, ``Pi_f g`` gets an algebra structure by transposition, and
    the search confirms one exists."""
    u = universe or cert.universe
    if u.ambient is not FINSET:
        raise UnsupportedOperation("Pi types are checked in finite sets only; categories are not locally cartesian closed")
    rep = Report(f"Pi types for {cert.factorization.name}")
    rep.note(u.describe())
    rights = [m for m in u.morphisms if cert.in_right(m)]
    pairs = 0
    for f in rights:
        for g in rights:
            if g.cod != f.dom:
                continue
            pairs += 1
            subject = f"Pi along {describe(f)} of {describe(g)}"
            pi = pushforward_finset(f, g)
            try:
                w = transpose_algebra(cert, pi)
                ok, detail = check_witness(w, cert.factorization), ""
            except ConstructionError as exc:
                ok, detail = False, str(exc)
            rep.record("transpose_alg", subject, ok, detail)
            rep.record("search_alg", subject, cert.alg(pi.display) is not None)
    rep.note(f"{pairs} composable pairs of right maps checked")
    return rep
