import itertools
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_set_fillers
from wfslab.ambient import FINCAT, FINSET, FinSetMap, UnsupportedOperation, finset
from wfslab.idtypes import (
    IdPresentationCertificate, SliceRelation, check_bijection, check_id_type_def, check_pi, facttorel_is_idpres,
    failed_stage, involution_swap, is_id_presentation, pulled_point, pulled_slice_point, pushforward_finset,
    roundtrip_maps, single_object_override, slice_id_presentation, transpose_algebra,
)
from wfslab.kernel import terminal_cat, walking_arrow, walking_iso
from wfslab.lifting import Witness, certify, coalg_problem, cylinder_factorization, equivalent_wfs
from wfslab.moore import (
    ConstructionError, check_weak, extract_homotopical, identity_strict_witness, walking_iso_strict_witness,
    witness_provider,
)
from wfslab.shapes import (
    RelationOnObject, describe, fold_relation, identity_relation, universe_from_seeds, validate_assignment,
    walking_iso_relation,
)
from wfslab.transforms import compose_morphisms, rho, tau, validate_assignment_morphism


@pytest.fixture(scope="module")
def sets():
    return universe_from_seeds(FINSET, [finset(i) for i in range(4)])


@pytest.fixture(scope="module")
def small_cats():
    return universe_from_seeds(FINCAT, [terminal_cat(), walking_arrow()])


@pytest.fixture(scope="module")
def cats():
    return universe_from_seeds(FINCAT, [terminal_cat(), walking_arrow(), walking_iso()])


def _certified(r, u, strict):
    fa = tau(r)
    cert, rep = certify(fa, u, provider=witness_provider(strict(r), fa))
    assert cert is not None, rep.summary()
    return cert


@pytest.fixture(scope="module")
def ident_cert(sets):
    return _certified(identity_relation(FINSET), sets, identity_strict_witness)


@pytest.fixture(scope="module")
def iso_cert(cats):
    return _certified(walking_iso_relation(), cats, walking_iso_strict_witness)


@pytest.fixture(scope="module")
def iso_small_cert(small_cats):
    return _certified(walking_iso_relation(), small_cats, walking_iso_strict_witness)


@pytest.fixture(scope="module")
def ident_idp(ident_cert, sets):
    idp, rep = is_id_presentation(ident_cert.factorization.source, sets, ident_cert)
    assert idp is not None, rep.summary()
    return idp


@pytest.fixture(scope="module")
def iso_idp(iso_cert, cats):
    idp, rep = is_id_presentation(iso_cert.factorization.source, cats, iso_cert)
    assert idp is not None, rep.summary()
    return idp


def _by_name(u, name, src, dst):
    return next(m for m in u.morphisms if describe(m) == name and FINCAT.dom(m) == src and FINCAT.cod(m) == dst)


# the endpoint swap ------------------------------------------------------------------

def test_swap_of_identity_relation_is_itself(sets):
    r = identity_relation(FINSET)
    s = involution_swap(r)
    assert all(s.at(x) == r.at(x) for x in sets.objects)
    assert all(s.map(f) == r.map(f) for f in sets.morphisms)


def test_swap_twice_is_the_original():
    r = walking_iso_relation()
    assert involution_swap(involution_swap(r)) is r
    assert involution_swap(r) is involution_swap(r)


def test_swapped_walking_iso_relation_reverses_evaluation(cats):
    r = walking_iso_relation()
    s = involution_swap(r)
    assert validate_assignment(s, cats).ok
    for x in cats.objects:
        assert s.eps(0, x) == r.ambient.exponential(x, walking_iso()).evaluation(1)
        assert s.eps(1, x) == r.eps(0, x)


# Id-presentations ----------------------------------------------------------------

def test_identity_relation_is_an_id_presentation(ident_idp, sets):
    assert ident_idp.revalidate().ok
    assert set(ident_idp.endpoint_algebras) == set(sets.objects)
    assert len(ident_idp.pullback_coalgebras) == 2 * len(sets.morphisms)


def test_walking_iso_relation_is_an_id_presentation(iso_idp, cats):
    assert iso_idp.revalidate().ok
    assert len(iso_idp.pullback_coalgebras) == 2 * len(cats.morphisms)


def test_second_pullbacks_come_from_the_swap(iso_idp, cats):
    r = iso_idp.relation
    for f in cats.morphisms:
        # independent construction: chosen pullback of eps1 along f
        cone = FINCAT.pullback(f, r.eps(1, FINCAT.cod(f)))
        direct = cone.mediate([FINCAT.identity(FINCAT.dom(f)), FINCAT.compose(r.eta(FINCAT.cod(f)), f)])
        assert iso_idp.pullback_coalgebras[(f, 1)].morphism == direct == pulled_point(r, f, 1)
        assert pulled_point(r, f, 0) == iso_idp.factorization.lam(f)


def test_fold_relation_is_refused_at_the_wfs_stage(sets):
    r = fold_relation()
    idp, rep = is_id_presentation(r, sets)
    assert idp is None
    assert failed_stage(rep) == "wfs"
    bad = rep.violations[0]
    f = next(m for m in sets.morphisms if describe(m) == bad.subject)
    p = coalg_problem(tau(r).lam(f), tau(r))
    assert brute_set_fillers(p.left, p.right, p.top, p.bottom) == []


def test_tampered_certificate_fails_revalidation(iso_idp):
    x = walking_iso()
    r = iso_idp.relation
    w = iso_idp.endpoint_algebras[x]
    bad = dict(iso_idp.endpoint_algebras)
    # constant paths at the start point: not a retraction of lambda
    bad[x] = Witness("alg", w.morphism, FINCAT.chain(r.eta(x), r.eps(0, x), w.section))
    broken = IdPresentationCertificate(r, iso_idp.wfs, bad, iso_idp.pullback_coalgebras)
    assert not broken.revalidate().ok
    with pytest.raises(ConstructionError) as err:
        roundtrip_maps(broken)
    assert err.value.stage == "certificate"


# from a factorization ------------------------------------------------------------

def test_facttorel_from_identity_certificate(ident_cert, sets):
    idp = facttorel_is_idpres(ident_cert)
    assert idp.revalidate().ok
    assert idp.report.count("inherit:endpoints_are_rho_diagonal") == len(sets.objects)


def test_facttorel_from_walking_iso_certificate(iso_small_cert):
    idp = facttorel_is_idpres(iso_small_cert)
    assert idp.revalidate().ok


def test_facttorel_refuses_non_type_theoretic_input(sets):
    cert, rep = certify(cylinder_factorization(), sets)
    assert cert is not None, rep.summary()
    with pytest.raises(ConstructionError) as err:
        facttorel_is_idpres(cert)
    assert err.value.stage == "type-theoretic"


@pytest.mark.parametrize("case", ["identity", "walking_iso"])
def test_tau_rho_tau_is_equivalent(case, ident_cert, iso_cert):
    cert = ident_cert if case == "identity" else iso_cert
    fa = cert.factorization
    assert equivalent_wfs(fa, tau(rho(fa)), cert.universe).ok


# roundtrip ------------------------------------------------------------------------

def test_roundtrip_on_identity_relation_is_identity_flavoured(ident_idp, sets):
    there, back = roundtrip_maps(ident_idp)
    fa = ident_idp.factorization
    for x in sets.objects:
        assert there.at(x) == fa.lam(FINSET.diagonal(x))
        assert FINSET.compose(back.at(x), there.at(x)) == FINSET.identity(x)


@pytest.mark.parametrize("case", ["identity", "walking_iso"])
def test_roundtrip_maps_validate_and_compose(case, ident_idp, iso_idp):
    idp = ident_idp if case == "identity" else iso_idp
    u = idp.universe
    there, back = roundtrip_maps(idp)
    assert validate_assignment_morphism(there, u).ok
    assert validate_assignment_morphism(back, u).ok
    assert validate_assignment_morphism(compose_morphisms(back, there), u).ok
    assert validate_assignment_morphism(compose_morphisms(there, back), u).ok


# single-object override ---------------------------------------------------------

def test_override_by_rho_itself_is_equivalent(iso_small_cert, small_cats):
    y = walking_arrow()
    fa = iso_small_cert.factorization
    out = single_object_override(iso_small_cert, y, rho(fa).at(y))
    assert out.report.ok


def test_override_by_path_object_is_equivalent(iso_cert, cats):
    y = walking_iso()
    r = iso_cert.factorization.source
    out = single_object_override(iso_cert, y, r.at(y))
    assert out.report.ok
    assert out.report.count("equivalence:same_left") == len(cats.morphisms)
    assert validate_assignment(out.source, cats).ok


def test_override_needs_right_class_endpoints(iso_cert):
    J = walking_iso()
    one = FINCAT.identity(J)
    with pytest.raises(ConstructionError) as err:
        single_object_override(iso_cert, J, RelationOnObject(J, J, one, one, one))
    assert err.value.stage == "precondition"


# identity types in slices -------------------------------------------------------

def test_slice_over_terminal_recovers_object_level_id_type(ident_idp, sets):
    r = rho(ident_idp.factorization)
    one = FINSET.terminal()
    for x in sets.objects:
        cand, rep = slice_id_presentation(ident_idp, one, FINSET.to_terminal(x))
        assert rep.ok, rep.summary()
        assert cand.total == r.psi(x) and cand.point == r.eta(x)


@pytest.mark.parametrize("name,src,dst", [
    ("<*,*>", walking_iso(), terminal_cat()),
    ("<0,1>", walking_iso(), walking_iso()),
    ("<1,0>", walking_iso(), walking_iso()),
    ("<0,0>", walking_arrow(), walking_arrow()),
])
def test_slice_id_types_on_walking_iso(name, src, dst, iso_idp, cats):
    f = _by_name(cats, name, src, dst)
    cand, rep = slice_id_presentation(iso_idp, dst, f)
    assert rep.ok, rep.summary()
    assert rep.count("pullback_coalg[1]") == rep.count("override[1]") > 1


def test_slice_refuses_maps_without_algebra(iso_idp, cats):
    f = _by_name(cats, "<0,1>", walking_arrow(), walking_iso())
    with pytest.raises(ConstructionError) as err:
        slice_id_presentation(iso_idp, walking_iso(), f)
    assert err.value.stage == "precondition"


def test_candidate_with_non_algebra_endpoints_fails(iso_cert, cats):
    J = walking_iso()
    f = FINCAT.to_terminal(J)
    kernel = FINCAT.pullback(f, f)
    one = FINCAT.identity(J)
    cand = SliceRelation(f, J, one, kernel.mediate([one, one]), kernel)
    rep = check_id_type_def(iso_cert, f, cand, cats)
    assert "eps_alg" in {c.name for c in rep.violations}


def test_identity_alpha_pulls_back_to_the_point(ident_idp):
    x = finset(3)
    f = FINSET.to_terminal(x)
    cand, _ = slice_id_presentation(ident_idp, FINSET.terminal(), f)
    for i in (0, 1):
        pulled = pulled_slice_point(cand, FINSET.identity(x), i)
        leg = FINSET.pullback(FINSET.identity(x), cand.eps(i)).legs[1]
        assert FINSET.is_iso(leg)
        assert FINSET.compose(leg, pulled) == cand.point


# dependent products of finite sets ------------------------------------------------

def _maps(a, b):
    return [FinSetMap(finset(a), finset(b), im) for im in itertools.product(range(b), repeat=a)]


def _brute_sections(f, g, y):
    fibre = [x for x in f.dom.elements if f(x) == y]
    count = 0
    for images in itertools.product(g.dom.elements, repeat=len(fibre)):
        count += all(g(w) == x for w, x in zip(images, fibre))
    return count


def test_pushforward_counts_sections():
    f = FinSetMap(finset(2), finset(1), [0, 0])
    g = FinSetMap(finset(3), finset(2), [0, 1, 1])
    pi = pushforward_finset(f, g)
    assert len(pi.apex) == _brute_sections(f, g, 0) == 2


def test_pushforward_of_identity_is_terminal_over_y():
    f = FinSetMap(finset(3), finset(2), [0, 1, 1])
    pi = pushforward_finset(f, FINSET.identity(f.dom))
    assert FINSET.is_iso(pi.display)


def test_pushforward_along_identity_is_g():
    g = FinSetMap(finset(3), finset(2), [1, 0, 1])
    pi = pushforward_finset(FINSET.identity(g.cod), g)
    assert len(pi.apex) == len(g.dom)
    assert sorted(pi.display.images) == sorted(g.images)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_pushforward_bijection_and_naturality(data):
    a, b = data.draw(st.integers(0, 3)), data.draw(st.integers(1, 3))
    f = FinSetMap(finset(a), finset(b), data.draw(st.lists(st.integers(0, b - 1), min_size=a, max_size=a)))
    c = data.draw(st.integers(0, 3)) if a else 0
    g = FinSetMap(finset(c), finset(a), data.draw(st.lists(st.integers(0, a - 1), min_size=c, max_size=c)) if a else [])
    v = data.draw(st.integers(0, 3))
    y = FinSetMap(finset(v), finset(b), data.draw(st.lists(st.integers(0, b - 1), min_size=v, max_size=v)))
    pi = pushforward_finset(f, g)
    assert check_bijection(pi, y).ok
    # naturality along u: V' -> V
    v2 = data.draw(st.integers(0, 3)) if v else 0
    u = FinSetMap(finset(v2), finset(v), data.draw(st.lists(st.integers(0, max(v - 1, 0)), min_size=v2, max_size=v2)))
    y2 = FINSET.compose(y, u)
    src, dst = pi.pullback_of(y2), pi.pullback_of(y)
    along = dst.mediate([FINSET.compose(u, src.legs[0]), src.legs[1]])
    for h in pi.over_x(y):
        assert pi.transpose(FINSET.compose(h, along), y2) == FINSET.compose(pi.transpose(h, y), u)


def test_pi_types_for_identity_certificate(ident_cert):
    rep = check_pi(ident_cert)
    assert rep.ok, rep.summary()
    assert rep.count("transpose_alg") > 100


def test_pi_of_an_iso_is_an_iso(ident_cert):
    f = FinSetMap(finset(3), finset(2), [0, 0, 1])
    g = FinSetMap(finset(3), finset(3), [2, 0, 1])
    pi = pushforward_finset(f, g)
    assert FINSET.is_iso(pi.display)
    assert transpose_algebra(ident_cert, pi).kind == "alg"


def test_corrupted_evaluation_breaks_the_transpose(ident_cert):
    f = FinSetMap(finset(2), finset(1), [0, 0])
    g = FinSetMap(finset(3), finset(2), [0, 1, 1])
    pi = pushforward_finset(f, g)
    ev = pi.evaluation
    images = list(ev.images)
    # send one evaluation to the other point of its fibre
    k = next(i for i, w in enumerate(images) if g(w) == 1)
    images[k] = 2 if images[k] == 1 else 1
    bad = replace(pi, evaluation=FinSetMap(ev.dom, ev.cod, images))
    assert not check_bijection(bad, FINSET.identity(f.cod)).ok
    with pytest.raises(ConstructionError):
        transpose_algebra(ident_cert, bad)


def test_pi_is_refused_on_categories(iso_cert):
    with pytest.raises(UnsupportedOperation):
        check_pi(iso_cert)


# links to Moore structure ----------------------------------------------------------

def test_id_presentation_yields_weak_moore_structure(ident_idp, iso_small_cert, small_cats):
    for cert, u in ((ident_idp.wfs, ident_idp.universe), (iso_small_cert, small_cats)):
        idp, _ = is_id_presentation(cert.factorization.source, u, cert)
        assert idp is not None
        assert check_weak(extract_homotopical(idp.wfs, u), u).ok
