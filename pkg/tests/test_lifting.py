import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import brute_cat_filler_count, brute_set_fillers
from wfslab.ambient import FINCAT, FINSET, FinSetMap, finset
from wfslab.kernel import StructuralError, terminal_cat, walking_arrow, walking_iso
from wfslab.lifting import (
    LiftingProblem, Witness, alg_structure, certify, check_llp_pairs, check_type_theoretic,
    check_witness, coalg_structure, corrupt_rho, cylinder_factorization, equivalent_wfs, is_fibrant,
    is_wfs, iter_lifts, solve_lift,
)
from wfslab.shapes import describe, identity_relation, universe_from_seeds, walking_iso_relation
from wfslab.transforms import tau


def fmap(a, b, images):
    return FinSetMap(finset(a), finset(b), images)


@pytest.fixture(scope="module")
def sets():
    return universe_from_seeds(FINSET, [finset(i) for i in range(4)])


@pytest.fixture(scope="module")
def cats():
    return universe_from_seeds(FINCAT, [terminal_cat(), walking_arrow(), walking_iso()])


@pytest.fixture(scope="module")
def identity_cert(sets):
    cert, rep = certify(tau(identity_relation(FINSET)), sets)
    assert cert is not None, rep.summary()
    return cert


def test_empty_into_point_against_two_to_one():
    p = LiftingProblem(fmap(0, 1, []), fmap(2, 1, [0, 0]), fmap(0, 2, []), fmap(1, 1, [0]))
    oracle = brute_set_fillers(p.left, p.right, p.top, p.bottom)
    assert len(oracle) == 2
    assert [d.images for d in iter_lifts(p)] == oracle
    assert solve_lift(p).diagonal.images == oracle[0]


def test_identity_edges_force_the_diagonal():
    u, v = fmap(2, 3, [2, 1]), fmap(3, 1, [0, 0, 0])
    w = solve_lift(LiftingProblem(FINSET.identity(finset(2)), v, u, FINSET.compose(v, u)))
    assert w.diagonal == u
    x = fmap(2, 3, [0, 2])
    w = solve_lift(LiftingProblem(x, FINSET.identity(finset(3)), x, FINSET.identity(finset(3))))
    assert w.diagonal == FINSET.identity(finset(3))


def test_non_commuting_square_is_refused():
    p = LiftingProblem(fmap(1, 1, [0]), fmap(2, 2, [0, 1]), fmap(1, 2, [0]), fmap(1, 2, [1]))
    with pytest.raises(StructuralError):
        solve_lift(p)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_solver_agrees_with_oracle(data):
    a, b, x, y = (data.draw(st.integers(0, 3)) for _ in range(4))
    # every map needs a non-empty codomain unless its domain is empty
    assume((b > 0 or a == 0) and (y > 0 or (x == 0 and b == 0)) and (x > 0 or a == 0))
    f = fmap(a, b, data.draw(st.lists(st.integers(0, b - 1), min_size=a, max_size=a)) if b else [])
    g = fmap(x, y, data.draw(st.lists(st.integers(0, y - 1), min_size=x, max_size=x)) if y else [])
    u = fmap(a, x, data.draw(st.lists(st.integers(0, x - 1), min_size=a, max_size=a)) if x else [])
    v = fmap(b, y, data.draw(st.lists(st.integers(0, y - 1), min_size=b, max_size=b)) if y else [])
    assume(FINSET.compose(g, u) == FINSET.compose(v, f))
    p = LiftingProblem(f, g, u, v)
    oracle = brute_set_fillers(f, g, u, v)
    w = solve_lift(p)
    if oracle:
        assert w is not None and w.check() and w.diagonal.images == oracle[0]
    else:
        assert w is None


def test_fincat_fillers_match_oracle(cats):
    fa = tau(walking_iso_relation())
    checked = found = 0
    for f in cats.morphisms:
        # the oracle is a raw product over all morphism images; keep it small
        if len(fa.mid(f).morphisms()) > 6:
            continue
        p = LiftingProblem(f, fa.rho(f), fa.lam(f), FINCAT.identity(FINCAT.cod(f)))
        w = solve_lift(p)
        n = brute_cat_filler_count(p.left, p.right, p.top, p.bottom)
        assert (w is not None) == (n > 0)
        checked += 1
        found += n > 0
    assert checked >= 8 and 0 < found < checked


def test_identity_relation_classes(sets):
    fa = tau(identity_relation(FINSET))
    for f in sets.morphisms:
        w = alg_structure(f, fa)
        assert w is not None and check_witness(w, fa)
        c = coalg_structure(f, fa)
        assert (c is not None) == FINSET.is_iso(f)
    assert coalg_structure(fmap(2, 1, [0, 0]), fa) is None


def test_isos_are_left_under_walking_iso(cats):
    fa = tau(walking_iso_relation())
    for f in cats.morphisms:
        if FINCAT.is_iso(f):
            w = coalg_structure(f, fa)
            assert w is not None and check_witness(w, fa)


def test_identity_certificate(identity_cert):
    assert identity_cert.revalidate().ok
    fa = identity_cert.factorization
    assert all(fa.lam(f) in identity_cert.coalg_witnesses for f in identity_cert.universe.morphisms)
    assert all(fa.rho(f) in identity_cert.alg_witnesses for f in identity_cert.universe.morphisms)


def test_walking_iso_certificate_on_seeds(cats):
    cert, rep = certify(tau(walking_iso_relation()), cats)
    assert cert is not None and rep.ok
    assert cert.revalidate().ok


def test_corrupted_rho_names_the_morphism(sets):
    fa = tau(identity_relation(FINSET))
    f = fmap(2, 3, [0, 1])
    p = fa.at(f)
    bad = FinSetMap(p.mid, finset(3), [2] * len(p.mid))
    cert, rep = certify(corrupt_rho(fa, f, bad), sets)
    assert cert is None
    assert rep.violations[0].subject == describe(f)
    assert any("first failure" in n for n in rep.notes)


def test_llp_pairs_identity(identity_cert):
    rep = check_llp_pairs(identity_cert)
    assert rep.ok
    assert rep.count("lift_exists") >= 50


def test_llp_identity_square_trivial(identity_cert):
    one = FINSET.identity(finset(2))
    assert solve_lift(LiftingProblem(one, one, one, one)).diagonal == one


def test_fibrancy_and_type_theoretic(identity_cert):
    assert all(is_fibrant(x, identity_cert) for x in identity_cert.universe.objects)
    rep = check_type_theoretic(identity_cert)
    assert rep.ok
    assert rep.count("pullback_stable") > 0


def test_cylinder_empty_set_not_fibrant(sets):
    fa = cylinder_factorization()
    cert, rep = certify(fa, sets)
    assert cert is not None, rep.summary()
    assert not is_fibrant(finset(0), cert)
    assert is_fibrant(finset(1), cert)
    tt = check_type_theoretic(cert)
    assert [c.name for c in tt.violations] == ["fibrant"]
    assert tt.violations[0].subject == FINSET.show(finset(0))


def test_equivalence_checks(cats, sets):
    fa = tau(identity_relation(FINSET))
    assert equivalent_wfs(fa, fa, sets).ok
    assert not equivalent_wfs(tau(identity_relation(FINCAT)), tau(walking_iso_relation()), cats).ok


def test_witness_check_rejects_wrong_section(sets):
    fa = tau(identity_relation(FINSET))
    f = fmap(1, 2, [0])
    mid = fa.mid(f)
    constant = FinSetMap(finset(2), mid, [mid.elements[0]] * 2)
    assert not check_witness(Witness("coalg", f, constant), fa)
    assert is_wfs(fa, sets) is not None
