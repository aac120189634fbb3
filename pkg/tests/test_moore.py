import pytest

from oracles import brute_cat_filler_count, brute_set_fillers
from wfslab.ambient import FINCAT, FINSET, Bounds, FinSetMap, FinSetObject, ResourceLimitError, finset, use_bounds
from wfslab.kernel import terminal_cat, walking_arrow, walking_iso
from wfslab.lifting import (
    LiftingProblem, WfsCertificate, alg_problem, certify, check_witness, coalg_problem, solve_lift,
)
from wfslab.moore import (
    EQUATION_LABELS, ConstructionError, StrictMooreWitness, WeakMooreWitness, build_epsilon_algebra,
    build_lambda_coalgebra, build_pullback_coalgebra, build_rho_algebra, check_strict, check_weak,
    comonad_laws_lambda, composable_cone, cospan_cone, downgrade, endpoint_map, extract_homotopical,
    extract_mu, extract_nu, figure1_lift, identity_strict_witness, monad_laws_rho, walking_iso_strict_witness,
    witness_provider,
)
from wfslab.shapes import (
    RelationAssignment, RelationOnObject, describe, identity_relation, universe_from_seeds, walking_iso_relation,
)
from wfslab.transforms import rho, tau


@pytest.fixture(scope="module")
def sets():
    return universe_from_seeds(FINSET, [finset(i) for i in range(4)])


@pytest.fixture(scope="module")
def small_cats():
    return universe_from_seeds(FINCAT, [terminal_cat(), walking_arrow()])


@pytest.fixture(scope="module")
def cats():
    return universe_from_seeds(FINCAT, [terminal_cat(), walking_arrow(), walking_iso()])


@pytest.fixture(scope="module")
def iso():
    r = walking_iso_relation()
    return r, tau(r), walking_iso_strict_witness(r)


@pytest.fixture(scope="module")
def ident():
    r = identity_relation(FINSET)
    return r, tau(r), identity_strict_witness(r)


@pytest.fixture(scope="module")
def iso_cert(iso, cats):
    r, fa, w = iso
    cert, rep = certify(fa, cats, provider=witness_provider(w, fa))
    assert cert is not None, rep.summary()
    return cert


@pytest.fixture(scope="module")
def ident_cert(ident, sets):
    r, fa, w = ident
    cert, rep = certify(fa, sets, provider=witness_provider(w, fa))
    assert cert is not None, rep.summary()
    return cert


def groups(rep):
    return {c.name.split("[")[0] for c in rep.checks}


def failed(rep):
    return {c.name for c in rep.violations}


# strict structure -----------------------------------------------------------------

def test_walking_iso_strict_witness_passes(iso, cats):
    rep = check_strict(iso[2], cats)
    assert rep.ok, rep.summary()
    strict_groups = {"mulift", "intcat2", "deltalift", "taulift", "comonad", "tau1", "tau2", "iotalift"}
    assert strict_groups <= groups(rep) and strict_groups <= set(EQUATION_LABELS)
    assert {"natural", "strength_square"} <= groups(rep)


def test_identity_strict_witness_passes(ident, sets):
    assert check_strict(ident[2], sets).ok


def test_projection_is_not_a_composition(iso, cats):
    r, _, w = iso
    bad = StrictMooreWitness(r, lambda x: composable_cone(r, x).legs[0], w.delta, w.strength, w.iota, name="first")
    rep = check_strict(bad, cats)
    assert "intcat2[left_unit]" in failed(rep)
    assert "mulift[eps1]" in failed(rep)
    assert "intcat2[right_unit]" not in failed(rep)


def test_reversal_must_swap_endpoints(iso, cats):
    r, _, w = iso
    bad = StrictMooreWitness(r, w.mu, w.delta, w.strength, lambda x: FINCAT.identity(r.psi(x)), name="no swap")
    assert failed(check_strict(bad, cats)) == {"iotalift[eps0]", "iotalift[eps1]"}


@pytest.mark.parametrize("case", ["identity", "walking_iso"])
def test_monad_and_comonad_laws(case, iso, ident, sets, cats):
    (r, fa, w), u = (ident, sets) if case == "identity" else (iso, cats)
    m, c = monad_laws_rho(w, u, fa), comonad_laws_lambda(w, u, fa)
    assert m.ok and c.ok
    assert m.count("monad[assoc]") == c.count("comonad_law[coassoc]") == len(u.core)


# weak structure ----------------------------------------------------------------------

@pytest.mark.parametrize("case", ["identity", "walking_iso"])
def test_downgrade_passes_weak_checks(case, iso, ident, sets, cats):
    (r, fa, w), u = (ident, sets) if case == "identity" else (iso, cats)
    rep = check_weak(downgrade(w), u)
    assert rep.ok, rep.summary()
    assert {"weakmu", "weakho", "weakho2", "symmetric", "derived_iota"} <= groups(rep)


def test_symmetry_that_keeps_endpoints_fails(iso, cats):
    r, _, w = iso
    weak = downgrade(w)
    bad = WeakMooreWitness(r, weak.mu, weak.square, weak.tau, lambda x: cospan_cone(r, x).legs[1], name="no twist")
    rep = check_weak(bad, cats)
    assert "symmetric[eps0]" in failed(rep)
    assert not any(n.startswith(("weakmu", "weakho")) for n in failed(rep))


# constructive witnesses ----------------------------------------------------------

def test_constructed_algebras_and_coalgebras(iso, cats):
    r, fa, w = iso
    for f in cats.core:
        a = build_rho_algebra(w, f, fa)
        c = build_lambda_coalgebra(w, f, fa)
        assert check_witness(a, fa) and check_witness(c, fa)
        assert solve_lift(alg_problem(fa.rho(f), fa)) is not None
        assert solve_lift(coalg_problem(fa.lam(f), fa)) is not None


def test_point_into_iso_agrees_with_oracle(iso):
    r, fa, w = iso
    point = next(f for f in FINCAT.hom_enum(terminal_cat(), walking_iso()) if f.obj(0) == 0)
    a = build_rho_algebra(w, point, fa)
    p = alg_problem(fa.rho(point), fa)
    assert p.is_filler(a.section)
    assert solve_lift(p) is not None
    # small enough for the raw product oracle
    end = next(f for f in FINCAT.hom_enum(terminal_cat(), walking_arrow()) if f.obj(0) == 1)
    q = alg_problem(fa.rho(end), fa)
    assert q.is_filler(build_rho_algebra(w, end, fa).section)
    assert brute_cat_filler_count(q.left, q.right, q.top, q.bottom) > 0


def test_identity_relation_witnesses_are_isos(ident, sets):
    r, fa, w = ident
    for f in sets.core:
        assert FINSET.is_iso(build_rho_algebra(w, f, fa).section)
        c = build_lambda_coalgebra(w, f, fa)
        p = coalg_problem(c.morphism, fa)
        assert brute_set_fillers(p.left, p.right, p.top, p.bottom)


def test_broken_mu_names_the_equation(iso, cats):
    r, fa, w = iso
    bad = StrictMooreWitness(r, lambda x: composable_cone(r, x).legs[0], w.delta, w.strength, w.iota)
    f = next(f for f in cats.core if FINCAT.cod(f) == walking_iso() and FINCAT.dom(f) == terminal_cat())
    with pytest.raises(ConstructionError) as err:
        build_rho_algebra(bad, f, fa)
    assert "(1 x mu)" in err.value.stage


def test_broken_tau_is_refused(iso, cats):
    r, fa, w = iso
    weak = downgrade(w)

    def flat(f):
        dom = weak.strength_domain(f)
        cone = tau(r).at(f)
        return FINCAT.chain(r.eta(cone.mid), cone.lam, dom.legs[0])

    bad = WeakMooreWitness(r, weak.mu, weak.square, flat, weak.nu)
    f = next(f for f in cats.core if FINCAT.cod(f) == walking_iso() and FINCAT.dom(f) == terminal_cat())
    with pytest.raises(ConstructionError):
        build_lambda_coalgebra(bad, f, fa)


def test_epsilon_algebras(iso, ident, cats, sets):
    n = 0
    for (r, fa, w), u in ((iso, cats), (ident, sets)):
        for x in u.objects:
            s = build_epsilon_algebra(w, x, fa)
            assert check_witness(s, fa)
            assert solve_lift(alg_problem(endpoint_map(r, x), fa)) is not None
            n += 1
    assert n >= 7


def test_epsilon_algebra_needs_symmetry(iso):
    r, fa, w = iso
    weak = downgrade(w)
    bad = WeakMooreWitness(r, weak.mu, weak.square, weak.tau, lambda x: None)
    with pytest.raises(ConstructionError) as err:
        build_epsilon_algebra(bad, walking_arrow(), fa)
    assert err.value.stage == "nu"


def test_pullback_coalgebras(iso, iso_cert, cats):
    r, fa, w = iso
    built = 0
    for left in cats.core:
        if not iso_cert.in_left(left):
            continue
        for right in cats.core:
            if FINCAT.cod(right) != FINCAT.cod(left) or not iso_cert.in_right(right):
                continue
            s = build_pullback_coalgebra(w, iso_cert, left, right)
            assert check_witness(s, fa)
            assert iso_cert.coalg(s.morphism) is not None
            built += 1
    assert built >= 10


def test_pullback_coalgebra_needs_an_algebra(iso, iso_cert):
    r, fa, w = iso
    # a point of the walking isomorphism is not an isofibration
    end = next(f for f in FINCAT.hom_enum(terminal_cat(), walking_iso()) if f.obj(0) == 1)
    one = FINCAT.identity(walking_iso())
    with pytest.raises(ConstructionError) as err:
        build_pullback_coalgebra(w, iso_cert, one, end)
    assert err.value.stage == "precondition"


# Figure 1 ---------------------------------------------------------------------------

def test_figure1_identity_relation(ident, ident_cert, sets):
    r, fa, _ = ident
    for f in sets.core:
        assert check_witness(figure1_lift(r, ident_cert, f), fa)


def test_figure1_arrow_into_iso(iso, iso_cert):
    fa = iso[1]
    r = rho(fa)
    f = next(f for f in FINCAT.hom_enum(walking_arrow(), walking_iso()) if f.obj(0) != f.obj(1))
    w = figure1_lift(r, iso_cert, f)
    assert check_witness(w, tau(r))


def test_figure1_rejects_relation_off_the_classes(iso_cert):
    r = identity_relation(FINCAT)
    f = FINCAT.identity(walking_iso())
    with pytest.raises(ConstructionError) as err:
        figure1_lift(r, iso_cert, f)
    assert err.value.stage.startswith("stage 1")


# extraction -------------------------------------------------------------------------

def test_extraction_from_identity_certificate(ident_cert, sets):
    w = extract_homotopical(ident_cert, sets)
    assert check_weak(w, sets).ok
    for x in sets.objects:
        assert len(w.square(x).obj) == len(x)


def test_extraction_from_walking_iso_on_small_universe(iso, small_cats):
    r, fa, w = iso
    cert, _ = certify(fa, small_cats, provider=witness_provider(w, fa))
    ext = extract_homotopical(cert, small_cats)
    assert check_weak(ext, small_cats).ok
    for x in small_cats.objects:
        p = LiftingProblem(fa.lam(r.eps(1, x)), endpoint_map(r, x), FINCAT.identity(r.psi(x)),
                           FINCAT.compose(endpoint_map(r, x), extract_mu(cert, x)))
        assert p.is_filler(extract_mu(cert, x))
        assert FINCAT.compose(r.eps(0, x), extract_nu(cert, x)) == \
            FINCAT.compose(r.eps(1, x), cospan_cone(r, x).legs[0])


def cyclic_relation():
    """Paths ``x ~> x`` and ``x ~> x+1`` on a 3-element set: not transitive."""
    x = finset(3)
    total = FinSetObject([(i, e) for i in (0, 1) for e in range(3)], name="cyc")
    eta = FinSetMap(x, total, [(0, e) for e in range(3)])
    eps0 = FinSetMap.from_rule(total, x, lambda p: p[1])
    eps1 = FinSetMap.from_rule(total, x, lambda p: (p[1] + p[0]) % 3)

    def obj(y):
        if y != x:
            raise ValueError("defined on one object only")
        return RelationOnObject(x, total, eta, eps0, eps1)

    return RelationAssignment("cyclic", FINSET, obj, lambda f: f)


def test_corrupted_certificate_blocks_extraction(sets):
    r = cyclic_relation()
    cert = WfsCertificate(tau(r), sets)
    with pytest.raises(ConstructionError) as err:
        extract_mu(cert, finset(3))
    assert err.value.stage == "extract mu"


def test_oversize_extraction_is_a_resource_error(cats):
    r = walking_iso_relation()
    fa = tau(r)
    cert = WfsCertificate(fa, cats)
    with use_bounds(Bounds(max_homs=2_000)), pytest.raises(ResourceLimitError):
        extract_homotopical(cert, cats)


def test_descriptions_are_stable(iso, cats):
    r, fa, w = iso
    names = [describe(fa.lam(f)) for f in list(cats.core)[:3]]
    assert names == [describe(fa.lam(f)) for f in list(cats.core)[:3]]
