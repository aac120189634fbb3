"""Turn a parsed document into kernel, shape and witness objects."""

from __future__ import annotations

from ..ambient import FINCAT, FINSET, Bounds, finset
from ..idtypes import involution_swap
from ..kernel import FinCategory, Functor, Report, StructuralError, builtin, functor_from_labels, present, validate_category, validate_functor
from ..moore import StrictMooreWitness, composable_cone, identity_strict_witness, walking_iso_strict_witness
from ..shapes import (RelationAssignment, Universe, close_universe, fold_relation, identity_relation,
                      path_relation, universe_from_seeds)
from ..transforms import tau
from .syntax import CategoryDecl, FunctorDecl, RelationDecl, SpecDocument, UniverseDecl, WitnessDecl


class BuildError(RuntimeError):
    """A declaration could not be turned into an object; ``check`` names the
    failing stage for the report."""

    def __init__(self, check: str, subject: str, detail: str):
        super().__init__(f"{check} at {subject}: {detail}")
        self.check = check
        self.subject = subject
        self.detail = detail


AMBIENTS = {"finset": FINSET, "fincat": FINCAT}


class Workspace:
    """Lazily built objects for one document, memoized by name."""

    def __init__(self, doc: SpecDocument):
        self.doc = doc
        self._memo: dict = {}

    def _cached(self, key, make):
        if key not in self._memo:
            self._memo[key] = make()
        return self._memo[key]

    # categories and functors

    def category(self, name: str) -> FinCategory:
        decl = self.doc.get(name, "category")
        if decl is None:
            return self._cached(("builtin", name), lambda: builtin(name))
        return self._cached(("category", name), lambda: self._make_category(decl))

    def _make_category(self, d: CategoryDecl) -> FinCategory:
        if d.builtin is not None:
            return builtin(d.builtin)
        try:
            return present(d.name, d.objects, d.morphisms, d.equations)
        except StructuralError as exc:
            raise BuildError("category", d.name, str(exc)) from exc

    def functor(self, name: str) -> Functor:
        d: FunctorDecl = self.doc.get(name, "functor")
        return self._cached(("functor", name), lambda: self._make_functor(d))

    def _make_functor(self, d: FunctorDecl) -> Functor:
        src, dst = self.category(d.source), self.category(d.target)
        try:
            return functor_from_labels(src, dst, dict(d.object_map), dict(d.morphism_map), name=d.name)
        except StructuralError as exc:
            raise BuildError("functor", d.name, str(exc)) from exc

    def validate_declared(self) -> Report:
        """Kernel validation of every declared category and functor."""
        rep = Report("declared categories and functors")
        for d in self.doc.of_kind("category"):
            try:
                sub = validate_category(self.category(d.name))
            except BuildError as exc:
                rep.record("category", d.name, False, exc.detail)
                continue
            rep.record("category", d.name, sub.ok, "; ".join(f"{c.name} at {c.subject}" for c in sub.violations[:3]))
        for d in self.doc.of_kind("functor"):
            try:
                F = self.functor(d.name)
            except BuildError as exc:
                rep.record("functor", d.name, False, exc.detail)
                continue
            sub = validate_functor(F)
            rep.record("functor", d.name, sub.ok, "; ".join(f"{c.name} at {c.subject}" for c in sub.violations[:3]))
        return rep

    # relations and witnesses

    def relation(self, name: str) -> RelationAssignment:
        d: RelationDecl = self.doc.get(name, "relation")
        return self._cached(("relation", name), lambda: self._make_relation(d))

    def _make_relation(self, d: RelationDecl) -> RelationAssignment:
        if d.paths is not None:
            cat, start, end = d.paths
            J = self.category(cat)
            r = path_relation(J, J.obj(start), J.obj(end), name=d.name)
        elif d.builtin == "identity":
            r = identity_relation(AMBIENTS[d.ambient])
        elif d.builtin == "walking_iso":
            r = path_relation(builtin("walking_iso"), 0, 1, name=d.name)
        else:
            r = fold_relation()
        return involution_swap(r) if d.swap else r

    def witness(self, name: str) -> StrictMooreWitness:
        d: WitnessDecl = self.doc.get(name, "witness")
        return self._cached(("witness", name), lambda: self._make_witness(d))

    def _make_witness(self, d: WitnessDecl) -> StrictMooreWitness:
        r = self.relation(d.relation)
        rdecl: RelationDecl = self.doc.get(d.relation, "relation")
        if d.builtin == "identity":
            if rdecl.builtin != "identity":
                raise BuildError("witness", d.name, "the identity witness needs the identity relation")
            w = identity_strict_witness(r)
        else:
            shape = getattr(r, "path_shape", None)
            if shape is None or shape != builtin("walking_iso"):
                raise BuildError("witness", d.name, "the walking_iso witness needs paths shaped like the walking isomorphism")
            w = walking_iso_strict_witness(r)
        amb = r.ambient
        comps = dict(d.components)
        mu, delta, iota = w.mu, w.delta, w.iota
        if "mu" in comps:
            leg = 0 if comps["mu"] == "first" else 1
            mu = lambda x: composable_cone(r, x).legs[leg]  # noqa: E731
        if comps.get("delta") == "constant":
            delta = lambda x: r.eta(r.psi(x))  # noqa: E731
        if comps.get("iota") == "identity":
            iota = lambda x: amb.identity(r.psi(x))  # noqa: E731
        if comps:
            label = ",".join(f"{c}={v}" for c, v in d.components)
            w = StrictMooreWitness(r, mu, delta, w.strength, iota, name=f"{w.name}[{label}]")
        return w

    # universes

    def seeds(self, d: UniverseDecl) -> list:
        if d.ambient == "finset":
            return [finset(int(s)) for s in d.seeds]
        return [self.category(s) for s in d.seeds]

    def universe(self, name: str, relation: RelationAssignment, depth: int | None = None) -> Universe:
        d: UniverseDecl = self.doc.get(name, "universe")
        depth = d.depth if depth is None else depth
        key = ("universe", name, relation.name, depth)

        def make():
            base = universe_from_seeds(AMBIENTS[d.ambient], self.seeds(d), name=d.name)
            if depth <= 1:
                return base
            return close_universe(base, tau(relation), depth=depth, name=f"{d.name}@{depth}")

        return self._cached(key, make)


def bounds_with(base: Bounds, overrides: dict) -> Bounds:
    """``base`` with any of ``max-set-size`` and friends replaced."""
    fields = {k.replace("-", "_"): v for k, v in overrides.items() if v is not None}
    return Bounds(**{**base.__dict__, **fields})
