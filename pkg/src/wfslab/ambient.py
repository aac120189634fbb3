"""Finitely complete ambient categories: finite sets and finite categories.

Both instances share one interface (:class:`Ambient`).  Limits are chosen
once and for all: products are tuples, pullbacks and wide pullbacks are the
tuples of the product satisfying the diagram's equations, equalizers are
subobjects.  Equalities that hold "on the nose" are therefore literal.

Size control.  ``max_set_size``, ``max_objects`` and ``max_morphisms`` bound
objects admitted from outside (universe seeds, declared categories, the
endpoints of :meth:`Ambient.hom_enum`).  Objects derived by constructions
are never rejected for their size alone, but every enumeration (elements of
a limit, functors, natural transformations, search nodes) draws on the
``max_homs`` budget and raises :class:`ResourceLimitError` past it.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from functools import cached_property

from .kernel import Category, FinCategory, Functor, StructuralError, compose_functors, identity_functor, terminal_cat


@dataclass(frozen=True)
class Bounds:
    max_set_size: int = 64
    max_objects: int = 12
    max_morphisms: int = 64
    max_homs: int = 200_000


class ResourceLimitError(RuntimeError):
    def __init__(self, what: str, count: int, limit: int):
        super().__init__(f"{what}: {count} exceeds the bound {limit}")
        self.what = what
        self.count = count
        self.limit = limit


class UnsupportedOperation(TypeError):
    pass


_BOUNDS: ContextVar[Bounds] = ContextVar("wfslab_bounds", default=Bounds())


def current_bounds() -> Bounds:
    return _BOUNDS.get()


@contextmanager
def use_bounds(bounds: Bounds):
    token = _BOUNDS.set(bounds)
    try:
        yield bounds
    finally:
        _BOUNDS.reset(token)


class _Budget:
    __slots__ = ("what", "limit", "used")

    def __init__(self, what: str, limit: int | None = None):
        self.what = what
        self.limit = current_bounds().max_homs if limit is None else limit
        self.used = 0

    def spend(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.limit:
            raise ResourceLimitError(self.what, self.used, self.limit)


# Finite sets ----------------------------------------------------------------

class FinSetObject:
    __slots__ = ("elements", "name", "_index", "_hash")

    def __init__(self, elements: Sequence, name: str = ""):
        self.elements = tuple(elements)
        self.name = name or "{" + ",".join(map(_show, self.elements)) + "}"
        self._index = {e: i for i, e in enumerate(self.elements)}
        if len(self._index) != len(self.elements):
            raise StructuralError(f"duplicate elements in {self.name}")
        self._hash = hash(("set", self.elements))

    def index(self, e) -> int:
        return self._index[e]

    def __contains__(self, e) -> bool:
        try:
            return e in self._index
        except TypeError:
            return False

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, FinSetObject):
            return NotImplemented
        return self._hash == other._hash and self.elements == other.elements

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"<FinSet {self.name}>"


def finset(n: int) -> FinSetObject:
    """The standard ``n``-element set ``{0, ..., n-1}``."""
    return FinSetObject(range(n), name=str(n))


class FinSetMap:
    """Function between finite sets, stored as the tuple of images."""

    __slots__ = ("dom", "cod", "images", "name", "_hash")

    def __init__(self, dom: FinSetObject, cod: FinSetObject, images: Sequence, name: str = ""):
        self.dom = dom
        self.cod = cod
        self.images = tuple(images)
        self.name = name
        if len(self.images) != len(dom):
            raise StructuralError(f"map {name or '?'} is not total on its domain")
        for y in self.images:
            if y not in cod:
                raise StructuralError(f"map {name or '?'} has image {y!r} outside its codomain")
        self._hash = hash((dom, cod, self.images))

    @classmethod
    def from_rule(cls, dom: FinSetObject, cod: FinSetObject, rule: Callable, name: str = "") -> FinSetMap:
        return cls(dom, cod, [rule(x) for x in dom.elements], name)

    def __call__(self, x):
        return self.images[self.dom.index(x)]

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, FinSetMap):
            return NotImplemented
        return self._hash == other._hash and self.images == other.images and self.dom == other.dom and self.cod == other.cod

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"<FinSetMap {self.name or show_morphism(self)}>"


# Derived finite categories -------------------------------------------------

class LimitCategory(Category):
    """Subcategory of a finite product cut out by equations between legs.

    ``constraints`` holds tuples ``(i, F, j, G)`` meaning ``F(x_i) == G(x_j)``.
    Objects and morphisms are tuples with one entry per factor.
    """

    def __init__(self, factors: Sequence[Category], constraints: Sequence[tuple] = (), name: str = ""):
        self.factors = tuple(factors)
        self.constraints = tuple(constraints)
        self.name = name or " x ".join(c.name for c in self.factors) or "1"

    def dom(self, m):
        return tuple(c.dom(x) for c, x in zip(self.factors, m))

    def cod(self, m):
        return tuple(c.cod(x) for c, x in zip(self.factors, m))

    def identity(self, o):
        return tuple(c.identity(x) for c, x in zip(self.factors, o))

    def compose(self, g, f):
        return tuple(c.compose(y, x) for c, y, x in zip(self.factors, g, f))

    def _plan(self):
        # constraints grouped by the later of their two factor indices
        plan = [[] for _ in self.factors]
        for (i, F, j, G) in self.constraints:
            if i > j:
                i, F, j, G = j, G, i, F
            plan[j].append((i, F, G))
        return plan

    def _solve(self, pools: list[Callable], apply_obj: bool) -> Iterator[tuple]:
        plan = self._plan()
        budget = _Budget(f"enumerating {self.name}")
        n = len(self.factors)
        buckets: list = []
        for k in range(n):
            if not plan[k]:
                buckets.append(None)
                continue
            i, F, G = plan[k][0]
            factor = self.factors[k]
            if apply_obj and G.evaluates_at is not None and isinstance(factor, ExponentialCategory) \
                    and G.source == factor:
                # fibres of an evaluation functor are searched directly
                buckets.append((i, F, (lambda fac, at: lambda v: fac.objects_with(at, v))(factor, G.evaluates_at)))
                continue
            table: dict = {}
            for x in pools[k]():
                key = G.obj(x) if apply_obj else G.mor(x)
                table.setdefault(key, []).append(x)
            buckets.append((i, F, (lambda t: lambda v: t.get(v, ()))(table)))
        current: list = [None] * n

        def rec(k):
            if k == n:
                yield tuple(current)
                return
            b = buckets[k]
            if b is None:
                cands = pools[k]()
            else:
                i, F, lookup = b
                cands = lookup(F.obj(current[i]) if apply_obj else F.mor(current[i]))
            for x in cands:
                budget.spend()
                ok = True
                for (i, F2, G2) in plan[k][1:]:
                    if apply_obj:
                        ok = F2.obj(current[i]) == G2.obj(x)
                    else:
                        ok = F2.mor(current[i]) == G2.mor(x)
                    if not ok:
                        break
                if ok:
                    current[k] = x
                    yield from rec(k + 1)

        return rec(0)

    def _enumerate_objects(self):
        return self._solve([c.objects for c in self.factors], True)

    def _enumerate_morphisms(self):
        return self._solve([c.morphisms for c in self.factors], False)

    def hom(self, a, b) -> tuple:
        if "_morphisms" in self.__dict__:
            return super().hom(a, b)
        cache = self.__dict__.setdefault("_lazy_homs", {})
        if (a, b) not in cache:
            # factor-wise lexicographic, matching the enumeration order
            homs = [c.hom(x, y) for c, x, y in zip(self.factors, a, b)]
            cache[(a, b)] = tuple(m for m in itertools.product(*homs) if self._holds(m, False))
        return cache[(a, b)]

    def _holds(self, v, apply_obj: bool) -> bool:
        for (i, F, j, G) in self.constraints:
            if apply_obj:
                if F.obj(v[i]) != G.obj(v[j]):
                    return False
            elif F.mor(v[i]) != G.mor(v[j]):
                return False
        return True

    def has_object(self, o) -> bool:
        return (isinstance(o, tuple) and len(o) == len(self.factors)
                and all(c.has_object(x) for c, x in zip(self.factors, o)) and self._holds(o, True))

    def has_morphism(self, m) -> bool:
        return (isinstance(m, tuple) and len(m) == len(self.factors)
                and all(c.has_morphism(x) for c, x in zip(self.factors, m)) and self._holds(m, False))

    def _make_key(self):
        return ("limit", tuple(c.key for c in self.factors), self.constraints)

    def show_object(self, o) -> str:
        return "(" + ", ".join(c.show_object(x) for c, x in zip(self.factors, o)) + ")"

    def show_morphism(self, m) -> str:
        return "(" + ", ".join(c.show_morphism(x) for c, x in zip(self.factors, m)) + ")"


class SubCategory(Category):
    """Full-on-values subcategory where two parallel functors agree."""

    def __init__(self, f: Functor, g: Functor, name: str = ""):
        self.parent = f.source
        self.f = f
        self.g = g
        self.name = name or f"Eq({f.name or 'f'}, {g.name or 'g'})"

    def dom(self, m):
        return self.parent.dom(m)

    def cod(self, m):
        return self.parent.cod(m)

    def identity(self, o):
        return self.parent.identity(o)

    def compose(self, g, f):
        return self.parent.compose(g, f)

    def _enumerate_objects(self):
        return (o for o in self.parent.objects() if self.f.obj(o) == self.g.obj(o))

    def _enumerate_morphisms(self):
        return (m for m in self.parent.morphisms() if self.f.mor(m) == self.g.mor(m))

    def has_object(self, o) -> bool:
        return self.parent.has_object(o) and self.f.obj(o) == self.g.obj(o)

    def has_morphism(self, m) -> bool:
        return self.parent.has_morphism(m) and self.f.mor(m) == self.g.mor(m)

    def _make_key(self):
        return ("eq", self.f, self.g)

    def show_object(self, o) -> str:
        return self.parent.show_object(o)

    def show_morphism(self, m) -> str:
        return self.parent.show_morphism(m)


class ExponentialCategory(Category):
    """Functor category ``base ** exponent``.

    An object is a functor value ``(object images, morphism images)`` listed
    in the exponent's enumeration order; a morphism is a triple
    ``(source value, target value, components)``.
    """

    def __init__(self, base: Category, exponent: Category, name: str = ""):
        self.base = base
        self.exponent = exponent
        self.name = name or f"{base.name}^{exponent.name}"

    def dom(self, m):
        return m[0]

    def cod(self, m):
        return m[1]

    def identity(self, o):
        b = self.base
        return (o, o, tuple(b.identity(x) for x in o[0]))

    def compose(self, g, f):
        b = self.base
        return (f[0], g[1], tuple(b.compose(y, x) for y, x in zip(g[2], f[2])))

    def _enumerate_objects(self):
        return (F.tables() for F in search_functors(self.exponent, self.base))

    def _enumerate_morphisms(self):
        objs = self.objects()
        budget = _Budget(f"enumerating morphisms of {self.name}")
        for F in objs:
            for G in objs:
                for comps in _nat_components(self.exponent, self.base, F, G, budget):
                    yield (F, G, comps)

    def has_object(self, o) -> bool:
        try:
            objs, mors = o
        except (TypeError, ValueError):
            return False
        C, D = self.exponent, self.base
        if len(objs) != len(C.objects()) or len(mors) != len(C.morphisms()):
            return False
        if not all(D.has_object(x) for x in objs) or not all(D.has_morphism(x) for x in mors):
            return False
        oi, mi = C.object_index, C.morphism_index
        for m in C.morphisms():
            img = mors[mi(m)]
            if D.dom(img) != objs[oi(C.dom(m))] or D.cod(img) != objs[oi(C.cod(m))]:
                return False
        for o_ in C.objects():
            if mors[mi(C.identity(o_))] != D.identity(objs[oi(o_)]):
                return False
        for f in C.morphisms():
            for g in C.morphisms():
                if C.dom(g) != C.cod(f):
                    continue
                if mors[mi(C.compose(g, f))] != D.compose(mors[mi(g)], mors[mi(f)]):
                    return False
        return True

    def has_morphism(self, m) -> bool:
        try:
            F, G, comps = m
        except (TypeError, ValueError):
            return False
        if not (self.has_object(F) and self.has_object(G)):
            return False
        C, D = self.exponent, self.base
        if len(comps) != len(C.objects()):
            return False
        oi, mi = C.object_index, C.morphism_index
        for k, o_ in enumerate(C.objects()):
            if not D.has_morphism(comps[k]) or D.dom(comps[k]) != F[0][k] or D.cod(comps[k]) != G[0][k]:
                return False
        for mm in C.morphisms():
            a, b = oi(C.dom(mm)), oi(C.cod(mm))
            if D.compose(G[1][mi(mm)], comps[a]) != D.compose(comps[b], F[1][mi(mm)]):
                return False
        return True

    def _make_key(self):
        return ("exp", self.base.key, self.exponent.key)

    def show_object(self, o) -> str:
        return "[" + ",".join(self.base.show_object(x) for x in o[0]) + "]"

    def show_morphism(self, m) -> str:
        return "<" + ",".join(self.base.show_morphism(x) for x in m[2]) + ">"

    # structure maps

    def as_functor(self, value) -> Functor:
        return Functor(self.exponent, self.base, value[0], value[1])

    def evaluation(self, at) -> Functor:
        """Evaluate at an object of the exponent."""
        k = self.exponent.object_index(at)
        ev = Functor(self, self.base, lambda F: F[0][k], lambda a: a[2][k],
                     name=f"ev{self.exponent.show_object(at)}")
        ev.evaluates_at = k
        return ev

    def objects_with(self, k: int, value) -> tuple:
        """Objects whose value at the ``k``-th exponent object is ``value``,
        in enumeration order, found without enumerating the rest."""
        if "_objects" in self.__dict__:
            return tuple(F for F in self.objects() if F[0][k] == value)
        cache = self.__dict__.setdefault("_pinned", {})
        key = (k, value)
        if key not in cache:
            pin = {self.exponent.objects()[k]: {value}}
            cache[key] = tuple(F.tables() for F in search_functors(self.exponent, self.base, pin))
        return cache[key]

    def hom(self, a, b) -> tuple:
        if "_morphisms" in self.__dict__:
            return super().hom(a, b)
        cache = self.__dict__.setdefault("_lazy_homs", {})
        if (a, b) not in cache:
            budget = _Budget(f"hom-set of {self.name}")
            cache[(a, b)] = tuple((a, b, c) for c in _nat_components(self.exponent, self.base, a, b, budget))
        return cache[(a, b)]

    def constant(self) -> Functor:
        """``base -> base ** exponent`` sending ``x`` to the constant functor."""
        C, D = self.exponent, self.base
        n, m = len(C.objects()), len(C.morphisms())

        def on_obj(x):
            return ((x,) * n, (D.identity(x),) * m)

        return Functor(D, self, on_obj, lambda f: (on_obj(D.dom(f)), on_obj(D.cod(f)), (f,) * n), name="const")

    def postcompose(self, f: Functor, target: ExponentialCategory | None = None) -> Functor:
        """``f ** exponent``: apply ``f`` pointwise."""
        target = target or ExponentialCategory(f.target, self.exponent)

        def on_obj(F):
            return (tuple(f.obj(x) for x in F[0]), tuple(f.mor(x) for x in F[1]))

        return Functor(self, target, on_obj,
                       lambda a: (on_obj(a[0]), on_obj(a[1]), tuple(f.mor(x) for x in a[2])),
                       name=f"{f.name or 'f'}^{self.exponent.name}")

    def precompose(self, h: Functor, target: ExponentialCategory | None = None) -> Functor:
        """``base ** h`` for ``h: E -> exponent``, landing in ``base ** E``."""
        E = h.source
        target = target or ExponentialCategory(self.base, E)
        C = self.exponent
        oidx = [C.object_index(h.obj(e)) for e in E.objects()]
        midx = [C.morphism_index(h.mor(e)) for e in E.morphisms()]

        def on_obj(F):
            return (tuple(F[0][k] for k in oidx), tuple(F[1][k] for k in midx))

        return Functor(self, target, on_obj,
                       lambda a: (on_obj(a[0]), on_obj(a[1]), tuple(a[2][k] for k in oidx)),
                       name=f"{self.base.name}^{h.name or 'h'}")


def _nat_components(C: Category, D: Category, F, G, budget: _Budget) -> Iterator[tuple]:
    objs = C.objects()
    oi, mi = C.object_index, C.morphism_index
    checks = [[] for _ in objs]
    for m in C.morphisms():
        a, b = oi(C.dom(m)), oi(C.cod(m))
        checks[max(a, b)].append((mi(m), a, b))
    comps: list = [None] * len(objs)

    def rec(k):
        if k == len(objs):
            yield tuple(comps)
            return
        for c in D.hom(F[0][k], G[0][k]):
            budget.spend()
            comps[k] = c
            if all(D.compose(G[1][m], comps[a]) == D.compose(comps[b], F[1][m]) for m, a, b in checks[k]):
                yield from rec(k + 1)
        comps[k] = None

    return rec(0)


def curry(h: Functor, left: Category, right: Category, target: ExponentialCategory | None = None) -> Functor:
    """Transpose ``h: left x right -> D`` (source a :class:`LimitCategory`
    product) into ``left -> D ** right``."""
    D = h.target
    target = target or ExponentialCategory(D, right)
    robjs, rmors = right.objects(), right.morphisms()

    def on_obj(a):
        ida = left.identity(a)
        return (tuple(h.obj((a, b)) for b in robjs), tuple(h.mor((ida, m)) for m in rmors))

    def on_mor(f):
        return (on_obj(left.dom(f)), on_obj(left.cod(f)),
                tuple(h.mor((f, right.identity(b))) for b in robjs))

    return Functor(left, target, on_obj, on_mor, name=f"curry({h.name or 'h'})")


# Functor search ---------------------------------------------------------------

def _search_plan(C: Category):
    """Order non-identity morphisms in enumeration order and group them into
    steps: one free morphism followed by the morphisms whose image is then
    forced as a composite of earlier ones.  Each composition law is attached
    to the step that makes all three of its morphisms known."""
    cached = getattr(C, "_wfslab_search_plan", None)
    if cached is not None:
        return cached
    oi = C.object_index
    idents = {C.identity(o) for o in C.objects()}
    order = [m for m in C.morphisms() if m not in idents]
    pos = {m: k for k, m in enumerate(order)}
    doms = {m: C.dom(m) for m in order}
    cods = {m: C.cod(m) for m in order}
    leaving: dict = {}
    for g in order:
        leaving.setdefault(doms[g], []).append(g)
    composites: dict = {}
    for f in order:
        for g in leaving.get(cods[f], ()):
            composites.setdefault(C.compose(g, f), []).append((g, f))
    step_of: dict = {}
    steps: list = []
    for m in order:
        k = pos[m]
        known = [gf for gf in composites.get(m, ()) if pos[gf[0]] < k and pos[gf[1]] < k]
        if known and steps:
            g, f = known[0]
            steps[-1][1].append((m, g, f))
        else:
            steps.append((m, []))
        step_of[m] = len(steps) - 1
    laws = [[] for _ in steps]
    for h, pairs in composites.items():
        for g, f in pairs:
            laws[max(step_of[g], step_of[f], step_of.get(h, -1))].append((g, f, h))
    ends = [(oi(doms[m]), oi(cods[m])) for m, _ in steps]
    plan = (steps, ends, laws)
    try:
        C._wfslab_search_plan = plan
    except AttributeError:
        pass
    return plan


def search_functors(
    C: Category,
    D: Category,
    obj_allowed: dict | None = None,
    mor_allowed: dict | None = None,
    what: str | None = None,
) -> Iterator[Functor]:
    """Functors ``C -> D`` in lexicographic order of their image indices.

    ``obj_allowed[o]`` / ``mor_allowed[m]`` optionally restrict the image of
    a source object / morphism to a given set.
    """
    budget = _Budget(what or f"functor search {C.name} -> {D.name}")
    objs = C.objects()
    tobjs = D.objects()
    steps, ends, laws = _search_plan(C)
    obj_img: list = [None] * len(objs)
    mor_img: dict = {}
    obj_allowed = obj_allowed or {}
    mor_allowed = mor_allowed or {}
    obj_cands = [[t for t in tobjs if o not in obj_allowed or t in obj_allowed[o]] for o in objs]
    # non-identity morphisms checked for a possible image once both ends are placed
    oi = C.object_index
    reach: list = [[] for _ in objs]
    for m, _ in steps:
        a, b = oi(C.dom(m)), oi(C.cod(m))
        reach[max(a, b)].append((m, a, b))

    def feasible(k) -> bool:
        for m, a, b in reach[k]:
            allowed = mor_allowed.get(m)
            homs = D.hom(obj_img[a], obj_img[b])
            if not any(allowed is None or t in allowed for t in homs):
                return False
        return True

    def image(m):
        if m in mor_img:
            return mor_img[m]
        return D.identity(obj_img[C.object_index(C.dom(m))])

    def emit():
        o_t = tuple(obj_img)
        m_t = tuple(image(m) for m in C.morphisms())
        return Functor(C, D, o_t, m_t)

    def derive(k) -> bool:
        for m, g, f in steps[k][1]:
            t = D.compose(image(g), image(f))
            allowed = mor_allowed.get(m)
            if allowed is not None and t not in allowed:
                return False
            mor_img[m] = t
        return all(image(h) == D.compose(image(g), image(f)) for g, f, h in laws[k])

    def clear(k):
        mor_img.pop(steps[k][0], None)
        for m, _, _ in steps[k][1]:
            mor_img.pop(m, None)

    def rec_mor(k):
        if k == len(steps):
            yield emit()
            return
        m = steps[k][0]
        a, b = ends[k]
        allowed = mor_allowed.get(m)
        for t in D.hom(obj_img[a], obj_img[b]):
            budget.spend()
            if allowed is not None and t not in allowed:
                continue
            mor_img[m] = t
            if derive(k):
                yield from rec_mor(k + 1)
            clear(k)

    def rec_obj(k):
        if k == len(objs):
            # identities must stay allowed
            for o in objs:
                allowed = mor_allowed.get(C.identity(o))
                if allowed is not None and D.identity(obj_img[C.object_index(o)]) not in allowed:
                    return
            yield from rec_mor(0)
            return
        for t in obj_cands[k]:
            budget.spend()
            obj_img[k] = t
            if feasible(k):
                yield from rec_obj(k + 1)

    return rec_obj(0)


def search_maps(A: FinSetObject, B: FinSetObject, allowed: dict | None = None, what: str | None = None) -> Iterator[FinSetMap]:
    """Functions ``A -> B`` in lexicographic order of image indices."""
    budget = _Budget(what or f"map search {A.name} -> {B.name}")
    allowed = allowed or {}
    pools = [[y for y in B.elements if x not in allowed or y in allowed[x]] for x in A.elements]
    for images in itertools.product(*pools):
        budget.spend()
        yield FinSetMap(A, B, images)


# Limit cones ----------------------------------------------------------------

@dataclass
class LimitCone:
    apex: object
    legs: tuple
    kind: str
    ambient: Ambient

    def mediate(self, legs: Sequence, check: bool = True):
        """The unique morphism into the apex with the given leg composites."""
        return self.ambient._mediate(self, tuple(legs), check)


def _show(x) -> str:
    if isinstance(x, tuple):
        return "(" + ",".join(_show(e) for e in x) + ")"
    return str(x)


def show_morphism(m) -> str:
    if isinstance(m, FinSetMap):
        return "[" + ",".join(_show(y) for y in m.images) + "]"
    if m.name:
        return m.name
    objs, _ = m.tables()
    return "<" + ",".join(m.target.show_object(o) for o in objs) + ">"


class Ambient:
    """Interface shared by the two computable ambient categories."""

    name = "?"

    def chain(self, *ms):
        """Right-to-left composite ``ms[0] . ms[1] . ... . ms[-1]``."""
        out = ms[-1]
        for m in reversed(ms[:-1]):
            out = self.compose(m, out)
        return out

    def product(self, x, y) -> LimitCone:
        return self.limit([x, y], [], kind="product")

    def pullback(self, f, g) -> LimitCone:
        if self.cod(f) != self.cod(g):
            raise StructuralError("pullback of morphisms with different codomains")
        return self.limit([self.dom(f), self.dom(g)], [(0, f, 1, g)], kind="pullback")

    def wide_pullback(self, objects: Sequence, constraints: Sequence[tuple]) -> LimitCone:
        """Limit of a finite diagram given by ``objects`` and equations
        ``(i, f, j, g)`` meaning ``f . leg_i == g . leg_j``."""
        for (i, f, j, g) in constraints:
            if self.dom(f) != objects[i] or self.dom(g) != objects[j] or self.cod(f) != self.cod(g):
                raise StructuralError("wide pullback constraint does not match the diagram")
        return self.limit(objects, constraints, kind="wide_pullback")

    def diagonal(self, x):
        cone = self.product(x, x)
        one = self.identity(x)
        return cone.mediate([one, one])

    def to_terminal(self, x):
        raise NotImplementedError

    def is_iso(self, f) -> bool:
        return self.inverse(f) is not None

    def admit(self, x) -> None:
        """Reject objects from outside that exceed the configured size bounds."""
        raise NotImplementedError


class FinSetAmbient(Ambient):
    name = "FinSet"

    def is_object(self, x) -> bool:
        return isinstance(x, FinSetObject)

    def is_morphism(self, m) -> bool:
        return isinstance(m, FinSetMap)

    def dom(self, m):
        return m.dom

    def cod(self, m):
        return m.cod

    def identity(self, x):
        return FinSetMap(x, x, x.elements, name=f"1_{x.name}")

    def compose(self, g, f):
        if f.cod != g.dom:
            raise StructuralError(f"cannot compose {g!r} after {f!r}")
        return FinSetMap(f.dom, g.cod, [g(y) for y in f.images])

    def apply(self, f, x):
        return f(x)

    def size(self, x) -> int:
        return len(x)

    def admit(self, x) -> None:
        b = current_bounds()
        if len(x) > b.max_set_size:
            raise ResourceLimitError(f"set {x.name} has {len(x)} elements", len(x), b.max_set_size)

    def terminal(self):
        return FinSetObject([()], name="1")

    def to_terminal(self, x):
        return FinSetMap(x, self.terminal(), [()] * len(x), name="!")

    def limit(self, objects: Sequence, constraints: Sequence[tuple], kind: str = "limit") -> LimitCone:
        objects = tuple(objects)
        plan = [[] for _ in objects]
        for (i, F, j, G) in constraints:
            if i > j:
                i, F, j, G = j, G, i, F
            plan[j].append((i, F, G))
        budget = _Budget(f"{kind} of sets")
        elems = []
        current: list = [None] * len(objects)

        def rec(k):
            if k == len(objects):
                elems.append(tuple(current))
                return
            for x in objects[k].elements:
                budget.spend()
                if all(F(current[i]) == G(x) for i, F, G in plan[k]):
                    current[k] = x
                    rec(k + 1)

        rec(0)
        apex = FinSetObject(elems, name=f"{kind}(" + ",".join(o.name for o in objects) + ")")
        legs = tuple(FinSetMap(apex, objects[k], [e[k] for e in elems], name=f"pi{k}") for k in range(len(objects)))
        cone = LimitCone(apex, legs, kind, self)
        cone.constraints = tuple(constraints)
        return cone

    def _mediate(self, cone: LimitCone, legs: tuple, check: bool):
        if len(legs) != len(cone.legs):
            raise StructuralError("wrong number of legs for mediator")
        z = legs[0].dom if legs else None
        if z is None:
            raise StructuralError("mediator into a nullary limit needs an explicit domain")
        images = []
        for x in z.elements:
            v = tuple(leg(x) for leg in legs)
            if check and v not in cone.apex:
                raise StructuralError(f"legs do not form a cone at {x!r}")
            images.append(v)
        return FinSetMap(z, cone.apex, images)

    def equalizer(self, f, g) -> LimitCone:
        elems = [x for x in f.dom.elements if f(x) == g(x)]
        apex = FinSetObject(elems, name=f"Eq({f.dom.name})")
        return LimitCone(apex, (FinSetMap(apex, f.dom, elems, name="incl"),), "equalizer", self)

    def hom_enum(self, x, y) -> list:
        self.admit(x)
        self.admit(y)
        count = len(y) ** len(x)
        b = current_bounds()
        if count > b.max_homs:
            raise ResourceLimitError(f"|hom({x.name},{y.name})| = {len(y)}^{len(x)}", count, b.max_homs)
        return list(search_maps(x, y))

    def search(self, x, y, obj_allowed=None, mor_allowed=None, what=None):
        return search_maps(x, y, obj_allowed, what)

    def inverse(self, f):
        if len(f.dom) != len(f.cod) or len(set(f.images)) != len(f.images):
            return None
        back = {y: x for x, y in zip(f.dom.elements, f.images)}
        return FinSetMap(f.cod, f.dom, [back[y] for y in f.cod.elements])

    def elements(self, x):
        return x.elements

    def show(self, x) -> str:
        return x.name


class FinCatAmbient(Ambient):
    name = "FinCat"

    def is_object(self, x) -> bool:
        return isinstance(x, Category)

    def is_morphism(self, m) -> bool:
        return isinstance(m, Functor)

    def dom(self, m):
        return m.source

    def cod(self, m):
        return m.target

    def identity(self, x):
        return identity_functor(x)

    def compose(self, g, f):
        return compose_functors(g, f)

    def size(self, x) -> int:
        return len(x.objects()) + len(x.morphisms())

    def admit(self, x) -> None:
        b = current_bounds()
        n_obj = len(x.objects())
        if n_obj > b.max_objects:
            raise ResourceLimitError(f"category {x.name} has {n_obj} objects", n_obj, b.max_objects)
        n_mor = len(x.morphisms())
        if n_mor > b.max_morphisms:
            raise ResourceLimitError(f"category {x.name} has {n_mor} morphisms", n_mor, b.max_morphisms)

    @cached_property
    def _terminal(self):
        return terminal_cat()

    def terminal(self):
        return self._terminal

    def to_terminal(self, x):
        t = self._terminal
        return Functor(x, t, lambda o: 0, lambda m: 0, name="!")

    def limit(self, objects: Sequence, constraints: Sequence[tuple], kind: str = "limit") -> LimitCone:
        objects = tuple(objects)
        names = {"product": " x ", "pullback": " x_ "}
        apex = LimitCategory(objects, constraints, name=names.get(kind, " x~ ").join(o.name for o in objects))
        legs = tuple(
            Functor(apex, objects[k], (lambda k: lambda o: o[k])(k), (lambda k: lambda m: m[k])(k), name=f"pi{k}")
            for k in range(len(objects))
        )
        cone = LimitCone(apex, legs, kind, self)
        cone.constraints = tuple(constraints)
        return cone

    def _mediate(self, cone: LimitCone, legs: tuple, check: bool):
        if len(legs) != len(cone.legs):
            raise StructuralError("wrong number of legs for mediator")
        z = legs[0].source
        apex = cone.apex
        if isinstance(apex, SubCategory):
            leg = legs[0]
            F = Functor(z, apex, leg.obj, leg.mor)
        else:
            F = Functor(z, apex, lambda o: tuple(leg.obj(o) for leg in legs),
                        lambda m: tuple(leg.mor(m) for leg in legs))
        if isinstance(apex, LimitCategory) and not apex.constraints:
            # a product: any legs with the right targets form a cone
            if any(leg.source != z or leg.target != c for leg, c in zip(legs, apex.factors)):
                raise StructuralError("legs do not form a cone: mismatched ends")
            check = False
        if check:
            for o in z.objects():
                if not apex.has_object(F.obj(o)):
                    raise StructuralError(f"legs do not form a cone at object {z.show_object(o)}")
            for m in z.morphisms():
                v = F.mor(m)
                ok = apex._holds(v, False) if isinstance(apex, LimitCategory) else apex.has_morphism(v)
                if not ok:
                    raise StructuralError(f"legs do not form a cone at morphism {z.show_morphism(m)}")
        return F

    def equalizer(self, f, g) -> LimitCone:
        apex = SubCategory(f, g)
        leg = Functor(apex, f.source, lambda o: o, lambda m: m, name="incl")
        return LimitCone(apex, (leg,), "equalizer", self)

    def hom_enum(self, x, y) -> list:
        self.admit(x)
        self.admit(y)
        return list(search_functors(x, y, what=f"|hom({x.name},{y.name})| enumeration"))

    def search(self, x, y, obj_allowed=None, mor_allowed=None, what=None):
        return search_functors(x, y, obj_allowed, mor_allowed, what)

    def inverse(self, f):
        s, t = f.source, f.target
        if len(s.objects()) != len(t.objects()) or len(s.morphisms()) != len(t.morphisms()):
            return None
        objs, mors = f.tables()
        if len(set(objs)) != len(objs) or len(set(mors)) != len(mors):
            return None
        bo = dict(zip(objs, s.objects()))
        bm = dict(zip(mors, s.morphisms()))
        if set(bo) != set(t.objects()) or set(bm) != set(t.morphisms()):
            return None
        return Functor(t, s, bo, bm, name=f"{f.name or 'f'}^-1")

    def exponential(self, c: Category, d: Category) -> ExponentialCategory:
        """Functor category ``c ** d``."""
        return ExponentialCategory(c, d)

    def elements(self, x):
        return x.objects()

    def show(self, x) -> str:
        return x.name


FINSET = FinSetAmbient()
FINCAT = FinCatAmbient()


def ambient_of(x) -> Ambient:
    """The ambient instance an object or morphism belongs to."""
    if isinstance(x, (FinSetObject, FinSetMap)):
        return FINSET
    if isinstance(x, (Category, Functor)):
        return FINCAT
    raise UnsupportedOperation(f"{x!r} is not an ambient object or morphism")


def exponential_fincat(c, d: Category) -> ExponentialCategory:
    """``c ** d`` in FinCat with its evaluation maps; sets are refused."""
    if not isinstance(c, Category):
        raise UnsupportedOperation("exponentials are only provided for finite categories")
    FINCAT.admit(c)
    FINCAT.admit(d)
    e = ExponentialCategory(c, d)
    e.objects()
    e.morphisms()
    return e


def pullback_identity_iso(amb: Ambient, f):
    """For ``f: X -> Y`` the canonical iso ``X -> X x_Y Y`` of the chosen
    pullback of ``f`` along ``1_Y``, returned with the cone."""
    cone = amb.pullback(f, amb.identity(amb.cod(f)))
    iso = cone.mediate([amb.identity(amb.dom(f)), f])
    return iso, cone
