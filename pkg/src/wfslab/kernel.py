"""Finite categories, functors and natural transformations.

Every category exposes the same small interface (``dom``, ``cod``,
``identity``, ``compose``, ``objects``, ``morphisms``).  Objects and
morphisms are plain hashable values, so derived categories (products,
pullbacks, functor categories) never need to be materialized into tables
unless something enumerates them.  :class:`FinCategory` is the explicit
table-backed kind; its objects and morphisms are dense integer ids.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any


class StructuralError(ValueError):
    """Malformed input data, as opposed to a failed law."""

    def __init__(self, message: str, pair: tuple | None = None):
        super().__init__(message)
        self.pair = pair


class UnknownBuiltinError(LookupError):
    pass


@dataclass(frozen=True)
class Check:
    name: str
    subject: str
    ok: bool
    detail: str = ""


@dataclass
class Report:
    """Itemized outcome of a validation run.

    ``ok`` is true iff no recorded check failed.  ``notes`` carries context
    such as the universe that was quantified over.
    """

    title: str
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def record(self, name: str, subject: Any, ok: bool, detail: str = "") -> bool:
        self.checks.append(Check(name, str(subject), bool(ok), detail))
        return bool(ok)

    def note(self, text: str) -> None:
        self.notes.append(text)

    def extend(self, other: Report, prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.subject, c.ok, c.detail))
        self.notes.extend(other.notes)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def violations(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def count(self, name: str | None = None) -> int:
        return sum(1 for c in self.checks if name is None or c.name == name)

    def summary(self) -> str:
        bad = self.violations
        head = f"{self.title}: {len(self.checks) - len(bad)}/{len(self.checks)} checks passed"
        return "\n".join([head] + [f"  FAIL {c.name} at {c.subject} {c.detail}".rstrip() for c in bad])


class Category:
    """Base class for finite categories with value-level structure."""

    name: str = "C"

    def dom(self, m):
        raise NotImplementedError

    def cod(self, m):
        raise NotImplementedError

    def identity(self, o):
        raise NotImplementedError

    def compose(self, g, f):
        """``g`` after ``f``; the caller guarantees ``cod f == dom g``."""
        raise NotImplementedError

    def _enumerate_objects(self) -> Iterable:
        raise NotImplementedError

    def _enumerate_morphisms(self) -> Iterable:
        raise NotImplementedError

    def _make_key(self) -> Any:
        raise NotImplementedError

    def show_object(self, o) -> str:
        return str(o)

    def show_morphism(self, m) -> str:
        return str(m)

    # derived, cached

    @cached_property
    def _objects(self) -> tuple:
        return tuple(self._enumerate_objects())

    @cached_property
    def _morphisms(self) -> tuple:
        return tuple(self._enumerate_morphisms())

    def objects(self) -> tuple:
        return self._objects

    def morphisms(self) -> tuple:
        return self._morphisms

    @cached_property
    def _object_index(self) -> dict:
        return {o: i for i, o in enumerate(self.objects())}

    @cached_property
    def _morphism_index(self) -> dict:
        return {m: i for i, m in enumerate(self.morphisms())}

    def object_index(self, o) -> int:
        return self._object_index[o]

    def morphism_index(self, m) -> int:
        return self._morphism_index[m]

    def has_object(self, o) -> bool:
        try:
            return o in self._object_index
        except TypeError:
            return False

    def has_morphism(self, m) -> bool:
        try:
            return m in self._morphism_index
        except TypeError:
            return False

    @cached_property
    def _homs(self) -> dict:
        table: dict = {}
        for m in self.morphisms():
            table.setdefault((self.dom(m), self.cod(m)), []).append(m)
        return {k: tuple(v) for k, v in table.items()}

    def hom(self, a, b) -> tuple:
        return self._homs.get((a, b), ())

    def size(self) -> tuple[int, int]:
        return len(self.objects()), len(self.morphisms())

    def is_composable(self, g, f) -> bool:
        return self.cod(f) == self.dom(g)

    def chain(self, *ms):
        """Compose right to left: ``chain(h, g, f) == h . g . f``."""
        out = ms[-1]
        for m in reversed(ms[:-1]):
            out = self.compose(m, out)
        return out

    @cached_property
    def key(self):
        return self._make_key()

    @cached_property
    def _hash(self) -> int:
        return hash(self.key)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Category):
            return NotImplemented
        return self._hash == other._hash and self.key == other.key

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


class FinCategory(Category):
    """Explicit category given by dense tables.

    The constructor does not validate; use :func:`validate_category`.  A
    negative entry in ``table`` means "no composite".
    """

    def __init__(
        self,
        name: str,
        object_labels: Sequence[str],
        morphism_labels: Sequence[str],
        doms: Sequence[int],
        cods: Sequence[int],
        identities: Sequence[int],
        table: Sequence[Sequence[int]],
    ):
        self.name = name
        self.object_labels = tuple(object_labels)
        self.morphism_labels = tuple(morphism_labels)
        self._dom = tuple(doms)
        self._cod = tuple(cods)
        self._ident = tuple(identities)
        self._table = tuple(tuple(row) for row in table)
        if not (len(self._dom) == len(self._cod) == len(self.morphism_labels) == len(self._table)):
            raise StructuralError("morphism tables have inconsistent lengths")
        if len(self._ident) != len(self.object_labels):
            raise StructuralError("identity table length differs from object count")

    @classmethod
    def from_tables(
        cls,
        name: str,
        objects: Sequence[str],
        morphisms: Sequence[tuple[str, str, str]],
        identity: Mapping[str, str],
        compose: Mapping[tuple[str, str], str],
    ) -> FinCategory:
        """Build from labels; ``compose[(g, f)]`` is the label of ``g . f``."""
        oid = {o: i for i, o in enumerate(objects)}
        mid = {m[0]: i for i, m in enumerate(morphisms)}
        if len(oid) != len(objects) or len(mid) != len(morphisms):
            raise StructuralError("duplicate labels")
        n = len(morphisms)
        table = [[-1] * n for _ in range(n)]
        for (g, f), h in compose.items():
            table[mid[g]][mid[f]] = mid[h]
        return cls(
            name,
            objects,
            [m[0] for m in morphisms],
            [oid[m[1]] for m in morphisms],
            [oid[m[2]] for m in morphisms],
            [mid[identity[o]] for o in objects],
            table,
        )

    def dom(self, m):
        return self._dom[m]

    def cod(self, m):
        return self._cod[m]

    def identity(self, o):
        return self._ident[o]

    def compose(self, g, f):
        h = self._table[g][f]
        if h < 0:
            raise StructuralError(f"{self.name}: no composite for ({self.morphism_labels[g]}, {self.morphism_labels[f]})", (g, f))
        return h

    def _enumerate_objects(self):
        return range(len(self.object_labels))

    def _enumerate_morphisms(self):
        return range(len(self.morphism_labels))

    def object_index(self, o) -> int:
        return o

    def morphism_index(self, m) -> int:
        return m

    def has_object(self, o) -> bool:
        return isinstance(o, int) and 0 <= o < len(self.object_labels)

    def has_morphism(self, m) -> bool:
        return isinstance(m, int) and 0 <= m < len(self.morphism_labels)

    def _make_key(self):
        return ("fin", self.object_labels, self.morphism_labels, self._dom, self._cod, self._ident, self._table)

    def show_object(self, o) -> str:
        return self.object_labels[o]

    def show_morphism(self, m) -> str:
        return self.morphism_labels[m]

    def obj(self, label: str) -> int:
        try:
            return self.object_labels.index(label)
        except ValueError:
            raise KeyError(f"{self.name} has no object {label!r}") from None

    def mor(self, label: str) -> int:
        try:
            return self.morphism_labels.index(label)
        except ValueError:
            raise KeyError(f"{self.name} has no morphism {label!r}") from None


# Presentations --------------------------------------------------------------

Path = tuple  # (start object, tuple of generator indices in application order)


def _parse_path(text, gen_index, obj_index):
    """Accept ``"v.u"`` (v after u), ``"id 0"``, or a sequence of labels in
    composition order ``("v", "u")``."""
    if isinstance(text, str):
        text = text.strip()
        if text.startswith("id"):
            rest = text[2:].strip().lstrip("_").strip()
            return ("id", obj_index[rest])
        labels = [t.strip() for t in text.split(".")]
    else:
        labels = list(text)
    return ("gens", tuple(gen_index[lbl] for lbl in reversed(labels)))


def present(
    name: str,
    objects: Sequence[str],
    generators: Sequence[tuple[str, str, str]],
    equations: Sequence[tuple[Any, Any]] = (),
    max_morphisms: int = 256,
) -> FinCategory:
    """Close a finite presentation into a composition table.

    Equalities are found by congruence closure over all typed paths up to a
    growing length bound; the bound stops growing once every path of the
    bound's length is equal to a shorter one and the induced partition is
    stable.  Raises :class:`StructuralError` past ``max_morphisms`` classes.
    """
    oid = {o: i for i, o in enumerate(objects)}
    gid = {g[0]: i for i, g in enumerate(generators)}
    gdom = [oid[g[1]] for g in generators]
    gcod = [oid[g[2]] for g in generators]
    n_obj = len(objects)

    def parse(side):
        kind, val = _parse_path(side, gid, oid)
        if kind == "id":
            return (val, ())
        for a, b in zip(val, val[1:]):
            if gcod[a] != gdom[b]:
                raise StructuralError(f"{name}: ill-typed path {side!r}")
        return (gdom[val[0]], val)

    def end(p):
        return gcod[p[1][-1]] if p[1] else p[0]

    eqs = []
    for lhs, rhs in equations:
        pl, pr = parse(lhs), parse(rhs)
        if pl[0] != pr[0] or end(pl) != end(pr):
            raise StructuralError(f"{name}: equation {lhs!r} = {rhs!r} has mismatched endpoints")
        eqs.append((pl[1], pr[1], pl[0], end(pl)))

    out_of = [[g for g in range(len(generators)) if gdom[g] == o] for o in range(n_obj)]

    def paths_upto(bound):
        levels = [[(o, ()) for o in range(n_obj)]]
        for _ in range(bound):
            nxt = [(p[0], p[1] + (g,)) for p in levels[-1] for g in out_of[end(p)]]
            levels.append(nxt)
        return levels

    def partition(bound):
        levels = paths_upto(bound)
        parent: dict = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for lvl in levels:
            for p in lvl:
                parent[p] = p
        if sum(len(lvl) for lvl in levels) > 50 * max_morphisms * max(1, bound):
            raise StructuralError(f"{name}: presentation too large to close (size cap {max_morphisms})")
        for lvl in levels:
            for p in lvl:
                start, word = p
                # object sitting before position i of the word
                objs = [start] + [gcod[g] for g in word]
                for a, b, s, _t in eqs:
                    for src, dst in ((a, b), (b, a)):
                        k = len(src)
                        for i in range(len(word) - k + 1):
                            if word[i:i + k] != src or objs[i] != s:
                                continue
                            q = (start, word[:i] + dst + word[i + k:])
                            if len(q[1]) <= bound:
                                ra, rb = find(p), find(q)
                                if ra != rb:
                                    parent[max(ra, rb, key=_shortlex)] = min(ra, rb, key=_shortlex)
        return levels, find

    bound = 1
    while True:
        if bound > 4 * max_morphisms + 4:
            raise StructuralError(f"{name}: presentation does not close within the size cap")
        stable = None
        extra = 1
        while True:
            levels, find = partition(bound + extra)
            short = [p for lvl in levels[:bound] for p in lvl]
            classes = {p: find(p) for p in short}
            reducible = all(len(find(p)[1]) < bound for p in levels[bound])
            signature = (reducible, frozenset(_groups(classes)))
            if signature == stable or extra >= 3:
                break
            stable = signature
            extra += 1
        if reducible:
            break
        bound += 1
        if len(set(classes.values())) > max_morphisms:
            raise StructuralError(f"{name}: more than {max_morphisms} morphisms")

    reps = sorted(set(classes.values()), key=lambda p: (p[0] if not p[1] else gdom[p[1][0]], end(p), _shortlex(p)))
    if len(reps) > max_morphisms:
        raise StructuralError(f"{name}: more than {max_morphisms} morphisms")
    rep_id = {r: i for i, r in enumerate(reps)}
    cls_id = {p: rep_id[r] for p, r in classes.items()}
    long_rep = {p: find(p) for p in levels[bound]}

    def reduce(p):
        start, word = p
        while len(word) >= bound:
            head = (start, word[:bound])
            word = long_rep[head][1] + word[bound:]
        return cls_id[(start, word)]

    labels = []
    for r in reps:
        if r[1]:
            labels.append(".".join(generators[g][0] for g in reversed(r[1])))
        else:
            labels.append(f"id_{objects[r[0]]}")
    doms = [r[0] for r in reps]
    cods = [end(r) for r in reps]
    ident = [rep_id[(o, ())] for o in range(n_obj)]
    table = [[-1] * len(reps) for _ in reps]
    for gi, g in enumerate(reps):
        for fi, f in enumerate(reps):
            if cods[fi] == doms[gi]:
                table[gi][fi] = reduce((f[0], f[1] + g[1]))
    return FinCategory(name, objects, labels, doms, cods, ident, table)


def _shortlex(p):
    return (len(p[1]), p[1], p[0])


def _groups(classes: dict):
    groups: dict = {}
    for p, r in classes.items():
        groups.setdefault(r, set()).add(p)
    return [frozenset(g) for g in groups.values()]


# Builtins -------------------------------------------------------------------

def reldiag() -> FinCategory:
    return present(
        "reldiag",
        ["X", "PX"],
        [("eta", "X", "PX"), ("eps0", "PX", "X"), ("eps1", "PX", "X")],
        [("eps0.eta", "id X"), ("eps1.eta", "id X")],
    )


def relfactdiag() -> FinCategory:
    return present(
        "relfactdiag",
        ["X", "M", "Y"],
        [("lam", "X", "M"), ("kap", "M", "X"), ("rho", "M", "Y")],
        [("kap.lam", "id X")],
    )


def factdiag() -> FinCategory:
    return present("factdiag", ["X", "M", "Y"], [("lam", "X", "M"), ("rho", "M", "Y")])


def walking_arrow() -> FinCategory:
    return present("walking_arrow", ["0", "1"], [("a", "0", "1")])


def walking_iso() -> FinCategory:
    return present(
        "walking_iso",
        ["0", "1"],
        [("u", "0", "1"), ("v", "1", "0")],
        [("v.u", "id 0"), ("u.v", "id 1")],
    )


def discrete(n: int) -> FinCategory:
    objs = [str(i) for i in range(n)]
    return FinCategory(f"discrete({n})", objs, [f"id_{o}" for o in objs], range(n), range(n), range(n),
                       [[i if i == j else -1 for j in range(n)] for i in range(n)])


def terminal_cat() -> FinCategory:
    return FinCategory("terminal_cat", ["*"], ["id_*"], [0], [0], [0], [[0]])


def parallel_pair() -> FinCategory:
    return present("parallel_pair", ["0", "1"], [("s", "0", "1"), ("t", "0", "1")])


def commutative_square() -> FinCategory:
    return present(
        "commutative_square",
        ["a", "b", "c", "d"],
        [("f", "a", "b"), ("g", "b", "d"), ("h", "a", "c"), ("k", "c", "d")],
        [("g.f", "k.h")],
    )


def codiscrete(n: int, name: str | None = None) -> FinCategory:
    """Groupoid with exactly one morphism between any two of ``n`` objects."""
    objs = [str(i) for i in range(n)]
    pairs = list(itertools.product(range(n), repeat=2))
    pid = {p: i for i, p in enumerate(pairs)}
    labels = [f"id_{a}" if a == b else f"{a}>{b}" for a, b in pairs]
    table = [[pid[(f[0], g[1])] if f[1] == g[0] else -1 for f in pairs] for g in pairs]
    return FinCategory(name or f"codiscrete({n})", objs, labels, [p[0] for p in pairs], [p[1] for p in pairs],
                       [pid[(i, i)] for i in range(n)], table)


BUILTINS: dict[str, Callable[[], FinCategory]] = {
    "reldiag": reldiag,
    "relfactdiag": relfactdiag,
    "factdiag": factdiag,
    "walking_arrow": walking_arrow,
    "walking_iso": walking_iso,
    "terminal_cat": terminal_cat,
    "parallel_pair": parallel_pair,
    "commutative_square": commutative_square,
}


def builtin(name: str) -> FinCategory:
    """Look up a builtin shape; ``discrete(n)`` takes its size inline."""
    name = name.strip()
    if name.startswith("discrete(") and name.endswith(")"):
        try:
            n = int(name[len("discrete("):-1])
        except ValueError:
            raise UnknownBuiltinError(name) from None
        if n < 0:
            raise UnknownBuiltinError(name)
        return discrete(n)
    try:
        return BUILTINS[name]()
    except KeyError:
        raise UnknownBuiltinError(name) from None


# Functors and natural transformations --------------------------------------

def _as_lookup(spec, index: Callable[[Any], int]) -> Callable:
    if callable(spec):
        return spec
    if isinstance(spec, Mapping):
        return spec.__getitem__
    seq = tuple(spec)
    return lambda x: seq[index(x)]


class Functor:
    """A functor given by rules or tables on objects and morphisms.

    Rules are evaluated lazily and memoized.  Equality compares the full
    tabulation over the source, so the source must be enumerable.
    """

    __slots__ = ("source", "target", "name", "_fo", "_fm", "_omemo", "_mmemo", "_tab", "_hashv", "evaluates_at")

    def __init__(self, source: Category, target: Category, on_objects, on_morphisms, name: str = ""):
        self.source = source
        self.target = target
        self.name = name
        self._fo = _as_lookup(on_objects, source.object_index)
        self._fm = _as_lookup(on_morphisms, source.morphism_index)
        self._omemo: dict = {}
        self._mmemo: dict = {}
        self._tab = None
        self._hashv = None
        # exponent object index when this is an evaluation functor
        self.evaluates_at = None

    def obj(self, o):
        try:
            return self._omemo[o]
        except KeyError:
            v = self._omemo[o] = self._fo(o)
            return v

    def mor(self, m):
        try:
            return self._mmemo[m]
        except KeyError:
            v = self._mmemo[m] = self._fm(m)
            return v

    def tables(self) -> tuple[tuple, tuple]:
        if self._tab is None:
            self._tab = (tuple(self.obj(o) for o in self.source.objects()),
                         tuple(self.mor(m) for m in self.source.morphisms()))
        return self._tab

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Functor):
            return NotImplemented
        if self.source != other.source or self.target != other.target:
            return False
        return self.object_table() == other.object_table() and self.tables() == other.tables()

    def object_table(self) -> tuple:
        if self._tab is not None:
            return self._tab[0]
        return tuple(self.obj(o) for o in self.source.objects())

    def __hash__(self) -> int:
        # object images only: hashing must not enumerate a large source's morphisms
        if self._hashv is None:
            self._hashv = hash((self.source, self.target, self.object_table()))
        return self._hashv

    def __repr__(self) -> str:
        label = self.name or "F"
        return f"<Functor {label}: {self.source.name} -> {self.target.name}>"


def identity_functor(c: Category) -> Functor:
    return Functor(c, c, lambda o: o, lambda m: m, name=f"1_{c.name}")


def compose_functors(g: Functor, f: Functor) -> Functor:
    """``g . f``; endpoints must agree."""
    if f.target != g.source:
        raise StructuralError(f"cannot compose {g!r} after {f!r}")
    return Functor(f.source, g.target, lambda o: g.obj(f.obj(o)), lambda m: g.mor(f.mor(m)),
                   name=f"{g.name or 'G'}.{f.name or 'F'}")


def functor_from_labels(source: FinCategory, target: FinCategory, object_map: Mapping[str, str],
                        morphism_map: Mapping[str, str], name: str = "") -> Functor:
    """Table functor between explicit categories; identities default to identities."""
    omap = tuple(target.obj(object_map[source.object_labels[o]]) for o in source.objects())
    mmap = []
    for m in source.morphisms():
        label = source.morphism_labels[m]
        if label in morphism_map:
            mmap.append(target.mor(morphism_map[label]))
        elif m == source.identity(source.dom(m)):
            mmap.append(target.identity(omap[source.dom(m)]))
        else:
            raise StructuralError(f"functor {name}: no image for {label}")
    return Functor(source, target, omap, tuple(mmap), name=name)


class NatTransformation:
    """Natural transformation ``source => target`` between parallel functors."""

    __slots__ = ("source", "target", "name", "_fc", "_memo")

    def __init__(self, source: Functor, target: Functor, components, name: str = ""):
        if source.source != target.source or source.target != target.target:
            raise StructuralError("natural transformation between non-parallel functors")
        self.source = source
        self.target = target
        self.name = name
        self._fc = _as_lookup(components, source.source.object_index)
        self._memo: dict = {}

    def component(self, o):
        try:
            return self._memo[o]
        except KeyError:
            v = self._memo[o] = self._fc(o)
            return v

    def components(self) -> tuple:
        return tuple(self.component(o) for o in self.source.source.objects())

    def __eq__(self, other) -> bool:
        if not isinstance(other, NatTransformation):
            return NotImplemented
        return self.source == other.source and self.target == other.target and self.components() == other.components()

    def __hash__(self) -> int:
        return hash((self.source, self.target, self.components()))


def whisker_left(alpha: NatTransformation, h: Functor) -> NatTransformation:
    """``alpha h``: precompose both functors with ``h``."""
    return NatTransformation(compose_functors(alpha.source, h), compose_functors(alpha.target, h),
                             lambda o: alpha.component(h.obj(o)))


def whisker_right(k: Functor, alpha: NatTransformation) -> NatTransformation:
    """``k alpha``: postcompose both functors with ``k``."""
    return NatTransformation(compose_functors(k, alpha.source), compose_functors(k, alpha.target),
                             lambda o: k.mor(alpha.component(o)))


# Validation -----------------------------------------------------------------

def _check_tables(c: FinCategory) -> None:
    n = len(c.morphism_labels)
    for o, i in enumerate(c._ident):
        if not 0 <= i < n:
            raise StructuralError(f"{c.name}: identity of {c.object_labels[o]} is not a morphism")
    for g in range(n):
        row = c._table[g]
        if len(row) != n:
            raise StructuralError(f"{c.name}: ragged composition table")
        for f in range(n):
            composable = c._cod[f] == c._dom[g]
            h = row[f]
            if h >= n:
                raise StructuralError(f"{c.name}: composite id {h} out of range", (c.morphism_labels[g], c.morphism_labels[f]))
            if not composable and h >= 0:
                raise StructuralError(
                    f"{c.name}: composite given for non-composable pair "
                    f"({c.morphism_labels[g]}, {c.morphism_labels[f]})",
                    (c.morphism_labels[g], c.morphism_labels[f]),
                )
            if composable and h < 0:
                raise StructuralError(
                    f"{c.name}: composite missing for ({c.morphism_labels[g]}, {c.morphism_labels[f]})",
                    (c.morphism_labels[g], c.morphism_labels[f]),
                )


def validate_category(c: Category) -> Report:
    """Check identity, endpoint and associativity laws exhaustively."""
    if isinstance(c, FinCategory):
        _check_tables(c)
    rep = Report(f"category {c.name}")
    show = c.show_morphism
    for o in c.objects():
        i = c.identity(o)
        rep.record("identity_endpoints", c.show_object(o), c.dom(i) == o and c.cod(i) == o)
    for f in c.morphisms():
        a, b = c.dom(f), c.cod(f)
        rep.record("left_identity", show(f), c.compose(c.identity(b), f) == f)
        rep.record("right_identity", show(f), c.compose(f, c.identity(a)) == f)
    out_of: dict = {}
    for m in c.morphisms():
        out_of.setdefault(c.dom(m), []).append(m)
    typed = {}
    for f in c.morphisms():
        for g in out_of.get(c.cod(f), ()):
            gf = c.compose(g, f)
            ok = c.dom(gf) == c.dom(f) and c.cod(gf) == c.cod(g)
            rep.record("composite_endpoints", f"({show(g)}, {show(f)})", ok)
            typed[(g, f)] = ok
    # associativity only where both bracketings are well typed
    for f in c.morphisms():
        for g in out_of.get(c.cod(f), ()):
            if not typed[(g, f)]:
                continue
            gf = c.compose(g, f)
            for h in out_of.get(c.cod(g), ()):
                if not typed[(h, g)]:
                    continue
                left = c.compose(h, gf)
                right = c.compose(c.compose(h, g), f)
                rep.record("associativity", f"({show(h)}, {show(g)}, {show(f)})", left == right)
    return rep


def validate_functor(F: Functor) -> Report:
    """Check that ``F`` is total and preserves endpoints, identities, composites."""
    s, t = F.source, F.target
    rep = Report(f"functor {F.name or '?'}: {s.name} -> {t.name}")
    for o in s.objects():
        rep.record("object_image", s.show_object(o), t.has_object(F.obj(o)))
    for m in s.morphisms():
        img = F.mor(m)
        label = s.show_morphism(m)
        if not rep.record("morphism_image", label, t.has_morphism(img)):
            continue
        rep.record("domain", label, t.dom(img) == F.obj(s.dom(m)))
        rep.record("codomain", label, t.cod(img) == F.obj(s.cod(m)))
    if not rep.ok:
        return rep
    for o in s.objects():
        rep.record("identity", s.show_object(o), F.mor(s.identity(o)) == t.identity(F.obj(o)))
    for f in s.morphisms():
        for g in s.morphisms():
            if s.dom(g) != s.cod(f):
                continue
            ok = F.mor(s.compose(g, f)) == t.compose(F.mor(g), F.mor(f))
            rep.record("composition", f"({s.show_morphism(g)}, {s.show_morphism(f)})", ok)
    return rep


def validate_nat_trans(alpha: NatTransformation) -> Report:
    F, G = alpha.source, alpha.target
    s, t = F.source, F.target
    rep = Report(f"natural transformation {alpha.name or '?'}")
    for o in s.objects():
        c = alpha.component(o)
        ok = t.has_morphism(c) and t.dom(c) == F.obj(o) and t.cod(c) == G.obj(o)
        rep.record("component_endpoints", s.show_object(o), ok)
    if not rep.ok:
        return rep
    for m in s.morphisms():
        a, b = s.dom(m), s.cod(m)
        ok = t.compose(G.mor(m), alpha.component(a)) == t.compose(alpha.component(b), F.mor(m))
        rep.record("naturality", s.show_morphism(m), ok)
    return rep
