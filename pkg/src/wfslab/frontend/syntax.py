"""The ``.cat`` document language: lexer, parser, document model, serializer.

A document is a sequence of keyword-introduced blocks::

    category J { objects 0 1; mor u: 0 -> 1; mor v: 1 -> 0; eq v.u = id 0; eq u.v = id 1; }
    relation R { paths J 0 1; }
    witness W { relation R; builtin walking_iso; }
    universe U { ambient fincat; seeds terminal_cat walking_arrow J; depth 1; }
    task strict { run check-strict-mrs; relation R; witness W; universe U; }

Every name must be declared before it is referenced.  Positions are kept on
the model for diagnostics but do not take part in equality, so
``parse(serialize(doc)) == doc`` compares structure only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator

from ..kernel import UnknownBuiltinError, builtin

BLOCK_KINDS = ("category", "functor", "relation", "witness", "universe", "task")

TASK_KINDS = ("check-mrs", "check-strict-mrs", "check-idpres", "check-tt", "factorize",
              "lift", "extract-mrs", "roundtrip", "equiv", "check-pi")

RELATION_BUILTINS = {"identity": None, "walking_iso": "fincat", "fold": "finset"}
AMBIENTS = ("finset", "fincat")
WITNESS_BUILTINS = ("identity", "walking_iso")
# component name -> allowed replacement rules, in canonical order
WITNESS_COMPONENTS = {
    "mu": ("first", "second"),
    "delta": ("constant",),
    "iota": ("identity",),
}
# task option -> kind of value
TASK_OPTIONS = {
    "relation": "relation", "witness": "witness", "universe": "universe",
    "morphism": "functor", "left": "functor", "right": "functor", "top": "functor", "bottom": "functor",
    "limit": "number", "max-set-size": "number", "max-objects": "number",
    "max-morphisms": "number", "max-homs": "number",
}
LIFT_SIDES = ("left", "right", "top", "bottom")


# Diagnostics -------------------------------------------------------------------------

@dataclass(frozen=True)
class Position:
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class DocumentError(ValueError):
    """A positioned problem with a document."""

    kind = "error"

    def __init__(self, message: str, pos: Position | None, expected: frozenset = frozenset()):
        self.message = message
        self.pos = pos
        self.expected = frozenset(expected)
        where = f"{pos}: " if pos else ""
        tail = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{where}{self.kind}: {message}{tail}")

    @property
    def line(self) -> int | None:
        return self.pos.line if self.pos else None

    @property
    def column(self) -> int | None:
        return self.pos.column if self.pos else None


class LexError(DocumentError):
    kind = "lexical error"


class ParseError(DocumentError):
    kind = "syntax error"


class ResolutionError(DocumentError):
    kind = "resolution error"


# Lexer ----------------------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # "word", a punctuation string, or "eof"
    text: str
    pos: Position


_WORD = re.compile(r"[A-Za-z0-9_'*]+(?:-[A-Za-z0-9_'*]+)*")
_PUNCT = ("->", "{", "}", ";", ":", ".", "=")


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    line, col, i, n = 1, 1, 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if c in " \t\r":
            i, col = i + 1, col + 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        m = _WORD.match(text, i)
        if m:
            out.append(Token("word", m.group(), Position(line, col)))
            col += m.end() - i
            i = m.end()
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                out.append(Token(p, p, Position(line, col)))
                i, col = i + len(p), col + len(p)
                break
        else:
            raise LexError(f"unexpected character {c!r}", Position(line, col))
    out.append(Token("eof", "", Position(line, col)))
    return out


# Document model ----------------------------------------------------------------------------

def _pos():
    return field(default=None, compare=False, repr=False)


@dataclass
class CategoryDecl:
    name: str
    builtin: str | None = None
    objects: tuple = ()
    morphisms: tuple = ()  # (label, source, target)
    equations: tuple = ()  # (lhs, rhs) path strings such as "v.u" or "id 0"
    pos: Position | None = _pos()
    kind = "category"


@dataclass
class FunctorDecl:
    name: str
    source: str
    target: str
    object_map: tuple = ()  # (source label, target label)
    morphism_map: tuple = ()
    pos: Position | None = _pos()
    kind = "functor"


@dataclass
class RelationDecl:
    name: str
    builtin: str | None = None
    ambient: str | None = None
    paths: tuple | None = None  # (category, start object, end object)
    swap: bool = False
    pos: Position | None = _pos()
    kind = "relation"


@dataclass
class WitnessDecl:
    name: str
    relation: str
    builtin: str
    components: tuple = ()  # (component, rule) in WITNESS_COMPONENTS order
    pos: Position | None = _pos()
    kind = "witness"


@dataclass
class UniverseDecl:
    name: str
    ambient: str
    seeds: tuple
    depth: int = 1
    pos: Position | None = _pos()
    kind = "universe"


@dataclass
class TaskDecl:
    name: str
    run: str
    options: tuple = ()  # (key, value) in TASK_OPTIONS order
    pos: Position | None = _pos()
    kind = "task"

    def option(self, key: str, default=None):
        return dict(self.options).get(key, default)


Declaration = CategoryDecl | FunctorDecl | RelationDecl | WitnessDecl | UniverseDecl | TaskDecl


def _sort_key(d) -> tuple:
    return (BLOCK_KINDS.index(d.kind), d.name)


@dataclass
class SpecDocument:
    """Declarations in canonical order (block kind, then name)."""

    declarations: tuple = ()

    def __post_init__(self):
        self.declarations = tuple(sorted(self.declarations, key=_sort_key))

    def get(self, name: str, kind: str | None = None):
        for d in self.declarations:
            if d.name == name and (kind is None or d.kind == kind):
                return d
        return None

    def of_kind(self, kind: str) -> list:
        return [d for d in self.declarations if d.kind == kind]

    @property
    def tasks(self) -> list[TaskDecl]:
        return self.of_kind("task")


# Parser -----------------------------------------------------------------------------

def _builtin_category(name: str):
    try:
        return builtin(name)
    except UnknownBuiltinError:
        return None


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        # name -> declaration, in source order, for before-use resolution
        self.scope: dict[str, object] = {}

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def fail(self, message: str, expected) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        return ParseError(f"{message}, found {found}", t.pos, frozenset(expected))

    def expect(self, kind: str, what: str | None = None) -> Token:
        if self.tok.kind != kind:
            label = what or ("identifier" if kind == "word" else repr(kind))
            raise self.fail(f"expected {label}", {label})
        return self.advance()

    def word(self, what: str = "identifier") -> Token:
        return self.expect("word", what)

    def keyword(self, allowed) -> Token:
        if self.tok.kind != "word" or self.tok.text not in allowed:
            raise self.fail("unexpected token", set(allowed))
        return self.advance()

    def number(self, what: str = "number") -> int:
        t = self.tok
        if t.kind != "word" or not t.text.isdigit():
            raise self.fail(f"expected {what}", {what})
        self.advance()
        return int(t.text)

    def words_until_semicolon(self) -> list[Token]:
        out = []
        while self.tok.kind == "word":
            out.append(self.advance())
        self.expect(";")
        return out

    # document

    def document(self) -> SpecDocument:
        decls = []
        while self.tok.kind != "eof":
            head = self.keyword(BLOCK_KINDS)
            decl = getattr(self, f"block_{head.text}")(head.pos)
            decls.append(decl)
        return SpecDocument(tuple(decls))

    def declare(self, name_tok: Token, decl) -> None:
        if name_tok.text in self.scope:
            prev = self.scope[name_tok.text]
            raise ResolutionError(f"duplicate name {name_tok.text!r} (first declared as a {prev.kind} at {prev.pos})",
                                  name_tok.pos)
        self.scope[name_tok.text] = decl

    def resolve(self, tok: Token, kind: str):
        d = self.scope.get(tok.text)
        if d is None:
            if kind == "category":
                c = _builtin_category(tok.text)
                if c is not None:
                    return c
            raise ResolutionError(f"undeclared {kind} {tok.text!r}", tok.pos)
        if d.kind != kind:
            raise ResolutionError(f"{tok.text!r} is a {d.kind}, not a {kind}", tok.pos)
        return d

    def statements(self, allowed):
        """Yield ``(keyword token)`` for each statement until ``}``; the caller
        consumes the statement body."""
        self.expect("{")
        seen: set = set()
        while self.tok.kind != "}":
            kw = self.keyword(allowed)
            if kw.text in seen and kw.text in _SINGLE:
                raise ParseError(f"repeated statement {kw.text!r}", kw.pos)
            seen.add(kw.text)
            yield kw
        self.advance()

    # categories

    def category_labels(self, decl) -> tuple[set, set]:
        if isinstance(decl, CategoryDecl):
            if decl.builtin is not None:
                c = builtin(decl.builtin)
                return set(c.object_labels), set(c.morphism_labels)
            return set(decl.objects), {m[0] for m in decl.morphisms}
        return set(decl.object_labels), set(decl.morphism_labels)

    def path(self, objects: set, generators: dict) -> tuple[str, Token]:
        start = self.tok
        first = self.word("morphism label or 'id'")
        if first.text == "id":
            o = self.word("object label")
            if o.text not in objects:
                raise ResolutionError(f"undeclared object {o.text!r}", o.pos)
            return f"id {o.text}", start
        labels = [first]
        while self.tok.kind == ".":
            self.advance()
            labels.append(self.word("morphism label"))
        for t in labels:
            if t.text not in generators:
                raise ResolutionError(f"undeclared morphism {t.text!r}", t.pos)
        for g, f in zip(labels, labels[1:]):
            if generators[g.text][0] != generators[f.text][1]:
                raise ResolutionError(f"{g.text} cannot follow {f.text}", g.pos)
        return ".".join(t.text for t in labels), start

    def block_category(self, pos: Position) -> CategoryDecl:
        name = self.word("category name")
        decl = CategoryDecl(name.text, pos=pos)
        objects: list[str] = []
        mors: list[tuple] = []
        eqs: list[tuple] = []
        gens: dict = {}
        for kw in self.statements(("builtin", "objects", "mor", "eq")):
            if kw.text == "builtin":
                t = self.word("builtin category name")
                if _builtin_category(t.text) is None:
                    raise ResolutionError(f"unknown builtin category {t.text!r}", t.pos)
                decl.builtin = t.text
                self.expect(";")
            elif kw.text == "objects":
                for t in self.words_until_semicolon():
                    if t.text in objects:
                        raise ResolutionError(f"duplicate object {t.text!r}", t.pos)
                    objects.append(t.text)
            elif kw.text == "mor":
                label = self.word("morphism label")
                if label.text in gens or label.text == "id":
                    raise ResolutionError(f"duplicate or reserved morphism label {label.text!r}", label.pos)
                self.expect(":")
                src = self.word("object label")
                self.expect("->")
                dst = self.word("object label")
                self.expect(";")
                for t in (src, dst):
                    if t.text not in objects:
                        raise ResolutionError(f"undeclared object {t.text!r}", t.pos)
                gens[label.text] = (src.text, dst.text)
                mors.append((label.text, src.text, dst.text))
            else:
                lhs, _ = self.path(set(objects), gens)
                self.expect("=")
                rhs, _ = self.path(set(objects), gens)
                self.expect(";")
                eqs.append((lhs, rhs))
        if decl.builtin is not None and (objects or mors or eqs):
            raise ParseError("a builtin category takes no objects, morphisms or equations", pos)
        if decl.builtin is None and not objects:
            raise ParseError(f"category {name.text} declares no objects", pos)
        decl.objects, decl.morphisms, decl.equations = tuple(objects), tuple(mors), tuple(eqs)
        self.declare(name, decl)
        return decl

    def block_functor(self, pos: Position) -> FunctorDecl:
        name = self.word("functor name")
        self.expect(":")
        src_t = self.word("category name")
        self.expect("->")
        dst_t = self.word("category name")
        src_o, src_m = self.category_labels(self.resolve(src_t, "category"))
        dst_o, dst_m = self.category_labels(self.resolve(dst_t, "category"))
        omap: dict = {}
        mmap: dict = {}
        for kw in self.statements(("obj", "mor")):
            a = self.word("source label")
            self.expect("->")
            b = self.word("target label")
            self.expect(";")
            table, dom, cod = (omap, src_o, dst_o) if kw.text == "obj" else (mmap, src_m, dst_m)
            what = "object" if kw.text == "obj" else "morphism"
            if a.text not in dom:
                raise ResolutionError(f"{src_t.text} has no {what} {a.text!r}", a.pos)
            if b.text not in cod:
                raise ResolutionError(f"{dst_t.text} has no {what} {b.text!r}", b.pos)
            if a.text in table:
                raise ResolutionError(f"{what} {a.text!r} mapped twice", a.pos)
            table[a.text] = b.text
        missing = sorted(src_o - set(omap))
        if missing:
            raise ResolutionError(f"functor {name.text} gives no image for object {missing[0]!r}", pos)
        decl = FunctorDecl(name.text, src_t.text, dst_t.text, tuple(omap.items()), tuple(mmap.items()), pos=pos)
        self.declare(name, decl)
        return decl

    def block_relation(self, pos: Position) -> RelationDecl:
        name = self.word("relation name")
        decl = RelationDecl(name.text, pos=pos)
        for kw in self.statements(("builtin", "ambient", "paths", "swap")):
            if kw.text == "builtin":
                t = self.keyword(RELATION_BUILTINS)
                decl.builtin = t.text
            elif kw.text == "ambient":
                decl.ambient = self.keyword(AMBIENTS).text
            elif kw.text == "paths":
                cat_t = self.word("category name")
                objs, _ = self.category_labels(self.resolve(cat_t, "category"))
                ends = [self.word("object label"), self.word("object label")]
                for t in ends:
                    if t.text not in objs:
                        raise ResolutionError(f"{cat_t.text} has no object {t.text!r}", t.pos)
                decl.paths = (cat_t.text, ends[0].text, ends[1].text)
            else:
                decl.swap = True
            self.expect(";")
        if (decl.builtin is None) == (decl.paths is None):
            raise ParseError(f"relation {name.text} needs exactly one of 'builtin' or 'paths'", pos)
        implied = "fincat" if decl.paths else RELATION_BUILTINS[decl.builtin]
        if decl.ambient is None and implied is None:
            raise ParseError(f"relation {name.text} needs an 'ambient' statement", pos)
        if decl.ambient is not None and implied is not None and decl.ambient != implied:
            raise ParseError(f"relation {name.text} lives in {implied}, not {decl.ambient}", pos)
        if implied is not None:
            decl.ambient = implied
        self.declare(name, decl)
        return decl

    def block_witness(self, pos: Position) -> WitnessDecl:
        name = self.word("witness name")
        rel = kind = None
        comps: dict = {}
        for kw in self.statements(("relation", "builtin") + tuple(WITNESS_COMPONENTS)):
            if kw.text == "relation":
                t = self.word("relation name")
                self.resolve(t, "relation")
                rel = t.text
            elif kw.text == "builtin":
                kind = self.keyword(WITNESS_BUILTINS).text
            else:
                comps[kw.text] = self.keyword(WITNESS_COMPONENTS[kw.text]).text
            self.expect(";")
        if rel is None or kind is None:
            raise ParseError(f"witness {name.text} needs 'relation' and 'builtin' statements", pos)
        ordered = tuple((c, comps[c]) for c in WITNESS_COMPONENTS if c in comps)
        decl = WitnessDecl(name.text, rel, kind, ordered, pos=pos)
        self.declare(name, decl)
        return decl

    def block_universe(self, pos: Position) -> UniverseDecl:
        name = self.word("universe name")
        amb = None
        seeds: list[str] = []
        depth = 1
        seed_toks: list[Token] = []
        for kw in self.statements(("ambient", "seeds", "depth")):
            if kw.text == "ambient":
                amb = self.keyword(AMBIENTS).text
                self.expect(";")
            elif kw.text == "seeds":
                seed_toks = self.words_until_semicolon()
            else:
                depth = self.number("closure depth")
                if depth < 1:
                    raise ParseError("closure depth must be at least 1", kw.pos)
                self.expect(";")
        if amb is None:
            raise ParseError(f"universe {name.text} needs an 'ambient' statement", pos)
        if not seed_toks:
            raise ParseError(f"universe {name.text} needs at least one seed", pos)
        for t in seed_toks:
            if amb == "finset":
                if not t.text.isdigit():
                    raise ResolutionError(f"finset seeds are set sizes, not {t.text!r}", t.pos)
            else:
                self.resolve(t, "category")
            seeds.append(t.text)
        decl = UniverseDecl(name.text, amb, tuple(seeds), depth, pos=pos)
        self.declare(name, decl)
        return decl

    def block_task(self, pos: Position) -> TaskDecl:
        name = self.word("task name")
        run = None
        opts: dict = {}
        for kw in self.statements(("run",) + tuple(TASK_OPTIONS)):
            if kw.text == "run":
                run = self.keyword(TASK_KINDS).text
            else:
                kind = TASK_OPTIONS[kw.text]
                if kind == "number":
                    opts[kw.text] = self.number()
                else:
                    t = self.word(f"{kind} name")
                    self.resolve(t, kind)
                    opts[kw.text] = t.text
            self.expect(";")
        if run is None:
            raise ParseError(f"task {name.text} needs a 'run' statement", pos)
        for key in ("relation", "universe"):
            if key not in opts:
                raise ParseError(f"task {name.text} needs a '{key}' statement", pos)
        if run in ("check-mrs", "check-strict-mrs") and "witness" not in opts:
            raise ParseError(f"task {name.text} needs a 'witness' statement", pos)
        sides = [s for s in LIFT_SIDES if s in opts]
        if sides and (run != "lift" or len(sides) != 4):
            raise ParseError("a lifting problem needs all of left, right, top, bottom in a lift task", pos)
        self._check_ambients(name.text, opts, pos)
        ordered = tuple((k, opts[k]) for k in TASK_OPTIONS if k in opts)
        decl = TaskDecl(name.text, run, ordered, pos=pos)
        self.declare(name, decl)
        return decl

    def _check_ambients(self, task: str, opts: dict, pos: Position) -> None:
        rel = self.scope[opts["relation"]]
        uni = self.scope[opts["universe"]]
        if rel.ambient != uni.ambient:
            raise ResolutionError(f"task {task}: relation {rel.name} lives in {rel.ambient} "
                                  f"but universe {uni.name} in {uni.ambient}", pos)
        if "witness" in opts and self.scope[opts["witness"]].relation != rel.name:
            raise ResolutionError(f"task {task}: witness {opts['witness']} is for another relation", pos)


# statements that may appear at most once per block
_SINGLE = {"builtin", "objects", "ambient", "paths", "swap", "relation", "run", "seeds", "depth",
           *WITNESS_COMPONENTS, *TASK_OPTIONS}


def parse(text: str) -> SpecDocument:
    """Parse and resolve a document; raises a :class:`DocumentError`."""
    return _Parser(text).document()


# Serializer -------------------------------------------------------------------------------

INDENT = "  "


def _lines(d) -> Iterator[str]:
    if isinstance(d, CategoryDecl):
        if d.builtin is not None:
            yield f"builtin {d.builtin};"
        if d.objects:
            yield "objects " + " ".join(d.objects) + ";"
        for label, s, t in d.morphisms:
            yield f"mor {label}: {s} -> {t};"
        for lhs, rhs in d.equations:
            yield f"eq {lhs} = {rhs};"
    elif isinstance(d, FunctorDecl):
        for a, b in d.object_map:
            yield f"obj {a} -> {b};"
        for a, b in d.morphism_map:
            yield f"mor {a} -> {b};"
    elif isinstance(d, RelationDecl):
        if d.builtin is not None:
            yield f"builtin {d.builtin};"
        else:
            yield "paths " + " ".join(d.paths) + ";"
        yield f"ambient {d.ambient};"
        if d.swap:
            yield "swap;"
    elif isinstance(d, WitnessDecl):
        yield f"relation {d.relation};"
        yield f"builtin {d.builtin};"
        for c, rule in d.components:
            yield f"{c} {rule};"
    elif isinstance(d, UniverseDecl):
        yield f"ambient {d.ambient};"
        yield "seeds " + " ".join(d.seeds) + ";"
        yield f"depth {d.depth};"
    else:
        yield f"run {d.run};"
        for k, v in d.options:
            yield f"{k} {v};"


def _header(d) -> str:
    if isinstance(d, FunctorDecl):
        return f"functor {d.name}: {d.source} -> {d.target}"
    return f"{d.kind} {d.name}"


def serialize(doc: SpecDocument) -> str:
    """Canonical text: blocks sorted by kind then name, one statement per line."""
    blocks = []
    for d in doc.declarations:
        body = "".join(f"{INDENT}{line}\n" for line in _lines(d))
        blocks.append(f"{_header(d)} {{\n{body}}}\n")
    return "\n".join(blocks)
