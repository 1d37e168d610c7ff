"""Inclusion hierarchy, reference schemas and static checking.

A declaration ``T in P`` places T inside concept P.  Values of type T are then
represented by the reference classes of P and its ancestors: the *reference
schema* of T lists one segment per ancestor concept with a nonempty reference
class, outermost first.  Types with an empty schema are represented directly
by object-table handles, exactly as in ordinary OOP.

Static types used by the checker are plain strings:

* ``int``, ``long``, ``double``, ``String``, ``bool`` (conditions only), ``void``
* ``Root``, ``Storage``, ``Map``
* a declared name ``T`` (a reference when T has a nonempty schema, a handle otherwise)
* ``&T`` for a handle known to point at a T object (``context``, ``new T()``)
* ``?`` for values whose type is only known at run time (members reached through ``Root``)
"""

from __future__ import annotations

from dataclasses import dataclass, field

from copl.errors import CheckError, Diagnostic
from copl.nodes import (
    Assign, Binary, Block, Call, ClassBody, ClassDecl, ConceptDecl, ContextExpr,
    CreateInit, ExprStmt, FieldAccess, If, IncDec, Literal, Loc, MethodDecl, Name,
    New, Program, RefConstruct, Return, Unary, VarDecl,
)

NUMERIC = ("int", "long", "double")
PRIMITIVES = frozenset({"int", "long", "double", "String"})
BUILTIN_TYPES = frozenset({"Root", "Storage", "Map"})
UNKNOWN = "?"

# name -> (parameter types, return type)
BUILTIN_METHODS = {
    "Storage": {
        "store": (("long", "Root"), "void"),
        "load": (("long",), "Root"),
        "open": ((), "void"),
        "close": ((), "void"),
    },
    "Map": {
        "put": (("String", "Root"), "void"),
        "get": (("String",), "Root"),
    },
}


# -- hierarchy

@dataclass
class HierarchyNode:
    decl: ConceptDecl | ClassDecl
    parent: "HierarchyNode | None"  # None means TOP

    @property
    def name(self) -> str:
        return self.decl.name


@dataclass
class ConceptHierarchy:
    nodes: dict[str, HierarchyNode]

    def __contains__(self, name: str) -> bool:
        return name in self.nodes

    def decl(self, name: str):
        return self.nodes[name].decl

    def parent(self, name: str) -> str | None:
        node = self.nodes[name].parent
        return None if node is None else node.name

    def ancestors(self, name: str) -> list[str]:
        """Ancestor names, nearest first."""
        out = []
        node = self.nodes[name].parent
        while node is not None:
            out.append(node.name)
            node = node.parent
        return out

    def topmost(self) -> list[str]:
        return [n for n, node in self.nodes.items() if node.parent is None]


def build_hierarchy(program: Program) -> ConceptHierarchy:
    diags: list[Diagnostic] = []
    decls: dict[str, ConceptDecl | ClassDecl] = {}
    for d in program.decls:
        if d.name in decls:
            diags.append(Diagnostic(d.loc.line, d.loc.column, f"duplicate declaration '{d.name}'"))
        elif d.name in PRIMITIVES or d.name in BUILTIN_TYPES or d.name in ("void", "bool"):
            diags.append(Diagnostic(d.loc.line, d.loc.column, f"'{d.name}' is a built-in type name"))
        else:
            decls[d.name] = d

    nodes = {name: HierarchyNode(d, None) for name, d in decls.items()}
    for name, d in decls.items():
        if d.parent is None:
            continue
        parent = decls.get(d.parent)
        if parent is None:
            diags.append(Diagnostic(d.loc.line, d.loc.column, f"unknown parent '{d.parent}' of '{name}'"))
        elif isinstance(parent, ClassDecl):
            diags.append(Diagnostic(d.loc.line, d.loc.column,
                                    f"'{name}' is included in class '{d.parent}'; only concepts can be parents"))
        else:
            nodes[name].parent = nodes[d.parent]

    reported: set[str] = set()
    for name in decls:
        path, node = [], nodes[name]
        while node is not None and node.name not in path:
            path.append(node.name)
            node = node.parent
        if node is None or node.name in reported:
            continue
        cycle = path[path.index(node.name):]
        reported.update(cycle)
        d = decls[cycle[0]]
        diags.append(Diagnostic(d.loc.line, d.loc.column,
                                "inclusion cycle: " + " -> ".join(cycle + [cycle[0]])))
        for n in cycle:
            nodes[n].parent = None

    if diags:
        raise CheckError(diags)
    return ConceptHierarchy(nodes)


# -- reference schemas

@dataclass(frozen=True)
class SchemaSegment:
    concept: str
    fields: tuple[tuple[str, str], ...]  # (name, type) in declaration order


@dataclass(frozen=True)
class ReferenceSchema:
    segments: tuple[SchemaSegment, ...] = ()

    def __len__(self) -> int:
        return len(self.segments)

    @property
    def flattened(self) -> list[tuple[str, str]]:
        return [f for seg in self.segments for f in seg.fields]


def compute_reference_schema(type_name: str, h: ConceptHierarchy) -> ReferenceSchema:
    if type_name not in h:
        raise KeyError(f"unknown type '{type_name}'")
    segments: list[SchemaSegment] = []
    for name in reversed(h.ancestors(type_name)):
        ref = h.decl(name).reference_class
        if not ref.is_empty:
            segments.append(SchemaSegment(name, tuple((f.name, f.type_name) for f in ref.fields)))
    return ReferenceSchema(tuple(segments))


# -- checking

@dataclass(frozen=True)
class CheckedProgram:
    program: Program
    hierarchy: ConceptHierarchy = field(compare=False)
    schemas: dict[str, ReferenceSchema] = field(compare=False)
    entry: MethodDecl = field(compare=False)
    # (declaration, "class" | "reference", method) -> local name -> static type
    symbols: dict[tuple[str, str, str], dict[str, str]] = field(compare=False, default_factory=dict)
    # ids of Call nodes of the form ``r.continue()`` with r of type Root
    continue_calls: frozenset[int] = field(compare=False, default=frozenset())

    def decl(self, name: str):
        return self.hierarchy.decl(name)

    def is_reference_type(self, name: str) -> bool:
        return name in self.schemas and len(self.schemas[name]) > 0


@dataclass
class _Scope:
    decl: ConceptDecl | ClassDecl
    section: str  # "class" | "reference"
    method: MethodDecl
    frames: list[dict[str, str]]
    symbols: dict[str, str]

    @property
    def body(self) -> ClassBody:
        return self.decl.reference_class if self.section == "reference" else self.decl.object_class

    def lookup(self, name: str) -> str | None:
        for frame in reversed(self.frames):
            if name in frame:
                return frame[name]
        return None


class Checker:
    def __init__(self, program: Program, hierarchy: ConceptHierarchy):
        self.program = program
        self.h = hierarchy
        self.schemas = {name: compute_reference_schema(name, hierarchy) for name in hierarchy.nodes}
        self.diags: list[Diagnostic] = []
        self.symbols: dict[tuple[str, str, str], dict[str, str]] = {}
        self.continue_calls: set[int] = set()

    def error(self, loc: Loc, message: str) -> str:
        self.diags.append(Diagnostic(loc.line, loc.column, message))
        return UNKNOWN

    # -- type relations

    def known_type(self, t: str) -> bool:
        return t in PRIMITIVES or t in BUILTIN_TYPES or t in self.h

    def is_reference(self, t: str) -> bool:
        return t in self.schemas and len(self.schemas[t]) > 0

    def is_handle(self, t: str) -> bool:
        return t.startswith("&") or (t in self.schemas and not self.is_reference(t))

    def assignable(self, src: str, dst: str) -> bool:
        if src == dst or UNKNOWN in (src, dst):
            return True
        if src in NUMERIC and dst in NUMERIC:
            return NUMERIC.index(src) <= NUMERIC.index(dst)
        if dst == "Root":
            return self.is_handle(src)
        if src.startswith("&"):
            return src[1:] == dst and not self.is_reference(dst)
        return False

    # -- declarations

    def check(self) -> CheckedProgram:
        for d in self.program.decls:
            self.check_decl(d)
        entry = self.find_entry()
        if self.diags:
            raise CheckError(sorted(self.diags, key=lambda d: (d.line, d.column)))
        return CheckedProgram(self.program, self.h, self.schemas, entry, self.symbols,
                              frozenset(self.continue_calls))

    def find_entry(self) -> MethodDecl | None:
        main = self.program.decl("Main")
        if not isinstance(main, ClassDecl) or main.parent is not None:
            self.error(Loc(1, 1), "missing entry point: expected 'class Main { void main() { ... } }' declared under TOP")
            return None
        m = main.body.method("main")
        if m is None or m.params or m.return_type != "void":
            self.error(main.loc, "class Main must declare 'void main()'")
            return None
        return m

    def check_decl(self, d) -> None:
        sections = [("class", d.object_class)]
        if isinstance(d, ConceptDecl):
            sections.append(("reference", d.reference_class))
            if not d.reference_class.is_empty and d.reference_class.method("continue") is None:
                self.error(d.loc, f"concept '{d.name}' has a reference class but no 'continue' method")
        for section, body in sections:
            for f in body.fields:
                if not self.known_type(f.type_name):
                    self.error(f.loc, f"unknown type '{f.type_name}'")
                    continue
                if section == "reference":
                    if f.static:
                        self.error(f.loc, "reference classes cannot have static fields")
                    if f.init is not None:
                        self.error(f.loc, "reference fields cannot have initializers")
                    continue
                if isinstance(f.init, CreateInit):
                    if f.type_name not in ("Storage", "Map"):
                        self.error(f.loc, f"'.create()' needs a built-in type, not '{f.type_name}'")
                elif f.init is not None and not self.assignable(f.init.kind, f.type_name):
                    self.error(f.loc, f"cannot initialize {f.type_name} field '{f.name}' with {f.init.kind}")
            for m in body.methods:
                self.check_method(d, section, m)

    def check_method(self, d, section: str, m: MethodDecl) -> None:
        if m.return_type != "void" and not self.known_type(m.return_type):
            self.error(m.loc, f"unknown type '{m.return_type}'")
        params: dict[str, str] = {}
        for p in m.params:
            if not self.known_type(p.type_name):
                self.error(p.loc, f"unknown type '{p.type_name}'")
            if p.name in params:
                self.error(p.loc, f"duplicate parameter '{p.name}'")
            params[p.name] = p.type_name
        scope = _Scope(d, section, m, [params], dict(params))
        self.block(m.body, scope)
        self.symbols[(d.name, section, m.name)] = scope.symbols

    # -- statements

    def block(self, b: Block, scope: _Scope) -> None:
        scope.frames.append({})
        for s in b.stmts:
            self.stmt(s, scope)
        scope.frames.pop()

    def stmt(self, s, scope: _Scope) -> None:
        if isinstance(s, Block):
            self.block(s, scope)
        elif isinstance(s, VarDecl):
            if not self.known_type(s.type_name):
                self.error(s.loc, f"unknown type '{s.type_name}'")
            if s.name in scope.frames[-1]:
                self.error(s.loc, f"'{s.name}' is already declared in this block")
            if s.init is not None:
                t = self.expr(s.init, scope)
                if not self.assignable(t, s.type_name):
                    self.error(s.init.loc, f"cannot assign {t} to {s.type_name} '{s.name}'")
            scope.frames[-1][s.name] = s.type_name
            scope.symbols[s.name] = s.type_name
        elif isinstance(s, ExprStmt):
            self.expr(s.expr, scope)
        elif isinstance(s, If):
            t = self.expr(s.cond, scope)
            if t not in ("bool", UNKNOWN):
                self.error(s.cond.loc, f"condition must be a comparison, got {t}")
            self.stmt(s.then, scope)
            if s.otherwise is not None:
                self.stmt(s.otherwise, scope)
        elif isinstance(s, Return):
            want = scope.method.return_type
            if s.value is None:
                if want != "void":
                    self.error(s.loc, f"method '{scope.method.name}' must return {want}")
            else:
                t = self.expr(s.value, scope)
                if want == "void":
                    self.error(s.loc, f"void method '{scope.method.name}' cannot return a value")
                elif not self.assignable(t, want):
                    self.error(s.value.loc, f"cannot return {t} from method returning {want}")

    # -- expressions

    def expr(self, e, scope: _Scope) -> str:
        if isinstance(e, Literal):
            return e.kind
        if isinstance(e, Name):
            return self.name(e, scope)
        if isinstance(e, ContextExpr):
            if scope.section != "reference":
                return self.error(e.loc, "context outside reference class")
            return "&" + scope.decl.name
        if isinstance(e, FieldAccess):
            return self.field_access(e, scope)
        if isinstance(e, Call):
            return self.call(e, scope)
        if isinstance(e, New):
            for a in e.args:
                self.expr(a, scope)
            if e.args:
                self.error(e.loc, f"'new {e.type_name}' takes no arguments")
            if e.type_name in ("Storage", "Map"):
                return e.type_name
            if e.type_name not in self.h:
                return self.error(e.loc, f"unknown type '{e.type_name}'")
            return "&" + e.type_name
        if isinstance(e, RefConstruct):
            return self.ref_construct(e, scope)
        if isinstance(e, Assign):
            return self.assign(e, scope)
        if isinstance(e, IncDec):
            t = self.lvalue(e.target, scope)
            if t not in NUMERIC and t != UNKNOWN:
                self.error(e.loc, f"'{e.op}' needs a numeric operand, got {t}")
            return t
        if isinstance(e, Unary):
            t = self.expr(e.operand, scope)
            if t not in NUMERIC and t != UNKNOWN:
                return self.error(e.loc, f"unary '-' needs a numeric operand, got {t}")
            return t
        if isinstance(e, Binary):
            return self.binary(e, scope)
        raise TypeError(f"unknown expression {e!r}")

    def _is_variable(self, name: str, scope: _Scope) -> bool:
        return scope.lookup(name) is not None or scope.body.field(name) is not None

    def name(self, e: Name, scope: _Scope) -> str:
        t = scope.lookup(e.name)
        if t is not None:
            return t
        f = scope.body.field(e.name)
        if f is not None:
            return f.type_name
        if e.name in self.h:
            return self.error(e.loc, f"type name '{e.name}' used as a value")
        return self.error(e.loc, f"undefined name '{e.name}'")

    def field_access(self, e: FieldAccess, scope: _Scope) -> str:
        target = e.target
        if isinstance(target, Name) and not self._is_variable(target.name, scope) and target.name in self.h:
            f = self.h.decl(target.name).object_class.field(e.name)
            if f is None or not f.static:
                return self.error(e.loc, f"'{target.name}' has no static field '{e.name}'")
            return f.type_name
        t = self.expr(target, scope)
        return self.member_field(t, e.name, e.loc)

    def member_field(self, t: str, name: str, loc: Loc) -> str:
        if t in ("Root", UNKNOWN):
            return UNKNOWN
        if self.is_handle(t):
            f = self.h.decl(t.lstrip("&")).object_class.field(name)
            if f is None:
                return self.error(loc, f"'{t.lstrip('&')}' has no field '{name}'")
            return f.type_name
        if self.is_reference(t):
            return self.error(loc, f"cannot read field '{name}' of indirectly represented '{t}'; call a method instead")
        return self.error(loc, f"{t} value has no field '{name}'")

    def lvalue(self, target, scope: _Scope) -> str:
        if isinstance(target, Name) and scope.lookup(target.name) is None and scope.section == "reference":
            if scope.body.field(target.name) is not None:
                return self.error(target.loc, f"reference field '{target.name}' is immutable")
        return self.expr(target, scope)

    def assign(self, e: Assign, scope: _Scope) -> str:
        t = self.lvalue(e.target, scope)
        v = self.expr(e.value, scope)
        if e.op == "=":
            if not self.assignable(v, t):
                self.error(e.loc, f"cannot assign {v} to {t}")
        elif e.op == "+=" and t == "String":
            if v == "void":
                self.error(e.loc, "cannot append void")
        elif not (t in NUMERIC + (UNKNOWN,) and (v == UNKNOWN or self.assignable(v, t) and v in NUMERIC)):
            self.error(e.loc, f"'{e.op}' cannot combine {t} with {v}")
        return t

    def binary(self, e: Binary, scope: _Scope) -> str:
        lt = self.expr(e.left, scope)
        rt = self.expr(e.right, scope)
        if UNKNOWN in (lt, rt):
            return "bool" if e.op in ("==", "!=", "<", ">") else UNKNOWN
        if e.op == "+" and "String" in (lt, rt):
            if "void" in (lt, rt) or "bool" in (lt, rt):
                return self.error(e.loc, f"cannot concatenate {lt} and {rt}")
            return "String"
        if e.op in ("+", "-", "<", ">"):
            if lt not in NUMERIC or rt not in NUMERIC:
                return self.error(e.loc, f"'{e.op}' needs numeric operands, got {lt} and {rt}")
            if e.op in ("<", ">"):
                return "bool"
            return NUMERIC[max(NUMERIC.index(lt), NUMERIC.index(rt))]
        # == and !=
        if "void" in (lt, rt) or not (self.assignable(lt, rt) or self.assignable(rt, lt)):
            return self.error(e.loc, f"cannot compare {lt} with {rt}")
        return "bool"

    def ref_construct(self, e: RefConstruct, scope: _Scope) -> str:
        arg_types = [self.expr(a, scope) for a in e.args]
        if e.type_name not in self.h:
            return self.error(e.loc, f"unknown type '{e.type_name}'")
        schema = self.schemas[e.type_name]
        if not len(schema):
            return self.error(e.loc, f"'{e.type_name}' is represented directly; it has no reference format")
        layout = schema.flattened
        if len(layout) != len(arg_types):
            return self.error(e.loc, f"reference constructor expects {len(layout)} values, got {len(arg_types)}")
        for (fname, ftype), t, a in zip(layout, arg_types, e.args):
            if not self.assignable(t, ftype):
                self.error(a.loc, f"reference field '{fname}' is {ftype}, got {t}")
        return e.type_name

    def args(self, e: Call, params: tuple[str, ...], what: str, scope: _Scope) -> None:
        arg_types = [self.expr(a, scope) for a in e.args]
        if len(arg_types) != len(params):
            self.error(e.loc, f"{what} expects {len(params)} arguments, got {len(arg_types)}")
            return
        for t, p, a in zip(arg_types, params, e.args):
            if not self.assignable(t, p):
                self.error(a.loc, f"argument of {what} must be {p}, got {t}")

    def method_call(self, e: Call, m: MethodDecl, owner: str, scope: _Scope) -> str:
        self.args(e, tuple(p.type_name for p in m.params), f"'{owner}.{m.name}'", scope)
        return m.return_type

    def dual_method(self, ref_type: str, name: str) -> tuple[str, MethodDecl] | None:
        """The reference-class method that shadows ``name`` for references of ``ref_type``."""
        if name == "continue":
            return None
        innermost = self.schemas[ref_type].segments[-1].concept
        m = self.h.decl(innermost).reference_class.method(name)
        return None if m is None else (innermost, m)

    def call(self, e: Call, scope: _Scope) -> str:
        if e.receiver is None:
            m = scope.body.method(e.name)
            if m is not None:
                return self.method_call(e, m, scope.decl.name, scope)
            if e.name == "print":
                arg_types = [self.expr(a, scope) for a in e.args]
                if len(arg_types) != 1:
                    return self.error(e.loc, f"print expects 1 argument, got {len(arg_types)}")
                if arg_types[0] not in NUMERIC + ("String", UNKNOWN):
                    self.error(e.args[0].loc, f"print needs a String or number, got {arg_types[0]}")
                return "void"
            for a in e.args:
                self.expr(a, scope)
            return self.error(e.loc, f"undefined method '{e.name}'")

        recv = e.receiver
        if isinstance(recv, Name) and not self._is_variable(recv.name, scope) and recv.name in self.h:
            for a in e.args:
                self.expr(a, scope)
            return self.error(e.loc, f"'{recv.name}.{e.name}': methods cannot be called on a type")
        t = self.expr(recv, scope)
        if t == "Root":
            if e.name == "continue":
                self.continue_calls.add(id(e))
                self.args(e, (), "'continue'", scope)
                return "void"
            for a in e.args:
                self.expr(a, scope)
            return UNKNOWN
        if t == UNKNOWN:
            for a in e.args:
                self.expr(a, scope)
            return UNKNOWN
        if t in BUILTIN_METHODS:
            sig = BUILTIN_METHODS[t].get(e.name)
            if sig is None:
                for a in e.args:
                    self.expr(a, scope)
                return self.error(e.loc, f"{t} has no method '{e.name}'")
            self.args(e, sig[0], f"'{t}.{e.name}'", scope)
            return sig[1]
        if self.is_reference(t):
            dual = self.dual_method(t, e.name)
            if dual is not None:
                return self.method_call(e, dual[1], dual[0], scope)
        if self.is_handle(t) or self.is_reference(t):
            owner = t.lstrip("&")
            m = self.h.decl(owner).object_class.method(e.name)
            if m is None:
                for a in e.args:
                    self.expr(a, scope)
                return self.error(e.loc, f"'{owner}' has no method '{e.name}'")
            return self.method_call(e, m, owner, scope)
        for a in e.args:
            self.expr(a, scope)
        return self.error(e.loc, f"{t} value has no method '{e.name}'")


def check(program: Program, hierarchy: ConceptHierarchy | None = None) -> CheckedProgram:
    if hierarchy is None:
        hierarchy = build_hierarchy(program)
    return Checker(program, hierarchy).check()
