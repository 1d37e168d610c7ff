"""Syntax tree for COP-lite programs.

Nodes compare structurally; source locations are carried along but excluded
from equality so that a re-parsed pretty-print compares equal to the
original tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True)
class Loc:
    line: int
    column: int


NOWHERE = Loc(0, 0)


def _loc():
    return field(default=NOWHERE, compare=False, repr=False)


# Expressions

@dataclass(frozen=True)
class Literal:
    value: object
    kind: str  # "int" | "double" | "String"
    loc: Loc = _loc()


@dataclass(frozen=True)
class Name:
    name: str
    loc: Loc = _loc()


@dataclass(frozen=True)
class ContextExpr:
    loc: Loc = _loc()


@dataclass(frozen=True)
class FieldAccess:
    target: "Expr"
    name: str
    loc: Loc = _loc()


@dataclass(frozen=True)
class Call:
    receiver: "Expr | None"  # None for bare calls such as print(...)
    name: str
    args: tuple["Expr", ...]
    loc: Loc = _loc()


@dataclass(frozen=True)
class New:
    type_name: str
    args: tuple["Expr", ...]
    loc: Loc = _loc()


@dataclass(frozen=True)
class RefConstruct:
    """``Type@(v1, ..., vk)``: build a complex reference from flattened values."""

    type_name: str
    args: tuple["Expr", ...]
    loc: Loc = _loc()


@dataclass(frozen=True)
class Assign:
    target: "Expr"
    op: str  # "=", "+=", "-="
    value: "Expr"
    loc: Loc = _loc()


@dataclass(frozen=True)
class IncDec:
    target: "Expr"
    op: str  # "++" | "--"
    prefix: bool
    loc: Loc = _loc()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    loc: Loc = _loc()


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"
    loc: Loc = _loc()


Expr = Union[Literal, Name, ContextExpr, FieldAccess, Call, New, RefConstruct,
             Assign, IncDec, Binary, Unary]


# Statements

@dataclass(frozen=True)
class VarDecl:
    type_name: str
    name: str
    init: Expr | None
    loc: Loc = _loc()


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class Block:
    stmts: tuple["Stmt", ...]
    loc: Loc = _loc()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Stmt"
    otherwise: "Stmt | None"
    loc: Loc = _loc()


@dataclass(frozen=True)
class Return:
    value: Expr | None
    loc: Loc = _loc()


Stmt = Union[VarDecl, ExprStmt, Block, If, Return]


# Declarations

@dataclass(frozen=True)
class CreateInit:
    """Field initializer ``Type name.create();`` (fresh built-in instance)."""


@dataclass(frozen=True)
class FieldDecl:
    type_name: str
    name: str
    static: bool
    init: Literal | CreateInit | None
    loc: Loc = _loc()


@dataclass(frozen=True)
class Param:
    type_name: str
    name: str
    loc: Loc = _loc()


@dataclass(frozen=True)
class MethodDecl:
    return_type: str
    name: str
    params: tuple[Param, ...]
    body: Block
    loc: Loc = _loc()


@dataclass(frozen=True)
class ClassBody:
    fields: tuple[FieldDecl, ...] = ()
    methods: tuple[MethodDecl, ...] = ()

    def field(self, name: str) -> FieldDecl | None:
        for f in self.fields:
            if f.name == name:
                return f
        return None

    def method(self, name: str) -> MethodDecl | None:
        for m in self.methods:
            if m.name == name:
                return m
        return None

    @property
    def instance_fields(self) -> tuple[FieldDecl, ...]:
        return tuple(f for f in self.fields if not f.static)

    @property
    def is_empty(self) -> bool:
        return not self.fields and not self.methods


@dataclass(frozen=True)
class ConceptDecl:
    name: str
    parent: str | None
    object_class: ClassBody
    reference_class: ClassBody
    loc: Loc = _loc()

    @property
    def body(self) -> ClassBody:
        return self.object_class


@dataclass(frozen=True)
class ClassDecl:
    name: str
    parent: str | None
    body: ClassBody
    loc: Loc = _loc()

    @property
    def object_class(self) -> ClassBody:
        return self.body

    @property
    def reference_class(self) -> ClassBody:
        return ClassBody()


Decl = Union[ConceptDecl, ClassDecl]


@dataclass(frozen=True)
class Program:
    decls: tuple[Decl, ...]

    def decl(self, name: str) -> Decl | None:
        for d in self.decls:
            if d.name == name:
                return d
        return None
