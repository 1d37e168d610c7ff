"""Pretty-printer turning a syntax tree back into COP-lite source.

Nested operator expressions are fully parenthesized, so re-parsing the
output always reproduces the same tree.
"""

from __future__ import annotations

from decimal import Decimal

from copl.nodes import (
    Assign, Binary, Block, Call, ClassBody, ClassDecl, ConceptDecl, ContextExpr,
    CreateInit, ExprStmt, FieldAccess, FieldDecl, If, IncDec, Literal, MethodDecl,
    Name, New, Program, RefConstruct, Return, Unary, VarDecl,
)

INDENT = "    "

_ESCAPES = {"\n": "\\n", "\t": "\\t", '"': '\\"', "\\": "\\\\"}


def quote(text: str) -> str:
    return '"' + "".join(_ESCAPES.get(c, c) for c in text) + '"'


def format_double_literal(value: float) -> str:
    text = format(Decimal(repr(value)), "f")
    return text if "." in text else text + ".0"


def pretty(program: Program) -> str:
    out: list[str] = []
    for decl in program.decls:
        _decl(decl, out)
        out.append("")
    return "\n".join(out)


def _decl(decl, out: list[str]) -> None:
    head = f"{'concept' if isinstance(decl, ConceptDecl) else 'class'} {decl.name}"
    if decl.parent is not None:
        head += f" in {decl.parent}"
    if isinstance(decl, ClassDecl):
        out.append(head + " {")
        _body(decl.body, out, 1)
        out.append("}")
        return
    out.append(head)
    for kw, body in (("class", decl.object_class), ("reference", decl.reference_class)):
        out.append(f"{INDENT}{kw} {{")
        _body(body, out, 2)
        out.append(f"{INDENT}}}")


def _body(body: ClassBody, out: list[str], depth: int) -> None:
    pad = INDENT * depth
    for f in body.fields:
        out.append(pad + _field(f))
    for m in body.methods:
        params = ", ".join(f"{p.type_name} {p.name}" for p in m.params)
        out.append(f"{pad}{m.return_type} {m.name}({params}) {{")
        for s in m.body.stmts:
            _stmt(s, out, depth + 1)
        out.append(pad + "}")


def _field(f: FieldDecl) -> str:
    text = ("static " if f.static else "") + f"{f.type_name} {f.name}"
    if isinstance(f.init, CreateInit):
        text += ".create()"
    elif f.init is not None:
        text += " = " + expr(f.init)
    return text + ";"


def _stmt(s, out: list[str], depth: int) -> None:
    pad = INDENT * depth
    if isinstance(s, Block):
        out.append(pad + "{")
        for inner in s.stmts:
            _stmt(inner, out, depth + 1)
        out.append(pad + "}")
    elif isinstance(s, VarDecl):
        init = "" if s.init is None else " = " + expr(s.init)
        out.append(f"{pad}{s.type_name} {s.name}{init};")
    elif isinstance(s, ExprStmt):
        out.append(pad + expr(s.expr) + ";")
    elif isinstance(s, Return):
        out.append(pad + ("return;" if s.value is None else f"return {expr(s.value)};"))
    elif isinstance(s, If):
        out.append(f"{pad}if ({expr(s.cond)})")
        _branch(s.then, out, depth)
        if s.otherwise is not None:
            out.append(pad + "else")
            _branch(s.otherwise, out, depth)
    else:
        raise TypeError(f"unknown statement {s!r}")


def _branch(s, out: list[str], depth: int) -> None:
    # Bracing a single-statement branch would change the tree.
    _stmt(s, out, depth if isinstance(s, Block) else depth + 1)


def _operand(e) -> str:
    text = expr(e)
    if (isinstance(e, (Binary, Assign, Unary))
            or (isinstance(e, IncDec) and e.prefix)
            or (isinstance(e, Literal) and _negative(e))):
        return f"({text})"
    return text


def _negative(lit: Literal) -> bool:
    return lit.kind != "String" and lit.value < 0


def expr(e) -> str:
    if isinstance(e, Literal):
        if e.kind == "String":
            return quote(e.value)
        if e.kind == "double":
            return format_double_literal(e.value)
        return str(e.value)
    if isinstance(e, Name):
        return e.name
    if isinstance(e, ContextExpr):
        return "context"
    if isinstance(e, FieldAccess):
        return f"{_operand(e.target)}.{e.name}"
    if isinstance(e, Call):
        args = ", ".join(expr(a) for a in e.args)
        if e.receiver is None:
            return f"{e.name}({args})"
        return f"{_operand(e.receiver)}.{e.name}({args})"
    if isinstance(e, New):
        return f"new {e.type_name}({', '.join(expr(a) for a in e.args)})"
    if isinstance(e, RefConstruct):
        return f"{e.type_name}@({', '.join(expr(a) for a in e.args)})"
    if isinstance(e, Assign):
        return f"{_operand(e.target)} {e.op} {expr(e.value)}"
    if isinstance(e, IncDec):
        target = _operand(e.target)
        return f"{e.op}{target}" if e.prefix else f"{target}{e.op}"
    if isinstance(e, Binary):
        return f"{_operand(e.left)} {e.op} {_operand(e.right)}"
    if isinstance(e, Unary):
        return f"-{_operand(e.operand)}"
    raise TypeError(f"unknown expression {e!r}")
