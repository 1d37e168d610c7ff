"""Recursive-descent parser producing a :class:`~copl.nodes.Program`.

Grammar (informal)::

    program    := decl*
    decl       := "concept" IDENT ["in" IDENT] section*
                | "class" IDENT ["in" IDENT] "{" member* "}"
    section    := ("class" | "reference") "{" member* "}"
    member     := ["static"] type IDENT ( "(" params ")" block
                                       | ["=" literal | "." "create" "(" ")"] ";" )
    stmt       := block | "if" "(" expr ")" stmt ["else" stmt]
                | "return" [expr] ";" | type IDENT ["=" expr] ";" | expr ";"
    expr       := equality [("=" | "+=" | "-=") expr]
    equality   := compare (("==" | "!=") compare)*
    compare    := additive (("<" | ">") additive)*
    additive   := unary (("+" | "-") unary)*
    unary      := ("-" | "++" | "--") unary | postfix
    postfix    := primary ("." IDENT ["(" args ")"] | "++" | "--")*
    primary    := literal | "context" | "new" IDENT "(" args ")"
                | IDENT "@" "(" args ")" | IDENT "(" args ")" | IDENT | "(" expr ")"
"""

from __future__ import annotations

from copl import lexer
from copl.errors import ParseError
from copl.lexer import Token
from copl.nodes import (
    Assign, Binary, Block, Call, ClassBody, ClassDecl, ConceptDecl, ContextExpr,
    CreateInit, ExprStmt, FieldAccess, FieldDecl, If, IncDec, Literal, Loc,
    MethodDecl, Name, New, Param, Program, RefConstruct, Return, Unary, VarDecl,
)


def parse(tokens: list[Token]) -> Program:
    return Parser(tokens).program()


def parse_source(source: str) -> Program:
    return parse(lexer.tokenize(source))


def _loc(tok: Token) -> Loc:
    return Loc(tok.line, tok.column)


class Parser:
    def __init__(self, tokens: list[Token]):
        if not tokens or tokens[-1].kind != lexer.EOF:
            raise ValueError("token list must end with end-of-input")
        self.tokens = tokens
        self.pos = 0

    # -- token helpers

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != lexer.EOF:
            self.pos += 1
        return tok

    def check(self, lexeme: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok.kind in (lexer.PUNCT, lexer.KEYWORD) and tok.lexeme == lexeme

    def match(self, *lexemes: str) -> Token | None:
        for lx in lexemes:
            if self.check(lx):
                return self.advance()
        return None

    def error(self, expected: str) -> ParseError:
        tok = self.peek()
        msg = f"expected {expected}"
        if self.pos > 0:
            msg += f" after '{self.tokens[self.pos - 1].lexeme}'"
        if tok.kind != lexer.EOF:
            msg += f", found {tok}"
        return ParseError(tok.line, tok.column, msg)

    def expect(self, lexeme: str) -> Token:
        if self.check(lexeme):
            return self.advance()
        raise self.error(f"'{lexeme}'")

    def ident(self, what: str = "identifier") -> Token:
        if self.peek().kind == lexer.IDENTIFIER:
            return self.advance()
        raise self.error(what)

    # -- declarations

    def program(self) -> Program:
        decls = []
        while self.peek().kind != lexer.EOF:
            decls.append(self.declaration())
        return Program(tuple(decls))

    def declaration(self):
        start = self.peek()
        if self.match("concept"):
            name = self.ident().lexeme
            parent = self.ident().lexeme if self.match("in") else None
            sections: dict[str, ClassBody] = {}
            # "class {" opens a section; "class Name" starts the next declaration.
            while (self.check("class") and self.check("{", 1)) or self.check("reference"):
                kw = self.advance()
                if kw.lexeme in sections:
                    raise ParseError(kw.line, kw.column, f"duplicate '{kw.lexeme}' section in concept {name}")
                sections[kw.lexeme] = self.class_body()
            return ConceptDecl(name, parent, sections.get("class", ClassBody()),
                               sections.get("reference", ClassBody()), _loc(start))
        if self.match("class"):
            name = self.ident().lexeme
            parent = self.ident().lexeme if self.match("in") else None
            return ClassDecl(name, parent, self.class_body(), _loc(start))
        raise self.error("'concept' or 'class'")

    def class_body(self) -> ClassBody:
        self.expect("{")
        fields, methods, seen = [], [], set()
        while not self.check("}"):
            if self.peek().kind == lexer.EOF:
                raise self.error("'}'")
            member = self.member()
            if member.name in seen:
                raise ParseError(member.loc.line, member.loc.column, f"duplicate member '{member.name}'")
            seen.add(member.name)
            (methods if isinstance(member, MethodDecl) else fields).append(member)
        self.expect("}")
        return ClassBody(tuple(fields), tuple(methods))

    def member(self):
        start = self.peek()
        static = self.match("static") is not None
        type_name = self.ident("type name").lexeme
        name_tok = self.ident("member name")
        name = name_tok.lexeme
        if self.check("("):
            if static:
                raise ParseError(start.line, start.column, "methods cannot be static")
            params = self.params()
            if name == "continue" and (params or type_name != "void"):
                raise ParseError(name_tok.line, name_tok.column,
                                 "'continue' must take no parameters and return void")
            return MethodDecl(type_name, name, params, self.block(), _loc(start))
        init = None
        if self.match("="):
            init = self.field_literal()
        elif self.match("."):
            tok = self.ident("'create'")
            if tok.lexeme != "create":
                raise ParseError(tok.line, tok.column, "expected 'create' in field initializer")
            self.expect("(")
            self.expect(")")
            init = CreateInit()
        self.expect(";")
        return FieldDecl(type_name, name, static, init, _loc(start))

    def field_literal(self) -> Literal:
        start = self.peek()
        negative = self.match("-") is not None
        tok = self.peek()
        if tok.kind not in (lexer.INT, lexer.FLOAT, lexer.STRING) or (negative and tok.kind == lexer.STRING):
            raise self.error("literal initializer")
        lit = self.literal()
        if negative:
            return Literal(-lit.value, lit.kind, _loc(start))
        return lit

    def params(self) -> tuple[Param, ...]:
        self.expect("(")
        params = []
        if not self.check(")"):
            while True:
                t = self.ident("parameter type")
                n = self.ident("parameter name")
                params.append(Param(t.lexeme, n.lexeme, _loc(t)))
                if not self.match(","):
                    break
        self.expect(")")
        return tuple(params)

    # -- statements

    def block(self) -> Block:
        start = self.expect("{")
        stmts = []
        while not self.check("}"):
            if self.peek().kind == lexer.EOF:
                raise self.error("'}'")
            stmts.append(self.statement())
        self.expect("}")
        return Block(tuple(stmts), _loc(start))

    def statement(self):
        tok = self.peek()
        if self.check("{"):
            return self.block()
        if self.match("if"):
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            then = self.statement()
            otherwise = self.statement() if self.match("else") else None
            return If(cond, then, otherwise, _loc(tok))
        if self.match("return"):
            value = None if self.check(";") else self.expression()
            self.expect(";")
            return Return(value, _loc(tok))
        if tok.kind == lexer.IDENTIFIER and self.peek(1).kind == lexer.IDENTIFIER:
            type_name = self.advance().lexeme
            name = self.advance().lexeme
            init = self.expression() if self.match("=") else None
            self.expect(";")
            return VarDecl(type_name, name, init, _loc(tok))
        expr = self.expression()
        self.expect(";")
        return ExprStmt(expr, _loc(tok))

    # -- expressions

    def expression(self):
        left = self.equality()
        op = self.match("=", "+=", "-=")
        if op is None:
            return left
        if not isinstance(left, (Name, FieldAccess)):
            raise ParseError(op.line, op.column, "invalid assignment target")
        return Assign(left, op.lexeme, self.expression(), _loc(op))

    def _binary(self, operators: tuple[str, ...], operand):
        left = operand()
        while True:
            op = self.match(*operators)
            if op is None:
                return left
            left = Binary(op.lexeme, left, operand(), _loc(op))

    def equality(self):
        return self._binary(("==", "!="), self.comparison)

    def comparison(self):
        return self._binary(("<", ">"), self.additive)

    def additive(self):
        return self._binary(("+", "-"), self.unary)

    def unary(self):
        op = self.match("-", "++", "--")
        if op is None:
            return self.postfix()
        operand = self.unary()
        if op.lexeme == "-":
            return Unary("-", operand, _loc(op))
        if not isinstance(operand, (Name, FieldAccess)):
            raise ParseError(op.line, op.column, f"invalid operand for '{op.lexeme}'")
        return IncDec(operand, op.lexeme, True, _loc(op))

    def postfix(self):
        expr = self.primary()
        while True:
            if self.match("."):
                name = self.ident("member name after '.'")
                if self.check("("):
                    expr = Call(expr, name.lexeme, self.args(), _loc(name))
                else:
                    expr = FieldAccess(expr, name.lexeme, _loc(name))
            elif self.check("++") or self.check("--"):
                op = self.advance()
                if not isinstance(expr, (Name, FieldAccess)):
                    raise ParseError(op.line, op.column, f"invalid operand for '{op.lexeme}'")
                expr = IncDec(expr, op.lexeme, False, _loc(op))
            else:
                return expr

    def args(self) -> tuple:
        self.expect("(")
        args = []
        if not self.check(")"):
            while True:
                args.append(self.expression())
                if not self.match(","):
                    break
        self.expect(")")
        return tuple(args)

    def literal(self) -> Literal:
        tok = self.advance()
        if tok.kind == lexer.INT:
            return Literal(int(tok.lexeme), "int", _loc(tok))
        if tok.kind == lexer.FLOAT:
            return Literal(float(tok.lexeme), "double", _loc(tok))
        return Literal(tok.lexeme, "String", _loc(tok))

    def primary(self):
        tok = self.peek()
        if tok.kind in (lexer.INT, lexer.FLOAT, lexer.STRING):
            return self.literal()
        if self.match("context"):
            return ContextExpr(_loc(tok))
        if self.match("new"):
            type_name = self.ident("type name after 'new'").lexeme
            return New(type_name, self.args(), _loc(tok))
        if tok.kind == lexer.IDENTIFIER:
            self.advance()
            if self.match("@"):
                return RefConstruct(tok.lexeme, self.args(), _loc(tok))
            if self.check("("):
                return Call(None, tok.lexeme, self.args(), _loc(tok))
            return Name(tok.lexeme, _loc(tok))
        if self.match("("):
            expr = self.expression()
            self.expect(")")
            return expr
        raise self.error("expression")
