"""Tokenizer for COP-lite source text."""

from __future__ import annotations

from dataclasses import dataclass

from copl.errors import LexError

KEYWORDS = frozenset({
    "concept", "class", "reference", "in", "static",
    "if", "else", "return", "new", "context",
})

# Longest match first.
PUNCTUATION = (
    "==", "!=", "++", "--", "+=", "-=",
    "(", ")", "{", "}", ";", ",", ".", "@", "=", "<", ">", "+", "-",
)

ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}

KEYWORD = "keyword"
IDENTIFIER = "identifier"
INT = "integer-literal"
FLOAT = "floating-literal"
STRING = "string-literal"
PUNCT = "punctuation"
EOF = "end-of-input"


@dataclass(frozen=True)
class Token:
    kind: str
    lexeme: str
    line: int
    column: int

    def __str__(self) -> str:
        if self.kind == EOF:
            return "end of input"
        if self.kind == STRING:
            return "string literal"
        return f"'{self.lexeme}'"


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)

    def advance(count: int = 1) -> None:
        nonlocal i, line, col
        for _ in range(count):
            if source[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = source[i]
        if c in " \t\r\n":
            advance()
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                advance()
            continue

        start_line, start_col = line, col
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            tokens.append(Token(KEYWORD if word in KEYWORDS else IDENTIFIER, word, start_line, start_col))
            advance(j - i)
        elif c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            kind = INT
            if j + 1 < n and source[j] == "." and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
                kind = FLOAT
            tokens.append(Token(kind, source[i:j], start_line, start_col))
            advance(j - i)
        elif c == '"':
            advance()
            chars = []
            while True:
                if i >= n or source[i] == "\n":
                    raise LexError(start_line, start_col, "unterminated string literal")
                ch = source[i]
                if ch == '"':
                    advance()
                    break
                if ch == "\\":
                    if i + 1 >= n or source[i + 1] not in ESCAPES:
                        raise LexError(line, col, "invalid escape sequence")
                    chars.append(ESCAPES[source[i + 1]])
                    advance(2)
                    continue
                chars.append(ch)
                advance()
            tokens.append(Token(STRING, "".join(chars), start_line, start_col))
        else:
            for p in PUNCTUATION:
                if source.startswith(p, i):
                    tokens.append(Token(PUNCT, p, start_line, start_col))
                    advance(len(p))
                    break
            else:
                raise LexError(line, col, f"illegal character {c!r}")

    tokens.append(Token(EOF, "", line, col))
    return tokens
