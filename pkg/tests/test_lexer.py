import pytest

from copl.errors import LexError
from copl.lexer import EOF, IDENTIFIER, KEYWORD, PUNCT, STRING, tokenize
from conftest import corpus_programs


def kinds(source):
    return [(t.kind, t.lexeme) for t in tokenize(source)]


def test_concept_header():
    assert kinds("concept Persistent") == [(KEYWORD, "concept"), (IDENTIFIER, "Persistent"), (EOF, "")]


def test_empty_input():
    assert kinds("") == [(EOF, "")]


def test_print_call_decodes_escapes():
    toks = kinds('print("> Start of resolution\\n");')
    assert toks == [
        (IDENTIFIER, "print"), (PUNCT, "("), (STRING, "> Start of resolution\n"),
        (PUNCT, ")"), (PUNCT, ";"), (EOF, ""),
    ]


def test_escapes_and_comments():
    toks = tokenize('"a\\"b\\\\c" // trailing comment\nx')
    assert toks[0].lexeme == 'a"b\\c'
    assert (toks[1].kind, toks[1].lexeme, toks[1].line, toks[1].column) == (IDENTIFIER, "x", 2, 1)


def test_continue_is_not_a_keyword():
    assert tokenize("r.continue();")[2].kind == IDENTIFIER


def test_multi_char_operators():
    lexemes = [t.lexeme for t in tokenize("a++ == b-- != c += d -= e")][:-1]
    assert lexemes == ["a", "++", "==", "b", "--", "!=", "c", "+=", "d", "-=", "e"]


def test_numbers():
    toks = tokenize("42 2.5 7.")
    assert [(t.kind, t.lexeme) for t in toks[:4]] == [
        ("integer-literal", "42"), ("floating-literal", "2.5"), ("integer-literal", "7"), (PUNCT, ".")]


@pytest.mark.parametrize("source, line, column, message", [
    ('x = "abc', 1, 5, "unterminated string literal"),
    ("a\n  # b", 2, 3, "illegal character '#'"),
])
def test_errors_carry_position(source, line, column, message):
    with pytest.raises(LexError) as info:
        tokenize(source)
    d = info.value.diagnostics[0]
    assert (d.line, d.column, d.message) == (line, column, message)


@pytest.mark.parametrize("path", corpus_programs(), ids=lambda p: p.name)
def test_locations_are_monotonic(path):
    toks = tokenize(path.read_text())
    positions = [(t.line, t.column) for t in toks]
    assert positions == sorted(positions)
    assert all(t.lexeme for t in toks[:-1] if t.kind != STRING)
