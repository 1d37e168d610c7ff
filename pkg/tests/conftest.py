from pathlib import Path

import pytest

import copl

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

LISTING_1 = """
concept ParentConcept
  class { }
  reference {
    int parentRef;
    void continue() { }
  }

concept MyConcept in ParentConcept
  class {
    double objField; // Passed by ref
    void continue() { }
    int myMethod() { return 0; }
  }
  reference {
    int refField; // Passed by value
    void continue() { }
    int myMethod() {
      double tmp = context.objField;
      return refField;
    }
  }
"""


def corpus_programs():
    return sorted(CORPUS.glob("*.cop"))


@pytest.fixture
def listing2_3():
    return (CORPUS / "listing2_3.cop").read_text()


@pytest.fixture
def listing4():
    return (CORPUS / "listing4.cop").read_text()


def run(source, **kwargs):
    return copl.run_source(source, **kwargs)


def interpreter(source, **kwargs):
    interp = copl.Interpreter(copl.load(source), **kwargs)
    return interp


# -- acceptance summary: one PASS/FAIL line per criterion at the end of the run

ACCEPTANCE: dict[str, tuple[str, str]] = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of an acceptance test under its criterion label."""
    label = request.node.get_closest_marker("criterion").args[0]
    ACCEPTANCE[label] = ("FAIL", request.node.name)
    yield
    ACCEPTANCE[label] = ("PASS", request.node.name)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion label")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE, key=lambda s: int(s.split()[0])):
        status, name = ACCEPTANCE[label]
        terminalreporter.write_line(f"{status}  criterion {label}  ({name})")
