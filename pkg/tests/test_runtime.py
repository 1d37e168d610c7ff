import pytest

import copl
from copl.errors import CheckError, CoplRuntimeError, StepLimitExceeded, UnresolvedSegment
from copl.runtime import ComplexReferenceValue, Interpreter, RootHandle, SegmentValue
from copl.semantics import compute_reference_schema
from conftest import CORPUS, interpreter, run

LISTING_2_3_OUT = (CORPUS / "listing2_3.stdout").read_text()
LISTING_4_OUT = (CORPUS / "listing4.stdout").read_text()


def with_main(source, body):
    start = source.index("class Main {")
    return source[:start] + "class Main {\n    void main() {\n" + body + "\n    }\n}\n"


def test_listing2_3_output(listing2_3):
    assert run(listing2_3).stdout == LISTING_2_3_OUT


def test_listing4_output(listing4):
    assert run(listing4).stdout == LISTING_4_OUT


def test_empty_main():
    result = run("class Main { void main() { } }")
    assert result.stdout == ""
    assert result.trace == ["call Main.main"]


def test_missing_key_in_main(listing2_3):
    src = with_main(listing2_3, "Root r = Persistent.st.load(7);")
    with pytest.raises(UnresolvedSegment, match="Storage key 7"):
        run(src)


# -- construction


def test_construct_reference_listing4(listing4):
    interp = interpreter(listing4)
    ref = interp.construct_reference("Account", ["db1", 42])
    assert ref == ComplexReferenceValue("Account", (
        SegmentValue("NamedObjects", (("id", "db1"),)),
        SegmentValue("Persistent", (("id", 42),)),
    ))


def test_construct_reference_listing2(listing2_3):
    checked = copl.load(listing2_3)
    # Oracle: group the flat values by the independently computed schema.
    schema = compute_reference_schema("Account", checked.hierarchy)
    values, expected, i = [42], [], 0
    for seg in schema.segments:
        expected.append(SegmentValue(seg.concept, tuple((n, values[i + k]) for k, (n, _) in enumerate(seg.fields))))
        i += len(seg.fields)
    ref = Interpreter(checked).construct_reference("Account", values)
    assert ref.segments == tuple(expected)


def test_plain_class_values_are_handles():
    interp = interpreter("class Main { void main() { } }")
    assert isinstance(interp.instantiate("Main", None), RootHandle)


def test_instantiate_initializers(listing2_3, listing4):
    interp = interpreter(listing2_3)
    obj = interp.table.get(interp.instantiate("Account", None))
    assert obj.fields == {"b": 0.0} and isinstance(obj.fields["b"], float)

    interp = interpreter(listing4)
    obj = interp.table.get(interp.instantiate("Persistent", None))
    assert obj.fields["accessCount"] == 0
    assert type(obj.fields["st"]).__name__ == "StorageInstance"


def test_singletons_hold_statics(listing4):
    interp = interpreter(listing4)
    interp.initialize()
    assert set(interp.table.singletons) == {"NamedObjects"}
    single = interp.table.singletons["NamedObjects"]
    assert interp.read_field(single, "map") is interp.statics["NamedObjects"]["map"]


def test_reference_copies_compare_equal(listing4):
    interp = interpreter(listing4)
    assert interp.construct_reference("Account", ["db1", 42]) == interp.construct_reference("Account", ["db1", 42])


# -- invocation


def test_invoke_returns_business_value(listing2_3):
    interp = interpreter(listing2_3)
    interp.run_main()
    ref = interp.construct_reference("Account", [42])
    assert interp.invoke(ref, "getBalance", []) == 100.0
    assert interp.chains == []


def test_direct_call_on_handle_has_no_resolution():
    result = run("""class Counter {
    int n = 4;
    int next() { n++; return n; }
}
class Main {
    void main() {
        Counter c = new Counter();
        print(c.next() + c.next());
    }
}""")
    assert result.stdout == "11"
    assert not [e for e in result.trace if e.startswith(("enter", "exit"))]


THREE_LEVELS = """
concept C class { static Map m.create(); }
  reference {
    String k;
    void continue() { print("> Enter C\\n"); Root r = context.m.get(k); r.continue(); print("< Exit C\\n"); }
  }
concept B in C class { Map m.create(); }
  reference {
    String k;
    void continue() { print("> Enter B\\n"); Root r = context.m.get(k); r.continue(); print("< Exit B\\n"); }
  }
concept A in B class { Map m.create(); }
  reference {
    String k;
    void continue() { print("> Enter A\\n"); Root r = context.m.get(k); r.continue(); print("< Exit A\\n"); }
  }
class T in A {
    int v = 9;
    int get() { print(" * get\\n"); return v; }
}
class Main {
    void main() {
        Root b = new B();
        Root a = new A();
        Root t = new T();
        C.m.put("b", b);
        b.m.put("a", a);
        a.m.put("t", t);
        T ref = T@("b", "a", "t");
        print(ref.get() + "\\n");
    }
}
"""


def expand_chain(levels, business):
    """Oracle: hand expansion of nested continuations around one business line."""
    if not levels:
        return [business]
    head, rest = levels[0], levels[1:]
    return [f"> Enter {head}"] + expand_chain(rest, business) + [f"< Exit {head}"]


def test_three_levels_nest_lifo():
    result = run(THREE_LEVELS)
    assert result.stdout.splitlines() == expand_chain(["C", "B", "A"], " * get") + ["9"]
    resolution = [e for e in result.trace if e.startswith(("enter", "exit"))]
    assert resolution == ["enter C seg=1", "enter B seg=2", "enter A seg=3",
                          "exit A seg=3", "exit B seg=2", "exit C seg=1"]


def test_context_binding_is_resolved_object():
    src = THREE_LEVELS.replace('print("> Enter B\\n");', 'print("> Enter B\\n"); context.m.put("seen", context);')
    interp = interpreter(src)
    interp.run_main()
    b_obj = [h for h, o in enumerate(interp.table.entries) if o.type_name == "B"]
    assert len(b_obj) == 1
    seen = interp.table.get(RootHandle(b_obj[0])).fields["m"].get("seen")
    assert seen == RootHandle(b_obj[0])


INTERCEPT = """
concept Gate class { static Map m.create(); static int open = 1; }
  reference {
    String k;
    void continue() {
      Root r = context.m.get(k);
      if (context.open == 1) r.continue();
      else print("dropped\\n");
    }
  }
class T in Gate {
    int hits = 0;
    int hit() { hits++; return hits; }
}
class Main {
    void main() {
        Gate.m.put("t", new T());
        T a = T@("t");
        T b = a;
        print(a.hit() + " " + b.hit() + "\\n");
        Gate.open = 0;
        int x = a.hit();
        Gate.open = 1;
        print(a.hit() + "\\n");
    }
}
"""


def test_reference_copies_reach_same_object_and_interception_drops():
    result = run(INTERCEPT)
    # Both copies mutate one counter; the dropped access never reached the object.
    assert result.stdout == "1 2\ndropped\n3\n"
    assert result.trace.count("call T.hit") == 3


def test_dropped_access_yields_void():
    src = INTERCEPT.replace("int x = a.hit();", "print(a.hit());")
    with pytest.raises(CoplRuntimeError, match="cannot print void"):
        run(src)


def test_state_round_trip(listing2_3):
    src = with_main(listing2_3, """        Persistent.st.store(42, new Account());
        Source s = new Source();
        s.credit(Account@(42), 100);
        Account again = Account@(42);
        print("balance " + again.getBalance() + "\\n");""")
    assert run(src).stdout.splitlines()[-1] == "balance 100"


def test_without_store_back_state_is_lost(listing2_3):
    src = listing2_3.replace("context.st.store(id, r);", "")
    src = with_main(src, """        Persistent.st.store(42, new Account());
        Source s = new Source();
        s.credit(Account@(42), 100);
        print(Account@(42).getBalance() + "\\n");""")
    assert run(src).stdout.splitlines()[-1] == "0"


def test_reentrant_access_opens_once():
    result = run((CORPUS / "listing4_reentrant.cop").read_text())
    spans, depth, current = [], 0, None
    for e in result.trace:
        if e == "enter NamedObjects seg=1":
            if depth == 0:
                current = []
            depth += 1
        elif e == "exit NamedObjects seg=1":
            depth -= 1
            if depth == 0:
                spans.append(current)
        elif e.startswith(("open", "close")) and current is not None:
            current.append(e)
    assert len(spans) == 5
    assert all(span == ["open Storage#1", "close Storage#1"] for span in spans)
    assert result.stdout.endswith("total = 105\n")


def test_dual_method_dispatch():
    stdout = run((CORPUS / "listing1.cop").read_text()).stdout
    assert " * object myMethod\n" in stdout
    assert "objField = 2.5, refField = 7" in stdout
    assert stdout.endswith("item 1 7\n")


# -- errors


def test_continue_outside_resolution():
    with pytest.raises(CoplRuntimeError, match="continue outside resolution") as info:
        run("class Main { void main() { Root r = new Main(); r.continue(); } }")
    assert info.value.where == "Main.main"
    assert (info.value.line, info.value.column) == (1, 51)  # the method name


def test_continue_twice(listing2_3):
    src = listing2_3.replace("r.continue();", "r.continue(); r.continue();")
    with pytest.raises(CoplRuntimeError, match="continue called twice"):
        run(src)


def test_continue_on_nil(listing2_3):
    src = listing2_3.replace("Root r = context.st.load(id);", "Root r;")
    with pytest.raises(CoplRuntimeError, match="nil"):
        run(src)


def test_error_aborts_remaining_steps(listing4):
    src = listing4.replace('s.credit(Account@("db1", 42), 100);', 's.credit(Account@("db1", 7), 100);')
    interp = interpreter(src)
    with pytest.raises(UnresolvedSegment) as info:
        interp.run_main()
    assert str(info.value) == "unresolved reference segment: Storage key 7 (segment Persistent)"
    assert info.value.where == "Persistent.continue"
    out = interp.output()
    assert out == "> Enter NamedObjects\n > Enter Persistent\n"
    assert interp.chains == []


def test_map_miss_names_segment(listing4):
    src = listing4.replace('Account@("db1", 42)', 'Account@("db2", 42)')
    with pytest.raises(UnresolvedSegment, match=r"Map key db2 \(segment NamedObjects\)"):
        run(src)


def test_wrong_object_type_at_terminal(listing2_3):
    src = listing2_3.replace("Persistent.st.store(42, new Account());", "Persistent.st.store(42, new Source());")
    with pytest.raises(CoplRuntimeError, match="resolved to a 'Source' object, expected 'Account'"):
        run(src)


def test_step_budget():
    src = "class Main { int f(int n) { return f(n + 1); } void main() { f(0); } }"
    with pytest.raises(StepLimitExceeded):
        run(src, max_steps=500)


def test_call_depth_limit():
    src = "class Main { int f(int n) { return f(n + 1); } void main() { f(0); } }"
    with pytest.raises(CoplRuntimeError, match="call depth"):
        run(src)


def test_recursion_is_allowed():
    src = """class Main {
    int sum(int n) { if (n == 0) return 0; return n + sum(n - 1); }
    void main() { print(sum(100)); }
}"""
    assert run(src).stdout == "5050"


# -- expressions


@pytest.mark.parametrize("body, out", [
    ("double t = 0.0; double m = 100.0; t += m; print(t);", "100"),
    ("int i = 5; int j = i++; print(j + \" \" + i);", "5 6"),
    ("int i = 5; int j = --i; print(j + \" \" + i);", "4 4"),
    ("double d = 1; print(d + 0.5);", "1.5"),
    ("long l = 2; l -= 5; print(-l);", "3"),
    ('String s = "a"; s += 1; s += 2.5; print(s);', "a12.5"),
    ("if (1 < 2) print(\"y\"); else print(\"n\");", "y"),
    ("if (2 < 1) print(\"y\"); else print(\"n\");", "n"),
    ("if (1 != 1) print(\"y\");", ""),
    ("print(\"\");", ""),
    ('print(" * getBalance is called\\n");', " * getBalance is called\n"),
])
def test_expression_semantics(body, out):
    assert run("class Main { void main() { " + body + " } }").stdout == out


def test_arithmetic_on_void_is_rejected_statically():
    with pytest.raises(CheckError, match="got int and void"):
        run("class Main { void f() { } void main() { print(1 + f()); } }")


def test_context_reads_static_through_instance(listing2_3):
    src = listing2_3.replace('print("> Start of resolution\\n");',
                             'print("> Start of resolution\\n"); context.st.open(); context.st.close();')
    result = run(src)
    assert "open Storage#1" in result.trace


def test_runs_are_independent(listing4):
    checked = copl.load(listing4)
    first = Interpreter(checked).run_main()
    second = Interpreter(checked).run_main()
    assert first == second
