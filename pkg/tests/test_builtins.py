import pytest
from hypothesis import given, strategies as st

from copl.builtins import MapInstance, StorageInstance, format_number, render
from copl.errors import CoplRuntimeError, UnresolvedSegment
from copl.runtime import NIL, ObjectTable, RootHandle, RuntimeObject


@pytest.fixture
def table():
    return ObjectTable()


@pytest.fixture
def events():
    return []


@pytest.fixture
def storage(table, events):
    return StorageInstance("Storage#1", table, events.append)


def account(table, b=0.0):
    return table.append(RuntimeObject("Account", {"b": b}))


def test_store_then_load(table, storage):
    storage.store(42, account(table))
    loaded = storage.load(42, cache=False)
    assert table.get(loaded).fields == {"b": 0.0}


def test_last_write_wins(table, storage):
    h = account(table)
    storage.store(42, h)
    table.get(h).fields["b"] = 100.0
    storage.store(42, h)
    assert table.get(storage.load(42, cache=False)).fields["b"] == 100.0


def test_snapshot_isolation(table, storage):
    h = account(table)
    storage.store(1, h)
    live = storage.load(1, cache=False)
    table.get(live).fields["b"] = 5.0
    assert table.get(storage.load(1, cache=False)).fields["b"] == 0.0
    assert storage.load(1, cache=False) != live


def test_store_nil(storage):
    with pytest.raises(CoplRuntimeError, match="nil"):
        storage.store(42, NIL)


def test_load_miss(storage):
    with pytest.raises(UnresolvedSegment, match="unresolved reference segment: Storage key 7"):
        storage.load(7, cache=False)


def test_cached_loads_share_identity(table, storage):
    storage.store(42, account(table))
    first = storage.load(42, cache=True)
    table.get(first).fields["b"] = 3.0
    second = storage.load(42, cache=True)
    assert first == second
    assert table.get(second).fields["b"] == 3.0


def test_open_close(storage, events):
    storage.open()
    storage.close()
    assert storage.open_count == 0
    assert events == ["open Storage#1", "close Storage#1"]


def test_close_clears_live_objects(table, storage):
    storage.store(1, account(table))
    storage.open()
    first = storage.load(1, cache=True)
    storage.close()
    assert storage.load(1, cache=True) != first


def test_close_when_not_open(storage):
    with pytest.raises(CoplRuntimeError, match="not open"):
        storage.close()


def test_map_semantics():
    m = MapInstance("Map#1")
    a, b = RootHandle(1), RootHandle(2)
    m.put("db1", a)
    assert m.get("db1") == a
    m.put("db1", b)
    assert m.get("db1") == b
    with pytest.raises(UnresolvedSegment, match="Map key nope"):
        m.get("nope")
    with pytest.raises(CoplRuntimeError):
        m.put("x", NIL)


@pytest.mark.parametrize("value, text", [
    (100.0, "100"), (2.5, "2.5"), (-0.0, "0"), (7, "7"), (-3, "-3"), (0.1, "0.1"),
    (1e20, "100000000000000000000"),
])
def test_number_rendering(value, text):
    assert format_number(value) == text


def test_render():
    assert render("< End of resolution\n") == "< End of resolution\n"
    assert render("") == ""
    with pytest.raises(CoplRuntimeError, match="void"):
        render(None)


field_values = st.one_of(
    st.integers(-2**63, 2**63 - 1),
    st.floats(allow_nan=False),
    st.text(),
)


@given(st.dictionaries(st.from_regex(r"[a-z]\w{0,5}", fullmatch=True), field_values),
       st.integers(0, 2**40))
def test_storage_round_trip(fields, key):
    table = ObjectTable()
    storage = StorageInstance("Storage#1", table)
    h = table.append(RuntimeObject("T", dict(fields)))
    storage.store(key, h)
    loaded = table.get(storage.load(key, cache=False))
    assert loaded.type_name == "T"
    assert loaded.fields == fields
