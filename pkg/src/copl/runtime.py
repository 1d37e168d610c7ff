"""Tree-walking interpreter for checked COP-lite programs.

Objects live in an append-only :class:`ObjectTable` and are addressed by
:class:`RootHandle` values.  Values of a type with a nonempty reference schema
are :class:`ComplexReferenceValue` instances instead: one segment per ancestor
concept, outermost first.  Calling a method on such a value builds a
:class:`ResolutionChain`.  The chain runs the reference ``continue`` method of
each segment in turn; each ``continue`` resolves its segment to a handle
``r`` and calls ``r.continue()``, which binds ``r`` as the ``context`` of the
next step.  After the last segment the business method runs on the resolved
object, and its return value travels back through the chain's result slot.
"""

from __future__ import annotations

import io
import sys
from dataclasses import dataclass, field
from typing import Callable

from copl.builtins import MapInstance, StorageInstance, render
from copl.errors import CoplRuntimeError, StepLimitExceeded, UnresolvedSegment
from copl.nodes import (
    Assign, Binary, Block, Call, ClassDecl, ConceptDecl, ContextExpr, CreateInit,
    ExprStmt, FieldAccess, FieldDecl, If, IncDec, Literal, MethodDecl, Name, New,
    RefConstruct, Return, Unary, VarDecl,
)
from copl.semantics import CheckedProgram

DEFAULT_MAX_STEPS = 1_000_000
MAX_CALL_DEPTH = 800


class _Nil:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "nil"


NIL = _Nil()


@dataclass(frozen=True)
class RootHandle:
    index: int

    def __repr__(self) -> str:
        return f"#{self.index}"


@dataclass(frozen=True)
class SegmentValue:
    concept: str
    fields: tuple[tuple[str, object], ...]

    def get(self, name: str):
        for k, v in self.fields:
            if k == name:
                return v
        raise KeyError(name)

    def has(self, name: str) -> bool:
        return any(k == name for k, _ in self.fields)


@dataclass(frozen=True)
class ComplexReferenceValue:
    target_type: str
    segments: tuple[SegmentValue, ...]

    def __repr__(self) -> str:
        inner = ", ".join(
            "{" + seg.concept + ": " + ", ".join(f"{k}={v!r}" for k, v in seg.fields) + "}"
            for seg in self.segments
        )
        return f"{self.target_type}@<{inner}>"


@dataclass
class RuntimeObject:
    type_name: str
    fields: dict[str, object]
    parent_context: RootHandle | None = None


class ObjectTable:
    def __init__(self) -> None:
        self.entries: list[RuntimeObject] = []
        self.singletons: dict[str, RootHandle] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def append(self, obj: RuntimeObject) -> RootHandle:
        self.entries.append(obj)
        return RootHandle(len(self.entries) - 1)

    def materialize(self, type_name: str, fields: dict[str, object]) -> RootHandle:
        return self.append(RuntimeObject(type_name, dict(fields)))

    def get(self, handle) -> RuntimeObject:
        if handle is NIL or handle is None:
            raise CoplRuntimeError("nil dereference")
        if not isinstance(handle, RootHandle):
            raise CoplRuntimeError(f"expected an object handle, got {handle!r}")
        return self.entries[handle.index]


@dataclass
class ResolutionChain:
    """Pending continuation steps of one invocation on a complex reference.

    ``steps`` are the segments whose ``continue`` methods still have to run;
    the terminal step (index ``len(steps)``) is either the business method or,
    for dual methods, the reference-class method of the innermost segment.
    """

    ref: ComplexReferenceValue
    steps: tuple[SegmentValue, ...]
    method: str
    args: list
    dual: str | None = None  # concept whose reference method is the terminal
    cursor: int = 0
    pending_context: RootHandle | None = None
    result: object = None


@dataclass
class Frame:
    decl: ConceptDecl | ClassDecl
    section: str  # "class" | "reference"
    method: MethodDecl
    scopes: list[dict[str, list]] = field(default_factory=list)  # name -> [type, value]
    this: RootHandle | None = None
    segment: SegmentValue | None = None
    context: RootHandle | None = None
    chain: ResolutionChain | None = None
    step: int | None = None

    @property
    def body(self):
        return self.decl.reference_class if self.section == "reference" else self.decl.object_class

    @property
    def where(self) -> str:
        return f"{self.decl.name}.{self.method.name}"

    def local(self, name: str) -> list | None:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None


class _ReturnSignal(Exception):
    def __init__(self, value):
        self.value = value


def default_value(type_name: str):
    if type_name in ("int", "long"):
        return 0
    if type_name == "double":
        return 0.0
    if type_name == "String":
        return ""
    return NIL


def coerce(value, type_name: str):
    if type_name == "double" and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    return value


def _numeric(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


@dataclass
class RunResult:
    stdout: str
    trace: list[str]
    value: object = None


class Interpreter:
    def __init__(self, program: CheckedProgram, *, max_steps: int = DEFAULT_MAX_STEPS,
                 trace: Callable[[str], None] | None = None, stdout=None):
        self.program = program
        self.h = program.hierarchy
        self.max_steps = max_steps
        self.steps = 0
        self.depth = 0
        self.table = ObjectTable()
        self.statics: dict[str, dict[str, object]] = {}
        self.chains: list[ResolutionChain] = []
        self.storages: list[StorageInstance] = []
        self.maps: list[MapInstance] = []
        self.trace_events: list[str] = []
        self._trace_sink = trace
        self.out = stdout if stdout is not None else io.StringIO()
        self._initialized = False

    # -- plumbing

    def trace(self, event: str) -> None:
        self.trace_events.append(event)
        if self._trace_sink is not None:
            self._trace_sink(f"TRACE {event}")

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.max_steps:
            raise StepLimitExceeded(f"step budget of {self.max_steps} exceeded")

    def new_builtin(self, type_name: str):
        if type_name == "Storage":
            st = StorageInstance(f"Storage#{len(self.storages) + 1}", self.table, self.trace)
            self.storages.append(st)
            return st
        m = MapInstance(f"Map#{len(self.maps) + 1}")
        self.maps.append(m)
        return m

    def field_initial(self, f: FieldDecl):
        if isinstance(f.init, CreateInit):
            return self.new_builtin(f.type_name)
        if f.init is not None:
            return coerce(f.init.value, f.type_name)
        return default_value(f.type_name)

    # -- program start-up

    def initialize(self) -> None:
        if self._initialized:
            return
        self._initialized = True
        for d in self.program.program.decls:
            self.statics[d.name] = {f.name: self.field_initial(f) for f in d.object_class.fields if f.static}
        # Concepts that need no representation get one well-known instance:
        # the context in which their first-level references are resolved.
        for d in self.program.program.decls:
            if isinstance(d, ConceptDecl) and not self.program.is_reference_type(d.name):
                self.table.singletons[d.name] = self.instantiate(d.name, None)

    def run_main(self) -> RunResult:
        old_limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old_limit, 50 * MAX_CALL_DEPTH))
        try:
            self.initialize()
            main = self.instantiate("Main", None)
            self.call_method(main, "main", [])
        except RecursionError:
            raise CoplRuntimeError("call depth limit exceeded") from None
        finally:
            sys.setrecursionlimit(old_limit)
        return RunResult(self.output(), list(self.trace_events))

    def output(self) -> str:
        return self.out.getvalue() if isinstance(self.out, io.StringIO) else ""

    # -- objects and references

    def instantiate(self, type_name: str, ctx: RootHandle | None) -> RootHandle:
        if type_name not in self.h:
            raise CoplRuntimeError(f"unknown type '{type_name}'")
        decl = self.h.decl(type_name)
        fields = {f.name: self.field_initial(f) for f in decl.object_class.instance_fields}
        return self.table.append(RuntimeObject(type_name, fields, ctx))

    def construct_reference(self, type_name: str, values: list) -> ComplexReferenceValue:
        schema = self.program.schemas[type_name]
        it = iter(values)
        segments = []
        for seg in schema.segments:
            segments.append(SegmentValue(seg.concept, tuple((n, coerce(next(it), t)) for n, t in seg.fields)))
        return ComplexReferenceValue(type_name, tuple(segments))

    def read_field(self, handle, name: str):
        obj = self.table.get(handle)
        if name in obj.fields:
            return obj.fields[name]
        statics = self.statics.get(obj.type_name, {})
        if name in statics:
            return statics[name]
        raise CoplRuntimeError(f"'{obj.type_name}' has no field '{name}'")

    def write_field(self, handle, name: str, value) -> None:
        obj = self.table.get(handle)
        decl = self.h.decl(obj.type_name)
        f = decl.object_class.field(name)
        if f is None:
            raise CoplRuntimeError(f"'{obj.type_name}' has no field '{name}'")
        value = coerce(value, f.type_name)
        if f.static:
            self.statics[obj.type_name][name] = value
        else:
            obj.fields[name] = value

    # -- invocation

    def run_method(self, frame: Frame, args: list):
        self.tick()
        if self.depth >= MAX_CALL_DEPTH:
            raise CoplRuntimeError("call depth limit exceeded")
        m = frame.method
        frame.scopes.append({p.name: [p.type_name, coerce(a, p.type_name)] for p, a in zip(m.params, args)})
        self.depth += 1
        try:
            self.exec_block(m.body, frame)
        except _ReturnSignal as ret:
            return coerce(ret.value, m.return_type)
        except CoplRuntimeError as err:
            if err.where is None:
                err.where = frame.where
            raise
        finally:
            self.depth -= 1
        return None

    def call_method(self, handle: RootHandle, name: str, args: list):
        """Direct (root) dispatch: no resolution chain is involved."""
        obj = self.table.get(handle)
        decl = self.h.decl(obj.type_name)
        m = decl.object_class.method(name)
        if m is None:
            raise CoplRuntimeError(f"'{obj.type_name}' has no method '{name}'")
        if len(m.params) != len(args):
            raise CoplRuntimeError(f"'{obj.type_name}.{name}' expects {len(m.params)} arguments, got {len(args)}")
        self.trace(f"call {obj.type_name}.{name}")
        return self.run_method(Frame(decl, "class", m, this=handle), args)

    def dual_concept(self, ref: ComplexReferenceValue, name: str) -> str | None:
        if name == "continue" or not ref.segments:
            return None
        innermost = ref.segments[-1].concept
        return innermost if self.h.decl(innermost).reference_class.method(name) is not None else None

    def invoke(self, ref: ComplexReferenceValue, name: str, args: list):
        """Call ``name`` on the object behind ``ref``, resolving every segment first."""
        dual = self.dual_concept(ref, name)
        steps = ref.segments[:-1] if dual else ref.segments
        chain = ResolutionChain(ref, steps, name, list(args), dual)
        chain.pending_context = self.table.singletons[ref.segments[0].concept]
        self.chains.append(chain)
        try:
            self.run_step(chain, 0, chain.pending_context)
        finally:
            self.chains.pop()
            if not self.chains:
                for st in self.storages:
                    if st.open_count == 0:
                        st.live.clear()
        return chain.result

    def _expect_type(self, handle: RootHandle, type_name: str, what: str) -> None:
        actual = self.table.get(handle).type_name
        if actual != type_name:
            raise CoplRuntimeError(f"{what} resolved to a '{actual}' object, expected '{type_name}'")

    def run_step(self, chain: ResolutionChain, index: int, context: RootHandle) -> None:
        if index < len(chain.steps):
            seg = chain.steps[index]
            if index > 0:
                self._expect_type(context, seg.concept, f"segment {chain.steps[index - 1].concept}")
            decl = self.h.decl(seg.concept)
            m = decl.reference_class.method("continue")
            if m is None:
                raise CoplRuntimeError(f"concept '{seg.concept}' has no reference 'continue' method")
            self.trace(f"enter {seg.concept} seg={index + 1}")
            self.run_method(Frame(decl, "reference", m, segment=seg, context=context, chain=chain, step=index), [])
            self.trace(f"exit {seg.concept} seg={index + 1}")
            return

        if chain.dual is not None:
            seg = chain.ref.segments[-1]
            self._expect_type(context, chain.dual, "reference context")
            decl = self.h.decl(chain.dual)
            m = decl.reference_class.method(chain.method)
            self.trace(f"call {chain.dual}.{chain.method}")
            chain.result = self.run_method(Frame(decl, "reference", m, segment=seg, context=context), chain.args)
            return

        what = f"segment {chain.steps[-1].concept}" if chain.steps else "reference"
        self._expect_type(context, chain.ref.target_type, what)
        chain.result = self.call_method(context, chain.method, chain.args)

    def chain_continue(self, frame: Frame, handle) -> None:
        chain = frame.chain
        if chain is None:
            raise CoplRuntimeError("continue outside resolution")
        if handle is NIL or handle is None:
            raise CoplRuntimeError("continue on a nil reference")
        if not isinstance(handle, RootHandle):
            raise CoplRuntimeError(f"continue needs an object handle, got {handle!r}")
        if chain.cursor != frame.step:
            raise CoplRuntimeError("continue called twice in one resolution step")
        chain.cursor += 1
        chain.pending_context = handle
        self.run_step(chain, chain.cursor, handle)

    # -- statements

    def exec_block(self, block: Block, frame: Frame) -> None:
        frame.scopes.append({})
        try:
            for s in block.stmts:
                self.exec_stmt(s, frame)
        finally:
            frame.scopes.pop()

    def exec_stmt(self, s, frame: Frame) -> None:
        self.tick()
        try:
            if isinstance(s, ExprStmt):
                self.eval(s.expr, frame)
            elif isinstance(s, VarDecl):
                value = default_value(s.type_name) if s.init is None else self.eval(s.init, frame)
                frame.scopes[-1][s.name] = [s.type_name, coerce(value, s.type_name)]
            elif isinstance(s, If):
                cond = self.eval(s.cond, frame)
                if not isinstance(cond, bool):
                    raise CoplRuntimeError("condition did not produce a truth value")
                if cond:
                    self.exec_stmt(s.then, frame)
                elif s.otherwise is not None:
                    self.exec_stmt(s.otherwise, frame)
            elif isinstance(s, Return):
                raise _ReturnSignal(None if s.value is None else self.eval(s.value, frame))
            elif isinstance(s, Block):
                self.exec_block(s, frame)
            else:
                raise TypeError(f"unknown statement {s!r}")
        except CoplRuntimeError as err:
            if err.line is None:
                err.line, err.column = s.loc.line, s.loc.column
            raise

    # -- expressions

    def is_variable(self, name: str, frame: Frame) -> bool:
        return frame.local(name) is not None or frame.body.field(name) is not None

    def eval(self, e, frame: Frame):
        try:
            return self._eval(e, frame)
        except CoplRuntimeError as err:
            if err.line is None:
                err.line, err.column = e.loc.line, e.loc.column
            raise

    def _eval(self, e, frame: Frame):
        if isinstance(e, Literal):
            return e.value
        if isinstance(e, Name):
            return self.load_name(e.name, frame)
        if isinstance(e, ContextExpr):
            return frame.context
        if isinstance(e, FieldAccess):
            t = e.target
            if isinstance(t, Name) and not self.is_variable(t.name, frame) and t.name in self.statics:
                return self.statics[t.name][e.name]
            return self.read_field(self.eval(t, frame), e.name)
        if isinstance(e, Call):
            return self.eval_call(e, frame)
        if isinstance(e, New):
            if e.type_name in ("Storage", "Map"):
                return self.new_builtin(e.type_name)
            return self.instantiate(e.type_name, frame.context if frame.context is not None else frame.this)
        if isinstance(e, RefConstruct):
            return self.construct_reference(e.type_name, [self.eval(a, frame) for a in e.args])
        if isinstance(e, Assign):
            if e.op == "=":
                value = self.eval(e.value, frame)
            else:
                current = self.eval(e.target, frame)
                value = self.arith("+" if e.op == "+=" else "-", current, self.eval(e.value, frame))
            return self.store(e.target, value, frame)
        if isinstance(e, IncDec):
            old = self.eval(e.target, frame)
            new = self.arith("+" if e.op == "++" else "-", old, 1)
            self.store(e.target, new, frame)
            return new if e.prefix else old
        if isinstance(e, Unary):
            v = self.eval(e.operand, frame)
            if not _numeric(v):
                raise CoplRuntimeError(f"unary '-' on {self.describe(v)}")
            return -v
        if isinstance(e, Binary):
            left = self.eval(e.left, frame)
            right = self.eval(e.right, frame)
            return self.binary(e.op, left, right)
        raise TypeError(f"unknown expression {e!r}")

    @staticmethod
    def describe(v) -> str:
        return "void" if v is None else repr(v)

    def arith(self, op: str, a, b):
        if op == "+" and (isinstance(a, str) or isinstance(b, str)):
            return render(a) + render(b)
        if not (_numeric(a) and _numeric(b)):
            raise CoplRuntimeError(f"arithmetic on {self.describe(a)} and {self.describe(b)}")
        return a + b if op == "+" else a - b

    def binary(self, op: str, a, b):
        if op in ("+", "-"):
            return self.arith(op, a, b)
        if a is None or b is None:
            raise CoplRuntimeError("comparison with void")
        if op == "==":
            return a == b
        if op == "!=":
            return a != b
        if not (_numeric(a) and _numeric(b)):
            raise CoplRuntimeError(f"'{op}' on {self.describe(a)} and {self.describe(b)}")
        return a < b if op == "<" else a > b

    def load_name(self, name: str, frame: Frame):
        var = frame.local(name)
        if var is not None:
            return var[1]
        if frame.segment is not None and frame.segment.has(name):
            return frame.segment.get(name)
        if frame.this is not None:
            return self.read_field(frame.this, name)
        f = frame.body.field(name)
        if f is not None and f.static:
            return self.statics[frame.decl.name][name]
        raise CoplRuntimeError(f"undefined name '{name}'")

    def store(self, target, value, frame: Frame):
        if isinstance(target, Name):
            var = frame.local(target.name)
            if var is not None:
                var[1] = coerce(value, var[0])
                return var[1]
            if frame.this is not None:
                self.write_field(frame.this, target.name, value)
                return self.read_field(frame.this, target.name)
            f = frame.body.field(target.name)
            if f is not None and f.static and frame.section == "class":
                self.statics[frame.decl.name][target.name] = coerce(value, f.type_name)
                return self.statics[frame.decl.name][target.name]
            raise CoplRuntimeError(f"cannot assign to '{target.name}'")
        t = target.target
        if isinstance(t, Name) and not self.is_variable(t.name, frame) and t.name in self.statics:
            f = self.h.decl(t.name).object_class.field(target.name)
            self.statics[t.name][target.name] = coerce(value, f.type_name)
            return self.statics[t.name][target.name]
        handle = self.eval(t, frame)
        self.write_field(handle, target.name, value)
        return self.read_field(handle, target.name)

    def eval_call(self, e: Call, frame: Frame):
        if e.receiver is None:
            args = [self.eval(a, frame) for a in e.args]
            m = frame.body.method(e.name)
            if m is not None:
                self.trace(f"call {frame.decl.name}.{e.name}")
                callee = Frame(frame.decl, frame.section, m, this=frame.this,
                               segment=frame.segment, context=frame.context)
                return self.run_method(callee, args)
            if e.name == "print":
                self.out.write(render(args[0]))
                return None
            raise CoplRuntimeError(f"undefined method '{e.name}'")

        recv = self.eval(e.receiver, frame)
        args = [self.eval(a, frame) for a in e.args]
        if id(e) in self.program.continue_calls:
            self.chain_continue(frame, recv)
            return None
        if isinstance(recv, ComplexReferenceValue):
            return self.invoke(recv, e.name, args)
        if isinstance(recv, RootHandle):
            return self.call_method(recv, e.name, args)
        if isinstance(recv, StorageInstance):
            return self.storage_call(recv, e.name, args, frame)
        if isinstance(recv, MapInstance):
            try:
                return recv.put(*args) if e.name == "put" else recv.get(*args)
            except UnresolvedSegment as err:
                if frame.segment is not None:
                    err.attach_segment(frame.decl.name)
                raise
        if recv is NIL:
            raise CoplRuntimeError(f"nil dereference calling '{e.name}'")
        raise CoplRuntimeError(f"cannot call '{e.name}' on {self.describe(recv)}")

    def storage_call(self, st: StorageInstance, name: str, args: list, frame: Frame):
        if name == "store":
            return st.store(args[0], args[1])
        if name == "load":
            try:
                return st.load(args[0], cache=st.open_count > 0 or bool(self.chains))
            except UnresolvedSegment as err:
                if frame.segment is not None:
                    err.attach_segment(frame.decl.name)
                raise
        if name == "open":
            return st.open()
        if name == "close":
            return st.close()
        raise CoplRuntimeError(f"Storage has no method '{name}'")


def run(program: CheckedProgram, **kwargs) -> RunResult:
    return Interpreter(program, **kwargs).run_main()
