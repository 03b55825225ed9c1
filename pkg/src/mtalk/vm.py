"""Model VM: the runtime that turns compiled models into live object graphs.

Loading takes an error-free compiled model. Instances are built on demand,
one per bean id (inline beans are anonymous and fresh), with property values
injected in declared property order. A reference to a class injects the class
reified as an instance of its metaclass (its MetaView). Native bindings are
resolved along the class lineage: a declarative class is served by its
nearest natively bound ancestor. Reload swaps the entire model snapshot in
one step: a request observes either the old model or the new one, never a
mixture.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from types import MappingProxyType

from .compiler import CompiledModel, CompileState
from .errors import ModelError, NotFoundError, WrongKindError
from .ids import ElementId
from .kernel import ElementKind, PropertyDefinition, ResolvedModel, TypeRef
from .native import NativeManifest, NativeRegistry
from .source import InlineBean, RefValue, ScalarValue, ValueExpr


class VmError(ModelError):
    pass


class LoadRefusedError(VmError):
    """The model has compile errors; the VM keeps whatever it had."""


class AbstractInstantiationError(VmError):
    """E005 at runtime: the requested bean is an abstract template."""


class InjectionError(VmError):
    """Injection hit a state only possible for unvalidated models."""


@dataclass(frozen=True)
class RuntimeInstance:
    """A materialized bean: identity, class, native binding, injected values."""

    class_id: ElementId
    bean_id: ElementId | None
    native: str | None
    values: MappingProxyType
    native_object: object = None

    def value(self, name: str):
        return self.values[name]


@dataclass(frozen=True)
class MetaView(RuntimeInstance):
    """A class reified as an instance of its metaclass.

    class_id is the metaclass; target is the class being viewed; values are
    the class-level assignments merged down the subclass chain.
    """

    target: ElementId = None  # type: ignore[assignment]


class _Snapshot:
    """One immutable world: compiled model, registry, instance caches."""

    __slots__ = ("compiled", "model", "registry", "manifest", "instances", "metaviews", "lock")

    def __init__(self, compiled: CompiledModel, registry: NativeRegistry | None):
        self.compiled = compiled
        self.model: ResolvedModel = compiled.resolved
        self.registry = registry
        self.manifest: NativeManifest | None = (
            registry.manifest if registry is not None else compiled.manifest
        )
        self.instances: dict[ElementId, RuntimeInstance] = {}
        self.metaviews: dict[ElementId, MetaView] = {}
        self.lock = threading.RLock()


class VmHandle:
    """Handle to a running VM; reload swaps its snapshot atomically."""

    def __init__(self, snapshot: _Snapshot):
        self._snap = snapshot

    @property
    def compiled(self) -> CompiledModel:
        return self._snap.compiled

    @property
    def model(self) -> ResolvedModel:
        return self._snap.model


def _as_compiled(model) -> CompiledModel:
    if isinstance(model, CompileState):
        return model.model()
    if isinstance(model, CompiledModel):
        return model
    raise TypeError("expected CompiledModel or CompileState")


def load(compiled, registry: NativeRegistry | None = None) -> VmHandle:
    """Load an error-free compiled model."""
    compiled = _as_compiled(compiled)
    if not compiled.error_free:
        n = sum(1 for d in compiled.diagnostics if d.severity.value == "error")
        raise LoadRefusedError(f"model has {n} compile error(s); refusing to load")
    return VmHandle(_Snapshot(compiled, registry))


def reload(vm: VmHandle, compiled, registry: NativeRegistry | None = None) -> None:
    """Atomically replace the VM's model. On refusal the old model stays."""
    compiled = _as_compiled(compiled)
    if not compiled.error_free:
        n = sum(1 for d in compiled.diagnostics if d.severity.value == "error")
        raise LoadRefusedError(f"model has {n} compile error(s); keeping current model")
    vm._snap = _Snapshot(compiled, registry if registry is not None else vm._snap.registry)


# ---------------------------------------------------------------------------
# Identity helpers


def _resolve_id(snap: _Snapshot, ref) -> ElementId:
    if isinstance(ref, ElementId):
        eid = snap.model.lookup(ref)
    elif isinstance(ref, str):
        eid = snap.model.lookup(ElementId.parse(ref))
    else:
        raise TypeError("bean reference must be an ElementId or string")
    if eid is None:
        shown = ref.render() if isinstance(ref, ElementId) else ref
        raise NotFoundError(f"unknown bean '{shown}'")
    return eid


# ---------------------------------------------------------------------------
# Value merging


def _template_chain(model: ResolvedModel, eid: ElementId) -> list[ElementId]:
    """Instance bean and its parent templates, nearest first, cycle-safe."""
    chain = [eid]
    seen = {eid}
    cur = eid
    while True:
        pref = model.elements[cur].decl.parent_ref
        if pref is None:
            return chain
        nxt = model.lookup(pref)
        if nxt is None or nxt in seen or model.elements[nxt].kind is not ElementKind.INSTANCE:
            return chain
        chain.append(nxt)
        seen.add(nxt)
        cur = nxt


def effective_values(vm_or_model, bean_id) -> dict[str, ValueExpr]:
    """Raw merged assignment map for a bean.

    Instance beans merge down the parent-template chain; class beans merge
    class-level assignments down the subclass chain. Nearer wins.
    """
    if isinstance(vm_or_model, VmHandle):
        model = vm_or_model._snap.model
    else:
        model = vm_or_model
    if isinstance(bean_id, str):
        found = model.lookup(ElementId.parse(bean_id))
        if found is None:
            raise NotFoundError(f"unknown bean '{bean_id}'")
        bean_id = found
    entry = model.elements.get(bean_id)
    if entry is None:
        raise NotFoundError(f"unknown bean '{bean_id.render()}'")
    if entry.kind is ElementKind.INSTANCE:
        chain = _template_chain(model, bean_id)
        sources = [model.elements[b].decl.assignments for b in chain]
    else:
        chain = model.lineage(bean_id)
        sources = [model.classes[c].class_assignments for c in chain]
    merged: dict[str, ValueExpr] = {}
    for assignments in reversed(sources):
        for name, expr in assignments:
            merged[name] = expr
    return merged


# ---------------------------------------------------------------------------
# Instantiation


def _scalar(expr: ScalarValue, t: TypeRef):
    text = expr.text
    if t.builtin == "String":
        return text
    s = text.strip()
    if t.builtin == "Long":
        return int(s)
    if t.builtin == "Double":
        return float(s)
    if t.builtin == "Boolean":
        return s == "true"
    raise InjectionError(f"cannot inject scalar into {t.render()}")


def _convert(snap: _Snapshot, expr: ValueExpr, t: TypeRef, stack: tuple):
    if t.is_builtin:
        if not isinstance(expr, ScalarValue):
            raise InjectionError(f"non-scalar value for {t.builtin} property")
        return _scalar(expr, t)
    if isinstance(expr, RefValue):
        target = snap.model.lookup(expr.target)
        if target is None:
            raise InjectionError(f"unresolved reference '{expr.written}'")
        if snap.model.elements[target].kind is ElementKind.INSTANCE:
            return _instance(snap, target, stack)
        return _meta_view(snap, target, stack)
    if isinstance(expr, InlineBean):
        cls = snap.model.lookup(expr.class_ref)
        if cls is None or cls not in snap.model.classes:
            raise InjectionError(f"unresolved inline class '{expr.written_class}'")
        return _build(snap, None, cls, dict(expr.assignments), stack)
    raise InjectionError(f"scalar value where {t.render()} was expected")


def _build(
    snap: _Snapshot,
    bean_id: ElementId | None,
    class_id: ElementId,
    raw: dict[str, ValueExpr],
    stack: tuple,
) -> RuntimeInstance:
    key = bean_id if bean_id is not None else ("inline", id(raw))
    if key in stack:
        raise InjectionError(f"injection cycle at '{class_id.render()}'")
    stack = stack + (key,)
    values: dict[str, object] = {}
    for p in snap.model.effective_properties(class_id):
        if p.name not in raw or p.type.is_unresolved:
            continue
        values[p.name] = _convert(snap, raw[p.name], p.type, stack)
    native = resolve_native(snap, class_id)
    native_object = None
    if native is not None and snap.registry is not None:
        factory = snap.registry.factory_for(native)
        if factory is not None:
            native_object = factory(dict(values))
    return RuntimeInstance(
        class_id=class_id,
        bean_id=bean_id,
        native=native,
        values=MappingProxyType(values),
        native_object=native_object,
    )


def _instance(snap: _Snapshot, eid: ElementId, stack: tuple) -> RuntimeInstance:
    cached = snap.instances.get(eid)
    if cached is not None:
        return cached
    entry = snap.model.elements[eid]
    if entry.kind is not ElementKind.INSTANCE:
        raise WrongKindError(f"'{eid.render()}' is a class; request its MetaView instead")
    if entry.decl.abstract:
        raise AbstractInstantiationError(f"bean '{eid.render()}' is abstract")
    cls = snap.model.lookup(entry.decl.class_ref)
    if cls is None or cls not in snap.model.classes:
        raise InjectionError(f"bean '{eid.render()}' has no resolvable class")
    with snap.lock:
        cached = snap.instances.get(eid)
        if cached is not None:
            return cached
        inst = _build(snap, eid, cls, effective_values(snap.model, eid), stack)
        snap.instances[eid] = inst
        return inst


def _meta_view(snap: _Snapshot, class_id: ElementId, stack: tuple) -> MetaView:
    cached = snap.metaviews.get(class_id)
    if cached is not None:
        return cached
    cd = snap.model.classes.get(class_id)
    if cd is None:
        raise WrongKindError(f"'{class_id.render()}' is not a class")
    mc = cd.metaclass
    if mc is None or mc not in snap.model.classes:
        raise InjectionError(f"class '{class_id.render()}' has no resolvable metaclass")
    with snap.lock:
        cached = snap.metaviews.get(class_id)
        if cached is not None:
            return cached
        raw = effective_values(snap.model, class_id)
        key = ("meta", class_id)
        if key in stack:
            raise InjectionError(f"injection cycle at metaview '{class_id.render()}'")
        stack = stack + (key,)
        values: dict[str, object] = {}
        for p in snap.model.effective_properties(mc):
            if p.name not in raw or p.type.is_unresolved:
                continue
            values[p.name] = _convert(snap, raw[p.name], p.type, stack)
        native = resolve_native(snap, mc)
        native_object = None
        if native is not None and snap.registry is not None:
            factory = snap.registry.factory_for(native)
            if factory is not None:
                native_object = factory(dict(values))
        view = MetaView(
            class_id=mc,
            bean_id=class_id,
            native=native,
            values=MappingProxyType(values),
            native_object=native_object,
            target=class_id,
        )
        snap.metaviews[class_id] = view
        return view


# ---------------------------------------------------------------------------
# Public operations


def get_instance(vm: VmHandle, bean_id) -> RuntimeInstance:
    """The singleton runtime instance for a named instance bean."""
    snap = vm._snap  # one read: the whole request sees one snapshot
    eid = _resolve_id(snap, bean_id)
    return _instance(snap, eid, ())


def get_class(vm: VmHandle, ref) -> MetaView:
    """The MetaView for a class (by id, by instance, or by instance bean id)."""
    snap = vm._snap
    if isinstance(ref, RuntimeInstance):
        class_id = ref.class_id
    else:
        eid = _resolve_id(snap, ref)
        if eid in snap.model.classes:
            class_id = eid
        else:
            cls = snap.model.lookup(snap.model.elements[eid].decl.class_ref)
            if cls is None or cls not in snap.model.classes:
                raise InjectionError(f"bean '{eid.render()}' has no resolvable class")
            class_id = cls
    return _meta_view(snap, class_id, ())


def resolve_native(vm_or_snap, class_id) -> str | None:
    """Nearest natively bound class in the lineage: non-declarative and
    present in the manifest. None when the whole chain is declarative."""
    if isinstance(vm_or_snap, VmHandle):
        snap = vm_or_snap._snap
    else:
        snap = vm_or_snap
    model = snap.model
    if isinstance(class_id, str):
        found = model.lookup(ElementId.parse(class_id))
        if found is None:
            raise NotFoundError(f"unknown class '{class_id}'")
        class_id = found
    model.require_class(class_id)
    manifest = snap.manifest
    if manifest is None:
        return None
    for anc in model.lineage(class_id):
        cd = model.classes[anc]
        if not cd.is_declarative and manifest.get(anc.render()) is not None:
            return anc.render()
    return None


def is_instance_of(vm: VmHandle, inst: RuntimeInstance, class_ref) -> bool:
    """True when inst's class is class_ref or a subclass of it."""
    snap = vm._snap
    if isinstance(class_ref, str):
        target = snap.model.lookup(ElementId.parse(class_ref))
    else:
        target = snap.model.lookup(class_ref)
    if target is None or target not in snap.model.classes:
        return False
    return target in snap.model.ancestor_set(inst.class_id)


def reflect_properties(vm: VmHandle, ref) -> tuple[PropertyDefinition, ...]:
    """Effective (inherited plus own) properties of a class or an instance's class."""
    snap = vm._snap
    if isinstance(ref, RuntimeInstance):
        class_id = ref.class_id
    else:
        class_id = _resolve_id(snap, ref)
    snap.model.require_class(class_id)
    return snap.model.effective_properties(class_id)


def dump_instance(inst: RuntimeInstance) -> dict:
    """JSON-ready view: class, native binding, values in injection order."""
    values = {}
    for name, v in inst.values.items():
        values[name] = dump_instance(v) if isinstance(v, RuntimeInstance) else v
    return {"class": inst.class_id.render(), "native": inst.native, "values": values}
