"""Typed dependency graph over model elements, with fast closure queries.

Edges capture every way one element's meaning can depend on another's.
Closures run on a CSR adjacency via a compiled kernel when the extension
built, else a pure-Python twin; set MTALK_PURE=1 to force the fallback.
"""

from __future__ import annotations

import os
from array import array
from dataclasses import dataclass

from .ids import UNRESOLVED, ElementId
from .kernel import ElementKind, ResolvedModel
from .source import InlineBean, RefValue

if os.environ.get("MTALK_PURE") == "1":
    from . import _reach_py as _kernel

    REACH_IMPL = "pure"
else:
    try:
        from . import _reach as _kernel  # type: ignore[no-redef]

        REACH_IMPL = "compiled"
    except ImportError:
        from . import _reach_py as _kernel  # type: ignore[no-redef]

        REACH_IMPL = "pure"

INSTANCE_OF = "instance-of"
SUBCLASS_OF = "subclass-of"
PARENT_BEAN = "parent-bean"
PROPERTY_TYPE = "property-type"
VALUE_REF = "value-ref"
NATIVE_BINDING = "native-binding"

EDGE_KINDS = frozenset(
    (INSTANCE_OF, SUBCLASS_OF, PARENT_BEAN, PROPERTY_TYPE, VALUE_REF, NATIVE_BINDING)
)

# pseudo-namespace for manifest entry nodes; NUL can never appear in parsed names
MANIFEST_NS = "\x00manifest"


def manifest_node(class_id: ElementId) -> ElementId:
    return ElementId(MANIFEST_NS, class_id.render())


@dataclass(frozen=True, slots=True)
class Edge:
    src: ElementId
    dst: ElementId
    kind: str


class DependencyGraph:
    """Immutable edge set plus lazily built CSR indexes for closures."""

    def __init__(self, nodes, edges):
        self.nodes = frozenset(nodes)
        self.edges = frozenset(edges)
        self._order: list[ElementId] | None = None
        self._index: dict[ElementId, int] | None = None
        self._csr: dict[bool, tuple[array, array]] = {}
        self._out: dict[ElementId, tuple[Edge, ...]] | None = None
        self._in: dict[ElementId, tuple[Edge, ...]] | None = None

    def outgoing(self, element_id: ElementId) -> tuple[Edge, ...]:
        if self._out is None:
            buckets: dict[ElementId, list[Edge]] = {}
            for e in self.edges:
                buckets.setdefault(e.src, []).append(e)
            self._out = {k: tuple(sorted(v, key=lambda e: (e.dst.render(), e.kind))) for k, v in buckets.items()}
        return self._out.get(element_id, ())

    def incoming(self, element_id: ElementId) -> tuple[Edge, ...]:
        if self._in is None:
            buckets: dict[ElementId, list[Edge]] = {}
            for e in self.edges:
                buckets.setdefault(e.dst, []).append(e)
            self._in = {k: tuple(sorted(v, key=lambda e: (e.src.render(), e.kind))) for k, v in buckets.items()}
        return self._in.get(element_id, ())

    def _ensure_index(self):
        if self._index is None:
            self._order = sorted(self.nodes, key=ElementId.render)
            self._index = {eid: i for i, eid in enumerate(self._order)}

    def _adjacency(self, reverse: bool) -> tuple[array, array]:
        self._ensure_index()
        cached = self._csr.get(reverse)
        if cached is not None:
            return cached
        idx = self._index
        n = len(self._order)
        counts = [0] * (n + 1)
        pairs = []
        for e in self.edges:
            a, b = (e.dst, e.src) if reverse else (e.src, e.dst)
            ia, ib = idx[a], idx[b]
            pairs.append((ia, ib))
            counts[ia + 1] += 1
        for i in range(1, n + 1):
            counts[i] += counts[i - 1]
        indptr = array("i", counts)
        indices = array("i", bytes(4 * len(pairs))) if pairs else array("i")
        fill = list(indptr[:-1])
        for ia, ib in pairs:
            indices[fill[ia]] = ib
            fill[ia] += 1
        self._csr[reverse] = (indptr, indices)
        return indptr, indices

    def closure(self, seeds, reverse: bool = False) -> set[ElementId]:
        """Elements reachable from seeds (seeds included). reverse=True walks
        edges backwards: everything that depends on the seeds."""
        self._ensure_index()
        idx = self._index
        seed_ints = array("i", sorted({idx[s] for s in seeds if s in idx}))
        if not seed_ints:
            return set()
        indptr, indices = self._adjacency(reverse)
        flags = _kernel.reachable(indptr, indices, seed_ints, len(self._order))
        order = self._order
        return {order[i] for i, f in enumerate(flags) if f}

    def dependencies_of(self, element_id: ElementId) -> set[ElementId]:
        return self.closure([element_id], reverse=False)

    def dependents_of(self, element_id: ElementId) -> set[ElementId]:
        return self.closure([element_id], reverse=True)


def _value_edges(owner: ElementId, expr, lookup, edges):
    if isinstance(expr, RefValue):
        edges.add(Edge(owner, lookup(expr.target), VALUE_REF))
    elif isinstance(expr, InlineBean):
        edges.add(Edge(owner, lookup(expr.class_ref), INSTANCE_OF))
        for _, inner in expr.assignments:
            _value_edges(owner, inner, lookup, edges)


def build_dependency_graph(model: ResolvedModel) -> DependencyGraph:
    """Edges:

      instance-of    bean -> its class (inline beans' classes included)
      subclass-of    class -> its superclass (implicit Object included)
      parent-bean    instance -> its parent template
      property-type  class -> each class-typed own property's type
      value-ref      bean -> each bean referenced by an assignment value
      native-binding non-declarative class -> its manifest entry node

    Unresolved references point at the UNRESOLVED sentinel node.
    """
    edges: set[Edge] = set()
    nodes: set[ElementId] = set(model.elements)
    nodes.add(UNRESOLVED)

    def lookup(ref: ElementId) -> ElementId:
        t = model.lookup(ref)
        return t if t is not None else UNRESOLVED

    for eid, entry in model.elements.items():
        decl = entry.decl
        edges.add(Edge(eid, lookup(decl.class_ref), INSTANCE_OF))
        if entry.kind is ElementKind.INSTANCE:
            if decl.parent_ref is not None:
                edges.add(Edge(eid, lookup(decl.parent_ref), PARENT_BEAN))
        else:
            cd = model.classes[eid]
            if decl.parent_ref is not None:
                edges.add(Edge(eid, lookup(decl.parent_ref), SUBCLASS_OF))
            elif cd.parent is not None:
                edges.add(Edge(eid, cd.parent, SUBCLASS_OF))
            for p in cd.own_properties:
                if p.type.is_class:
                    edges.add(Edge(eid, p.type.class_id, PROPERTY_TYPE))
                elif p.type.is_unresolved:
                    edges.add(Edge(eid, UNRESOLVED, PROPERTY_TYPE))
            if not cd.is_declarative:
                mnode = manifest_node(eid)
                nodes.add(mnode)
                edges.add(Edge(eid, mnode, NATIVE_BINDING))
        for _, expr in decl.assignments:
            _value_edges(eid, expr, lookup, edges)

    return DependencyGraph(nodes, edges)
