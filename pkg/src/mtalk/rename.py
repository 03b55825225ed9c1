"""Rename refactoring: cross-file patch sets for element and property names.

Renames never touch the native manifest; when the renamed name also appears
there, a warning diagnostic tells the user to update it by hand.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass

from . import diagnostics as dx
from .compiler import CompileState
from .diagnostics import Diagnostic
from .errors import CollisionError, NotFoundError, StateError
from .ids import BUILTIN_SCALARS, ElementId, SourceSpan, is_valid_local
from .kernel import ResolvedModel
from .source import SourceUnit

# property assignments are element tags, so renamed properties must scan as one
_TAG_NAME_OK = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*\Z")
_ATTR_SITE_KINDS = ("bean-id", "class-attr", "parent-attr", "ref-attr")


@dataclass(frozen=True, slots=True)
class Patch:
    path: str
    span: SourceSpan
    replacement: str


@dataclass(frozen=True, slots=True)
class PatchSet:
    patches: tuple[Patch, ...]

    def __len__(self) -> int:
        return len(self.patches)

    def paths(self) -> tuple[str, ...]:
        return tuple(sorted({p.path for p in self.patches}))


def _line_starts(text: str) -> list[int]:
    starts = [0]
    idx = text.find("\n")
    while idx != -1:
        starts.append(idx + 1)
        idx = text.find("\n", idx + 1)
    return starts


def _offset(starts: list[int], line: int, column: int) -> int:
    if line < 1 or line > len(starts):
        raise StateError(f"patch span outside file (line {line})")
    return starts[line - 1] + column - 1


def _patched_text(text: str, patches: list[Patch]) -> str:
    starts = _line_starts(text)
    resolved = []
    for p in patches:
        s = _offset(starts, p.span.line, p.span.column)
        e = _offset(starts, p.span.end_line, p.span.end_column)
        if not 0 <= s <= e <= len(text):
            raise StateError(f"patch span out of range in {p.path}")
        resolved.append((s, e, p.replacement))
    resolved.sort(key=lambda t: t[0])
    prev_end = -1
    for s, e, _r in resolved:
        if s < prev_end:
            raise StateError(f"overlapping patches in {patches[0].path}")
        prev_end = e
    out = []
    cursor = 0
    for s, e, r in resolved:
        out.append(text[cursor:s])
        out.append(r)
        cursor = e
    out.append(text[cursor:])
    return "".join(out)


def apply_patchset(patchset: PatchSet, root: str) -> list[str]:
    """Apply patches under the workspace root. Returns the rewritten paths.

    All target files are read and patched in memory before any write; each
    file is then replaced atomically.
    """
    by_path: dict[str, list[Patch]] = {}
    for p in patchset.patches:
        by_path.setdefault(p.path, []).append(p)
    staged: list[tuple[str, str]] = []
    for rel in sorted(by_path):
        full = os.path.join(root, rel)
        try:
            with open(full, encoding="utf-8") as f:
                text = f.read()
        except OSError as exc:
            raise NotFoundError(f"cannot read '{rel}': {exc}") from None
        staged.append((full, _patched_text(text, by_path[rel])))
    for full, new_text in staged:
        tmp = full + ".tmp"
        with open(tmp, "w", encoding="utf-8") as f:
            f.write(new_text)
        os.replace(tmp, full)
    return sorted(by_path)


def _encode_attr(value: str) -> str:
    return (
        value.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace('"', "&quot;")
        .replace("'", "&apos;")
    )


def _requalified(written: str, new_local: str) -> str:
    cut = written.rfind(":")
    if cut == -1:
        return new_local
    return written[: cut + 1] + new_local


def _region_patch(unit: SourceUnit, span: SourceSpan, core: str) -> str:
    """Replace the trimmed middle of a raw text region, keeping its padding."""
    starts = _line_starts(unit.text)
    s = _offset(starts, span.line, span.column)
    e = _offset(starts, span.end_line, span.end_column)
    region = unit.text[s:e]
    lead = region[: len(region) - len(region.lstrip())]
    trail = region[len(region.rstrip()):]
    return lead + core + trail


def _check_new_name(new: str) -> None:
    if not is_valid_local(new) or any(c in new for c in "&<>\"'"):
        raise CollisionError(f"'{new}' is not a usable name")


def _manifest_of(state: CompileState):
    return state.manifest


def rename_element(
    state: CompileState, old: ElementId | str, new: str
) -> tuple[PatchSet, list[Diagnostic]]:
    """Patches for renaming a bean id everywhere it is written.

    Covers the declaration, class/parent/ref attributes, and property type
    texts, preserving namespace qualifiers as written. Raises CollisionError
    when the new name already resolves, is reserved, or would change how any
    other written reference resolves.
    """
    model = state.resolved
    if isinstance(old, str):
        found = model.lookup(ElementId.parse(old, ""))
        if found is None:
            raise NotFoundError(f"unknown element '{old}'")
        old_id = found
    else:
        old_id = old
        if old_id not in model.elements:
            raise NotFoundError(f"unknown element '{old_id.render()}'")
    if old_id in model.kernel_ids:
        raise NotFoundError(f"'{old_id.render()}' is not declared in a source unit")
    _check_new_name(new)
    if new == old_id.local:
        return PatchSet(()), []
    if new in BUILTIN_SCALARS:
        raise CollisionError(f"'{new}' is a builtin type name")
    new_id = ElementId(old_id.namespace, new)
    if new_id in model.elements:
        raise CollisionError(f"'{new_id.render()}' already exists")

    # creating ns:new would capture bare references that fall back to root new
    if old_id.namespace and ElementId("", new) in model.elements:
        for unit in state.units.values():
            if unit.namespace != old_id.namespace:
                continue
            for site in unit.ref_sites:
                if site.target is None or ":" in site.written:
                    continue
                if site.written.strip() == new and site.kind != "bean-id":
                    raise CollisionError(
                        f"renaming would shadow '{new}' referenced in {unit.path}"
                    )

    patches: list[Patch] = []
    for unit in state.units.values():
        for site in unit.ref_sites:
            if site.target is None:
                continue
            if site.kind == "bean-id":
                if site.target != old_id:
                    continue
            elif model.lookup(site.target) != old_id:
                continue
            written = site.written.strip()
            # a bare fallback reference from another namespace must not land
            # on a different element after the rename
            if (
                ":" not in written
                and unit.namespace != old_id.namespace
                and ElementId(unit.namespace, new) in model.elements
            ):
                raise CollisionError(
                    f"'{unit.namespace}:{new}' would capture the reference in {unit.path}"
                )
            replacement = _requalified(written, new)
            if site.kind == "type-text":
                patches.append(Patch(unit.path, site.span, _region_patch(unit, site.span, replacement)))
            else:
                patches.append(Patch(unit.path, site.span, _encode_attr(replacement)))

    warnings: list[Diagnostic] = []
    manifest = _manifest_of(state)
    if manifest is not None and manifest.get(old_id.render()) is not None:
        warnings.append(
            dx.warning(
                dx.MANIFEST_ORPHAN,
                f"native manifest still names '{old_id.render()}'; update it to '{new_id.render()}' by hand",
                SourceSpan(manifest.path, 1, 1, 1, 1),
            )
        )
    patches.sort(key=lambda p: (p.path, p.span.line, p.span.column))
    return PatchSet(tuple(patches)), warnings


def _topmost_declaring(model: ResolvedModel, class_id: ElementId, prop: str) -> ElementId | None:
    top = None
    for cls in model.lineage(class_id):
        if any(p.name == prop for p in model.classes[cls].own_properties):
            top = cls
    return top


def rename_property(
    state: CompileState, class_id: ElementId | str, old: str, new: str
) -> tuple[PatchSet, list[Diagnostic]]:
    """Patches for renaming a property across the declaring hierarchy.

    The scope is the topmost ancestor declaring the property and every
    subclass of it: their definition rows and every assignment tag in beans
    of those classes. Collides when any affected class already has a
    property named new.
    """
    model = state.resolved
    if isinstance(class_id, str):
        found = model.lookup(ElementId.parse(class_id, ""))
        if found is None:
            raise NotFoundError(f"unknown class '{class_id}'")
        class_id = found
    model.require_class(class_id)
    top = _topmost_declaring(model, class_id, old)
    if top is None:
        raise NotFoundError(f"class '{class_id.render()}' has no property '{old}'")
    _check_new_name(new)
    if not _TAG_NAME_OK.match(new) or new == "properties":
        raise CollisionError(f"'{new}' cannot be used as a property tag")
    if new == old:
        return PatchSet(()), []

    scope = {c for c in model.classes if top in model.ancestor_set(c)}
    for cls in sorted(scope, key=ElementId.render):
        if any(p.name == new for p in model.effective_properties(cls)):
            raise CollisionError(
                f"class '{cls.render()}' already has a property '{new}'"
            )

    patches: list[Patch] = []
    for unit in state.units.values():
        for site in unit.ref_sites:
            if site.prop != old:
                continue
            if site.kind == "name-text":
                if site.bean in scope:
                    patches.append(Patch(unit.path, site.span, _region_patch(unit, site.span, new)))
            elif site.kind == "prop-tag":
                owner = model.lookup(site.owner_class) if site.owner_class else None
                if owner is not None and owner in scope:
                    patches.append(Patch(unit.path, site.span, new))

    warnings: list[Diagnostic] = []
    manifest = _manifest_of(state)
    if manifest is not None:
        for cls in sorted(scope, key=ElementId.render):
            sig = manifest.get(cls.render())
            if sig is not None and old in sig.field_map():
                warnings.append(
                    dx.warning(
                        dx.MANIFEST_ORPHAN,
                        f"native manifest field '{cls.render()}.{old}' still uses the old name; "
                        f"update it to '{new}' by hand",
                        SourceSpan(manifest.path, 1, 1, 1, 1),
                    )
                )
    patches.sort(key=lambda p: (p.path, p.span.line, p.span.column))
    return PatchSet(tuple(patches)), warnings
