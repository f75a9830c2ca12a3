"""Information-base snapshots: objects with a most-specific class, attribute
values, and binary links.  Snapshots are treated as immutable values; the
`Workspace` helper is the mutable builder used while applying effects."""

from __future__ import annotations

from typing import NamedTuple, Optional

from .model.types import ClassModel


class Oid(NamedTuple):
    """Object identifier.  A tuple type, so it never compares equal to a bool or str."""

    n: int

    def __repr__(self):
        return f"o{self.n}"

    __str__ = __repr__


def sort_key(value):
    """Total order over mixed scalar values (None, bool, str, Oid)."""
    if value is None:
        return (0, 0)
    if isinstance(value, bool):
        return (1, int(value))
    if isinstance(value, str):
        return (2, value)
    return (3, value.n)


class Snapshot:
    __slots__ = ("schema", "objects", "attrs", "links", "_key", "_hash", "_adj", "_ext")

    def __init__(self, schema: ClassModel, objects: dict, attrs: dict, links):
        self.schema = schema
        self.objects = dict(objects)  # Oid -> class name
        self.attrs = {k: v for k, v in attrs.items() if v is not None}  # (Oid, attr) -> value
        self.links = frozenset(links)  # (assoc, domain oid, image oid)
        self._key = None
        self._hash = None
        self._adj = None
        self._ext = {}

    @classmethod
    def empty(cls, schema: ClassModel) -> "Snapshot":
        return cls(schema, {}, {}, ())

    @property
    def key(self):
        if self._key is None:
            self._key = (
                tuple(sorted(self.objects.items())),
                tuple(sorted(self.attrs.items(), key=lambda kv: (kv[0][0].n, kv[0][1]))),
                tuple(sorted(self.links)),
            )
        return self._key

    def __eq__(self, other):
        return isinstance(other, Snapshot) and self.key == other.key

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __repr__(self):
        return f"Snapshot({len(self.objects)} objects, {len(self.links)} links)"

    # --- queries -----------------------------------------------------------

    def extension(self, cls: str) -> frozenset:
        """Objects whose most-specific class is `cls` or one of its subclasses."""
        hit = self._ext.get(cls)
        if hit is None:
            hit = frozenset(o for o, c in self.objects.items() if self.schema.is_subclass(c, cls))
            self._ext[cls] = hit
        return hit

    def attr(self, oid: Oid, name: str):
        value = self.attrs.get((oid, name))
        if value is None:
            cls = self.objects.get(oid)
            if cls is not None:
                decl = self.schema.attributes_of(cls).get(name)
                if decl is not None and decl.kind == "boolean":
                    return False
        return value

    def neighbours(self, assoc: str, forward: bool, oid: Oid) -> frozenset:
        if self._adj is None:
            adj: dict = {}
            for a, x, y in self.links:
                adj.setdefault((a, True, x), set()).add(y)
                adj.setdefault((a, False, y), set()).add(x)
            self._adj = {k: frozenset(v) for k, v in adj.items()}
        return self._adj.get((assoc, forward, oid), frozenset())

    def active_domain(self) -> frozenset:
        values = set(self.objects)
        values.update(v for v in self.attrs.values() if isinstance(v, str))
        return frozenset(values)

    def strings(self) -> set:
        return {v for v in self.attrs.values() if isinstance(v, str)}

    def next_oid(self) -> Oid:
        return Oid(max((o.n for o in self.objects), default=-1) + 1)

    def to_json(self) -> dict:
        return {
            "objects": {str(o): c for o, c in sorted(self.objects.items())},
            "attrs": {f"{o}.{a}": (v if not isinstance(v, Oid) else str(v))
                      for (o, a), v in sorted(self.attrs.items(), key=lambda kv: (kv[0][0].n, kv[0][1]))},
            "links": [[a, str(x), str(y)] for a, x, y in sorted(self.links)],
        }


class Workspace:
    """Mutable copy of a snapshot used while effects are applied."""

    def __init__(self, snap: Snapshot):
        self.schema = snap.schema
        self.objects = dict(snap.objects)
        self.attrs = dict(snap.attrs)
        self.links = set(snap.links)
        self._next = snap.next_oid().n

    def copy(self) -> "Workspace":
        other = Workspace.__new__(Workspace)
        other.schema = self.schema
        other.objects = dict(self.objects)
        other.attrs = dict(self.attrs)
        other.links = set(self.links)
        other._next = self._next
        return other

    def create(self, cls: str) -> Oid:
        oid = Oid(self._next)
        self._next += 1
        self.objects[oid] = cls
        return oid

    def delete(self, oid: Oid):
        self.objects.pop(oid, None)
        for key in [k for k in self.attrs if k[0] == oid]:
            del self.attrs[key]
        self.links = {l for l in self.links if l[1] != oid and l[2] != oid}

    def retype(self, oid: Oid, cls: str):
        self.objects[oid] = cls
        valid = self.schema.attributes_of(cls)
        for key in [k for k in self.attrs if k[0] == oid and k[1] not in valid]:
            del self.attrs[key]
        roles = self.schema.roles_of(cls).values()
        allowed = {(r.assoc, r.forward) for r in roles}
        keep = set()
        for link in self.links:
            a, x, y = link
            if x == oid and (a, True) not in allowed:
                continue
            if y == oid and (a, False) not in allowed:
                continue
            keep.add(link)
        self.links = keep

    def set_attr(self, oid: Oid, name: str, value):
        if value is None:
            self.attrs.pop((oid, name), None)
        else:
            self.attrs[(oid, name)] = value

    def role_links(self, oid: Oid, forward: bool, assoc: str):
        if forward:
            return {l for l in self.links if l[0] == assoc and l[1] == oid}
        return {l for l in self.links if l[0] == assoc and l[2] == oid}

    def link(self, oid: Oid, forward: bool, assoc: str, other: Oid):
        self.links.add((assoc, oid, other) if forward else (assoc, other, oid))

    def freeze(self) -> Snapshot:
        return Snapshot(self.schema, self.objects, self.attrs, self.links)


def violations(snap: Snapshot) -> Optional[str]:
    """First broken upper-cardinality or key-uniqueness constraint, or None."""
    cm = snap.schema
    for a in cm.associations:
        for forward, card in ((True, a.image_card), (False, a.domain_card)):
            if card.upper is None:
                continue
            counts: dict = {}
            for name, x, y in snap.links:
                if name == a.name:
                    src = x if forward else y
                    counts[src] = counts.get(src, 0) + 1
            for src, n in counts.items():
                if n > card.upper:
                    role = a.image_role if forward else a.domain_role
                    return f"{src}.{role} has {n} links (upper bound {card.upper})"
    seen: dict = {}
    for oid, cls in snap.objects.items():
        key = cm.key_of(cls)
        if key is None:
            continue
        value = snap.attrs.get((oid, key))
        if value is None:
            continue
        slot = (cm.root(cls), key, value)
        if slot in seen:
            return f"key {key}={value!r} shared by {seen[slot]} and {oid}"
        seen[slot] = oid
    return None
