"""Polygraph signatures: objects, typed generators and the pure/effectful split."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, ValidationError

RUNTIME = "R"
IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
SEND_PREFIX = "send_"
RECV_PREFIX = "recv_"


def _check_ident(name: object, what: str) -> None:
    if not isinstance(name, str) or not IDENT.match(name):
        raise ValidationError(f"invalid {what} identifier {name!r}")


@dataclass(frozen=True)
class Generator:
    name: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    effectful: bool = False

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "effectful": self.effectful,
        }


@dataclass(frozen=True)
class Polygraph:
    """A validated signature. Objects keep their declaration order."""

    objects: tuple[str, ...] = ()
    generators: tuple[Generator, ...] = ()
    allow_runtime: bool = field(default=False, compare=False, repr=False)
    _index: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "generators", tuple(self.generators))
        seen = set()
        for obj in self.objects:
            _check_ident(obj, "object")
            if obj == RUNTIME and not self.allow_runtime:
                raise ValidationError(f"object name {RUNTIME!r} is reserved for the runtime wire")
            if obj in seen:
                raise ValidationError(f"duplicate object {obj!r}")
            seen.add(obj)
        index = {}
        for gen in self.generators:
            _check_ident(gen.name, "generator")
            if gen.name in index:
                raise ValidationError(f"duplicate generator {gen.name!r}")
            for t in gen.inputs + gen.outputs:
                if t not in seen:
                    raise ValidationError(f"generator {gen.name!r} uses undeclared object {t!r}")
            index[gen.name] = gen
        object.__setattr__(self, "_index", index)

    def __hash__(self):
        return hash((self.objects, self.generators))

    def generator(self, name: str) -> Generator:
        try:
            return self._index[name]
        except KeyError:
            raise ValidationError(f"unknown generator {name!r}") from None

    def has_generator(self, name: str) -> bool:
        return name in self._index

    def has_object(self, name: str) -> bool:
        return name in self.objects

    def check_types(self, types) -> None:
        for t in types:
            if t not in self.objects:
                raise ValidationError(f"undeclared object {t!r}")

    @property
    def is_pure(self) -> bool:
        return not any(g.effectful for g in self.generators)

    def to_dict(self) -> dict:
        return {
            "objects": list(self.objects),
            "generators": [g.to_dict() for g in self.generators],
        }

    @classmethod
    def from_dict(cls, data: dict, allow_runtime: bool = False) -> "Polygraph":
        if not isinstance(data, dict):
            raise ValidationError("polygraph document must be a JSON object")
        extra = set(data) - {"objects", "generators"}
        if extra:
            raise ValidationError(f"unexpected keys {sorted(extra)}")
        gens = []
        for raw in data.get("generators", []):
            if not isinstance(raw, dict) or "name" not in raw:
                raise ValidationError(f"malformed generator entry {raw!r}")
            effectful = raw.get("effectful", False)
            if not isinstance(effectful, bool):
                raise ValidationError(f"generator {raw['name']!r}: effectful must be a boolean")
            gens.append(Generator(raw["name"], tuple(raw.get("inputs", [])),
                                  tuple(raw.get("outputs", [])), effectful))
        return cls(tuple(data.get("objects", [])), tuple(gens), allow_runtime=allow_runtime)


def _no_duplicate_keys(pairs):
    out = {}
    for key, value in pairs:
        if key in out:
            raise ValidationError(f"duplicate key {key!r}")
        out[key] = value
    return out


def loads_json(text: str):
    """Parse JSON rejecting duplicate keys; syntax errors carry line and column."""
    try:
        return json.loads(text, object_pairs_hook=_no_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None


def parse_polygraph(text: str) -> Polygraph:
    return Polygraph.from_dict(loads_json(text))


def dumps_polygraph(p: Polygraph) -> str:
    return json.dumps(p.to_dict(), indent=2, ensure_ascii=False) + "\n"


def load_polygraph(path) -> Polygraph:
    return parse_polygraph(Path(path).read_text(encoding="utf-8"))


def save_polygraph(p: Polygraph, path) -> None:
    Path(path).write_text(dumps_polygraph(p), encoding="utf-8")


def runtime_extend(p: Polygraph) -> Polygraph:
    """Thread the runtime object R through every effectful generator.

    The result is pure: `g: A -> B` effectful becomes `g: R,A -> R,B`.
    """
    objects = p.objects if RUNTIME in p.objects else p.objects + (RUNTIME,)
    gens = tuple(
        Generator(g.name, (RUNTIME,) + g.inputs, (RUNTIME,) + g.outputs, False) if g.effectful else g
        for g in p.generators
    )
    return Polygraph(objects, gens, allow_runtime=True)


def session_polygraph(base: Polygraph) -> Polygraph:
    """Add effectful `send_X: X -> I` and `recv_X: I -> X` for every object X."""
    if not base.is_pure:
        raise ValidationError("session polygraph needs a pure base")
    for g in base.generators:
        if g.name.startswith(SEND_PREFIX) or g.name.startswith(RECV_PREFIX):
            raise ValidationError(f"name clash: base already declares {g.name!r}")
    extra = []
    for x in base.objects:
        if x == RUNTIME:
            continue
        extra.append(Generator(SEND_PREFIX + x, (x,), (), True))
        extra.append(Generator(RECV_PREFIX + x, (), (x,), True))
    return Polygraph(base.objects, base.generators + tuple(extra), allow_runtime=base.allow_runtime)


def is_runtime_generator(g: Generator) -> bool:
    """True for generators that consume and produce the runtime wire."""
    return bool(g.inputs) and g.inputs[0] == RUNTIME and bool(g.outputs) and g.outputs[0] == RUNTIME


def pure_restriction(p: Polygraph) -> Polygraph:
    """Drop R and every generator touching it."""
    gens = tuple(g for g in p.generators if RUNTIME not in g.inputs and RUNTIME not in g.outputs)
    return Polygraph(tuple(o for o in p.objects if o != RUNTIME), gens)


def event_of(g: Generator) -> tuple[str, str] | None:
    """Classify a runtime generator as ('send', X) or ('recv', X)."""
    if g.name.startswith(SEND_PREFIX) and g.inputs == (RUNTIME, g.name[len(SEND_PREFIX):]) \
            and g.outputs == (RUNTIME,):
        return ("send", g.inputs[1])
    if g.name.startswith(RECV_PREFIX) and g.inputs == (RUNTIME,) \
            and g.outputs == (RUNTIME, g.name[len(RECV_PREFIX):]):
        return ("recv", g.outputs[1])
    return None
