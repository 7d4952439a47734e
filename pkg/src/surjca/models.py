"""Built-in models and the plain-text model / observable file format.

Model file::

    # comment
    [model]
    name = xor01
    kind = map                # map | sft | lattice2d
    description = free text

    [domain]
    symbols = 0 1
    forbidden = 11            # whitespace separated words, optional

    [codomain]                # optional, defaults to the domain
    symbols = 0 1
    forbidden =

    [map]
    left = 0
    right = 1

    [rule]
    00 -> 0
    01 -> 1

Words are written symbol after symbol when every symbol is one character,
otherwise with '.' between symbols (``00.11``).  ``kind = lattice2d`` files
carry a ``[lattice]`` section with ``model = q2r`` or ``model = ising-contour``.

Observable file::

    [observable]
    range = 1
    offset = 0
    default = 0               # value for words not listed

    [values]
    0 -> 1
    1 -> 3/2
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .conservation import LocalObservable, rational_str
from .symbolic import Alphabet, SlidingBlockMap1D, Sft1D, SymbolicError


class ModelParseError(ValueError):
    pass


@dataclass
class Model:
    name: str
    kind: str
    description: str = ""
    domain: Sft1D | None = None
    map: SlidingBlockMap1D | None = None
    lattice: str | None = None

    def __eq__(self, other):
        if not isinstance(other, Model):
            return NotImplemented
        return (self.name, self.kind, self.description, self.domain, self.map, self.lattice) == (
            other.name, other.kind, other.description, other.domain, other.map, other.lattice)

    @property
    def codomain(self) -> Sft1D | None:
        return self.map.codomain if self.map is not None else self.domain


_SECTION_KEYS = {
    "model": {"name", "kind", "description"},
    "domain": {"symbols", "forbidden"},
    "codomain": {"symbols", "forbidden"},
    "map": {"left", "right"},
    "rule": None,
    "lattice": {"model"},
    "observable": {"range", "offset", "default"},
    "values": None,
}


def _sections(text: str, allowed: set) -> dict:
    out = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in allowed:
                raise ModelParseError(f"line {lineno}: unknown section [{current}]")
            if current in out:
                raise ModelParseError(f"line {lineno}: duplicate section [{current}]")
            out[current] = {} if _SECTION_KEYS[current] is not None else []
            continue
        if current is None:
            raise ModelParseError(f"line {lineno}: content outside a section")
        keys = _SECTION_KEYS[current]
        if keys is None:
            if "->" not in line:
                raise ModelParseError(f"line {lineno}: expected 'word -> value'")
            lhs, rhs = (p.strip() for p in line.split("->", 1))
            out[current].append((lineno, lhs, rhs))
        else:
            if "=" not in line:
                raise ModelParseError(f"line {lineno}: expected 'key = value'")
            key, val = (p.strip() for p in line.split("=", 1))
            if key not in keys:
                raise ModelParseError(f"line {lineno}: unknown key {key!r} in [{current}]")
            out[current][key] = val
    return out


def _parse_sft(sec: dict, where: str) -> Sft1D:
    if "symbols" not in sec:
        raise ModelParseError(f"[{where}] needs 'symbols'")
    try:
        alphabet = Alphabet(tuple(sec["symbols"].split()))
        forbidden = frozenset(alphabet.encode(w) for w in sec.get("forbidden", "").split())
        return Sft1D(alphabet, forbidden)
    except SymbolicError as exc:
        raise ModelParseError(f"[{where}]: {exc}") from exc


def parse_model(text: str) -> Model:
    secs = _sections(text, {"model", "domain", "codomain", "map", "rule", "lattice"})
    head = secs.get("model", {})
    kind = head.get("kind", "map")
    name = head.get("name", "unnamed")
    desc = head.get("description", "")
    if kind == "lattice2d":
        lat = secs.get("lattice", {}).get("model")
        if lat not in ("q2r", "ising-contour"):
            raise ModelParseError("lattice2d models need [lattice] model = q2r | ising-contour")
        return Model(name, kind, desc, lattice=lat)
    if "domain" not in secs:
        raise ModelParseError("missing [domain] section")
    domain = _parse_sft(secs["domain"], "domain")
    if kind == "sft":
        return Model(name, kind, desc, domain=domain)
    if kind != "map":
        raise ModelParseError(f"unknown model kind {kind!r}")
    codomain = _parse_sft(secs["codomain"], "codomain") if "codomain" in secs else domain
    mp = secs.get("map", {})
    try:
        left, right = int(mp["left"]), int(mp["right"])
    except (KeyError, ValueError) as exc:
        raise ModelParseError("[map] needs integer 'left' and 'right'") from exc
    rule = {}
    for lineno, lhs, rhs in secs.get("rule", []):
        try:
            w = domain.alphabet.encode(lhs)
            v = codomain.alphabet.index(rhs)
        except SymbolicError as exc:
            raise ModelParseError(f"line {lineno}: {exc}") from exc
        if w in rule:
            raise ModelParseError(f"line {lineno}: duplicate rule row {lhs}")
        rule[w] = v
    try:
        phi = SlidingBlockMap1D(domain, codomain, left, right, rule)
    except SymbolicError as exc:
        raise ModelParseError(str(exc)) from exc
    return Model(name, kind, desc, domain=domain, map=phi)


def _sft_lines(sft: Sft1D) -> list:
    words = " ".join(sft.alphabet.decode(w) for w in sorted(sft.forbidden))
    return [f"symbols = {' '.join(sft.alphabet.symbols)}", f"forbidden = {words}"]


def serialize_model(model: Model) -> str:
    lines = ["[model]", f"name = {model.name}", f"kind = {model.kind}"]
    if model.description:
        lines.append(f"description = {model.description}")
    if model.kind == "lattice2d":
        lines += ["", "[lattice]", f"model = {model.lattice}"]
        return "\n".join(lines) + "\n"
    lines += ["", "[domain]"] + _sft_lines(model.domain)
    if model.kind == "map":
        phi = model.map
        if phi.codomain != phi.domain:
            lines += ["", "[codomain]"] + _sft_lines(phi.codomain)
        lines += ["", "[map]", f"left = {phi.left}", f"right = {phi.right}", "", "[rule]"]
        for w in sorted(phi.rule):
            lines.append(f"{phi.domain.alphabet.decode(w)} -> {phi.codomain.alphabet.symbols[phi.rule[w]]}")
    return "\n".join(lines) + "\n"


def parse_observable(text: str, sft: Sft1D) -> LocalObservable:
    secs = _sections(text, {"observable", "values"})
    head = secs.get("observable", {})
    try:
        k = int(head.get("range", "1"))
        offset = int(head.get("offset", "0"))
        default = Fraction(head.get("default", "0"))
    except ValueError as exc:
        raise ModelParseError(f"[observable]: {exc}") from exc
    table = {w: default for w in sft.words(k)}
    for lineno, lhs, rhs in secs.get("values", []):
        try:
            w = sft.alphabet.encode(lhs)
            val = Fraction(rhs)
        except (SymbolicError, ValueError) as exc:
            raise ModelParseError(f"line {lineno}: {exc}") from exc
        if len(w) != k:
            raise ModelParseError(f"line {lineno}: word {lhs} does not have length {k}")
        if w not in table:
            raise ModelParseError(f"line {lineno}: word {lhs} is not allowed in the shift")
        table[w] = val
    return LocalObservable(sft, k, table, offset)


def serialize_observable(f: LocalObservable) -> str:
    lines = ["[observable]", f"range = {f.k}", f"offset = {f.offset}", "default = 0", "", "[values]"]
    for w, v in f.table.items():
        if v != 0:
            lines.append(f"{f.sft.alphabet.decode(w)} -> {rational_str(v)}")
    return "\n".join(lines) + "\n"


# --- built-ins ---------------------------------------------------------------

def _binary() -> Sft1D:
    return Sft1D.from_strings("01")


def _ternary() -> Sft1D:
    return Sft1D.from_strings("012")


def _xor01():
    return SlidingBlockMap1D.from_local_rule(_binary(), 0, 1, lambda w: (w[0] + w[1]) % 2)


def _xor_symmetric():
    return SlidingBlockMap1D.from_local_rule(_binary(), -1, 1, lambda w: (w[0] + w[2]) % 2)


def _xor_with_walls():
    return SlidingBlockMap1D.from_local_rule(_ternary(), 0, 1, lambda w: 2 if w[0] == 2 else (w[0] + w[1]) % 2)


def _ternary_collapse():
    X = Sft1D.from_strings("012", ["11", "22"])
    Y = Sft1D.from_strings("012", ["22", "21"])
    return SlidingBlockMap1D.from_local_rule(X, 0, 1, lambda w: 1 if w == (2, 1) else w[0], codomain=Y)


def _transpose_xor():
    # symbol index 2a + b encodes the pair (a, b)
    sft = Sft1D(Alphabet(("00", "01", "10", "11")))

    def rule(w):
        (a, b), (_, d) = divmod(w[0], 2), divmod(w[1], 2)
        return 2 * b + (a + d) % 2

    return SlidingBlockMap1D.from_local_rule(sft, 0, 1, rule)


def _bipermutive_ternary():
    return SlidingBlockMap1D.from_local_rule(
        _ternary(), -1, 1, lambda w: (w[0] + w[2] + (1 if w[1] == 2 else 0)) % 3)


def _majority3():
    return SlidingBlockMap1D.from_local_rule(_binary(), -1, 1, lambda w: int(sum(w) >= 2))


_BUILTIN_MAPS = {
    "xor01": (_xor01, "XOR cellular automaton, neighbourhood {0,1}"),
    "xor-symmetric": (_xor_symmetric, "XOR cellular automaton, neighbourhood {-1,1}"),
    "xor-with-walls": (_xor_with_walls, "ternary XOR with invariant wall symbol 2"),
    "ternary-collapse": (_ternary_collapse, "pre-injective factor map X -> Y, 21 -> 1"),
    "transpose-xor": (_transpose_xor, "reversible transpose of XOR, ((a,b),(c,d)) -> (b,a+d)"),
    "bipermutive-ternary": (_bipermutive_ternary, "a+c+1 mod 3 if b=2 else a+c mod 3"),
    "majority3": (_majority3, "majority vote, neighbourhood {-1,0,1}"),
}
_BUILTIN_LATTICE = {
    "q2r": "Q2R reversible Ising dynamics on a torus",
    "ising-contour": "Ising spins to contour model, 2x2 block map",
}
BUILTIN_NAMES = tuple(_BUILTIN_MAPS) + tuple(_BUILTIN_LATTICE)


def builtin(name: str) -> Model:
    if name in _BUILTIN_MAPS:
        make, desc = _BUILTIN_MAPS[name]
        phi = make()
        return Model(name, "map", desc, domain=phi.domain, map=phi)
    if name in _BUILTIN_LATTICE:
        return Model(name, "lattice2d", _BUILTIN_LATTICE[name], lattice=name)
    raise KeyError(f"no built-in model named {name!r}")


def list_models() -> list:
    return [builtin(n) for n in BUILTIN_NAMES]


def load_model(source: str) -> Model:
    """A built-in name or a path to a model file."""
    if source in BUILTIN_NAMES:
        return builtin(source)
    return parse_model(Path(source).read_text())


def load_sft(source: str) -> Sft1D:
    """Shift from a model file / built-in; ``name:codomain`` selects a map's codomain."""
    part = "domain"
    if ":" in source and source.rsplit(":", 1)[1] in ("domain", "codomain"):
        source, part = source.rsplit(":", 1)
    model = load_model(source)
    sft = model.codomain if part == "codomain" else model.domain
    if sft is None:
        raise ModelParseError(f"model {model.name} has no one-dimensional shift")
    return sft
