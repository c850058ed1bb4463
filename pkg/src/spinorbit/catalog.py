"""Read-only knowledge base: potentials, integrals, determining systems, branches.

Everything lives in ``data/catalog.yaml`` as expression-language text and
is parsed lazily.  Parsed objects are cached and immutable, so concurrent
readers are fine.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cache
from importlib import resources

import yaml

from . import builders as B
from .field import FieldElem

__all__ = [
    "CaseRow",
    "IntegralEntry",
    "DeterminingEq",
    "SolutionBranch",
    "Relation",
    "get_case",
    "get_integral",
    "get_determining",
    "get_solution",
    "get_relations",
    "list_cases",
    "list_integrals",
    "list_solutions",
    "hamiltonian_node",
    "integral_value",
    "expand",
    "parse_field",
]


@cache
def _raw() -> dict:
    text = resources.files("spinorbit").joinpath("data/catalog.yaml").read_text()
    return yaml.safe_load(text)


# -- template expansion --------------------------------------------------------

_PAIR = re.compile(r"PAIR\((\w+),\s*(\w+)\)")
_INDEXED = {
    "XX": "x[{i}]*x[{j}]",
    "PP": "p[{i}]*p[{j}]",
    "LL": "(L[{i}]*L[{j}] + L[{j}]*L[{i}])",
}


def _macro_pattern(names) -> re.Pattern:
    alt = "|".join(sorted(map(re.escape, names), key=len, reverse=True))
    return re.compile(rf"\b({alt})\b")


def expand(template: str, i: int | None = None, j: int | None = None) -> str:
    """Expand shorthands and fill component axes into a parseable string."""
    text = _PAIR.sub(lambda m: "({0}[{{i}}]*{1}[{{j}}] + {1}[{{i}}]*{0}[{{j}}])".format(*m.groups()),
                     template)
    macros = dict(_raw()["macros"])
    macros.update(_INDEXED)
    pat = _macro_pattern(macros)
    for _ in range(10):
        new = pat.sub(lambda m: "(" + macros[m.group(1)] + ")", text)
        if new == text:
            break
        text = new
    else:
        raise ValueError("macro expansion does not terminate")
    if "{i}" in text or "{j}" in text:
        if i is None or j is None:
            raise ValueError("component axes required for a two-index template")
        text = text.replace("{i}", str(i)).replace("{j}", str(j))
    return text


def parse_field(text: str) -> FieldElem:
    """Parse an expression that must reduce to a pure coefficient."""
    from .parser import parse

    v = parse(expand(text))
    f = v.field_value() if isinstance(v, B.Node) else None
    if f is None:
        raise ValueError(f"not a scalar coefficient: {text!r}")
    return f


# -- records -------------------------------------------------------------------

@dataclass(frozen=True)
class CaseRow:
    id: str
    v1_text: str
    v0_text: str
    source: str
    integrals: tuple = ()

    @property
    def V1(self) -> FieldElem:
        return parse_field(self.v1_text)

    @property
    def V0(self) -> FieldElem:
        return parse_field(self.v0_text)

    @property
    def symbolic(self) -> bool:
        return self.id == "symbolic"


@dataclass(frozen=True)
class IntegralEntry:
    id: str
    family: str
    arity: int
    cases: tuple
    template: str
    source: str
    reading: str = "printed"
    corrects: str | None = None

    def text(self, i: int | None = None, j: int | None = None) -> str:
        """Parseable source for the given axes, with the reading applied."""
        if self.arity == 2:
            if i is None or j is None:
                raise ValueError(f"{self.id} needs two component axes")
            body = expand(self.template, i, j)
            if self.reading == "selfadjoint":
                body = f"herm(({body})/2 + ({expand(self.template, j, i)})/2)"
            return body
        body = expand(self.template)
        return f"herm({body})" if self.reading == "selfadjoint" else body

    def build(self, i: int | None = None, j: int | None = None):
        """Expression tree for the requested component (or the whole vector)."""
        from .parser import parse

        v = parse(self.text(i, j))
        if self.arity == 1 and i is not None:
            if not isinstance(v, B.Vec):
                raise ValueError(f"{self.id} did not build as a vector")
            return v[i - 1]
        return v

    def components(self) -> list[tuple]:
        if self.arity == 0:
            return [()]
        if self.arity == 1:
            return [(k,) for k in (1, 2, 3)]
        return [(a, b) for a in (1, 2, 3) for b in (1, 2, 3)]


@dataclass(frozen=True)
class DeterminingEq:
    id: str
    family: str
    block: str
    text: str
    corrected_text: str | None = None
    correction_reason: str = ""

    @property
    def expr(self) -> FieldElem:
        return parse_field(self.text)

    def expression(self, corrected: bool = False) -> FieldElem:
        """The printed equation, or its correction when asked and one exists."""
        if corrected and self.corrected_text is not None:
            return parse_field(self.corrected_text)
        return self.expr


@dataclass(frozen=True)
class Relation:
    """``lhs - rhs = delta_ij * delta`` among generators of one family.

    ``corrected_rhs`` is None when the printed form holds; ``valid`` is False
    when no replacement exists at all.
    """

    id: str
    family: str
    kind: str
    lhs: str
    rhs: str
    delta: str | None
    corrected_rhs: str | None = None
    corrected_delta: str | None = None
    valid: bool = True

    def side(self, which: str, i: int, j: int) -> str:
        return expand(getattr(self, which), i, j)


@dataclass(frozen=True)
class SolutionBranch:
    id: str
    family: str
    v1_text: str
    v0_text: str
    constants: dict = field(default_factory=dict)
    assign: dict = field(default_factory=dict)
    rejected: bool = False
    source: str = ""

    def potentials(self) -> dict:
        return {"V1": parse_field(self.v1_text), "V0": parse_field(self.v0_text)}

    def bindings(self) -> dict:
        """All substitutions, with constant values already pushed into the f's."""
        from .operators import specialize

        consts = {k: parse_field(v) for k, v in self.constants.items()}
        out = dict(consts)
        for name, text in self.assign.items():
            out[name] = specialize(parse_field(text), consts)
        for name, val in self.potentials().items():
            if val.free_names() != {name}:
                out[name] = val
        return out

    def free_constants(self) -> list[str]:
        names = set()
        for val in self.bindings().values():
            names |= {n for n in val.free_names() if re.fullmatch(r"[cdk]\d+", n)}
        return sorted(names, key=lambda n: (n[0], int(n[1:])))


# -- lookup ----------------------------------------------------------------------

@cache
def _cases() -> dict:
    attached: dict = {}
    for e in _raw()["integrals"]:
        for c in e["cases"]:
            attached.setdefault(str(c), []).append(e["id"])
    out = {}
    for row in _raw()["cases"]:
        cid = str(row["id"])
        out[cid] = CaseRow(cid, row["V1"], row["V0"], row.get("source", ""),
                           tuple(attached.get(cid, ())))
    return out


@cache
def _integrals() -> dict:
    out = {}
    for e in _raw()["integrals"]:
        reading = e.get("reading", "printed")
        if reading not in ("printed", "selfadjoint"):
            raise ValueError(f"{e['id']}: unknown reading {reading!r}")
        out[e["id"]] = IntegralEntry(e["id"], e["family"], int(e["arity"]),
                                     tuple(str(c) for c in e["cases"]), e["expr"],
                                     e.get("source", ""), reading, e.get("corrects"))
    return out


_FAMILY = {"tensor": "tensor", "T": "tensor", "pseudo": "pseudo", "pseudotensor": "pseudo",
           "pseudo-tensor": "pseudo", "Y": "pseudo"}


def _family(name: str) -> str:
    try:
        return _FAMILY[name]
    except KeyError:
        raise KeyError(f"unknown family {name!r}") from None


def get_case(row) -> CaseRow:
    cid = str(row)
    try:
        return _cases()[cid]
    except KeyError:
        raise KeyError(f"unknown case {cid!r}") from None


def get_integral(ident: str) -> IntegralEntry:
    try:
        return _integrals()[ident]
    except KeyError:
        raise KeyError(f"unknown integral {ident!r}") from None


@cache
def get_determining(family: str) -> tuple:
    fam = _family(family)
    fixes = {e["id"]: e for e in (_raw().get("determining_corrections") or {}).get(fam, ())}
    out = []
    for e in _raw()["determining"][fam]:
        fix = fixes.pop(e["id"], None)
        out.append(DeterminingEq(e["id"], fam, e["block"], e["expr"],
                                 fix["expr"] if fix else None, fix["reason"] if fix else ""))
    if fixes:
        raise ValueError(f"corrections for unknown equations: {sorted(fixes)}")
    return tuple(out)


@cache
def get_relations(family: str) -> tuple:
    fam = _family(family)
    out = []
    for e in _raw()["relations"]:
        if _family(e["family"]) != fam:
            continue
        valid = not ("corrected_rhs" in e and e["corrected_rhs"] is None)
        out.append(Relation(e["id"], fam, e["kind"], e["lhs"], e["rhs"],
                            str(e["delta"]) if "delta" in e else None,
                            e.get("corrected_rhs"),
                            str(e["corrected_delta"]) if "corrected_delta" in e else None,
                            valid))
    return tuple(out)


@cache
def _solutions() -> dict:
    out = {}
    for s in _raw()["solutions"]:
        out[s["id"]] = SolutionBranch(
            s["id"], _family(s["family"]), s["V1"], s["V0"],
            {k: str(v) for k, v in (s.get("constants") or {}).items()},
            {k: str(v) for k, v in s["assign"].items()},
            bool(s.get("rejected", False)), s.get("source", ""))
    return out


def get_solution(branch: str) -> SolutionBranch:
    try:
        return _solutions()[branch]
    except KeyError:
        raise KeyError(f"unknown branch {branch!r}") from None


def list_cases() -> list[str]:
    return list(_cases())


def list_integrals(printed_only: bool = False) -> list[str]:
    """Integral ids in catalog order; ``printed_only`` drops the corrected readings."""
    return [k for k, e in _integrals().items() if not (printed_only and e.corrects)]


def list_solutions() -> list[str]:
    return list(_solutions())


@cache
def hamiltonian_node(case) -> B.Node:
    row = get_case(case)
    return B.hamiltonian(row.V0, row.V1)


@cache
def integral_value(ident: str, *idx: int):
    """Tree for ``Int(ident, i, j)``; vectors come back whole without an index."""
    return get_integral(ident).build(*idx)

