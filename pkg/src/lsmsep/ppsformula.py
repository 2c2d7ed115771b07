"""Primitive product-summation formulas.

A formula declares free variables, bound variables and a list of atoms
``G(v, ...)``.  Its value at an assignment of the free variables is the sum,
over all assignments of the bound variables, of the product of the atoms.
The concrete syntax is::

    free x1 x2; bound y; EQ3(x1, x2, y); IMP(y, x1)

Three evaluators are provided and must agree exactly:

* ``evaluate`` enumerates every free and bound assignment literally;
* ``evaluate_eliminate`` sums out bound variables one at a time;
* ``build_ctform_pipeline`` uses nothing but tensor, contract, permute and
  equality gadgets grown from EQ3, mirroring the closure argument that puts
  every clone element in C.
"""

from __future__ import annotations

import itertools
import os
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import (
    ArityMismatch,
    FormulaError,
    FormulaSyntaxError,
    UndeclaredVariable,
    UnknownFunction,
)
from .functable import (
    EQ3,
    EXACT,
    FuncTable,
    bits_of,
    contract,
    format_value,
    load_table,
    make_table,
    permute,
    scalar,
    tensor,
)
from . import functable as ft

KEYWORDS = ("free", "bound")


@dataclass(frozen=True)
class Atom:
    name: str
    scope: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.name}({','.join(self.scope)})"


@dataclass(frozen=True)
class Formula:
    free_vars: tuple[str, ...] = ()
    bound_vars: tuple[str, ...] = ()
    atoms: tuple[Atom, ...] = ()

    def __post_init__(self):
        seen = set()
        for v in self.free_vars + self.bound_vars:
            if v in seen:
                raise FormulaError(f"variable {v!r} declared twice")
            seen.add(v)
        for atom in self.atoms:
            for v in atom.scope:
                if v not in seen:
                    raise UndeclaredVariable(f"variable {v!r} in {atom} is not declared")

    @property
    def variables(self) -> tuple[str, ...]:
        return self.free_vars + self.bound_vars

    def to_text(self) -> str:
        parts = []
        if self.free_vars:
            parts.append("free " + " ".join(self.free_vars))
        if self.bound_vars:
            parts.append("bound " + " ".join(self.bound_vars))
        parts.extend(str(a) for a in self.atoms)
        text = "; ".join(parts)
        return text if self.atoms else text + ";"

    def __str__(self) -> str:
        return self.to_text()


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(#[^\n]*)|([A-Za-z_][A-Za-z0-9_]*)|([;,()])|(\S))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def where(p):
        line = max(i for i, s in enumerate(line_starts) if s <= p)
        return line + 1, p - line_starts[line] + 1

    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        pos = m.end()
        if m.group(1):
            continue
        if m.group(4):
            raise FormulaSyntaxError(f"unexpected character {m.group(4)!r}", *where(m.start(4)))
        kind = "name" if m.group(2) else m.group(3)
        start = m.start(2) if m.group(2) else m.start(3)
        tokens.append((kind, m.group(2) or m.group(3), *where(start)))
    end = where(len(text))
    tokens.append(("eof", "", *end))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind, what=None):
        tok = self.next()
        if tok[0] != kind:
            found = tok[1] or "end of input"
            raise FormulaSyntaxError(f"expected {what or kind!r}, found {found!r}", tok[2], tok[3])
        return tok

    def skip_semis(self):
        while self.peek()[0] == ";":
            self.next()

    def names(self):
        out = []
        while self.peek()[0] == "name" and self.peek()[1] not in KEYWORDS:
            # A name followed by "(" starts an atom, not a declaration.
            if self.tokens[self.i + 1][0] == "(":
                break
            out.append(self.next()[1])
        return out

    def parse(self) -> Formula:
        free, bound, atoms = [], [], []
        self.skip_semis()
        for kw, target in (("free", free), ("bound", bound)):
            tok = self.peek()
            if tok[0] == "name" and tok[1] == kw:
                self.next()
                target.extend(self.names())
                self.skip_semis()
        while self.peek()[0] != "eof":
            atoms.append(self.atom())
            tok = self.peek()
            if tok[0] == ";":
                self.skip_semis()
            elif tok[0] not in ("eof", "name"):
                raise FormulaSyntaxError(f"expected ';', found {tok[1]!r}", tok[2], tok[3])
        return Formula(tuple(free), tuple(bound), tuple(atoms))

    def atom(self) -> Atom:
        tok = self.expect("name", "function name")
        if tok[1] in KEYWORDS:
            raise FormulaSyntaxError(f"declaration {tok[1]!r} must precede atoms", tok[2], tok[3])
        self.expect("(", "(")
        scope = [self.expect("name", "variable")[1]]
        while self.peek()[0] == ",":
            self.next()
            scope.append(self.expect("name", "variable")[1])
        self.expect(")", "',' or ')'")
        return Atom(tok[1], tuple(scope))


def parse(text: str) -> Formula:
    """Parse formula text; raises FormulaSyntaxError or UndeclaredVariable."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# function library
# ---------------------------------------------------------------------------

BUILTIN_NAMES = ("IMP", "EQ1", "EQ2", "EQ3")


class FunctionLibrary(Mapping):
    """Name -> table map that always carries IMP, EQ1, EQ2 and EQ3."""

    def __init__(self, tables: Mapping[str, FuncTable] | None = None):
        self._tables = {name: ft.BUILTINS[name] for name in BUILTIN_NAMES}
        for name, table in (tables or {}).items():
            if name in BUILTIN_NAMES:
                raise FormulaError(f"{name!r} is a builtin and cannot be redefined")
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name) or name in KEYWORDS:
                raise FormulaError(f"invalid function name {name!r}")
            self._tables[name] = table

    def __getitem__(self, name):
        return self._tables[name]

    def __iter__(self):
        return iter(self._tables)

    def __len__(self):
        return len(self._tables)

    def extended(self, tables: Mapping[str, FuncTable]) -> FunctionLibrary:
        user = {k: v for k, v in self._tables.items() if k not in BUILTIN_NAMES}
        user.update(tables)
        return FunctionLibrary(user)

    def user_tables(self) -> dict[str, FuncTable]:
        return {k: v for k, v in self._tables.items() if k not in BUILTIN_NAMES}


def load_library(path, mode: str = EXACT) -> FunctionLibrary:
    """Read ``name = table-file`` lines; relative paths resolve next to ``path``."""
    base = os.path.dirname(os.path.abspath(path))
    tables = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            name, sep, target = (s.strip() for s in line.partition("="))
            if not sep or not name or not target:
                raise FormulaError(f"{path}:{lineno}: expected 'name = path'")
            tables[name] = load_table(os.path.join(base, target), mode)
    return FunctionLibrary(tables)


def validate(f: Formula, lib: Mapping[str, FuncTable]) -> None:
    for atom in f.atoms:
        if atom.name not in lib:
            raise UnknownFunction(f"unknown function {atom.name!r}")
        if lib[atom.name].arity != len(atom.scope):
            raise ArityMismatch(
                f"{atom.name} has arity {lib[atom.name].arity} but {atom} passes {len(atom.scope)}"
            )


def _result_mode(f: Formula, lib) -> str:
    return EXACT if all(lib[a.name].exact for a in f.atoms) else ft.FLOAT


# ---------------------------------------------------------------------------
# reference evaluator
# ---------------------------------------------------------------------------


def evaluate(f: Formula, lib: Mapping[str, FuncTable]) -> FuncTable:
    """Literal double enumeration over free and bound assignments."""
    validate(f, lib)
    pos = {v: i for i, v in enumerate(f.variables)}
    n, m = len(f.free_vars), len(f.bound_vars)
    atoms = []
    den = 1
    for atom in f.atoms:
        nums, d = lib[atom.name].scaled
        atoms.append((nums, [pos[v] for v in atom.scope]))
        den *= d
    out = []
    for x in itertools.product((0, 1), repeat=n):
        total = 0
        for y in itertools.product((0, 1), repeat=m):
            assign = x + y
            prod = 1
            for nums, scope in atoms:
                idx = 0
                for p in scope:
                    idx = (idx << 1) | assign[p]
                prod *= nums[idx]
                if not prod:
                    break
            total += prod
        out.append(total)
    return FuncTable(n, out, den, _result_mode(f, lib))


# ---------------------------------------------------------------------------
# variable elimination
# ---------------------------------------------------------------------------


@dataclass
class _Factor:
    vars: tuple[int, ...]
    nums: list
    den: int


def _atom_factor(table: FuncTable, scope: list[int]) -> _Factor:
    # Distinct variables in first-occurrence order; repeats read the diagonal.
    order = list(dict.fromkeys(scope))
    where = [order.index(v) for v in scope]
    r = len(order)
    nums, den = table.scaled
    out = []
    for i in range(1 << r):
        bits = bits_of(i, r)
        idx = 0
        for w in where:
            idx = (idx << 1) | bits[w]
        out.append(nums[idx])
    return _Factor(tuple(order), out, den)


def _multiply(factors: list[_Factor], out_vars: tuple[int, ...]) -> _Factor:
    r = len(out_vars)
    pos = {v: i for i, v in enumerate(out_vars)}
    plans = [(f.nums, [r - 1 - pos[v] for v in f.vars]) for f in factors]
    den = 1
    for f in factors:
        den *= f.den
    out = []
    for i in range(1 << r):
        prod = 1
        for nums, shifts in plans:
            idx = 0
            for s in shifts:
                idx = (idx << 1) | ((i >> s) & 1)
            prod *= nums[idx]
            if not prod:
                break
        out.append(prod)
    return _Factor(out_vars, out, den)


def _sum_out(f: _Factor, var: int) -> _Factor:
    j = f.vars.index(var)
    r = len(f.vars)
    p = r - 1 - j
    low = (1 << p) - 1
    out = []
    for y in range(1 << (r - 1)):
        base = ((y >> p) << (p + 1)) | (y & low)
        out.append(f.nums[base] + f.nums[base | (1 << p)])
    return _Factor(f.vars[:j] + f.vars[j + 1:], out, f.den)


def elimination_order(f: Formula) -> list[str]:
    """Greedy min-degree order of the bound variables, ties by declaration order."""
    n = len(f.free_vars)
    pos = {v: i for i, v in enumerate(f.variables)}
    scopes = [set(pos[v] for v in a.scope) for a in f.atoms]
    remaining = list(range(n, n + len(f.bound_vars)))
    order = []
    while remaining:
        def degree(v):
            nbrs = set()
            for s in scopes:
                if v in s:
                    nbrs |= s
            nbrs.discard(v)
            return len(nbrs)

        v = min(remaining, key=lambda u: (degree(u), u))
        merged = set()
        keep = []
        for s in scopes:
            if v in s:
                merged |= s
            else:
                keep.append(s)
        merged.discard(v)
        scopes = keep + ([merged] if merged else [])
        remaining.remove(v)
        order.append(f.variables[v])
    return order


def evaluate_eliminate(f: Formula, lib: Mapping[str, FuncTable]) -> FuncTable:
    """Same result as ``evaluate``, summing out bound variables one at a time."""
    validate(f, lib)
    pos = {v: i for i, v in enumerate(f.variables)}
    factors = [_atom_factor(lib[a.name], [pos[v] for v in a.scope]) for a in f.atoms]
    multiplier = 1
    for name in elimination_order(f):
        v = pos[name]
        incident = [fa for fa in factors if v in fa.vars]
        if not incident:
            multiplier *= 2
            continue
        factors = [fa for fa in factors if v not in fa.vars]
        union = tuple(dict.fromkeys(u for fa in incident for u in fa.vars))
        factors.append(_sum_out(_multiply(incident, union), v))
    n = len(f.free_vars)
    result = _multiply(factors, tuple(range(n)))
    nums = [multiplier * x for x in result.nums]
    return FuncTable(n, nums, result.den, _result_mode(f, lib))


# ---------------------------------------------------------------------------
# tensor / contraction pipeline
# ---------------------------------------------------------------------------

# Equality gadgets grown from EQ3 alone.
CT_EQ1 = contract(EQ3)
CT_EQ2 = contract(tensor(CT_EQ1, EQ3))


def _bring_to_front(table: FuncTable, ports: list, a: int, b: int):
    """Permute so ports a and b become coordinates 1 and 2, then contract them."""
    rest = [i for i in range(len(ports)) if i not in (a, b)]
    order = [a, b] + rest
    # F_pi(x) = F(x_pi(1), ...): new coordinate order[j] must read old coordinate j.
    pi = [0] * len(order)
    for new, old in enumerate(order):
        pi[old] = new + 1
    table = contract(permute(table, pi))
    return table, [ports[i] for i in rest]


def _network(f: Formula, lib) -> list[tuple[FuncTable, list]]:
    """Components (table, port labels); every label is shared by exactly two ports
    except one ``("out", v)`` per free variable."""
    comps = []
    occurrences = {v: [] for v in f.variables}
    for j, atom in enumerate(f.atoms):
        table = CT_EQ2 if atom.name == "EQ2" else lib[atom.name]
        ports = []
        for p, v in enumerate(atom.scope):
            label = ("occ", j, p)
            ports.append(label)
            occurrences[v].append(label)
        comps.append((table, ports))
    free = set(f.free_vars)
    for v in f.variables:
        ends = occurrences[v] + [("out", v) if v in free else ("cap", v)]
        if v not in free:
            # Summing a variable out is a join with the constant EQ1.
            comps.append((CT_EQ1, [("cap", v)]))
        comps.extend(_equality_chain(v, ends))
    return comps


def _equality_chain(v, ends: list) -> list[tuple[FuncTable, list]]:
    t = len(ends)
    if t == 1:
        return [(CT_EQ1, ends)]
    if t == 2:
        return [(CT_EQ2, ends)]
    # EQ3(e1, e2, z1) EQ3(z1, e3, z2) ... EQ3(z_{t-3}, e_{t-1}, e_t)
    chain = []
    prev = ends[0]
    rest = ends[1:]
    for i in range(t - 3):
        link = ("link", v, i)
        chain.append((EQ3, [prev, rest[i], link]))
        prev = link
    chain.append((EQ3, [prev, rest[-2], rest[-1]]))
    return chain


def build_ctform_pipeline(f: Formula, lib: Mapping[str, FuncTable]) -> FuncTable:
    """Evaluate using only tensor, contract, permute and EQ3-derived gadgets.

    Each variable becomes a chain of EQ3 gadgets with one end per occurrence
    (plus an output end if free, or an EQ1 cap if bound).  Components are
    tensored in one at a time, choosing the one that leaves the smallest
    arity, and every wire whose two ends are both present is contracted.
    """
    validate(f, lib)
    comps = _network(f, lib)
    table = scalar(1)
    ports: list = []
    pending = list(range(len(comps)))
    while pending:
        def cost(ci):
            shared = sum(1 for p in comps[ci][1] if p in ports)
            return (len(ports) + len(comps[ci][1]) - 2 * shared, ci)

        ci = min(pending, key=cost)
        pending.remove(ci)
        comp_table, comp_ports = comps[ci]
        table = tensor(table, comp_table)
        ports = ports + list(comp_ports)
        while True:
            seen = {}
            pair = None
            for i, p in enumerate(ports):
                if p in seen:
                    pair = (seen[p], i)
                    break
                seen[p] = i
            if pair is None:
                break
            table, ports = _bring_to_front(table, ports, *pair)
    want = [("out", v) for v in f.free_vars]
    if sorted(ports) != sorted(want):
        raise FormulaError(f"dangling ports after contraction: {ports}")
    # Result coordinate j must read the port holding free variable j.
    pi = [0] * len(want)
    for j, label in enumerate(want):
        pi[ports.index(label)] = j + 1
    table = permute(table, pi)
    if _result_mode(f, lib) != table.mode:
        table = table.to_mode(_result_mode(f, lib))
    return table


ENGINES = {
    "naive": evaluate,
    "eliminate": evaluate_eliminate,
    "ctform": build_ctform_pipeline,
}


# ---------------------------------------------------------------------------
# random clone elements
# ---------------------------------------------------------------------------

SAMPLE_CAPS = {"free": 6, "bound": 10, "atoms": 12}


@dataclass(frozen=True)
class SampleParams:
    max_free: int = 4
    max_bound: int = 8
    max_atoms: int = 8
    min_atoms: int = 0
    kinds: tuple[str, ...] = ("IMP", "EQ2", "unary")

    def __post_init__(self):
        if not 0 <= self.max_free <= SAMPLE_CAPS["free"]:
            raise ValueError(f"max_free must be in 0..{SAMPLE_CAPS['free']}")
        if not 0 <= self.max_bound <= SAMPLE_CAPS["bound"]:
            raise ValueError(f"max_bound must be in 0..{SAMPLE_CAPS['bound']}")
        if not 0 <= self.min_atoms <= self.max_atoms <= SAMPLE_CAPS["atoms"]:
            raise ValueError(f"atom counts must satisfy 0 <= min <= max <= {SAMPLE_CAPS['atoms']}")
        if not self.kinds or any(k not in ("IMP", "EQ2", "unary") for k in self.kinds):
            raise ValueError("kinds must be a nonempty subset of IMP, EQ2, unary")


@dataclass(frozen=True)
class CloneSample:
    formula: Formula
    table: FuncTable
    library: FunctionLibrary = field(repr=False)

    def __iter__(self):
        return iter((self.formula, self.table))


def random_unary(rng: random.Random) -> FuncTable:
    """Unary table with entries p/q in [0, 4], q <= 16, each zero with probability 1/8."""
    vals = []
    for _ in range(2):
        if rng.random() < 1 / 8:
            vals.append(Fraction(0))
        else:
            q = rng.randint(1, 16)
            vals.append(Fraction(rng.randint(0, 4 * q), q))
    return make_table(1, vals)


def sample_formula(rng: random.Random, params: SampleParams = SampleParams()):
    n = rng.randint(0, params.max_free)
    m = rng.randint(0, params.max_bound)
    s = rng.randint(params.min_atoms, params.max_atoms)
    free = tuple(f"x{i + 1}" for i in range(n))
    bound = tuple(f"y{i + 1}" for i in range(m))
    names = free + bound
    atoms = []
    unaries = {}

    def pick():
        # Half the picks go to free variables so outputs rarely ignore them.
        if free and rng.random() < 0.5:
            return rng.choice(free)
        return rng.choice(names)

    if names:
        for _ in range(s):
            kind = rng.choice(params.kinds)
            if kind == "unary":
                name = f"U{len(unaries)}"
                unaries[name] = random_unary(rng)
                atoms.append(Atom(name, (pick(),)))
            else:
                atoms.append(Atom(kind, (pick(), pick())))
    return Formula(free, bound, tuple(atoms)), FunctionLibrary(unaries)


def sample_clone_element(seed: int, params: SampleParams = SampleParams()) -> CloneSample:
    """A random formula over IMP, EQ2 and fresh unary tables, with its table.

    Deterministic in ``seed``.  Unpacks as ``(formula, table)``; the unary
    tables the formula refers to are in ``.library``.
    """
    rng = random.Random(seed)
    formula, lib = sample_formula(rng, params)
    return CloneSample(formula, evaluate_eliminate(formula, lib), lib)


def describe_library(lib: FunctionLibrary) -> list[str]:
    return [
        f"{name} = [{', '.join(format_value(v) for v in table.values)}]"
        for name, table in lib.user_tables().items()
    ]
