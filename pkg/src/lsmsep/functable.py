"""Nonnegative function tables over {0,1}^k.

A table of arity k stores 2^k values in index order, where the first
coordinate is the most significant bit:

    index(x) = x_1 * 2^(k-1) + ... + x_k * 2^0

Exact tables keep integer numerators over one shared positive denominator
(always reduced), so every operation here is plain integer arithmetic and
no rounding ever happens.  Float tables reuse the same layout with float
numerators and denominator 1; they exist for benchmarking only.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    ArityTooLarge,
    ArityTooSmall,
    IndexOutOfRange,
    LengthMismatch,
    NegativeValue,
    NotABijection,
    TableParseError,
)

MAX_ARITY = 24
DEFAULT_PIN_CAP = 12

EXACT = "exact"
FLOAT = "float"


# ---------------------------------------------------------------------------
# bit vectors
# ---------------------------------------------------------------------------


def index_of(bits: Sequence[int]) -> int:
    """Index of a point, x_1 most significant."""
    idx = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"not a bit: {b!r}")
        idx = (idx << 1) | b
    return idx


def bits_of(index: int, k: int) -> tuple[int, ...]:
    return tuple((index >> (k - 1 - j)) & 1 for j in range(k))


def complement(bits: Sequence[int]) -> tuple[int, ...]:
    return tuple(1 - b for b in bits)


def parse_bits(text: str) -> tuple[int, ...]:
    text = text.strip()
    if any(c not in "01" for c in text):
        raise ValueError(f"not a bitstring: {text!r}")
    return tuple(int(c) for c in text)


def format_bits(bits: Sequence[int]) -> str:
    return "".join(str(b) for b in bits)


# ---------------------------------------------------------------------------
# the table type
# ---------------------------------------------------------------------------


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise TableParseError(f"bad value {v!r}") from exc
    return Fraction(v)


class FuncTable:
    """Immutable table of a function {0,1}^k -> R>=0."""

    __slots__ = ("arity", "_nums", "_den", "mode", "_hash")

    def __init__(self, arity: int, nums: Sequence, den=1, mode: str = EXACT):
        # Internal constructor; use make_table() for validated input.
        self.arity = arity
        if mode == EXACT:
            nums = tuple(nums)
            g = math.gcd(den, *nums) if nums else den
            if g > 1:
                nums = tuple(n // g for n in nums)
                den //= g
            self._nums = nums
            self._den = den
        else:
            self._nums = tuple(float(n) / den for n in nums)
            self._den = 1
        self.mode = mode
        self._hash = None

    # -- access --------------------------------------------------------

    @property
    def exact(self) -> bool:
        return self.mode == EXACT

    @property
    def scaled(self) -> tuple[tuple, int]:
        """(numerators, common denominator); value(i) = nums[i] / den."""
        return self._nums, self._den

    @property
    def values(self) -> tuple:
        if self.exact:
            d = self._den
            return tuple(Fraction(n, d) for n in self._nums)
        return self._nums

    def value(self, index: int):
        if self.exact:
            return Fraction(self._nums[index], self._den)
        return self._nums[index]

    def __len__(self) -> int:
        return len(self._nums)

    def __getitem__(self, x):
        if isinstance(x, int):
            return self.value(x)
        x = tuple(x)
        if len(x) != self.arity:
            raise LengthMismatch(f"point of length {len(x)} for arity {self.arity}")
        return self.value(index_of(x))

    def __call__(self, *bits: int):
        return self[bits]

    def total(self):
        if self.exact:
            return Fraction(sum(self._nums), self._den)
        return sum(self._nums)

    def is_strictly_positive(self) -> bool:
        return all(n > 0 for n in self._nums)

    def to_mode(self, mode: str) -> FuncTable:
        if mode == self.mode:
            return self
        if mode == FLOAT:
            return FuncTable(self.arity, self._nums, self._den, FLOAT)
        return FuncTable(self.arity, *_scale([Fraction(v) for v in self._nums]))

    # -- comparison ----------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, FuncTable):
            return NotImplemented
        if self.arity != other.arity:
            return False
        if self.exact and other.exact:
            return self._den == other._den and self._nums == other._nums
        return self.values == other.values

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.arity, self.values))
        return self._hash

    def __repr__(self) -> str:
        vals = ", ".join(format_value(v) for v in self.values)
        return f"FuncTable({self.arity}, [{vals}])"


def _scale(fracs: Sequence[Fraction]) -> tuple[tuple[int, ...], int]:
    den = math.lcm(*(f.denominator for f in fracs)) if fracs else 1
    return tuple(f.numerator * (den // f.denominator) for f in fracs), den


def make_table(arity: int, values: Iterable, mode: str = EXACT) -> FuncTable:
    """Build a table from values listed in index order.

    Values may be ints, Fractions, floats or strings such as ``"3/4"`` and
    ``"0.25"``; in exact mode all of them are converted without rounding.
    """
    if arity < 0:
        raise ValueError("arity must be nonnegative")
    if arity > MAX_ARITY:
        raise ArityTooLarge(f"arity {arity} exceeds {MAX_ARITY}")
    values = list(values)
    if len(values) != 1 << arity:
        raise LengthMismatch(f"arity {arity} needs {1 << arity} values, got {len(values)}")
    if mode == EXACT:
        fracs = [_as_fraction(v) for v in values]
        if any(f < 0 for f in fracs):
            raise NegativeValue("table entries must be nonnegative")
        nums, den = _scale(fracs)
        return FuncTable(arity, nums, den)
    if mode != FLOAT:
        raise ValueError(f"unknown mode {mode!r}")
    floats = [float(_as_fraction(v)) if isinstance(v, str) else float(v) for v in values]
    if any(not (f >= 0) for f in floats):
        raise NegativeValue("table entries must be nonnegative")
    return FuncTable(arity, floats, 1, FLOAT)


def from_function(arity: int, fn, mode: str = EXACT) -> FuncTable:
    """Tabulate ``fn(x_1, ..., x_k)`` over all points in index order."""
    return make_table(arity, [fn(*bits_of(i, arity)) for i in range(1 << arity)], mode)


def scalar(value=1, mode: str = EXACT) -> FuncTable:
    return make_table(0, [value], mode)


# ---------------------------------------------------------------------------
# primitive operations
# ---------------------------------------------------------------------------


def _reindexed(F: FuncTable, arity: int, src: np.ndarray) -> FuncTable:
    nums = F._nums
    return FuncTable(arity, [nums[i] for i in src.tolist()], F._den, F.mode)


def _common_mode(F: FuncTable, G: FuncTable) -> tuple[FuncTable, FuncTable]:
    if F.mode == G.mode:
        return F, G
    return F.to_mode(FLOAT), G.to_mode(FLOAT)


def tensor(F: FuncTable, G: FuncTable) -> FuncTable:
    """(F (x) G)(x, y) = F(x) G(y), F's coordinates first."""
    k = F.arity + G.arity
    if k > MAX_ARITY:
        raise ArityTooLarge(f"tensor arity {k} exceeds {MAX_ARITY}")
    F, G = _common_mode(F, G)
    gn = G._nums
    nums = [a * b for a in F._nums for b in gn]
    return FuncTable(k, nums, F._den * G._den, F.mode)


def contract(F: FuncTable) -> FuncTable:
    """Sum F over the diagonal of its first two coordinates."""
    k = F.arity
    if k < 2:
        raise ArityTooSmall("contraction needs arity >= 2")
    stride = 3 << (k - 2)
    n = F._nums
    return FuncTable(k - 2, [n[y] + n[y + stride] for y in range(1 << (k - 2))], F._den, F.mode)


def check_permutation(pi: Sequence[int], k: int) -> tuple[int, ...]:
    pi = tuple(pi)
    if len(pi) != k:
        raise LengthMismatch(f"permutation of length {len(pi)} for arity {k}")
    if sorted(pi) != list(range(1, k + 1)):
        raise NotABijection(f"{pi} is not a permutation of 1..{k}")
    return pi


def compose(sigma: Sequence[int], pi: Sequence[int]) -> tuple[int, ...]:
    """(sigma o pi)(i) = sigma(pi(i)), 1-based."""
    return tuple(sigma[p - 1] for p in pi)


def permute(F: FuncTable, pi: Sequence[int]) -> FuncTable:
    """F_pi(x_1..x_k) = F(x_pi(1), ..., x_pi(k)) with 1-based pi."""
    k = F.arity
    pi = check_permutation(pi, k)
    if pi == tuple(range(1, k + 1)):
        return F
    idx = np.arange(1 << k, dtype=np.int64)
    src = np.zeros_like(idx)
    for j, p in enumerate(pi, start=1):
        src |= ((idx >> (k - p)) & 1) << (k - j)
    return _reindexed(F, k, src)


def pin(F: FuncTable, i: int, v: int) -> FuncTable:
    """Fix coordinate i (1-based) to v; later coordinates shift down."""
    k = F.arity
    if not 1 <= i <= k:
        raise IndexOutOfRange(f"coordinate {i} out of range for arity {k}")
    if v not in (0, 1):
        raise ValueError(f"pinned value must be 0 or 1, got {v!r}")
    p = k - i
    y = np.arange(1 << (k - 1), dtype=np.int64)
    src = ((y >> p) << (p + 1)) | (v << p) | (y & ((1 << p) - 1))
    return _reindexed(F, k - 1, src)


@dataclass(frozen=True)
class PinningSpec:
    """A partial assignment of original coordinates (1-based) to bits.

    Stored as sorted (coordinate, value) pairs, so two specs built from the
    same assignment in different orders compare equal.
    """

    items: tuple[tuple[int, int], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[int, int] | Iterable[tuple[int, int]] = ()) -> PinningSpec:
        pairs = dict(mapping.items() if isinstance(mapping, Mapping) else mapping)
        for c, v in pairs.items():
            if v not in (0, 1):
                raise ValueError(f"pinned value must be 0 or 1, got {v!r}")
            if c < 1:
                raise IndexOutOfRange(f"coordinate {c} out of range")
        return cls(tuple(sorted(pairs.items())))

    @property
    def domain(self) -> tuple[int, ...]:
        return tuple(c for c, _ in self.items)

    def as_dict(self) -> dict[int, int]:
        return dict(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def to_text(self) -> str:
        return "; ".join(f"pin {c}={v}" for c, v in self.items)

    def __str__(self) -> str:
        return "{" + ", ".join(f"{c}->{v}" for c, v in self.items) + "}"


def apply_pinning(F: FuncTable, spec: PinningSpec | Mapping[int, int]) -> FuncTable:
    """Apply every pin of ``spec`` (coordinates refer to F's original numbering)."""
    if not isinstance(spec, PinningSpec):
        spec = PinningSpec.of(spec)
    k = F.arity
    for c in spec.domain:
        if not 1 <= c <= k:
            raise IndexOutOfRange(f"coordinate {c} out of range for arity {k}")
    if not spec.items:
        return F
    fixed = 0
    for c, v in spec.items:
        fixed |= v << (k - c)
    free = [c for c in range(1, k + 1) if c not in spec.as_dict()]
    r = len(free)
    y = np.arange(1 << r, dtype=np.int64)
    src = np.full_like(y, fixed)
    for j, c in enumerate(free, start=1):
        src |= ((y >> (r - j)) & 1) << (k - c)
    return _reindexed(F, r, src)


def iter_pinning_specs(k: int) -> Iterator[PinningSpec]:
    """All 3^k pinnings of an arity-k table, by (size, coordinates, values)."""
    for size in range(k + 1):
        for coords in itertools.combinations(range(1, k + 1), size):
            for vals in itertools.product((0, 1), repeat=size):
                yield PinningSpec(tuple(zip(coords, vals)))


def enumerate_pinnings(
    F: FuncTable, cap: int = DEFAULT_PIN_CAP, force: bool = False
) -> Iterator[tuple[PinningSpec, FuncTable]]:
    if F.arity > cap and not force:
        raise ArityTooLarge(f"arity {F.arity} exceeds pinning-enumeration cap {cap}")
    for spec in iter_pinning_specs(F.arity):
        yield spec, apply_pinning(F, spec)


# ---------------------------------------------------------------------------
# named tables
# ---------------------------------------------------------------------------

IMP = make_table(2, [1, 1, 0, 1])
OR = make_table(2, [0, 1, 1, 1])
EQ1 = make_table(1, [1, 1])
EQ2 = make_table(2, [1, 0, 0, 1])
EQ3 = from_function(3, lambda a, b, c: int(a == b == c))
# Witness of the separation: 4 on weight 4, 2 on weight 3, 1 elsewhere.
S = from_function(4, lambda *x: {4: 4, 3: 2}.get(sum(x), 1))

BUILTINS = {"IMP": IMP, "EQ1": EQ1, "EQ2": EQ2, "EQ3": EQ3, "S": S, "OR": OR}


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------


def format_value(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return repr(v)


def dumps_table(F: FuncTable) -> str:
    lines = [f"arity {F.arity}"]
    lines.extend(format_value(v) for v in F.values)
    return "\n".join(lines) + "\n"


def loads_table(text: str, mode: str = EXACT) -> FuncTable:
    """Parse the line-oriented table format (``arity k`` then 2^k values)."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line))
    if not rows:
        raise TableParseError("empty table file")
    lineno, header = rows[0]
    parts = header.split()
    if len(parts) != 2 or parts[0] != "arity" or not parts[1].isdigit():
        raise TableParseError(f"line {lineno}: expected 'arity k', got {header!r}")
    k = int(parts[1])
    values = []
    for lineno, line in rows[1:]:
        try:
            values.append(Fraction(line))
        except (ValueError, ZeroDivisionError) as exc:
            raise TableParseError(f"line {lineno}: bad value {line!r}") from exc
    return make_table(k, values, mode)


def load_table(path, mode: str = EXACT) -> FuncTable:
    with open(path, encoding="utf-8") as fh:
        return loads_table(fh.read(), mode)
