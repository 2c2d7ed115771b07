"""The obstruction functional B and membership in the pinning-closed class C.

For a table F of arity k and a weight vector w,

    B(F, w) = sum_x F(x) F(1 - x) (-1)^(x . w)

which is the unnormalised Walsh-Hadamard coefficient at w of the function
g(x) = F(x) F(1 - x).  A table is in C when every pinning of it has B >= 0
at every w.  A negative value, together with the pinning and w that produced
it, is a certificate of non-membership.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    ArityTooLarge,
    InternalInconsistency,
    LengthMismatch,
    NotNegative,
)
from .functable import (
    DEFAULT_PIN_CAP,
    MAX_ARITY,
    FuncTable,
    PinningSpec,
    apply_pinning,
    bits_of,
    format_bits,
    format_value,
    index_of,
    iter_pinning_specs,
    parse_bits,
)

# Float sign decisions within this relative band of zero are not trusted.
FLOAT_TOLERANCE_EXP = -40


def _weight_index(F: FuncTable, w) -> int:
    if isinstance(w, str):
        w = parse_bits(w)
    w = tuple(w)
    if len(w) != F.arity:
        raise LengthMismatch(f"weight vector of length {len(w)} for arity {F.arity}")
    return index_of(w)


def _scale_back(F: FuncTable, total):
    nums, den = F.scaled
    if F.exact:
        return Fraction(total, den * den)
    return total


def b_naive(F: FuncTable, w) -> Fraction:
    """B(F, w) by direct summation over all 2^k points."""
    wi = _weight_index(F, w)
    nums, _ = F.scaled
    mask = len(nums) - 1
    total = 0
    for x in range(len(nums)):
        term = nums[x] * nums[mask ^ x]
        if (x & wi).bit_count() & 1:
            total -= term
        else:
            total += term
    return _scale_back(F, total)


def naive_spectrum(F: FuncTable) -> list:
    """All 2^k values of B by direct summation, O(4^k); benchmarking baseline."""
    nums, _ = F.scaled
    mask = len(nums) - 1
    g = [nums[x] * nums[mask ^ x] for x in range(len(nums))]
    out = []
    for wi in range(len(g)):
        total = 0
        for x, gx in enumerate(g):
            if (x & wi).bit_count() & 1:
                total -= gx
            else:
                total += gx
        out.append(_scale_back(F, total))
    return out


def _wht_inplace(a: list) -> list:
    h = 1
    n = len(a)
    while h < n:
        for start in range(0, n, h << 1):
            for i in range(start, start + h):
                u, v = a[i], a[i + h]
                a[i], a[i + h] = u + v, u - v
        h <<= 1
    return a


def _raw_spectrum(F: FuncTable) -> list:
    # Entries are B scaled by den^2 (positive), so signs are those of B.
    nums, _ = F.scaled
    mask = len(nums) - 1
    return _wht_inplace([nums[x] * nums[mask ^ x] for x in range(len(nums))])


@dataclass(frozen=True)
class BSpectrum:
    arity: int
    values: tuple

    def __getitem__(self, w):
        if isinstance(w, int):
            return self.values[w]
        if isinstance(w, str):
            w = parse_bits(w)
        return self.values[index_of(w)]

    def __len__(self) -> int:
        return len(self.values)

    def negative_entries(self) -> list[tuple[tuple[int, ...], object]]:
        return [(bits_of(i, self.arity), v) for i, v in enumerate(self.values) if v < 0]


def b_spectrum(F: FuncTable) -> BSpectrum:
    """Every B(F, w) at once via the fast Walsh-Hadamard transform, O(k 2^k)."""
    if F.arity > MAX_ARITY:
        raise ArityTooLarge(f"arity {F.arity} exceeds {MAX_ARITY}")
    return BSpectrum(F.arity, tuple(_scale_back(F, v) for v in _raw_spectrum(F)))


# ---------------------------------------------------------------------------
# certificates and membership
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ObstructionCertificate:
    pinning: PinningSpec
    w: tuple[int, ...]
    value: Fraction

    def to_text(self) -> str:
        parts = [f"pin {c}={v}" for c, v in self.pinning.items]
        parts.append(f"w={format_bits(self.w)}")
        v = Fraction(self.value)
        parts.append(f"value={v.numerator}/{v.denominator}")
        return "; ".join(parts)

    @classmethod
    def from_text(cls, text: str) -> ObstructionCertificate:
        pins = {}
        w = value = None
        for part in (p.strip() for p in text.strip().split(";")):
            if not part:
                continue
            m = re.fullmatch(r"pin\s+(\d+)\s*=\s*([01])", part)
            if m:
                coord = int(m.group(1))
                if coord in pins:
                    raise ValueError(f"coordinate {coord} pinned twice")
                pins[coord] = int(m.group(2))
                continue
            m = re.fullmatch(r"w\s*=\s*([01]*)", part)
            if m and w is None:
                w = parse_bits(m.group(1))
                continue
            m = re.fullmatch(r"value\s*=\s*(\S+)", part)
            if m and value is None:
                value = Fraction(m.group(1))
                continue
            raise ValueError(f"unrecognised certificate part {part!r}")
        if w is None or value is None:
            raise ValueError("certificate needs both w= and value=")
        return cls(PinningSpec.of(pins), w, value)

    def __str__(self) -> str:
        return self.to_text()


@dataclass(frozen=True)
class Membership:
    """No obstruction found: every pinning has B >= 0 at every w checked.

    This does not claim the table is definable over any particular clone.
    """

    pinnings_checked: int
    pruned: bool = False


@dataclass(frozen=True)
class ApproximateObstruction:
    """A float-mode negative B beyond tolerance. Not a certificate."""

    pinning: PinningSpec
    w: tuple[int, ...]
    value: float
    tolerance: float


def _checked_weights(k: int, pruned: bool):
    if not pruned:
        return range(1 << k)
    # Odd weights give exactly 0; weight 0 is a sum of nonnegative terms.
    return [w for w in range(1 << k) if w.bit_count() >= 2 and w.bit_count() % 2 == 0]


def in_class_c(
    F: FuncTable,
    pruned: bool = False,
    cap: int = DEFAULT_PIN_CAP,
    force: bool = False,
):
    """Search all pinnings of F for a negative B value.

    Pinnings are visited by (size, coordinates, values) and w by index, so
    the first certificate is reproducible.  Returns ``Membership`` or an
    ``ObstructionCertificate`` (``ApproximateObstruction`` for float tables).
    Every certificate is re-checked with ``b_naive`` before it is returned.
    """
    if F.arity > cap and not force:
        raise ArityTooLarge(f"arity {F.arity} exceeds pinning-enumeration cap {cap}")
    count = 0
    weights = {}
    for spec in iter_pinning_specs(F.arity):
        count += 1
        P = apply_pinning(F, spec)
        k = P.arity
        if pruned and k < 2:
            continue
        if k not in weights:
            weights[k] = _checked_weights(k, pruned)
        raw = _raw_spectrum(P)
        if F.exact:
            for wi in weights[k]:
                if raw[wi] < 0:
                    return _certify(P, spec, bits_of(wi, k), _scale_back(P, raw[wi]))
        else:
            nums, _ = P.scaled
            top = max(nums) if nums else 0.0
            tol = (1 << k) * 2.0 ** FLOAT_TOLERANCE_EXP * top * top
            for wi in weights[k]:
                if raw[wi] < -tol:
                    return ApproximateObstruction(spec, bits_of(wi, k), raw[wi], tol)
    return Membership(count, pruned)


def _certify(P: FuncTable, spec: PinningSpec, w, value) -> ObstructionCertificate:
    check = b_naive(P, w)
    if check != value:
        raise InternalInconsistency(
            f"fast spectrum gave {value} but direct sum gave {check} at {spec}, w={format_bits(w)}"
        )
    return ObstructionCertificate(spec, tuple(w), value)


def verify_certificate(F: FuncTable, cert) -> bool:
    """Independent replay of a certificate using only the direct sum."""
    try:
        if not F.exact or not isinstance(cert, ObstructionCertificate):
            return False
        value = Fraction(cert.value)
        if value >= 0:
            return False
        P = apply_pinning(F, cert.pinning)
        return b_naive(P, cert.w) == value
    except (ValueError, TypeError):
        return False


# ---------------------------------------------------------------------------
# robustness of a negative value
# ---------------------------------------------------------------------------


def perturbation_bound(F: FuncTable, eps) -> Fraction:
    """Upper bound on |B(G, w) - B(F, w)| over all G with ||G - F||_inf <= eps.

    Each term changes by at most eps (F(x) + F(1-x)) + eps^2, so summing
    over x gives 2 eps sum(F) + 2^k eps^2.
    """
    eps = Fraction(eps)
    return 2 * eps * F.total() + (1 << F.arity) * eps * eps


def separation_epsilon(F: FuncTable, w, max_denominator: int = 10**6) -> Fraction:
    """Largest 1/n with perturbation_bound(F, 1/n) < |B(F, w)|.

    Every G within 1/n of F in the sup norm then still has B(G, w) < 0.
    """
    if not F.exact:
        raise ValueError("separation_epsilon requires an exact table")
    b = b_naive(F, w)
    if b >= 0:
        raise NotNegative(f"B(F, w) = {format_value(b)} is not negative")
    gap = -b
    total = F.total()
    size = 1 << F.arity
    # gap n^2 - 2 total n - size > 0; start just below the positive root.
    root = (2 * total + math.sqrt(float(4 * total * total + 4 * gap * size))) / (2 * gap)
    n = max(1, math.floor(root) - 1)
    while perturbation_bound(F, Fraction(1, n)) >= gap:
        n += 1
    while n > 1 and perturbation_bound(F, Fraction(1, n - 1)) < gap:
        n -= 1
    if n > max_denominator:
        raise ValueError(f"no bound of the form 1/n with n <= {max_denominator}")
    return Fraction(1, n)
