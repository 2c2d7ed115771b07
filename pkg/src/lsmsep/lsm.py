"""Log-supermodularity checks.

``is_lsm`` is the authoritative brute force over all pairs of points.
``is_lsm_pairwise`` is the Topkis-style shortcut that only inspects
restrictions with two free coordinates; it is accepted only for strictly
positive tables, where it is known to agree with the brute force.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import NotStrictlyPositive
from .functable import FuncTable, bits_of, format_value


@dataclass(frozen=True)
class PairCheck:
    """One inequality F'(1,1) F'(0,0) >= F'(0,1) F'(1,0) on a binary restriction."""

    free: tuple[int, int]
    pinned: tuple[tuple[int, int], ...]
    f11: object
    f00: object
    f01: object
    f10: object

    @property
    def holds(self) -> bool:
        return self.f11 * self.f00 >= self.f01 * self.f10

    def __str__(self) -> str:
        v = [format_value(x) for x in (self.f11, self.f00, self.f01, self.f10)]
        return f"{v[0]}·{v[1]} ≥ {v[2]}·{v[3]}"


@dataclass(frozen=True)
class LsmVerdict:
    is_lsm: bool
    witness: tuple[tuple[int, ...], tuple[int, ...]] | None = None
    checks: tuple[PairCheck, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.is_lsm != (self.witness is None):
            raise ValueError("witness must be present exactly when the verdict is negative")

    def __bool__(self) -> bool:
        return self.is_lsm


def violates(F: FuncTable, x, y) -> bool:
    """Replay the defining inequality on raw entries."""
    join = tuple(max(a, b) for a, b in zip(x, y))
    meet = tuple(min(a, b) for a, b in zip(x, y))
    return F[join] * F[meet] < F[x] * F[y]


def is_lsm(F: FuncTable) -> LsmVerdict:
    """Check F(x|y) F(x&y) >= F(x) F(y) over all 4^k pairs.

    The reported witness is the first failing pair in lexicographic order of
    (index(x), index(y)).
    """
    nums, _ = F.scaled
    size = len(nums)
    for xi in range(size):
        fx = nums[xi]
        for yi in range(size):
            if nums[xi | yi] * nums[xi & yi] < fx * nums[yi]:
                k = F.arity
                return LsmVerdict(False, (bits_of(xi, k), bits_of(yi, k)))
    return LsmVerdict(True)


def is_lsm_pairwise(F: FuncTable) -> LsmVerdict:
    """Topkis shortcut: every restriction with two free coordinates is lsm.

    Raises NotStrictlyPositive when F has a zero entry; use ``is_lsm`` then.
    """
    if not F.is_strictly_positive():
        raise NotStrictlyPositive("pairwise lsm check requires every entry > 0")
    k = F.arity
    checks = []
    witness = None
    for i, j in itertools.combinations(range(1, k + 1), 2):
        rest = [c for c in range(1, k + 1) if c not in (i, j)]
        for vals in itertools.product((0, 1), repeat=len(rest)):
            point = dict(zip(rest, vals))

            def at(a, b):
                point[i], point[j] = a, b
                return tuple(point[c] for c in range(1, k + 1))

            chk = PairCheck(
                (i, j), tuple(zip(rest, vals)),
                F[at(1, 1)], F[at(0, 0)], F[at(0, 1)], F[at(1, 0)],
            )
            checks.append(chk)
            if witness is None and not chk.holds:
                witness = (at(0, 1), at(1, 0))
    return LsmVerdict(witness is None, witness, tuple(checks))


def distinct_inequalities(verdict: LsmVerdict) -> list[str]:
    """The distinct inequalities a pairwise verdict relied on, in first-seen order."""
    seen = {}
    for chk in verdict.checks:
        seen.setdefault(str(chk), None)
    return list(seen)
