import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from lsmsep.functable import make_table

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def rand_value(rng, zero_prob=0.15, max_num=12, max_den=6):
    if rng.random() < zero_prob:
        return Fraction(0)
    return Fraction(rng.randint(0, max_num), rng.randint(1, max_den))


def rand_table(rng, k, **kw):
    return make_table(k, [rand_value(rng, **kw) for _ in range(1 << k)])


def rand_positive_table(rng, k):
    return make_table(k, [Fraction(rng.randint(1, 9), rng.randint(1, 4)) for _ in range(1 << k)])


def points(k):
    return list(itertools.product((0, 1), repeat=k))


@pytest.fixture
def rng():
    return random.Random(12345)


values = st.fractions(min_value=0, max_value=8, max_denominator=6)


@st.composite
def tables(draw, min_arity=0, max_arity=4):
    k = draw(st.integers(min_arity, max_arity))
    return make_table(k, draw(st.lists(values, min_size=1 << k, max_size=1 << k)))


def random_formula(rng, n_max=4, m_max=8, s_max=8):
    """Random formula over the builtins plus fresh unary tables."""
    from lsmsep.ppsformula import Atom, Formula, FunctionLibrary, random_unary

    builtin_arity = {"IMP": 2, "EQ1": 1, "EQ2": 2, "EQ3": 3}
    n, m, s = rng.randint(0, n_max), rng.randint(0, m_max), rng.randint(0, s_max)
    names = [f"x{i}" for i in range(n)] + [f"y{i}" for i in range(m)]
    tables = {}
    atoms = []
    if names:
        for _ in range(s):
            kind = rng.choice(["IMP", "EQ1", "EQ2", "EQ3", "U"])
            if kind == "U":
                kind = f"U{len(tables)}"
                tables[kind] = random_unary(rng)
            arity = tables[kind].arity if kind in tables else builtin_arity[kind]
            atoms.append(Atom(kind, tuple(rng.choice(names) for _ in range(arity))))
    return Formula(tuple(names[:n]), tuple(names[n:]), tuple(atoms)), FunctionLibrary(tables)
