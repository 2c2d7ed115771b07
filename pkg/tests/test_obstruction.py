import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given

from lsmsep import functable as ft
from lsmsep.errors import InternalInconsistency, LengthMismatch, NotNegative
from lsmsep.functable import (
    EQ3,
    IMP,
    S,
    PinningSpec,
    apply_pinning,
    contract,
    make_table,
    permute,
    tensor,
)
from lsmsep.lsm import is_lsm
from lsmsep.obstruction import (
    ApproximateObstruction,
    Membership,
    ObstructionCertificate,
    b_naive,
    b_spectrum,
    in_class_c,
    naive_spectrum,
    perturbation_bound,
    separation_epsilon,
    verify_certificate,
)

from conftest import points, rand_table, tables


def oracle_b(F, w):
    # Straight from the definition, over tuples and Fractions.
    total = Fraction(0)
    for x in points(F.arity):
        sign = (-1) ** sum(a * b for a, b in zip(x, w))
        total += F[x] * F[tuple(1 - a for a in x)] * sign
    return total


# -- B values -----------------------------------------------------------------


def test_b_of_s_all_ones():
    assert b_naive(S, (1, 1, 1, 1)) == -2
    # 4 - 8 + 6 - 8 + 4, grouped by the weight of x
    by_weight = {}
    for x in points(4):
        sign = (-1) ** sum(x)
        by_weight[sum(x)] = by_weight.get(sum(x), 0) + S[x] * S[tuple(1 - a for a in x)] * sign
    assert [by_weight[i] for i in range(5)] == [4, -8, 6, -8, 4]


def test_b_of_eq3_weight_two():
    for w in points(3):
        if sum(w) == 2:
            assert b_naive(EQ3, w) == 2


def test_b_of_imp():
    assert b_naive(IMP, (1, 1)) == 2 * (IMP(0, 0) * IMP(1, 1) - IMP(0, 1) * IMP(1, 0)) == 2
    assert b_spectrum(IMP).values == (2, 0, 0, 2)


def test_b_accepts_bitstrings_and_checks_length():
    assert b_naive(S, "1111") == -2
    assert b_spectrum(S)["1111"] == -2
    with pytest.raises(LengthMismatch):
        b_naive(S, (1, 1))


@given(tables(max_arity=4))
def test_b_naive_matches_definition(F):
    for w in points(F.arity):
        assert b_naive(F, w) == oracle_b(F, w)


def test_spectrum_equals_naive_for_all_w():
    rng = random.Random(1)
    for _ in range(200):
        F = rand_table(rng, rng.randint(0, 7))
        assert list(b_spectrum(F).values) == [b_naive(F, ft.bits_of(i, F.arity)) for i in range(len(F))]


def test_naive_spectrum_matches_fast_path():
    rng = random.Random(2)
    for k in range(6):
        F = rand_table(rng, k)
        assert naive_spectrum(F) == list(b_spectrum(F).values)


# -- identities ---------------------------------------------------------------


def test_small_or_odd_weight_is_nonnegative():
    rng = random.Random(3)
    for _ in range(300):
        F = rand_table(rng, rng.randint(0, 6))
        spec = b_spectrum(F)
        for i, v in enumerate(spec.values):
            weight = bin(i).count("1")
            if weight % 2:
                assert v == 0
            if weight < 2:
                assert v >= 0


def test_spectrum_invariant_under_complementing_inputs():
    rng = random.Random(4)
    for _ in range(100):
        F = rand_table(rng, rng.randint(0, 5))
        flipped = make_table(F.arity, list(reversed(F.values)))
        assert b_spectrum(flipped) == b_spectrum(F)


def test_multiplicative_under_tensor():
    rng = random.Random(5)
    for _ in range(150):
        F = rand_table(rng, rng.randint(0, 4))
        G = rand_table(rng, rng.randint(0, 4))
        FG = b_spectrum(tensor(F, G))
        bF, bG = b_spectrum(F), b_spectrum(G)
        for a in range(len(F)):
            for b in range(len(G)):
                assert FG.values[(a << G.arity) | b] == bF.values[a] * bG.values[b]


def test_contraction_decomposition():
    rng = random.Random(6)
    for _ in range(200):
        k = rng.randint(2, 6)
        F = rand_table(rng, k)
        F00 = apply_pinning(F, {1: 0, 2: 0})
        F11 = apply_pinning(F, {1: 1, 2: 1})
        T = contract(F)
        for w in points(k - 2):
            rhs = b_naive(F00, w) + b_naive(F11, w) + (b_naive(F, (0, 0) + w) + b_naive(F, (1, 1) + w)) / 2
            assert b_naive(T, w) == rhs


# -- membership ---------------------------------------------------------------


def test_eq3_is_member():
    assert isinstance(in_class_c(EQ3), Membership)
    assert in_class_c(EQ3).pinnings_checked == 27


def test_s_certificate():
    cert = in_class_c(S)
    assert cert == ObstructionCertificate(PinningSpec(), (1, 1, 1, 1), Fraction(-2))
    assert verify_certificate(S, cert)


def test_all_binary_lsm_tables_are_members():
    rng = random.Random(7)
    members = 0
    for _ in range(300):
        k = rng.randint(0, 2)
        F = rand_table(rng, k, zero_prob=0.3)
        if is_lsm(F).is_lsm:
            assert isinstance(in_class_c(F), Membership)
            members += 1
    assert members > 100


def test_binary_non_lsm_fails_exactly_at_11():
    assert in_class_c(ft.OR) == ObstructionCertificate(PinningSpec(), (1, 1), Fraction(-2))


def test_membership_is_permutation_invariant():
    rng = random.Random(8)
    for _ in range(150):
        k = rng.randint(0, 4)
        F = rand_table(rng, k, zero_prob=0.3)
        pi = rng.sample(range(1, k + 1), k)
        assert isinstance(in_class_c(F), Membership) == isinstance(in_class_c(permute(F, pi)), Membership)


def test_pruned_mode_agrees_with_full():
    rng = random.Random(9)
    verdicts = []
    for _ in range(500):
        F = rand_table(rng, rng.randint(0, 4), zero_prob=0.4)
        full = in_class_c(F)
        pruned = in_class_c(F, pruned=True)
        assert isinstance(full, Membership) == isinstance(pruned, Membership)
        if not isinstance(pruned, Membership):
            assert verify_certificate(F, pruned)
        verdicts.append(isinstance(full, Membership))
    assert 0 < sum(verdicts) < len(verdicts)


def _random_member(rng):
    if rng.random() < 0.3:
        return EQ3
    while True:
        F = rand_table(rng, rng.choice([1, 2]), zero_prob=0.3)
        if is_lsm(F).is_lsm:
            return F


def test_closed_under_tensor_contract_permute():
    rng = random.Random(10)
    for _ in range(100):
        F = _random_member(rng)
        for _ in range(rng.randint(1, 4)):
            op = rng.choice(["tensor", "contract", "permute"])
            if op == "tensor" and F.arity <= 4:
                F = tensor(F, _random_member(rng))
            elif op == "contract" and F.arity >= 2:
                F = contract(F)
            else:
                F = permute(F, rng.sample(range(1, F.arity + 1), F.arity))
        assert isinstance(in_class_c(F), Membership)


def test_certificate_order_is_by_pinning_size_then_w():
    # The padding coordinate pairs 0 with 1, so B vanishes until it is pinned;
    # pinnings of coordinates 1 and 2 leave unary tables with B >= 0.
    F = tensor(ft.OR, make_table(1, [0, 1]))
    assert all(v == 0 for v in b_spectrum(F).values)
    cert = in_class_c(F)
    assert cert == ObstructionCertificate(PinningSpec.of({3: 1}), (1, 1), Fraction(-2))
    assert cert.to_text() == "pin 3=1; w=11; value=-2/1"
    assert verify_certificate(F, cert)


def test_internal_inconsistency_is_raised(monkeypatch):
    from lsmsep import obstruction

    monkeypatch.setattr(obstruction, "b_naive", lambda F, w: Fraction(12345))
    with pytest.raises(InternalInconsistency):
        in_class_c(S)


# -- certificates ---------------------------------------------------------------


def test_verify_certificate_rejects_bad_values():
    assert not verify_certificate(S, ObstructionCertificate(PinningSpec(), (1, 1, 1, 1), Fraction(-3)))
    assert not verify_certificate(S, ObstructionCertificate(PinningSpec(), (1, 1), Fraction(-2)))
    assert not verify_certificate(S, ObstructionCertificate(PinningSpec.of({9: 0}), (1, 1, 1), Fraction(-2)))
    assert not verify_certificate(S, "w=1111; value=-2/1")


def test_no_certificate_verifies_for_eq3():
    for size in range(4):
        for coords in itertools.combinations((1, 2, 3), size):
            for vals in itertools.product((0, 1), repeat=size):
                spec = PinningSpec(tuple(zip(coords, vals)))
                for w in points(3 - size):
                    for value in (Fraction(-1), Fraction(-2), b_naive(apply_pinning(EQ3, spec), w)):
                        assert not verify_certificate(EQ3, ObstructionCertificate(spec, w, value))


def test_certificate_text_round_trip():
    cert = in_class_c(S)
    assert cert.to_text() == "w=1111; value=-2/1"
    assert ObstructionCertificate.from_text(cert.to_text()) == cert
    c2 = ObstructionCertificate(PinningSpec.of({3: 1, 1: 0}), (1, 1), Fraction(-5, 7))
    assert c2.to_text() == "pin 1=0; pin 3=1; w=11; value=-5/7"
    assert ObstructionCertificate.from_text(c2.to_text()) == c2
    for bad in ("w=11", "value=-1", "pin 1=2; w=1; value=-1", "w=11; value=-1; junk"):
        with pytest.raises(ValueError):
            ObstructionCertificate.from_text(bad)


def test_float_mode_refuses_certificates():
    Sf = S.to_mode(ft.FLOAT)
    res = in_class_c(Sf)
    assert isinstance(res, ApproximateObstruction)
    assert res.w == (1, 1, 1, 1) and res.value == pytest.approx(-2.0)
    assert not verify_certificate(Sf, res)
    assert isinstance(in_class_c(EQ3.to_mode(ft.FLOAT)), Membership)


# -- separation epsilon --------------------------------------------------------------


def test_separation_epsilon_for_s():
    assert S.total() == 23
    eps = Fraction(1, 25)
    assert 46 * eps + 16 * eps**2 < 2
    assert perturbation_bound(S, eps) == 46 * eps + 16 * eps**2
    got = separation_epsilon(S, (1, 1, 1, 1))
    assert got >= Fraction(1, 25)
    assert got == Fraction(1, 24)
    assert perturbation_bound(S, got) < 2 <= perturbation_bound(S, Fraction(1, 23))


def test_separation_epsilon_not_negative():
    with pytest.raises(NotNegative):
        separation_epsilon(EQ3, (1, 1, 0))


def test_separation_epsilon_is_safe_for_random_obstructions():
    rng = random.Random(11)
    found = 0
    while found < 20:
        F = rand_table(rng, rng.randint(2, 4), zero_prob=0.3)
        cert = in_class_c(F)
        if isinstance(cert, Membership) or cert.pinning.items:
            continue
        found += 1
        eps = separation_epsilon(F, cert.w)
        assert eps > 0
        for _ in range(200):
            G = make_table(F.arity, [max(Fraction(0), v + eps * Fraction(rng.randint(-100, 100), 100)) for v in F.values])
            assert b_naive(G, cert.w) < 0


def test_separation_epsilon_denominator_cap():
    with pytest.raises(ValueError):
        separation_epsilon(S, (1, 1, 1, 1), max_denominator=10)
