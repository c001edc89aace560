from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cheapreal.errors import MuCapExceeded, UnverifiableError
from cheapreal.infinitesimal import (INFINITELY_LARGE, INFINITESIMAL, LIMITED, UNKNOWN,
                                     Equivalence, EffectiveInfinitesimal, canonical_eps,
                                     certify_monotone, chain, classify, dominate_witness,
                                     effective_wrt, feasible_stop, harmonic, harmonic_witness,
                                     is_effective,
                                     ladder, monotone_to_canonical, validate_witness)
from cheapreal.parse import parse_cheap
from cheapreal.seq import from_function, lift, shift_binary

from conftest import INFINITELY_LARGE as LARGE_CORPUS, INFINITESIMALS, LIMITED as LIMITED_CORPUS, SLOW

MONOTONE = ["2^-omega", "1/(omega+1)", "1/(omega^2+1)", "3/(omega+1)", "1/(omega//2+1)",
            "1/clog2(omega+2)"]


def brute_shift(x, y, k, ok, limit=10**6):
    """Least s with ok(x_{k+s}, y_k), by direct search."""
    s = 0
    while not ok(x.at(k + s), y.at(k)):
        s += 1
        assert s < limit
    return s


def test_ladder():
    assert ladder(1000) == [1, 2, 4, 8, 16, 32, 64, 128, 256, 512]
    assert ladder(1) == [1]


@pytest.mark.parametrize("text", INFINITESIMALS)
def test_classify_infinitesimals(text):
    c = classify(parse_cheap(text), 1000)
    assert c.kind == INFINITESIMAL and c.checked_up_to == 512


@pytest.mark.parametrize("text", LARGE_CORPUS)
def test_classify_infinitely_large(text):
    assert classify(parse_cheap(text), 1000).kind == INFINITELY_LARGE


@pytest.mark.parametrize("text", LIMITED_CORPUS)
def test_classify_limited(text):
    assert classify(parse_cheap(text), 1000).kind == LIMITED


@pytest.mark.parametrize("text", SLOW)
def test_slow_numbers_are_not_overclaimed(text):
    assert classify(parse_cheap(text), 1000).kind in (LIMITED, UNKNOWN)


def test_classify_examples():
    assert classify(parse_cheap("2^omega"), 1000).kind == INFINITELY_LARGE
    c = classify(lift(3), 1000)
    assert c.kind == LIMITED and c.checked_up_to == 4


def test_classify_never_overclaims():
    # x_n = n for n < 5000, then 0: looks infinitely large within 1000
    late = from_function(lambda n: n if n < 5000 else 0, "late")
    assert classify(late, 1000).checked_up_to == 512
    # growth too slow to show up is not called infinitely large
    slow = parse_cheap("ilog2(ilog2(omega+2)+1)")
    assert classify(slow, 1000).kind in (LIMITED, UNKNOWN)


@pytest.mark.parametrize("text", ["omega", "2^omega", "omega^2 - omega", "omega + 1",
                                  "isqrt(omega) + 1", "3", "1/(omega+1)", "5/2"])
def test_inverse_duality(text):
    x = parse_cheap(text)
    inv = from_function(lambda n: 1 / Fraction(x.at(n)) if x.at(n) else Fraction(1), "inv")
    big = classify(x, 1000).kind == INFINITELY_LARGE
    small = classify(inv, 1000).kind == INFINITESIMAL
    assert big == small


def test_canonical_eps():
    e = canonical_eps()
    assert e.value.at(4) == Fraction(1, 16)
    assert classify(e.value, 1000).kind == INFINITESIMAL
    assert e.check(2000) is None


def test_certify_monotone():
    for text in MONOTONE:
        assert certify_monotone(parse_cheap(text)) is not None, text
    assert certify_monotone(parse_cheap("(2 + (-1)^omega)/(omega+1)")) is None
    assert certify_monotone(parse_cheap("omega")) is None


def test_dominate_large():
    w = parse_cheap("omega")
    sq = parse_cheap("omega^2")
    d = dominate_witness(w, sq)
    for k in range(200):
        assert d.at(k) == brute_shift(w, sq, k, lambda a, b: a >= b) == k * k - k
    five = dominate_witness(w, lift(5))
    assert all(five.at(k) == 0 for k in range(5, 100))


def test_dominate_small():
    h, e = parse_cheap("1/(omega+1)"), parse_cheap("2^-omega")
    d = dominate_witness(h, e)
    for k in range(16):
        assert d.at(k) == brute_shift(h, e, k, lambda a, b: a <= b) == 2**k - k - 1


def test_dominate_refuses_unclassified():
    with pytest.raises(UnverifiableError):
        dominate_witness(parse_cheap("(-1)^omega"), lift(1))


def test_harmonic_witness_values():
    e = parse_cheap("2^-omega")
    m = harmonic_witness(e)
    assert m.prefix(8) == [2**n - 1 for n in range(8)]
    assert shift_binary(harmonic().value, m).at(3) == Fraction(1, 11)
    # patched where the target is not positive
    z = harmonic_witness(parse_cheap("patch(1/(omega+1), {0: 0})"))
    assert z.at(0) == 1


def test_monotone_witness_values():
    m = monotone_to_canonical(certify_monotone(parse_cheap("1/(omega^2+1)")))
    assert m.at(3) == 0
    h = monotone_to_canonical(harmonic())
    assert all(h.at(n) == 0 for n in range(100))
    log_eps = parse_cheap("1/clog2(omega+2)")
    g = monotone_to_canonical(certify_monotone(log_eps))
    target = harmonic().value
    for n in range(12):
        assert g.at(n) == brute_shift(log_eps, target, n, lambda a, b: a <= b)


def test_monotone_witness_cap_names_rank():
    g = monotone_to_canonical(certify_monotone(parse_cheap("1/clog2(omega+2)")), cap=20,
                              search="linear")
    with pytest.raises(MuCapExceeded) as info:
        g.at(6)
    assert info.value.rank == 6


def test_monotone_witness_requires_certificate():
    with pytest.raises(UnverifiableError):
        monotone_to_canonical(parse_cheap("(2 + (-1)^omega)/(omega+1)"))


def test_effective_wrt_examples():
    e = canonical_eps().value
    w = effective_wrt(e, e)
    assert w.construction == "reflexive" and w.index.at(10) == 0
    w = effective_wrt(harmonic().value, e)
    assert w.construction == "compEpsilon"
    assert w.index.prefix(10) == [2**n - 1 for n in range(10)]
    assert effective_wrt(harmonic().value, canonical_eps().value) is not None


def test_effective_wrt_chains_through_harmonic():
    eps = parse_cheap("1/(omega^2+1)")
    y = parse_cheap("1/(omega//2+1)")
    w = effective_wrt(eps, y)
    assert w is not None
    assert validate_witness(eps, y, w.index, 2000) is None


def test_non_effective_stub_has_no_witness():
    stub = parse_cheap("(2 + (-1)^omega)/(omega+1)")
    assert effective_wrt(stub, harmonic().value) is None
    assert not is_effective(stub)


def test_equivalence_certificate():
    # eps oscillates between 1/(n+1) and 3/(n+1); 1/(omega+1) is its representative
    eps = parse_cheap("(2 + (-1)^omega)/(omega+1)")
    to_rep = parse_cheap("2*omega + 2")
    from_rep = lift(0)
    cert = EffectiveInfinitesimal(eps, Equivalence(harmonic(), to_rep, from_rep))
    assert cert.check(500) is None
    w = effective_wrt(cert, parse_cheap("2^-omega"), 64)
    assert w is not None and w.construction == "chained"
    assert validate_witness(eps, parse_cheap("2^-omega"), w.index, 40) is None


@pytest.mark.parametrize("eps", MONOTONE)
def test_reflexivity(eps):
    x = parse_cheap(eps)
    assert validate_witness(x, x, lift(0), 1000) is None


@settings(max_examples=40, deadline=None)
@given(i=st.integers(0, len(MONOTONE) - 1), j=st.integers(0, len(MONOTONE) - 1),
       start=st.integers(0, 300))
def test_witness_soundness(i, j, start):
    eps, y = parse_cheap(MONOTONE[i]), parse_cheap(MONOTONE[j])
    w = effective_wrt(eps, y, 64)
    assert w is not None and w.validated_upto > 0
    if w.construction == "chained":
        inner = w.parts[1].index
        stop = feasible_stop(inner, start + 40, 1 << 12)
    else:
        stop = start + 40
    lo = min(start, max(stop - 1, 0))
    assert validate_witness(eps, y, w.index, stop, lo) is None


def test_chained_validation_stops_before_index_explodes():
    w = effective_wrt(parse_cheap("1/clog2(omega+2)"), parse_cheap("2^-omega"))
    assert w.construction == "chained"
    assert 0 < w.validated_upto < 20


TRANSITIVE = ["1/(omega+1)", "1/(omega^2+1)", "2^-omega", "1/(2*omega+1)",
              "1/(omega^2+omega+1)"]


@settings(max_examples=25, deadline=None)
@given(i=st.integers(0, 4), j=st.integers(0, 4), k=st.integers(0, 4))
def test_transitivity_of_known_witnesses(i, j, k):
    a, b, c = (parse_cheap(TRANSITIVE[t]) for t in (i, j, k))
    w1 = dominate_witness(a, b)
    w2 = dominate_witness(b, c)
    stop = feasible_stop(w2, 60, 1 << 12)
    assert validate_witness(a, b, w1, 60) is None
    assert validate_witness(b, c, w2, 60) is None
    assert validate_witness(a, c, chain(w1, w2), stop) is None
