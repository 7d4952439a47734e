import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import cellular_automata, full
from surjca.models import builtin
from surjca.symbolic import (
    Alphabet,
    Sft1D,
    SlidingBlockMap1D,
    SymbolicError,
    apply_periodic,
    apply_to_word,
    block_presentation,
    build_de_bruijn,
    compose,
    decode_word,
    identity_map,
    is_mixing,
    power,
    recode_word,
    shift_map,
)


def xor():
    return builtin("xor01").map


def brute_words(sft, n):
    s = len(sft.alphabet)
    # dead-end chains are at most as long as the number of contexts
    pad = s ** (sft.window - 1)
    ok = set()
    for w in itertools.product(range(s), repeat=n + 2 * pad):
        if sft.locally_allowed(w):
            ok.add(w[pad : pad + n])
    return sorted(ok)


def test_de_bruijn_sizes(binary, golden):
    g = build_de_bruijn(binary, 1)
    assert (len(g.nodes), len(g.edges)) == (2, 4)
    g = build_de_bruijn(golden, 1)
    assert (len(g.nodes), len(g.edges)) == (2, 3)
    assert (1, 1) not in g.edges
    g = build_de_bruijn(golden, 2)
    assert sorted(g.nodes) == [(0, 0), (0, 1), (1, 0)]
    assert len(g.edges) == 5


def test_language_matches_brute_force():
    for sft in (Sft1D.from_strings("012", ["11", "22"]), Sft1D.from_strings("012", ["21", "22"]),
                Sft1D.from_strings("01", ["11"]), Sft1D.from_strings("01", ["010", "111"])):
        for n in range(1, 5):
            assert sft.words(n) == brute_words(sft, n)


def test_pruned_language_drops_dead_ends():
    # 1 can never be followed, so it only survives at the far right; no bi-infinite point contains it
    sft = Sft1D.from_strings("01", ["10", "11"])
    assert sft.words(2) == [(0, 0)]


def test_empty_shift_rejected():
    with pytest.raises(SymbolicError):
        Sft1D.from_strings("01", ["0", "1"]).words(1)


def test_mixing():
    assert is_mixing(full(2))
    assert is_mixing(Sft1D.from_strings("01", ["11"]))
    assert not is_mixing(Sft1D.from_strings("01", ["01", "10"]))
    # period 2
    assert not is_mixing(Sft1D.from_strings("01", ["00", "11"]))


def test_apply_to_word():
    a = xor().domain.alphabet
    assert apply_to_word(xor(), a.encode("0110")) == a.encode("101")
    w = (1, 0, 0, 1, 1)
    assert apply_to_word(identity_map(full(2)), w) == w
    tc = builtin("ternary-collapse").map
    assert apply_to_word(tc, (2, 1)) == (1,)
    with pytest.raises(SymbolicError):
        apply_to_word(tc, (1, 1))
    with pytest.raises(SymbolicError):
        apply_to_word(xor(), (1,))


def test_apply_periodic():
    assert apply_periodic(xor(), (0, 1)) == (1, 1)
    assert apply_periodic(xor(), (0,)) == (0,)
    maj = builtin("majority3").map
    # each cell of the 3-cycle 010 sees exactly one 1 among its three neighbours
    assert apply_periodic(maj, (0, 1, 0)) == (0, 0, 0)


def test_compose_examples():
    x = xor()
    assert compose(x, identity_map(x.domain)) == x
    xx = compose(x, x)
    assert (xx.left, xx.right) == (0, 2)
    assert all(v == (w[0] + w[2]) % 2 for w, v in xx.rule.items())
    s = shift_map(full(2))
    ss = compose(s, s)
    assert (ss.left, ss.right) == (2, 2)


@given(cellular_automata(), cellular_automata(), st.lists(st.integers(0, 1), min_size=1, max_size=12))
def test_compose_agrees_with_sequential_application(f, g, w):
    if len(f.domain.alphabet) != len(g.domain.alphabet):
        return
    s = len(f.domain.alphabet)
    w = tuple(a % s for a in w)
    assert apply_periodic(compose(f, g), w) == apply_periodic(f, apply_periodic(g, w))


@given(cellular_automata(max_s=2), st.integers(1, 3), st.lists(st.integers(0, 1), min_size=1, max_size=10))
def test_power(phi, t, w):
    expected = tuple(w)
    for _ in range(t):
        expected = apply_periodic(phi, expected)
    assert apply_periodic(power(phi, t), w) == expected


def test_block_presentation():
    new, rec, dec = block_presentation(full(2), 2)
    assert len(new.alphabet) == 4
    assert not new.is_full
    g = Sft1D.from_strings("01", ["11"])
    new, rec, dec = block_presentation(g, 2)
    assert len(new.alphabet) == 3
    same, r1, d1 = block_presentation(g, 1)
    assert same == g and r1 == identity_map(g)


@pytest.mark.parametrize("D", [1, 2, 3])
def test_block_presentation_round_trip(D):
    sft = Sft1D.from_strings("012", ["11", "22"])
    new, rec, dec = block_presentation(sft, D)
    blocks = sft.words(D)
    for w in sft.words(7):
        codes = recode_word(w, blocks, D)
        assert new.is_allowed(codes)
        assert decode_word(codes, blocks) == w
        if D > 1:
            assert apply_to_word(rec, w) == codes
            assert apply_to_word(dec, codes) == w[: len(codes)]
    # the two maps compose to the identity up to window bookkeeping
    assert all(v == w[0] for w, v in compose(dec, rec).rule.items())


def test_alphabet_codec():
    a = Alphabet(("00", "01", "10", "11"))
    assert not a.compact
    assert a.encode("01.11") == (1, 3)
    assert a.decode((1, 3)) == "01.11"
    with pytest.raises(SymbolicError):
        Alphabet(("0", "0"))
    with pytest.raises(SymbolicError):
        a.encode("02")


def test_map_validation():
    sft = full(2)
    with pytest.raises(SymbolicError):
        SlidingBlockMap1D(sft, sft, 0, 1, {(0, 0): 0})
    g = Sft1D.from_strings("01", ["11"])
    with pytest.raises(SymbolicError):
        identity_map(sft).__class__(sft, g, 0, 0, {(0,): 1, (1,): 1})
