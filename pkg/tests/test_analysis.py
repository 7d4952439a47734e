import itertools

import numpy as np
import pytest
from hypothesis import given

from conftest import cellular_automata, full, random_ca
from surjca.analysis import (
    UnsupportedDomain,
    balance_check,
    find_garden_of_eden,
    is_injective,
    is_permutive,
    is_preinjective,
    is_surjective,
    preimage_counts,
)
from surjca.models import builtin
from surjca.symbolic import _apply_rule, apply_periodic, compose, identity_map, power, shift_map


def xor():
    return builtin("xor01").map


def maj():
    return builtin("majority3").map


def brute_has_preimage(phi, w):
    s = len(phi.domain.alphabet)
    for u in itertools.product(range(s), repeat=len(w) + phi.window - 1):
        if _apply_rule(phi.rule, u, phi.window) == tuple(w):
            return True
    return False


def brute_mutually_erasable(phi, max_len=5):
    """Search two distinct finite patches on a constant background with equal images."""
    s = len(phi.domain.alphabet)
    m = phi.window
    for bg in range(s):
        for n in range(1, max_len + 1):
            pad = (bg,) * (m - 1)
            images = {}
            for p in itertools.product(range(s), repeat=n):
                img = _apply_rule(phi.rule, pad + p + pad, m)
                if img in images:
                    return True
                images[img] = p
    return False


def test_surjectivity_examples():
    assert is_surjective(xor())
    assert is_surjective(identity_map(full(2)))
    assert not is_surjective(maj())


def test_garden_of_eden_examples():
    assert find_garden_of_eden(xor()) is None
    assert find_garden_of_eden(identity_map(full(3))) is None
    goe = find_garden_of_eden(maj())
    assert goe is not None
    assert not brute_has_preimage(maj(), goe)
    # shortest witness: every shorter word has a preimage
    for n in range(1, len(goe)):
        assert all(brute_has_preimage(maj(), w) for w in itertools.product(range(2), repeat=n))


def test_preinjectivity_examples():
    assert is_preinjective(xor())
    assert not is_preinjective(maj())
    assert brute_mutually_erasable(maj())
    assert is_preinjective(shift_map(full(2)))


def test_injectivity_examples():
    assert not is_injective(xor())
    assert apply_periodic(xor(), (0,)) == apply_periodic(xor(), (1,))
    assert is_injective(shift_map(full(2)))
    assert is_injective(builtin("transpose-xor").map)
    assert not is_injective(maj())


def test_balance_examples():
    assert balance_check(xor(), 4)
    assert np.all(preimage_counts(xor(), 4) == 2)
    assert balance_check(identity_map(full(3)), 3)
    assert not balance_check(maj(), 3)


def test_permutivity():
    b = builtin("bipermutive-ternary").map
    assert is_permutive(b, "left") and is_permutive(b, "right")
    assert is_permutive(xor(), "left") and is_permutive(xor(), "right")
    assert not is_permutive(maj(), "left")


def test_proper_sft_rejected():
    with pytest.raises(UnsupportedDomain):
        is_surjective(builtin("ternary-collapse").map)


@given(cellular_automata())
def test_surjective_iff_preinjective(phi):
    assert is_surjective(phi) == is_preinjective(phi)


@given(cellular_automata())
def test_surjective_iff_balanced(phi):
    assert is_surjective(phi) == all(balance_check(phi, n) for n in range(1, 6))


@given(cellular_automata())
def test_witness_really_has_no_preimage(phi):
    goe = find_garden_of_eden(phi)
    if goe is not None and len(goe) <= 6:
        assert not brute_has_preimage(phi, goe)


@given(cellular_automata(max_s=2))
def test_injective_implies_surjective(phi):
    if is_injective(phi):
        assert is_surjective(phi)


def test_injective_agrees_with_periodic_injectivity():
    # all 256 binary rules of window 3: the injective ones are injective on every short period,
    # the others already collide on some period up to 6
    sft = full(2)
    words = list(itertools.product(range(2), repeat=3))
    for code in range(256):
        phi = identity_map(sft).__class__(sft, sft, -1, 1, {w: code >> i & 1 for i, w in enumerate(words)})
        periodic_ok = all(
            len({apply_periodic(phi, w) for w in itertools.product(range(2), repeat=n)}) == 2 ** n
            for n in range(1, 7))
        assert is_injective(phi) == periodic_ok, code


def test_powers_keep_verdicts():
    rng = np.random.default_rng(3)
    for _ in range(20):
        phi = random_ca(rng, 2, 3, left=-1)
        assert is_surjective(power(phi, 2)) == is_surjective(phi)
        assert is_surjective(compose(phi, shift_map(phi.domain))) == is_surjective(phi)
