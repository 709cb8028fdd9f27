import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fibanyon.fusion_basis import (AnyonState, DimensionMismatchError, dim, enumerate_basis, fidelity, inner_product,
                                   is_admissible, parse_path, path_text)


def fib(k):
    a, b = 0, 1
    for _ in range(k):
        a, b = b, a + b
    return a


def brute_paths(n, total):
    # every 0/1 sequence, filtered by the fusion rules
    out = []
    for seq in itertools.product((0, 1), repeat=n):
        prev, ok = 0, True
        for x in seq:
            if prev == 0 and x == 0:
                ok = False
                break
            prev = x
        if ok and (seq[-1] if seq else 0) == total:
            out.append(seq)
    return out


def test_small_bases():
    assert enumerate_basis(2, 0) == ((1, 0),)
    assert enumerate_basis(4, 0) == ((1, 0, 1, 0), (1, 1, 1, 0))
    assert dim(4, 0) == 2
    assert dim(4, 1) == 3
    assert dim(0, 0) == 1
    assert enumerate_basis(0, 1) == ()
    assert dim(20, 0) == 4181


@pytest.mark.parametrize("n", range(0, 15))
def test_enumeration_matches_brute_force(n):
    for total in (0, 1):
        paths = enumerate_basis(n, total)
        assert list(paths) == sorted(brute_paths(n, total))
        assert len(set(paths)) == len(paths) == dim(n, total)
        assert all(is_admissible(p, total) for p in paths)


def test_fibonacci_law():
    for n in range(2, 25):
        assert dim(n, 0) == fib(n - 1)
        assert dim(n, 1) == fib(n)
        assert dim(n, 0) + dim(n, 1) == dim(n + 1, 1)
        assert dim(n, 1) == dim(n + 1, 0)


def test_basis_order_is_stable():
    a = json.dumps([path_text(p) for p in enumerate_basis(10, 0)])
    enumerate_basis.cache_clear()
    b = json.dumps([path_text(p) for p in enumerate_basis(10, 0)])
    assert a == b


def test_path_text_roundtrip():
    assert path_text((1, 0, 1, 0)) == "1,0,1,0"
    assert parse_path("1,1,1,0") == (1, 1, 1, 0)
    assert parse_path("") == ()


def test_inner_product_examples():
    p = AnyonState.basis((1, 0, 1, 0))
    q = AnyonState.basis((1, 1, 1, 0))
    assert inner_product(p, p) == 1
    assert inner_product(p, q) == 0
    psi = AnyonState.from_vector(4, 0, [3 / 5, 4j / 5])
    assert abs(inner_product(psi, psi) - 1) < 1e-15


def test_inner_product_is_conjugate_linear_in_first_argument():
    a = AnyonState.from_vector(4, 0, [1j, 0])
    b = AnyonState.from_vector(4, 0, [1, 0])
    assert inner_product(a, b) == -1j
    assert inner_product(b, a) == 1j


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        inner_product(AnyonState.basis((1, 0)), AnyonState.basis((1, 0, 1, 0)))
    with pytest.raises(DimensionMismatchError):
        AnyonState.from_vector(4, 0, [1, 0, 0])


def test_inadmissible_basis_rejected():
    with pytest.raises(ValueError):
        AnyonState.basis((1, 0, 0, 1))
    with pytest.raises(ValueError):
        AnyonState.basis((0, 1))


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 9), st.integers(0, 1), st.integers(0, 2**32 - 1))
def test_normalize_and_vector_roundtrip(n, total, seed):
    d = dim(n, total)
    rng = np.random.default_rng(seed)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    s = AnyonState.from_vector(n, total, v)
    assert np.allclose(s.to_vector(), v)
    u = s.normalize()
    assert abs(u.norm() - 1) < 1e-12
    assert abs(inner_product(u, u).imag) < 1e-15
    assert abs(fidelity(s, u) - 1) < 1e-12


def test_zero_state_cannot_be_normalized():
    with pytest.raises(ZeroDivisionError):
        AnyonState(4, 0, {}).normalize()
