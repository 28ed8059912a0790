"""Smith forms, kernels/cokernels and module profiles over Z/p^s."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phigamma.zmodlin import (
    PresentedModule,
    ZModMatrix,
    image_length,
    kernel_cokernel,
    kernel_generators,
    module_profile,
    smith_normal_form,
    solve,
)


def random_matrix(rng, p, s, rows, cols):
    return ZModMatrix(p, s, rng.integers(0, p**s, size=(rows, cols)))


def test_identity_smith():
    A = ZModMatrix.identity(3, 2, 3)
    sf = smith_normal_form(A)
    assert sf.diagonal == [1, 1, 1]
    assert sf.U @ A @ sf.V == sf.D


def test_diagonal_reordering():
    A = ZModMatrix(3, 2, [[3, 0], [0, 1]])
    sf = smith_normal_form(A)
    assert sf.diagonal == [1, 3]
    assert sf.U @ A @ sf.V == sf.D


def test_nonprime_rejected():
    with pytest.raises(ValueError):
        ZModMatrix(6, 1, [[1]])


def test_random_product_check():
    rng = np.random.default_rng(7)
    for _ in range(20):
        A = random_matrix(rng, 3, 3, 4, 3)
        sf = smith_normal_form(A)
        assert sf.U @ A @ sf.V == sf.D
        d = sf.diagonal
        # divisibility chain on nonzero entries
        for a, b in zip(d, d[1:]):
            if a and b:
                assert b % a == 0


def test_unimodular_transforms():
    rng = np.random.default_rng(11)
    for _ in range(10):
        A = random_matrix(rng, 5, 2, 4, 4)
        sf = smith_normal_form(A)
        for M in (sf.U, sf.V):
            # invertible over Z/p^s iff invertible mod p
            det = int(round(np.linalg.det(M.entries.astype(float))))
            assert det % 5 != 0


def test_zero_map_kernel_cokernel():
    A = ZModMatrix.zeros(3, 1, 1, 1)
    ker, coker = kernel_cokernel(A)
    assert module_profile(ker) == [3]
    assert module_profile(coker) == [3]


def test_multiplication_by_p_on_zp2():
    A = ZModMatrix(3, 2, [[3]])
    ker, coker = kernel_cokernel(A)
    assert module_profile(ker) == [3]
    assert module_profile(coker) == [3]


def test_length_rank_nullity():
    rng = np.random.default_rng(13)
    for _ in range(200):
        p = int(rng.choice([3, 5, 7]))
        s = int(rng.integers(1, 4))
        rows = int(rng.integers(1, 6))
        cols = int(rng.integers(1, 6))
        A = random_matrix(rng, p, s, rows, cols)
        ker, _ = kernel_cokernel(A)
        assert ker.length() + image_length(A) == s * cols


def test_kernel_generators_annihilated():
    rng = np.random.default_rng(17)
    for _ in range(30):
        A = random_matrix(rng, 3, 2, 4, 5)
        G = kernel_generators(A)
        assert (A @ G).is_zero()


def test_profile_free_rank2():
    M = PresentedModule.free(3, 2, 2)
    assert module_profile(M) == [9, 9]


def test_profile_diag_cokernel():
    rel = ZModMatrix(3, 3, [[3, 0], [0, 9]])
    M = PresentedModule(rel, 2)
    # coker of diag(3, 9) over Z/27
    assert module_profile(M) == [3, 9]


def test_profile_invariant_under_unimodular_change():
    rng = np.random.default_rng(19)
    for _ in range(20):
        A = random_matrix(rng, 3, 2, 3, 3)
        prof = module_profile(PresentedModule(A, 3))
        # random unimodular transforms on both sides
        while True:
            P = random_matrix(rng, 3, 2, 3, 3)
            if int(round(np.linalg.det(P.entries.astype(float)))) % 3 != 0:
                break
        while True:
            Q = random_matrix(rng, 3, 2, 3, 3)
            if int(round(np.linalg.det(Q.entries.astype(float)))) % 3 != 0:
                break
        B = P @ A @ Q
        assert module_profile(PresentedModule(B, 3)) == prof


def test_solve_consistent_and_inconsistent():
    A = ZModMatrix(3, 2, [[3, 0], [0, 1]])
    x = solve(A, [3, 5])
    assert x is not None
    assert np.array_equal((A.entries @ x) % 9, np.array([3, 5]))
    assert solve(A, [1, 0]) is None


def test_json_round_trip():
    A = ZModMatrix(5, 2, [[1, 2], [3, 4]])
    assert ZModMatrix.from_json(A.to_json()) == A


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 3**2 - 1), st.integers(0, 3**2 - 1))
def test_presented_module_divisor_round_trip(a, b):
    divisors = sorted(d for d in (3 ** (a % 3), 3 ** (b % 3)) if d > 1)
    M = PresentedModule.from_divisors(3, 2, divisors)
    assert module_profile(M) == divisors
