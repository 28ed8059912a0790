"""Cohomology complexes: cone literality, window stabilization, cocycles."""

import json
import random

import numpy as np
import pytest

from phigamma.complexes import (
    GammaComplex,
    certify_d_squared,
    cohomology,
    delta_project,
    explicit_cocycle,
    gamma_complex,
    geometric_gamma_sum,
    herr_complex,
    phi_cone,
    semidirect_gamma_complex,
    _finite_diff_matrices,
    _op,
    RING_ID,
)
from phigamma.errors import InvariantError, PrecisionError
from phigamma.modules import identity_matrix, make_module, tate_twist
from phigamma.wittside import ArithLiftElement

P = 3
CHI = 1 + P
SCHEDULE = (8, 16, 32)


def trivial(s=1, prec=200):
    I = identity_matrix(P, s, 1, prec)
    return make_module(P, s, I, [("gamma", I, CHI)])


def random_lift(rng, prec=40, lo=-5, hi=20):
    coeffs = {n: rng.randrange(P) for n in range(lo, hi)}
    return ArithLiftElement(P, 1, coeffs, prec)


# -- cone structure ----------------------------------------------------------


def test_cone_reproduces_standard_differentials():
    D = trivial()
    T = herr_complex(D, "delta")
    rng = random.Random(41)
    for _ in range(10):
        x = random_lift(rng)
        (d0a,), (d0b,) = T.d_apply(0, [[x]])
        assert d0a.agrees_with(x - x.frobenius())
        assert d0b.agrees_with(x - x.gamma(CHI))
        a, b = random_lift(rng), random_lift(rng)
        ((d1,),) = T.d_apply(1, [[a], [b]])
        want = (a - a.gamma(CHI)) - (b - b.frobenius())
        assert d1.agrees_with(want)


def test_constants_are_zero_cocycles():
    T = herr_complex(trivial(), "delta")
    c = ArithLiftElement.constant(P, 1, 2, 40)
    out = T.d_apply(0, [[c]])
    assert all(v.is_zero() for slot in out for v in slot)


def test_d_squared_vanishes_on_random_vectors():
    T = herr_complex(trivial(), "delta")
    rng = random.Random(43)
    for _ in range(30):
        x = random_lift(rng)
        step = T.d_apply(0, [[x]])
        out = T.d_apply(1, step)
        assert all(v.is_zero() for slot in out for v in slot)


def test_d_squared_certified_on_window():
    assert certify_d_squared(herr_complex(trivial(), "delta"), 8)
    assert certify_d_squared(herr_complex(trivial(), "free"), 8)


def test_cone_over_zero_complex_is_shift():
    # zero differentials and phi = id: the cone is K + K[-1], still zero
    D = trivial()
    K = GammaComplex(D, "window", "free", (1, 1),
                     (((None,),),), ((_op(1, RING_ID),), (_op(1, RING_ID),)))
    T = phi_cone(K)
    assert T.slots == (1, 2, 1)
    rng = random.Random(47)
    for n, shape in ((0, 1), (1, 2)):
        vecs = [[random_lift(rng)] for _ in range(shape)]
        out = T.d_apply(n, vecs)
        assert all(v.is_zero() for slot in out for v in slot)


# -- Delta projection --------------------------------------------------------


def test_delta_projector_is_idempotent_on_vectors():
    D = trivial()
    proj = delta_project(D, 12)
    rng = np.random.default_rng(53)
    v = rng.integers(0, P, size=proj.matrix.shape[1])
    once = proj.matrix @ v % P
    assert np.array_equal(proj.matrix @ once % P, once)
    # the fixed basis is pointwise fixed
    assert np.array_equal(proj.matrix @ proj.basis % P, proj.basis % P)


def test_delta_projector_twisted_character():
    D = tate_twist(trivial(), 1)
    proj = delta_project(D, 12)
    assert proj.exponent == 1
    # pi is an eigenvector pattern, the constant 1 is not fixed under omega
    e0 = np.zeros(proj.matrix.shape[1], dtype=np.int64)
    e0[12] = 1  # the constant slot of the window [-12, 12)
    assert not np.array_equal(proj.matrix @ e0 % P, e0)


# -- window cohomology -------------------------------------------------------


def test_trivial_module_base_field_dims():
    rep = cohomology(herr_complex(trivial(), "delta"), SCHEDULE)
    assert rep.dims == (1, 2, 0)
    assert rep.euler == -1
    assert rep.verdict == "stable"
    assert rep.profiles == ((3,), (3, 3), ())


def test_first_twist_dims():
    D = tate_twist(trivial(), 1)
    rep = cohomology(herr_complex(D, "delta"), SCHEDULE)
    assert rep.dims == (0, 2, 1)
    assert rep.euler == -1
    assert rep.verdict == "stable"


def test_torsion_free_mode_dims():
    rep = cohomology(herr_complex(trivial(), "free"), SCHEDULE)
    assert rep.dims == (1, 4, 1)
    assert rep.euler == -2
    assert rep.verdict == "stable"


def test_second_twist_report_is_byte_identical():
    # chi^2 = 16 = 1 mod 3 and the prime-to-p exponent moves by 2 = 0 mod 2
    base = cohomology(herr_complex(trivial(), "delta"), SCHEDULE)
    twisted = cohomology(herr_complex(tate_twist(trivial(), 2), "delta"),
                         SCHEDULE)
    assert twisted.to_json() == base.to_json()
    assert twisted.to_csv() == base.to_csv()


def test_square_level_lengths_and_profile():
    rep = cohomology(herr_complex(trivial(s=2), "delta"), SCHEDULE)
    assert rep.dims == (2, 4, 0)
    assert rep.profiles[1] == (9, 9)
    assert rep.verdict == "stable"


def test_stabilization_trace_is_recorded():
    rep = cohomology(herr_complex(trivial(), "delta"), SCHEDULE)
    assert [w for w, _ in rep.trace] == list(SCHEDULE)
    assert all(d == rep.dims for _, d in rep.trace)


def test_report_serialization_round_trip():
    rep = cohomology(herr_complex(trivial(), "delta"), SCHEDULE)
    doc = json.loads(rep.to_json())
    assert doc["dims"] == [1, 2, 0]
    assert doc["verdict"] == "stable"
    lines = rep.to_csv().strip().splitlines()
    assert lines[0] == "degree,length,profile"
    assert lines[1] == "0,1,3"
    assert lines[2] == "1,2,3|3"


def test_window_beyond_certified_entries_raises():
    pi = ArithLiftElement.pi_power(P, 1, 1, 16)
    u = ArithLiftElement.one(P, 1, 16) + pi
    D = make_module(P, 1, [[u.frobenius() * u.inverse()]],
                    [("gamma", [[u.gamma(CHI) * u.inverse()]], CHI)])
    with pytest.raises(PrecisionError):
        cohomology(herr_complex(D, "delta"), (32,) * 3)


def test_basis_change_leaves_dims_invariant():
    # trivial module written in the basis 1 + pi: same cohomology.  The
    # Delta-averaged mode is out of scope here (Delta would act through a
    # nonscalar matrix in this basis), so compare in the free mode.
    pi = ArithLiftElement.pi_power(P, 1, 1, 220)
    u = ArithLiftElement.one(P, 1, 220) + pi
    D = make_module(P, 1, [[u.frobenius() * u.inverse()]],
                    [("gamma", [[u.gamma(CHI) * u.inverse()]], CHI)])
    rep = cohomology(herr_complex(D, "free"), SCHEDULE)
    assert rep.dims == (1, 4, 1)
    assert rep.verdict == "stable"


# -- semidirect (relative) complexes -----------------------------------------


def upper(rng, rank, square_zero=False):
    N = np.zeros((rank, rank), dtype=np.int64)
    for i in range(rank):
        for j in range(i + 1, rank):
            if square_zero and j - i < rank - 1 and rank > 2:
                continue
            N[i, j] = rng.randrange(P)
    return N


def relative_fixture(rng, rank=3, square_zero=False, prec=24):
    N = upper(rng, rank, square_zero)
    I = np.eye(rank, dtype=np.int64)
    poly = lambda: (rng.choice([1, 2]) * I
                    + sum(rng.randrange(P) * np.linalg.matrix_power(N, k)
                          for k in range(1, rank))) % P

    def lift(A):
        return [[ArithLiftElement.constant(P, 1, int(c), prec) for c in row]
                for row in A]

    Gt = (I + N) % P
    return make_module(P, 1, lift(poly()),
                       [("gamma_tilde", lift(Gt), 1),
                        ("gamma", lift(poly()), CHI)],
                       relative=True)


def test_semidirect_trivial_dims_and_zero_differentials():
    I = identity_matrix(P, 1, 1, 24)
    D = make_module(P, 1, I, [("gamma_tilde", I, 1), ("gamma", I, CHI)],
                    relative=True)
    T = semidirect_gamma_complex(D)
    for M in _finite_diff_matrices(T):
        assert not (M % P).any()
    rep = cohomology(T)
    assert rep.dims == (1, 2, 1)
    assert rep.profiles == ((3,), (3, 3), (3,))


def test_semidirect_random_fixtures_square_to_zero():
    rng = random.Random(59)
    for _ in range(5):
        T = semidirect_gamma_complex(relative_fixture(rng))
        for _ in range(20):
            vec = [[ArithLiftElement.constant(P, 1, rng.randrange(P), 24)
                    for _ in range(T.module.rank)]]
            out = T.d_apply(1, T.d_apply(0, vec))
            assert all(v.is_zero() for slot in out for v in slot)


def test_semidirect_broken_relation_rejected():
    rng = random.Random(61)
    D = relative_fixture(rng)
    q = P
    # overwrite gamma with a matrix that breaks the defining relation
    bad = [[ArithLiftElement.constant(P, 1, 1 if i <= j else 1, 24)
            for j in range(D.rank)] for i in range(D.rank)]
    gens = tuple(
        g if g.tag != "gamma" else type(g)(g.tag, tuple(map(tuple, bad)),
                                           g.exponent)
        for g in D.generators)
    D_bad = type(D)(D.p, D.s, D.rank, D.phi, gens, True,
                    D.delta_character_exponent)
    with pytest.raises(InvariantError):
        semidirect_gamma_complex(D_bad)


def _bar_h01(A, B, p):
    """H^0, H^1 of the elementary abelian square <A, B> acting on (F_p)^r,
    assuming the norm of each generator vanishes on the module."""
    from phigamma.complexes import _kernel_fp, _echelon_fp
    r = A.shape[0]
    I = np.eye(r, dtype=np.int64)
    d0 = np.vstack([(A - I) % p, (B - I) % p])
    h0 = r - len(_echelon_fp(d0, p)[1])
    # crossed homs (x, y): (B - 1)x = (A - 1)y, modulo principal ones
    Z = _kernel_fp(np.hstack([(B - I) % p, (-(A - I)) % p]), p)
    h1 = (len(_echelon_fp(Z.T, p)[1])
          - len(_echelon_fp(d0.T, p)[1]))
    return h0, h1


def test_semidirect_matches_finite_quotient_oracle():
    rng = random.Random(67)
    for rank in (2, 2, 3):
        D = relative_fixture(rng, rank=rank, square_zero=True)
        q = P
        mats = {g.tag: np.array(
            [[x.coeffs.get(0, 0) % q for x in row] for row in g.matrix],
            dtype=np.int64) for g in D.generators}
        A, B = mats["gamma_tilde"], mats["gamma"]
        norm = lambda M: sum(np.linalg.matrix_power(M, i)
                             for i in range(P)) % P
        if norm(A).any() or norm(B).any():
            continue  # oracle only valid when inflation is an isomorphism
        rep = cohomology(semidirect_gamma_complex(D))
        assert rep.dims[:2] == _bar_h01(A, B, P)


# -- explicit cocycles -------------------------------------------------------


def test_geometric_sum_is_a_twisted_geometric_series():
    rng = random.Random(71)
    T = herr_complex(trivial(), "delta")
    pi = ArithLiftElement.pi_power(P, 1, 1, 40)
    y = pi.reduce_mod_p()
    assert (geometric_gamma_sum(y, 1, CHI) - y).is_zero()
    for _ in range(10):
        a, b = rng.randrange(0, 30), rng.randrange(0, 30)
        lhs = geometric_gamma_sum(y, a + b, CHI)
        rhs = (geometric_gamma_sum(y, a, CHI)
               + geometric_gamma_sum(y, b, CHI).gamma(
                   pow(CHI, a, P ** 12), 12))
        assert (lhs - rhs).is_zero()


def test_geometric_sum_residue_stabilizes():
    pi = ArithLiftElement.pi_power(P, 1, 1, 30)
    y = pi.reduce_mod_p()
    exact = geometric_gamma_sum(y, 7, CHI)
    via_residue = geometric_gamma_sum(y, 7, CHI, residue_power=2)
    assert (exact - via_residue).is_zero()


def test_cocycle_identity_on_sampled_pairs():
    T = herr_complex(trivial(), "delta")
    one = ArithLiftElement.one(P, 1, 40)
    zero = ArithLiftElement.zero(P, 1, 40)
    data = explicit_cocycle(T, (one, zero),
                            [(0, 1), (1, 0), (1, 1), (2, 2), (3, 1)])
    assert data.identity_checked
    assert data.obstruction == 1
    assert not data.vanishes  # the tower translation sees the constant


def test_coboundary_pair_gives_zero_table():
    T = herr_complex(trivial(), "delta")
    rng = random.Random(73)
    for _ in range(5):
        w = random_lift(rng, lo=0, hi=12)
        x = w - w.frobenius()
        y = w - w.gamma(CHI)
        data = explicit_cocycle(T, (x, y), [(1, 0), (2, 1), (0, 2)])
        assert data.identity_checked
        assert data.vanishes


def test_non_cocycle_pair_is_rejected():
    T = herr_complex(trivial(), "delta")
    pi = ArithLiftElement.pi_power(P, 1, 1, 40)
    zero = ArithLiftElement.zero(P, 1, 40)
    with pytest.raises(InvariantError):
        explicit_cocycle(T, (pi, zero), [(1, 0)])
