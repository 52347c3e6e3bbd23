"""Exact rational polynomial kernel: field ops, frame fields, nullspaces."""
from fractions import Fraction

import pytest

from heiscalc.errors import NoConsistentConstant
from heiscalc.exact import (QQi, RatPoly, RP_ONE, RP_T, RP_X, RP_Y,
                            appendix_identities, fit_constant, frame_t,
                            frame_x, frame_y, frame_z, frame_zbar,
                            harmonic_nullspace, laplacian_h, monomials_wdeg,
                            real_nullspace, vzerosol_nullspace, word_apply,
                            word_op)

RP_Z = RP_X + RP_Y * QQi(0, 1)
RP_ZBAR = RP_X - RP_Y * QQi(0, 1)


def test_qqi_field_ops():
    a = QQi(Fraction(1, 2), Fraction(-3, 4))
    b = QQi(2, 1)
    assert a + b == QQi(Fraction(5, 2), Fraction(1, 4))
    assert a * b == QQi(Fraction(7, 4), Fraction(-1))
    assert (a / b) * b == a
    assert a.conj() == QQi(Fraction(1, 2), Fraction(3, 4))
    with pytest.raises(ZeroDivisionError):
        a / QQi(0, 0)


def test_ratpoly_arithmetic_and_eval():
    p = RP_X * RP_X + RP_Y * 2 - RP_T * Fraction(1, 3)
    q = RP_X - RP_ONE
    prod = p * q
    for pt in [(0.7, -0.4, 0.3), (2.0, 1.0, -1.0)]:
        want = complex(p.eval(pt)) * complex(q.eval(pt))
        assert complex(prod.eval(pt)) == pytest.approx(want, rel=1e-14)
    assert p - p == RatPoly()


def test_frame_field_basics():
    # Z z = 1, Zbar z = 0, Z t = i zbar, Zbar t = -i z
    assert frame_z(RP_Z) == RP_ONE
    assert frame_zbar(RP_Z) == RatPoly()
    assert frame_z(RP_T) == RP_ZBAR * QQi(0, 1)
    assert frame_zbar(RP_T) == RP_Z * QQi(0, -1)
    # X t = 2y, Y t = -2x, T t = 1
    assert frame_x(RP_T) == RP_Y * 2
    assert frame_y(RP_T) == RP_X * (-2)
    assert frame_t(RP_T) == RP_ONE


def test_sublaplacian_of_t_squared():
    got = laplacian_h(RP_T * RP_T)
    assert got == (RP_X * RP_X + RP_Y * RP_Y) * 8


def test_commutators_on_probe():
    # [X, Y] = -4T and [Zbar, Z] = 2iT on a probe that sees the vertical
    probe = RP_T * RP_X + RP_Y * RP_T * RP_T
    assert (frame_x(frame_y(probe)) - frame_y(frame_x(probe))
            == frame_t(probe) * (-4))
    assert (frame_zbar(frame_z(probe)) - frame_z(frame_zbar(probe))
            == frame_t(probe) * QQi(0, 2))


def test_word_op_matches_nested_application():
    probe = RP_T * RP_T + RP_X * RP_X * RP_Y
    assert word_op("ZZb")(probe) == frame_z(frame_zbar(probe))
    assert word_apply("XY", probe) == frame_x(frame_y(probe))


def test_monomial_counts():
    # weighted degree i + j + 2k <= d: sum of triangle numbers
    def tri(m):
        return (m + 1) * (m + 2) // 2

    for d in range(1, 8):
        want = sum(tri(d - 2 * k) for k in range(d // 2 + 1))
        assert len(monomials_wdeg(d)) == want
    # t-degree restriction drops the high-k layers
    assert len(monomials_wdeg(4, tmax=1)) == len(monomials_wdeg(4)) - 1


def test_harmonic_nullspace_dims():
    # harmonic polynomials of weighted degree <= d form a space of dim (d+1)(d+2)/2
    for d in range(1, 6):
        basis = harmonic_nullspace(d)
        assert len(basis) == (d + 1) * (d + 2) // 2
        for u in basis:
            assert laplacian_h(u) == RatPoly()


def test_vzerosol_dims():
    dim3, _ = vzerosol_nullspace(3)
    assert dim3 == 7
    for d in (4, 5, 6, 7):
        dim, basis = vzerosol_nullspace(d)
        assert dim == 8
        for v in basis:
            assert frame_z(frame_z(v)) == RatPoly()
    # restricting the vertical degree does not lose solutions
    assert vzerosol_nullspace(5, tmax=2)[0] == 8


def test_real_nullspace_small_operator():
    # kernel of X on monomials of weighted degree <= 2 is spanned by 1, y
    # (t has Xt = 2y, x-bearing monomials survive)
    basis = real_nullspace(frame_x, monomials_wdeg(2, tmax=0))
    assert len(basis) == 3  # 1, y, y^2
    for v in basis:
        assert frame_x(v) == RatPoly()


def test_fit_constant():
    pairs = [(RP_X * 3, RP_X), (RP_Y * RP_X * 3, RP_Y * RP_X)]
    assert fit_constant(pairs) == QQi(3)
    with pytest.raises(NoConsistentConstant):
        fit_constant([(RP_X, RP_X), (RP_Y * 2, RP_Y)])
    # all-zero right sides cannot pin a constant
    with pytest.raises(NoConsistentConstant):
        fit_constant([(RP_X, RatPoly())])


def test_appendix_identities_all_hold():
    results = appendix_identities(6)
    assert len(results) == 13
    for name, scope, ok in results:
        assert ok, name
    scopes = {scope for _, scope, _ in results}
    assert scopes == {"all polynomials", "Z^2 kernel"}
