import math

import numpy as np
import pytest
from scipy.stats import ncx2

from framelab.kernels import FockKernel, PaleyWienerKernel, TabulatedKernel
from framelab.localization import (
    FramePairSpec,
    double_tail,
    hap_check,
    localization_defect,
    mean_value_check,
    tail_sup,
)
from framelab.quadrature import QuadConfig
from framelab.space import Ball, CountingMeasure, Lattice, LebesgueMeasure, PointSet


def gaussian_ball_integral(center_dist, r):
    """Oracle: integral over B(0, r) of exp(-pi |x - p|^2), |p| = center_dist.

    The Gaussian is an isotropic normal with variance 1/(2 pi), so the ball
    mass is a noncentral chi-square tail probability.
    """
    return float(ncx2.cdf(2 * math.pi * r * r, 2, 2 * math.pi * center_dist**2))


def lattice_radii(scale, r_lo, r_hi):
    pts = Lattice(scale, 2).points_in_ball(Ball([0, 0], r_hi + 1e-9))
    rr = np.sqrt(np.einsum("ij,ij->i", pts, pts))
    return rr[(rr > r_lo) & (rr <= r_hi)], rr[rr <= r_lo]


class TestTailSup:
    def test_fock_tail_law(self):
        K = FockKernel()
        for R in (0.5, 1.0):
            got = tail_sup(K, LebesgueMeasure(2), R, [[0.0, 0.0]], QuadConfig(h=0.02, truncation_radius=R + 6))
            assert got == pytest.approx(math.exp(-math.pi * R * R), rel=1e-4)

    def test_far_tail_below_floor(self):
        got = tail_sup(FockKernel(), LebesgueMeasure(2), 3.0, [[0.0, 0.0]], QuadConfig(h=0.05, truncation_radius=9.0))
        assert got <= 1e-8

    def test_orthogonal_family_zero(self):
        K = TabulatedKernel(lambda x, y: 1.0 if np.array_equal(x, y) else 0.0, dim=1)
        index = CountingMeasure(Lattice(1.0, 1))
        got = tail_sup(K, index, 2.5, [[0.0]], QuadConfig(truncation_radius=12.0))
        assert got == 0.0

    def test_nonincreasing_in_radius(self):
        K = FockKernel()
        cfg = lambda R: QuadConfig(h=0.05, truncation_radius=R + 6)
        vals = [tail_sup(K, LebesgueMeasure(2), R, [[0.3, -0.2]], cfg(R)) for R in (0.5, 1.0, 1.5, 2.0)]
        assert all(b <= a + 1e-10 for a, b in zip(vals, vals[1:]))

    def test_center_independence(self):
        K = FockKernel()
        cfg = QuadConfig(h=0.05, truncation_radius=7.0)
        vals = [
            tail_sup(K, LebesgueMeasure(2), 1.0, [p], cfg)
            for p in ([0.0, 0.0], [0.62, -1.37], [2.5, 3.1])
        ]
        assert max(vals) - min(vals) < 1e-6


class TestDoubleTail:
    def test_symmetric_pair_equal_terms(self):
        pair = FramePairSpec(FockKernel(), LebesgueMeasure(2), LebesgueMeasure(2))
        res = double_tail(pair, Ball([0, 0], 2.0), QuadConfig(h=0.05))
        assert abs(res.t1 - res.t2) < 1e-10

    def test_fock_lattice_against_radial_oracle(self):
        pair = FramePairSpec(
            FockKernel(), LebesgueMeasure(2), g_measure=CountingMeasure(Lattice(1.0, 2))
        )
        r = 4.0
        res = double_tail(pair, Ball([0, 0], r), QuadConfig(h=0.05))
        out_r, in_r = lattice_radii(1.0, r, r + 6.0)
        t1_oracle = float(np.sum([1.0 - gaussian_ball_integral(s, r) for s in in_r]))
        t2_oracle = float(np.sum([gaussian_ball_integral(s, r) for s in out_r]))
        assert res.t1 == pytest.approx(t1_oracle, rel=2e-3)
        assert res.t2 == pytest.approx(t2_oracle, rel=2e-3)

    def test_per_atom_tail_bound(self):
        # every inner atom's contribution is at most its boundary-distance tail
        pair = FramePairSpec(
            FockKernel(), LebesgueMeasure(2), g_measure=CountingMeasure(Lattice(1.0, 2))
        )
        r = 4.0
        res = double_tail(pair, Ball([0, 0], r), QuadConfig(h=0.05))
        _, in_r = lattice_radii(1.0, r, r + 6.0)
        bound = float(np.sum([math.exp(-math.pi * (r - s) ** 2) for s in in_r]))
        assert res.t1 <= bound * (1 + 1e-6)

    def test_empty_inner_side(self):
        atoms = CountingMeasure(PointSet([[10.0, 0.0]]))
        pair = FramePairSpec(FockKernel(), LebesgueMeasure(2), g_measure=atoms)
        res = double_tail(pair, Ball([0, 0], 2.0), QuadConfig(h=0.1))
        assert res.t1 == 0.0  # no nu atoms inside the ball
        assert res.t2 >= 0.0

    def test_cauchy_schwarz_chain(self):
        # t1 <= nu(B) sup_x int_{B^c} mod2 d mu
        pair = FramePairSpec(
            FockKernel(), LebesgueMeasure(2), g_measure=CountingMeasure(Lattice(1.0, 2))
        )
        r = 3.0
        cfg = QuadConfig(h=0.05)
        res = double_tail(pair, Ball([0, 0], r), cfg)
        nu_b = pair.g_measure.ball_mass(Ball([0, 0], r))
        sup = tail_sup(FockKernel(), LebesgueMeasure(2), 0.0 + 1e-9, [[0.0, 0.0]], QuadConfig(h=0.05, truncation_radius=r + 6))
        assert res.t1 <= nu_b * sup * (1 + 1e-6)


class TestLocalizationDefect:
    def test_identical_pair_zero(self):
        pair = FramePairSpec(FockKernel(), LebesgueMeasure(2), LebesgueMeasure(2))
        row = localization_defect(pair, Ball([0, 0], 2.0), QuadConfig(h=0.05))
        assert row.defect == 0.0
        assert row.epsilon_effective == 0.0

    def test_fock_lattice_decay(self):
        pair = FramePairSpec(
            FockKernel(), LebesgueMeasure(2), g_measure=CountingMeasure(Lattice(1.0, 2))
        )
        cfg = QuadConfig(h=0.08, boundary_refine=2)
        eps = [
            localization_defect(pair, Ball([0, 0], r), cfg).epsilon_effective for r in (4.0, 8.0, 16.0)
        ]
        assert eps[0] > eps[1] > eps[2]

    def test_swap_symmetry(self):
        lattice = CountingMeasure(Lattice(1.0, 2))
        cfg = QuadConfig(h=0.08, boundary_refine=2)
        fwd = localization_defect(
            FramePairSpec(FockKernel(), LebesgueMeasure(2), lattice), Ball([0, 0], 4.0), cfg
        )
        rev = localization_defect(
            FramePairSpec(FockKernel(), lattice, LebesgueMeasure(2)), Ball([0, 0], 4.0), cfg
        )
        assert fwd.defect == pytest.approx(rev.defect, abs=1e-12)
        assert fwd.double_tail_fg == pytest.approx(rev.double_tail_gf, abs=1e-12)

    def test_general_duals_rejected(self):
        pair = FramePairSpec(FockKernel(), LebesgueMeasure(2), LebesgueMeasure(2), self_dual=False)
        with pytest.raises(ValueError, match="general duals unsupported"):
            localization_defect(pair, Ball([0, 0], 2.0))

    def test_disjoint_orthogonal_supports(self):
        # one family inside B, the other outside, orthogonal kernels: defect 0
        K = TabulatedKernel(lambda x, y: 1.0 if np.allclose(x, y) else 0.0, dim=1)
        inner = CountingMeasure(PointSet([[0.0], [0.5]]))
        outer = CountingMeasure(PointSet([[5.0], [6.0]]))
        pair = FramePairSpec(K, inner, outer)
        row = localization_defect(pair, Ball([0.0], 2.0), QuadConfig(truncation_radius=10.0))
        assert row.defect == 0.0


class TestHapCheck:
    def test_fock_lattice_value(self):
        # oracle: direct lattice sum of exp(-pi |gamma|^2) over |gamma| > 2,
        # leading shell |gamma|^2 = 5 with multiplicity 8
        got = hap_check(FockKernel(), Lattice(1.0, 2), 2.0, [[0.0, 0.0]])
        n = np.arange(-12, 13)
        X, Y = np.meshgrid(n, n, indexing="ij")
        rr2 = (X**2 + Y**2).astype(float)
        oracle = float(np.sum(np.exp(-math.pi * rr2[rr2 > 4.0])))
        assert got == pytest.approx(oracle, rel=1e-9)
        assert got == pytest.approx(1.2056647504357086e-06, rel=1e-9)

    def test_radius_beyond_window(self):
        assert hap_check(FockKernel(), Lattice(1.0, 2), 30.0, [[0.0, 0.0]], window_margin=1.0) == 0.0

    def test_empty_set(self):
        assert hap_check(FockKernel(), PointSet(np.zeros((0, 2))), 2.0, [[0.0, 0.0]]) == 0.0


class TestMeanValue:
    def test_fock_kernel_itself(self):
        # oracle: 1 / integral over B(a, 1) of exp(-pi |x - a|^2) = 1/(1 - e^{-pi})
        got = mean_value_check(
            FockKernel(),
            LebesgueMeasure(2),
            1.0,
            [[0.0, 0.0]],
            [[(1.0, [0.0, 0.0])]],
            QuadConfig(h=0.02),
        )
        assert got == pytest.approx(1.0 / (1.0 - math.exp(-math.pi)), rel=1e-4)

    def test_paley_wiener_kernel(self):
        # oracle: 1 / int_{-1}^{1} sinc^2, computed by Gauss-Legendre
        nodes, weights = np.polynomial.legendre.leggauss(400)
        denom = float(np.sum(np.sinc(nodes) ** 2 * weights))
        got = mean_value_check(
            PaleyWienerKernel(),
            LebesgueMeasure(1),
            1.0,
            [[0.0]],
            [[(1.0, [0.0])]],
            QuadConfig(h=0.005),
        )
        assert got == pytest.approx(1.0 / denom, rel=1e-4)

    def test_orthogonal_function_no_constraint(self):
        # a combination vanishing at the probe contributes ratio 0
        K = FockKernel()
        combo = [(1.0, [3.0, 0.0]), (-1.0, [3.0, 0.0])]  # the zero function
        got = mean_value_check(K, LebesgueMeasure(2), 1.0, [[0.0, 0.0]], [combo], QuadConfig(h=0.1))
        assert got == 0.0


class TestOffsets:
    def test_translated_family_defect_zero(self):
        pair = FramePairSpec(
            FockKernel(),
            LebesgueMeasure(2),
            LebesgueMeasure(2),
            g_offset=np.array([0.35, 0.2]),
        )
        row = localization_defect(pair, Ball([0, 0], 2.0), QuadConfig(h=0.05))
        assert row.defect == 0.0
        assert row.double_tail_fg > 0  # honest nonzero tails

    def test_profile_against_scipy(self):
        # the radial reduction of the inner ball integral matches ncx2
        from framelab.localization import _gaussian_ball_profile

        s_vals = np.array([0.0, 0.8, 1.7, 2.5, 3.0])
        got = _gaussian_ball_profile(2.0, s_vals, step=0.005)
        expect = [gaussian_ball_integral(s, 2.0) for s in s_vals]
        np.testing.assert_allclose(got, expect, atol=1e-5)
