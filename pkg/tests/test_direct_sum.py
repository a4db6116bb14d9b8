import math

import numpy as np
import pytest

from adaptgap.direct_sum import (
    DirectSumElement,
    DirectSumSpec,
    ds_estimate,
    ds_integral,
    ds_norm,
    level_allocation,
    level_size,
)
from adaptgap.errors import InvalidParameters, PreconditionViolated
from adaptgap.harness import sample_ds_input
from adaptgap.oracle import Mode
from adaptgap.rng import RngStream
from adaptgap.spaces import INF, MixedMatrix, ProblemSpec


def ds_spec(alpha=1.5, p=1.0, u=INF, p1=1.0, k_max=6):
    return DirectSumSpec(alpha, p, u, p1, k_max)


def constant_level(spec, k, c):
    side = level_size(k)
    return (k, MixedMatrix(spec.level_spec(k), np.full((side, side), float(c))))


class TestSpecValidation:
    def test_alpha_must_exceed_one(self):
        with pytest.raises(InvalidParameters):
            ds_spec(alpha=1.0)

    def test_k_max_cap(self):
        with pytest.raises(InvalidParameters):
            ds_spec(k_max=13)

    def test_level_shape_checked(self):
        spec = ds_spec()
        wrong = MixedMatrix(ProblemSpec(2, 2, spec.p, spec.u), np.zeros((2, 2)))
        with pytest.raises(InvalidParameters):
            DirectSumElement(spec, [(2, wrong)])

    def test_duplicate_level_rejected(self):
        spec = ds_spec()
        with pytest.raises(InvalidParameters):
            DirectSumElement(
                spec, [constant_level(spec, 1, 1.0), constant_level(spec, 1, 2.0)]
            )


class TestDsNorm:
    def test_single_scalar_level(self):
        for p1 in (1.0, 2.0, INF):
            spec = ds_spec(p1=p1)
            x = DirectSumElement(spec, [constant_level(spec, 0, -2.5)])
            assert ds_norm(x) == pytest.approx(2.5)

    def test_two_levels_euclidean(self):
        spec = ds_spec(p1=2.0)
        x = DirectSumElement(
            spec, [constant_level(spec, 0, 3.0), constant_level(spec, 1, 4.0)]
        )
        assert ds_norm(x) == pytest.approx(5.0)

    def test_sup_combination(self):
        spec = ds_spec(p1=INF)
        x = DirectSumElement(
            spec, [constant_level(spec, 0, 3.0), constant_level(spec, 2, 4.0)]
        )
        assert ds_norm(x) == pytest.approx(4.0)

    def test_empty(self):
        assert ds_norm(DirectSumElement(ds_spec(), [])) == 0.0


class TestDsIntegral:
    def test_level_zero_unit(self):
        spec = ds_spec(alpha=2.0)
        x = DirectSumElement(spec, [constant_level(spec, 0, 1.0)])
        assert ds_integral(x) == 1.0

    def test_weighted_level_two(self):
        spec = ds_spec(alpha=2.0)
        x = DirectSumElement(spec, [constant_level(spec, 2, 1.0)])
        assert ds_integral(x) == pytest.approx(0.0625)

    def test_empty(self):
        assert ds_integral(DirectSumElement(ds_spec(), [])) == 0.0

    def test_linearity(self):
        spec = ds_spec(alpha=1.25, k_max=4)
        rng = np.random.default_rng(5)
        for _ in range(20):
            levels_x = []
            levels_y = []
            levels_sum = []
            for k in range(5):
                side = level_size(k)
                a = rng.normal(size=(side, side))
                b = rng.normal(size=(side, side))
                levels_x.append((k, MixedMatrix(spec.level_spec(k), a)))
                levels_y.append((k, MixedMatrix(spec.level_spec(k), b)))
                levels_sum.append((k, MixedMatrix(spec.level_spec(k), a + b)))
            x = DirectSumElement(spec, levels_x)
            y = DirectSumElement(spec, levels_y)
            s = DirectSumElement(spec, levels_sum)
            assert ds_integral(s) == pytest.approx(
                ds_integral(x) + ds_integral(y), rel=1e-12, abs=1e-12
            )


class TestLevelAllocation:
    def test_hand_example(self):
        # k0 = 3, alpha = 2 (so k1 = 4), delta = 0.5, c0 = 0.5:
        # full readout 1, 4, 16 below k0, then ceil(0.5 * 2^6) - 1 = 31 and
        # ceil(0.5 * 2^5.5) - 1 = 22.
        alloc = level_allocation(3, 2.0, 0.5, 0.5)
        assert alloc.levels == ((0, 1), (1, 4), (2, 16), (3, 31), (4, 22))
        assert alloc.k1 == 4
        assert alloc.total == 74

    def test_full_readout_below_k0(self):
        alloc = level_allocation(5, 1.5, 0.2, 0.5)
        for k, n_k in alloc.levels:
            if k < 5:
                assert n_k == 4**k

    def test_delta_boundary_rejected(self):
        with pytest.raises(InvalidParameters):
            level_allocation(3, 2.0, 1.0, 0.5)
        with pytest.raises(InvalidParameters):
            level_allocation(3, 2.0, 0.0, 0.5)

    def test_c0_range(self):
        with pytest.raises(InvalidParameters):
            level_allocation(3, 2.0, 0.5, 1.0)

    def test_budget_bound_exact(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            alpha = float(rng.uniform(1.05, 3.0))
            delta = float(rng.uniform(1e-3, alpha - 1.0 - 1e-6))
            c0 = float(rng.uniform(0.05, 0.95))
            k0 = int(rng.integers(1, 8))
            alloc = level_allocation(k0, alpha, delta, c0)
            assert alloc.total <= alloc.budget_constant * 4**k0
            assert alloc.k1 == math.floor((alpha + 1.0) / alpha * k0)


class TestDsEstimate:
    def test_support_below_k0_is_exact(self):
        spec = ds_spec(alpha=2.0, k_max=4)
        rng = np.random.default_rng(9)
        levels = [
            (k, MixedMatrix(spec.level_spec(k),
                            rng.normal(size=(level_size(k), level_size(k)))))
            for k in range(3)
        ]
        x = DirectSumElement(spec, levels)
        for mode in (Mode.ADAPTIVE, Mode.NONADAPTIVE):
            rep = ds_estimate(x, 4, 0.3, mode, 2, RngStream(3))
            assert rep.value == pytest.approx(ds_integral(x), abs=1e-15)
            assert rep.cards == sum(4**k for k in range(3))

    def test_zero_element(self):
        spec = ds_spec(k_max=6)
        x = DirectSumElement(spec, [])
        for mode in (Mode.ADAPTIVE, Mode.NONADAPTIVE):
            rep = ds_estimate(x, 4, 0.2, mode, 2, RngStream(1))
            assert rep.value == 0.0
            assert rep.cards == 0

    def test_truncation_consistency(self):
        # The same level matrices produce bitwise-identical estimates no
        # matter how far the container's truncation extends.
        small = ds_spec(alpha=1.5, k_max=6)
        large = ds_spec(alpha=1.5, k_max=9)
        base = sample_ds_input(small, RngStream(44))
        carried = DirectSumElement(large, list(base.items()))
        for mode in (Mode.ADAPTIVE, Mode.NONADAPTIVE):
            r1 = ds_estimate(base, 4, 0.2, mode, None, RngStream(7))
            r2 = ds_estimate(carried, 4, 0.2, mode, None, RngStream(7))
            assert r1.value == r2.value
            assert r1.cards == r2.cards

    def test_levels_above_k1_dropped(self):
        spec = ds_spec(alpha=2.0, k_max=6)
        # k0 = 2, alpha = 2 gives k1 = 3; a level-5 component is never read.
        x = DirectSumElement(spec, [constant_level(spec, 5, 1.0)])
        rep = ds_estimate(x, 2, 0.5, Mode.NONADAPTIVE, None, RngStream(2))
        assert rep.value == 0.0
        assert rep.cards == 0

    def test_adaptive_needs_p_below_2_below_u(self):
        spec = ds_spec(p=2.0, u=INF, k_max=4)
        x = DirectSumElement(spec, [])
        with pytest.raises(PreconditionViolated):
            ds_estimate(x, 2, 0.2, Mode.ADAPTIVE, None, RngStream(0))

    def test_adaptive_budget_floor_enforced(self):
        # alpha = 1.1, k0 = 4, delta = 0.09: the top scheduled level gets a
        # budget below its side length, so the adaptive mode must refuse.
        spec = ds_spec(alpha=1.1, k_max=8)
        x = sample_ds_input(spec, RngStream(5))
        with pytest.raises(PreconditionViolated):
            ds_estimate(x, 4, 0.09, Mode.ADAPTIVE, None, RngStream(1))
        rep = ds_estimate(x, 4, 0.09, Mode.NONADAPTIVE, None, RngStream(1))
        assert rep.cards > 0

    def test_budget_accounting(self):
        spec = ds_spec(alpha=1.5, k_max=6)
        x = sample_ds_input(spec, RngStream(10))
        k0, delta, c0 = 4, 0.2, 0.5
        alloc = level_allocation(k0, spec.alpha, delta, c0)
        bound = alloc.budget_constant * 4**k0
        rep_non = ds_estimate(x, k0, delta, Mode.NONADAPTIVE, None, RngStream(2), c0=c0)
        assert rep_non.cards <= bound
        m = 3
        rep_ad = ds_estimate(x, k0, delta, Mode.ADAPTIVE, m, RngStream(2), c0=c0)
        assert rep_ad.cards <= 6 * m * bound
