import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdmimo.analog import (
    EnumerationTooLarge,
    PlacementStrategy,
    TapErrorModel,
    TapHardwareSpec,
    TapPlacement,
    build_canceller,
    build_selection_matrices,
    compose,
    enumerate_placements,
    ideal_tap_values,
    place_taps,
    quantize_taps,
    residual_channel,
    tap_reduction_percent,
)

from conftest import cn

DEFAULT_TAPS = TapHardwareSpec(0.02, 0.13, TapErrorModel.UNIFORM)
WORST = abs(1 - 10 ** (0.01 / 20) * complex(math.cos(math.radians(0.065)), math.sin(math.radians(0.065))))


def full_placement(m, n):
    return TapPlacement(tuple((i, j) for i in range(1, m + 1) for j in range(1, n + 1)))


def brute_force_largest(H, n_taps):
    m, n = H.shape
    cells = [(abs(H[i, j]), i + 1, j + 1) for i in range(m) for j in range(n)]
    cells.sort(key=lambda c: (-c[0], c[1], c[2]))
    return {(i, j) for _, i, j in cells[:n_taps]}


class TestTapPlacement:
    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            TapPlacement(((1, 1), (1, 1)))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            TapPlacement(((5, 1),), shape=(4, 3))


class TestPlaceTaps:
    def test_worked_example_largest(self):
        # M_k=4, N_k=3, N=2 with [H]_{2,1} and [H]_{4,2} dominant
        H = np.full((4, 3), 0.1 + 0j)
        H[1, 0] = 0.9
        H[3, 1] = -0.8j
        p = place_taps(H, 2, PlacementStrategy.LARGEST_AMPLITUDE)
        assert p.positions == ((2, 1), (4, 2))

    def test_2x2_largest(self):
        H = np.array([[4, 3], [2, 1]], dtype=complex)
        p = place_taps(H, 2, PlacementStrategy.LARGEST_AMPLITUDE)
        assert set(p.positions) == {(1, 1), (1, 2)}

    @pytest.mark.parametrize("shape", [(2, 2), (3, 4)])
    def test_largest_matches_brute_force(self, shape):
        rng = np.random.default_rng(11)
        m, n = shape
        for _ in range(1000):
            H = cn(rng, m, n)
            k = int(rng.integers(1, m * n + 1))
            p = place_taps(H, k, PlacementStrategy.LARGEST_AMPLITUDE)
            assert set(p.positions) == brute_force_largest(H, k)

    def test_ties_prefer_smaller_indices(self):
        H = np.ones((3, 3), dtype=complex)
        p = place_taps(H, 4, PlacementStrategy.LARGEST_AMPLITUDE)
        assert p.positions == ((1, 1), (1, 2), (1, 3), (2, 1))

    @pytest.mark.parametrize("strategy", [s for s in PlacementStrategy if s not in (PlacementStrategy.EXPLICIT, PlacementStrategy.EXHAUSTIVE)])
    def test_full_placement_covers_everything(self, strategy, rng):
        H = cn(rng, 4, 3)
        p = place_taps(H, 12, strategy)
        assert set(p.positions) == set(product(range(1, 5), range(1, 4)))

    def test_row_wise_fills_strongest_row_first(self):
        H = np.array([[1, 1, 1], [5, 0.1, 3], [2, 2, 2]], dtype=complex)
        p = place_taps(H, 4, PlacementStrategy.ROW_WISE)
        # row 2 has the largest norm, entries by amplitude, then row 3
        assert p.positions == ((2, 1), (2, 3), (2, 2), (3, 1))

    def test_column_wise(self):
        H = np.array([[1, 5], [1, 0.1], [1, 3]], dtype=complex)
        p = place_taps(H, 4, PlacementStrategy.COLUMN_WISE)
        assert p.positions == ((1, 2), (3, 2), (2, 2), (1, 1))

    def test_first_rows(self, rng):
        p = place_taps(cn(rng, 4, 4), 8, PlacementStrategy.FIRST_ROWS)
        assert p.positions == tuple((i, j) for i in (1, 2) for j in (1, 2, 3, 4))

    def test_capacity_error(self, rng):
        with pytest.raises(ValueError, match="capacity"):
            place_taps(cn(rng, 2, 2), 5, PlacementStrategy.FIRST_ROWS)

    def test_exhaustive_needs_search(self, rng):
        with pytest.raises(ValueError):
            place_taps(cn(rng, 2, 2), 2, PlacementStrategy.EXHAUSTIVE)


class TestSelectionMatrices:
    def test_worked_example(self):
        p = TapPlacement(((2, 1), (4, 2)))
        L1, L3 = build_selection_matrices(p, n_tx=3, n_rx=4)
        expected_L1 = np.zeros((2, 3))
        expected_L1[0, 0] = expected_L1[1, 1] = 1
        expected_L3 = np.zeros((4, 2))
        expected_L3[1, 0] = expected_L3[3, 1] = 1
        assert np.array_equal(L1, expected_L1)
        assert np.array_equal(L3, expected_L3)

    def test_single_tap(self):
        L1, L3 = build_selection_matrices(TapPlacement(((1, 1),)), 4, 3)
        assert np.array_equal(L1, [[1, 0, 0, 0]])
        assert np.array_equal(L3, [[1], [0], [0]])

    def test_full_row_major_scatter(self):
        m, n = 3, 4
        L1, L3 = build_selection_matrices(full_placement(m, n), n, m)
        # tap t connects TX column j to RX row i; visit every pair exactly once
        hits = np.zeros((m, n), dtype=int)
        for t in range(m * n):
            i = int(np.flatnonzero(L3[:, t])[0])
            j = int(np.flatnonzero(L1[t])[0])
            hits[i, j] += 1
        assert np.array_equal(hits, np.ones((m, n)))
        assert np.array_equal(L3 @ np.eye(m * n) @ L1, np.ones((m, n)))

    @settings(max_examples=200, deadline=None)
    @given(
        m=st.integers(1, 5),
        n=st.integers(1, 5),
        data=st.data(),
    )
    def test_sums_hold_by_construction(self, m, n, data):
        cells = [(i, j) for i in range(1, m + 1) for j in range(1, n + 1)]
        chosen = data.draw(st.lists(st.sampled_from(cells), min_size=1, unique=True))
        L1, L3 = build_selection_matrices(TapPlacement(tuple(chosen)), n, m)
        assert np.array_equal(L1.sum(axis=1), np.ones(len(chosen)))
        assert np.array_equal(L3.sum(axis=0), np.ones(len(chosen)))
        assert set(np.unique(L1)) | set(np.unique(L3)) <= {0.0, 1.0}


class TestTapValues:
    def test_zero_channel(self):
        L2 = ideal_tap_values(np.zeros((2, 2), complex), TapPlacement(((1, 1), (2, 2))))
        assert np.array_equal(L2, np.zeros((2, 2)))

    def test_negated_entry_cancels(self):
        H = np.zeros((4, 3), complex)
        H[1, 0] = 0.3 + 0.4j
        p = TapPlacement(((2, 1),))
        L2 = ideal_tap_values(H, p)
        assert L2[0, 0] == -0.3 - 0.4j
        L1, L3 = build_selection_matrices(p, 3, 4)
        assert residual_channel(H, compose(L1, L2, L3))[1, 0] == 0

    def test_full_ideal_cancellation_exact(self, rng):
        H = cn(rng, 4, 4)
        canc = build_canceller(H, full_placement(4, 4), TapHardwareSpec.ideal())
        assert np.array_equal(residual_channel(H, canc.C), np.zeros((4, 4)))


class TestQuantization:
    def test_none_is_identity(self, rng):
        L2 = np.diag(cn(rng, 5))
        out = quantize_taps(L2, TapHardwareSpec.ideal(), rng)
        assert out is L2 or np.array_equal(out, L2)

    def test_default_steps_bound_each_tap(self, rng):
        for _ in range(200):
            L2 = np.diag(cn(rng, 8))
            out = quantize_taps(L2, DEFAULT_TAPS, rng)
            ratio = np.diag(out) / np.diag(L2)
            assert np.all(np.abs(20 * np.log10(np.abs(ratio))) <= 0.01 + 1e-12)
            assert np.all(np.abs(np.degrees(np.angle(ratio))) <= 0.065 + 1e-12)
            assert np.count_nonzero(out - np.diag(np.diag(out))) == 0

    def test_zero_tap_stays_zero(self, rng):
        L2 = np.diag([0.0, 1.0 + 1j])
        out = quantize_taps(L2, DEFAULT_TAPS, rng)
        assert out[0, 0] == 0

    def test_errors_fill_the_box(self, rng):
        L2 = np.eye(100, dtype=complex)
        ratio = np.concatenate([np.diag(quantize_taps(L2, DEFAULT_TAPS, rng)) for _ in range(200)])
        db = 20 * np.log10(np.abs(ratio))
        deg = np.degrees(np.angle(ratio))
        assert db.min() < -0.0099 and db.max() > 0.0099
        assert deg.min() < -0.0649 and deg.max() > 0.0649
        # uniform error: variance is step^2 / 12
        assert np.var(db) == pytest.approx(0.02**2 / 12, rel=0.05)

    def test_full_tap_residual_under_worst_case(self, rng):
        assert DEFAULT_TAPS.worst_case_relative_error() == pytest.approx(WORST, rel=1e-12)
        for _ in range(200):
            H = cn(rng, 4, 4) * 1e-2
            canc = build_canceller(H, full_placement(4, 4), DEFAULT_TAPS, rng)
            rel = np.abs(residual_channel(H, canc.C)) / np.abs(H)
            assert np.all(rel <= WORST + 1e-6)

    def test_step_validation(self):
        with pytest.raises(ValueError):
            TapHardwareSpec(0.0, 0.13, TapErrorModel.UNIFORM)
        TapHardwareSpec(0.0, 0.0, TapErrorModel.NONE)


class TestCompose:
    def test_zero_taps(self, rng):
        H = cn(rng, 4, 3)
        p = TapPlacement(((1, 1), (2, 2)))
        L1, L3 = build_selection_matrices(p, 3, 4)
        C = compose(L1, np.zeros((2, 2)), L3)
        assert np.array_equal(C, np.zeros((4, 3)))
        assert np.array_equal(residual_channel(H, C), H)

    def test_hand_expanded_worked_example(self, rng):
        H = cn(rng, 4, 3)
        canc = build_canceller(H, TapPlacement(((2, 1), (4, 2))), TapHardwareSpec.ideal())
        R = residual_channel(H, canc.C)
        assert R[1, 0] == 0 and R[3, 1] == 0
        mask = np.ones((4, 3), bool)
        mask[1, 0] = mask[3, 1] = False
        assert np.array_equal(R[mask], H[mask])

    def test_equals_direct_scatter(self, rng):
        for _ in range(100):
            m, n = rng.integers(1, 6, size=2)
            k = int(rng.integers(1, m * n + 1))
            cells = [(i, j) for i in range(1, m + 1) for j in range(1, n + 1)]
            chosen = [cells[c] for c in rng.choice(len(cells), size=k, replace=False)]
            taps = cn(rng, k)
            p = TapPlacement(tuple(chosen))
            L1, L3 = build_selection_matrices(p, n, m)
            scatter = np.zeros((m, n), complex)
            for t, (i, j) in enumerate(chosen):
                scatter[i - 1, j - 1] = taps[t]
            assert np.array_equal(compose(L1, np.diag(taps), L3), scatter)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            compose(np.zeros((2, 3)), np.zeros((3, 3)), np.zeros((4, 2)))
        with pytest.raises(ValueError):
            residual_channel(np.zeros((2, 2)), np.zeros((2, 3)))


class TestEnumeration:
    @staticmethod
    def binomial(n, k):
        # Pascal's rule, independent of math.comb
        row = [1]
        for _ in range(n):
            row = [1] + [a + b for a, b in zip(row, row[1:])] + [1]
        return row[k]

    def test_small(self):
        ps = list(enumerate_placements(2, 2, 2))
        assert len(ps) == 6
        assert len({p.positions for p in ps}) == 6
        assert ps[0].positions == ((1, 1), (1, 2))
        assert [p.positions for p in ps] == sorted(p.positions for p in ps)

    def test_4x4_choose_8(self):
        assert sum(1 for _ in enumerate_placements(4, 4, 8)) == self.binomial(16, 8) == 12870

    def test_full(self):
        ps = list(enumerate_placements(3, 2, 6))
        assert len(ps) == 1 and len(ps[0]) == 6

    def test_cap(self):
        with pytest.raises(EnumerationTooLarge, match="heuristic"):
            next(enumerate_placements(4, 4, 8, cap=1000))


def test_tap_reduction():
    assert tap_reduction_percent(8, 4, 4) == 50.0
    assert tap_reduction_percent(16, 4, 4) == 0.0
