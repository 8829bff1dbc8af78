import csv

import numpy as np
import pytest

from pncsim.algebra import AlphabetSpec
from pncsim.modem import pam, psk_gray
from pncsim.pnc import NcMap, build_superimposed_set, detect_ambiguity, select_coefficients, write_superimposed_csv
from pncsim.pnc.superimposed import effective_min_distance, pair_points

Z4 = AlphabetSpec.ring(4)


class TestSetSize:
    def test_rotated_8psk_pair(self, rotated_8psk):
        assert build_superimposed_set(*rotated_8psk).n_entries == 64

    def test_same_8psk_set(self, same_8psk):
        assert build_superimposed_set(*same_8psk).n_entries == 33

    def test_bpsk(self):
        sset = build_superimposed_set(psk_gray(2), psk_gray(2))
        points = sorted(round(e.point.real, 12) for e in sset.entries)
        assert points == [-2.0, 0.0, 2.0]

    def test_every_pair_lands_in_one_entry(self, same_8psk):
        sset = build_superimposed_set(*same_8psk)
        assert sum(len(e.pairs) for e in sset.entries) == 64

    def test_entries_are_separated_by_the_tolerance(self, same_8psk):
        sset = build_superimposed_set(*same_8psk)
        pts = np.array([e.point for e in sset.entries])
        dist = np.abs(pts[:, None] - pts[None, :]) + np.eye(len(pts)) * 10
        assert dist.min() > sset.tolerance

    def test_channel_gains_shape_the_points(self, pam4_pair):
        sset = build_superimposed_set(*pam4_pair, h1=1.0, h2=0.5j)
        assert sset.n_entries == 16

    def test_unequal_orders(self):
        with pytest.raises(ValueError):
            build_superimposed_set(psk_gray(4), psk_gray(8))


class TestAmbiguity:
    def test_same_8psk_under_xor(self, same_8psk):
        report = detect_ambiguity(build_superimposed_set(*same_8psk))
        assert report.is_exclusive
        assert not report.is_ambiguous
        assert not report.unique_pair

    def test_rotated_8psk_under_xor(self, rotated_8psk):
        report = detect_ambiguity(build_superimposed_set(*rotated_8psk))
        assert not report.is_ambiguous
        assert report.unique_pair

    def test_4pam_same_set_mod4(self, pam4_pair):
        report = detect_ambiguity(build_superimposed_set(*pam4_pair), NcMap(Z4))
        assert report.is_exclusive
        assert not report.is_ambiguous
        assert not report.unique_pair

    def test_4pam_same_set_gray_xor_is_ambiguous(self, pam4_pair):
        # (0, 2) and (1, 1) share a point but their Gray labels XOR to 3 and 0
        report = detect_ambiguity(build_superimposed_set(*pam4_pair))
        assert report.is_ambiguous

    def test_unit_map_can_still_be_ambiguous(self, pam4_pair):
        report = detect_ambiguity(build_superimposed_set(*pam4_pair), NcMap(Z4, 1, 3))
        assert report.is_exclusive
        assert report.is_ambiguous

    def test_non_exclusive_map(self, pam4_pair):
        report = detect_ambiguity(build_superimposed_set(*pam4_pair), NcMap(Z4, 1, 2))
        assert not report.is_exclusive


class TestCoefficientSelection:
    def test_candidates_are_the_z4_unit_pairs(self, pam4_pair):
        m = select_coefficients(*pam4_pair, 1.0, 1.0, Z4)
        assert m.coefficients in {(1, 1), (1, 3), (3, 1), (3, 3)}
        # a = b = 1 is ambiguity-free on the same set, so it wins the tie-break
        assert m.coefficients == (1, 1)

    @pytest.mark.parametrize("h", [(1.0, 1.0), (0.7 + 0.2j, -0.3 + 0.9j)])
    def test_common_positive_scaling_keeps_the_choice(self, pam4_pair, h):
        h1, h2 = h
        base = select_coefficients(*pam4_pair, h1, h2, Z4)
        scaled = select_coefficients(*pam4_pair, 2.5 * h1, 2.5 * h2, Z4)
        assert base.coefficients == scaled.coefficients

    def test_rotated_8psk_has_positive_distance(self, rotated_8psk):
        gf8 = AlphabetSpec.field(3)
        m = select_coefficients(*rotated_8psk, 1.0, 1.0, gf8)
        points = pair_points(*rotated_8psk, 1.0, 1.0)
        s = np.arange(64)
        assert effective_min_distance(points, m.apply(s // 8, s % 8)) > 0

    def test_ambiguity_means_zero_distance(self, pam4_pair):
        points = pair_points(*pam4_pair, 1.0, 1.0)
        s = np.arange(16)
        assert effective_min_distance(points, NcMap(Z4, 1, 3).apply(s // 4, s % 4)) == pytest.approx(0, abs=1e-12)


def test_superimposed_csv(tmp_path, same_8psk):
    path = tmp_path / "set.csv"
    report = write_superimposed_csv(build_superimposed_set(*same_8psk), path)
    with path.open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 33
    assert not report.unique_pair
    assert sum(len(r["pairs"].split(";")) for r in rows) == 64
    assert all(r["ambiguous"] == "0" for r in rows)
