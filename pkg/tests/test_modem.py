import csv

import numpy as np
import pytest

from pncsim.modem import (
    demodulate_nearest,
    gray_code,
    modulate,
    pam,
    psk_gray,
    relabel,
    write_constellation_csv,
)


def _hamming(a, b):
    return bin(int(a) ^ int(b)).count("1")


@pytest.mark.parametrize("M", [2, 4, 8, 16])
def test_psk_unit_energy_and_gray_neighbours(M):
    c = psk_gray(M)
    np.testing.assert_allclose(np.abs(c.points), 1.0)
    for i in range(M):
        assert _hamming(c.bit_labels[i], c.bit_labels[(i + 1) % M]) == 1


def test_psk_rotation():
    c = psk_gray(8, np.pi / 8)
    np.testing.assert_allclose(np.angle(c.points[0]), np.pi / 8)


def test_psk_bits_equal_symbol_labels():
    c = psk_gray(8)
    np.testing.assert_array_equal(c.bit_labels, c.symbol_labels)


def test_uniform_4pam_levels():
    c = pam(4)
    np.testing.assert_allclose(c.points.real, np.array([-3, -1, 1, 3]) / np.sqrt(5))
    assert c.energy == pytest.approx(1.0)
    np.testing.assert_array_equal(c.symbol_labels, [0, 1, 2, 3])
    np.testing.assert_array_equal(c.bit_labels, gray_code(2))


def test_non_uniform_pam_is_normalized():
    c = pam(4, [1.0, 2.0, 1.0])
    assert c.energy == pytest.approx(1.0)
    assert np.mean(c.points.real) == pytest.approx(0.0, abs=1e-12)
    gaps = np.diff(c.points.real)
    assert gaps[1] / gaps[0] == pytest.approx(2.0)


def test_pam_spacing_validation():
    with pytest.raises(ValueError):
        pam(4, [1.0, 1.0])
    with pytest.raises(ValueError):
        pam(4, [1.0, -1.0, 1.0])


@pytest.mark.parametrize("M", [3, 1, 32])
def test_invalid_orders(M):
    with pytest.raises(ValueError):
        psk_gray(M)


def test_bits_and_symbols_agree():
    c = pam(8)
    bits = np.array([0, 1, 1, 1, 0, 0])
    symbols = c.bits_to_symbols(bits)
    np.testing.assert_array_equal(c.bit_labels[symbols], [0b011, 0b100])
    np.testing.assert_array_equal(c.symbols_to_bits(symbols), bits)


def test_relabel_moves_labels_not_points():
    c = pam(4)
    r = relabel(c, [3, 2, 1, 0])
    np.testing.assert_array_equal(r.points, c.points)
    np.testing.assert_array_equal(r.symbol_labels, [3, 2, 1, 0])
    assert r.point_of_symbol[0] == c.point_of_symbol[3]
    with pytest.raises(ValueError):
        relabel(c, [0, 0, 1, 2])


def test_nearest_demodulation_inverts_modulation():
    c = psk_gray(8, 0.3)
    symbols = np.arange(8)
    np.testing.assert_array_equal(demodulate_nearest(modulate(symbols, c), c), symbols)


def test_modulate_rejects_out_of_range():
    with pytest.raises(ValueError):
        modulate(np.array([4]), pam(4))


def test_constellation_csv(tmp_path):
    path = tmp_path / "c.csv"
    write_constellation_csv(psk_gray(4), path)
    with path.open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4
    assert rows[0].keys() == {"index", "re", "im", "symbol", "bits"}
    assert all(len(r["bits"]) == 2 for r in rows)
