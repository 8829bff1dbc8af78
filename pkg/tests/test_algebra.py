import numpy as np
import pytest

from pncsim.algebra import AlphabetSpec, Element, add, invert, is_irreducible, mul, units
from pncsim.errors import AlphabetMismatchError, DomainError


GF8 = AlphabetSpec.field(3)
Z4 = AlphabetSpec.ring(4)


class TestElementArithmetic:
    def test_field_addition_is_xor(self):
        assert add(GF8(0b011), GF8(0b101)) == GF8(0b110)

    def test_ring_addition_wraps(self):
        assert add(Z4(3), Z4(2)) == Z4(1)

    def test_field_multiplication_reduces_by_primitive_polynomial(self):
        # x * x^2 = x^3 = x + 1 modulo x^3 + x + 1
        assert mul(GF8(0b010), GF8(0b100)) == GF8(0b011)

    def test_ring_multiplication(self):
        assert mul(Z4(3), Z4(3)) == Z4(1)
        assert mul(Z4(2), Z4(2)) == Z4(0)

    def test_operators_match_functions(self):
        a, b = GF8(5), GF8(6)
        assert a + b == add(a, b)
        assert a * b == mul(a, b)

    def test_mixed_alphabets_rejected(self):
        with pytest.raises(AlphabetMismatchError):
            add(GF8(1), Z4(1))
        with pytest.raises(ValueError):
            mul(AlphabetSpec.field(2)(1), GF8(1))

    def test_out_of_range_element(self):
        with pytest.raises(ValueError):
            Z4(4)


class TestUnitsAndInverses:
    def test_ring_units(self):
        assert [u.value for u in units(Z4)] == [1, 3]
        assert [u.value for u in units(AlphabetSpec.ring(8))] == [1, 3, 5, 7]

    def test_field_units_are_nonzero_elements(self):
        assert [u.value for u in units(GF8)] == list(range(1, 8))

    @pytest.mark.parametrize("alphabet", [GF8, AlphabetSpec.field(4), Z4, AlphabetSpec.ring(8)])
    def test_inverse_of_every_unit(self, alphabet):
        for u in units(alphabet):
            assert u * invert(u) == alphabet.one

    def test_non_unit_inverse_raises(self):
        with pytest.raises(DomainError):
            invert(Z4(2))
        with pytest.raises(DomainError):
            invert(GF8(0))


class TestTables:
    @pytest.mark.parametrize("r", range(1, 9))
    def test_field_multiplicative_group_is_cyclic(self, r):
        alphabet = AlphabetSpec.field(r)
        exp, log = alphabet._exp_log
        q = alphabet.size
        assert sorted(exp[: q - 1].tolist()) == list(range(1, q))
        assert log[0] == -1

    @pytest.mark.parametrize("alphabet", [GF8, AlphabetSpec.field(2), Z4])
    def test_distributive_law(self, alphabet):
        add_t, mul_t = alphabet.add_table, alphabet.mul_table
        v = np.arange(alphabet.size)
        a, b, c = np.meshgrid(v, v, v, indexing="ij")
        np.testing.assert_array_equal(
            mul_t[a, add_t[b, c]], add_t[mul_t[a, b], mul_t[a, c]]
        )

    @pytest.mark.parametrize(
        "alphabet", [AlphabetSpec.binary(), AlphabetSpec.field(2), GF8, Z4, AlphabetSpec.ring(8)]
    )
    def test_addition_and_multiplication_commute_and_associate(self, alphabet):
        v = np.arange(alphabet.size)
        a, b, c = np.meshgrid(v, v, v, indexing="ij")
        for table in (alphabet.add_table, alphabet.mul_table):
            np.testing.assert_array_equal(table, table.T)
            np.testing.assert_array_equal(table[table[a, b], c], table[a, table[b, c]])

    def test_ring_multiplication_by_a_non_unit_is_not_injective(self):
        assert mul(Z4(2), Z4(0)) == mul(Z4(2), Z4(2)) == Z4(0)
        assert len(set(Z4.mul_table[2].tolist())) == 2

    def test_negation_and_subtraction(self):
        np.testing.assert_array_equal(Z4.neg_table, [0, 3, 2, 1])
        np.testing.assert_array_equal(GF8.neg_table, np.arange(8))
        assert Z4.sub_table[1, 3] == 2

    def test_group_sum(self):
        np.testing.assert_array_equal(GF8.sum(np.array([[1, 2, 4], [3, 3, 0]])), [7, 0])
        np.testing.assert_array_equal(Z4.sum(np.array([[1, 2, 3], [2, 2, 0]])), [2, 0])

    def test_labels(self):
        assert str(GF8) == "GF(8)"
        assert str(Z4) == "Z_4"
        assert AlphabetSpec.binary().is_binary


class TestPolynomials:
    def test_default_polynomials_are_irreducible(self):
        for r in range(1, 9):
            assert is_irreducible(AlphabetSpec.field(r).primitive_poly)

    def test_reducible_polynomial_rejected(self):
        # x^2 + 1 = (x + 1)^2 over GF(2)
        with pytest.raises(ValueError):
            AlphabetSpec.field(2, 0b101)

    def test_degree_mismatch_rejected(self):
        with pytest.raises(ValueError):
            AlphabetSpec.field(3, 0b111)
