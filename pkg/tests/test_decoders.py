import itertools
import math

import numpy as np
import pytest

from pncsim.algebra import AlphabetSpec
from pncsim.config import settings
from pncsim.ldpc import (
    DecoderConfig,
    LdpcCode,
    MessageGroup,
    OpCounter,
    check_update_direct,
    check_update_fft,
    decode_binary_spa,
    decode_cspa,
    decode_gspa,
    gspa_check_update_2dfft,
    gspa_check_update_ems,
    syndrome,
)
from pncsim.ldpc import nonbinary
from pncsim.ldpc.nonbinary import normalize, split_pairs

from conftest import all_codewords, random_codeword


def _random_messages(rng, checks, dc, size):
    msgs = rng.random((checks, dc, size)) + 1e-3
    return msgs / msgs.sum(axis=-1, keepdims=True)


def _pam_symbol_beliefs(word, q, snr_db, rng):
    """Symbol posteriors of a q-PAM transmission of ``word`` over real AWGN."""
    levels = np.arange(q) - (q - 1) / 2
    levels = levels / np.sqrt(np.mean(levels**2))
    n0 = 10 ** (-snr_db / 10)
    y = levels[word] + np.sqrt(n0 / 2) * rng.standard_normal(len(word))
    logp = -((y[:, None] - levels[None, :]) ** 2) / n0
    p = np.exp(logp - logp.max(axis=1, keepdims=True))
    return p / p.sum(axis=1, keepdims=True)


def _symbol_marginals(book, beliefs):
    """Exact per-position posteriors over every codeword in ``book``."""
    n, q = beliefs.shape
    logw = np.log(np.maximum(beliefs, 1e-300))[np.arange(n), book].sum(axis=1)
    w = np.exp(logw - logw.max())
    return np.stack([np.bincount(book[:, i], w, minlength=q) for i in range(n)])


def _octahedron_code():
    """(12,6) cycle code of K6 minus a perfect matching: dv=2, dc=4, girth 6."""
    edges = [e for e in itertools.combinations(range(6), 2) if e not in {(0, 1), (2, 3), (4, 5)}]
    check_vars = [[v for v, e in enumerate(edges) if c in e] for c in range(6)]
    return LdpcCode.from_checks(
        check_vars, np.ones((6, 4), dtype=np.int64), AlphabetSpec.binary(), n=12, k=6
    )


class TestBinarySpa:
    def test_clean_llrs_converge_immediately(self, binary_code):
        word = random_codeword(binary_code, np.random.default_rng(0))
        result = decode_binary_spa(np.where(word == 0, 8.0, -8.0), binary_code, DecoderConfig(max_iter=10))
        assert result.converged
        assert result.iterations == 1
        np.testing.assert_array_equal(result.hard, word)

    def test_weak_error_is_corrected(self, binary_code):
        word = random_codeword(binary_code, np.random.default_rng(1))
        llr = np.where(word == 0, 4.0, -4.0)
        llr[5] = -0.5 * llr[5] / abs(llr[5])
        hard, converged, _ = decode_binary_spa(llr, binary_code, DecoderConfig(max_iter=20))[:3]
        assert converged
        np.testing.assert_array_equal(hard, word)

    def test_damped_decoding_corrects_a_weak_error(self, binary_code):
        word = random_codeword(binary_code, np.random.default_rng(1))
        llr = np.where(word == 0, 4.0, -4.0)
        llr[5] = -0.5 * llr[5] / abs(llr[5])
        result = decode_binary_spa(llr, binary_code, DecoderConfig(max_iter=40, damping=0.6))
        assert result.converged
        np.testing.assert_array_equal(result.hard, word)

    def test_agrees_with_bitwise_map(self):
        code = _octahedron_code()
        assert code.girth_at_least_6
        book = all_codewords(code)
        rng = np.random.default_rng(12)
        noise_var = 0.2
        frames, agree, oracle_errors = 1000, 0, 0
        for _ in range(frames):
            word = book[rng.integers(len(book))]
            y = 1.0 - 2.0 * word + np.sqrt(noise_var) * rng.standard_normal(code.n)
            llr = 2.0 * y / noise_var
            logw = -(book @ llr)
            w = np.exp(logw - logw.max())
            oracle = (w @ book / w.sum() > 0.5).astype(np.int64)
            result = decode_binary_spa(llr, code, DecoderConfig(max_iter=50))
            agree += np.array_equal(result.hard, oracle)
            oracle_errors += not np.array_equal(oracle, word)
        assert oracle_errors / frames <= 0.1
        assert agree / frames >= 0.95

    def test_zero_information_does_not_converge(self, binary_code):
        result = decode_binary_spa(np.zeros(binary_code.n), binary_code, DecoderConfig(max_iter=5))
        assert not result.converged
        assert result.iterations == 5

    def test_rejects_nonbinary_code(self, z4_code):
        with pytest.raises(ValueError):
            decode_binary_spa(np.zeros(z4_code.n), z4_code, DecoderConfig())


class TestCheckUpdates:
    @pytest.mark.parametrize(
        "alphabet", [AlphabetSpec.field(1), AlphabetSpec.field(2), AlphabetSpec.field(3), AlphabetSpec.ring(4)]
    )
    @pytest.mark.parametrize("dims", [1, 2])
    def test_transform_matches_direct_convolution(self, alphabet, dims):
        group = MessageGroup(alphabet, dims)
        msgs = _random_messages(np.random.default_rng(dims), 50, 5, group.size)
        np.testing.assert_allclose(
            check_update_fft(group, msgs), check_update_direct(group, msgs), rtol=1e-9
        )

    def test_direct_update_enforces_parity(self):
        # Three edges over Z_4: the output for edge 0 is the distribution of -(x1 + x2)
        group = MessageGroup.base(AlphabetSpec.ring(4))
        msgs = np.zeros((1, 3, 4))
        msgs[0, 0] = 0.25
        msgs[0, 1, 1] = 1.0
        msgs[0, 2, 2] = 1.0
        out = check_update_direct(group, msgs)
        np.testing.assert_allclose(out[0, 0], [0, 1, 0, 0], atol=1e-12)

    def test_2dfft_needs_pair_group(self):
        group = MessageGroup.base(AlphabetSpec.field(2))
        with pytest.raises(ValueError):
            gspa_check_update_2dfft(group, np.full((1, 3, 4), 0.25))

    @pytest.mark.parametrize("alphabet", [AlphabetSpec.field(2), AlphabetSpec.ring(4)])
    def test_ems_full_list_is_exact_max_plus(self, alphabet):
        group = MessageGroup.base(alphabet)
        rng = np.random.default_rng(4)
        logs = np.log(_random_messages(rng, 1, 3, group.size))
        out = gspa_check_update_ems(group, logs, n_m=group.size, offset=0.0)
        logs = logs - logs.max(axis=-1, keepdims=True)
        q = group.size
        expected = np.full(q, -np.inf)
        for z, x1, x2 in itertools.product(range(q), repeat=3):
            if group.add_table[z, group.add_table[x1, x2]] == 0:
                expected[z] = max(expected[z], logs[0, 1, x1] + logs[0, 2, x2])
        np.testing.assert_allclose(out[0, 0], expected - expected.max(), atol=1e-12)

    def test_ems_outputs_are_max_zero(self):
        group = MessageGroup.pair(AlphabetSpec.field(2))
        logs = np.log(_random_messages(np.random.default_rng(8), 10, 4, group.size))
        out = gspa_check_update_ems(group, logs, n_m=4)
        np.testing.assert_allclose(out.max(axis=-1), 0.0, atol=1e-12)
        assert np.all(out <= 0.0)

    def test_ems_list_size_bounds(self):
        group = MessageGroup.base(AlphabetSpec.field(2))
        with pytest.raises(ValueError):
            gspa_check_update_ems(group, np.zeros((1, 3, 4)), n_m=5)

    def test_ems_single_entry_list_forwards_the_hard_decision(self):
        group = MessageGroup.pair(AlphabetSpec.field(2))
        logs = np.log(_random_messages(np.random.default_rng(10), 5, 4, group.size))
        out = gspa_check_update_ems(group, logs, n_m=1, floor_offset=2.0, offset=0.0)
        best = np.argmax(logs, axis=-1)
        for c in range(5):
            for t in range(4):
                total = 0
                for u in range(4):
                    if u != t:
                        total = group.add_table[total, best[c, u]]
                expected = np.full(group.size, -2.0)
                expected[group.neg[total]] = 0.0
                np.testing.assert_allclose(out[c, t], expected, atol=1e-12)

    @pytest.mark.parametrize("M", [4, 8])
    def test_operation_counts_scale_as_expected(self, M):
        group = MessageGroup.pair(AlphabetSpec.field(int(math.log2(M))))
        msgs = np.full((2, 6, group.size), 1.0 / group.size)
        direct, fft = OpCounter(), OpCounter()
        check_update_direct(group, msgs, direct)
        check_update_fft(group, msgs, fft)
        theta = group.size
        assert direct.checks == fft.checks == 2
        assert direct.per_check() == 3 * 4 * theta**2
        ratio = direct.per_check() / fft.per_check()
        assert 0.5 <= ratio / (theta / math.log2(theta)) <= 2.0


class TestNonbinaryDecoding:
    @pytest.mark.parametrize("update", ["direct", "fft", "ems"])
    def test_noiseless_cspa(self, gf8_code, update):
        word = random_codeword(gf8_code, np.random.default_rng(2))
        beliefs = np.eye(8)[word]
        result = decode_cspa(beliefs, gf8_code, DecoderConfig(max_iter=5, check_update=update))
        assert result.converged
        np.testing.assert_array_equal(result.hard, word)

    def test_noiseless_gspa(self, z4_code):
        rng = np.random.default_rng(3)
        c1, c2 = random_codeword(z4_code, rng), random_codeword(z4_code, rng)
        beliefs = np.eye(16)[c1 * 4 + c2]
        result = decode_gspa(beliefs, z4_code, DecoderConfig(max_iter=5))
        assert result.converged
        s1, s2 = split_pairs(result.hard, 4)
        np.testing.assert_array_equal(s1, c1)
        np.testing.assert_array_equal(s2, c2)

    def test_fft_and_direct_decode_identically(self, z4_code):
        rng = np.random.default_rng(6)
        for _ in range(10):
            beliefs = _pam_symbol_beliefs(random_codeword(z4_code, rng), 4, 6.0, rng)
            a = decode_cspa(beliefs, z4_code, DecoderConfig(max_iter=15, check_update="fft"))
            b = decode_cspa(beliefs, z4_code, DecoderConfig(max_iter=15, check_update="direct"))
            np.testing.assert_array_equal(a.hard, b.hard)
            assert a.iterations == b.iterations

    def test_op_counter_is_filled(self, gf4_code):
        counter = OpCounter()
        decode_cspa(
            np.full((gf4_code.n, 4), 0.25), gf4_code, DecoderConfig(max_iter=2, early_stop=False), counter
        )
        assert counter.checks == 2 * gf4_code.m
        assert counter.transform > 0

    def test_hard_decisions_of_converged_decode_are_codewords(self, gf4_code):
        rng = np.random.default_rng(9)
        beliefs = _pam_symbol_beliefs(random_codeword(gf4_code, rng), 4, 8.0, rng)
        result = decode_cspa(beliefs, gf4_code, DecoderConfig(max_iter=30))
        if result.converged:
            assert not syndrome(gf4_code, result.hard).any()

    def test_gspa_with_second_user_fixed_at_zero_is_cspa(self, z4_code):
        rng = np.random.default_rng(17)
        zero = np.eye(4)[0]
        cfg = DecoderConfig(max_iter=20, check_update="direct")
        for _ in range(10):
            b1 = _pam_symbol_beliefs(random_codeword(z4_code, rng), 4, 5.0, rng)
            pair = decode_gspa((b1[:, :, None] * zero[None, None, :]).reshape(z4_code.n, 16), z4_code, cfg)
            single = decode_cspa(b1, z4_code, cfg)
            first, second = split_pairs(pair.hard, 4)
            assert not second.any()
            np.testing.assert_array_equal(first, single.hard)
            assert (pair.converged, pair.iterations) == (single.converged, single.iterations)
            np.testing.assert_allclose(
                pair.posterior.reshape(z4_code.n, 4, 4).sum(axis=2), single.posterior, rtol=1e-9, atol=1e-12
            )

    @pytest.mark.parametrize("update", ["fft", "ems"])
    def test_damped_cspa_decodes_clean_frames(self, gf4_code, update):
        rng = np.random.default_rng(16)
        cfg = DecoderConfig(max_iter=40, damping=0.5, check_update=update)
        hits = 0
        for _ in range(20):
            word = random_codeword(gf4_code, rng)
            result = decode_cspa(_pam_symbol_beliefs(word, 4, 14.0, rng), gf4_code, cfg)
            hits += result.converged and np.array_equal(result.hard, word)
        assert hits >= 17

    def test_half_list_ems_stays_close_to_full_gspa(self, z4_code):
        rng = np.random.default_rng(14)
        frames, full_errors, ems_errors = 300, 0, 0
        for _ in range(frames):
            c1, c2 = random_codeword(z4_code, rng), random_codeword(z4_code, rng)
            b1 = _pam_symbol_beliefs(c1, 4, 14.0, rng)
            b2 = _pam_symbol_beliefs(c2, 4, 14.0, rng)
            beliefs = (b1[:, :, None] * b2[:, None, :]).reshape(z4_code.n, 16)
            truth = c1 * 4 + c2
            full = decode_gspa(beliefs, z4_code, DecoderConfig(max_iter=30))
            ems = decode_gspa(beliefs, z4_code, DecoderConfig(max_iter=30, check_update="ems", n_m=8))
            full_errors += not np.array_equal(full.hard, truth)
            ems_errors += not np.array_equal(ems.hard, truth)
        assert ems_errors <= full_errors + 0.03 * frames

    def test_debug_checks_accept_every_update(self, z4_code, monkeypatch):
        monkeypatch.setattr(settings, "debug_checks", True)
        rng = np.random.default_rng(15)
        b1 = _pam_symbol_beliefs(random_codeword(z4_code, rng), 4, 4.0, rng)
        b2 = _pam_symbol_beliefs(random_codeword(z4_code, rng), 4, 4.0, rng)
        pair = (b1[:, :, None] * b2[:, None, :]).reshape(z4_code.n, 16)
        for update in ("direct", "fft", "ems"):
            cfg = DecoderConfig(max_iter=10, check_update=update, early_stop=False, damping=0.8)
            assert decode_cspa(b1, z4_code, cfg).iterations == 10
            assert decode_gspa(pair, z4_code, cfg).iterations == 10

    def test_debug_checks_catch_unnormalized_messages(self, z4_code, monkeypatch):
        monkeypatch.setattr(nonbinary, "_check_update", lambda group, messages, cfg, counter: 2.0 * messages)
        beliefs = np.full((z4_code.n, 4), 0.25)
        decode_cspa(beliefs, z4_code, DecoderConfig(max_iter=2))
        monkeypatch.setattr(settings, "debug_checks", True)
        with pytest.raises(AssertionError, match="check-to-variable"):
            decode_cspa(beliefs, z4_code, DecoderConfig(max_iter=2))


class TestMapAgreement:
    """Hard decisions against exhaustive MAP at an oracle FER near 0.1."""

    @pytest.mark.parametrize("fixture", ["z4_code", "gf4_code"])
    def test_cspa_agrees_with_symbol_map(self, fixture, request):
        code = request.getfixturevalue(fixture)
        book = all_codewords(code)
        rng = np.random.default_rng(7)
        frames, agree, oracle_errors = 1000, 0, 0
        for _ in range(frames):
            word = book[rng.integers(len(book))]
            beliefs = _pam_symbol_beliefs(word, code.alphabet.size, 6.0, rng)
            oracle = np.argmax(_symbol_marginals(book, beliefs), axis=1)
            result = decode_cspa(beliefs, code, DecoderConfig(max_iter=30))
            agree += np.array_equal(result.hard, oracle)
            oracle_errors += not np.array_equal(oracle, word)
        assert 0.03 <= oracle_errors / frames <= 0.3
        assert agree / frames >= 0.92

    @pytest.mark.parametrize("fixture", ["z4_code", "gf4_code"])
    def test_noiseless_frames_always_agree(self, fixture, request):
        code = request.getfixturevalue(fixture)
        book = all_codewords(code)
        rng = np.random.default_rng(11)
        for word in book[rng.choice(len(book), size=50, replace=False)]:
            result = decode_cspa(np.eye(code.alphabet.size)[word], code, DecoderConfig(max_iter=30))
            np.testing.assert_array_equal(result.hard, word)

    @pytest.mark.slow
    def test_gspa_agrees_with_pair_map(self, z4_code):
        book = all_codewords(z4_code)
        n = z4_code.n
        rng = np.random.default_rng(8)
        frames, agree, oracle_errors = 1000, 0, 0
        for _ in range(frames):
            w1, w2 = book[rng.integers(len(book), size=2)]
            b1 = _pam_symbol_beliefs(w1, 4, 7.5, rng)
            b2 = _pam_symbol_beliefs(w2, 4, 7.5, rng)
            # Product beliefs make the posterior over codeword pairs factor, so
            # its per-position marginals are outer products of the user marginals
            m1, m2 = _symbol_marginals(book, b1), _symbol_marginals(book, b2)
            oracle = np.argmax((m1[:, :, None] * m2[:, None, :]).reshape(n, 16), axis=1)
            beliefs = (b1[:, :, None] * b2[:, None, :]).reshape(n, 16)
            result = decode_gspa(beliefs, z4_code, DecoderConfig(max_iter=30))
            agree += np.array_equal(result.hard, oracle)
            oracle_errors += not np.array_equal(oracle, w1 * 4 + w2)
        assert 0.02 <= oracle_errors / frames <= 0.35
        assert agree / frames >= 0.85


class TestDecoderConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            DecoderConfig(max_iter=0)
        with pytest.raises(ValueError):
            DecoderConfig(check_update="bogus")
        with pytest.raises(ValueError):
            DecoderConfig(damping=0.0)

    def test_list_size(self):
        assert DecoderConfig().list_size(16) == 16
        assert DecoderConfig(n_m=4).list_size(16) == 4
        with pytest.raises(ValueError):
            DecoderConfig(n_m=32).list_size(16)

    def test_with_iterations(self):
        assert DecoderConfig(max_iter=150).with_iterations(25).max_iter == 25


def test_normalize_turns_empty_rows_uniform():
    out = normalize(np.array([[0.0, 0.0], [1.0, 3.0]]))
    np.testing.assert_allclose(out, [[0.5, 0.5], [0.25, 0.75]])
