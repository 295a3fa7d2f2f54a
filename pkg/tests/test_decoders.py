from __future__ import annotations

import itertools
from collections.abc import Callable

import numpy as np
import pytest

from dualdec.channels import SoftObservation, awgn_transmit, ebn0_to_sigma2
from dualdec.code_model import (
    LinearCode,
    code_from_generator,
    encode,
    ensure_min_distance,
    random_systematic_code,
)
from dualdec.decoders import (
    DECODER_NAMES,
    DECODERS,
    DecodeOutcome,
    DecoderParams,
    PadState,
    bp_decode,
    estimated_gf2_mults,
    ierd_decode,
    min_sum_decode,
    ml_oracle_decode,
    pad_decode,
    sum_product_posterior,
)
from dualdec.dual_sampler import DualSet, sample_dual_sets
from dualdec.errors import CapabilityError, DimensionError
from dualdec.gf2 import BinaryMatrix, BitVector
from dualdec.reliability import wt_total


def _all_codewords(code: LinearCode) -> list[BitVector]:
    return [
        encode(code, BitVector.from_bits([(m >> j) & 1 for j in range(code.k)]))
        for m in range(2**code.k)
    ]


def _codeword(code: LinearCode, m: int) -> BitVector:
    return encode(code, BitVector.from_bits([(m >> j) & 1 for j in range(code.k)]))


def _bsc_obs(word: BitVector, p: float = 0.05) -> SoftObservation:
    return SoftObservation(samples=2.0 * word.to_array() - 1.0, kind="bsc", crossover=p)


def _repetition4() -> LinearCode:
    return code_from_generator(BinaryMatrix.from_array([[1, 1, 1, 1]]))


@pytest.fixture(scope="module")
def code32() -> LinearCode:
    """最小距離 3 以上の (32,16) 組織符号（シードを順に試して最初に見つかったもの）。"""
    for seed in itertools.count():
        code = ensure_min_distance(random_systematic_code(32, 16, np.random.default_rng(seed)))
        assert code.min_distance is not None
        if code.min_distance >= 3:
            return code
    raise AssertionError("unreachable")


@pytest.fixture(scope="module")
def duals32(code32: LinearCode) -> DualSet:
    return sample_dual_sets(code32, 2500, 2500, rng=np.random.default_rng(0))


def _two_check_set() -> DualSet:
    # 1 ビット反転ではどちらか一方しか満たせない 2 本の検査
    return DualSet(
        n=7,
        set_a=(BitVector.from_bits("1100000"), BitVector.from_bits("0011000")),
        set_b=(),
        d_a=3,
        d_b=4,
        design_tau=0,
    )


# --- IERD ---------------------------------------------------------------------------


def test_ierd_returns_codeword_unchanged(code32: LinearCode, duals32: DualSet) -> None:
    sent = _codeword(code32, 12345)
    outcome = ierd_decode(sent, duals32, code32)
    assert outcome.estimate == sent
    assert outcome.iterations_used == 0
    assert outcome.converged and outcome.syndrome_clean
    assert outcome.status == "decoded"
    assert outcome.flips == ()


def test_ierd_corrects_every_single_error(code32: LinearCode, duals32: DualSet) -> None:
    """1 ビット誤りは 1 反復で、誤り位置を反転して直る。"""
    rng = np.random.default_rng(5)
    for _ in range(3):
        msg = BitVector.from_bits(rng.integers(0, 2, size=16, dtype=np.uint8))
        sent = encode(code32, msg)
        for j in range(32):
            outcome = ierd_decode(sent.flip(j), duals32, code32)
            assert outcome.estimate == sent, f"位置 {j} の誤りが訂正されていません"
            assert outcome.flips == (j,)
            assert outcome.iterations_used == 1
            assert outcome.converged


def test_ierd_flip_trace_and_exhaustion(hamming74: LinearCode) -> None:
    """反転履歴は最小インデックスの argmin をたどり、t_max で打ち切られる。"""
    duals = _two_check_set()
    r = BitVector.from_bits("1010000")

    stopped = ierd_decode(r, duals, hamming74, t_max=1)
    assert stopped.flips == (0,)
    assert stopped.iterations_used == 1
    assert not stopped.converged
    assert stopped.status == "exhausted"
    assert str(stopped.estimate) == "0010000"
    assert not stopped.syndrome_clean

    finished = ierd_decode(r, duals, hamming74, t_max=5)
    assert finished.flips == (0, 2)
    assert finished.iterations_used == 2
    assert finished.converged
    assert finished.estimate == BitVector.zeros(7)
    assert finished.syndrome_clean


def test_ierd_rejects_bad_inputs(hamming74: LinearCode) -> None:
    duals = _two_check_set()
    with pytest.raises(DimensionError):
        ierd_decode(BitVector.zeros(6), duals, hamming74)
    with pytest.raises(ValueError):
        ierd_decode(BitVector.zeros(7), duals, hamming74, t_max=0)
    empty = DualSet(n=7, set_a=(), set_b=(), d_a=3, d_b=4, design_tau=0)
    with pytest.raises(ValueError):
        ierd_decode(BitVector.zeros(7), empty, hamming74)


# --- PAD ----------------------------------------------------------------------------


def test_pad_corrects_single_errors(code32: LinearCode, duals32: DualSet) -> None:
    rng = np.random.default_rng(6)
    msg = BitVector.from_bits(rng.integers(0, 2, size=16, dtype=np.uint8))
    sent = encode(code32, msg)
    for j in range(0, 32, 3):
        outcome = pad_decode(_bsc_obs(sent.flip(j)), duals32, code32)
        assert outcome.estimate == sent, f"位置 {j} の誤りが訂正されていません"
        assert outcome.converged
        assert outcome.iterations_used == 1
        assert outcome.flips == (1,)


def test_pad_accepts_clean_awgn_input(code32: LinearCode, duals32: DualSet) -> None:
    sent = _codeword(code32, 777)
    noiseless = SoftObservation(
        samples=2.0 * sent.to_array() - 1.0, kind="awgn", noise_variance=0.5
    )
    outcome = pad_decode(noiseless, duals32, code32)
    assert outcome.estimate == sent
    assert outcome.iterations_used == 0
    assert outcome.status == "decoded"


def test_pad_flat_profile_keeps_state_until_t_max() -> None:
    """全位置の WT が同じ（min = max）反復では何も反転せず、t_max まで進んで exhausted になる。"""
    code = _repetition4()
    duals = DualSet(
        n=4, set_a=(BitVector.from_bits("1111"),), set_b=(), d_a=5, d_b=0, design_tau=0
    )
    obs = _bsc_obs(BitVector.from_bits("1000"))
    outcome = pad_decode(obs, duals, code, t_max=10)
    assert outcome.status == "exhausted"
    assert not outcome.converged
    assert outcome.iterations_used == 10
    assert outcome.flips == (0,) * 10
    assert str(outcome.estimate) == "1000"


def test_pad_branch_follows_current_hard_bit() -> None:
    """E_i の式は受信サンプルの符号ではなく、いまの硬判定ビットで選ぶ。"""
    lr = np.array([2.0, 2.0])
    values = np.array([1, 1])
    one_zero = PadState(lr=lr, hard=np.array([1, 0], dtype=np.uint8), alpha=1.0, epsilon=1e-9)
    # 硬判定 1 なら 2 * (3 - 1) / 1、0 なら 2 * (1 - 0) / (3 - 1)
    assert one_zero.combine(values, 0, 3) == pytest.approx([4.0, 1.0])
    zero_one = PadState(lr=lr, hard=np.array([0, 1], dtype=np.uint8), alpha=1.0, epsilon=1e-9)
    assert zero_one.combine(values, 0, 3) == pytest.approx([1.0, 4.0])


def test_pad_exhausted_estimate_is_best_iterate(code32: LinearCode, duals32: DualSet) -> None:
    """打ち切り時の推定語の WT は、受信語の硬判定の WT を超えない。"""
    rng = np.random.default_rng(21)
    exhausted = 0
    for _ in range(40):
        sent = _codeword(code32, int(rng.integers(0, 2**16)))
        error = (rng.random(32) < 0.15).astype(np.uint8)
        received = sent ^ BitVector.from_bits(error)
        outcome = pad_decode(_bsc_obs(received, p=0.15), duals32, code32, t_max=4)
        assert outcome.estimate.length == 32
        if outcome.status == "exhausted":
            exhausted += 1
            assert wt_total(outcome.estimate, duals32) <= wt_total(received, duals32)
            assert wt_total(outcome.estimate, duals32) > 0
    assert exhausted > 0


def test_pad_rejects_bad_parameters(hamming74: LinearCode) -> None:
    obs = _bsc_obs(BitVector.zeros(7))
    with pytest.raises(ValueError):
        pad_decode(obs, _two_check_set(), hamming74, alpha=0.0)
    with pytest.raises(ValueError):
        pad_decode(obs, _two_check_set(), hamming74, epsilon=-1.0)


# --- BP / min-sum -------------------------------------------------------------------


@pytest.mark.parametrize("decode", [bp_decode, min_sum_decode])
def test_message_passing_fixes_a_weak_flip(
    hamming74: LinearCode, decode: Callable[..., DecodeOutcome]
) -> None:
    """1 か所だけ符号が弱く反転した受信（r_j = -0.2 s_j）は 1 反復で直る。"""
    for sent in _all_codewords(hamming74):
        s = 2.0 * sent.to_array() - 1.0
        for j in range(7):
            r = s.copy()
            r[j] = -0.2 * s[j]
            obs = SoftObservation(samples=r, kind="awgn", noise_variance=0.25)
            outcome = decode(obs, hamming74, t_max=10)
            assert outcome.estimate == sent
            assert outcome.converged and outcome.syndrome_clean
            assert outcome.iterations_used == 1


@pytest.mark.parametrize("decode", [bp_decode, min_sum_decode])
def test_message_passing_stops_immediately_on_codeword(
    hamming74: LinearCode, decode: Callable[..., DecodeOutcome]
) -> None:
    sent = _codeword(hamming74, 9)
    obs = SoftObservation(samples=2.0 * sent.to_array() - 1.0, kind="awgn", noise_variance=1.0)
    outcome = decode(obs, hamming74)
    assert outcome.iterations_used == 0
    assert outcome.estimate == sent


def test_min_sum_agrees_with_sum_product_at_high_snr(code32: LinearCode) -> None:
    """Eb/N0 = 6 dB では min-sum と sum-product の推定ビットが 95% 以上一致する。"""
    rng = np.random.default_rng(14)
    sigma2 = ebn0_to_sigma2(6.0, code32.k / code32.n)
    agree = total = 0
    for m in rng.integers(0, 2**16, size=100):
        obs = awgn_transmit(_codeword(code32, int(m)), sigma2, rng)
        bp = bp_decode(obs, code32, t_max=20).estimate.to_array()
        ms = min_sum_decode(obs, code32, t_max=20).estimate.to_array()
        agree += int((bp == ms).sum())
        total += code32.n
    assert agree / total >= 0.95


def test_sum_product_is_exact_on_a_tree() -> None:
    """閉路のないタナーグラフでは sum-product の事後 LLR が厳密な周辺化と一致する。"""
    h = np.array(
        [
            [1, 1, 1, 0, 0, 0],
            [0, 0, 1, 1, 1, 0],
            [0, 0, 0, 0, 1, 1],
        ],
        dtype=np.uint8,
    )
    rng = np.random.default_rng(12)
    for _ in range(5):
        llr = rng.normal(0.0, 1.5, size=6)
        p0 = 1.0 / (1.0 + np.exp(-llr))
        mass0 = np.zeros(6)
        mass1 = np.zeros(6)
        for bits in itertools.product((0, 1), repeat=6):
            x = np.array(bits)
            if ((h @ x) % 2).any():
                continue
            weight = float(np.prod(np.where(x == 0, p0, 1.0 - p0)))
            mass0 += np.where(x == 0, weight, 0.0)
            mass1 += np.where(x == 1, weight, 0.0)
        exact = np.log(mass0 / mass1)
        assert sum_product_posterior(llr, h, iterations=10) == pytest.approx(
            exact, rel=1e-6, abs=1e-9
        )


def test_sum_product_rejects_shape_mismatch() -> None:
    with pytest.raises(DimensionError):
        sum_product_posterior(np.zeros(5), np.ones((2, 6), dtype=np.uint8), iterations=3)


# --- ML -----------------------------------------------------------------------------


def test_ml_oracle_hard_and_soft(hamming74: LinearCode) -> None:
    for sent in _all_codewords(hamming74):
        for j in range(7):
            assert ml_oracle_decode(sent.flip(j), hamming74) == sent
            s = 2.0 * sent.to_array() - 1.0
            s[j] = -0.4 * s[j]
            obs = SoftObservation(samples=s, kind="awgn", noise_variance=0.5)
            assert ml_oracle_decode(obs, hamming74) == sent


def test_ml_oracle_ties_go_to_lowest_message() -> None:
    code = _repetition4()
    assert ml_oracle_decode(BitVector.from_bits("1100"), code) == BitVector.zeros(4)
    flat = SoftObservation(samples=np.zeros(4), kind="awgn", noise_variance=1.0)
    assert ml_oracle_decode(flat, code) == BitVector.zeros(4)


def test_ml_oracle_limits(hamming74: LinearCode) -> None:
    with pytest.raises(DimensionError):
        ml_oracle_decode(BitVector.zeros(6), hamming74)
    big = random_systematic_code(30, 21, np.random.default_rng(0))
    with pytest.raises(CapabilityError):
        ml_oracle_decode(BitVector.zeros(30), big)


# --- レジストリ -----------------------------------------------------------------------


def test_registry_dispatch(hamming74: LinearCode) -> None:
    assert set(DECODERS) == set(DECODER_NAMES)
    params = DecoderParams(t_max=5, alpha=1.0, epsilon=1e-9)
    sent = _codeword(hamming74, 3)
    received = sent.flip(4)
    s = 2.0 * sent.to_array() - 1.0
    s[4] = -0.2 * s[4]
    soft = SoftObservation(samples=s, kind="awgn", noise_variance=0.25)
    for name in ("bp", "minsum", "ml"):
        outcome = DECODERS[name](soft, received, hamming74, None, params)
        assert outcome.estimate == sent, f"{name} が 1 ビット誤りを訂正できていません"
    # BSC では ML は硬判定で比べる
    obs = _bsc_obs(received)
    assert DECODERS["ml"](obs, received, hamming74, None, params).estimate == sent
    with pytest.raises(ValueError):
        DECODERS["ierd"](obs, received, hamming74, None, params)
    with pytest.raises(ValueError):
        DECODERS["pad"](obs, received, hamming74, None, params)


def test_estimated_gf2_mults() -> None:
    assert estimated_gf2_mults("ierd", 2, 7, 3) == 3 * 49 * 2
    assert estimated_gf2_mults("pad", 2, 7, 3) == (3 * 7 + 1) * 7 * 2
    for name in ("bp", "minsum", "ml"):
        assert estimated_gf2_mults(name, 5, 7, 3) == 0
    assert estimated_gf2_mults("ierd", 0, 7, 3) == 0
