"""Protocol operations: local tests, aggregation, thresholds, full runs."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from distdetect.protocol import (
    CALIBRATED_RULE,
    THEORY_RULE,
    LocalObservation,
    ProblemInstance,
    PublicCoin,
    TestKind,
    Thresholds,
    TranscriptVector,
    aggregate_counting,
    calibrate_count_threshold,
    count_threshold,
    draw_public_coin,
    local_stat_chisq,
    local_test_chisq,
    local_test_sign,
    run_protocol,
    select_regime,
)
from distdetect.protocol import test_single_machine as single_machine_decision
from distdetect.rng import derive_stream


def obs(values):
    return LocalObservation(x=np.asarray(values, dtype=float))


class TestProblemInstance:
    def test_noise_scale(self):
        inst = ProblemInstance(n=10_000, m=100, d=5)
        assert inst.noise_scale == pytest.approx(0.1)

    def test_validation(self):
        with pytest.raises(ValueError):
            ProblemInstance(n=0, m=1, d=1)
        with pytest.raises(ValueError):
            ProblemInstance(n=10, m=0, d=1)
        with pytest.raises(ValueError):
            ProblemInstance(n=10, m=1, d=0)
        with pytest.raises(ValueError):
            ProblemInstance(n=10, m=20, d=1)  # more machines than samples
        with pytest.raises(ValueError):
            ProblemInstance(n=10, m=2, d=1, alpha=0.0)
        with pytest.raises(ValueError):
            ProblemInstance(n=10, m=2, d=1, alpha=1.0)


class TestThresholds:
    def test_level_005_constants(self):
        thr = Thresholds.for_level(0.05)
        assert thr.kappa_bar == pytest.approx(math.sqrt(3.0 * math.log(80.0)), abs=1e-15)
        assert thr.kappa_tilde == pytest.approx(math.sqrt(math.log(320.0) / 3.0), abs=1e-15)
        assert thr.kappa == pytest.approx(2.0 / math.sqrt(0.05), abs=1e-15)
        # pinned decimal values
        assert thr.kappa_bar == pytest.approx(3.6257523224872441, abs=1e-12)
        assert thr.kappa_tilde == pytest.approx(1.3866411450929151, abs=1e-12)
        assert thr.kappa == pytest.approx(8.9442719099991588, abs=1e-12)

    @given(alpha=st.floats(min_value=1e-6, max_value=0.999))
    @settings(max_examples=200, deadline=None)
    def test_recomputable(self, alpha):
        thr = Thresholds.for_level(alpha)
        assert abs(thr.kappa_bar - math.sqrt(3.0 * math.log(4.0 / alpha))) < 1e-12
        assert abs(thr.kappa_tilde - math.sqrt(math.log(16.0 / alpha) / 3.0)) < 1e-12
        assert abs(thr.kappa - 2.0 / math.sqrt(alpha)) < 1e-12


class TestLocalStatChisq:
    def test_zero_vector(self):
        inst = ProblemInstance(n=100, m=4, d=3)
        assert local_stat_chisq(obs([0.0, 0.0, 0.0]), inst) == 0.0

    def test_unit_first_coordinate(self):
        inst = ProblemInstance(n=100, m=4, d=3)
        assert local_stat_chisq(obs([1.0, 0.0, 0.0]), inst) == pytest.approx(25.0)

    def test_null_distribution_is_chi_square(self):
        """Under the null the rescaled squared norm is exactly chi-square
        with d degrees of freedom."""
        inst = ProblemInstance(n=400, m=16, d=6)
        g = derive_stream(314, "protocol:nullstat").generator()
        scale = math.sqrt(inst.m / inst.n)
        vals = np.array(
            [
                local_stat_chisq(LocalObservation(x=scale * g.standard_normal(6)), inst)
                for _ in range(100_000)
            ]
        )
        ks = stats.kstest(vals, lambda t: stats.chi2.cdf(t, df=6))
        assert ks.pvalue > 0.001

    def test_dimension_mismatch(self):
        inst = ProblemInstance(n=100, m=4, d=3)
        with pytest.raises(ValueError):
            local_stat_chisq(obs([1.0, 2.0]), inst)


class TestLocalTestChisq:
    def test_zero_stat_never_fires(self):
        inst = ProblemInstance(n=100, m=4, d=5)
        for i in range(50):
            assert local_test_chisq(0.0, inst, derive_stream(7, "chi0", i)) == 0

    def test_huge_stat_always_fires(self):
        inst = ProblemInstance(n=100, m=4, d=5)
        for i in range(50):
            assert local_test_chisq(1e6, inst, derive_stream(7, "chihuge", i)) == 1

    def test_null_bit_is_fair(self):
        inst = ProblemInstance(n=100, m=4, d=6)
        g = derive_stream(42, "chi:nullbit:data").generator()
        scale = math.sqrt(inst.m / inst.n)
        hits = 0
        reps = 100_000
        x = scale * g.standard_normal((reps, 6))
        stats_v = (inst.n / inst.m) * (x * x).sum(axis=1)
        for i, s in enumerate(stats_v):
            hits += local_test_chisq(float(s), inst, derive_stream(42, "chi:nullbit", i))
        assert abs(hits / reps - 0.5) < 0.005

    def test_rejects_negative_stat(self):
        inst = ProblemInstance(n=100, m=4, d=5)
        with pytest.raises(ValueError):
            local_test_chisq(-0.1, inst, derive_stream(1, "neg"))


class TestLocalTestSign:
    def test_aligned(self):
        inst = ProblemInstance(n=100, m=10, d=3)
        u = np.array([0.3, -0.2, 0.9])
        assert local_test_sign(obs(u), PublicCoin(u=u), inst) == 1

    def test_anti_aligned(self):
        inst = ProblemInstance(n=100, m=10, d=3)
        u = np.array([0.3, -0.2, 0.9])
        assert local_test_sign(obs(-u), PublicCoin(u=u), inst) == 0

    def test_zero_statistic_maps_to_one(self):
        # orthogonal observation: statistic exactly 0, >= comparison fires
        inst = ProblemInstance(n=100, m=10, d=2)
        assert local_test_sign(obs([0.0, 1.0]), PublicCoin(u=np.array([1.0, 0.0])), inst) == 1

    def test_null_bit_is_fair_for_fixed_coin(self):
        inst = ProblemInstance(n=900, m=9, d=4)
        coin = draw_public_coin(derive_stream(8, "sign:coin"), 4)
        g = derive_stream(8, "sign:data").generator()
        scale = math.sqrt(inst.m / inst.n)
        reps = 100_000
        x = scale * g.standard_normal((reps, 4))
        bits = sum(local_test_sign(LocalObservation(x=row), coin, inst) for row in x)
        assert abs(bits / reps - 0.5) < 0.005

    def test_dimension_mismatch(self):
        inst = ProblemInstance(n=100, m=10, d=3)
        with pytest.raises(ValueError):
            local_test_sign(obs([1.0, 2.0]), PublicCoin(u=np.array([1.0, 0.0, 0.0])), inst)


class TestAggregateCounting:
    def test_all_ones_m100(self):
        t = TranscriptVector(bits=np.ones(100, dtype=np.int64))
        threshold = math.sqrt(100.0) * 3.6258
        assert aggregate_counting(t, threshold) == 1

    def test_alternating_balance(self):
        t = TranscriptVector(bits=np.tile([0, 1], 50).astype(np.int64))
        assert aggregate_counting(t, 1e-9) == 0

    def test_single_bit_below_threshold(self):
        t = TranscriptVector(bits=np.array([1], dtype=np.int64))
        assert aggregate_counting(t, 10.0) == 0

    def test_exact_boundary_fires(self):
        # |sum - m/2| = 2 with threshold exactly 2: >= comparison rejects
        t = TranscriptVector(bits=np.array([1, 1, 1, 1], dtype=np.int64))
        assert aggregate_counting(t, 2.0) == 1

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            aggregate_counting(TranscriptVector(bits=np.array([], dtype=np.int64)), 1.0)

    def test_nonpositive_threshold_rejected(self):
        t = TranscriptVector(bits=np.array([1, 0], dtype=np.int64))
        with pytest.raises(ValueError):
            aggregate_counting(t, 0.0)


class TestSingleMachine:
    def test_zero_observation(self):
        inst = ProblemInstance(n=100, m=1, d=4)
        assert single_machine_decision(obs([0.0] * 4), inst, Thresholds.for_level(0.05)) == 0

    def test_unit_norm_fires(self):
        # n=100, m=1, d=4: 100/2 - 2 = 48 >= 8.944
        inst = ProblemInstance(n=100, m=1, d=4)
        assert single_machine_decision(obs([1.0, 0.0, 0.0, 0.0]), inst, Thresholds.for_level(0.05)) == 1

    def test_null_level(self):
        inst = ProblemInstance(n=500, m=1, d=500)
        thr = Thresholds.for_level(0.05)
        g = derive_stream(15, "single:null").generator()
        scale = math.sqrt(inst.m / inst.n)
        reps = 100_000
        x = scale * g.standard_normal((reps, 500))
        stat = (inst.n / (math.sqrt(500.0) * inst.m)) * (x * x).sum(axis=1) - math.sqrt(500.0)
        freq = float((stat >= thr.kappa).mean())
        assert freq <= 0.05


class TestCalibration:
    def test_m50_exact(self):
        cal = calibrate_count_threshold(50, 0.05)
        assert cal.cutoff == 33
        assert cal.margin == 8.0
        assert cal.level == pytest.approx(0.032839137564268484, rel=1e-12)

    def test_m5000_exact(self):
        cal = calibrate_count_threshold(5000, 0.05)
        assert cal.margin == 70.0
        assert cal.level == pytest.approx(0.04931585810417191, rel=1e-12)

    def test_tiny_m_has_no_valid_cutoff(self):
        for m in (1, 2, 3, 4, 5):
            cal = calibrate_count_threshold(m, 0.05)
            assert cal.cutoff is None
            assert math.isinf(cal.margin)
            assert cal.level == 0.0

    @pytest.mark.parametrize("m", [6, 7, 10, 23, 50, 101, 200])
    def test_matches_exact_enumeration(self, m):
        """Independent oracle: enumerate the symmetric two-sided binomial
        tail with exact integer arithmetic and find the smallest cutoff."""
        alpha = 0.05
        best = None
        for c in range(m // 2 + 1, m + 1):
            upper = sum(math.comb(m, k) for k in range(c, m + 1))
            lower = sum(math.comb(m, k) for k in range(0, m - c + 1))
            if (upper + lower) / 2.0**m <= alpha:
                best = c
                break
        cal = calibrate_count_threshold(m, alpha)
        assert cal.cutoff == best
        if best is not None:
            assert cal.margin == pytest.approx(best - m / 2.0)
            exact = (
                sum(math.comb(m, k) for k in range(best, m + 1))
                + sum(math.comb(m, k) for k in range(0, m - best + 1))
            ) / 2.0**m
            assert cal.level == pytest.approx(exact, rel=1e-10)
            assert cal.level <= alpha
            # minimality: one step looser must overshoot alpha
            looser = (
                sum(math.comb(m, k) for k in range(best - 1, m + 1))
                + sum(math.comb(m, k) for k in range(0, m - best + 2))
            ) / 2.0**m
            if best - 1 > m / 2.0:
                assert looser > alpha


class TestCountThreshold:
    def test_theory_rule(self):
        inst = ProblemInstance(n=10_000, m=50, d=500)
        thr = Thresholds.for_level(0.05)
        assert count_threshold(TestKind.CHI_SQ_COUNT, inst) == pytest.approx(
            math.sqrt(50.0) * thr.kappa_bar
        )
        assert count_threshold(TestKind.SIGN_COUNT, inst, THEORY_RULE) == pytest.approx(
            math.sqrt(50.0) * thr.kappa_tilde
        )

    def test_calibrated_rule(self):
        inst = ProblemInstance(n=10_000, m=50, d=500)
        assert count_threshold(TestKind.CHI_SQ_COUNT, inst, CALIBRATED_RULE) == 8.0
        assert count_threshold(TestKind.SIGN_COUNT, inst, CALIBRATED_RULE) == 8.0

    def test_single_machine_rejected(self):
        inst = ProblemInstance(n=100, m=1, d=4)
        with pytest.raises(ValueError):
            count_threshold(TestKind.SINGLE_MACHINE, inst)

    def test_unknown_rule_rejected(self):
        inst = ProblemInstance(n=100, m=10, d=4)
        with pytest.raises(ValueError):
            count_threshold(TestKind.CHI_SQ_COUNT, inst, "bogus")


class TestSelectRegime:
    def test_paper_configurations(self):
        assert select_regime(ProblemInstance(n=10_000, m=50, d=500)) is TestKind.CHI_SQ_COUNT
        assert select_regime(ProblemInstance(n=10_000, m=5000, d=5)) is TestKind.SIGN_COUNT
        assert select_regime(ProblemInstance(n=100, m=1, d=10)) is TestKind.SINGLE_MACHINE

    def test_boundary_m_equals_d(self):
        assert select_regime(ProblemInstance(n=100, m=10, d=10)) is TestKind.CHI_SQ_COUNT


# Golden run: frozen transcript for fixed observations and streams. Any
# change here means previously published runs can no longer be replayed.
GOLDEN_X = [
    [0.79424455060207533, 0.64800354357527479, 0.90166087073063017],
    [-0.11829383904125952, -0.69364719868843672, -1.2949861666001388],
    [-0.61698833365583106, 0.95834706877418474, 0.59212166491761808],
    [-0.39195417040922098, 1.6923718404025976e-05, -1.8052723372289501],
]
GOLDEN_CHI_BITS = [1, 1, 1, 1]
GOLDEN_SIGN_BITS = [0, 0, 1, 0]


class TestRunProtocol:
    def golden_rows(self):
        return [obs(row) for row in GOLDEN_X]

    def test_golden_chi_transcript(self):
        inst = ProblemInstance(n=100, m=4, d=3)
        streams = [derive_stream(42, "golden:bit", j) for j in range(4)]
        run = run_protocol(TestKind.CHI_SQ_COUNT, self.golden_rows(), None, inst, streams=streams)
        assert run.transcript.bits.tolist() == GOLDEN_CHI_BITS
        assert run.decision == 0  # |4 - 2| = 2 < sqrt(4)*kappa_bar
        assert run.transcript.coin_used is False
        assert run.warnings == ()

    def test_golden_sign_transcript(self):
        inst = ProblemInstance(n=100, m=4, d=3)
        coin = draw_public_coin(derive_stream(42, "golden:coin"), 3)
        run = run_protocol(TestKind.SIGN_COUNT, self.golden_rows(), coin, inst)
        assert run.transcript.bits.tolist() == GOLDEN_SIGN_BITS
        assert run.decision == 0
        assert run.transcript.coin_used is True

    def test_chi_all_zero_m50_accepts(self):
        # all bits 0, |0 - 25| = 25 < sqrt(50)*3.6258 ~ 25.64
        inst = ProblemInstance(n=10_000, m=50, d=3)
        rows = [obs([0.0, 0.0, 0.0]) for _ in range(50)]
        streams = [derive_stream(1, "zero", j) for j in range(50)]
        run = run_protocol(TestKind.CHI_SQ_COUNT, rows, None, inst, streams=streams)
        assert run.transcript.bits.sum() == 0
        assert run.decision == 0

    def test_sign_all_aligned_rejects_for_m8(self):
        # all bits 1 and m/2 >= sqrt(m)*kappa_tilde once m >= 4*kappa_tilde^2 ~ 7.7
        u = np.array([0.5, -1.0, 0.25])
        inst = ProblemInstance(n=100, m=8, d=3)
        rows = [obs(u) for _ in range(8)]
        run = run_protocol(TestKind.SIGN_COUNT, rows, PublicCoin(u=u), inst)
        assert run.transcript.bits.tolist() == [1] * 8
        assert run.decision == 1

    def test_sign_all_aligned_m7_accepts(self):
        u = np.array([0.5, -1.0, 0.25])
        inst = ProblemInstance(n=100, m=7, d=3)
        run = run_protocol(TestKind.SIGN_COUNT, [obs(u)] * 7, PublicCoin(u=u), inst)
        assert run.decision == 0

    def test_missing_coin_is_an_error(self):
        inst = ProblemInstance(n=100, m=4, d=3)
        with pytest.raises(ValueError):
            run_protocol(TestKind.SIGN_COUNT, self.golden_rows(), None, inst)

    def test_superfluous_coin_warns(self):
        inst = ProblemInstance(n=100, m=4, d=3)
        coin = PublicCoin(u=np.array([1.0, 0.0, 0.0]))
        streams = [derive_stream(42, "golden:bit", j) for j in range(4)]
        run = run_protocol(TestKind.CHI_SQ_COUNT, self.golden_rows(), coin, inst, streams=streams)
        assert run.warnings, "expected a warning about the unused coin"
        assert run.transcript.coin_used is False
        assert run.transcript.bits.tolist() == GOLDEN_CHI_BITS

    def test_wrong_observation_count(self):
        inst = ProblemInstance(n=100, m=5, d=3)
        with pytest.raises(ValueError):
            run_protocol(
                TestKind.CHI_SQ_COUNT,
                self.golden_rows(),
                None,
                inst,
                streams=[derive_stream(1, "s", j) for j in range(5)],
            )

    def test_single_machine_run(self):
        inst = ProblemInstance(n=100, m=1, d=4)
        run = run_protocol(TestKind.SINGLE_MACHINE, [obs([1.0, 0.0, 0.0, 0.0])], None, inst)
        assert run.transcript.bits.tolist() == [1]
        assert run.decision == 1

    def test_coin_scale_invariance(self):
        inst = ProblemInstance(n=100, m=4, d=3)
        coin = draw_public_coin(derive_stream(42, "golden:coin"), 3)
        for c in (1e-6, 0.5, 3.0, 1e8):
            scaled = PublicCoin(u=c * coin.u)
            run = run_protocol(TestKind.SIGN_COUNT, self.golden_rows(), scaled, inst)
            assert run.transcript.bits.tolist() == GOLDEN_SIGN_BITS

    @given(perm=st.permutations(range(4)))
    @settings(max_examples=24, deadline=None)
    def test_permutation_invariance(self, perm):
        """Permuting machines permutes transcripts but the global bit is
        unchanged (counting aggregation is symmetric)."""
        inst = ProblemInstance(n=100, m=4, d=3)
        rows = self.golden_rows()
        streams = [derive_stream(42, "golden:bit", j) for j in range(4)]
        base = run_protocol(TestKind.CHI_SQ_COUNT, rows, None, inst, streams=streams)
        shuffled = run_protocol(
            TestKind.CHI_SQ_COUNT,
            [rows[i] for i in perm],
            None,
            inst,
            streams=[streams[i] for i in perm],
        )
        assert shuffled.decision == base.decision
        assert shuffled.transcript.bits.tolist() == [base.transcript.bits[i] for i in perm]

        coin = draw_public_coin(derive_stream(42, "golden:coin"), 3)
        s_base = run_protocol(TestKind.SIGN_COUNT, rows, coin, inst)
        s_shuf = run_protocol(TestKind.SIGN_COUNT, [rows[i] for i in perm], coin, inst)
        assert s_shuf.decision == s_base.decision


def test_transcript_vector_validates_bits():
    with pytest.raises(ValueError):
        TranscriptVector(bits=np.array([0, 2], dtype=np.int64))
    with pytest.raises(ValueError):
        TranscriptVector(bits=np.array([-1], dtype=np.int64))


def test_null_chi_bits_goodness_of_fit():
    """Under the null the local chi bits over a whole protocol run are
    i.i.d. fair coin flips; chi-square GoF on the pooled bit counts."""
    inst = ProblemInstance(n=1000, m=10, d=8)
    scale = math.sqrt(inst.m / inst.n)
    total = 0
    reps = 10_000
    g = derive_stream(77, "gof:data").generator()
    for r in range(reps):
        rows = [LocalObservation(x=scale * g.standard_normal(8)) for _ in range(10)]
        streams = [derive_stream(77, "gof:bits", r, j) for j in range(10)]
        run = run_protocol(TestKind.CHI_SQ_COUNT, rows, None, inst, streams=streams)
        total += int(run.transcript.bits.sum())
    n_bits = reps * 10
    chi2_stat = (total - n_bits / 2.0) ** 2 / (n_bits / 4.0)
    # 1 dof; significance 0.001 -> critical value 10.828
    assert chi2_stat < 10.828
