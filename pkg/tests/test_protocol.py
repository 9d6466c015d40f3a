import numpy as np
import pytest

from assistlearn.models import Dataset, ModelSpec, loss
from assistlearn.protocol import (
    AssistConfig,
    Checkpoint,
    DivergenceError,
    TrajectoryPacket,
    assist_round,
    checkpoint_indices,
    local_train,
    run_assist_sgd,
    select_best,
)

from conftest import make_two_gaussian_data
from assistlearn.data import split_by_class_fraction


QUAD_L = ModelSpec(kind="quadratic", input_dim=2, quadratic_center=(-1.0, -1.0))
QUAD_P = ModelSpec(kind="quadratic", input_dim=2, quadratic_center=(1.0, -1.25))
EMPTY = Dataset.empty(2)


def fresh_rng(seed=0):
    return np.random.default_rng(seed)


class TestCheckpointIndices:
    def test_period_four(self):
        assert checkpoint_indices(10, 4) == [0, 4, 8, 10]

    def test_zero_iters(self):
        assert checkpoint_indices(0, 5) == [0]

    def test_exact_multiple(self):
        assert checkpoint_indices(8, 4) == [0, 4, 8]


class TestPacketValidation:
    def test_requires_checkpoints(self):
        with pytest.raises(ValueError):
            TrajectoryPacket(party="learner", round=1, checkpoints=())

    def test_requires_index_zero(self):
        cp = Checkpoint(1, np.zeros(2), 0.0)
        with pytest.raises(ValueError, match="iteration-0"):
            TrajectoryPacket(party="learner", round=1, checkpoints=(cp,))

    def test_requires_strictly_increasing(self):
        cps = (Checkpoint(0, np.zeros(2), 0.0), Checkpoint(0, np.zeros(2), 0.0))
        with pytest.raises(ValueError, match="increasing"):
            TrajectoryPacket(party="learner", round=1, checkpoints=cps)

    def test_unknown_party(self):
        with pytest.raises(ValueError, match="party"):
            TrajectoryPacket(party="eavesdropper", round=1,
                             checkpoints=(Checkpoint(0, np.zeros(2), 0.0),))


class TestLocalTrain:
    def test_zero_iters_single_checkpoint(self):
        packet = local_train(QUAD_L, np.zeros(2), EMPTY, 0, 0.5, None, 5, fresh_rng())
        assert len(packet.checkpoints) == 1
        assert packet.checkpoints[0].iter_index == 0

    def test_one_full_batch_step_closed_form(self):
        eta = 0.3
        packet = local_train(QUAD_L, np.zeros(2), EMPTY, 1, eta, None, 1, fresh_rng())
        center = np.array([-1.0, -1.0])
        expected = np.zeros(2) - eta * (np.zeros(2) - center)
        np.testing.assert_allclose(packet.checkpoints[-1].params, expected)

    def test_checkpoint_indices_follow_rule(self):
        packet = local_train(QUAD_L, np.zeros(2), EMPTY, 10, 0.1, None, 4, fresh_rng())
        assert [cp.iter_index for cp in packet.checkpoints] == [0, 4, 8, 10]

    def test_checkpoint_loss_is_full_dataset_sum_under_minibatch(self):
        spec = ModelSpec("logistic", 2, 2)
        data = make_two_gaussian_data(25, seed=3)
        packet = local_train(spec, np.zeros(6), data, 12, 0.2, 8, 6, fresh_rng(4))
        for cp in packet.checkpoints:
            assert cp.local_loss == loss(spec, cp.params, data, aggregate="sum")

    def test_divergence_reports_iteration(self):
        spec = ModelSpec("quadratic", 1, quadratic_center=(1.0,))
        with np.errstate(over="ignore"), pytest.raises(DivergenceError) as err:
            local_train(spec, np.zeros(1), Dataset.empty(1), 2000, 1e160, None, 100, fresh_rng())
        assert err.value.iteration >= 1

    def test_minibatch_covers_epoch_without_replacement(self):
        # one epoch of batches must touch each record exactly once
        from assistlearn.protocol import _batch_stream

        stream = _batch_stream(10, 3, fresh_rng(9))
        seen = np.concatenate([next(stream) for _ in range(4)])
        np.testing.assert_array_equal(np.sort(seen), np.arange(10))


class TestSelectBest:
    def make_packet(self, losses):
        cps = tuple(
            Checkpoint(i, np.full(2, float(i)), value) for i, value in enumerate(losses)
        )
        return TrajectoryPacket(party="learner", round=1, checkpoints=cps)

    def test_single_checkpoint(self):
        packet = self.make_packet([3.0])
        best, total = select_best(packet, QUAD_P, EMPTY)
        assert best.iter_index == 0

    def test_enumerated_sums(self):
        # own losses at params [i, i] under the provider quadratic center
        packet = self.make_packet([3.0, 1.0, 2.0])
        own = [loss(QUAD_P, np.full(2, float(i)), EMPTY) for i in range(3)]
        expected = int(np.argmin([3.0 + own[0], 1.0 + own[1], 2.0 + own[2]]))
        best, total = select_best(packet, QUAD_P, EMPTY)
        assert best.iter_index == expected
        assert total == pytest.approx([3.0, 1.0, 2.0][expected] + own[expected])

    def test_tie_breaks_to_smallest_index(self):
        spec = ModelSpec("quadratic", 2, quadratic_center=(0.0, 0.0))
        cps = (
            Checkpoint(0, np.array([1.0, 0.0]), 5.0),
            Checkpoint(3, np.array([-1.0, 0.0]), 5.0),  # same own loss, same transmitted
        )
        packet = TrajectoryPacket(party="provider", round=1, checkpoints=cps)
        best, _ = select_best(packet, spec, EMPTY)
        assert best.iter_index == 0


class TestAssistRound:
    def run_round(self, config, theta=np.zeros(2), round_index=1):
        return assist_round(
            theta, config, round_index, QUAD_L, EMPTY, QUAD_P, EMPTY,
            fresh_rng(1), fresh_rng(2),
        )

    def test_identity_round_with_zero_iters(self):
        config = AssistConfig(rounds=1, total_local_iters=0, eta=0.5, split=(0, 0))
        theta, record, _ = self.run_round(config)
        np.testing.assert_array_equal(theta, np.zeros(2))
        assert record.global_loss_after == record.global_loss_before
        assert record.selected_iter_index == 0

    def test_full_batch_round_decreases_global_loss(self):
        config = AssistConfig(
            rounds=1, total_local_iters=20, eta=0.3, sample_period=1, split=(10, 10)
        )
        theta, record, _ = self.run_round(config)
        assert record.global_loss_after < record.global_loss_before

    def test_chain_inequality(self):
        config = AssistConfig(
            rounds=1, total_local_iters=20, eta=0.4, sample_period=2, split=(10, 10)
        )
        _, record, _ = self.run_round(config)
        assert record.global_loss_after <= record.provider_init_global_loss <= record.global_loss_before


class TestRunAssistSgd:
    def test_single_round_matches_assist_round(self):
        config = AssistConfig(rounds=1, total_local_iters=20, eta=0.3,
                              sample_period=5, split=(10, 10), seed=7)
        result = run_assist_sgd(config, QUAD_L, EMPTY, EMPTY, provider_spec=QUAD_P)
        rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(7).spawn(2)]
        theta, record, _ = assist_round(
            np.zeros(2), config, 1, QUAD_L, EMPTY, QUAD_P, EMPTY, rngs[0], rngs[1]
        )
        np.testing.assert_array_equal(result.best_params, theta)

    def test_packet_completeness_invariant(self):
        config = AssistConfig(rounds=3, total_local_iters=14, eta=0.2,
                              sample_period=3, split=(7, 7), seed=1)
        result = run_assist_sgd(
            config, QUAD_L, EMPTY, EMPTY, provider_spec=QUAD_P, keep_packets=True
        )
        for learner_packet, provider_packet in result.packets:
            for packet, iters in ((learner_packet, 7), (provider_packet, 7)):
                indices = [cp.iter_index for cp in packet.checkpoints]
                assert indices[0] == 0
                assert indices[-1] == iters

    def test_full_batch_monotonicity_on_logistic_task(self):
        spec = ModelSpec("logistic", 2, 2)
        data = make_two_gaussian_data(50, seed=21)
        learner, provider = split_by_class_fraction(data, {0: 0.9, 1: 0.1}, seed=2)
        config = AssistConfig(rounds=6, total_local_iters=100, eta=0.2,
                              sample_period=10, batch_size=None, seed=3)
        result = run_assist_sgd(config, spec, learner, provider)
        losses = [result.records[0].global_loss_before] + [
            rec.global_loss_after for rec in result.records
        ]
        diffs = np.diff(losses)
        assert np.all(diffs <= 1e-12)

    def test_minibatch_runs_and_records(self):
        spec = ModelSpec("logistic", 2, 2)
        data = make_two_gaussian_data(30, seed=5)
        learner, provider = split_by_class_fraction(data, {0: 0.8, 1: 0.2}, seed=2)
        config = AssistConfig(rounds=2, total_local_iters=40, eta=0.1,
                              sample_period=10, batch_size=8, seed=3)
        result = run_assist_sgd(config, spec, learner, provider)
        assert len(result.records) == 2
        assert len(result.metrics) == 3  # round 0 included

    def test_deterministic_for_fixed_seed(self):
        spec = ModelSpec("logistic", 2, 2)
        data = make_two_gaussian_data(30, seed=6)
        learner, provider = split_by_class_fraction(data, {0: 0.7, 1: 0.3}, seed=1)
        config = AssistConfig(rounds=2, total_local_iters=30, eta=0.1,
                              sample_period=6, batch_size=10, seed=11)
        first = run_assist_sgd(config, spec, learner, provider)
        second = run_assist_sgd(config, spec, learner, provider)
        np.testing.assert_array_equal(first.best_params, second.best_params)
        assert [r.global_loss_after for r in first.records] == [
            r.global_loss_after for r in second.records
        ]

    def test_best_over_rounds_prefers_min_global_loss(self):
        config = AssistConfig(rounds=5, total_local_iters=8, eta=0.5,
                              sample_period=1, split=(4, 4), seed=0)
        result = run_assist_sgd(config, QUAD_L, EMPTY, EMPTY, provider_spec=QUAD_P)
        best_loss = min(rec.global_loss_after for rec in result.records)
        chosen = min(
            (rec for rec in result.records), key=lambda rec: (rec.global_loss_after, rec.round)
        )
        np.testing.assert_array_equal(result.best_params, chosen.params)
        assert chosen.global_loss_after == best_loss

    def test_packets_are_the_only_exchange(self):
        # the transmitted object exposes checkpoints only: no dataset fields
        config = AssistConfig(rounds=1, total_local_iters=4, eta=0.2,
                              sample_period=2, split=(2, 2), seed=0)
        result = run_assist_sgd(
            config, QUAD_L, EMPTY, EMPTY, provider_spec=QUAD_P, keep_packets=True
        )
        packet = result.packets[0][0]
        assert set(packet.__dataclass_fields__) == {"party", "round", "checkpoints"}
        for cp in packet.checkpoints:
            assert set(cp.__dataclass_fields__) == {"iter_index", "params", "local_loss"}


class TestQuadraticPairTrajectory:
    """The decaying-rate exchange on the two-center quadratic approaches the
    pair midpoint; ten rounds land near 0.20 away and the gap keeps
    shrinking as rounds grow."""

    def run_to(self, rounds):
        config = AssistConfig(rounds=rounds, total_local_iters=20, eta=1.0,
                              eta_decay=0.9, sample_period=1, batch_size=None,
                              split=(10, 10), seed=0)
        result = run_assist_sgd(config, QUAD_L, EMPTY, EMPTY, provider_spec=QUAD_P)
        oracle = np.array([0.0, -1.125])
        return [float(np.linalg.norm(rec.params - oracle)) for rec in result.records]

    def test_distance_to_midpoint_decreases_every_round(self):
        distances = self.run_to(10)
        assert all(b < a for a, b in zip(distances, distances[1:]))
        assert distances[-1] == pytest.approx(0.2018, abs=5e-4)

    def test_converges_with_more_rounds(self):
        assert self.run_to(30)[-1] <= 0.03
        assert self.run_to(50)[-1] <= 0.005


class TestEtaSchedule:
    def test_constant_by_default(self):
        config = AssistConfig(rounds=3, total_local_iters=10, eta=0.25)
        assert config.eta_at(1) == config.eta_at(3) == 0.25

    def test_decay_is_one_based(self):
        config = AssistConfig(rounds=3, total_local_iters=10, eta=1.0, eta_decay=0.9)
        assert config.eta_at(1) == pytest.approx(0.9)
        assert config.eta_at(10) == pytest.approx(0.9**10)
