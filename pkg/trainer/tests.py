import tempfile
from pathlib import Path
from unittest import mock

import numpy as np
import torch
from django.test import SimpleTestCase

from channel.generators import ClusterParams, generate_dataset
from core.config import SystemConfig
from core.seeding import STREAM_INIT, torch_generator
from feedback.quantizer import split
from .checkpoints import CheckpointMismatchError, load_checkpoint
from .evaluation import EmptySplitError, evaluate, evaluate_baseline, per_sample_rates, summarize
from .pipeline import EndToEndPipeline
from .state import TrainingOptions, build_state
from .training import TrainingDivergedError, split_dataset, train


def tiny_config(**overrides):
    fields = dict(Nt=8, Nr=2, NRFt=2, NRFr=1, Ns=1, K=4, Kp=2, M=2, L=2, G=2, B=2, D=2, V=4,
                  rho=1.0, rho_p=1.0, sigma_n2=1.0, alpha=0.0, seed=0)
    fields.update(overrides)
    return SystemConfig(**fields)


def tiny_dataset(config, n=30):
    return torch.from_numpy(generate_dataset(config, ClusterParams(), n))


class SplitTests(SimpleTestCase):
    def test_sizes_and_disjointness(self):
        H = torch.arange(10)
        splits = split_dataset(H, seed=4)
        self.assertEqual((len(splits.train), len(splits.validation), len(splits.test)), (6, 2, 2))
        together = torch.cat([splits.train, splits.validation, splits.test]).tolist()
        self.assertEqual(sorted(together), list(range(10)))

    def test_seeded(self):
        self.assertTrue(torch.equal(split_dataset(torch.arange(20), 1).test, split_dataset(torch.arange(20), 1).test))


class PipelineTests(SimpleTestCase):
    def test_loss_decomposition(self):
        config = tiny_config(alpha=0.2)
        pipeline = EndToEndPipeline(config)
        output = pipeline(tiny_dataset(config, 4), generator=torch.Generator().manual_seed(0))
        expected = 0.2 * output.vq_loss - output.rate
        self.assertAlmostEqual(output.loss.item(), expected.item(), places=12)

    def test_parameter_groups(self):
        pipeline = EndToEndPipeline(tiny_config(), architecture='mlp')
        self.assertEqual(set(pipeline.parameter_groups()), {'pilot', 'codebook', 'hb_mlp', 'hc_mlp'})

    def test_unknown_architecture(self):
        with self.assertRaises(ValueError):
            EndToEndPipeline(tiny_config(), architecture='cnn')


class TrainTests(SimpleTestCase):
    def setUp(self):
        self.config = tiny_config()
        self.dataset = tiny_dataset(self.config)

    def test_smoke_training_improves_validation_rate(self):
        options = TrainingOptions(epochs=50, batch_size=6, lr=1e-2, freeze_codebook=True)
        validation = split_dataset(self.dataset, self.config.seed).validation.to(torch.complex128)
        initial, _ = summarize(per_sample_rates(build_state(self.config, options).pipeline, validation, 1.0))
        state, history = train(self.config, self.dataset, options=options)
        self.assertEqual(len(history), 50)
        self.assertGreater(history[-1]['val_se'], initial)
        self.assertGreaterEqual(state.best_val_se, history[-1]['val_se'])

    def test_frozen_codebook_does_not_move(self):
        options = TrainingOptions(epochs=2, batch_size=6, freeze_codebook=True)
        initial, _ = train(self.config, self.dataset, options=options.replace(epochs=0))
        state, _ = train(self.config, self.dataset, options=options)
        self.assertTrue(torch.equal(state.pipeline.codebook.embedding.detach(),
                                    initial.pipeline.codebook.embedding.detach()))

    def test_identical_seeds_identical_history(self):
        options = TrainingOptions(epochs=3, batch_size=6)
        _, first = train(self.config, self.dataset, options=options)
        _, second = train(self.config, self.dataset, options=options)
        self.assertEqual(first, second)

    def test_zero_epochs_returns_initialisation(self):
        state, history = train(self.config, self.dataset, epochs=0)
        fresh = build_state(self.config)
        self.assertEqual(history, [])
        for (name, a), b in zip(state.pipeline.named_parameters(), fresh.pipeline.parameters()):
            if name != 'codebook.embedding':
                self.assertTrue(torch.equal(a, b), name)

    def test_codebook_starts_from_training_segments(self):
        options = TrainingOptions(epochs=0, batch_size=6)
        state, _ = train(self.config, self.dataset, options=options)
        H_train = split_dataset(self.dataset, self.config.seed).train.to(torch.complex128)
        generator = torch_generator(self.config.seed, STREAM_INIT, 6)
        picks = torch.randperm(len(H_train), generator=generator)[:options.batch_size]
        with torch.no_grad():
            Y = state.pipeline.received(H_train[picks], generator=generator).Y
        segments = split(Y, self.config.V)
        for codeword in state.pipeline.codebook.embedding.detach():
            distance = (segments - codeword).abs().sum(dim=-1).min().item()
            self.assertEqual(distance, 0.0)
        self.assertFalse(torch.equal(state.pipeline.codebook.embedding.detach(),
                                     build_state(self.config).pipeline.codebook.embedding.detach()))

    def test_recorded_loss_decomposes(self):
        config = tiny_config(alpha=0.2)
        _, history = train(config, tiny_dataset(config), epochs=3, batch_size=6)
        for row in history:
            self.assertAlmostEqual(row['train_loss'], 0.2 * row['train_vq_loss'] - row['train_rate'], delta=1e-6)

    def test_constraints_hold_after_every_step(self):
        options = TrainingOptions(epochs=2, batch_size=6, lr=0.05, check_constraints=True)
        train(self.config, self.dataset, options=options)

    def test_divergence_guard(self):
        with mock.patch('trainer.pipeline.total_loss', side_effect=lambda vq, rate, alpha: rate * float('nan')):
            with self.assertRaises(TrainingDivergedError):
                train(self.config, self.dataset, epochs=1, batch_size=6)

    def test_dataset_too_small(self):
        with self.assertRaises(ValueError):
            train(self.config, self.dataset[:2], epochs=1)


class CheckpointTests(SimpleTestCase):
    def setUp(self):
        self.config = tiny_config(alpha=0.2)
        self.dataset = tiny_dataset(self.config)
        self.options = TrainingOptions(epochs=4, batch_size=6, lr=5e-3)
        self.directory = tempfile.TemporaryDirectory()
        self.path = Path(self.directory.name) / 'run.pt'

    def tearDown(self):
        self.directory.cleanup()

    def test_resume_follows_uninterrupted_trajectory(self):
        _, uninterrupted = train(self.config, self.dataset, options=self.options)
        train(self.config, self.dataset, options=self.options.replace(epochs=2), checkpoint_path=self.path)
        state = load_checkpoint(self.path, self.config)
        self.assertEqual(state.epoch, 2)
        _, resumed = train(self.config, self.dataset, epochs=4, state=state)
        self.assertEqual(len(resumed), 4)
        for a, b in zip(uninterrupted, resumed):
            for key in a:
                self.assertAlmostEqual(a[key], b[key], places=10)

    def test_round_trip_restores_parameters(self):
        state, _ = train(self.config, self.dataset, options=self.options.replace(epochs=1), checkpoint_path=self.path)
        restored = load_checkpoint(self.path)
        for a, b in zip(state.pipeline.state_dict().values(), restored.pipeline.state_dict().values()):
            self.assertTrue(torch.equal(a, b))
        self.assertEqual(restored.best_val_se, state.best_val_se)

    def test_config_hash_mismatch(self):
        train(self.config, self.dataset, options=self.options.replace(epochs=1), checkpoint_path=self.path)
        with self.assertRaises(CheckpointMismatchError):
            load_checkpoint(self.path, self.config.replace(seed=99))


class EvaluateTests(SimpleTestCase):
    def setUp(self):
        self.config = tiny_config()
        self.state = build_state(self.config)
        self.H = tiny_dataset(self.config, 8).to(torch.complex128)

    def test_deterministic(self):
        first = evaluate(self.state, self.H, [1.0, 10.0])
        second = evaluate(self.state, self.H, [1.0, 10.0])
        self.assertTrue(first.equals(second))
        self.assertEqual(list(first.columns), ['method', 'axis_value', 'mean_se', 'stderr', 'n'])
        self.assertEqual(first['n'].tolist(), [8, 8])

    def test_batch_size_does_not_matter(self):
        np.testing.assert_allclose(per_sample_rates(self.state.pipeline, self.H, 1.0, batch_size=3),
                                   per_sample_rates(self.state.pipeline, self.H, 1.0), rtol=1e-12)

    def test_monotone_in_power(self):
        table = evaluate(self.state, self.H, [0.1, 1.0, 10.0, 100.0])
        self.assertTrue(table['mean_se'].is_monotonic_increasing)

    def test_fully_digital_dominates(self):
        rhos = [0.1, 1.0, 10.0]
        learned = evaluate(self.state, self.H, rhos)
        digital = evaluate_baseline('fully_digital', self.H, self.config, rhos)
        self.assertTrue(bool((digital['mean_se'].to_numpy() >= learned['mean_se'].to_numpy() - 1e-9).all()))

    def test_mo_baselines_run(self):
        for method in ('mo_pcsi', 'mo_omp'):
            table = evaluate_baseline(method, self.H[:2], self.config, [1.0], axis_values=[0.0],
                                      pilot=self.state.pipeline.pilot, n_paths=2, mo_iters=20)
            self.assertEqual(table['method'].tolist(), [method])
            self.assertEqual(table['axis_value'].tolist(), [0.0])

    def test_omp_baseline_requires_pilots(self):
        with self.assertRaises(ValueError):
            evaluate_baseline('mo_omp', self.H[:1], self.config, [1.0], n_paths=2, mo_iters=5)

    def test_empty_split(self):
        with self.assertRaises(EmptySplitError):
            evaluate(self.state, self.H[:0], [1.0])

    def test_standard_error(self):
        mean, stderr = summarize([1.0, 2.0, 3.0])
        self.assertAlmostEqual(mean, 2.0)
        self.assertAlmostEqual(stderr, 1.0 / np.sqrt(3))
