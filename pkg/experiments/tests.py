import io
import json
import tempfile
from pathlib import Path
from unittest import mock

import pandas as pd
import torch
from django.conf import settings
from django.test import TestCase, override_settings
from rest_framework import status
from rest_framework.test import APIClient

from core.config import SystemConfig
from feedback.presets import FEEDBACK_PRESETS
from pilot.network import seeded_pilot_noise, transmit_pilots
from trainer.checkpoints import load_checkpoint
from trainer.evaluation import RESULT_COLUMNS, eval_noise_seeds, evaluate_baseline
from .cli import EXIT_BAD_CONFIG, EXIT_CONSTRAINT, EXIT_GENERIC, EXIT_MISSING_FILE, EXIT_OK, run_subcommand
from .config import load_experiment_config
from .models import SweepResult, TrainingRun
from .runs import held_out, load_channels
from .serializers import ExperimentConfigSerializer
from .sweeps import FEEDBACK_AXIS, POWER_AXIS, SweepSpec, SweepSpecError, run_sweep

# 2*Kp*NRFr*L = 256 pilot entries, so every feedback preset has an integral codeword length.
SYSTEM = dict(Nt=8, Nr=2, NRFt=2, NRFr=1, Ns=1, K=8, Kp=8, M=1, L=16, G=2, B=256, D=16, V=4,
              rho=1.0, rho_p=1.0, sigma_n2=1.0, seed=0)


class ExperimentConfigSerializerTests(TestCase):
    def test_empty_file_gives_defaults(self):
        serializer = ExperimentConfigSerializer(data={})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        experiment = serializer.save()
        self.assertEqual(experiment.system, SystemConfig())
        self.assertEqual(experiment.num_samples, 4000)
        self.assertEqual(experiment.training.architecture, 'gnn')

    def test_sections_are_read(self):
        data = {
            'system': SYSTEM,
            'channel': {'num_clusters': 2},
            'dataset': {'num_samples': 12},
            'training': {'epochs': 3, 'architecture': 'mlp', 'beta': 0.5},
        }
        serializer = ExperimentConfigSerializer(data=data)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        experiment = serializer.save()
        self.assertEqual(experiment.system.Kp, 8)
        self.assertEqual(experiment.system.beta, 0.5)
        self.assertEqual(experiment.channel.num_clusters, 2)
        self.assertEqual(experiment.num_samples, 12)
        self.assertEqual(experiment.training.epochs, 3)
        self.assertEqual(experiment.training.architecture, 'mlp')

    def test_shipped_configs_validate(self):
        for name in ('desk.json', 'reference.json'):
            experiment = load_experiment_config(settings.BASE_DIR / 'configs' / name)
            self.assertGreater(experiment.system.Nr, experiment.system.NRFr)
        self.assertEqual(load_experiment_config(settings.BASE_DIR / 'configs' / 'desk.json').system.B, 256)

    def test_dimension_error_is_reported(self):
        serializer = ExperimentConfigSerializer(data={'system': {**SYSTEM, 'K': 9}})
        self.assertFalse(serializer.is_valid())
        self.assertIn('system', serializer.errors)

    def test_bad_channel_section(self):
        serializer = ExperimentConfigSerializer(data={'channel': {'num_clusters': 0}})
        self.assertFalse(serializer.is_valid())
        self.assertIn('channel', serializer.errors)

    def test_unknown_architecture(self):
        serializer = ExperimentConfigSerializer(data={'training': {'architecture': 'cnn'}})
        self.assertFalse(serializer.is_valid())


class SweepSpecTests(TestCase):
    def test_every_preset_is_accepted(self):
        config = SystemConfig(**SYSTEM)
        SweepSpec(axis=FEEDBACK_AXIS, values=tuple(FEEDBACK_PRESETS), methods=('gnn',)).validate(config)

    def test_unknown_budget(self):
        with self.assertRaises(SweepSpecError):
            SweepSpec(axis=FEEDBACK_AXIS, values=(100,), methods=('gnn',)).validate(SystemConfig(**SYSTEM))

    def test_empty_values_and_methods(self):
        config = SystemConfig(**SYSTEM)
        with self.assertRaises(SweepSpecError):
            SweepSpec(axis=FEEDBACK_AXIS, values=(), methods=('gnn',)).validate(config)
        with self.assertRaises(SweepSpecError):
            SweepSpec(axis=FEEDBACK_AXIS, values=(64,), methods=()).validate(config)

    def test_omp_needs_a_learned_method(self):
        with self.assertRaises(SweepSpecError):
            SweepSpec(axis=POWER_AXIS, values=(0.0,), methods=('mo_omp',)).validate(SystemConfig(**SYSTEM))

    def test_unknown_axis(self):
        with self.assertRaises(SweepSpecError):
            SweepSpec(axis='snr', values=(1,), methods=('gnn',)).validate(SystemConfig(**SYSTEM))


class ExperimentTestCase(TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.addCleanup(self.directory.cleanup)
        self.root = Path(self.directory.name)
        storage = override_settings(DATASET_CACHE_DIR=self.root / 'data', RESULTS_DIR=self.root / 'results')
        storage.enable()
        self.addCleanup(storage.disable)

        self.config_path = self.root / 'experiment.json'
        self.config_path.write_text(json.dumps({
            'system': SYSTEM,
            'dataset': {'num_samples': 10},
            'training': {'epochs': 1, 'batch_size': 6, 'lr': 0.01},
        }))
        self.dataset = self.root / 'channels.hbfc'

    def hbf(self, *argv):
        self.stderr = io.StringIO()
        return run_subcommand([str(arg) for arg in argv], stdout=io.StringIO(), stderr=self.stderr)

    def generate(self):
        self.assertEqual(self.hbf('gen-data', '--config', self.config_path, '--output', self.dataset), EXIT_OK)


class RunSubcommandTests(ExperimentTestCase):
    def test_gen_data_writes_dataset(self):
        self.generate()
        self.assertTrue(self.dataset.exists())

    def test_gen_data_defaults_to_cache(self):
        self.assertEqual(self.hbf('gen-data', '--config', self.config_path), EXIT_OK)
        self.assertEqual(len(list((self.root / 'data').glob('*.hbfc'))), 1)

    def test_unknown_subcommand(self):
        self.assertEqual(self.hbf('fit', '--config', self.config_path), EXIT_GENERIC)

    def test_missing_config_file(self):
        self.assertEqual(self.hbf('gen-data', '--config', self.root / 'absent.json'), EXIT_MISSING_FILE)
        self.assertEqual(self.stderr.getvalue().count('\n'), 1)
        self.assertTrue(self.stderr.getvalue().startswith('error: '))

    def test_bad_config_override(self):
        self.assertEqual(self.hbf('gen-data', '--config', self.config_path, '--K', 9), EXIT_BAD_CONFIG)
        self.assertEqual(self.stderr.getvalue().count('\n'), 1)

    def test_malformed_config_file(self):
        self.config_path.write_text('{"system": ')
        self.assertEqual(self.hbf('gen-data', '--config', self.config_path), EXIT_BAD_CONFIG)

    def test_train_without_dataset(self):
        self.assertEqual(self.hbf('train', '--config', self.config_path, '--dataset', self.dataset),
                         EXIT_MISSING_FILE)

    def test_train_writes_checkpoint_and_history(self):
        self.generate()
        output = self.root / 'run'
        code = self.hbf('train', '--config', self.config_path, '--dataset', self.dataset, '--output', output,
                        '--epochs', 2)
        self.assertEqual(code, EXIT_OK)
        self.assertTrue((output / 'checkpoint.pt').exists())
        history = pd.read_csv(output / 'history.csv')
        self.assertEqual(list(history['epoch']), [1, 2])

        run = TrainingRun.objects.get()
        self.assertEqual(run.status, TrainingRun.StatusChoices.COMPLETED)
        self.assertEqual(run.epochs, 2)
        self.assertEqual(run.feedback_bits, 256)
        self.assertIsNotNone(run.best_val_se)

    def test_resume_continues_the_same_checkpoint(self):
        self.generate()
        output = self.root / 'run'
        self.hbf('train', '--config', self.config_path, '--dataset', self.dataset, '--output', output)
        code = self.hbf('train', '--config', self.config_path, '--dataset', self.dataset,
                        '--resume', output / 'checkpoint.pt', '--epochs', 3)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(list(pd.read_csv(output / 'history.csv')['epoch']), [1, 2, 3])

    def test_resume_with_other_config_is_refused(self):
        self.generate()
        output = self.root / 'run'
        self.hbf('train', '--config', self.config_path, '--dataset', self.dataset, '--output', output)
        code = self.hbf('train', '--config', self.config_path, '--dataset', self.dataset,
                        '--resume', output / 'checkpoint.pt', '--alpha', 0.5)
        self.assertEqual(code, EXIT_CONSTRAINT)

    def test_eval_with_untrained_checkpoint(self):
        self.generate()
        output = self.root / 'run'
        self.hbf('train', '--config', self.config_path, '--dataset', self.dataset, '--output', output,
                 '--epochs', 0)
        csv = self.root / 'eval.csv'
        code = self.hbf('eval', '--config', self.config_path, '--dataset', self.dataset,
                        '--checkpoint', output / 'checkpoint.pt', '--powers-dbm', 0, 10, '--output', csv)
        self.assertEqual(code, EXIT_OK)
        table = pd.read_csv(csv)
        self.assertEqual(list(table.columns), RESULT_COLUMNS)
        self.assertEqual(list(table['axis_value']), [0.0, 10.0])
        self.assertTrue((table['n'] == 2).all())
        self.assertEqual(SweepResult.objects.filter(run=TrainingRun.objects.get()).count(), 2)

    def test_eval_is_reproducible(self):
        self.generate()
        first, second = self.root / 'a.csv', self.root / 'b.csv'
        for path in (first, second):
            self.hbf('eval', '--config', self.config_path, '--dataset', self.dataset,
                     '--methods', 'gnn', 'fully_digital', '--output', path)
        self.assertEqual(first.read_text(), second.read_text())

    def test_power_sweep_of_fully_digital_is_monotone(self):
        self.generate()
        csv = self.root / 'power.csv'
        code = self.hbf('sweep', '--config', self.config_path, '--dataset', self.dataset,
                        '--axis', 'transmit_power_dbm', '--values', -10, 0, 10, 20,
                        '--methods', 'fully_digital', '--output', csv)
        self.assertEqual(code, EXIT_OK)
        values = pd.read_csv(csv)['mean_se'].tolist()
        self.assertEqual(len(values), 4)
        self.assertTrue(all(a <= b for a, b in zip(values, values[1:])))

    def test_omp_baseline_senses_with_trained_pilots(self):
        self.generate()
        experiment = load_experiment_config(self.config_path)
        config = experiment.system
        spec = SweepSpec(axis=POWER_AXIS, values=(0.0,), methods=('gnn', 'mo_omp'), n_paths=2, mo_iters=5)
        with mock.patch('experiments.sweeps.evaluate_baseline', wraps=evaluate_baseline) as baseline:
            table = run_sweep(experiment, spec, self.dataset, self.root / 'sweep')
        self.assertEqual(table['method'].tolist(), ['gnn', 'mo_omp'])

        trained = load_checkpoint(self.root / 'sweep' / 'gnn.pt', config)
        trained.restore_best()
        H = held_out(experiment, load_channels(experiment, self.dataset)).to(torch.complex128)
        noise = seeded_pilot_noise(eval_noise_seeds(config, len(H)), config)
        with torch.no_grad():
            sensed = transmit_pilots(H, baseline.call_args.kwargs['pilot'], config, noise=noise).Y
            learned = trained.pipeline.pilot(H, noise=noise).Y
        self.assertTrue(torch.equal(sensed, learned))

    def test_feedback_sweep_gives_one_row_per_budget(self):
        self.generate()
        csv = self.root / 'feedback.csv'
        budgets = sorted(FEEDBACK_PRESETS)
        code = self.hbf('sweep', '--config', self.config_path, '--dataset', self.dataset,
                        '--axis', 'feedback_bits', '--values', *budgets,
                        '--methods', 'gnn', 'fully_digital', '--output', csv)
        self.assertEqual(code, EXIT_OK)
        table = pd.read_csv(csv)
        for method in ('gnn', 'fully_digital'):
            rows = table[table['method'] == method]
            self.assertEqual(len(rows), 9)
            self.assertEqual(list(rows['axis_value']), budgets)
        self.assertEqual(SweepResult.objects.filter(axis=FEEDBACK_AXIS).count(), 18)

    def test_feedback_sweep_rejects_non_preset_budget(self):
        self.generate()
        code = self.hbf('sweep', '--config', self.config_path, '--dataset', self.dataset,
                        '--axis', 'feedback_bits', '--values', 64, 100, '--methods', 'fully_digital')
        self.assertEqual(code, EXIT_BAD_CONFIG)

    def test_plot_renders_vector_figure(self):
        self.generate()
        csv = self.root / 'power.csv'
        self.hbf('sweep', '--config', self.config_path, '--dataset', self.dataset,
                 '--axis', 'transmit_power_dbm', '--values', 0, 10, '--methods', 'fully_digital', '--output', csv)
        self.assertEqual(self.hbf('plot', '--input', csv), EXIT_OK)
        self.assertTrue(csv.with_suffix('.svg').read_text().lstrip().startswith('<?xml'))

    def test_plot_accepts_config_flag(self):
        csv = self.root / 'digital.csv'
        pd.DataFrame([['fully_digital', 0.0, 1.5, 0.1, 2]], columns=RESULT_COLUMNS).to_csv(csv, index=False)
        output = self.root / 'digital.pdf'
        code = self.hbf('plot', '--config', self.config_path, '--input', csv, '--output', output)
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(output.exists())

    def test_plot_on_empty_csv(self):
        csv = self.root / 'empty.csv'
        csv.write_text(','.join(RESULT_COLUMNS) + '\n')
        self.assertNotEqual(self.hbf('plot', '--input', csv), EXIT_OK)
        csv.write_text('')
        self.assertNotEqual(self.hbf('plot', '--input', csv), EXIT_OK)


class ResultsApiTests(ExperimentTestCase):
    def setUp(self):
        super().setUp()
        self.client = APIClient()
        self.generate()
        self.hbf('train', '--config', self.config_path, '--dataset', self.dataset, '--output', self.root / 'run')
        self.hbf('sweep', '--config', self.config_path, '--dataset', self.dataset,
                 '--axis', 'transmit_power_dbm', '--values', 10, 0, '--methods', 'fully_digital', 'gnn')

    def test_runs_are_listed(self):
        response = self.client.get('/api/v1/runs/')

        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(len(response.data), 1)
        self.assertEqual(response.data[0]['status'], 'completed')

    def test_results_filtered_by_method(self):
        response = self.client.get('/api/v1/results/', {'method': 'fully_digital'})

        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['count'], 2)
        self.assertEqual([row['axis_value'] for row in response.data['results']], [0.0, 10.0])

    def test_results_ordering(self):
        response = self.client.get('/api/v1/results/', {'axis': 'transmit_power_dbm', 'ordering': '-axis_value'})

        values = [row['axis_value'] for row in response.data['results']]
        self.assertEqual(values, sorted(values, reverse=True))

    def test_complexity_table(self):
        query = {key: value for key, value in SYSTEM.items()}
        response = self.client.get('/api/v1/complexity/', query)

        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(len(response.data), 8)

    def test_complexity_table_rejects_bad_dimensions(self):
        response = self.client.get('/api/v1/complexity/', {**SYSTEM, 'K': 9})

        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
