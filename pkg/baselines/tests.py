import math

import numpy as np
import torch
from django.test import SimpleTestCase

from beamformer.gnn import BS_SIDE, UE_SIDE, HybridGNN
from beamformer.normalization import normalize, normalize_combiner
from channel.generators import ClusterParams, generate_dataset
from core.config import SystemConfig
from objective.rates import spectral_efficiency
from pilot.network import PilotNetwork, seeded_pilot_noise, transmit_pilots
from .complexity import (
    complexity_table, gnn_operations, gnn_parameters, mlp_operations, mlp_parameters, parameter_count,
)
from .digital import fully_digital_svd
from .manifold import alternating_minimization, mo_hybrid
from .mlp import MlpBeamformer, mlp_beamformer_forward, mlp_combiner_forward
from .omp import AngleDictionary, SensingMatrixError, interpolate_gains, nmse, omp, omp_channel_estimate


def small_config(**overrides):
    fields = dict(Nt=8, Nr=4, NRFt=2, NRFr=2, Ns=2, K=4, Kp=2, M=2, L=8, G=2, B=32, D=4, V=4,
                  rho=1.0, rho_p=1.0, sigma_n2=0.5, seed=11)
    fields.update(overrides)
    return SystemConfig(**fields)


def complex_normal(shape, seed):
    rng = np.random.default_rng(seed)
    return torch.from_numpy((rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2))


def random_hybrid(config, seed):
    F = normalize(complex_normal((config.Nt, config.NRFt), seed),
                  complex_normal((config.K, config.NRFt, config.Ns), seed + 1), config)
    W = normalize_combiner(complex_normal((config.Nr, config.NRFr), seed + 2),
                           complex_normal((config.K, config.NRFr, config.Ns), seed + 3), config)
    return F, W


class FullyDigitalTests(SimpleTestCase):
    def test_diagonal_channel(self):
        config = SystemConfig(Nt=2, Nr=2, NRFt=2, NRFr=2, Ns=2, K=1, Kp=1, M=1, L=1)
        H = torch.tensor([[[2.0, 0.0], [0.0, 1.0]]], dtype=torch.complex128)
        report = fully_digital_svd(H, 1.0, 0.5, config)
        expected = math.log2(1 + 4 / (2 * 0.5)) + math.log2(1 + 1 / (2 * 0.5))
        self.assertAlmostEqual(report.mean.item(), expected, places=10)

    def test_rank_one_channel(self):
        config = SystemConfig(Nt=3, Nr=2, NRFt=2, NRFr=2, Ns=2, K=1, Kp=1, M=1, L=1)
        a = torch.tensor([1.0, 1j], dtype=torch.complex128)
        b = torch.tensor([0.5, -1.0, 2j], dtype=torch.complex128)
        H = torch.outer(a, b.conj())[None]
        singular = (torch.linalg.vector_norm(a) * torch.linalg.vector_norm(b)).item()
        report = fully_digital_svd(H, 2.0, 0.5, config)
        self.assertAlmostEqual(report.mean.item(), math.log2(1 + 2.0 * singular ** 2 / (2 * 0.5)), places=10)

    def test_upper_bound_on_hybrid_schemes(self):
        config = small_config()
        for trial in range(25):
            H = complex_normal((config.K, config.Nr, config.Nt), 100 + trial)
            F, W = random_hybrid(config, 10 * trial)
            digital = fully_digital_svd(H, 1.0, 0.5, config).mean.item()
            hybrid = spectral_efficiency(H, F, W, 1.0, 0.5, config).mean.item()
            self.assertLessEqual(hybrid, digital + 1e-9)


class OmpTests(SimpleTestCase):
    def setUp(self):
        self.config = small_config(sigma_n2=0.0)
        self.dictionary = AngleDictionary.for_config(self.config)
        self.pilot = PilotNetwork(self.config)

    def single_path_channel(self):
        Gr, Gt = self.dictionary.shape
        gains = np.zeros((self.config.K, Gr, Gt), dtype=np.complex128)
        gains[:, 3, 5] = np.exp(1j * np.linspace(0, 1, self.config.K)) * 2.0
        return torch.from_numpy(self.dictionary.channel(gains))

    def test_dictionary_columns_are_unit_norm(self):
        for matrix in (self.dictionary.A_t, self.dictionary.A_r):
            np.testing.assert_allclose(np.linalg.norm(matrix, axis=0), 1.0, atol=1e-12)
        self.assertEqual(self.dictionary.shape, (8, 16))

    def test_exact_recovery_of_on_grid_path(self):
        H = self.single_path_channel()
        pilots = transmit_pilots(H, self.pilot, self.config)
        estimate = omp_channel_estimate(pilots, self.pilot, self.dictionary, 1, self.config)
        for k in self.config.pilot_subchannels:
            self.assertTrue(torch.allclose(estimate[k], H[k], atol=1e-6))
        self.assertLess(nmse(estimate[::self.config.M], H[::self.config.M]), 1e-10)

    def test_zero_paths(self):
        pilots = transmit_pilots(self.single_path_channel(), self.pilot, self.config)
        with self.assertRaises(ValueError):
            omp_channel_estimate(pilots, self.pilot, self.dictionary, 0, self.config)

    def test_too_many_paths_for_pilot_length(self):
        pilots = transmit_pilots(self.single_path_channel(), self.pilot, self.config)
        with self.assertRaises(SensingMatrixError):
            omp_channel_estimate(pilots, self.pilot, self.dictionary, 17, self.config)

    def test_residual_is_non_increasing(self):
        Psi = complex_normal((12, 40), 1).numpy()
        y = complex_normal((12,), 2).numpy()
        _, _, residuals = omp(Psi, y, 8)
        self.assertEqual(len(residuals), 9)
        for before, after in zip(residuals, residuals[1:]):
            self.assertLessEqual(after, before + 1e-12)

    def test_linear_interpolation_between_pilots(self):
        pilot_gains = np.array([0.0, 2.0, 4.0], dtype=np.complex128)[:, None, None]
        out = interpolate_gains(pilot_gains, 6, 2)[:, 0, 0].real
        np.testing.assert_allclose(out, [0, 1, 2, 3, 4, 4])

    def test_error_falls_with_pilot_power(self):
        config = small_config(sigma_n2=1.0, L=8)
        H = torch.from_numpy(generate_dataset(config, ClusterParams(num_clusters=1, rays_per_cluster=1), 12))
        noise = seeded_pilot_noise(range(12), config)
        errors = []
        for rho_p in (1e-2, 1.0, 1e2):
            sounding = config.replace(rho_p=rho_p)
            pilot = PilotNetwork(sounding)
            pilots = transmit_pilots(H, pilot, sounding, noise=noise).Y
            estimate = torch.stack([
                omp_channel_estimate(pilots[i], pilot, self.dictionary, 2, sounding) for i in range(len(H))
            ])
            errors.append(nmse(estimate, H))
        self.assertGreater(errors[0], errors[1])
        self.assertGreater(errors[1], errors[2])


class ManifoldTests(SimpleTestCase):
    def test_objective_is_non_increasing(self):
        T = complex_normal((4, 8, 2), 3)
        _, _, history, _ = alternating_minimization(T, 3, iters=40, tol=0.0, generator=torch.Generator().manual_seed(0))
        for before, after in zip(history, history[1:]):
            self.assertLessEqual(after, before * (1 + 1e-12) + 1e-15)

    def test_square_analog_stage_reconstructs_target(self):
        T = complex_normal((4, 6, 2), 4)
        _, _, history, _ = alternating_minimization(T, 6, iters=5, generator=torch.Generator().manual_seed(0))
        self.assertLess(history[-1] / (T.abs() ** 2).sum().item(), 1e-3)

    def test_output_constraints(self):
        config = small_config()
        H = complex_normal((config.K, config.Nr, config.Nt), 5)
        result = mo_hybrid(H, config, iters=30)
        result.beamformer.check_constraints(config)
        result.combiner.check_constraints(config)
        self.assertIn('beamformer', result.history)

    def test_budget_exhaustion_is_flagged_not_raised(self):
        config = small_config()
        H = complex_normal((config.K, config.Nr, config.Nt), 6)
        result = mo_hybrid(H, config, iters=1, tol=0.0)
        self.assertFalse(result.converged)

    def test_fully_digital_dominates_mo(self):
        config = small_config()
        for trial in range(5):
            H = complex_normal((config.K, config.Nr, config.Nt), 50 + trial)
            result = mo_hybrid(H, config, iters=50)
            hybrid = spectral_efficiency(H, result.beamformer, result.combiner, 1.0, 0.5, config).mean.item()
            self.assertLessEqual(hybrid, fully_digital_svd(H, 1.0, 0.5, config).mean.item() + 1e-9)

    def test_perfect_csi_beats_omp_estimates(self):
        config = small_config(sigma_n2=1.0, rho_p=0.05)
        H = torch.from_numpy(generate_dataset(config, ClusterParams(), 6)).to(torch.complex128)
        pilot = PilotNetwork(config)
        pilots = transmit_pilots(H, pilot, config, noise=seeded_pilot_noise(range(6), config)).Y
        dictionary = AngleDictionary.for_config(config)
        perfect, estimated = [], []
        for i in range(len(H)):
            exact = mo_hybrid(H[i], config, iters=50)
            perfect.append(spectral_efficiency(H[i], exact.beamformer, exact.combiner, 1.0, 1.0).mean.item())
            H_est = omp_channel_estimate(pilots[i], pilot, dictionary, 2, config)
            guess = mo_hybrid(H_est, config, iters=50)
            estimated.append(spectral_efficiency(H[i], guess.beamformer, guess.combiner, 1.0, 1.0).mean.item())
        self.assertGreater(np.mean(perfect), np.mean(estimated))


class MlpTests(SimpleTestCase):
    def setUp(self):
        self.config = small_config(Nr=2, NRFr=1, Ns=1, L=2, V=4, B=2, D=2)

    def random_pilots(self, batch=2, seed=0):
        generator = torch.Generator().manual_seed(seed)
        shape = (batch, self.config.Kp, self.config.NRFr, self.config.L, 2)
        return torch.view_as_complex(torch.randn(shape, generator=generator, dtype=torch.float64))

    def test_output_constraints(self):
        Y = self.random_pilots()
        F = mlp_beamformer_forward(Y, MlpBeamformer(self.config, BS_SIDE), self.config)
        W = mlp_combiner_forward(Y, MlpBeamformer(self.config, UE_SIDE), self.config)
        self.assertEqual(tuple(F.F_BB.shape), (2, self.config.K, self.config.NRFt, self.config.Ns))
        F.check_constraints(self.config)
        W.check_constraints(self.config)

    def test_output_dimension_matches_gnn_read_out(self):
        mlp = MlpBeamformer(self.config, BS_SIDE)
        gnn = HybridGNN(self.config, BS_SIDE)
        self.assertEqual(mlp.output_dim, self.config.K * gnn.dim_c + gnn.dim_v)
        self.assertEqual(len([m for m in mlp.stages if isinstance(m, torch.nn.Linear)]), self.config.G + 1)

    def test_not_equivariant_to_group_permutation(self):
        mlp = MlpBeamformer(self.config, BS_SIDE)
        Y = self.random_pilots(batch=1)
        base = mlp(Y)
        permuted = mlp(Y.flip(1))
        M = self.config.M
        expected = torch.cat([base.F_BB[:, M:], base.F_BB[:, :M]], dim=1)
        self.assertFalse(torch.allclose(permuted.F_BB, expected, atol=1e-6))


class ComplexityTests(SimpleTestCase):
    def test_parameter_counts_match_modules(self):
        config = small_config(Nr=2, NRFr=1, Ns=1, L=2)
        for side in (BS_SIDE, UE_SIDE):
            self.assertEqual(gnn_parameters(config, side), parameter_count(HybridGNN(config, side)))
            self.assertEqual(mlp_parameters(config, side), parameter_count(MlpBeamformer(config, side)))

    def test_mlp_is_larger_at_reference_dimensions(self):
        config = SystemConfig()
        self.assertGreater(mlp_parameters(config), gnn_parameters(config))
        self.assertGreater(mlp_operations(config), gnn_operations(config))

    def test_table_rows(self):
        rows = complexity_table(SystemConfig(), mo_iterations=10)
        self.assertEqual(len(rows), 8)
        self.assertEqual({row['method'] for row in rows}, {'gnn', 'mlp', 'mo', 'cnn'})

    def test_convolutional_row(self):
        config = SystemConfig(Nt=16, Nr=4, NRFt=4, NRFr=2, Ns=2, K=8, Kp=4, M=2, L=4)
        rows = complexity_table(config, conv_layers=2, conv_kernel=3, conv_channels=4)
        conv = {row['side']: row for row in rows if row['method'] == 'cnn'}
        self.assertEqual(conv[BS_SIDE]['operations'], 2 * 8 * 16 ** 2 * 3 ** 2 * 4 ** 2)
        self.assertEqual(conv[BS_SIDE]['operations'], 589824)
        self.assertEqual(conv[UE_SIDE]['operations'], 36864)
        self.assertIsNone(conv[UE_SIDE]['parameters'])
