import math

import numpy as np
import torch
from django.test import SimpleTestCase

from beamformer.types import HybridBeamformer, HybridCombiner
from core.config import SystemConfig
from .rates import SingularCovarianceError, link_rates, spectral_efficiency, total_loss


def complex_normal(shape, rng):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def transceiver(config, seed=0):
    rng = np.random.default_rng(seed)
    beamformer = HybridBeamformer(
        F_RF=torch.from_numpy(np.exp(2j * np.pi * rng.random((config.Nt, config.NRFt))) / math.sqrt(config.Nt)),
        F_BB=torch.from_numpy(complex_normal((config.K, config.NRFt, config.Ns), rng)),
    )
    combiner = HybridCombiner(
        W_RF=torch.from_numpy(np.exp(2j * np.pi * rng.random((config.Nr, config.NRFr))) / math.sqrt(config.Nr)),
        W_BB=torch.from_numpy(complex_normal((config.K, config.NRFr, config.Ns), rng)),
    )
    H = torch.from_numpy(complex_normal((config.K, config.Nr, config.Nt), rng))
    return H, beamformer, combiner


class SpectralEfficiencyTests(SimpleTestCase):
    def setUp(self):
        self.config = SystemConfig(Nt=8, Nr=4, NRFt=3, NRFr=2, Ns=2, K=4, Kp=2, M=2, L=2)

    def test_zero_channel(self):
        H, F, W = transceiver(self.config)
        report = spectral_efficiency(torch.zeros_like(H), F, W, 1.0, 0.1, self.config)
        self.assertEqual(report.mean.item(), 0.0)
        self.assertEqual(report.per_subchannel.abs().sum().item(), 0.0)

    def test_scalar_link(self):
        config = SystemConfig(Nt=1, Nr=1, NRFt=1, NRFr=1, Ns=1, K=1, Kp=1, M=1, L=1)
        one = torch.ones(1, 1, dtype=torch.complex128)
        h = 0.3 - 1.2j
        report = spectral_efficiency(torch.full((1, 1, 1), h, dtype=torch.complex128),
                                     HybridBeamformer(F_RF=one, F_BB=one[None]),
                                     HybridCombiner(W_RF=one, W_BB=one[None]), 2.0, 0.5, config)
        self.assertAlmostEqual(report.mean.item(), math.log2(1 + 2.0 * abs(h) ** 2 / 0.5), places=12)

    def test_generalised_eigenvalue_oracle(self):
        rng = np.random.default_rng(42)
        n, rho, sigma2, Ns = 1000, 3.0, 0.7, 2
        H = complex_normal((n, 2, 2), rng)
        F = complex_normal((n, 2, Ns), rng)
        unitary, _ = np.linalg.qr(complex_normal((n, 2, 2), rng))
        W = unitary * rng.uniform(0.5, 2.0, size=(n, 1, 2))
        rates = link_rates(torch.from_numpy(H), torch.from_numpy(F), torch.from_numpy(W), rho, sigma2).numpy()

        Wh = np.conj(np.swapaxes(W, -1, -2))
        Lam = Wh @ H @ F
        Omega = sigma2 * Wh @ W
        signal = rho / Ns * Lam @ np.conj(np.swapaxes(Lam, -1, -2))
        eigenvalues = np.linalg.eigvals(np.linalg.solve(Omega, signal))
        expected = np.log2(1 + eigenvalues).real.sum(axis=-1)
        np.testing.assert_allclose(rates, expected, rtol=0, atol=1e-10)

    def test_monotone_in_power(self):
        H, F, W = transceiver(self.config, seed=1)
        rates = [spectral_efficiency(H, F, W, rho, 0.5, self.config).mean.item() for rho in (0.1, 1.0, 10.0, 100.0)]
        self.assertEqual(rates, sorted(rates))

    def test_combiner_scale_invariance(self):
        H, F, W = transceiver(self.config, seed=2)
        A = torch.tensor([[1.5 + 0.2j, -0.3j], [0.4, 0.8 - 0.1j]], dtype=torch.complex128)
        base = spectral_efficiency(H, F, W, 1.0, 0.5).per_subchannel
        scaled = spectral_efficiency(H, F, HybridCombiner(W_RF=W.W_RF, W_BB=W.W_BB @ A), 1.0, 0.5).per_subchannel
        self.assertTrue(torch.allclose(base, scaled, rtol=0, atol=1e-8))

    def test_subchannel_order_invariance(self):
        H, F, W = transceiver(self.config, seed=3)
        perm = torch.tensor([3, 1, 0, 2])
        base = spectral_efficiency(H, F, W, 1.0, 0.5).mean
        shuffled = spectral_efficiency(H[perm], HybridBeamformer(F.F_RF, F.F_BB[perm]),
                                       HybridCombiner(W.W_RF, W.W_BB[perm]), 1.0, 0.5).mean
        self.assertAlmostEqual(base.item(), shuffled.item(), places=12)

    def test_mean_of_report(self):
        H, F, W = transceiver(self.config, seed=4)
        report = spectral_efficiency(H, F, W, 1.0, 0.5)
        self.assertAlmostEqual(report.mean.item(), report.per_subchannel.mean().item(), places=14)
        self.assertTrue(bool((report.per_subchannel >= 0).all()))

    def test_gradient_in_digital_beamformer(self):
        H, F, W = transceiver(self.config, seed=5)
        F_BB = F.F_BB.clone().requires_grad_(True)

        def rate(F_BB):
            return spectral_efficiency(H, HybridBeamformer(F.F_RF, F_BB), W, 1.0, 0.5).mean

        self.assertTrue(torch.autograd.gradcheck(rate, (F_BB,), eps=1e-6, atol=1e-8, rtol=1e-4))

    def test_noiseless_covariance_is_singular(self):
        H, F, W = transceiver(self.config, seed=6)
        with self.assertRaises(SingularCovarianceError) as caught:
            spectral_efficiency(H, F, W, 1.0, 0.0)
        self.assertEqual(caught.exception.subchannel, 0)

    def test_rank_deficient_combiner_falls_back_to_ridge(self):
        H = torch.tensor([[[1.0, 0.5j], [-0.2, 1.0]]], dtype=torch.complex128)
        F = torch.eye(2, dtype=torch.complex128)[None]
        W = torch.tensor([[[1.0, 1.0], [0.0, 0.0]]], dtype=torch.complex128)
        rates = link_rates(H, F, W, 1.0, 0.5)
        self.assertTrue(bool(torch.isfinite(rates).all()))
        self.assertGreaterEqual(rates.item(), 0.0)

    def test_shape_mismatch(self):
        H, F, W = transceiver(self.config)
        with self.assertRaises(ValueError):
            spectral_efficiency(H[:, :2], F, W, 1.0, 0.5, self.config)


class TotalLossTests(SimpleTestCase):
    def test_reference_weight(self):
        self.assertAlmostEqual(total_loss(1.0, 3.0, 0.2), -2.8)

    def test_pure_rate_maximisation(self):
        self.assertEqual(total_loss(5.0, 3.0, 0.0), -3.0)
        self.assertEqual(total_loss(0.0, 3.0, 0.2), -3.0)

    def test_negative_weight(self):
        with self.assertRaises(ValueError):
            total_loss(1.0, 1.0, -0.1)
