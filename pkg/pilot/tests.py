import math

import torch
from django.test import SimpleTestCase
from torch.func import functional_call

from core.config import SystemConfig
from .network import (
    PilotNetwork, analog_from_phases, combiner_gram, pilot_noise, project_pilot_power,
    seeded_pilot_noise, transmit_pilots,
)


def tiny_config(**overrides):
    fields = dict(Nt=4, Nr=2, NRFt=2, NRFr=1, Ns=1, K=4, Kp=2, M=2, L=3, B=12, D=4, V=2,
                  rho_p=2.0, sigma_n2=0.0, seed=7)
    fields.update(overrides)
    return SystemConfig(**fields)


def random_channel(config, batch=2, seed=0):
    generator = torch.Generator().manual_seed(seed)
    real = torch.randn(batch, config.K, config.Nr, config.Nt, 2, generator=generator, dtype=torch.float64)
    return torch.view_as_complex(real)


class AnalogFromPhasesTests(SimpleTestCase):
    def test_zero_phase(self):
        out = analog_from_phases(torch.zeros(4, 2, dtype=torch.float64), 1 / math.sqrt(4))
        self.assertTrue(torch.allclose(out, torch.full((4, 2), 0.5 + 0j, dtype=torch.complex128)))

    def test_modulus_equals_scale(self):
        phases = torch.randn(8, 3, dtype=torch.float64) * 10
        out = analog_from_phases(phases, 0.25)
        self.assertTrue(torch.allclose(out.abs(), torch.full((8, 3), 0.25, dtype=torch.float64), atol=1e-15))

    def test_quarter_turn(self):
        phases = torch.zeros(4, 1, dtype=torch.float64)
        phases[0, 0] = math.pi / 2
        out = analog_from_phases(phases, 1 / math.sqrt(4))
        self.assertAlmostEqual(out[0, 0].real.item(), 0.0, places=15)
        self.assertAlmostEqual(out[0, 0].imag.item(), 0.5, places=15)


class ProjectPilotPowerTests(SimpleTestCase):
    def test_interior_point_is_unchanged(self):
        s = torch.tensor([1.0 + 0j, 0 + 1j], dtype=torch.complex128)
        self.assertTrue(torch.equal(project_pilot_power(s, 4.0), s))

    def test_boundary_projection(self):
        s = torch.tensor([4.0 + 0j, 0j], dtype=torch.complex128)
        out = project_pilot_power(s, 4.0)
        self.assertAlmostEqual(torch.linalg.vector_norm(out).item() ** 2, 4.0, places=12)

    def test_scaled_example(self):
        out = project_pilot_power(torch.tensor([2 + 0j, 2j], dtype=torch.complex128), 4.0)
        expected = torch.tensor([math.sqrt(2) + 0j, math.sqrt(2) * 1j], dtype=torch.complex128)
        self.assertTrue(torch.allclose(out, expected, atol=1e-15))

    def test_zero_vector(self):
        s = torch.zeros(3, dtype=torch.complex128)
        self.assertTrue(torch.equal(project_pilot_power(s, 2.0), s))


class TransmitPilotsTests(SimpleTestCase):
    def test_zero_channel_zero_noise(self):
        config = tiny_config()
        pilot = PilotNetwork(config)
        Y = transmit_pilots(torch.zeros(2, 4, 2, 4, dtype=torch.complex128), pilot, config).Y
        self.assertEqual(tuple(Y.shape), (2, config.Kp, config.NRFr, config.L))
        self.assertTrue(torch.equal(Y, torch.zeros_like(Y)))

    def test_scalar_link(self):
        config = SystemConfig(Nt=1, Nr=1, NRFt=1, NRFr=1, Ns=1, K=1, Kp=1, M=1, L=1,
                              rho_p=3.0, sigma_n2=0.0)
        pilot = PilotNetwork(config)
        with torch.no_grad():
            pilot.theta.zero_()
            pilot.phi.zero_()
            pilot.symbols.copy_(torch.tensor([[[1.0, 0.0]]], dtype=torch.float64))
        h = torch.tensor([[[[0.3 - 1.2j]]]], dtype=torch.complex128)
        Y = transmit_pilots(h, pilot, config).Y
        self.assertTrue(torch.allclose(Y.reshape(()), math.sqrt(3.0) * h.reshape(())))

    def test_doubling_pilot_power(self):
        config = tiny_config()
        pilot = PilotNetwork(config)
        H = random_channel(config)
        Y1 = transmit_pilots(H, pilot, config).Y
        pilot.config = config.replace(rho_p=2 * config.rho_p)
        Y2 = transmit_pilots(H, pilot, pilot.config).Y
        self.assertTrue(torch.allclose(Y2, math.sqrt(2) * Y1, atol=1e-12))

    def test_shape_mismatch(self):
        config = tiny_config()
        with self.assertRaises(ValueError):
            transmit_pilots(torch.zeros(1, 4, 3, 4, dtype=torch.complex128), PilotNetwork(config), config)

    def test_gradients_match_finite_differences(self):
        config = tiny_config()
        pilot = PilotNetwork(config)
        H = random_channel(config, batch=1)
        noise = torch.zeros(1, config.Kp, config.L, config.Nr, dtype=torch.complex128)

        def energy(theta, phi, symbols):
            params = {'theta': theta, 'phi': phi, 'symbols': symbols}
            Y = functional_call(pilot, params, (H,), {'noise': noise}).Y
            return (Y.abs() ** 2).sum()

        inputs = tuple(p.detach().clone().requires_grad_(True) for p in (pilot.theta, pilot.phi, pilot.symbols))
        self.assertTrue(torch.autograd.gradcheck(energy, inputs, eps=1e-6, atol=1e-8, rtol=1e-4))

    def test_constraints_hold_after_projected_updates(self):
        config = tiny_config()
        pilot = PilotNetwork(config)
        optimizer = torch.optim.Adam(pilot.parameters(), lr=0.5)
        H = random_channel(config)
        for _ in range(20):
            optimizer.zero_grad()
            loss = -(transmit_pilots(H, pilot, config).Y.abs() ** 2).sum()
            loss.backward()
            optimizer.step()
            pilot.project_()
            power = (pilot.s.abs() ** 2).sum(dim=-1)
            self.assertTrue(bool((power <= config.NRFt + 1e-12).all()))
            self.assertTrue(torch.allclose(pilot.analog_beamformers().abs() ** 2,
                                           torch.full_like(pilot.theta, 1 / config.Nt), atol=1e-15))
            self.assertTrue(torch.allclose(pilot.analog_combiners().abs() ** 2,
                                           torch.full_like(pilot.phi, 1 / config.Nr), atol=1e-15))

    def test_noise_covariance(self):
        config = tiny_config(Nr=3, NRFr=2, sigma_n2=1.5)
        pilot = PilotNetwork(config)
        n = 40_000
        noise = pilot_noise(n, config, torch.Generator().manual_seed(1))
        Y = transmit_pilots(torch.zeros(n, config.K, config.Nr, config.Nt, dtype=torch.complex128),
                            pilot, config, noise=noise).Y
        y = Y[:, 0, :, 0]
        covariance = y.T @ y.conj() / n
        expected = config.sigma_n2 * combiner_gram(pilot)[0].detach()
        self.assertTrue(torch.allclose(covariance, expected, atol=0.05))

    def test_seeded_noise_is_batch_independent(self):
        config = tiny_config(sigma_n2=1.0)
        both = seeded_pilot_noise([10, 11], config)
        alone = seeded_pilot_noise([11], config)
        self.assertTrue(torch.equal(both[1], alone[0]))

    def test_initial_symbols_respect_budget(self):
        pilot = PilotNetwork(tiny_config())
        self.assertTrue(bool(((pilot.s.abs() ** 2).sum(-1) <= 2 + 1e-12).all()))
