import math

import torch
from django.test import SimpleTestCase
from torch.func import functional_call

from core.config import SystemConfig
from core.tensors import pack_complex
from objective.rates import spectral_efficiency
from pilot.network import ReceivedPilots
from .gnn import BS_SIDE, UE_SIDE, HybridGNN, hb_gnn_forward, hc_gnn_forward, state_dims
from .normalization import DegenerateBeamformerError, normalize, project_unit_modulus
from .types import NodeStates


def small_config(**overrides):
    fields = dict(Nt=8, Nr=2, NRFt=2, NRFr=1, Ns=1, K=4, Kp=2, M=2, L=2, G=2, B=2, D=2, V=4,
                  rho=1.0, rho_p=1.0, sigma_n2=1.0, seed=3)
    fields.update(overrides)
    return SystemConfig(**fields)


def random_pilots(config, batch=None, seed=0):
    generator = torch.Generator().manual_seed(seed)
    shape = ((batch,) if batch else ()) + (config.Kp, config.NRFr, config.L, 2)
    return ReceivedPilots(Y=torch.view_as_complex(torch.randn(shape, generator=generator, dtype=torch.float64)))


def random_channel(config, batch=3, seed=1):
    generator = torch.Generator().manual_seed(seed)
    shape = (batch, config.K, config.Nr, config.Nt, 2)
    return torch.view_as_complex(torch.randn(shape, generator=generator, dtype=torch.float64))


class StateDimensionTests(SimpleTestCase):
    def test_reference_dimensions(self):
        config = SystemConfig()
        self.assertEqual(state_dims(config, BS_SIDE), (16, 512))
        self.assertEqual(state_dims(config, UE_SIDE), (8, 16))

    def test_reference_network_shapes(self):
        model = HybridGNN(SystemConfig(), BS_SIDE)
        self.assertEqual(tuple(model.I_BB.weight.shape), (8 * 16, 2 * 2 * 16))
        self.assertEqual(tuple(model.I_RF.weight.shape), (512, 64))
        self.assertEqual(len(model.layers), 4)


class NodeTests(SimpleTestCase):
    def setUp(self):
        self.config = small_config()
        self.model = HybridGNN(self.config, BS_SIDE)

    def test_identical_groups_give_identical_states(self):
        Y = random_pilots(self.config).Y
        Y = Y[:1].expand(self.config.Kp, -1, -1).clone()
        states = self.model.init_nodes(Y)
        blocks = states.c.reshape(self.config.Kp, self.config.M, -1)
        self.assertTrue(torch.allclose(blocks[0], blocks[1], rtol=0, atol=1e-14))

    def test_opposite_groups_feed_zero_to_analog_map(self):
        Y = random_pilots(self.config).Y
        Y = torch.stack([Y[0], -Y[0]])
        states = self.model.init_nodes(Y)
        expected = self.model.activation(self.model.I_RF.bias)
        self.assertTrue(torch.allclose(states.v, expected, atol=1e-15))

    def test_group_permutation_of_initial_states(self):
        Y = random_pilots(self.config).Y
        states = self.model.init_nodes(Y)
        swapped = self.model.init_nodes(Y.flip(0))
        M = self.config.M
        self.assertTrue(torch.allclose(swapped.c[:M], states.c[M:], rtol=0, atol=1e-14))
        self.assertTrue(torch.allclose(swapped.v, states.v, atol=1e-14))

    def test_shape_mismatch(self):
        with self.assertRaises(ValueError):
            self.model.init_nodes(torch.zeros(3, 1, 2, dtype=torch.complex128))

    def test_equal_digital_states_stay_equal(self):
        c = torch.randn(1, self.model.dim_c, dtype=torch.float64).expand(self.config.K, -1)
        v = torch.randn(self.model.dim_v, dtype=torch.float64)
        out = self.model.message_pass(NodeStates(c=c, v=v), 1)
        self.assertTrue(torch.allclose(out.c, out.c[:1].expand_as(out.c), rtol=0, atol=1e-14))

    def test_row_permutation(self):
        c = torch.randn(self.config.K, self.model.dim_c, dtype=torch.float64)
        v = torch.randn(self.model.dim_v, dtype=torch.float64)
        perm = torch.tensor([2, 0, 3, 1])
        out = self.model.message_pass(NodeStates(c=c, v=v), 2)
        permuted = self.model.message_pass(NodeStates(c=c[perm], v=v), 2)
        self.assertTrue(torch.allclose(permuted.v, out.v, atol=1e-14))
        self.assertTrue(torch.allclose(permuted.c, out.c[perm], atol=1e-14))

    def test_zero_parameters_give_zero_states(self):
        with torch.no_grad():
            for parameter in self.model.parameters():
                parameter.zero_()
        states = NodeStates(c=torch.randn(self.config.K, self.model.dim_c, dtype=torch.float64),
                            v=torch.randn(self.model.dim_v, dtype=torch.float64))
        for g in (1, 2):
            states = self.model.message_pass(states, g)
        self.assertEqual(states.c.abs().sum().item(), 0.0)
        self.assertEqual(states.v.abs().sum().item(), 0.0)

    def test_layer_index_out_of_range(self):
        states = self.model.init_nodes(random_pilots(self.config))
        with self.assertRaises(ValueError):
            self.model.message_pass(states, 3)


class ReadOutTests(SimpleTestCase):
    def setUp(self):
        self.config = small_config()
        self.model = HybridGNN(self.config, BS_SIDE)

    def test_zero_analog_state(self):
        states = NodeStates(c=torch.ones(self.config.K, self.model.dim_c, dtype=torch.float64),
                            v=torch.zeros(self.model.dim_v, dtype=torch.float64))
        F_RF, _ = self.model.read_out(states)
        self.assertEqual(F_RF.abs().sum().item(), 0.0)

    def test_real_part_layout(self):
        pattern = torch.zeros(8, 2, dtype=torch.complex128)
        pattern[0, 0] = pattern[1, 1] = 1
        states = NodeStates(c=torch.zeros(self.config.K, self.model.dim_c, dtype=torch.float64),
                            v=pack_complex(pattern))
        F_RF, _ = self.model.read_out(states)
        self.assertTrue(torch.equal(F_RF, pattern))
        self.assertEqual(F_RF.imag.abs().sum().item(), 0.0)
        self.assertEqual(states.v[:16].tolist()[:10], [1, 0, 0, 0, 0, 0, 0, 0, 0, 1])

    def test_rejects_non_finite_states(self):
        states = NodeStates(c=torch.full((self.config.K, self.model.dim_c), float('nan'), dtype=torch.float64),
                            v=torch.zeros(self.model.dim_v, dtype=torch.float64))
        with self.assertRaises(ValueError):
            self.model.read_out(states)

    def test_rejects_wrong_node_count(self):
        states = NodeStates(c=torch.zeros(self.config.K + 1, self.model.dim_c, dtype=torch.float64),
                            v=torch.zeros(self.model.dim_v, dtype=torch.float64))
        with self.assertRaises(ValueError):
            self.model.read_out(states)


class NormalizeTests(SimpleTestCase):
    def test_modulus_projection_example(self):
        raw = torch.full((4, 1), 3 + 4j, dtype=torch.complex128)
        out = project_unit_modulus(raw, 4)
        self.assertTrue(torch.allclose(out, torch.full((4, 1), 0.3 + 0.4j, dtype=torch.complex128)))

    def test_zero_entry_takes_phase_zero(self):
        raw = torch.tensor([[0j, 1j], [2 + 0j, -1 + 0j]], dtype=torch.complex128)
        with self.assertLogs('beamformer.normalization', level='WARNING'):
            out = project_unit_modulus(raw, 2)
        self.assertAlmostEqual(out[0, 0].real.item(), 1 / math.sqrt(2))
        self.assertAlmostEqual(out[0, 0].imag.item(), 0.0)

    def test_power_constraint(self):
        config = small_config()
        generator = torch.Generator().manual_seed(5)
        F_RF = torch.randn(config.Nt, config.NRFt, dtype=torch.complex128, generator=generator)
        F_BB = torch.randn(config.K, config.NRFt, config.Ns, dtype=torch.complex128, generator=generator)
        beamformer = normalize(F_RF, F_BB, config)
        beamformer.check_constraints(config)
        self.assertAlmostEqual(beamformer.total_power().item(), config.K * config.Ns, places=9)

    def test_digital_scale_invariance(self):
        config = small_config()
        F_RF = torch.randn(config.Nt, config.NRFt, dtype=torch.complex128)
        F_BB = torch.randn(config.K, config.NRFt, config.Ns, dtype=torch.complex128)
        first = normalize(F_RF, F_BB, config)
        second = normalize(F_RF, 7 * F_BB, config)
        self.assertTrue(torch.allclose(first.F_BB, second.F_BB, atol=1e-14))
        self.assertTrue(torch.equal(first.F_RF, second.F_RF))

    def test_degenerate_digital_stack(self):
        config = small_config()
        with self.assertRaisesRegex(DegenerateBeamformerError, 'degenerate beamformer'):
            normalize(torch.ones(config.Nt, config.NRFt, dtype=torch.complex128),
                      torch.zeros(config.K, config.NRFt, config.Ns, dtype=torch.complex128), config)


class ForwardTests(SimpleTestCase):
    def setUp(self):
        self.config = small_config()
        self.hb = HybridGNN(self.config, BS_SIDE)
        self.hc = HybridGNN(self.config, UE_SIDE)

    def test_output_shapes_and_constraints(self):
        pilots = random_pilots(self.config, batch=3)
        F = hb_gnn_forward(pilots, self.hb, self.config)
        W = hc_gnn_forward(pilots, self.hc, self.config)
        self.assertEqual(tuple(F.F_RF.shape), (3, 8, 2))
        self.assertEqual(tuple(F.F_BB.shape), (3, 4, 2, 1))
        self.assertEqual(tuple(W.W_RF.shape), (3, 2, 1))
        self.assertEqual(tuple(W.W_BB.shape), (3, 4, 1, 1))
        F.check_constraints(self.config)
        W.check_constraints(self.config)

    def test_purity(self):
        pilots = random_pilots(self.config)
        first, second = self.hb(pilots), self.hb(pilots)
        self.assertTrue(torch.equal(first.F_RF, second.F_RF))
        self.assertTrue(torch.equal(first.F_BB, second.F_BB))

    def test_same_seed_same_network(self):
        other = HybridGNN(self.config, BS_SIDE)
        for a, b in zip(self.hb.parameters(), other.parameters()):
            self.assertTrue(torch.equal(a, b))

    def test_wrong_side(self):
        with self.assertRaises(ValueError):
            hb_gnn_forward(random_pilots(self.config), self.hc, self.config)

    def test_group_permutation_equivariance(self):
        config = small_config(Kp=3, K=6, L=2, V=4, B=3)
        model = HybridGNN(config, BS_SIDE)
        Y = random_pilots(config, batch=2).Y
        perm = torch.tensor([2, 0, 1])
        base = model(Y)
        permuted = model(Y[:, perm])
        blocks = base.F_BB.reshape(2, config.Kp, config.M, config.NRFt, config.Ns)[:, perm]
        self.assertTrue(torch.allclose(permuted.F_RF, base.F_RF, atol=1e-12))
        self.assertTrue(torch.allclose(permuted.F_BB, blocks.reshape_as(base.F_BB), atol=1e-12))

    def test_constraints_hold_during_training(self):
        H = random_channel(self.config)
        pilots = random_pilots(self.config, batch=3)
        optimizer = torch.optim.Adam(list(self.hb.parameters()) + list(self.hc.parameters()), lr=0.05)
        for _ in range(5):
            optimizer.zero_grad()
            F, W = self.hb(pilots), self.hc(pilots)
            F.check_constraints(self.config)
            W.check_constraints(self.config)
            loss = -spectral_efficiency(H, F, W, 1.0, 1.0, self.config).mean.mean()
            loss.backward()
            optimizer.step()

    def test_rate_gradient_matches_finite_differences(self):
        H = random_channel(self.config, batch=2)
        pilots = random_pilots(self.config, batch=2)
        hb_names = [name for name, _ in self.hb.named_parameters()]
        hc_names = [name for name, _ in self.hc.named_parameters()]

        def rate(*tensors):
            F = functional_call(self.hb, dict(zip(hb_names, tensors[:len(hb_names)])), (pilots,))
            W = functional_call(self.hc, dict(zip(hc_names, tensors[len(hb_names):])), (pilots,))
            return spectral_efficiency(H, F, W, 1.0, 1.0).mean.sum()

        inputs = tuple(p.detach().clone().requires_grad_(True)
                       for p in list(self.hb.parameters()) + list(self.hc.parameters()))
        self.assertTrue(torch.autograd.gradcheck(rate, inputs, eps=1e-6, atol=1e-7, rtol=1e-4))
