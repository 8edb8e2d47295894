import numpy as np
import torch
from django.test import SimpleTestCase

from core.config import SystemConfig
from core.validators import validate
from pilot.network import ReceivedPilots
from .presets import FEEDBACK_PRESETS, configure_feedback
from .quantizer import (
    Codebook, CorruptFeedbackError, FeedbackMessage, decode, encode, pack_bits, split, unpack_bits,
    unsplit, vq_loss,
)


def random_pilots(Kp, NRFr, L, seed=0):
    generator = torch.Generator().manual_seed(seed)
    return ReceivedPilots(Y=torch.view_as_complex(
        torch.randn(Kp, NRFr, L, 2, generator=generator, dtype=torch.float64)))


def codebook_from(rows):
    codebook = Codebook(len(rows), len(rows[0]))
    with torch.no_grad():
        codebook.embedding.copy_(torch.tensor(rows, dtype=torch.float64))
    return codebook


class SplitTests(SimpleTestCase):
    def test_reference_segment_count(self):
        self.assertEqual(split(random_pilots(16, 2, 16), 8).shape, (128, 8))

    def test_unsplit_inverts_split(self):
        pilots = random_pilots(4, 2, 3)
        restored = unsplit(split(pilots, 6), 4, 2, 3)
        self.assertTrue(torch.equal(restored.Y, pilots.Y))

    def test_single_segment(self):
        self.assertEqual(split(random_pilots(2, 2, 2), 16).shape, (1, 16))

    def test_layout_is_subchannel_major_real_first(self):
        Y = torch.zeros(2, 1, 2, dtype=torch.complex128)
        Y[0, 0, 1] = 1 + 2j
        Y[1, 0, 0] = 3 - 4j
        flat = split(ReceivedPilots(Y=Y), 8).reshape(-1).tolist()
        self.assertEqual(flat, [0.0, 1.0, 0.0, 2.0, 3.0, 0.0, -4.0, 0.0])

    def test_divisibility_violation(self):
        with self.assertRaises(ValueError):
            split(random_pilots(2, 1, 3), 5)


class EncodeDecodeTests(SimpleTestCase):
    def test_nearest_codeword(self):
        codebook = codebook_from([[0.0, 0.0], [1.0, 1.0]])
        self.assertEqual(codebook.nearest(torch.tensor([[0.9, 0.8]], dtype=torch.float64)).tolist(), [1])

    def test_tie_goes_to_lowest_index(self):
        codebook = codebook_from([[0.0, 0.0], [1.0, 1.0]])
        self.assertEqual(codebook.nearest(torch.tensor([[0.5, 0.5]], dtype=torch.float64)).tolist(), [0])

    def test_bit_budget_for_every_preset(self):
        pilots = random_pilots(16, 2, 16)
        for bits, (D, V) in FEEDBACK_PRESETS.items():
            config = validate(SystemConfig(B=bits, D=D, V=V))
            message = encode(pilots, Codebook(config.D, config.V))
            self.assertEqual(len(message.bits), bits)
            self.assertEqual(len(message.indices), config.num_segments)

    def test_presets_keep_budget_at_smaller_dimensions(self):
        desk = SystemConfig(Nt=16, Nr=4, NRFt=4, NRFr=2, Ns=2, K=32, Kp=8, M=4, L=8, B=64, D=4, V=8)
        for bits in (64, 128, 256, 512):
            config = validate(configure_feedback(desk, bits))
            self.assertEqual(config.B, bits)

    def test_exact_reconstruction_of_codewords(self):
        config = SystemConfig(Kp=2, NRFr=1, L=2, V=4, D=2, B=2)
        codebook = codebook_from([[1.0, -2.0, 0.5, 3.0], [0.0, 0.25, -1.0, 2.0]])
        segments = codebook.embedding.detach()[[1, 0]]
        pilots = unsplit(segments, 2, 1, 2)
        restored = decode(encode(pilots, codebook), codebook, config)
        self.assertTrue(torch.equal(restored.Y, pilots.Y))

    def test_quantisation_is_idempotent(self):
        config = SystemConfig(Kp=4, NRFr=2, L=4, V=8, D=8, B=24)
        codebook = Codebook(config.D, config.V, generator=torch.Generator().manual_seed(2))
        pilots = random_pilots(4, 2, 4, seed=5)
        first = encode(pilots, codebook)
        second = encode(decode(first, codebook, config), codebook)
        np.testing.assert_array_equal(first.indices, second.indices)
        np.testing.assert_array_equal(first.bits, second.bits)

    def test_single_segment_two_codewords(self):
        config = SystemConfig(Kp=1, NRFr=1, L=2, V=4, D=2, B=1)
        codebook = codebook_from([[1.0, 1.0, 1.0, 1.0], [-1.0, -1.0, -1.0, -1.0]])
        pilots = ReceivedPilots(Y=torch.tensor([[[-0.2 - 0.9j, 0.1 - 0.3j]]], dtype=torch.complex128))
        restored = decode(encode(pilots, codebook), codebook, config)
        self.assertTrue(torch.equal(split(restored, 4)[0], codebook.embedding.detach()[1]))

    def test_out_of_range_index(self):
        config = SystemConfig(Kp=1, NRFr=1, L=2, V=2, D=4, B=4)
        message = FeedbackMessage(indices=np.array([0, 5]), bits=np.array([], dtype=np.uint8))
        with self.assertRaises(CorruptFeedbackError):
            decode(message, Codebook(4, 2), config)

    def test_bit_stream_of_wrong_length(self):
        config = SystemConfig(Kp=1, NRFr=1, L=2, V=2, D=4, B=4)
        message = FeedbackMessage(indices=np.array([0, 1]), bits=np.array([0, 1, 1], dtype=np.uint8))
        with self.assertRaises(CorruptFeedbackError):
            decode(message, Codebook(4, 2), config)

    def test_quantisation_minimises_distortion(self):
        codebook = Codebook(16, 4, generator=torch.Generator().manual_seed(0))
        segments = torch.randn(200, 4, dtype=torch.float64)
        chosen = codebook.lookup(codebook.nearest(segments)).detach()
        best = ((segments - chosen) ** 2).sum(-1)
        for d in range(16):
            other = ((segments - codebook.embedding.detach()[d]) ** 2).sum(-1)
            self.assertTrue(bool((best <= other).all()))


class BitPackingTests(SimpleTestCase):
    def test_big_endian_fixed_width(self):
        self.assertEqual(pack_bits([1, 6], 3).tolist(), [0, 0, 1, 1, 1, 0])

    def test_pack_unpack_round_trip(self):
        indices = np.random.default_rng(0).integers(0, 16, size=257)
        np.testing.assert_array_equal(unpack_bits(pack_bits(indices, 4), 4), indices)


class VqLossTests(SimpleTestCase):
    def test_zero_when_segments_are_codewords(self):
        codebook = Codebook(4, 3, generator=torch.Generator().manual_seed(1))
        segments = codebook.embedding.detach()[[0, 2, 3]]
        _, codewords, _ = codebook.quantize(segments)
        self.assertEqual(vq_loss(segments, codewords, 0.25).item(), 0.0)

    def test_direct_evaluation(self):
        z = torch.tensor([[1.0, 0.0]], dtype=torch.float64)
        e = torch.tensor([[0.0, 0.0]], dtype=torch.float64)
        self.assertAlmostEqual(vq_loss(z, e, 0.25).item(), 1.25)

    def test_gradient_routing(self):
        z = torch.tensor([[1.0, 2.0]], dtype=torch.float64, requires_grad=True)
        e = torch.tensor([[0.0, 1.0]], dtype=torch.float64, requires_grad=True)
        vq_loss(z, e, 0.5).backward()
        self.assertTrue(torch.allclose(e.grad, torch.tensor([[-2.0, -2.0]], dtype=torch.float64)))
        self.assertTrue(torch.allclose(z.grad, torch.tensor([[1.0, 1.0]], dtype=torch.float64)))

    def test_codebook_gradient_matches_closed_form(self):
        generator = torch.Generator().manual_seed(3)
        segments = torch.randn(12, 4, generator=generator, dtype=torch.float64)
        codebook = Codebook(4, 4, generator=generator)
        indices = codebook.nearest(segments)

        embedding = codebook.embedding.detach().clone().requires_grad_(True)
        vq_loss(segments, embedding[indices], 0.25).backward()
        # Only the codebook term reaches e; the commitment term sees sg(e).
        expected = torch.zeros_like(embedding).index_add_(
            0, indices, 2 * (embedding.detach()[indices] - segments) / len(segments))
        self.assertTrue(torch.allclose(embedding.grad, expected, atol=1e-12))

    def test_codebook_term_passes_gradcheck(self):
        generator = torch.Generator().manual_seed(3)
        segments = torch.randn(12, 4, generator=generator, dtype=torch.float64)
        codebook = Codebook(4, 4, generator=generator)
        indices = codebook.nearest(segments)

        def loss(embedding):
            return vq_loss(segments, embedding[indices], 0.0)

        embedding = codebook.embedding.detach().clone().requires_grad_(True)
        self.assertTrue(torch.autograd.gradcheck(loss, (embedding,), eps=1e-6, atol=1e-8, rtol=1e-4))

    def test_straight_through_identity_jacobian(self):
        codebook = Codebook(8, 4, generator=torch.Generator().manual_seed(4))
        segments = torch.randn(5, 4, dtype=torch.float64, requires_grad=True)
        weights = torch.randn(5, 4, dtype=torch.float64)
        _, codewords, straight_through = codebook.quantize(segments)
        self.assertTrue(torch.allclose(straight_through.detach(), codewords.detach(), atol=1e-12))
        (straight_through * weights).sum().backward()
        self.assertTrue(torch.equal(segments.grad, weights))


class DeadCodewordTests(SimpleTestCase):
    def test_unused_codewords_move_to_training_segments(self):
        codebook = codebook_from([[0.0, 0.0], [100.0, 100.0]])
        codebook.train()
        segments = torch.tensor([[0.1, 0.2], [0.3, -0.1]], dtype=torch.float64)
        codebook.quantize(segments)
        self.assertEqual(codebook.reseed_dead_codewords(segments, torch.Generator().manual_seed(0)), 1)
        moved = codebook.embedding.detach()[1]
        self.assertTrue(any(torch.equal(moved, row) for row in segments))
        self.assertEqual(int(codebook.usage.sum()), 0)
