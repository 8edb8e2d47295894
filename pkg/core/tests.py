import importlib
import math
import os
from unittest import mock

import torch
from django.conf import settings
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from .config import SystemConfig, config_hash
from .serializers import SystemConfigSerializer
from .tensors import pack_complex, unpack_complex
from .units import mw_to_dbm, noise_power_from_psd
from .validators import validate


class ValidateTests(SimpleTestCase):
    def test_reference_dimensions_are_valid(self):
        config = SystemConfig(Nt=64, NRFt=4, Nr=4, NRFr=2, Ns=2, K=128, Kp=16, M=8, L=16, G=4, alpha=0.2)
        self.assertIs(validate(config), config)

    def test_validate_is_idempotent(self):
        config = SystemConfig()
        self.assertEqual(validate(validate(config)), config)

    def test_streams_exceeding_rf_chains(self):
        with self.assertRaises(ValidationError) as ctx:
            validate(SystemConfig(Ns=5, NRFt=4))
        self.assertIn("Ns exceeds NRFt", ctx.exception.messages[0])
        self.assertEqual(ctx.exception.code, 'dimension_error')

    def test_subchannel_count_mismatch(self):
        with self.assertRaises(ValidationError) as ctx:
            validate(SystemConfig(K=120))
        self.assertIn("K must equal Kp*M", ctx.exception.messages[0])

    def test_bit_budget_from_table(self):
        config = SystemConfig(Kp=16, NRFr=2, L=16, V=8, D=16, B=512)
        self.assertEqual(config.num_segments * config.bits_per_index, 512)
        validate(config)

    def test_non_integer_bit_budget(self):
        with self.assertRaises(ValidationError) as ctx:
            validate(SystemConfig(V=7, B=512))
        self.assertIn("not divisible", ctx.exception.messages[0])

    def test_codebook_size_power_of_two(self):
        with self.assertRaises(ValidationError):
            validate(SystemConfig(D=12))

    def test_antennas_must_exceed_chains(self):
        with self.assertRaises(ValidationError):
            validate(SystemConfig(Nr=2, NRFr=2))

    def test_pilot_subchannels(self):
        config = SystemConfig()
        self.assertEqual(config.pilot_subchannels[:3], [0, 8, 16])
        self.assertEqual(len(config.pilot_subchannels), 16)

    def test_config_hash_tracks_fields(self):
        self.assertEqual(config_hash(SystemConfig()), config_hash(SystemConfig()))
        self.assertNotEqual(config_hash(SystemConfig()), config_hash(SystemConfig(seed=1)))


class NoisePowerTests(SimpleTestCase):
    def test_full_band_power(self):
        self.assertAlmostEqual(mw_to_dbm(noise_power_from_psd(-161.0, 100e6, 1)), -81.0, places=9)

    def test_per_subchannel_power(self):
        self.assertAlmostEqual(mw_to_dbm(noise_power_from_psd(-161.0, 100e6, 128)), -102.0721, places=3)

    def test_halving_the_band(self):
        full = mw_to_dbm(noise_power_from_psd(-150.0, 20e6, 1))
        half = mw_to_dbm(noise_power_from_psd(-150.0, 20e6, 2))
        self.assertAlmostEqual(full, half + 10 * math.log10(2), places=9)
        self.assertAlmostEqual(full - half, 3.0103, places=4)

    def test_non_positive_bandwidth(self):
        with self.assertRaises(ValueError):
            noise_power_from_psd(-161.0, 0.0, 4)


class SystemConfigSerializerTests(SimpleTestCase):
    def test_defaults(self):
        serializer = SystemConfigSerializer(data={})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.save(), SystemConfig())

    def test_dbm_boundary(self):
        serializer = SystemConfigSerializer(data={'rho_dbm': 20.0, 'rho_p_dbm': 0.0})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        config = serializer.save()
        self.assertAlmostEqual(config.rho, 100.0)
        self.assertAlmostEqual(config.rho_p, 1.0)

    def test_noise_from_psd(self):
        serializer = SystemConfigSerializer(data={
            'Nt': 16, 'Nr': 2, 'NRFt': 4, 'NRFr': 1, 'Ns': 1, 'K': 32, 'Kp': 8, 'M': 4, 'L': 8,
            'B': 64, 'D': 16, 'V': 8,
            'noise_psd_dbm_per_hz': -161.0, 'bandwidth_hz': 100e6,
        })
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertAlmostEqual(serializer.save().sigma_n2, noise_power_from_psd(-161.0, 100e6, 32))

    def test_invalid_dimensions_are_reported(self):
        serializer = SystemConfigSerializer(data={'Ns': 5})
        self.assertFalse(serializer.is_valid())
        self.assertIn('system', serializer.errors)

    def test_conflicting_power_units(self):
        serializer = SystemConfigSerializer(data={'rho': 1.0, 'rho_dbm': 0.0})
        self.assertFalse(serializer.is_valid())
        self.assertIn('rho_dbm', serializer.errors)


class ComplexPackingTests(SimpleTestCase):
    def test_column_major_real_then_imaginary(self):
        matrix = torch.tensor([[1 + 5j, 2 + 6j], [3 + 7j, 4 + 8j]], dtype=torch.complex128)
        packed = pack_complex(matrix)
        self.assertEqual(packed.tolist(), [1.0, 3.0, 2.0, 4.0, 5.0, 7.0, 6.0, 8.0])

    def test_unpack_inverts_pack(self):
        vector = torch.randn(3, 2 * 4 * 2, dtype=torch.float64)
        self.assertTrue(torch.equal(pack_complex(unpack_complex(vector, 4, 2)), vector))


class SettingsTests(SimpleTestCase):
    def test_local_settings_can_collect_static_files(self):
        self.assertTrue(settings.STATIC_ROOT)

    def test_production_logs_epochs_by_default(self):
        environment = {'SECRET_KEY': 'test', 'ALLOWED_HOSTS': 'localhost', 'DATABASE_URL': 'sqlite:///:memory:'}
        with mock.patch.dict(os.environ, environment):
            os.environ.pop('HBF_LOG_LEVEL', None)
            production = importlib.import_module('hbf_lab.settings.production')
            production = importlib.reload(production)
        self.assertEqual(production.LOGGING['root']['level'], 'INFO')
        self.assertTrue(production.STATIC_ROOT)
