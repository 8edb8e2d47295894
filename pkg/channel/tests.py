import struct
import tempfile
from pathlib import Path
from unittest import mock

import numpy as np
from django.test import SimpleTestCase

from core.config import SystemConfig
from .generators import ClusterParams, generate_clustered_channel, generate_dataset
from .serializers import ClusterParamsSerializer
from .storage import HEADER, DatasetFormatError, load_dataset, save_dataset


def small_config(**overrides):
    fields = dict(Nt=16, Nr=2, NRFt=4, NRFr=1, Ns=1, K=8, Kp=4, M=2, L=4, B=16, D=4, V=4)
    fields.update(overrides)
    return SystemConfig(**fields)


class ClusteredChannelTests(SimpleTestCase):
    def test_single_path_without_delay_is_flat(self):
        params = ClusterParams(num_clusters=1, rays_per_cluster=1, max_delay_s=0.0)
        H = generate_clustered_channel(small_config(), params, seed=3).H
        for k in range(1, H.shape[0]):
            np.testing.assert_array_equal(H[k], H[0])

    def test_fixed_seed_is_deterministic(self):
        config, params = small_config(), ClusterParams()
        first = generate_clustered_channel(config, params, seed=11).H
        second = generate_clustered_channel(config, params, seed=11).H
        np.testing.assert_array_equal(first, second)

    def test_dataset_refuses_mismatched_realizations(self):
        config = small_config()
        other = generate_clustered_channel(small_config(Nr=4), ClusterParams(), seed=0)
        with mock.patch('channel.generators.generate_clustered_channel', return_value=other):
            with self.assertRaises(ValueError):
                generate_dataset(config, ClusterParams(), 2)

    def test_shape_and_finiteness(self):
        config = small_config()
        realization = generate_clustered_channel(config, ClusterParams(), seed=0)
        realization.check_shape(config)
        self.assertTrue(np.all(np.isfinite(realization.H)))

    def test_average_power_matches_normalisation(self):
        config = small_config(K=4, Kp=4, M=1)
        params = ClusterParams()
        power = np.array([
            np.sum(np.abs(generate_clustered_channel(config, params, seed=s).H) ** 2, axis=(1, 2))
            for s in range(10_000)
        ])
        per_subchannel = power.mean(axis=0)
        for value in per_subchannel:
            self.assertLess(abs(value - 32.0) / 32.0, 0.05)

    def test_path_loss_scales_power(self):
        config = small_config()
        base = generate_clustered_channel(config, ClusterParams(), seed=5).H
        lossy = generate_clustered_channel(config, ClusterParams(path_loss_db=20.0), seed=5).H
        np.testing.assert_allclose(lossy, base / 10.0, rtol=1e-12)

    def test_dataset_does_not_depend_on_jobs(self):
        config = small_config()
        np.testing.assert_array_equal(
            generate_dataset(config, ClusterParams(), 3, jobs=1),
            generate_dataset(config, ClusterParams(), 3, jobs=2),
        )

    def test_invalid_cluster_params(self):
        with self.assertRaises(ValueError):
            ClusterParams(num_clusters=0)
        with self.assertRaises(ValueError):
            ClusterParams(max_delay_s=-1e-9)

    def test_serializer_builds_params(self):
        serializer = ClusterParamsSerializer(data={'num_clusters': 2, 'path_loss_db': 110.0})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        params = serializer.save()
        self.assertEqual(params.num_clusters, 2)
        self.assertEqual(params.rays_per_cluster, 5)


class DatasetStorageTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = Path(self.tmp.name) / 'channels.hbfc'

    def tearDown(self):
        self.tmp.cleanup()

    def test_round_trip_is_exact(self):
        data = generate_dataset(small_config(), ClusterParams(), 4)
        save_dataset(self.path, data)
        np.testing.assert_array_equal(load_dataset(self.path), data)

    def test_file_size_follows_layout(self):
        data = np.zeros((1, 128, 4, 64), dtype=np.complex64)
        save_dataset(self.path, data)
        self.assertEqual(self.path.stat().st_size, HEADER.size + 2 * 4 * 128 * 4 * 64 * 1)

    def test_corrupted_magic(self):
        save_dataset(self.path, np.zeros((1, 2, 2, 2), dtype=np.complex64))
        raw = bytearray(self.path.read_bytes())
        raw[0:4] = b'XXXX'
        self.path.write_bytes(bytes(raw))
        with self.assertRaises(DatasetFormatError):
            load_dataset(self.path)

    def test_wrong_version(self):
        save_dataset(self.path, np.zeros((1, 2, 2, 2), dtype=np.complex64))
        raw = bytearray(self.path.read_bytes())
        raw[4:6] = struct.pack('<H', 9)
        self.path.write_bytes(bytes(raw))
        with self.assertRaises(DatasetFormatError):
            load_dataset(self.path)

    def test_truncated_body(self):
        save_dataset(self.path, np.ones((2, 2, 2, 2), dtype=np.complex64))
        self.path.write_bytes(self.path.read_bytes()[:-3])
        with self.assertRaises(DatasetFormatError):
            load_dataset(self.path)

    def test_shape_mismatch_against_config(self):
        save_dataset(self.path, np.zeros((1, 4, 2, 16), dtype=np.complex64))
        with self.assertRaises(DatasetFormatError):
            load_dataset(self.path, small_config())

    def test_externally_written_file_loads(self):
        values = (np.arange(2 * 8 * 2 * 16, dtype=np.float32) / 7.0).reshape(2 * 8 * 2 * 16 // 2, 2)
        header = struct.pack('<4sHHIIII', b'HBFC', 1, 0, 8, 2, 16, 1)
        self.path.write_bytes(header + values.astype('<f4').tobytes())
        loaded = load_dataset(self.path, small_config())
        expected = (values[:, 0] + 1j * values[:, 1]).reshape(1, 8, 2, 16)
        np.testing.assert_array_equal(loaded, expected.astype(np.complex64))
