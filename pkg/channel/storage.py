"""
Binary channel dataset format.

Header (little-endian, 24 bytes): magic b'HBFC', uint16 version, uint16
reserved, uint32 K, uint32 Nr, uint32 Nt, uint32 sample count. The body is
float32 values, real and imaginary interleaved, in (sample, k, r, t) order.
Externally produced data (e.g. exported ray-tracing channels) loads the
same way as long as it follows this layout.
"""
import logging
import struct
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

MAGIC = b'HBFC'
VERSION = 1
HEADER = struct.Struct('<4sHHIIII')


class DatasetFormatError(ValueError):
    pass


def save_dataset(path, realizations):
    """`realizations` has shape (N, K, Nr, Nt); values are stored as complex64."""
    data = np.asarray(realizations)
    if data.ndim != 4:
        raise ValueError(f"Expected (N, K, Nr, Nt) channels, got shape {data.shape}")
    num_samples, K, Nr, Nt = data.shape

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('wb') as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, 0, K, Nr, Nt, num_samples))
        fh.write(data.astype('<c8').tobytes())
    logger.info("Wrote %d channel samples to %s", num_samples, path)
    return path


def load_dataset(path, config=None):
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.size:
        raise DatasetFormatError("Truncated header")

    magic, version, _, K, Nr, Nt, num_samples = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise DatasetFormatError(f"Bad magic bytes {magic!r}")
    if version != VERSION:
        raise DatasetFormatError(f"Unsupported dataset version {version}")

    expected = 8 * K * Nr * Nt * num_samples
    body = raw[HEADER.size:]
    if len(body) != expected:
        raise DatasetFormatError(f"Truncated body: expected {expected} bytes, found {len(body)}")

    if config is not None and (K, Nr, Nt) != (config.K, config.Nr, config.Nt):
        raise DatasetFormatError(
            f"Dataset shape (K={K}, Nr={Nr}, Nt={Nt}) does not match config "
            f"(K={config.K}, Nr={config.Nr}, Nt={config.Nt})"
        )

    return np.frombuffer(body, dtype='<c8').reshape(num_samples, K, Nr, Nt).astype(np.complex64)
