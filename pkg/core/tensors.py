"""
Complex <-> real conventions shared by every module.

A complex matrix X (rows x cols) is vectorised as vec([Re{X}, Im{X}]): the
real plane first, then the imaginary plane, each stacked column by column.
Leading batch dimensions are carried through untouched.
"""
import torch

REAL_DTYPE = torch.float64
COMPLEX_DTYPE = torch.complex128


def pack_complex(matrix):
    """(..., rows, cols) complex -> (..., 2*rows*cols) real."""
    real = matrix.real.transpose(-1, -2).reshape(*matrix.shape[:-2], -1)
    imag = matrix.imag.transpose(-1, -2).reshape(*matrix.shape[:-2], -1)
    return torch.cat([real, imag], dim=-1)


def unpack_complex(vector, rows, cols):
    """Inverse of pack_complex."""
    size = rows * cols
    if vector.shape[-1] != 2 * size:
        raise ValueError(f"Expected a trailing dimension of {2 * size}, got {vector.shape[-1]}")
    lead = vector.shape[:-1]
    real = vector[..., :size].reshape(*lead, cols, rows).transpose(-1, -2)
    imag = vector[..., size:].reshape(*lead, cols, rows).transpose(-1, -2)
    return torch.complex(real, imag)


def to_planes(tensor):
    """Stack real and imaginary planes on a new axis just before the last two."""
    return torch.stack([tensor.real, tensor.imag], dim=-3)


def from_planes(planes):
    return torch.complex(planes[..., 0, :, :], planes[..., 1, :, :])


def hermitian(matrix):
    return matrix.transpose(-1, -2).conj()
