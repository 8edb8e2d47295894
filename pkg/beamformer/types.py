from dataclasses import dataclass

import torch


def _finite(tensor):
    values = torch.view_as_real(tensor) if tensor.is_complex() else tensor
    return bool(torch.isfinite(values).all())


@dataclass
class NodeStates:
    """c: (..., K, dim_c) digital-node states; v: (..., dim_v) analog-node state."""
    c: torch.Tensor
    v: torch.Tensor

    def check(self, K):
        if self.c.shape[-2] != K:
            raise ValueError(f"Expected {K} digital node states, got {self.c.shape[-2]}")
        if not (_finite(self.c) and _finite(self.v)):
            raise ValueError("Node states contain non-finite entries")


@dataclass
class HybridBeamformer:
    F_RF: torch.Tensor
    F_BB: torch.Tensor

    def precoders(self):
        """F_RF F_BB[k] for every subchannel, (..., K, Nt, Ns)."""
        return self.F_RF.unsqueeze(-3) @ self.F_BB

    def total_power(self):
        return (self.precoders().abs() ** 2).sum(dim=(-3, -2, -1))

    def check_constraints(self, config, rtol=1e-6):
        Nt = self.F_RF.shape[-2]
        if not torch.allclose(self.F_RF.abs() ** 2, torch.full_like(self.F_RF.real, 1.0 / Nt), rtol=rtol, atol=0):
            raise ValueError("Analog beamformer entries are not of modulus 1/sqrt(Nt)")
        target = config.K * config.Ns
        power = self.total_power()
        if not torch.allclose(power, torch.full_like(power, float(target)), rtol=rtol, atol=0):
            raise ValueError(f"Total transmit power {power.max().item():.6g} differs from K*Ns={target}")


@dataclass
class HybridCombiner:
    W_RF: torch.Tensor
    W_BB: torch.Tensor

    def combiners(self):
        return self.W_RF.unsqueeze(-3) @ self.W_BB

    def check_constraints(self, config, rtol=1e-6):
        Nr = self.W_RF.shape[-2]
        if not torch.allclose(self.W_RF.abs() ** 2, torch.full_like(self.W_RF.real, 1.0 / Nr), rtol=rtol, atol=0):
            raise ValueError("Analog combiner entries are not of modulus 1/sqrt(Nr)")
