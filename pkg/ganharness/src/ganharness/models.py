"""Generator, discriminator, and Q-network.

The generator projects the 100-dim code to a (channels, 16) map and
upsamples through 5 transposed 1-D convolutions (stride 4, kernel 25),
halving the channel width at each stage down to a single tanh-squashed
waveform of exactly 16384 samples. Discriminator and Q-network mirror
the ladder with strided convolutions.
"""
from __future__ import annotations

import torch
from torch import nn

from .latent import PHI_DIM, Z_DIM, code_to_input

WAVEFORM_LEN = 16384
N_STAGES = 5
SEED_LEN = 16           # 16 * 4^5 = 16384
KERNEL = 25
STRIDE = 4


def _stage_channels(width: int) -> list[int]:
    """Channel widths halving from the projection width down to 1."""
    channels = [width // 2 ** i for i in range(N_STAGES)]
    if channels[-1] < 2 or any(c % 2 and c > 1 for c in channels):
        raise ValueError(f"projection width {width} must halve cleanly "
                         f"through {N_STAGES} stages (>= 32, power of two)")
    return channels + [1]


class Generator(nn.Module):
    def __init__(self, width: int = 64):
        super().__init__()
        channels = _stage_channels(width)
        self.width = width
        self.project = nn.Linear(Z_DIM + PHI_DIM, channels[0] * SEED_LEN)
        stages = []
        for c_in, c_out in zip(channels[:-1], channels[1:]):
            stages.append(nn.ConvTranspose1d(
                c_in, c_out, KERNEL, stride=STRIDE, padding=11,
                output_padding=1))
        self.stages = nn.ModuleList(stages)

    def forward(self, z: torch.Tensor, phi: torch.Tensor) -> torch.Tensor:
        # leaky activations: narrow toy stages are prone to dying otherwise
        x = torch.nn.functional.leaky_relu(
            self.project(code_to_input(z, phi)), 0.2)
        x = x.view(x.shape[0], -1, SEED_LEN)
        for stage in self.stages[:-1]:
            x = torch.nn.functional.leaky_relu(stage(x), 0.2)
        x = torch.tanh(self.stages[-1](x))
        return x.squeeze(1)


class _ConvTrunk(nn.Module):
    """Shared strided-convolution ladder for discriminator and Q-network."""

    def __init__(self, width: int):
        super().__init__()
        channels = list(reversed(_stage_channels(width)))
        stages = []
        for c_in, c_out in zip(channels[:-1], channels[1:]):
            stages.append(nn.Conv1d(c_in, c_out, KERNEL, stride=STRIDE,
                                    padding=11))
        self.stages = nn.ModuleList(stages)
        self.out_features = channels[-1] * SEED_LEN

    def forward(self, waveform: torch.Tensor) -> torch.Tensor:
        if waveform.shape[-1] != WAVEFORM_LEN:
            raise ValueError(f"expected waveforms of length {WAVEFORM_LEN}, "
                             f"got {waveform.shape[-1]}")
        x = waveform.unsqueeze(1) if waveform.dim() == 2 else waveform
        for stage in self.stages:
            x = torch.nn.functional.leaky_relu(stage(x), 0.2)
        return x.flatten(1)


class Discriminator(nn.Module):
    def __init__(self, width: int = 64):
        super().__init__()
        self.trunk = _ConvTrunk(width)
        self.head = nn.Linear(self.trunk.out_features, 1)

    def forward(self, waveform: torch.Tensor) -> torch.Tensor:
        return self.head(self.trunk(waveform)).squeeze(1)


class QNetwork(nn.Module):
    """Per-bit logits recovering phi from a waveform."""

    def __init__(self, width: int = 64):
        super().__init__()
        self.trunk = _ConvTrunk(width)
        self.head = nn.Linear(self.trunk.out_features, PHI_DIM)

    def forward(self, waveform: torch.Tensor) -> torch.Tensor:
        return self.head(self.trunk(waveform))
