"""Latent codes: 93 uniform z variables plus 7 binary feature variables.

The 7 bits give 2^7 = 128 distinct classes. Two encodings of a class
index are supported: plain binary (most-significant bit first, the
default) and one-hot over the first 7 indices.
"""
from __future__ import annotations

import torch

Z_DIM = 93
PHI_DIM = 7
N_CLASSES = 2 ** PHI_DIM

ENCODINGS = ("binary", "onehot")


def encode_word_index(index: int, encoding: str = "binary") -> list[int]:
    """7-bit code for a class index.

    binary: index 5 -> [0, 0, 0, 0, 1, 0, 1] (MSB first).
    onehot: index k < 7 -> bit k set; larger indices are rejected.
    """
    if encoding not in ENCODINGS:
        raise ValueError(f"unknown encoding {encoding!r}; choose from {ENCODINGS}")
    if not 0 <= index < N_CLASSES:
        raise ValueError(f"word index {index} outside [0, {N_CLASSES})")
    if encoding == "binary":
        return [(index >> (PHI_DIM - 1 - b)) & 1 for b in range(PHI_DIM)]
    if index >= PHI_DIM:
        raise ValueError(f"one-hot encoding supports indices < {PHI_DIM}, "
                         f"got {index}")
    return [1 if b == index else 0 for b in range(PHI_DIM)]


def sample_latent(batch: int, generator: torch.Generator | None = None,
                  word_indices=None, encoding: str = "binary"):
    """(z, phi) tensors of shape (batch, 93) and (batch, 7).

    z is fresh-uniform on the open interval (-1, 1) per sample; phi is
    random binary unless explicit word indices are given.
    """
    if batch < 1:
        raise ValueError("batch must be >= 1")
    z = torch.rand(batch, Z_DIM, generator=generator) * 2.0 - 1.0
    # torch.rand covers [0, 1); keep z strictly inside the open interval
    z = z.clamp(min=-1.0 + 1e-7)
    if word_indices is not None:
        if len(word_indices) != batch:
            raise ValueError(f"need {batch} word indices, got {len(word_indices)}")
        phi = torch.tensor([encode_word_index(int(i), encoding)
                            for i in word_indices], dtype=torch.float32)
    elif encoding == "binary":
        phi = (torch.rand(batch, PHI_DIM, generator=generator) < 0.5).float()
    else:
        indices = torch.randint(0, PHI_DIM, (batch,), generator=generator)
        phi = torch.nn.functional.one_hot(indices, PHI_DIM).float()
    return z, phi


def code_to_input(z: torch.Tensor, phi: torch.Tensor) -> torch.Tensor:
    """Concatenated generator input, shape (batch, 100)."""
    if z.shape[1] != Z_DIM or phi.shape[1] != PHI_DIM:
        raise ValueError(f"expected shapes (*, {Z_DIM}) and (*, {PHI_DIM}), "
                         f"got {tuple(z.shape)} and {tuple(phi.shape)}")
    return torch.cat([z, phi], dim=1)
