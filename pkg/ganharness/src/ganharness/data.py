"""Training data: directories of mono 16 kHz WAV files, center-cropped
or zero-padded to exactly 16384 samples."""
from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from harmonium.audio import read_wav

from .models import WAVEFORM_LEN


def fit_length(samples: np.ndarray, length: int = WAVEFORM_LEN) -> np.ndarray:
    if samples.size >= length:
        start = (samples.size - length) // 2
        return samples[start:start + length]
    pad = length - samples.size
    return np.pad(samples, (pad // 2, pad - pad // 2))


def load_corpus(directory) -> torch.Tensor:
    """All .wav files under a directory as a (n, 16384) float tensor."""
    paths = sorted(Path(directory).glob("*.wav"))
    if not paths:
        raise FileNotFoundError(f"no .wav files in {directory}")
    clips = [fit_length(read_wav(p).samples) for p in paths]
    return torch.tensor(np.stack(clips), dtype=torch.float32)


def sample_batch(corpus: torch.Tensor, batch: int,
                 generator: torch.Generator | None = None) -> torch.Tensor:
    index = torch.randint(0, corpus.shape[0], (batch,), generator=generator)
    return corpus[index]
