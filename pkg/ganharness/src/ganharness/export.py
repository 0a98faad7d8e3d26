"""Export generated audio as 16 kHz PCM16 WAVs plus a code sidecar."""
from __future__ import annotations

import csv
from pathlib import Path

import torch

from harmonium.audio import AudioBuffer, write_wav

from .latent import sample_latent
from .models import WAVEFORM_LEN

SAMPLE_RATE = 16000
SIDECAR_NAME = "codes.csv"


def export_generated(trainer, n: int, out_dir, seed: int = 0) -> list[Path]:
    """Write n generated WAVs and a sidecar mapping filename -> phi code."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = torch.Generator().manual_seed(seed)
    paths = []
    rows = []
    generator = trainer.generator
    generator.eval()
    with torch.no_grad():
        for lo in range(0, n, 32):
            batch = min(32, n - lo)
            z, phi = sample_latent(batch, rng,
                                   encoding=trainer.config.encoding)
            waves = generator(z, phi).clamp(-1.0, 1.0)
            for k in range(batch):
                name = f"gen_{lo + k:04d}.wav"
                path = out_dir / name
                samples = waves[k].numpy().astype(float)
                assert samples.size == WAVEFORM_LEN
                write_wav(AudioBuffer(samples, SAMPLE_RATE), path)
                bits = "".join(str(int(b)) for b in phi[k].tolist())
                rows.append((name, bits, int(bits, 2)))
                paths.append(path)
    with open(out_dir / SIDECAR_NAME, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["filename", "phi", "word_index"])
        writer.writerows(rows)
    return paths
