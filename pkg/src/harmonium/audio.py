"""Waveform I/O and signal conditioning.

Only RIFF/WAVE PCM 16-bit mono is accepted; everything else is a hard
error so that malformed corpora fail loudly instead of producing silent
garbage downstream.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter


class WavFormatError(ValueError):
    """A WAV file could not be decoded as PCM 16-bit mono."""


class SampleRangeError(ValueError):
    """Samples passed to write_wav fall outside [-1, 1]."""


@dataclass(frozen=True, eq=False)
class AudioBuffer:
    """Mono waveform plus its sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.samples.ndim != 1:
            raise ValueError("AudioBuffer expects a 1-D sample array")
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise ValueError("AudioBuffer samples must all be finite")

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def slice_seconds(self, start: float, end: float) -> "AudioBuffer":
        i0 = max(0, int(round(start * self.sample_rate)))
        i1 = min(self.samples.size, int(round(end * self.sample_rate)))
        return AudioBuffer(self.samples[i0:i1].copy(), self.sample_rate)


def _quantize_pcm16(samples: np.ndarray) -> np.ndarray:
    """Round-half-away-from-zero to int16; +1.0 saturates to 32767."""
    scaled = samples * 32768.0
    q = np.where(scaled >= 0, np.floor(scaled + 0.5), np.ceil(scaled - 0.5))
    # int16 has no +32768: full-scale positive maps onto the top code.
    return np.clip(q, -32768, 32767).astype(np.int16)


def read_wav(path) -> AudioBuffer:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise WavFormatError(f"{path}: not a RIFF/WAVE file")
    pos = 12
    fmt = None
    payload = None
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if cid == b"fmt ":
            if len(body) < 16:
                raise WavFormatError(f"{path}: truncated fmt chunk")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data":
            if len(body) < size:
                raise WavFormatError(
                    f"{path}: truncated data chunk ({len(body)} of {size} bytes)")
            payload = body
        pos += 8 + size + (size & 1)
    if fmt is None:
        raise WavFormatError(f"{path}: missing fmt chunk")
    audio_format, channels, rate, _, _, bits = fmt
    if audio_format != 1:
        raise WavFormatError(
            f"{path}: unsupported encoding (format tag {audio_format}, PCM required)")
    if channels != 1:
        raise WavFormatError(f"{path}: {channels} channels, mono required")
    if bits != 16:
        raise WavFormatError(f"{path}: {bits}-bit samples, 16-bit required")
    if payload is None:
        raise WavFormatError(f"{path}: missing data chunk")
    ints = np.frombuffer(payload[:len(payload) - len(payload) % 2], dtype="<i2")
    return AudioBuffer(ints.astype(np.float64) / 32768.0, int(rate))


def write_wav(buffer: AudioBuffer, path) -> None:
    x = buffer.samples
    if x.size and (np.max(x) > 1.0 or np.min(x) < -1.0):
        worst = x[np.argmax(np.abs(x))]
        raise SampleRangeError(f"sample {worst} outside [-1, 1]; refusing to clip")
    pcm = _quantize_pcm16(x).astype("<i2").tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(pcm)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, buffer.sample_rate,
                                    buffer.sample_rate * 2, 2, 16)
    header += b"data" + struct.pack("<I", len(pcm))
    with open(path, "wb") as fh:
        fh.write(header + pcm)


def resample(buffer: AudioBuffer, target_rate: int,
             half_width: int = 16, kaiser_beta: float = 8.0) -> AudioBuffer:
    """Band-limited windowed-sinc resampling (Kaiser window)."""
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    if target_rate == buffer.sample_rate:
        return AudioBuffer(buffer.samples.copy(), target_rate)
    x = buffer.samples
    ratio = target_rate / buffer.sample_rate
    n_out = int(round(x.size * ratio))
    if n_out == 0 or x.size == 0:
        return AudioBuffer(np.zeros(0), target_rate)
    fc = min(1.0, ratio)                       # cutoff relative to source Nyquist
    half = int(math.ceil(half_width / fc))     # widen kernel when downsampling
    t = np.arange(n_out) / ratio               # output instants in input-sample units
    base = np.floor(t).astype(np.int64)
    offsets = np.arange(-half + 1, half + 1)
    out = np.empty(n_out)
    pad = np.concatenate([np.zeros(half + 1), x, np.zeros(half + 1)])
    chunk = max(1, 2_000_000 // (2 * half))
    for lo in range(0, n_out, chunk):
        hi = min(n_out, lo + chunk)
        idx = base[lo:hi, None] + offsets[None, :]
        u = t[lo:hi, None] - idx
        win_arg = np.clip(u / half, -1.0, 1.0)
        w = np.i0(kaiser_beta * np.sqrt(1.0 - win_arg * win_arg)) / np.i0(kaiser_beta)
        kernel = fc * np.sinc(fc * u) * w
        out[lo:hi] = np.einsum("ij,ij->i", pad[idx + half + 1], kernel)
    return AudioBuffer(out, target_rate)


def emphasis_alpha(cutoff: float, sample_rate: int) -> float:
    return math.exp(-2.0 * math.pi * cutoff / sample_rate)


def _check_cutoff(buffer: AudioBuffer, cutoff: float) -> None:
    if not 0 < cutoff < buffer.sample_rate / 2:
        raise ValueError(
            f"cutoff {cutoff} Hz outside (0, {buffer.sample_rate / 2}) Hz")


def apply_pre_emphasis(samples: np.ndarray, alpha: float) -> np.ndarray:
    y = np.asarray(samples, dtype=np.float64).copy()
    if y.size > 1:
        y[1:] -= alpha * y[:-1]
    return y


def pre_emphasis(buffer: AudioBuffer, cutoff: float = 50.0) -> AudioBuffer:
    """First-difference filter y[n] = x[n] - alpha*x[n-1], alpha from cutoff."""
    _check_cutoff(buffer, cutoff)
    alpha = emphasis_alpha(cutoff, buffer.sample_rate)
    return AudioBuffer(apply_pre_emphasis(buffer.samples, alpha), buffer.sample_rate)


def de_emphasis(buffer: AudioBuffer, cutoff: float = 50.0) -> AudioBuffer:
    """Exact inverse of pre_emphasis at the same cutoff."""
    _check_cutoff(buffer, cutoff)
    alpha = emphasis_alpha(cutoff, buffer.sample_rate)
    y = lfilter([1.0], [1.0, -alpha], buffer.samples)
    return AudioBuffer(y, buffer.sample_rate)
