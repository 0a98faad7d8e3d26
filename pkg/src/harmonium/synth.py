"""Cascade formant synthesizer: ground-truth V1CV2 tokens.

A pulse-train glottal source with -12 dB/octave tilt is shaped by a
cascade of two-pole resonators per vowel. Tokens are vowel intervals
separated by a short low-amplitude noise burst standing in for the
consonant, with every interval labelled exactly in a TextGrid and every
formant target recorded in a manifest.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .audio import AudioBuffer
from .harmony import DEFAULT_INVENTORY, VowelInventory

PEAK_AMPLITUDE = 0.3
CONSONANT_LABEL = "C"
RAMP_S = 0.020
GAP_NOISE_DB = -30.0
TILT_HZ = 80.0

# Design targets per vowel: (F1, F2, F3) Hz. These are synthesis targets
# validated by extraction round-trip, not field measurements.
CANONICAL_TARGETS = {
    "i": (300.0, 2200.0, 2800.0),
    "e": (400.0, 2000.0, 2600.0),
    "E": (600.0, 1800.0, 2500.0),
    "a": (750.0, 1300.0, 2450.0),
    "O": (550.0, 900.0, 2400.0),
    "o": (450.0, 850.0, 2350.0),
    "U": (420.0, 1050.0, 2300.0),
    "u": (350.0, 800.0, 2250.0),
}
CANONICAL_BANDWIDTHS = (80.0, 90.0, 140.0)
# Fixed upper resonances so the rendered spectrum has as many poles as the
# analysis order expects; keeps LPC poles from wandering into F1/F2.
UPPER_TARGETS = ((3400.0, 250.0), (4500.0, 350.0))


@dataclass(frozen=True)
class VowelSpec:
    label: str
    f0: float
    duration: float
    targets: tuple  # ((freq, bw), ...) ascending in frequency
    end_targets: tuple | None = None  # linear ramp endpoints, same shape

    def __post_init__(self):
        if not 0 < self.f0 < 500:
            raise ValueError(f"f0 {self.f0} outside (0, 500) Hz")
        if self.duration < 0.050:
            raise ValueError(f"vowel duration {self.duration} below 50 ms")
        if not 3 <= len(self.targets) <= 5:
            raise ValueError("need 3-5 formant targets")
        freqs = [f for f, _ in self.targets]
        if sorted(freqs) != freqs:
            raise ValueError("targets must ascend in frequency")
        if self.end_targets is not None and len(self.end_targets) != len(self.targets):
            raise ValueError("end_targets must match targets in length")


@dataclass(frozen=True)
class TokenSpec:
    token_id: str
    vowels: tuple
    gap_s: float = 0.040
    sample_rate: int = 16000

    def __post_init__(self):
        if len(self.vowels) < 1:
            raise ValueError("token needs at least one vowel")
        if self.gap_s < 0.020:
            raise ValueError(f"gap {self.gap_s} below 20 ms")


def make_vowel_spec(label: str, f0: float = 120.0, duration: float = 0.2,
                    f1_shift: float = 0.0, jitter=None,
                    end_f1_shift: float | None = None) -> VowelSpec:
    """Canonical-target VowelSpec with optional F1 shift and per-formant jitter."""
    freqs = np.array(CANONICAL_TARGETS[label])
    if jitter is not None:
        freqs = freqs + np.asarray(jitter, dtype=float)
    freqs[0] += f1_shift
    targets = tuple(zip(freqs.tolist(), CANONICAL_BANDWIDTHS)) + UPPER_TARGETS
    end_targets = None
    if end_f1_shift is not None:
        end_freqs = freqs.copy()
        end_freqs[0] += end_f1_shift - f1_shift
        end_targets = tuple(zip(end_freqs.tolist(), CANONICAL_BANDWIDTHS)) + UPPER_TARGETS
    return VowelSpec(label=label, f0=f0, duration=duration,
                     targets=targets, end_targets=end_targets)


def resonator_coefficients(frequency: float, bandwidth: float, rate: float):
    c = -math.exp(-2.0 * math.pi * bandwidth / rate)
    b = 2.0 * math.exp(-math.pi * bandwidth / rate) * math.cos(2.0 * math.pi * frequency / rate)
    a = 1.0 - b - c
    return a, b, c


def resonator(signal, frequency: float, bandwidth: float, rate: float,
              end_frequency: float | None = None,
              end_bandwidth: float | None = None) -> np.ndarray:
    """Two-pole resonator with unity DC gain; targets may ramp linearly."""
    if not 0 < frequency < rate / 2:
        raise ValueError(f"frequency {frequency} outside (0, {rate / 2})")
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    x = np.asarray(signal, dtype=np.float64)
    if end_frequency is None and end_bandwidth is None:
        a, b, c = resonator_coefficients(frequency, bandwidth, rate)
        return lfilter([a], [1.0, -b, -c], x)
    f1 = frequency if end_frequency is None else end_frequency
    b1 = bandwidth if end_bandwidth is None else end_bandwidth
    if not 0 < f1 < rate / 2 or b1 <= 0:
        raise ValueError("ramp endpoint outside valid range")
    out = np.empty_like(x)
    zi = np.zeros(2)
    block = 64
    n = x.size
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        frac = (lo + hi) / 2.0 / max(1, n)
        f = frequency + (f1 - frequency) * frac
        bw = bandwidth + (b1 - bandwidth) * frac
        a, b, c = resonator_coefficients(f, bw, rate)
        out[lo:hi], zi = lfilter([a], [1.0, -b, -c], x[lo:hi], zi=zi)
    return out


def _glottal_source(f0: float, n: int, rate: int,
                    rng: np.random.Generator | None = None) -> np.ndarray:
    """Impulse train with -12 dB/oct tilt from two one-pole low-pass stages.

    A small aspiration-noise floor smooths the harmonic line spectrum so
    LPC analysis sees the envelope rather than individual harmonics.
    """
    src = np.zeros(n)
    period = rate / f0
    t = 0.0
    while t < n:
        src[int(t)] = 1.0
        t += period
    if rng is None:
        rng = np.random.default_rng(0)
    src += 0.02 * rng.standard_normal(n)
    g = math.exp(-2.0 * math.pi * TILT_HZ / rate)
    for _ in range(2):
        src = lfilter([1.0 - g], [1.0, -g], src)
    return src


def render_vowel(spec: VowelSpec, rate: int,
                 rng: np.random.Generator | None = None) -> np.ndarray:
    n = int(round(spec.duration * rate))
    y = _glottal_source(spec.f0, n, rate, rng)
    for k, (freq, bw) in enumerate(spec.targets):
        if spec.end_targets is not None:
            ef, ebw = spec.end_targets[k]
            y = resonator(y, freq, bw, rate, end_frequency=ef, end_bandwidth=ebw)
        else:
            y = resonator(y, freq, bw, rate)
    ramp = int(round(RAMP_S * rate))
    if ramp and n >= 2 * ramp:
        env = np.ones(n)
        edge = 0.5 - 0.5 * np.cos(np.pi * np.arange(ramp) / ramp)
        env[:ramp] = edge
        env[-ramp:] = edge[::-1]
        y = y * env
    peak = np.max(np.abs(y))
    return y / peak if peak > 0 else y


def synthesize_token(spec: TokenSpec, rng: np.random.Generator | None = None):
    """Render one token; returns (AudioBuffer, TextGrid, manifest entry)."""
    from .textgrid import Interval, IntervalTier, TextGrid

    if rng is None:
        rng = np.random.default_rng(0)
    rate = spec.sample_rate
    gap_amp = 10.0 ** (GAP_NOISE_DB / 20.0)
    pieces = []
    intervals = []
    entry_vowels = []
    t = 0.0
    for i, vowel in enumerate(spec.vowels):
        if i > 0:
            gap_n = int(round(spec.gap_s * rate))
            pieces.append(gap_amp * rng.standard_normal(gap_n))
            t_next = t + gap_n / rate
            intervals.append(Interval(t, t_next, CONSONANT_LABEL))
            t = t_next
        samples = render_vowel(vowel, rate, rng)
        pieces.append(samples)
        t_next = t + samples.size / rate
        intervals.append(Interval(t, t_next, vowel.label))
        entry_vowels.append({
            "label": vowel.label,
            "start": t,
            "end": t_next,
            "f0": vowel.f0,
            "targets": [list(pair) for pair in vowel.targets],
            "end_targets": ([list(pair) for pair in vowel.end_targets]
                            if vowel.end_targets is not None else None),
        })
        t = t_next
    samples = np.concatenate(pieces)
    peak = np.max(np.abs(samples))
    if peak > 0:
        samples = samples * (PEAK_AMPLITUDE / peak)
    total = samples.size / rate
    # snap the final interval edge to the rendered duration
    intervals[-1] = Interval(intervals[-1].xmin, total, intervals[-1].text)
    grid = TextGrid(0.0, total, [IntervalTier("phones", 0.0, total, intervals)])
    entry = {
        "token_id": spec.token_id,
        "word": "C".join(v.label for v in spec.vowels),
        "sample_rate": rate,
        "duration": total,
        "vowels": entry_vowels,
    }
    return AudioBuffer(samples, rate), grid, entry


@dataclass
class SynthManifest:
    rule: str
    shift_hz: float
    noise_sd_hz: float
    seed: int
    tokens: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "shift_hz": self.shift_hz,
            "noise_sd_hz": self.noise_sd_hz,
            "seed": self.seed,
            "tokens": self.tokens,
        }


HARMONY_RULES = ("none", "regressive", "progressive")


def make_token_specs(seed: int, n_tokens: int, rule: str, shift: float,
                     noise_sd: float,
                     inventory: VowelInventory = DEFAULT_INVENTORY,
                     triggers: tuple = ("i", "u"),
                     sample_rate: int = 16000):
    """Deterministic V1CV2 token specs with the harmony rule injected.

    Under rule=regressive, V1's F1 target drops by `shift` whenever V2 is
    a trigger; rule=progressive is the mirror image. Gaussian jitter with
    SD `noise_sd` is applied to every formant target of every vowel.
    """
    if n_tokens < 1:
        raise ValueError("n_tokens must be >= 1")
    if shift < 0:
        raise ValueError("shift must be >= 0")
    if rule not in HARMONY_RULES:
        raise ValueError(f"unknown harmony rule {rule!r}; choose from {HARMONY_RULES}")
    rng = np.random.default_rng(seed)
    symbols = sorted(inventory.symbols())
    specs = []
    manifest = SynthManifest(rule=rule, shift_hz=shift, noise_sd_hz=noise_sd, seed=seed)
    for i in range(n_tokens):
        v1, v2 = rng.choice(symbols, size=2, replace=True)
        f0 = float(rng.uniform(100.0, 160.0))
        durations = rng.uniform(0.18, 0.22, size=2)
        shifts = [0.0, 0.0]
        if rule == "regressive" and v2 in triggers:
            shifts[0] = -shift
        elif rule == "progressive" and v1 in triggers:
            shifts[1] = -shift
        vowels = []
        for k, label in enumerate((v1, v2)):
            jitter = rng.normal(0.0, noise_sd, size=3) if noise_sd > 0 else None
            vowels.append(make_vowel_spec(label, f0=f0, duration=float(durations[k]),
                                          f1_shift=shifts[k], jitter=jitter))
        harmonic = (rule == "regressive" and v2 in triggers) or \
                   (rule == "progressive" and v1 in triggers)
        spec = TokenSpec(token_id=f"tok{i:04d}", vowels=tuple(vowels),
                         sample_rate=sample_rate)
        specs.append((spec, harmonic))
    return specs, manifest, rng


def generate_corpus(seed: int, n_tokens: int, rule: str, shift: float,
                    noise_sd: float, out_dir,
                    inventory: VowelInventory = DEFAULT_INVENTORY,
                    triggers: tuple = ("i", "u"),
                    sample_rate: int = 16000):
    """Write WAV + TextGrid pairs and return (SynthManifest, corpus rows)."""
    import json
    import os

    from .audio import write_wav
    from .textgrid import write_textgrid

    specs, manifest, rng = make_token_specs(
        seed, n_tokens, rule, shift, noise_sd,
        inventory=inventory, triggers=triggers, sample_rate=sample_rate)
    os.makedirs(out_dir, exist_ok=True)
    corpus_rows = []
    for spec, harmonic in specs:
        buffer, grid, entry = synthesize_token(spec, rng=rng)
        wav_path = os.path.join(out_dir, f"{spec.token_id}.wav")
        grid_path = os.path.join(out_dir, f"{spec.token_id}.TextGrid")
        write_wav(buffer, wav_path)
        write_textgrid(grid, grid_path)
        entry["harmonic"] = "harmonic" if harmonic else "non-harmonic"
        manifest.tokens.append(entry)
        corpus_rows.append({
            "audio_path": wav_path,
            "textgrid_path": grid_path,
            "token_id": spec.token_id,
            "word": entry["word"],
            "harmonic": entry["harmonic"],
            "speaker": "synth",
            "source": "training",
        })
    with open(os.path.join(out_dir, "ground_truth.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest, corpus_rows
