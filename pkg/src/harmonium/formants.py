"""LPC formant extraction: ten-point tracks per vowel segment.

The measurement protocol: resample to twice the formant ceiling,
pre-emphasize, then run Burg LPC on Gaussian-windowed frames centered at
ten equidistant instants strictly inside the segment. Per-frame pole
angles/radii give formant frequencies and bandwidths; track means are
taken over the frames where the formant was detected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .audio import AudioBuffer, emphasis_alpha, apply_pre_emphasis, resample


class BurgError(ValueError):
    """Frame unusable for Burg recursion (all zeros or order too high)."""


class RootFindingError(RuntimeError):
    """Companion-matrix eigenvalue iteration failed to converge."""


@dataclass(frozen=True)
class VowelSegment:
    label: str
    start: float
    end: float
    token_id: str = ""

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"segment start {self.start} must precede end {self.end}")

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class FormantFrame:
    time: float
    formants: tuple  # ((frequency_hz, bandwidth_hz), ...) ascending in frequency

    def frequency(self, k: int) -> float | None:
        """k-th formant frequency (1-based), or None if undetected."""
        if len(self.formants) >= k:
            return self.formants[k - 1][0]
        return None


@dataclass(frozen=True)
class FormantTrack:
    segment: VowelSegment
    frames: tuple
    mean_f1: float
    mean_f2: float
    mean_f3: float
    n_valid_frames: int
    reliable: bool


@dataclass(frozen=True)
class FormantConfig:
    max_formant_hz: float = 5500.0
    num_formants: int = 5
    window_s: float = 0.025
    pre_emphasis_hz: float = 50.0
    max_bandwidth_hz: float = 400.0
    n_points: int = 10
    min_valid_frames: int = 6
    min_segment_s: float = 0.030

    @property
    def analysis_rate(self) -> int:
        return int(round(2 * self.max_formant_hz))

    @property
    def lpc_order(self) -> int:
        return 2 * self.num_formants


def burg(frame, order: int):
    """Burg AR estimate.

    Returns (coefficients, residual_power) for the prediction model
    x[n] ~ sum_k a[k] * x[n-k]; the whitening polynomial is then
    1 - sum_k a[k] z^-k and is guaranteed minimum phase.
    """
    x = np.asarray(frame, dtype=np.float64)
    n = x.size
    if order < 1:
        raise BurgError(f"order must be >= 1, got {order}")
    if n <= order:
        raise BurgError(f"frame length {n} must exceed order {order}")
    if not np.any(x):
        raise BurgError("all-zero frame")
    ef = x.copy()
    eb = x.copy()
    a = np.zeros(0)
    power = float(x @ x) / n
    for _ in range(order):
        f = ef[1:]
        b = eb[:-1]
        den = float(f @ f + b @ b)
        k = 0.0 if den <= 0.0 else -2.0 * float(f @ b) / den
        a = np.concatenate([a + k * a[::-1], [k]]) if a.size else np.array([k])
        power *= max(0.0, 1.0 - k * k)
        ef, eb = f + k * b, b + k * f
    # a holds the 1 + sum a_i z^-i convention; flip sign for the model form.
    return -a, power


def polynomial_roots(coefficients, max_iter: int = 200) -> np.ndarray:
    """All roots of a real polynomial, highest-degree coefficient first.

    Companion-matrix eigenvalues, cleaned so complex roots come in exact
    conjugate pairs. Residuals are checked against the coefficient scale.
    """
    c = np.asarray(coefficients, dtype=np.float64)
    if c.size < 2:
        raise ValueError("need degree >= 1")
    if c[0] == 0.0:
        raise ValueError("leading coefficient must be nonzero")
    monic = c / c[0]
    n = monic.size - 1
    comp = np.zeros((n, n))
    comp[0, :] = -monic[1:]
    if n > 1:
        comp[np.arange(1, n), np.arange(0, n - 1)] = 1.0
    roots = np.linalg.eigvals(comp)
    # LAPACK on a real matrix returns conjugate pairs, but enforce exactness.
    roots = _pair_conjugates(roots)
    scale = float(np.max(np.abs(c)))
    resid = np.abs(np.polyval(c, roots))
    # polyval residual grows with |z|^n; normalize by that factor too.
    denom = scale * np.maximum(1.0, np.abs(roots)) ** n
    worst = float(np.max(resid / denom))
    if worst > 1e-6:
        raise RootFindingError(f"root residual {worst:.3e} exceeds 1e-6")
    return roots


def _pair_conjugates(roots: np.ndarray) -> np.ndarray:
    order = np.lexsort((roots.imag, roots.real))
    rl = list(roots[order])
    used = [False] * len(rl)
    out = []
    for i, r in enumerate(rl):
        if used[i]:
            continue
        used[i] = True
        if abs(r.imag) < 1e-12 * max(1.0, abs(r)):
            out.append(complex(r.real, 0.0))
            continue
        best, best_d = -1, math.inf
        for j in range(i + 1, len(rl)):
            if not used[j]:
                d = abs(rl[j] - r.conjugate())
                if d < best_d:
                    best, best_d = j, d
        out.append(complex(r))
        if best >= 0 and best_d <= 1e-8 * max(1.0, abs(r)):
            used[best] = True
            out.append(complex(r).conjugate())
    return np.array(out, dtype=np.complex128)


def roots_to_formants(roots, analysis_rate: float, max_bandwidth: float,
                      max_count: int = 5) -> tuple:
    """Map stable LPC poles to (frequency, bandwidth) pairs.

    F = arg(r) * rate / (2*pi), B = -ln|r| * rate / pi, keeping formants
    50 Hz inside either band edge with bandwidth below the cap.
    """
    if analysis_rate <= 0:
        raise ValueError("analysis_rate must be positive")
    nyquist = analysis_rate / 2.0
    found = []
    for r in np.asarray(roots):
        if r.imag <= 0.0:
            continue
        mag = abs(r)
        if mag <= 0.0 or mag >= 1.0:
            continue
        freq = math.atan2(r.imag, r.real) * analysis_rate / (2.0 * math.pi)
        bw = -math.log(mag) * analysis_rate / math.pi
        if 50.0 < freq < nyquist - 50.0 and bw < max_bandwidth:
            found.append((freq, bw))
    found.sort()
    return tuple(found[:max_count])


def _gaussian_window(length: int) -> np.ndarray:
    n = np.arange(length)
    center = (length - 1) / 2.0
    sigma = length / 6.0
    return np.exp(-0.5 * ((n - center) / sigma) ** 2)


def prepare_for_analysis(buffer: AudioBuffer, config: FormantConfig) -> AudioBuffer:
    """Resample to the analysis rate and pre-emphasize; do once per file."""
    conditioned = resample(buffer, config.analysis_rate)
    alpha = emphasis_alpha(config.pre_emphasis_hz, config.analysis_rate)
    return AudioBuffer(apply_pre_emphasis(conditioned.samples, alpha),
                       config.analysis_rate)


def analysis_instants(segment: VowelSegment, n_points: int) -> np.ndarray:
    """Equidistant proportions 5%, 15%, ..., 95% of the segment."""
    props = (np.arange(n_points) + 0.5) / n_points
    return segment.start + props * segment.duration


def track_formants(buffer: AudioBuffer, segment: VowelSegment,
                   config: FormantConfig = FormantConfig(),
                   prepared: AudioBuffer | None = None) -> FormantTrack:
    if segment.start < 0 or segment.end > buffer.duration + 1e-9:
        raise ValueError(
            f"segment [{segment.start}, {segment.end}] outside buffer "
            f"[0, {buffer.duration:.6f}]")
    if segment.duration < config.min_segment_s:
        raise ValueError(
            f"segment duration {segment.duration * 1e3:.1f} ms below "
            f"{config.min_segment_s * 1e3:.0f} ms minimum")
    if prepared is None:
        prepared = prepare_for_analysis(buffer, config)
    rate = prepared.sample_rate
    samples = prepared.samples
    win_len = int(round(config.window_s * rate))
    window = _gaussian_window(win_len)
    frames = []
    for t in analysis_instants(segment, config.n_points):
        center = int(round(t * rate))
        lo = center - win_len // 2
        hi = lo + win_len
        chunk = np.zeros(win_len)
        src_lo, src_hi = max(0, lo), min(samples.size, hi)
        if src_hi > src_lo:
            chunk[src_lo - lo:src_hi - lo] = samples[src_lo:src_hi]
        chunk = (chunk - chunk.mean()) * window
        formants = ()
        try:
            coeffs, _ = burg(chunk, config.lpc_order)
            poly = np.concatenate([[1.0], -coeffs])
            roots = polynomial_roots(poly)
            formants = roots_to_formants(roots, rate, config.max_bandwidth_hz,
                                         config.num_formants)
        except (BurgError, RootFindingError):
            pass
        frames.append(FormantFrame(time=float(t), formants=formants))
    means = []
    for k in (1, 2, 3):
        vals = [f.frequency(k) for f in frames if f.frequency(k) is not None]
        means.append(float(np.mean(vals)) if vals else float("nan"))
    n_valid = sum(1 for f in frames if f.frequency(1) is not None)
    return FormantTrack(
        segment=segment,
        frames=tuple(frames),
        mean_f1=means[0], mean_f2=means[1], mean_f3=means[2],
        n_valid_frames=n_valid,
        reliable=n_valid >= config.min_valid_frames,
    )
