"""Vowel feature inventory, V1CV2 pair assembly, and the directionality
analysis: four mixed-model likelihood-ratio tests (whole data and the
+ATR subset, in both directions) plus the generated-items regression.

Vowel symbols are an ASCII transliteration of the eight-vowel Assamese
inventory: i, u, U (near-close back), e, o, E (open-mid front),
O (open-mid back), a (low, opaque).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .stats import (LmmFit, LrtResult, OlsFit, build_design, likelihood_ratio_test,
                    lmm_fit_ml, ols_fit)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class VowelFeatures:
    height: str      # high | mid | low
    backness: str    # front | back
    atr: str         # +ATR | -ATR
    opaque: bool = False


_FEATURES = {
    "i": VowelFeatures("high", "front", "+ATR"),
    "u": VowelFeatures("high", "back", "+ATR"),
    "U": VowelFeatures("high", "back", "-ATR"),
    "e": VowelFeatures("mid", "front", "+ATR"),
    "o": VowelFeatures("mid", "back", "+ATR"),
    "E": VowelFeatures("mid", "front", "-ATR"),
    "O": VowelFeatures("mid", "back", "-ATR"),
    "a": VowelFeatures("low", "back", "-ATR", opaque=True),
}

DEFAULT_CONSONANTS = frozenset("pbtdkgmnszxhrjwlC")


class VowelInventory:
    """The eight-vowel feature table plus the consonant symbol set."""

    def __init__(self, features=None, consonants=DEFAULT_CONSONANTS):
        self._features = dict(features or _FEATURES)
        self.consonants = frozenset(consonants)

    def symbols(self):
        return list(self._features)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._features

    def features(self, symbol: str) -> VowelFeatures:
        try:
            return self._features[symbol]
        except KeyError:
            raise KeyError(f"{symbol!r} is not in the vowel inventory "
                           f"({sorted(self._features)})") from None

    def atr_of(self, symbol: str) -> str:
        return self.features(symbol).atr

    def is_opaque(self, symbol: str) -> bool:
        return self.features(symbol).opaque

    def is_trigger(self, symbol: str) -> bool:
        """High +ATR vowels trigger regressive harmony."""
        f = self.features(symbol)
        return f.height == "high" and f.atr == "+ATR"

    def vowels_of_word(self, word: str) -> list[str]:
        return [ch for ch in word if ch in self._features]


DEFAULT_INVENTORY = VowelInventory()


def atr_of(symbol: str, inventory: VowelInventory = DEFAULT_INVENTORY) -> str:
    return inventory.atr_of(symbol)


@dataclass(frozen=True)
class TokenRecord:
    token_id: str
    word: str
    harmonic: str       # harmonic | non-harmonic
    speaker: str = ""
    source: str = "training"


@dataclass(frozen=True)
class VowelPairObservation:
    word: str
    token_id: str
    v1: str
    v2: str
    f1v1: float
    f1v2: float
    f2v1: float
    f2v2: float
    f3v1: float
    f3v2: float
    position: int

    def as_row(self) -> dict:
        return {
            "word": self.word, "token_id": self.token_id,
            "V1": self.v1, "V2": self.v2,
            "F1V1": self.f1v1, "F1V2": self.f1v2,
            "F2V1": self.f2v1, "F2V2": self.f2v2,
        }


@dataclass(frozen=True)
class TrackSummary:
    """The slice of a FormantTrack that pair assembly needs."""
    label: str
    start: float
    mean_f1: float
    mean_f2: float
    mean_f3: float
    reliable: bool


def build_pairs(tracks_by_token: dict, tokens) -> list[VowelPairObservation]:
    """One observation per adjacent vowel pair per token.

    `tracks_by_token` maps token_id to its TrackSummary sequence;
    unreliable tracks drop every pair they touch. The random-effect group
    is the token's lexical form, so repetitions of a word share a group.
    """
    token_index = {t.token_id: t for t in tokens}
    pairs = []
    for token_id, tracks in tracks_by_token.items():
        if token_id not in token_index:
            raise ValueError(f"tracks reference unknown token {token_id!r}")
        record = token_index[token_id]
        ordered = sorted(tracks, key=lambda t: t.start)
        for k in range(len(ordered) - 1):
            first, second = ordered[k], ordered[k + 1]
            if not (first.reliable and second.reliable):
                continue
            pairs.append(VowelPairObservation(
                word=record.word, token_id=token_id,
                v1=first.label, v2=second.label,
                f1v1=first.mean_f1, f1v2=second.mean_f1,
                f2v1=first.mean_f2, f2v2=second.mean_f2,
                f3v1=first.mean_f3, f3v2=second.mean_f3,
                position=k))
    return pairs


def distance_k_pairs(tracks_by_token: dict, tokens, max_distance: int = 3):
    """Supplementary (V1, V1+k) rows for inspecting iterativity, k <= 3."""
    token_index = {t.token_id: t for t in tokens}
    rows = []
    for token_id, tracks in tracks_by_token.items():
        record = token_index[token_id]
        ordered = sorted(tracks, key=lambda t: t.start)
        for k in range(1, max_distance + 1):
            for i in range(len(ordered) - k):
                first, last = ordered[i], ordered[i + k]
                if not (first.reliable and last.reliable):
                    continue
                rows.append({
                    "token_id": token_id, "word": record.word, "distance": k,
                    "v_first": first.label, "v_last": last.label,
                    "f1_first": first.mean_f1, "f1_last": last.mean_f1,
                })
    return rows


# ---------------------------------------------------------------------------
# harmony scoring


@dataclass(frozen=True)
class HarmonyScore:
    raised: bool
    score: float  # reference F1 minus observed F1, in Hz


def reference_f1_means(pairs, inventory: VowelInventory = DEFAULT_INVENTORY) -> dict:
    """Per-vowel mean F1 of V1 in non-trigger contexts (V2 is -ATR)."""
    sums: dict[str, list] = {}
    for pair in pairs:
        if inventory.atr_of(pair.v2) == "-ATR":
            sums.setdefault(pair.v1, []).append(pair.f1v1)
    return {v: float(np.mean(vals)) for v, vals in sums.items()}


def harmony_score(pair: VowelPairObservation, reference_means: dict,
                  margin: float = 40.0,
                  inventory: VowelInventory = DEFAULT_INVENTORY) -> HarmonyScore:
    if pair.v1 not in reference_means:
        raise ValueError(f"no reference F1 mean for vowel {pair.v1!r}")
    ref = reference_means[pair.v1]
    score = ref - pair.f1v1
    raised = inventory.atr_of(pair.v2) == "+ATR" and pair.f1v1 < ref - margin
    return HarmonyScore(raised=raised, score=score)


# ---------------------------------------------------------------------------
# directionality analysis


@dataclass(frozen=True)
class AnalysisConfig:
    alpha: float = 0.001
    margin_hz: float = 40.0
    min_level_count: int = 2
    reference_levels: dict = field(default_factory=dict)


@dataclass
class DirectionalityRow:
    data: str                 # whole | atr-subset
    direction: str            # right-to-left | left-to-right
    formula: str
    n_obs: int
    lrt: LrtResult
    aic_full: float
    aic_null: float
    full_fit: LmmFit
    warnings: list = field(default_factory=list)


@dataclass
class DirectionalityReport:
    rows: list
    verdict: str                    # regressive | progressive | none | both
    alpha: float
    trigger_table: list             # (coefficient name, estimate, se, t)
    opaque_pair_count: int
    opaque_excluded_rows: list      # same four rows with /a/ pairs removed
    harmony_summary: dict
    generated: "GeneratedItemsReport | None" = None

    def row(self, data: str, direction: str) -> DirectionalityRow:
        for r in self.rows:
            if r.data == data and r.direction == direction:
                return r
        raise KeyError((data, direction))


class InsufficientDataError(ValueError):
    pass


def _collapse_sparse_levels(rows, factor: str, min_count: int):
    counts: dict[str, int] = {}
    for r in rows:
        counts[r[factor]] = counts.get(r[factor], 0) + 1
    sparse = {lvl for lvl, c in counts.items() if c < min_count}
    warnings = []
    if sparse and len(counts) - len(sparse) >= 1:
        warnings.append(f"factor {factor}: merged sparse levels {sorted(sparse)} "
                        f"into 'other'")
        for r in rows:
            if r[factor] in sparse:
                r[factor] = "other"
    return warnings


def _lrt_row(rows, response: str, keep_factor: str, test_factor: str,
             config: AnalysisConfig, data_name: str, direction: str):
    rows = [dict(r) for r in rows]
    warnings = []
    for factor in (keep_factor, test_factor):
        warnings += _collapse_sparse_levels(rows, factor, config.min_level_count)
    words = {r["word"] for r in rows}
    if len(words) < 2:
        raise InsufficientDataError(
            f"{data_name}/{direction}: need >= 2 distinct words, got {len(words)}")
    full = lmm_fit_ml(build_design(
        rows, response, factors=[keep_factor, test_factor],
        reference_levels=config.reference_levels, group="word"))
    null = lmm_fit_ml(build_design(
        rows, response, factors=[keep_factor],
        reference_levels=config.reference_levels, group="word"))
    lrt = likelihood_ratio_test(full, null)
    formula = f"{response} ~ {keep_factor} + {test_factor} + (1|word)"
    return DirectionalityRow(data=data_name, direction=direction, formula=formula,
                             n_obs=len(rows), lrt=lrt, aic_full=full.aic,
                             aic_null=null.aic, full_fit=full, warnings=warnings)


def _four_rows(pairs, config: AnalysisConfig,
               inventory: VowelInventory) -> list[DirectionalityRow]:
    rows = [p.as_row() for p in pairs]
    atr_rtl = [p.as_row() for p in pairs if inventory.atr_of(p.v2) == "+ATR"]
    atr_ltr = [p.as_row() for p in pairs if inventory.atr_of(p.v1) == "+ATR"]
    return [
        _lrt_row(rows, "F1V1", "V1", "V2", config, "whole", "right-to-left"),
        _lrt_row(rows, "F1V2", "V2", "V1", config, "whole", "left-to-right"),
        _lrt_row(atr_rtl, "F1V1", "V1", "V2", config, "atr-subset", "right-to-left"),
        _lrt_row(atr_ltr, "F1V2", "V2", "V1", config, "atr-subset", "left-to-right"),
    ]


def _verdict(rows, alpha: float) -> str:
    rtl = next(r for r in rows if r.data == "whole" and r.direction == "right-to-left")
    ltr = next(r for r in rows if r.data == "whole" and r.direction == "left-to-right")
    rtl_sig = rtl.lrt.p_value < alpha
    ltr_sig = ltr.lrt.p_value < alpha
    if rtl_sig and ltr_sig:
        return "both"
    if rtl_sig:
        return "regressive"
    if ltr_sig:
        return "progressive"
    return "none"


def directionality_analysis(pairs, config: AnalysisConfig = AnalysisConfig(),
                            inventory: VowelInventory = DEFAULT_INVENTORY,
                            generated_pairs=None) -> DirectionalityReport:
    if len({p.word for p in pairs}) < 2:
        raise InsufficientDataError("need >= 2 distinct words")
    rows = _four_rows(pairs, config, inventory)
    verdict = _verdict(rows, config.alpha)
    rtl_full = rows[0].full_fit
    trigger_table = [
        (name, float(rtl_full.beta[j]), float(rtl_full.se[j]),
         float(rtl_full.t_values[j]))
        for j, name in enumerate(rtl_full.columns) if name.startswith("V2[T.")
    ]
    opaque_pairs = [p for p in pairs
                    if inventory.is_opaque(p.v1) or inventory.is_opaque(p.v2)]
    non_opaque = [p for p in pairs
                  if not (inventory.is_opaque(p.v1) or inventory.is_opaque(p.v2))]
    opaque_excluded_rows = []
    if len({p.word for p in non_opaque}) >= 2 and len(non_opaque) >= 10:
        try:
            opaque_excluded_rows = _four_rows(non_opaque, config, inventory)
        except (InsufficientDataError, ValueError) as exc:
            log.warning("opaque-excluded re-run skipped: %s", exc)
    refs = reference_f1_means(pairs, inventory)
    scored = [(p, harmony_score(p, refs, config.margin_hz, inventory))
              for p in pairs if p.v1 in refs]
    trigger_ctx = [s for p, s in scored if inventory.atr_of(p.v2) == "+ATR"]
    other_ctx = [s for p, s in scored if inventory.atr_of(p.v2) == "-ATR"]
    harmony_summary = {
        "n_scored": len(scored),
        "raised_rate_before_plus_atr": (
            float(np.mean([s.raised for s in trigger_ctx])) if trigger_ctx else float("nan")),
        "raised_rate_before_minus_atr": (
            float(np.mean([s.raised for s in other_ctx])) if other_ctx else float("nan")),
        "mean_score_before_plus_atr": (
            float(np.mean([s.score for s in trigger_ctx])) if trigger_ctx else float("nan")),
        "mean_score_before_minus_atr": (
            float(np.mean([s.score for s in other_ctx])) if other_ctx else float("nan")),
        "reference_means": refs,
    }
    generated = None
    if generated_pairs:
        generated = analyze_generated(generated_pairs, config)
    return DirectionalityReport(rows=rows, verdict=verdict, alpha=config.alpha,
                                trigger_table=trigger_table,
                                opaque_pair_count=len(opaque_pairs),
                                opaque_excluded_rows=opaque_excluded_rows,
                                harmony_summary=harmony_summary,
                                generated=generated)


# ---------------------------------------------------------------------------
# generated-items regression (OLS)


@dataclass
class GeneratedItemsReport:
    categorical_fit: OlsFit      # F1V1 ~ V1 + V2
    covariate_fit: OlsFit        # F1V1 ~ V1 + F1V2
    trigger_table: list          # (name, estimate, t, p)
    dominant_trigger: str        # vowel symbol or "none"


def analyze_generated(pairs, config: AnalysisConfig = AnalysisConfig(),
                      trigger_alpha: float = 0.05) -> GeneratedItemsReport:
    rows = [p.as_row() for p in pairs]
    p_needed = len({r["V1"] for r in rows}) + len({r["V2"] for r in rows})
    if len(rows) < p_needed + 5:
        raise InsufficientDataError(
            f"need >= {p_needed + 5} observations, got {len(rows)}")
    for factor in ("V1", "V2"):
        _collapse_sparse_levels(rows, factor, config.min_level_count)
    categorical = ols_fit(build_design(
        rows, "F1V1", factors=["V1", "V2"],
        reference_levels=config.reference_levels))
    covariate = ols_fit(build_design(
        rows, "F1V1", factors=["V1"], covariates=["F1V2"],
        reference_levels=config.reference_levels))
    trigger_table = []
    for j, name in enumerate(categorical.columns):
        if name.startswith("V2[T."):
            trigger_table.append((name, float(categorical.beta[j]),
                                  float(categorical.t_values[j]),
                                  float(categorical.p_values[j])))
    significant = [(est, name) for name, est, _, p in trigger_table
                   if p < trigger_alpha and est < 0]
    if significant:
        _, name = min(significant)
        dominant = name[len("V2[T."):-1]
    else:
        dominant = "none"
    return GeneratedItemsReport(categorical_fit=categorical, covariate_fit=covariate,
                                trigger_table=trigger_table,
                                dominant_trigger=dominant)
