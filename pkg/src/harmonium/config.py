"""Pipeline configuration: one INI-style file drives every stage, and the
full parameter set is echoed into reports for provenance."""
from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field

from .formants import FormantConfig
from .harmony import AnalysisConfig


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_tokens: int = 100
    rule: str = "none"            # none | regressive | progressive
    shift_hz: float = 150.0
    noise_sd_hz: float = 25.0
    sample_rate: int = 16000
    triggers: tuple = ("i", "u")


@dataclass(frozen=True)
class PipelineConfig:
    synth: SynthConfig = field(default_factory=SynthConfig)
    formants: FormantConfig = field(default_factory=FormantConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    tier_name: str = "phones"

    def to_dict(self) -> dict:
        return {
            "synth": asdict(self.synth),
            "formants": asdict(self.formants),
            "analysis": asdict(self.analysis),
            "tier_name": self.tier_name,
        }


class ConfigError(ValueError):
    pass


def _typed(section, key, cast, default):
    if section is None or key not in section:
        return default
    raw = section[key]
    try:
        if cast is bool:
            return section.getboolean(key)
        return cast(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def load_config(path=None) -> PipelineConfig:
    """Read an INI config; missing file or sections fall back to defaults."""
    parser = configparser.ConfigParser()
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    synth_s = parser["synth"] if parser.has_section("synth") else None
    form_s = parser["formants"] if parser.has_section("formants") else None
    ana_s = parser["analysis"] if parser.has_section("analysis") else None
    gen_s = parser["corpus"] if parser.has_section("corpus") else None
    rule = _typed(synth_s, "rule", str, "none")
    if rule not in ("none", "regressive", "progressive"):
        raise ConfigError(f"unknown harmony rule {rule!r}")
    triggers = _typed(synth_s, "triggers", str, "i,u")
    synth = SynthConfig(
        seed=_typed(synth_s, "seed", int, 0),
        n_tokens=_typed(synth_s, "n_tokens", int, 100),
        rule=rule,
        shift_hz=_typed(synth_s, "shift_hz", float, 150.0),
        noise_sd_hz=_typed(synth_s, "noise_sd_hz", float, 25.0),
        sample_rate=_typed(synth_s, "sample_rate", int, 16000),
        triggers=tuple(t.strip() for t in triggers.split(",") if t.strip()),
    )
    formants = FormantConfig(
        max_formant_hz=_typed(form_s, "max_formant_hz", float, 5500.0),
        num_formants=_typed(form_s, "num_formants", int, 5),
        window_s=_typed(form_s, "window_s", float, 0.025),
        pre_emphasis_hz=_typed(form_s, "pre_emphasis_hz", float, 50.0),
        max_bandwidth_hz=_typed(form_s, "max_bandwidth_hz", float, 400.0),
        min_valid_frames=_typed(form_s, "min_valid_frames", int, 6),
    )
    ref_levels = {}
    raw_refs = _typed(ana_s, "reference_levels", str, "")
    for item in raw_refs.split(","):
        if "=" in item:
            k, v = item.split("=", 1)
            ref_levels[k.strip()] = v.strip()
    analysis = AnalysisConfig(
        alpha=_typed(ana_s, "alpha", float, 0.001),
        margin_hz=_typed(ana_s, "margin_hz", float, 40.0),
        min_level_count=_typed(ana_s, "min_level_count", int, 2),
        reference_levels=ref_levels,
    )
    tier_name = _typed(gen_s, "tier_name", str, "phones")
    return PipelineConfig(synth=synth, formants=formants, analysis=analysis,
                          tier_name=tier_name)
