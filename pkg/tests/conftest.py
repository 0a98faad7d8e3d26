import numpy as np
import pytest

from harmonium.formants import FormantConfig
from harmonium.synth import TokenSpec, make_vowel_spec, synthesize_token


@pytest.fixture(scope="session")
def formant_config():
    return FormantConfig()


def render_single_vowel(label, f0=120.0, duration=0.2, seed=0, **kwargs):
    """One-vowel token buffer plus its manifest entry."""
    spec = TokenSpec("tok", (make_vowel_spec(label, f0=f0, duration=duration,
                                             **kwargs),))
    return synthesize_token(spec, np.random.default_rng(seed))


@pytest.fixture(scope="session")
def regressive_pipeline(tmp_path_factory):
    """Full synth -> extract -> analyze run on the seed-7 regressive corpus."""
    import json

    from harmonium.cli import cmd_analyze, cmd_extract, cmd_synth
    from harmonium.config import PipelineConfig, SynthConfig

    root = tmp_path_factory.mktemp("regressive")
    corpus = root / "corpus"
    config = PipelineConfig(synth=SynthConfig(
        seed=7, n_tokens=200, rule="regressive", shift_hz=150.0, noise_sd_hz=25.0))
    cmd_synth(config, str(corpus))
    csv_path = root / "formants.csv"
    cmd_extract(str(corpus / "manifest.csv"), config, str(csv_path))
    report_dir = root / "report"
    cmd_analyze(str(csv_path), str(corpus / "manifest.csv"), str(report_dir), config)
    with open(report_dir / "report.json", encoding="utf-8") as fh:
        doc = json.load(fh)
    return {"root": root, "corpus": corpus, "csv": csv_path,
            "report_dir": report_dir, "doc": doc, "config": config}
