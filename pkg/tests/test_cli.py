import json
import math

import pytest

from harmonium.cli import CliError, cmd_extract, cmd_synth, main
from harmonium.config import (ConfigError, PipelineConfig, SynthConfig,
                              load_config)
from harmonium.corpus import (FormantCsvRow, ManifestError, ManifestRow,
                              CorpusManifest, read_formant_csv, read_manifest,
                              write_formant_csv, write_manifest)


def small_config(seed=5, n_tokens=5, rule="regressive"):
    return PipelineConfig(synth=SynthConfig(seed=seed, n_tokens=n_tokens,
                                            rule=rule))


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("small")
    out = root / "corpus"
    cmd_synth(small_config(), str(out))
    return out


class TestManifest:
    ROW = ManifestRow("a.wav", "a.TextGrid", "t1", "iCu", "harmonic",
                      "synth", "training")

    def test_round_trip_with_relative_paths(self, tmp_path):
        (tmp_path / "a.wav").write_bytes(b"")
        (tmp_path / "a.TextGrid").write_text("")
        path = tmp_path / "manifest.csv"
        write_manifest([self.ROW], path)
        back = read_manifest(path)
        assert len(back.rows) == 1
        row = back.rows[0]
        assert row.audio_path == str(tmp_path / "a.wav")
        assert row.textgrid_path == str(tmp_path / "a.TextGrid")
        assert (row.token_id, row.word, row.harmonic) == ("t1", "iCu", "harmonic")

    def test_missing_referenced_file(self, tmp_path):
        path = tmp_path / "manifest.csv"
        write_manifest([self.ROW], path)
        with pytest.raises(ManifestError, match="missing"):
            read_manifest(path)
        # but tolerated when the caller only needs metadata
        assert len(read_manifest(path, check_paths=False).rows) == 1

    def test_missing_column(self, tmp_path):
        path = tmp_path / "manifest.csv"
        path.write_text("audio_path,token_id\nx.wav,t1\n")
        with pytest.raises(ManifestError, match="columns"):
            read_manifest(path)

    def test_duplicate_token_ids(self):
        with pytest.raises(ManifestError, match="duplicate"):
            CorpusManifest(rows=[self.ROW, self.ROW])


class TestFormantCsv:
    def make_row(self, i=0, reliable=True):
        return FormantCsvRow(
            token_id=f"t{i}", word="iCu", vowel_index=i, vowel_label="i",
            mean_f1=300.5, mean_f2=2200.25, mean_f3=float("nan"),
            f1_points=(295.0,) * 9 + (float("nan"),),
            n_valid_frames=9, reliable=reliable)

    def test_round_trip_including_nan(self, tmp_path):
        path = tmp_path / "f.csv"
        rows = [self.make_row(0), self.make_row(1, reliable=False)]
        write_formant_csv(rows, path)
        back = read_formant_csv(path)
        assert len(back) == 2
        assert back[0].mean_f1 == pytest.approx(300.5)
        assert math.isnan(back[0].mean_f3)
        assert math.isnan(back[0].f1_points[9])
        assert back[0].reliable and not back[1].reliable

    def test_missing_column(self, tmp_path):
        path = tmp_path / "f.csv"
        path.write_text("token_id,word\nt1,iCu\n")
        with pytest.raises(ManifestError, match="columns"):
            read_formant_csv(path)


class TestConfig:
    def test_defaults_without_file(self):
        config = load_config(None)
        assert config.synth.n_tokens == 100
        assert config.synth.rule == "none"
        assert config.formants.max_formant_hz == 5500.0
        assert config.analysis.alpha == 0.001
        assert config.tier_name == "phones"

    def test_ini_overrides(self, tmp_path):
        path = tmp_path / "c.ini"
        path.write_text("[synth]\nseed = 7\nn_tokens = 200\nrule = regressive\n"
                        "triggers = i\n"
                        "[analysis]\nalpha = 0.01\nreference_levels = V1=E,V2=E\n")
        config = load_config(path)
        assert config.synth.seed == 7
        assert config.synth.n_tokens == 200
        assert config.synth.rule == "regressive"
        assert config.synth.triggers == ("i",)
        assert config.analysis.alpha == 0.01
        assert config.analysis.reference_levels == {"V1": "E", "V2": "E"}

    def test_bad_value(self, tmp_path):
        path = tmp_path / "c.ini"
        path.write_text("[synth]\nseed = seven\n")
        with pytest.raises(ConfigError, match="seed"):
            load_config(path)

    def test_unknown_rule(self, tmp_path):
        path = tmp_path / "c.ini"
        path.write_text("[synth]\nrule = sideways\n")
        with pytest.raises(ConfigError, match="rule"):
            load_config(path)

    def test_to_dict_is_json_serializable(self):
        json.dumps(load_config(None).to_dict())


class TestSynthCommand:
    def test_outputs(self, small_corpus):
        names = {p.name for p in small_corpus.iterdir()}
        assert "manifest.csv" in names and "ground_truth.json" in names
        assert sum(1 for n in names if n.endswith(".wav")) == 5
        assert sum(1 for n in names if n.endswith(".TextGrid")) == 5
        manifest = read_manifest(small_corpus / "manifest.csv")
        assert len(manifest.rows) == 5

    def test_rerun_is_byte_identical(self, small_corpus, tmp_path):
        other = tmp_path / "again"
        cmd_synth(small_config(), str(other))
        for p in sorted(small_corpus.iterdir()):
            assert p.read_bytes() == (other / p.name).read_bytes()

    def test_zero_tokens_is_usage_error(self, tmp_path, capsys):
        ini = tmp_path / "c.ini"
        ini.write_text("[synth]\nn_tokens = 0\n")
        with pytest.raises(SystemExit) as exc:
            main(["synth", "--config", str(ini), "--out", str(tmp_path / "o")])
        assert exc.value.code == 2

    def test_failure_leaves_no_partial_output(self, tmp_path, monkeypatch):
        import harmonium.synth as synth_module

        out = tmp_path / "corpus"
        calls = {"n": 0}
        original = synth_module.synthesize_token

        def explode_on_third(spec, rng=None):
            calls["n"] += 1
            if calls["n"] == 3:
                raise RuntimeError("boom")
            return original(spec, rng)

        monkeypatch.setattr(synth_module, "synthesize_token", explode_on_third)
        with pytest.raises(RuntimeError):
            cmd_synth(small_config(), str(out))
        assert not out.exists() or list(out.iterdir()) == []


class TestExtractCommand:
    def test_extracts_all_vowels(self, small_corpus, tmp_path):
        out_csv = tmp_path / "f.csv"
        cmd_extract(str(small_corpus / "manifest.csv"), small_config(),
                    str(out_csv))
        rows = read_formant_csv(out_csv)
        assert len(rows) == 10  # two vowels per token
        assert all(r.reliable for r in rows)

    def test_parallel_matches_serial(self, small_corpus, tmp_path):
        serial, parallel = tmp_path / "s.csv", tmp_path / "p.csv"
        cmd_extract(str(small_corpus / "manifest.csv"), small_config(),
                    str(serial))
        cmd_extract(str(small_corpus / "manifest.csv"), small_config(),
                    str(parallel), jobs=2)
        assert serial.read_bytes() == parallel.read_bytes()

    def test_too_many_failures_is_fatal(self, tmp_path):
        out = tmp_path / "corpus"
        cmd_synth(small_config(seed=8), str(out))
        (out / "tok0000.wav").write_bytes(b"not a wav at all")
        with pytest.raises(CliError, match="10%"):
            cmd_extract(str(out / "manifest.csv"), small_config(),
                        str(tmp_path / "f.csv"))


class TestAnalyzeAndReport:
    def test_report_files_exist(self, regressive_pipeline):
        report_dir = regressive_pipeline["report_dir"]
        for name in ("report.json", "report.md", "distance_k.csv",
                     "f1_by_context.csv"):
            assert (report_dir / name).exists()

    def test_report_json_fields(self, regressive_pipeline):
        doc = regressive_pipeline["doc"]
        assert doc["verdict"] == "regressive"
        assert doc["alpha"] == 0.001
        assert len(doc["directionality"]) == 4
        keys = {(r["data"], r["direction"]) for r in doc["directionality"]}
        assert keys == {("whole", "right-to-left"), ("whole", "left-to-right"),
                        ("atr-subset", "right-to-left"),
                        ("atr-subset", "left-to-right")}
        assert doc["counts"]["files"] == 200
        assert doc["config"]["synth"]["seed"] == 7

    def test_markdown_render_is_deterministic(self, regressive_pipeline):
        from harmonium.report import render_markdown

        doc = regressive_pipeline["doc"]
        md = render_markdown(doc)
        assert md == render_markdown(doc)
        assert "regressive" in md
        assert (regressive_pipeline["report_dir"] / "report.md").read_text() == md

    def test_report_command_reproduces_markdown(self, regressive_pipeline,
                                                tmp_path):
        out_md = tmp_path / "again.md"
        code = main(["report",
                     str(regressive_pipeline["report_dir"] / "report.json"),
                     "--out", str(out_md)])
        assert code == 0
        original = regressive_pipeline["report_dir"] / "report.md"
        assert out_md.read_bytes() == original.read_bytes()

    def test_single_word_corpus_is_fatal(self, tmp_path, capsys):
        from harmonium.corpus import write_formant_csv, write_manifest
        from harmonium.corpus import FormantCsvRow, ManifestRow

        rows, csv_rows = [], []
        for i in range(6):
            rows.append(ManifestRow("x.wav", "x.TextGrid", f"t{i}", "iCu",
                                    "harmonic", "synth", "training"))
            for k, (label, f1) in enumerate((("i", 300.0), ("u", 350.0))):
                csv_rows.append(FormantCsvRow(f"t{i}", "iCu", k, label, f1,
                                              1500.0, 2500.0, (f1,) * 10, 10,
                                              True))
        manifest_path = tmp_path / "manifest.csv"
        csv_path = tmp_path / "f.csv"
        write_manifest(rows, manifest_path)
        write_formant_csv(csv_rows, csv_path)
        code = main(["analyze", str(csv_path), str(manifest_path),
                     "--out", str(tmp_path / "r")])
        assert code == 1
        assert "insufficient" in capsys.readouterr().err.lower()


class TestMainEntry:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0

    def test_missing_command_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_missing_manifest_is_runtime_error(self, tmp_path, capsys):
        code = main(["extract", str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path / "f.csv")])
        assert code == 1

    def test_full_pipeline_through_main(self, tmp_path, capsys):
        ini = tmp_path / "c.ini"
        ini.write_text("[synth]\nseed = 3\nn_tokens = 40\nrule = regressive\n")
        corpus = tmp_path / "corpus"
        assert main(["synth", "--config", str(ini), "--out", str(corpus)]) == 0
        csv_path = tmp_path / "f.csv"
        assert main(["extract", str(corpus / "manifest.csv"),
                     "--config", str(ini), "--out", str(csv_path)]) == 0
        report_dir = tmp_path / "report"
        assert main(["analyze", str(csv_path), str(corpus / "manifest.csv"),
                     "--config", str(ini), "--out", str(report_dir)]) == 0
        doc = json.loads((report_dir / "report.json").read_text())
        assert doc["verdict"] in ("regressive", "none")  # 40 tokens is small
        assert doc["counts"]["files"] == 40
