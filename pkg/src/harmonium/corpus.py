"""Corpus manifest and formant CSV serialization."""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field


class ManifestError(ValueError):
    pass


MANIFEST_HEADER = ["audio_path", "textgrid_path", "token_id", "word",
                   "harmonic", "speaker", "source"]


@dataclass(frozen=True)
class ManifestRow:
    audio_path: str
    textgrid_path: str
    token_id: str
    word: str
    harmonic: str
    speaker: str
    source: str


@dataclass
class CorpusManifest:
    rows: list = field(default_factory=list)

    def __post_init__(self):
        ids = [r.token_id for r in self.rows]
        dupes = {t for t in ids if ids.count(t) > 1}
        if dupes:
            raise ManifestError(f"duplicate token ids: {sorted(dupes)}")


def write_manifest(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        for r in rows:
            if isinstance(r, dict):
                writer.writerow([r[k] for k in MANIFEST_HEADER])
            else:
                writer.writerow([getattr(r, k) for k in MANIFEST_HEADER])


def read_manifest(path, check_paths: bool = True) -> CorpusManifest:
    base = os.path.dirname(os.path.abspath(path))
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(MANIFEST_HEADER) - set(reader.fieldnames or ())
        if missing:
            raise ManifestError(f"{path}: missing manifest columns {sorted(missing)}")
        for rec in reader:
            audio = rec["audio_path"]
            grid = rec["textgrid_path"]
            if not os.path.isabs(audio):
                audio = os.path.join(base, audio)
            if not os.path.isabs(grid):
                grid = os.path.join(base, grid)
            if check_paths:
                for p in (audio, grid):
                    if not os.path.exists(p):
                        raise ManifestError(f"{path}: referenced file missing: {p}")
            rows.append(ManifestRow(
                audio_path=audio, textgrid_path=grid, token_id=rec["token_id"],
                word=rec["word"], harmonic=rec["harmonic"],
                speaker=rec["speaker"], source=rec["source"]))
    return CorpusManifest(rows=rows)


# ---------------------------------------------------------------------------
# formant CSV

FORMANT_HEADER = (["token_id", "word", "vowel_index", "vowel_label",
                   "mean_f1", "mean_f2", "mean_f3"]
                  + [f"f1_{i:02d}" for i in range(1, 11)]
                  + ["n_valid_frames", "reliable"])


@dataclass(frozen=True)
class FormantCsvRow:
    token_id: str
    word: str
    vowel_index: int
    vowel_label: str
    mean_f1: float
    mean_f2: float
    mean_f3: float
    f1_points: tuple  # 10 per-point F1 values (nan where undetected)
    n_valid_frames: int
    reliable: bool


def _num(x: float) -> str:
    return "nan" if x != x else format(x, ".6g")


def write_formant_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FORMANT_HEADER)
        for r in rows:
            writer.writerow(
                [r.token_id, r.word, r.vowel_index, r.vowel_label,
                 _num(r.mean_f1), _num(r.mean_f2), _num(r.mean_f3)]
                + [_num(v) for v in r.f1_points]
                + [r.n_valid_frames, int(r.reliable)])


def read_formant_csv(path) -> list:
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(FORMANT_HEADER) - set(reader.fieldnames or ())
        if missing:
            raise ManifestError(f"{path}: missing formant columns {sorted(missing)}")
        for rec in reader:
            rows.append(FormantCsvRow(
                token_id=rec["token_id"], word=rec["word"],
                vowel_index=int(rec["vowel_index"]), vowel_label=rec["vowel_label"],
                mean_f1=float(rec["mean_f1"]), mean_f2=float(rec["mean_f2"]),
                mean_f3=float(rec["mean_f3"]),
                f1_points=tuple(float(rec[f"f1_{i:02d}"]) for i in range(1, 11)),
                n_valid_frames=int(rec["n_valid_frames"]),
                reliable=rec["reliable"] == "1"))
    return rows


def track_to_csv_row(track, token_id: str, word: str, vowel_index: int) -> FormantCsvRow:
    f1_points = tuple(
        frame.frequency(1) if frame.frequency(1) is not None else float("nan")
        for frame in track.frames)
    return FormantCsvRow(
        token_id=token_id, word=word, vowel_index=vowel_index,
        vowel_label=track.segment.label,
        mean_f1=track.mean_f1, mean_f2=track.mean_f2, mean_f3=track.mean_f3,
        f1_points=f1_points, n_valid_frames=track.n_valid_frames,
        reliable=track.reliable)
