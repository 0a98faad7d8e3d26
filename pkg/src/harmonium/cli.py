"""Command-line orchestration: synth, extract, analyze, report."""
from __future__ import annotations

import argparse
import concurrent.futures
import logging
import os
import sys

from . import __version__
from .config import ConfigError, PipelineConfig, load_config
from .corpus import (ManifestError, read_formant_csv, read_manifest,
                     track_to_csv_row, write_formant_csv, write_manifest)
from .harmony import (DEFAULT_INVENTORY, InsufficientDataError, TokenRecord,
                      TrackSummary, build_pairs, directionality_analysis,
                      distance_k_pairs)
from .report import build_machine_report, dump_machine_report, render_markdown

log = logging.getLogger("harmonium")


class CliError(RuntimeError):
    """Fatal command failure; message goes to stderr, exit code 1."""


def _setup_logging() -> None:
    level = os.environ.get("HARMONIUM_LOG", "warning").upper()
    logging.basicConfig(stream=sys.stderr,
                        level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


# ---------------------------------------------------------------------------
# synth


def cmd_synth(config: PipelineConfig, out_dir: str,
              seed: int | None = None) -> None:
    from .synth import generate_corpus

    sc = config.synth
    if sc.n_tokens < 1:
        raise CliError("synth.n_tokens must be >= 1")
    created_before = set()
    if os.path.isdir(out_dir):
        created_before = set(os.listdir(out_dir))
    try:
        _, corpus_rows = generate_corpus(
            seed if seed is not None else sc.seed,
            sc.n_tokens, sc.rule, sc.shift_hz, sc.noise_sd_hz, out_dir,
            triggers=sc.triggers, sample_rate=sc.sample_rate)
        for row in corpus_rows:
            row["audio_path"] = os.path.basename(row["audio_path"])
            row["textgrid_path"] = os.path.basename(row["textgrid_path"])
        write_manifest(corpus_rows, os.path.join(out_dir, "manifest.csv"))
    except Exception:
        # do not leave a half-written corpus behind
        if os.path.isdir(out_dir):
            for name in set(os.listdir(out_dir)) - created_before:
                try:
                    os.remove(os.path.join(out_dir, name))
                except OSError:
                    pass
        raise
    log.info("wrote %d tokens to %s", sc.n_tokens, out_dir)


# ---------------------------------------------------------------------------
# extract


def _extract_one(args):
    """Worker: one manifest row to a list of formant CSV rows."""
    row, formant_config, tier_name = args
    from .audio import read_wav
    from .formants import prepare_for_analysis, track_formants
    from .textgrid import extract_vowel_segments, read_textgrid

    buffer = read_wav(row.audio_path)
    grid = read_textgrid(row.textgrid_path)
    segments = extract_vowel_segments(grid, tier_name, DEFAULT_INVENTORY,
                                      token_id=row.token_id)
    prepared = prepare_for_analysis(buffer, formant_config)
    csv_rows = []
    for index, segment in enumerate(segments):
        track = track_formants(buffer, segment, formant_config, prepared=prepared)
        csv_rows.append(track_to_csv_row(track, row.token_id, row.word, index))
    return csv_rows


def cmd_extract(manifest_path: str, config: PipelineConfig, out_csv: str,
                jobs: int = 1) -> None:
    manifest = read_manifest(manifest_path)
    tasks = [(row, config.formants, config.tier_name) for row in manifest.rows]
    results: list = [None] * len(tasks)
    failures = []
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(_extract_one, t): i for i, t in enumerate(tasks)}
            for fut in concurrent.futures.as_completed(futures):
                i = futures[fut]
                try:
                    results[i] = fut.result()
                except Exception as exc:
                    failures.append((tasks[i][0].token_id, str(exc)))
    else:
        for i, task in enumerate(tasks):
            try:
                results[i] = _extract_one(task)
            except Exception as exc:
                failures.append((task[0].token_id, str(exc)))
    all_rows = []
    for rows in results:        # manifest order regardless of worker count
        if rows is not None:
            all_rows.extend(rows)
    for token_id, message in failures:
        log.warning("token %s failed: %s", token_id, message)
    write_formant_csv(all_rows, out_csv)
    n = len(manifest.rows)
    print(f"extract: {n - len(failures)}/{n} files, {len(all_rows)} vowel rows, "
          f"{len(failures)} failures", file=sys.stderr)
    if n and len(failures) > 0.10 * n:
        raise CliError(f"{len(failures)} of {n} files failed (> 10%)")


# ---------------------------------------------------------------------------
# analyze


def _pairs_from_csv(csv_rows, token_records):
    tracks_by_token: dict[str, list] = {}
    for r in csv_rows:
        tracks_by_token.setdefault(r.token_id, []).append(TrackSummary(
            label=r.vowel_label, start=float(r.vowel_index),
            mean_f1=r.mean_f1, mean_f2=r.mean_f2, mean_f3=r.mean_f3,
            reliable=r.reliable))
    return tracks_by_token, build_pairs(tracks_by_token, token_records)


def cmd_analyze(formant_csv: str, manifest_path: str, out_dir: str,
                config: PipelineConfig) -> None:
    import csv as csv_module

    csv_rows = read_formant_csv(formant_csv)
    manifest = read_manifest(manifest_path, check_paths=False)
    records = [TokenRecord(token_id=r.token_id, word=r.word, harmonic=r.harmonic,
                           speaker=r.speaker, source=r.source)
               for r in manifest.rows]
    tracks_by_token, pairs = _pairs_from_csv(csv_rows, records)
    generated_ids = {r.token_id for r in manifest.rows if r.source == "generated"}
    generated_pairs = [p for p in pairs if p.token_id in generated_ids] or None
    try:
        report = directionality_analysis(pairs, config.analysis,
                                         generated_pairs=generated_pairs)
    except InsufficientDataError as exc:
        raise CliError(f"insufficient data: {exc}") from None
    os.makedirs(out_dir, exist_ok=True)
    counts = {"files": len(manifest.rows), "vowel_rows": len(csv_rows),
              "reliable_rows": sum(1 for r in csv_rows if r.reliable),
              "pairs": len(pairs)}
    doc = build_machine_report(report, config.to_dict(), counts)
    dump_machine_report(doc, os.path.join(out_dir, "report.json"))
    with open(os.path.join(out_dir, "report.md"), "w", encoding="utf-8") as fh:
        fh.write(render_markdown(doc))
    # supplementary tables for external plotting / iterativity inspection
    with open(os.path.join(out_dir, "distance_k.csv"), "w", encoding="utf-8",
              newline="") as fh:
        writer = csv_module.writer(fh, lineterminator="\n")
        writer.writerow(["token_id", "word", "distance", "v_first", "v_last",
                         "f1_first", "f1_last"])
        for row in distance_k_pairs(tracks_by_token, records):
            writer.writerow([row["token_id"], row["word"], row["distance"],
                             row["v_first"], row["v_last"],
                             format(row["f1_first"], ".6g"),
                             format(row["f1_last"], ".6g")])
    with open(os.path.join(out_dir, "f1_by_context.csv"), "w", encoding="utf-8",
              newline="") as fh:
        writer = csv_module.writer(fh, lineterminator="\n")
        writer.writerow(["v1", "v2_atr", "n", "mean_f1v1"])
        cells: dict[tuple, list] = {}
        for p in pairs:
            key = (p.v1, DEFAULT_INVENTORY.atr_of(p.v2))
            cells.setdefault(key, []).append(p.f1v1)
        for (v1, atr), vals in sorted(cells.items()):
            writer.writerow([v1, atr, len(vals),
                             format(sum(vals) / len(vals), ".6g")])
    print(f"analyze: verdict {report.verdict}", file=sys.stderr)


def cmd_report(report_json: str, out_md: str) -> None:
    import json

    with open(report_json, encoding="utf-8") as fh:
        doc = json.load(fh)
    with open(out_md, "w", encoding="utf-8") as fh:
        fh.write(render_markdown(doc))


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harmonium",
        description="Quantify regressive ATR vowel harmony in speech corpora")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a ground-truth corpus")
    p_synth.add_argument("--config", help="INI config file")
    p_synth.add_argument("--out", required=True, help="output corpus directory")
    p_synth.add_argument("--seed", type=int, help="override config seed")

    p_extract = sub.add_parser("extract", help="extract formant tracks to CSV")
    p_extract.add_argument("manifest", help="corpus manifest CSV")
    p_extract.add_argument("--config", help="INI config file")
    p_extract.add_argument("--out", required=True, help="output formant CSV")
    p_extract.add_argument("--jobs", type=int, default=1)

    p_analyze = sub.add_parser("analyze", help="run the directionality analysis")
    p_analyze.add_argument("formant_csv")
    p_analyze.add_argument("manifest")
    p_analyze.add_argument("--config", help="INI config file")
    p_analyze.add_argument("--out", required=True, help="output report directory")

    p_report = sub.add_parser("report", help="render a machine report to markdown")
    p_report.add_argument("report_json")
    p_report.add_argument("--out", required=True, help="output markdown path")
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("synth", "extract", "analyze"):
            config = load_config(args.config)
        if args.command == "synth":
            if config.synth.n_tokens < 1:
                parser.error("synth.n_tokens must be >= 1")
            cmd_synth(config, args.out, seed=args.seed)
        elif args.command == "extract":
            cmd_extract(args.manifest, config, args.out, jobs=args.jobs)
        elif args.command == "analyze":
            cmd_analyze(args.formant_csv, args.manifest, args.out, config)
        elif args.command == "report":
            cmd_report(args.report_json, args.out)
    except (CliError, ConfigError, ManifestError, FileNotFoundError) as exc:
        print(f"harmonium {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
