"""Praat TextGrid (long text format) parsing and serialization.

Only the long text format is supported; short-format and binary files are
rejected. Input may be UTF-8 or UTF-16 with a BOM; output is always UTF-8.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

log = logging.getLogger(__name__)

_TIME_TOL = 1e-6


class TextGridError(ValueError):
    """Structural or encoding problem in a TextGrid file."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass
class Interval:
    xmin: float
    xmax: float
    text: str

    def validate(self) -> None:
        if not (self.xmin == self.xmin and self.xmax == self.xmax):  # NaN guard
            raise TextGridError("interval time is NaN")
        if self.xmin < 0 or self.xmax < 0:
            raise TextGridError("interval times must be non-negative")
        if self.xmin > self.xmax:
            raise TextGridError(f"interval xmin {self.xmin} > xmax {self.xmax}")


@dataclass
class IntervalTier:
    name: str
    xmin: float
    xmax: float
    intervals: list[Interval] = field(default_factory=list)

    def validate(self) -> None:
        if self.xmin > self.xmax:
            raise TextGridError(f"tier {self.name!r}: xmin > xmax")
        prev = None
        for iv in self.intervals:
            iv.validate()
            if prev is not None and abs(iv.xmin - prev.xmax) > _TIME_TOL:
                raise TextGridError(
                    f"tier {self.name!r}: intervals not contiguous at t={iv.xmin}")
            prev = iv
        if self.intervals:
            if self.intervals[0].xmin < self.xmin - _TIME_TOL or \
               self.intervals[-1].xmax > self.xmax + _TIME_TOL:
                raise TextGridError(f"tier {self.name!r}: intervals exceed tier span")


@dataclass
class TextGrid:
    xmin: float
    xmax: float
    tiers: list[IntervalTier] = field(default_factory=list)

    def validate(self) -> None:
        if self.xmin > self.xmax:
            raise TextGridError("grid xmin > xmax")
        for tier in self.tiers:
            tier.validate()
            if tier.xmin < self.xmin - _TIME_TOL or tier.xmax > self.xmax + _TIME_TOL:
                raise TextGridError(f"tier {tier.name!r} span exceeds grid span")

    def tier(self, name: str) -> IntervalTier:
        for t in self.tiers:
            if t.name == name:
                return t
        raise KeyError(f"no tier named {name!r} "
                       f"(have: {[t.name for t in self.tiers]})")


def _decode(content) -> str:
    if isinstance(content, str):
        return content.lstrip("﻿")
    for bom, enc in ((b"\xff\xfe", "utf-16-le"), (b"\xfe\xff", "utf-16-be"),
                     (b"\xef\xbb\xbf", "utf-8")):
        if content.startswith(bom):
            try:
                return content.decode(enc).lstrip("﻿")
            except UnicodeDecodeError as exc:
                raise TextGridError(f"undecodable {enc} content: {exc}") from None
    try:
        return content.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise TextGridError(f"undecodable UTF-8 content: {exc}") from None


class _Cursor:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    @property
    def lineno(self) -> int:
        return min(self.pos + 1, len(self.lines))

    def fail(self, message: str):
        raise TextGridError(message, line=self.lineno)

    def next_content_line(self) -> str:
        while self.pos < len(self.lines):
            line = self.lines[self.pos]
            if line.strip():
                return line
            self.pos += 1
        self.fail("unexpected end of file")

    def number(self, key: str) -> float:
        line = self.next_content_line()
        m = re.match(rf"\s*{re.escape(key)}\s*=\s*([-+0-9.eE]+)\s*$", line)
        if not m:
            self.fail(f"expected '{key} = <number>', got {line.strip()!r}")
        self.pos += 1
        try:
            v = float(m.group(1))
        except ValueError:
            self.fail(f"bad number for {key}: {m.group(1)!r}")
        if v != v or v in (float("inf"), float("-inf")):
            self.fail(f"non-finite value for {key}: {m.group(1)!r}")
        return v

    def string(self, key: str) -> str:
        line = self.next_content_line()
        m = re.match(rf"\s*{re.escape(key)}\s*=\s*\"", line)
        if not m:
            self.fail(f"expected '{key} = \"...\"', got {line.strip()!r}")
        # Labels may contain doubled quotes ("" -> ") and embedded newlines.
        chunk = line[m.end():]
        out: list[str] = []
        while True:
            i = 0
            closed = False
            while i < len(chunk):
                if chunk[i] == '"':
                    if i + 1 < len(chunk) and chunk[i + 1] == '"':
                        out.append('"')
                        i += 2
                        continue
                    closed = True
                    break
                out.append(chunk[i])
                i += 1
            if closed:
                rest = chunk[i + 1:].strip()
                if rest:
                    self.fail(f"trailing content after string value: {rest!r}")
                self.pos += 1
                return "".join(out)
            self.pos += 1
            if self.pos >= len(self.lines):
                self.fail(f"unterminated string for {key}")
            out.append("\n")
            chunk = self.lines[self.pos]

    def count(self, key: str) -> int:
        v = self.number(key)
        if v != int(v) or v < 0:
            self.fail(f"{key} must be a non-negative integer, got {v}")
        n = int(v)
        if n > len(self.lines) - self.pos + 1:
            self.fail(f"{key} = {n} exceeds remaining file content")
        return n

    def header(self, pattern: str, description: str) -> None:
        line = self.next_content_line()
        if not re.match(pattern, line):
            self.fail(f"expected {description}, got {line.strip()!r}")
        self.pos += 1


def parse_textgrid(content) -> TextGrid:
    """Parse a long-format TextGrid from text or BOM-tagged bytes."""
    text = _decode(content)
    cur = _Cursor(text)
    first = cur.next_content_line()
    if 'ooTextFile' not in first:
        cur.fail('not an ooTextFile (File type header missing)')
    cur.pos += 1
    second = cur.next_content_line()
    if 'TextGrid' not in second:
        cur.fail('Object class is not "TextGrid"')
    cur.pos += 1
    xmin = cur.number("xmin")
    xmax = cur.number("xmax")
    line = cur.next_content_line()
    if "exists" not in line and "tiers?" not in line:
        cur.fail(f"expected 'tiers? <exists>' line, got {line.strip()!r}")
    cur.pos += 1
    size = cur.count("size")
    if size < 0:
        cur.fail(f"negative tier count {size}")
    cur.header(r"\s*item\s*\[\s*\]\s*:", "'item []:'")
    tiers = []
    for t_index in range(size):
        cur.header(rf"\s*item\s*\[\s*{t_index + 1}\s*\]\s*:", f"'item [{t_index + 1}]:'")
        klass = cur.string("class")
        name = cur.string("name")
        if klass != "IntervalTier":
            cur.fail(f"tier {name!r} has class {klass!r}; "
                     "only IntervalTier is supported (point tiers rejected)")
        t_xmin = cur.number("xmin")
        t_xmax = cur.number("xmax")
        n_intervals = cur.count("intervals: size")
        if n_intervals < 0:
            cur.fail(f"tier {name!r}: negative interval count")
        intervals = []
        for i_index in range(n_intervals):
            cur.header(rf"\s*intervals\s*\[\s*{i_index + 1}\s*\]\s*:",
                       f"'intervals [{i_index + 1}]:'")
            i_xmin = cur.number("xmin")
            i_xmax = cur.number("xmax")
            lineno = cur.lineno
            label = cur.string("text")
            if i_xmin > i_xmax:
                raise TextGridError(
                    f"non-monotone interval times {i_xmin} > {i_xmax}", line=lineno)
            intervals.append(Interval(i_xmin, i_xmax, label))
        tier = IntervalTier(name, t_xmin, t_xmax, intervals)
        try:
            tier.validate()
        except TextGridError as exc:
            raise TextGridError(str(exc), line=cur.lineno) from None
        tiers.append(tier)
    grid = TextGrid(xmin, xmax, tiers)
    grid.validate()
    return grid


def _fmt_time(x: float) -> str:
    return format(x, ".17g")


def _quote(s: str) -> str:
    return '"' + s.replace('"', '""') + '"'


def serialize_textgrid(grid: TextGrid) -> str:
    grid.validate()
    out = [
        'File type = "ooTextFile"',
        'Object class = "TextGrid"',
        "",
        f"xmin = {_fmt_time(grid.xmin)}",
        f"xmax = {_fmt_time(grid.xmax)}",
        "tiers? <exists>",
        f"size = {len(grid.tiers)}",
        "item []:",
    ]
    for t_index, tier in enumerate(grid.tiers, start=1):
        out += [
            f"    item [{t_index}]:",
            '        class = "IntervalTier"',
            f"        name = {_quote(tier.name)}",
            f"        xmin = {_fmt_time(tier.xmin)}",
            f"        xmax = {_fmt_time(tier.xmax)}",
            f"        intervals: size = {len(tier.intervals)}",
        ]
        for i_index, iv in enumerate(tier.intervals, start=1):
            out += [
                f"        intervals [{i_index}]:",
                f"            xmin = {_fmt_time(iv.xmin)}",
                f"            xmax = {_fmt_time(iv.xmax)}",
                f"            text = {_quote(iv.text)}",
            ]
    return "\n".join(out) + "\n"


def extract_vowel_segments(grid: TextGrid, tier_name: str, inventory,
                           token_id: str = "") -> list:
    """Vowel-labelled intervals of a tier, in temporal order.

    Empty and consonant labels are skipped silently; anything else gets a
    warning and is skipped, so corpora with junk tiers still process.
    """
    from .formants import VowelSegment

    tier = grid.tier(tier_name)
    segments = []
    for iv in tier.intervals:
        label = iv.text.strip()
        if not label or label in inventory.consonants:
            continue
        if label not in inventory:
            log.warning("tier %r: skipping interval [%g, %g] with unknown label %r",
                        tier_name, iv.xmin, iv.xmax, label)
            continue
        if iv.xmax > iv.xmin:
            segments.append(VowelSegment(label=label, start=iv.xmin, end=iv.xmax,
                                         token_id=token_id))
    return segments


def read_textgrid(path) -> TextGrid:
    with open(path, "rb") as fh:
        return parse_textgrid(fh.read())


def write_textgrid(grid: TextGrid, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_textgrid(grid))
