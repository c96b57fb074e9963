"""Season result files -> game sequences.

Canonical CSV schema (UTF-8, header required)::

    date,home,away,home_score,away_score[,reg_home_score,reg_away_score]

``date`` is ISO-8601 (``YYYY-MM-DD``). The optional regulation-time scores
are needed only for ``ternary_regulation`` mode.
"""
from __future__ import annotations

import csv
import datetime as dt
import enum
from dataclasses import dataclass
from pathlib import Path

from .schedule import GameRecord

BASE_COLUMNS = ("date", "home", "away", "home_score", "away_score")
REG_COLUMNS = ("reg_home_score", "reg_away_score")


class IngestError(ValueError):
    """Malformed input, reported with ``file:line`` provenance."""


class Mode(str, enum.Enum):
    BINARY_FINAL = "binary_final"
    TERNARY_REGULATION = "ternary_regulation"
    TERNARY_FINAL = "ternary_final"

    @property
    def n_outcomes(self) -> int:
        return 2 if self is Mode.BINARY_FINAL else 3


@dataclass(frozen=True)
class RawGameRow:
    date: dt.date
    home_name: str
    away_name: str
    home_score: int
    away_score: int
    reg_home_score: int | None = None
    reg_away_score: int | None = None

    def __post_init__(self):
        scores = [self.home_score, self.away_score, self.reg_home_score, self.reg_away_score]
        if any(s is not None and s < 0 for s in scores):
            raise ValueError("scores must be nonnegative")
        if (self.reg_home_score is None) != (self.reg_away_score is None):
            raise ValueError("regulation scores must be given together")
        if self.reg_home_score is not None and (
                self.reg_home_score > self.home_score or self.reg_away_score > self.away_score):
            raise ValueError("regulation scores exceed final scores")
        if self.home_name == self.away_name:
            raise ValueError("a team cannot play itself")


@dataclass
class SeasonData:
    team_index: dict[str, int]
    games: list[GameRecord]
    rows: list[RawGameRow]
    mode: Mode
    source: str = ""

    @property
    def M(self) -> int:
        return len(self.team_index)

    @property
    def T(self) -> int:
        return len(self.games)

    @property
    def team_names(self) -> list[str]:
        return sorted(self.team_index, key=self.team_index.get)

    def outcomes(self) -> list[int]:
        return [g.outcome for g in self.games]


def derive_outcome(home_score: int, away_score: int, mode: Mode | str) -> int:
    """Ordinal outcome from the home side: binary 0/1, ternary 0/1/2 (draw = 1)."""
    mode = Mode(mode)
    if home_score < 0 or away_score < 0:
        raise ValueError("scores must be nonnegative")
    if mode is Mode.BINARY_FINAL:
        if home_score == away_score:
            raise ValueError(f"tied game {home_score}-{away_score} in binary mode")
        return int(home_score > away_score)
    if home_score == away_score:
        return 1
    return 2 if home_score > away_score else 0


def _int_field(value: str, name: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"{name} is not an integer: {value!r}") from None


def _parse_row(rec: dict, has_reg: bool) -> RawGameRow:
    try:
        date = dt.date.fromisoformat(rec["date"].strip())
    except ValueError:
        raise ValueError(f"bad date {rec['date']!r}") from None
    reg_h = reg_a = None
    if has_reg and (rec["reg_home_score"] or "").strip():
        reg_h = _int_field(rec["reg_home_score"], "reg_home_score")
        reg_a = _int_field(rec["reg_away_score"], "reg_away_score")
    return RawGameRow(
        date,
        rec["home"].strip(),
        rec["away"].strip(),
        _int_field(rec["home_score"], "home_score"),
        _int_field(rec["away_score"], "away_score"),
        reg_h,
        reg_a,
    )


def read_rows(path) -> tuple[list[RawGameRow], bool, list[int]]:
    """Parse the canonical CSV.

    Returns the rows in file order, whether the regulation columns exist, and
    the line number of each row.
    """
    path = Path(path)
    rows, lines = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = tuple(h.strip() for h in (reader.fieldnames or ()))
        reader.fieldnames = list(header)
        if header[:5] != BASE_COLUMNS or header[5:] not in ((), REG_COLUMNS):
            raise IngestError(f"{path}:1: header {','.join(header)!r} does not match "
                              f"{','.join(BASE_COLUMNS)}[,{','.join(REG_COLUMNS)}]")
        has_reg = header[5:] == REG_COLUMNS
        for rec in reader:
            line = reader.line_num
            if None in rec or any(v is None for v in rec.values()):
                raise IngestError(f"{path}:{line}: wrong number of fields")
            try:
                rows.append(_parse_row(rec, has_reg))
            except ValueError as exc:
                raise IngestError(f"{path}:{line}: {exc}") from None
            lines.append(line)
    return rows, has_reg, lines


def parse_season(path, mode: Mode | str = Mode.BINARY_FINAL) -> SeasonData:
    """Read one season file into date-ordered games with day stamps.

    Teams are indexed in order of first appearance; ``tau`` counts days
    since the season's first game. Games on the same date keep file order.
    """
    try:
        mode = Mode(mode)
    except ValueError:
        raise ValueError(f"unknown mode {mode!r}; expected one of {[m.value for m in Mode]}") from None
    rows, has_reg, lines = read_rows(path)
    if mode is Mode.TERNARY_REGULATION and not has_reg:
        raise ValueError(f"{path}: ternary_regulation mode needs {','.join(REG_COLUMNS)} columns")
    if not rows:
        raise IngestError(f"{path}: no games")
    numbered = sorted(enumerate(rows), key=lambda pair: pair[1].date)
    first = numbered[0][1].date
    team_index: dict[str, int] = {}
    for row in rows:
        for name in (row.home_name, row.away_name):
            team_index.setdefault(name, len(team_index))
    games = []
    for t, (k, row) in enumerate(numbered, start=1):
        if mode is Mode.TERNARY_REGULATION:
            if row.reg_home_score is None:
                raise IngestError(f"{path}:{lines[k]}: missing regulation scores")
            hs, as_ = row.reg_home_score, row.reg_away_score
        else:
            hs, as_ = row.home_score, row.away_score
        try:
            y = derive_outcome(hs, as_, mode)
        except ValueError as exc:
            raise IngestError(f"{path}:{lines[k]}: {exc}") from None
        games.append(GameRecord(t, (row.date - first).days,
                                (team_index[row.home_name],), (team_index[row.away_name],), y))
    return SeasonData(team_index, games, rows, mode, str(path))


def write_rows(path, rows, with_regulation: bool | None = None) -> None:
    """Serialize rows in the canonical schema (inverse of :func:`read_rows`)."""
    if with_regulation is None:
        with_regulation = any(r.reg_home_score is not None for r in rows)
    header = BASE_COLUMNS + (REG_COLUMNS if with_regulation else ())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in rows:
            rec = [r.date.isoformat(), r.home_name, r.away_name, r.home_score, r.away_score]
            if with_regulation:
                rec += ["" if r.reg_home_score is None else r.reg_home_score,
                        "" if r.reg_away_score is None else r.reg_away_score]
            writer.writerow(rec)
