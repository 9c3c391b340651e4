"""Readers and writers for the toolkit's file formats.

Formats (all UTF-8):
  interactions  TSV  user_id, item_id, weight, timestamp (no header)
  run (id form) TSV  user_id, item_id, rank, score (ranks 1-based contiguous)
  run (text)    TSV  user_id, position, text
  judgments     TSV  user_id, item_id
  catalog       TSV  item_id, item_name
  attributes    CSV  header: user_id, attr1, attr2, ... (empty = unspecified)
  grouping spec JSON {"attributes": [{"name", "type": bins|map|passthrough, ...}]}

Parse failures raise InputError with file and line diagnostics.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .effectiveness import RankedRun, UserEffectiveness
from .errors import InputError
from .grouping import BinRule, GroupingSpec, MapRule, PassthroughRule
from .prep import Interaction, SplitDataset


def _fail(path: Path, lineno: int, msg: str) -> InputError:
    return InputError(f"{path}:{lineno}: {msg}")


def _rows(path: Path, n_fields: int, what: str) -> Iterable[tuple[int, list[str]]]:
    with path.open(encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != n_fields:
                raise _fail(path, lineno, f"expected {n_fields} tab-separated fields for {what}")
            yield lineno, fields


def read_interactions(path: str | Path) -> list[Interaction]:
    path = Path(path)
    out = []
    for lineno, (user, item, weight, ts) in _rows(path, 4, "interaction"):
        try:
            out.append(Interaction(user, item, float(weight), int(ts)))
        except (ValueError, InputError) as exc:
            raise _fail(path, lineno, str(exc)) from None
    return out


def write_interactions(path: str | Path, rows: Sequence[Interaction]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for r in rows:
            fh.write(f"{r.user_id}\t{r.item_id}\t{r.weight:g}\t{r.timestamp}\n")


def write_split(out_dir: str | Path, split: SplitDataset) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_interactions(out / "train.tsv", split.train)
    write_interactions(out / "val.tsv", split.val)
    write_interactions(out / "test.tsv", split.test)


def read_run(path: str | Path, system_id: str = "") -> RankedRun:
    """Id-form run file; ranks must be 1-based and contiguous per user."""
    path = Path(path)
    per_user: dict[str, list[tuple[int, str, float]]] = {}
    for lineno, (user, item, rank, score) in _rows(path, 4, "run line"):
        try:
            per_user.setdefault(user, []).append((int(rank), item, float(score)))
        except ValueError as exc:
            raise _fail(path, lineno, str(exc)) from None
    rankings: dict[str, tuple[str, ...]] = {}
    scores: dict[str, tuple[float, ...]] = {}
    for user in sorted(per_user):
        entries = sorted(per_user[user])
        ranks = [r for r, _, _ in entries]
        if ranks != list(range(1, len(ranks) + 1)):
            raise InputError(f"{path}: user {user!r} ranks are not 1-based contiguous")
        rankings[user] = tuple(item for _, item, _ in entries)
        scores[user] = tuple(s for _, _, s in entries)
    return RankedRun(system_id=system_id or path.stem, rankings=rankings, scores=scores)


def write_run(path: str | Path, run: RankedRun) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for user in sorted(run.rankings):
            items = run.rankings[user]
            scores = run.scores.get(user, (0.0,) * len(items)) if run.scores else (0.0,) * len(items)
            for rank, (item, score) in enumerate(zip(items, scores), start=1):
                fh.write(f"{user}\t{item}\t{rank}\t{score:.6f}\n")


def read_judgments(path: str | Path) -> dict[str, frozenset[str]]:
    path = Path(path)
    rel: dict[str, set[str]] = {}
    for _, (user, item) in _rows(path, 2, "judgment"):
        rel.setdefault(user, set()).add(item)
    return {u: frozenset(items) for u, items in rel.items()}


def read_free_text_run(path: str | Path) -> dict[str, list[str]]:
    """Free-text run; positions must be 1-based contiguous per user."""
    path = Path(path)
    per_user: dict[str, list[tuple[int, str]]] = {}
    for lineno, (user, pos, text) in _rows(path, 3, "free-text line"):
        try:
            per_user.setdefault(user, []).append((int(pos), text))
        except ValueError as exc:
            raise _fail(path, lineno, str(exc)) from None
    out: dict[str, list[str]] = {}
    for user in sorted(per_user):
        entries = sorted(per_user[user])
        if [p for p, _ in entries] != list(range(1, len(entries) + 1)):
            raise InputError(f"{path}: user {user!r} positions are not 1-based contiguous")
        out[user] = [t for _, t in entries]
    return out


def read_catalog(path: str | Path) -> list[tuple[str, str]]:
    path = Path(path)
    return [(item_id, name) for _, (item_id, name) in _rows(path, 2, "catalog item")]


def read_attributes(path: str | Path) -> dict[str, dict[str, str]]:
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty attribute table") from None
        if not header or header[0] != "user_id":
            raise InputError(f"{path}: first attribute column must be 'user_id'")
        names = header[1:]
        out: dict[str, dict[str, str]] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise _fail(path, lineno, f"expected {len(header)} columns")
            out[row[0]] = {name: value for name, value in zip(names, row[1:]) if value != ""}
    return out


def parse_grouping_spec(doc: Mapping[str, object]) -> GroupingSpec:
    attrs = doc.get("attributes")
    if not isinstance(attrs, list) or not attrs:
        raise InputError("grouping spec needs a nonempty 'attributes' list")
    rules = []
    for entry in attrs:
        name = entry.get("name")
        kind = entry.get("type")
        if not name or not isinstance(name, str):
            raise InputError("every grouping attribute needs a 'name'")
        if kind == "passthrough":
            rules.append(PassthroughRule(name))
        elif kind == "map":
            mapping = entry.get("mapping")
            if not isinstance(mapping, dict) or not mapping:
                raise InputError(f"attribute {name!r}: map rule needs a nonempty 'mapping'")
            rules.append(MapRule(name, {str(k): str(v) for k, v in mapping.items()}))
        elif kind == "bins":
            edges = entry.get("edges")
            labels = entry.get("labels")
            if not isinstance(edges, list) or not isinstance(labels, list):
                raise InputError(f"attribute {name!r}: bins rule needs 'edges' and 'labels'")
            rules.append(BinRule(name, tuple(float(e) for e in edges), tuple(str(l) for l in labels)))
        else:
            raise InputError(f"attribute {name!r}: unknown rule type {kind!r}")
    return GroupingSpec(tuple(rules))


def read_grouping_spec(path: str | Path) -> GroupingSpec:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    return parse_grouping_spec(doc)


# ---------------------------------------------------------------------------
# report writers


def write_user_effectiveness(
    path: str | Path, per_user: Sequence[UserEffectiveness], means: Mapping[str, float]
) -> None:
    """Per-user scores plus an ALL summary row."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("user_id\thr\tmrr\tp\tndcg\n")
        for u in per_user:
            fh.write(f"{u.user_id}\t{u.hr}\t{u.mrr:.6f}\t{u.precision:.6f}\t{u.ndcg:.6f}\n")
        fh.write(
            "ALL\t{hr:.6f}\t{mrr:.6f}\t{precision:.6f}\t{ndcg:.6f}\n".format(**means)
        )


def format_value(value: float | None) -> str:
    return "" if value is None else f"{value:.10g}"


def write_json(path: str | Path, payload: object) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
