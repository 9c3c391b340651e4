"""Command-line front end.

Each data command parses local files into a service request, executes it
in-process by default or against a remote service via ``--server``, and
writes the response to plain CSV/TSV/JSON artifacts.

Exit codes: 0 success; 2 validation error; 3 completed with
degenerate-measure warnings.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path
from typing import Callable, Sequence

import click

from . import __version__
from . import io as fio
from .errors import FairscanError
from .pipeline import RunManifest
from .prep import Interaction
from .service import handlers
from .service import schemas as s

_LOCAL: dict[str, Callable] = {
    "/prep": handlers.handle_prep,
    "/eval": handlers.handle_eval,
    "/sweep": handlers.handle_sweep,
    "/decompose": handlers.handle_decompose,
    "/agree": handlers.handle_agree,
    "/match": handlers.handle_match,
}


def _call(server: str | None, route: str, request, response_type):
    if server is None:
        return _LOCAL[route](request)
    import httpx

    resp = httpx.post(
        server.rstrip("/") + route, json=request.model_dump(mode="json"), timeout=300
    )
    if resp.status_code >= 400:
        raise FairscanError(f"server rejected {route}: {resp.status_code} {resp.text}")
    return response_type.model_validate(resp.json())


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


def _finish(warnings: Sequence[str]) -> None:
    for w in warnings:
        click.echo(f"warning: {w}", err=True)
    if any("degenerate" in w for w in warnings):
        sys.exit(3)


def _out_dir(out: str) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


server_option = click.option("--server", default=None, help="Base URL of a running service; default is in-process.")
out_option = click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory.")
manifest_option = click.option("--manifest", "manifest_path", required=True, type=click.Path(), help="Manifest JSON path.")
base_option = click.option("--base", type=click.Choice(["p", "ndcg"]), default="ndcg", show_default=True, help="Per-user base score fed to fairness measures.")


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Fairness evaluation for ranked recommendation outputs."""


def _build_payload(
    manifest: RunManifest,
    base: str,
    k: int | None,
    epsilon: float | None,
    beta: float | None,
    worst_fraction: float | None,
    threshold: float | None,
) -> s.PipelinePayload:
    systems = []
    for entry in manifest.systems:
        run_path = manifest._resolve(entry["path"])
        if not run_path.exists():
            raise FairscanError(f"run file not found: {run_path}")
        if entry["form"] == "free_text":
            systems.append(
                s.SystemRunIn(id=entry["id"], form="free_text", texts=fio.read_free_text_run(run_path))
            )
        else:
            run = fio.read_run(run_path, entry["id"])
            systems.append(
                s.SystemRunIn(
                    id=entry["id"], form="id",
                    rankings={u: list(items) for u, items in run.rankings.items()},
                )
            )
    judg_path = manifest._resolve(manifest.judgments)
    if not judg_path.exists():
        raise FairscanError(f"judgments file not found: {judg_path}")
    judgments = {u: sorted(items) for u, items in fio.read_judgments(judg_path).items()}
    attributes = None
    grouping_spec = None
    if manifest.attributes and manifest.grouping_spec:
        attributes = fio.read_attributes(manifest._resolve(manifest.attributes))
        raw = json.loads(manifest._resolve(manifest.grouping_spec).read_text(encoding="utf-8"))
        fio.parse_grouping_spec(raw)  # fail fast on malformed rules
        grouping_spec = s.GroupingSpecIn.model_validate(raw)
    elif manifest.attributes or manifest.grouping_spec:
        raise FairscanError("attributes and grouping_spec must be given together")
    catalog = fio.read_catalog(manifest._resolve(manifest.catalog)) if manifest.catalog else None

    params = manifest.params
    if epsilon is not None:
        params = dataclasses.replace(params, atkinson_epsilon=epsilon)
    if beta is not None:
        params = dataclasses.replace(params, gce_beta=beta)
    if worst_fraction is not None:
        params = dataclasses.replace(params, worst_fraction=worst_fraction)
    eval_config = manifest.eval_config
    if k is not None:
        eval_config = dataclasses.replace(eval_config, k=k)
    return s.PipelinePayload(
        systems=systems,
        judgments=judgments,
        attributes=attributes,
        grouping_spec=grouping_spec,
        catalog=catalog,
        base=base,  # type: ignore[arg-type]
        eval=s.EvalConfigIn(**dataclasses.asdict(eval_config)),
        measures=s.MeasureParamsIn(**dataclasses.asdict(params)),
        matcher=s.MatcherConfigIn(**dataclasses.asdict(manifest.matcher_config)),
        agreement_threshold=threshold if threshold is not None else manifest.agreement_threshold,
    )


def _params_csv(params: dict) -> str:
    return ";".join(f"{k}={v}" for k, v in sorted(params.items()))


def _write_battery(path: Path, results: Sequence[s.MeasureResultOut]) -> None:
    with path.open("w", encoding="utf-8") as fh:
        fh.write("measure_id,subject_kind,value,orientation,params\n")
        for r in results:
            fh.write(
                f"{r.measure_id},{r.subject_kind},{fio.format_value(r.value)},"
                f"{r.orientation},{_params_csv(r.params)}\n"
            )


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Interactions TSV (user, item, weight, timestamp).")
@out_option
@click.option("--core-level", default=5, show_default=True, help="k-core threshold.")
@click.option("--ratio", default="3:1:1", show_default=True, help="train:val:test split ratio.")
@click.option("--min-train", default=0, show_default=True, help="Drop users/items with <= this many train interactions.")
@server_option
def prep(input_path: str, out: str, core_level: int, ratio: str, min_train: int, server: str | None) -> None:
    """k-core filter, temporal split, and train-based pruning."""
    try:
        parts = [int(p) for p in ratio.split(":")]
        if len(parts) != 3:
            raise ValueError
    except ValueError:
        _fail(f"--ratio must look like 3:1:1, got {ratio!r}")
        return
    try:
        rows = fio.read_interactions(input_path)
        req = s.PrepRequest(
            interactions=[(r.user_id, r.item_id, r.weight, r.timestamp) for r in rows],
            core_level=core_level,
            split_ratio=(parts[0], parts[1], parts[2]),
            min_train_interactions=min_train,
        )
        resp = _call(server, "/prep", req, s.PrepResponse)
        out_path = _out_dir(out)
        for name, split_rows in (("train", resp.train), ("val", resp.val), ("test", resp.test)):
            fio.write_interactions(
                out_path / f"{name}.tsv", [Interaction(u, i, w, t) for u, i, w, t in split_rows]
            )
        fio.write_json(out_path / "prep_stats.json", resp.stats)
    except FairscanError as exc:
        _fail(str(exc))
    click.echo(f"prep: wrote train/val/test.tsv and prep_stats.json to {out}")


def _load_manifest(manifest_path: str) -> RunManifest:
    return RunManifest.from_json(manifest_path)


@main.command()
@manifest_option
@out_option
@click.option("--k", type=int, default=None, help="Ranking cutoff (overrides manifest).")
@base_option
@click.option("--epsilon", type=float, default=None, help="Atkinson inequality aversion.")
@click.option("--beta", type=float, default=None, help="Generalized cross entropy exponent.")
@click.option("--worst-fraction", type=float, default=None, help="Worst-off share for the min measure.")
@server_option
def eval(manifest_path: str, out: str, k: int | None, base: str, epsilon: float | None, beta: float | None, worst_fraction: float | None, server: str | None) -> None:
    """Effectiveness plus group/individual fairness batteries per system."""
    try:
        manifest = _load_manifest(manifest_path)
        payload = _build_payload(manifest, base, k, epsilon, beta, worst_fraction, None)
        resp = _call(server, "/eval", payload, s.EvalResponse)
        out_path = _out_dir(out)
        summary: dict[str, object] = {"base": resp.base, "k": resp.k, "systems": {}}
        for system in resp.systems:
            fio.write_user_effectiveness(
                out_path / f"{system.system_id}.users.tsv",
                [_user_eff(u) for u in system.users],
                system.means,
            )
            results = list(system.individual) + list(system.group or [])
            _write_battery(out_path / f"{system.system_id}.fairness.csv", results)
            summary["systems"][system.system_id] = {  # type: ignore[index]
                "means": system.means,
                "n_groups": system.n_groups,
                "excluded_users": system.excluded_users,
            }
        fio.write_json(out_path / "eval_summary.json", summary)
    except FairscanError as exc:
        _fail(str(exc))
        return
    click.echo(f"eval: wrote per-system reports for {len(resp.systems)} system(s) to {out}")
    _finish(resp.warnings)


def _user_eff(u: s.UserEffectivenessOut):
    from .effectiveness import UserEffectiveness

    return UserEffectiveness(u.user_id, u.hr, u.mrr, u.p, u.ndcg)


@main.command()
@manifest_option
@out_option
@base_option
@click.option("--epsilon", type=float, default=None, help="Atkinson inequality aversion.")
@server_option
def sweep(manifest_path: str, out: str, base: str, epsilon: float | None, server: str | None) -> None:
    """Fairness vs. number of grouping attributes, over all attribute subsets."""
    try:
        manifest = _load_manifest(manifest_path)
        payload = _build_payload(manifest, base, None, epsilon, None, None, None)
        resp = _call(server, "/sweep", payload, s.SweepResponse)
        out_path = _out_dir(out)
        for system in resp.systems:
            with (out_path / f"{system.system_id}.sweep.csv").open("w", encoding="utf-8") as fh:
                fh.write("level,measure_id,value\n")
                for m in system.means:
                    fh.write(f"{m.n_attributes},{m.measure_id},{fio.format_value(m.value)}\n")
                for r in system.individual:
                    fh.write(f"individual,{r.measure_id},{fio.format_value(r.value)}\n")
            with (out_path / f"{system.system_id}.sweep_detail.csv").open("w", encoding="utf-8") as fh:
                fh.write("n_attributes,attributes,n_groups,measure_id,value\n")
                for c in system.cells:
                    fh.write(
                        f"{c.n_attributes},{'+'.join(c.attributes)},{c.n_groups},"
                        f"{c.measure_id},{fio.format_value(c.value)}\n"
                    )
    except FairscanError as exc:
        _fail(str(exc))
        return
    click.echo(f"sweep: wrote grouping sweeps for {len(resp.systems)} system(s) to {out}")
    _finish(resp.warnings)


@main.command()
@manifest_option
@out_option
@base_option
@click.option("--epsilon", type=float, default=None, help="Atkinson inequality aversion.")
@server_option
def decompose(manifest_path: str, out: str, base: str, epsilon: float | None, server: str | None) -> None:
    """Between/within-group decomposition for every grouping in the sweep."""
    try:
        manifest = _load_manifest(manifest_path)
        payload = _build_payload(manifest, base, None, epsilon, None, None, None)
        resp = _call(server, "/decompose", payload, s.DecomposeResponse)
        out_path = _out_dir(out)
        for system in resp.systems:
            with (out_path / f"{system.system_id}.decomposition.csv").open("w", encoding="utf-8") as fh:
                fh.write("grouping_id,n_groups,measure_id,total,between,within,residual\n")
                for r in system.rows:
                    fh.write(
                        f"{r.grouping_id},{r.n_groups},{r.measure_id},"
                        f"{fio.format_value(r.total)},{fio.format_value(r.between)},"
                        f"{fio.format_value(r.within)},{fio.format_value(r.residual)}\n"
                    )
    except FairscanError as exc:
        _fail(str(exc))
        return
    click.echo(f"decompose: wrote decomposition tables for {len(resp.systems)} system(s) to {out}")
    _finish(resp.warnings)


@main.command()
@manifest_option
@out_option
@base_option
@click.option("--threshold", type=float, default=None, help="Equivalence threshold on tau (default from manifest, 0.9).")
@server_option
def agree(manifest_path: str, out: str, base: str, threshold: float | None, server: str | None) -> None:
    """Kendall tau-b agreement between fairness measures' system rankings."""
    try:
        manifest = _load_manifest(manifest_path)
        payload = _build_payload(manifest, base, None, None, None, None, threshold)
        resp = _call(server, "/agree", payload, s.AgreeResponse)
        out_path = _out_dir(out)
        _write_matrix(out_path / "agreement_ind_group.csv", resp.ind_group)
        _write_matrix(out_path / "agreement_full.csv", resp.full)
        fio.write_json(
            out_path / "agreement_summary.json",
            {
                "threshold": resp.threshold,
                "equivalent_pairs": resp.equivalent_pairs,
                "undefined_cells": resp.ind_group.undefined,
                "excluded_series": resp.ind_group.excluded,
            },
        )
    except FairscanError as exc:
        _fail(str(exc))
        return
    click.echo(f"agree: wrote agreement matrices to {out}")
    _finish(resp.warnings)


def _write_matrix(path: Path, matrix: s.MatrixOut) -> None:
    with path.open("w", encoding="utf-8") as fh:
        fh.write("measure," + ",".join(matrix.cols) + "\n")
        for row_id, row in zip(matrix.rows, matrix.cells):
            cells = ["undefined" if v is None else f"{v:.6f}" for v in row]
            fh.write(row_id + "," + ",".join(cells) + "\n")


@main.command()
@click.option("--manifest", "manifest_path", default=None, type=click.Path(), help="Manifest with free-text systems and a catalog.")
@click.option("--catalog", "catalog_path", default=None, type=click.Path(exists=True, dir_okay=False), help="Catalog TSV (item_id, name); direct mode.")
@click.option("--run", "run_path", default=None, type=click.Path(exists=True, dir_okay=False), help="Free-text run TSV; direct mode.")
@out_option
@click.option("--threshold", type=float, default=None, help="Cosine similarity threshold for a match.")
@server_option
def match(manifest_path: str | None, catalog_path: str | None, run_path: str | None, out: str, threshold: float | None, server: str | None) -> None:
    """Resolve free-text recommendation lines to catalog item ids."""
    try:
        jobs: list[tuple[str, list[tuple[str, str]], dict[str, list[str]], s.MatcherConfigIn]] = []
        if manifest_path is not None:
            manifest = _load_manifest(manifest_path)
            if not manifest.catalog:
                _fail("manifest has no catalog; required for matching")
            catalog = fio.read_catalog(manifest._resolve(manifest.catalog))
            cfg = s.MatcherConfigIn(**dataclasses.asdict(manifest.matcher_config))
            if threshold is not None:
                cfg = cfg.model_copy(update={"similarity_threshold": threshold})
            for entry in manifest.systems:
                if entry["form"] != "free_text":
                    continue
                texts = fio.read_free_text_run(manifest._resolve(entry["path"]))
                jobs.append((entry["id"], catalog, texts, cfg))
            if not jobs:
                _fail("manifest has no free-text systems to match")
        elif catalog_path is not None and run_path is not None:
            cfg = s.MatcherConfigIn()
            if threshold is not None:
                cfg = cfg.model_copy(update={"similarity_threshold": threshold})
            jobs.append(
                (Path(run_path).stem, fio.read_catalog(catalog_path), fio.read_free_text_run(run_path), cfg)
            )
        else:
            _fail("give either --manifest or both --catalog and --run")
        out_path = _out_dir(out)
        for system_id, catalog, texts, cfg in jobs:
            resp = _call(server, "/match", s.MatchRequest(catalog=catalog, texts=texts, matcher=cfg), s.MatchResponse)
            with (out_path / f"{system_id}.run.tsv").open("w", encoding="utf-8") as fh:
                for user in sorted(resp.resolved):
                    for rank, line in enumerate(resp.resolved[user], start=1):
                        fh.write(f"{user}\t{line.item_id}\t{rank}\t{line.score:.6f}\n")
    except FairscanError as exc:
        _fail(str(exc))
        return
    click.echo(f"match: wrote id-form runs for {len(jobs)} system(s) to {out}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8350, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("fairscan.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
