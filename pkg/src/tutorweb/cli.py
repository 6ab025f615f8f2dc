"""Command-line entry point: serve, simulate, analyze, import, export, stats."""
from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import click

from .allocation import AllocationPolicy, difficulty
from .anova import AnovaTable
from .store import Store
from .trial import SimParams, read_dataset, run_trial, write_dataset

DATA_DIR_OPTION = click.option(
    "--data-dir", envvar="TUTORWEB_DATA_DIR", default="./data",
    show_default=True, help="directory holding content, roster and log",
)


def _format_p(p: float | None, note: str) -> str:
    if p is None:
        return "-"
    if note == "underflow" or (p == 0.0):
        return "<1e-300"
    return f"{p:.4g}"


def _table_lines(table: AnovaTable) -> list[str]:
    lines = [
        f"{'Term':<16}{'Df':>6}{'Sum Sq':>14}{'F value':>12}{'Pr(>F)':>12}"
    ]
    for row in table.rows:
        f_txt = "-" if row.f is None else f"{row.f:.4g}"
        lines.append(
            f"{row.term:<16}{row.df:>6}{row.ss:>14.4f}"
            f"{f_txt:>12}{_format_p(row.p, row.note):>12}"
        )
    lines.append(
        f"{'Residuals':<16}{table.residual_df:>6}{table.residual_ss:>14.4f}"
        f"{'':>12}{'':>12}"
    )
    for note in table.notes:
        lines.append(f"  note: {note}")
    return lines


def _table_record(table: AnovaTable) -> dict:
    return {
        "rows": [
            {
                "term": r.term, "df": r.df, "ss": r.ss,
                "f": r.f, "p": r.p, "note": r.note,
            }
            for r in table.rows
        ],
        "residual": {"df": table.residual_df, "ss": table.residual_ss},
        "total_ss": table.total_ss,
        "notes": table.notes,
    }


@click.group()
@click.version_option(package_name="tutorweb")
def main() -> None:
    """Adaptive quizzing engine with a crossover-trial harness."""


@main.command()
@DATA_DIR_OPTION
@click.option("--port", envvar="TUTORWEB_PORT", default=8080, show_default=True,
              type=int)
@click.option("--seed", default=0, show_default=True,
              help="seed for allocation draws")
@click.option("--k", default=8.0, show_default=True,
              help="allocation PMF concentration")
def serve(data_dir: str, port: int, seed: int, k: float) -> None:
    """Run the quiz service."""
    import uvicorn

    from .service import create_app

    app = create_app(data_dir, seed=seed, policy=AllocationPolicy(k=k))
    uvicorn.run(app, host="127.0.0.1", port=port)


@main.command()
@click.option("--students", default=184, show_default=True)
@click.option("--periods", default=4, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--reps", default=1, show_default=True,
              help="replications; >1 prints a rejection-rate summary instead")
@click.option("--alpha", default=0.05, show_default=True)
@click.option("--treatment-effect", default=0.0, show_default=True)
@click.option("--math-effect", default=1.0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False),
              required=True)
def simulate(students: int, periods: int, seed: int, reps: int, alpha: float,
             treatment_effect: float, math_effect: float,
             out_path: str) -> None:
    """Generate crossover exam-score data (or a calibration summary)."""
    if periods != 4:
        raise click.ClickException("only 4-period designs are supported")
    try:
        params = SimParams(
            n_students=students, seed=seed,
            treatment_effect=treatment_effect, math_effect=math_effect,
        )
    except ValueError as exc:
        raise click.ClickException(str(exc))

    if reps == 1:
        run = run_trial(params, alpha=alpha)
        write_dataset(out_path, run.records)
        manifest = {
            "seed": seed,
            "params": dataclasses.asdict(params),
        }
        Path(f"{out_path}.manifest.json").write_text(
            json.dumps(manifest, indent=2) + "\n", "utf-8"
        )
        click.echo(f"wrote {len(run.records)} records to {out_path}")
        return

    rejections: dict[str, int] = {}
    terms: list[str] = []
    for i in range(reps):
        rep_params = dataclasses.replace(params, seed=seed + i)
        run = run_trial(rep_params, alpha=alpha)
        for row in run.table.rows:
            if row.term not in rejections:
                rejections[row.term] = 0
                terms.append(row.term)
            if row.p is not None and row.p <= alpha:
                rejections[row.term] += 1
    summary = {
        "reps": reps, "alpha": alpha, "seed": seed,
        "rejection_rate": {t: rejections[t] / reps for t in terms},
    }
    Path(out_path).write_text(json.dumps(summary, indent=2) + "\n", "utf-8")
    click.echo(f"{'Term':<16}{'rejections':>12}{'rate':>8}")
    for t in terms:
        click.echo(f"{t:<16}{rejections[t]:>12}{rejections[t] / reps:>8.3f}")


@main.command()
@click.option("--in", "in_path", type=click.Path(dir_okay=False),
              required=True)
@click.option("--alpha", default=0.05, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False),
              default=None, help="also write the result as a record file")
def analyze(in_path: str, alpha: float, out_path: str | None) -> None:
    """Fit the crossover model on a trial data file."""
    from .anova import backward_eliminate, sequential_anova

    try:
        records = read_dataset(in_path)
    except OSError as exc:
        raise click.ClickException(f"cannot read {in_path}: {exc}")
    except (ValueError, KeyError) as exc:
        raise click.ClickException(f"bad trial data in {in_path}: {exc}")
    if not records:
        raise click.ClickException(f"{in_path} holds no records")

    table = sequential_anova(records)
    trace, reduced = backward_eliminate(records, alpha=alpha)

    click.echo("Initial model")
    for line in _table_lines(table):
        click.echo(line)
    click.echo("")
    if trace:
        click.echo("Eliminated (in order)")
        for term, p in trace:
            click.echo(f"  {term}  (p = {p:.4g})")
    else:
        click.echo("Eliminated: none")
    click.echo("")
    click.echo("Reduced model")
    for line in _table_lines(reduced):
        click.echo(line)

    if out_path:
        record = {
            "initial": _table_record(table),
            "eliminated": [{"term": t, "p": p} for t, p in trace],
            "reduced": _table_record(reduced),
            "alpha": alpha,
        }
        Path(out_path).write_text(json.dumps(record, indent=2) + "\n", "utf-8")


@main.command("import")
@DATA_DIR_OPTION
@click.option("--in", "in_path", type=click.Path(dir_okay=False),
              required=True)
def import_content(data_dir: str, in_path: str) -> None:
    """Load a content document (tree plus items) into the data directory."""
    try:
        document = json.loads(Path(in_path).read_text("utf-8"))
    except OSError as exc:
        raise click.ClickException(f"cannot read {in_path}: {exc}")
    except ValueError as exc:
        raise click.ClickException(f"{in_path} is not valid JSON: {exc}")
    try:
        tree, bank = Store.build_content(document)
    except Exception as exc:
        raise click.ClickException(f"bad content document: {exc}")
    problems = tree.validate()
    if problems:
        raise click.ClickException("; ".join(problems))
    Store(data_dir).save_content(tree, bank)
    click.echo(
        f"imported {len(tree.nodes)} nodes, {len(bank.questions)} questions, "
        f"{len(bank.templates)} templates"
    )


@main.command()
@DATA_DIR_OPTION
@click.option("--out", "out_path", type=click.Path(dir_okay=False),
              required=True)
def export(data_dir: str, out_path: str) -> None:
    """Write the stored content document to a file."""
    tree, bank = Store(data_dir).load_content()
    document = {"content": tree.to_document(), "items": bank.to_records()}
    Path(out_path).write_text(json.dumps(document, indent=2) + "\n", "utf-8")
    click.echo(f"wrote {out_path}")


@main.command()
@click.argument("lecture")
@DATA_DIR_OPTION
@click.option("--k", default=8.0, show_default=True)
def stats(lecture: str, data_dir: str, k: float) -> None:
    """Show the ranked difficulty table for a lecture."""
    from .errors import TutorWebError

    store = Store(data_dir)
    try:
        engine = store.build_engine(
            AllocationPolicy(k=k), skip_unknown=True
        )
        ranked = engine.rank_items(lecture)
    except TutorWebError as exc:
        raise click.ClickException(str(exc))
    click.echo(
        f"{'rank':<6}{'question':<16}{'allocated':>10}{'answered':>10}"
        f"{'correct':>9}{'difficulty':>12}"
    )
    for rank, qid in enumerate(ranked, start=1):
        s = engine.bank.question(qid).stats
        d = difficulty(s, engine.policy)
        click.echo(
            f"{rank:<6}{qid:<16}{s.times_allocated:>10}{s.times_answered:>10}"
            f"{s.times_correct:>9}{d:>12.4f}"
        )


if __name__ == "__main__":
    main()
