"""Command-line driver: serve, consult, ingest, train, eval, data.

Machine-readable output (JSON/JSONL) goes to stdout; human-facing text goes
to stderr.  Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import json
import random
import sys

import click

from . import boss as boss_mod
from . import casebank, datasets, evalharness, receptionist as recep_mod
from .backends import MockBackend, OpenAICompatBackend
from .core import AblationConfig, Speaker, TolcTrigger, Turn, load_domains
from .errors import LawluoError
from .orchestrator import default_orchestrator, fixed_clock, run_script
from .secretary import render_text


def _make_backend(profile: str):
    if profile == "mock":
        return MockBackend()
    return OpenAICompatBackend.from_env()


def _ablation_config(receptionist, role_enhancement, tolc, boss, trigger, threshold, n_candidates):
    return AblationConfig(
        receptionist_enabled=receptionist,
        role_enhancement_enabled=role_enhancement,
        tolc_enabled=tolc,
        boss_enabled=boss,
        tolc_trigger=TolcTrigger(trigger, threshold),
        n_candidates=n_candidates,
    )


def _ablation_options(fn):
    options = [
        click.option("--receptionist/--no-receptionist", default=True, show_default=True),
        click.option("--role-enhancement/--no-role-enhancement", default=True, show_default=True),
        click.option("--tolc/--no-tolc", default=True, show_default=True),
        click.option("--boss/--no-boss", default=True, show_default=True),
        click.option("--trigger", type=click.Choice(["always", "never", "short_query"]), default="short_query", show_default=True),
        click.option("--threshold", type=int, default=12, show_default=True, help="short_query token threshold"),
        click.option("--n-candidates", type=int, default=3, show_default=True),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


@click.group()
def cli():
    """Multi-agent legal consultation engine."""


@cli.command()
@click.option("--data-dir", default="./lawluo-data", show_default=True)
@click.option("--backend", type=click.Choice(["mock", "live"]), default="mock", show_default=True)
@click.option("--host", default=None, help="override LAWLUO_LISTEN host")
@click.option("--port", type=int, default=None, help="override LAWLUO_LISTEN port")
def serve(data_dir, backend, host, port):
    """Start the consultation service."""
    import uvicorn

    from .service import create_app, listen_address

    orchestrator = default_orchestrator(data_dir, backend=_make_backend(backend))
    env_host, env_port = listen_address()
    uvicorn.run(create_app(orchestrator), host=host or env_host, port=port or env_port)


@cli.command()
@click.option("--data-dir", default=None, help="session store path (default: temp dir)")
@click.option("--backend", type=click.Choice(["mock", "live"]), default="mock", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--script", type=click.Path(exists=True), default=None, help="scripted user lines / @marks answers")
@click.option("--date", default="2024-01-01", show_default=True, help="consultation date (determinism)")
@_ablation_options
def consult(data_dir, backend, seed, script, date, receptionist, role_enhancement, tolc, boss, trigger, threshold, n_candidates):
    """Run a consultation session in the terminal."""
    import tempfile

    if data_dir is None:
        data_dir = tempfile.mkdtemp(prefix="lawluo-")
    clock = fixed_clock(date + "T00:00:00+00:00") if backend == "mock" else None
    orchestrator = default_orchestrator(data_dir, backend=_make_backend(backend), clock=clock)
    config = _ablation_config(receptionist, role_enhancement, tolc, boss, trigger, threshold, n_candidates)

    if script:
        with open(script, encoding="utf-8") as fh:
            lines = fh.readlines()
        outcome = run_script(orchestrator, config, lines, seed=seed, created_date=date)
        json.dump(
            {
                "transcript": outcome["transcript"],
                "report": outcome["report"].to_dict(),
                "event_log": outcome["event_log"],
            },
            sys.stdout,
            ensure_ascii=False,
            indent=2,
        )
        sys.stdout.write("\n")
        return

    _interactive_consult(orchestrator, config, seed, date)


def _interactive_consult(orchestrator, config, seed, date):
    session = orchestrator.create_session(config, seed=seed, created_date=date)
    sid = session.session_id
    click.echo(f"session {sid}; empty line to close", err=True)
    while True:
        line = click.prompt("you", default="", show_default=False, err=True)
        if not line.strip():
            break
        result = orchestrator.handle_user_message(sid, line)
        if result.kind == "awaiting_marks":
            marks = {}
            click.echo("please answer the clarification questions (y/n/enter to skip):", err=True)
            for node in result.tree["nodes"]:
                if node["index"] == 1:
                    continue
                answer = click.prompt(f"  {node['index']}. {node['text']}", default="", show_default=False, err=True)
                if answer.lower().startswith("y"):
                    marks[node["index"]] = "yes"
                elif answer.lower().startswith("n"):
                    marks[node["index"]] = "no"
            reply = orchestrator.submit_marks(sid, marks)
        else:
            reply = result.text
        click.echo(f"lawyer: {reply}", err=True)
    final = orchestrator.get_session(sid)
    if any(t.speaker is Speaker.LAWYER for t in final.transcript):
        report = orchestrator.close_session(sid)
        click.echo(render_text(report), err=True)
        json.dump(report.to_dict(), sys.stdout, ensure_ascii=False)
        sys.stdout.write("\n")


@cli.command()
@click.option("--cases", "cases_path", type=click.Path(), required=True)
@click.option("--backend", type=click.Choice(["mock", "live"]), default="mock", show_default=True)
@click.option("--out", type=click.Path(), required=True, help="index output path")
def ingest(cases_path, backend, out):
    """Ingest a case corpus and build its vector index."""
    be = _make_backend(backend)
    bank = casebank.ingest(cases_path)
    for warning in bank.warnings:
        click.echo(f"warning: {warning}", err=True)
    index = casebank.build_index(bank, be)
    casebank.save_index(index, out)
    json.dump({"cases": len(bank), "dimension": index.dimension}, sys.stdout)
    sys.stdout.write("\n")


@cli.group()
def train():
    """Train the learned heads (receptionist projection, reward model)."""


@train.command("receptionist")
@click.option("--corpus", type=click.Path(), required=True, help='JSONL {"text", "domain_id"}')
@click.option("--backend", type=click.Choice(["mock", "live"]), default="mock", show_default=True)
@click.option("--alpha", type=float, default=1.0, show_default=True)
@click.option("--lr", type=float, default=0.05, show_default=True)
@click.option("--epochs", type=int, default=50, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def train_receptionist(corpus, backend, alpha, lr, epochs, seed, out):
    be = _make_backend(backend)
    by_domain: dict[int, list[str]] = {}
    with open(corpus, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                by_domain.setdefault(rec["domain_id"], []).append(rec["text"])
    rng = random.Random(seed)
    triplets = []
    domain_ids = sorted(by_domain)
    for did in domain_ids:
        questions = by_domain[did]
        if len(questions) < 2 or len(domain_ids) < 2:
            continue
        for i, anchor in enumerate(questions):
            positive = questions[(i + 1) % len(questions)]
            other = rng.choice([d for d in domain_ids if d != did])
            negative = rng.choice(by_domain[other])
            triplets.append((anchor, positive, negative))
    model = recep_mod.train_projection(triplets, be, alpha=alpha, lr=lr, epochs=epochs, seed=seed)
    recep_mod.save_projection(model, out)
    json.dump(
        {"triplets": len(triplets), "final_loss": model.train_log[-1][1]}, sys.stdout
    )
    sys.stdout.write("\n")


@train.command("rm")
@click.option("--labels", type=click.Path(), required=True, help='JSONL {"text", "label": 0|1}')
@click.option("--backend", type=click.Choice(["mock", "live"]), default="mock", show_default=True)
@click.option("--lr", type=float, default=0.5, show_default=True)
@click.option("--epochs", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def train_rm_cmd(labels, backend, lr, epochs, seed, out):
    be = _make_backend(backend)
    labeled = []
    with open(labels, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                labeled.append((rec["text"], int(rec["label"])))
    model = boss_mod.train_rm(labeled, be, lr=lr, epochs=epochs, seed=seed)
    boss_mod.save_rm(model, out)
    json.dump({"samples": len(labeled), "final_loss": model.train_log[-1][1]}, sys.stdout)
    sys.stdout.write("\n")


@cli.group(name="eval")
def eval_group():
    """Evaluation protocols."""


@eval_group.command("pairwise")
@click.option("--input", "input_path", type=click.Path(), required=True)
@click.option("--judge", type=click.Choice(["mock", "live"]), default="mock", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def eval_pairwise(input_path, judge, seed):
    be = _make_backend(judge)
    results, summary = evalharness.run_pairwise_file(input_path, be, seed=seed)
    for result in results:
        print(
            json.dumps(
                {
                    "question": result.question,
                    "winner": result.winner,
                    "judge_tag": result.judge_tag,
                    "disagreement": result.disagreement,
                },
                ensure_ascii=False,
            )
        )
    json.dump(summary, sys.stdout)
    sys.stdout.write("\n")


@eval_group.command("turns")
@click.option("--transcript", "transcript_path", type=click.Path(), required=True, help="tab-separated: index\\tspeaker\\ttext")
@click.option("--judge", type=click.Choice(["mock", "live"]), default="mock", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def eval_turns(transcript_path, judge, seed):
    be = _make_backend(judge)
    turns = []
    with open(transcript_path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                index, speaker, text = line.rstrip("\n").split("\t")[:3]
                turns.append(Turn(int(index), Speaker(speaker), text))
    scores = evalharness.turn_scores(be, turns, seed=seed)
    json.dump(
        {"scores": [{"turn_index": s.turn_index, "score": s.score} for s in scores]}, sys.stdout
    )
    sys.stdout.write("\n")


@cli.group()
def data():
    """Corpus validation and statistics."""


@data.command("validate")
@click.argument("paths", nargs=-1, required=True, type=click.Path())
def data_validate(paths):
    overall_ok = True
    for path in paths:
        report = datasets.validate_dialogue_file(path)
        overall_ok = overall_ok and report.ok
        for line in report.lines:
            if not line.ok:
                click.echo(f"{path}:{line.line_number}: {'; '.join(line.reasons)}", err=True)
        print(
            json.dumps({"path": str(path), "passed": report.passed, "failed": report.failed})
        )
    if not overall_ok:
        sys.exit(2)


@data.command("stats")
@click.argument("paths", nargs=-1, required=True, type=click.Path())
def data_stats(paths):
    stats = datasets.corpus_stats(paths)
    json.dump(stats, sys.stdout)
    sys.stdout.write("\n")


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(1)
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        sys.exit(1)
    except LawluoError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    sys.exit(0)


if __name__ == "__main__":
    main()
