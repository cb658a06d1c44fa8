"""Command-line entry point: extract, analyze, crossval, synth, plot, serve.

Exit codes: 0 success, 1 runtime failure, 2 usage error. LAUGHSENSE_DATA
provides the default audio root when --audio-root is omitted.
"""

from __future__ import annotations

import json
import os
import time
from pathlib import Path

import click

from . import corpus, evaluation, stats
from .learners import LEARNERS


def _audio_root(option_value: str | None, manifest: Path) -> Path:
    if option_value:
        return Path(option_value)
    env = os.environ.get("LAUGHSENSE_DATA")
    return Path(env) if env else manifest.parent


def _load_samples(manifest: Path, audio_root: str | None, target_db: float, jobs: int):
    entries = corpus.parse_manifest(manifest)
    root = _audio_root(audio_root, manifest)
    return corpus.build_dataset(entries, root, target_db=target_db, jobs=jobs)


@click.group()
def main() -> None:
    """Laughter valence analysis toolkit."""


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--audio-root", default=None, type=click.Path())
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--target-db", default=70.0, show_default=True)
@click.option("--jobs", default=os.cpu_count() or 1, show_default="cpu count")
def extract(manifest: Path, audio_root, out: Path, target_db: float, jobs: int) -> None:
    """Extract the 19 features per clip into a CSV plus an exclusion report."""
    samples, exclusions = _load_samples(manifest, audio_root, target_db, jobs)
    out.mkdir(parents=True, exist_ok=True)
    corpus.write_features_csv(samples, out / "features.csv")
    (out / "exclusions.json").write_text(
        json.dumps({"n_extracted": len(samples), "n_excluded": len(exclusions),
                    "excluded": exclusions}, indent=2, sort_keys=True) + "\n"
    )
    for item in exclusions:
        click.echo(f"excluded {item['file']}: {item['reason']}", err=True)
    click.echo(f"extracted {len(samples)} / {len(samples) + len(exclusions)} clips -> {out / 'features.csv'}")
    if not samples:
        raise click.ClickException("no sample could be extracted")


@main.command()
@click.option("--features", "features_csv", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--out", default=None, type=click.Path(path_type=Path))
def analyze(features_csv: Path, out: Path | None) -> None:
    """Per-feature significance table between the two classes."""
    samples = corpus.read_features_csv(features_csv)
    try:
        table = stats.significance_table(samples)
    except ValueError as exc:
        raise click.ClickException(str(exc))

    header = f"{'feature':<28} {'mean_a':>10} {'mean_b':>10} {'t':>8} {'df':>7} {'p':>9}  sig higher"
    lines = [header, "-" * len(header)]
    for r in table:
        lines.append(
            f"{r.feature_name:<28} {r.mean_a:>10.3f} {r.mean_b:>10.3f} {r.t:>8.3f} "
            f"{r.df:>7.2f} {r.p_two_tailed:>9.5f}  {'*' if r.significant else ' '}   {r.higher_class}"
        )
    report = "\n".join(lines)
    click.echo(report)
    if out:
        out.mkdir(parents=True, exist_ok=True)
        (out / "significance.txt").write_text(report + "\n")
        csv_lines = ["feature,mean_a,mean_b,t,df,p_two_tailed,significant,higher_class"]
        for r in table:
            csv_lines.append(
                f"{r.feature_name},{r.mean_a!r},{r.mean_b!r},{r.t!r},{r.df!r},"
                f"{r.p_two_tailed!r},{str(r.significant).lower()},{r.higher_class}"
            )
        (out / "significance.csv").write_text("\n".join(csv_lines) + "\n")


@main.command()
@click.option("--manifest", default=None, type=click.Path(exists=True, path_type=Path))
@click.option("--features", "features_csv", default=None,
              type=click.Path(exists=True, path_type=Path))
@click.option("--audio-root", default=None, type=click.Path())
@click.option("--learner", type=click.Choice(sorted(LEARNERS)), default="svm", show_default=True)
@click.option("--folds", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--target-db", default=70.0, show_default=True)
@click.option("--jobs", default=os.cpu_count() or 1, show_default="cpu count")
def crossval(manifest, features_csv, audio_root, learner, folds, seed, out, target_db, jobs):
    """Speaker-grouped cross-validation; prints the pooled UAR."""
    if folds < 2:
        raise click.UsageError("--folds must be at least 2")
    if (manifest is None) == (features_csv is None):
        raise click.UsageError("give exactly one of --manifest or --features")
    if features_csv is not None:
        samples = corpus.read_features_csv(features_csv)
    else:
        samples, _ = _load_samples(manifest, audio_root, target_db, jobs)
    if not samples:
        raise click.ClickException("empty dataset")

    try:
        plan = evaluation.make_speaker_folds({s.speaker_id for s in samples}, k=folds, seed=seed)
        report = evaluation.run_cv(samples, plan, learner)
    except ValueError as exc:
        raise click.ClickException(str(exc))

    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    payload = report.to_dict()
    payload["meta"] = {"generated_at": time.strftime("%Y-%m-%dT%H:%M:%S%z")}
    (out / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    (out / "report.txt").write_text(report.to_text())
    _plot_confusion(report.pooled.to_lists(), report.learner, out / "confusion.png")
    click.echo(f"UAR = {report.uar:.3f}  (accuracy {report.accuracy:.3f}, learner {learner})")


def _plot_confusion(counts: list[list[int]], title: str, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(4, 3.5))
    ax.imshow(counts, cmap="Blues")
    labels = ["laugh with (a)", "laugh at (b)"]
    ax.set_xticks([0, 1], labels)
    ax.set_yticks([0, 1], labels)
    ax.set_xlabel("predicted")
    ax.set_ylabel("truth")
    ax.set_title(title)
    for i in range(2):
        for j in range(2):
            ax.text(j, i, str(counts[i][j]), ha="center", va="center",
                    color="black" if counts[i][j] < max(map(max, counts)) * 0.6 else "white")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


@main.command("plot")
@click.option("--report", "report_json", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path))
def plot_cmd(report_json: Path, out: Path) -> None:
    """Render the pooled confusion matrix of a crossval report to an image."""
    payload = json.loads(report_json.read_text())
    _plot_confusion(payload["pooled_confusion"], payload["learner"], out)
    click.echo(f"wrote {out}")


@main.command()
@click.option("--n-per-class", default=45, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.option("--out", required=True, type=click.Path(path_type=Path))
def synth(n_per_class: int, seed: int, out: Path) -> None:
    """Generate a synthetic pulse-train laughter corpus with a manifest."""
    manifest = corpus.synth_corpus(n_per_class, seed, out)
    click.echo(f"wrote {2 * n_per_class} clips, manifest {manifest}")


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--audio-root", default=None, type=click.Path())
@click.option("--data-dir", required=True, type=click.Path(path_type=Path))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--seed", default=None, type=int, help="seed session randomization (testing)")
def serve(manifest: Path, audio_root, data_dir: Path, host: str, port: int, seed) -> None:
    """Run the perception-experiment HTTP service."""
    import uvicorn

    from .perception import create_app

    app = create_app(manifest, _audio_root(audio_root, manifest), data_dir, seed=seed)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
