"""Command-line entry point.

One task is a chain of composable stages; every stage reads corpus files
or upstream artifacts from ``--input`` and writes its own artifacts to
``--output``. Exit codes: 0 success, 1 usage error, 2 data error,
3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .dac import DacConfig, train_dac
from .descriptive import descriptive_distributions
from .embedders import ProviderError
from .errormodel import anomaly_scores
from .graphstats import (build_channel_graph, export_edge_list,
                         giant_component, network_stats,
                         random_graph_baseline)
from .gru import GruConfig, GruPredictor, prediction_errors
from .metadata import extract_channel_features, extract_video_features, rating
from .oneclass import KINDS, train_one_class
from .peaks import PeakParams, detect_peaks, shift_peaks
from .pipeline import (TaskConfig, derive_seed, run_task, train_anomaly_stage,
                       _reference_now)
from .records import Corpus, CorpusError, load_corpus, save_corpus, write_jsonl
from .report import FORMATS, render_csv, render_markdown, write_report
from .series import build_time_series
from .synth import BurstSpec, SyntheticConfig, generate_synthetic_corpus

USAGE_ERROR, DATA_ERROR, INTERNAL_ERROR = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _read_config_file(path) -> dict:
    """Plain ``key = value`` lines; '#' starts a comment."""
    out: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text(
            encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {line_no}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _coerce(value: str):
    low = value.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        return value


def _task_config(args) -> TaskConfig:
    cfg = _read_config_file(args.config) if args.config else {}
    seed = args.seed if args.seed is not None else int(cfg.pop("seed", 0))
    gru_kwargs, dac_kwargs, plain = {}, {}, {}
    for key, raw in cfg.items():
        value = _coerce(raw)
        if key.startswith("gru."):
            name = key[4:]
            gru_kwargs[name] = (tuple(int(v) for v in str(raw).split(","))
                                if name == "hidden" else value)
        elif key.startswith("dac."):
            dac_kwargs[key[4:]] = value
        elif key.startswith("synth."):
            continue  # synth-only keys are legal in a shared config file
        else:
            plain[key] = value
    known = {"k_folds", "stratified", "embedder", "window_size", "bin_width",
             "series_mode", "holdout_fraction", "peak_height_percentile",
             "compute_importance", "now"}
    unknown = set(plain) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if args.embedder:
        plain["embedder"] = args.embedder
    return TaskConfig(seed=seed, gru=GruConfig(**gru_kwargs),
                      dac=DacConfig(**dac_kwargs), **plain)


def _synth_config(args) -> SyntheticConfig:
    cfg = _read_config_file(args.config) if args.config else {}
    kwargs, burst_kwargs = {}, {}
    for key, raw in cfg.items():
        if key.startswith("synth.burst."):
            burst_kwargs[key[len("synth.burst."):]] = _coerce(raw)
        elif key.startswith("synth."):
            kwargs[key[len("synth."):]] = _coerce(raw)
    for rng_key in ("count_range", "duration_range_days"):
        lo, hi = burst_kwargs.pop(f"{rng_key}_min", None), \
            burst_kwargs.pop(f"{rng_key}_max", None)
        if lo is not None and hi is not None:
            burst_kwargs[rng_key] = (lo, hi)
    if burst_kwargs:
        kwargs["burst"] = BurstSpec(**burst_kwargs)
    if args.seed is not None:
        kwargs["seed"] = args.seed
    return SyntheticConfig(**kwargs)


def _load(args) -> Corpus:
    corpus, report = load_corpus(args.input)
    if report.accepted == 0:
        raise CorpusError(f"no usable records under {args.input}")
    return corpus


def cmd_ingest(args) -> int:
    corpus, report = load_corpus(args.input)
    obj = {
        "accepted": report.accepted,
        "rejected": report.n_rejected,
        "flagged": report.n_flagged,
        "per_file": {
            kind: {
                "accepted": r.accepted,
                "rejected": [{"line": rej.line_no, "reason": rej.reason}
                             for rej in r.rejected],
            } for kind, r in report.per_file.items()
        },
        "flags": [{"id": f.record_id, "reason": f.reason} for f in report.flags],
    }
    text = json.dumps(obj, indent=2, sort_keys=True)
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        (out / "ingest_report.json").write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def cmd_synth(args) -> int:
    config = _synth_config(args)
    corpus = generate_synthetic_corpus(config)
    out = Path(args.output)
    save_corpus(corpus, out)
    snapshot = config.to_obj()
    (out / "synth_config.json").write_text(
        json.dumps(snapshot, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {len(corpus.videos)} videos, {len(corpus.comments)} comments, "
          f"{len(corpus.channels)} channels, "
          f"{len(corpus.subscriptions)} subscription edges to {out}")
    return 0


def cmd_features(args) -> int:
    corpus = _load(args)
    config = _task_config(args)
    now = _reference_now(corpus, config)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    video_rows = []
    for v in corpus.videos:
        feats = extract_video_features(v, mode="full", now=now)
        video_rows.append({
            "video_id": v.video_id, "activeness": feats.activeness,
            "favorability": feats.favorability, "view_rate": feats.view_rate,
            "duration": feats.duration, "rating": rating(v),
            "flags": list(feats.flags),
        })
    write_jsonl(out / "video_features.jsonl", video_rows)
    channel_rows = []
    for c in corpus.channels:
        vec = extract_channel_features(c)
        channel_rows.append({"channel_id": c.channel_id,
                             **{k: int(val) for k, val in zip(
                                 ("hidden_subscriber_count", "video_count",
                                  "subscriber_count", "view_count",
                                  "comment_count"), vec.vector())}})
    write_jsonl(out / "channel_features.jsonl", channel_rows)
    print(f"wrote features for {len(video_rows)} videos and "
          f"{len(channel_rows)} channels to {out}")
    return 0


def _series_map(corpus: Corpus, config: TaskConfig) -> dict:
    series = {}
    for vid, comments in corpus.comments_by_video().items():
        series[vid] = build_time_series(comments, bin_width=config.bin_width,
                                        mode=config.series_mode)
    return series


def cmd_train_anomaly(args) -> int:
    corpus = _load(args)
    config = _task_config(args)
    series = _series_map(corpus, config)
    organic = sorted(v.video_id for v in corpus.videos if v.label == "other")
    if not organic:
        raise CorpusError("train-anomaly needs videos labeled 'other'")
    seed = derive_seed(config.seed, "train-anomaly")
    artifacts = train_anomaly_stage(series, organic, config, seed)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    obj = {
        "predictor": artifacts.predictor.to_obj(),
        "error_model": artifacts.error_model.to_obj(),
        "peak_params": asdict(artifacts.peak_params),
    }
    (out / "anomaly_model.json").write_text(
        json.dumps(obj, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote anomaly model to {out / 'anomaly_model.json'}")
    return 0


def cmd_score(args) -> int:
    corpus = _load(args)
    config = _task_config(args)
    model_path = Path(args.model) if args.model else Path(args.output) / "anomaly_model.json"
    if not model_path.is_file():
        raise CorpusError(f"anomaly model not found: {model_path}")
    obj = json.loads(model_path.read_text(encoding="utf-8"))
    predictor = GruPredictor.from_obj(obj["predictor"])
    from .errormodel import ErrorModel
    error_model = ErrorModel.from_obj(obj["error_model"])
    peak_params = PeakParams(**obj["peak_params"])
    series = _series_map(corpus, config)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    score_rows, peak_rows = [], []
    horizon = predictor.config.horizon
    for vid in sorted(series):
        s = series[vid]
        if len(s) <= horizon:
            continue
        scores = anomaly_scores(error_model, prediction_errors(predictor, s))
        score_rows.append({"video_id": vid, "start_bin": horizon,
                           "scores": [float(x) for x in scores]})
        for p in shift_peaks(detect_peaks(scores, peak_params), horizon):
            peak_rows.append({"video_id": vid, "apex": p.apex,
                              "height": p.height, "left": p.left,
                              "right": p.right, "width": p.width,
                              "area": p.area})
    write_jsonl(out / "scores.jsonl", score_rows)
    write_jsonl(out / "peaks.jsonl", peak_rows)
    print(f"scored {len(score_rows)} series, {len(peak_rows)} peaks -> {out}")
    return 0


def cmd_train(args) -> int:
    corpus = _load(args)
    config = _task_config(args)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    now = _reference_now(corpus, config)
    if args.task == "comments":
        from .embedders import make_provider
        from .pipeline import video_fused_features
        series = _series_map(corpus, config)
        organic = sorted(v.video_id for v in corpus.videos if v.label == "other")
        artifacts = train_anomaly_stage(series, organic, config,
                                        derive_seed(config.seed, "train-anomaly"))
        provider = make_provider(config.embedder,
                                 seed=derive_seed(config.seed, "embedder"))
        comments = corpus.comments_by_video()
        feats, labels = [], []
        for v in corpus.videos:
            fused, _ = video_fused_features(v, comments.get(v.video_id, []),
                                            series.get(v.video_id), artifacts,
                                            provider, config, now)
            feats.append(fused.vector)
            labels.append(v.label)
        dac_cfg = DacConfig(**{**config.dac.__dict__,
                               "seed": derive_seed(config.seed, "dac")})
        model = train_dac(np.stack(feats), labels, dac_cfg)
        (out / "dac_model.json").write_text(
            json.dumps(model.to_obj(), sort_keys=True) + "\n", encoding="utf-8")
        print(f"wrote DAC model ({model.parameter_count()} parameters)")
        return 0
    if args.task == "likes":
        rows = [extract_video_features(v, mode="full", now=now).vector()
                for v in corpus.videos if v.label == "collusive"]
    else:
        rows = [extract_channel_features(c).vector()
                for c in corpus.channels if c.label == "collusive"]
    if len(rows) < 2:
        raise CorpusError(f"{args.task} task needs at least 2 collusive entities")
    matrix = np.stack(rows)
    summary = {}
    for kind in KINDS:
        model = train_one_class(matrix, kind,
                                {"seed": derive_seed(config.seed, kind)})
        (out / f"oneclass_{kind}.json").write_text(
            json.dumps(model.to_obj(), sort_keys=True) + "\n",
            encoding="utf-8")
        summary[kind] = {"threshold": model.threshold, "params": {
            k: v for k, v in model.params.items() if isinstance(
                v, (int, float, str, bool))}}
    (out / "oneclass_summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"trained {len(KINDS)} one-class models on {len(rows)} collusive "
          f"entities")
    return 0


def cmd_evaluate(args) -> int:
    corpus = _load(args)
    config = _task_config(args)
    report = run_task(args.task, corpus, config)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    suffix = {"json": "json", "csv": "csv", "markdown": "md"}[args.format]
    path = write_report(report, out / f"report_{args.task}.{suffix}",
                        fmt=args.format)
    if args.format != "json":
        write_report(report, out / f"report_{args.task}.json", fmt="json")
    print(f"wrote {path}")
    for fold in report.per_fold:
        print(json.dumps(fold, sort_keys=True, default=str))
    print("mean:", json.dumps(report.mean, sort_keys=True, default=str))
    return 0


def cmd_network(args) -> int:
    corpus = _load(args)
    if not corpus.subscriptions:
        raise CorpusError("network analysis needs subscription edges")
    graph = build_channel_graph(corpus.subscriptions)
    giant = giant_component(graph)
    stats = network_stats(giant)
    seed = args.seed if args.seed is not None else 0
    baseline = random_graph_baseline(giant.n_nodes, giant.n_edges,
                                     trials=args.trials,
                                     seed=derive_seed(seed, "gnm-baseline"))
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    export_edge_list(giant, out / "giant_component_edges.txt")
    obj = {
        "full_graph": {"n_nodes": graph.n_nodes, "n_edges": graph.n_edges},
        "giant_component": stats.as_dict(),
        "random_baseline": baseline,
        "descriptive": descriptive_distributions(corpus),
    }
    (out / "network_report.json").write_text(
        json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(json.dumps(stats.as_dict(), indent=2, sort_keys=True))
    return 0


def cmd_report(args) -> int:
    obj = json.loads(Path(args.input).read_text(encoding="utf-8"))
    if args.format == "csv":
        text = render_csv(obj)
    elif args.format == "markdown":
        text = render_markdown(obj)
    else:
        text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {args.output}")
    else:
        print(text)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="colluscan",
                     description="Collusive engagement detection toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, output_required=True):
        p.add_argument("--config", default=None, help="key = value config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--embedder", default=None,
                       help="hash | file:PATH | remote:URL")

    p = sub.add_parser("ingest", help="load and validate a corpus directory")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("synth", help="generate a seeded synthetic corpus")
    common(p)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("features", help="static video/channel features")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train-anomaly",
                       help="train the series predictor and error model")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_train_anomaly)

    p = sub.add_parser("score", help="anomaly scores and peaks per video")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--model", default=None,
                   help="anomaly model path (default OUTPUT/anomaly_model.json)")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("train", help="train task models on the whole corpus")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--task", required=True,
                   choices=("likes", "subscriptions", "comments"))
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="cross-validated task evaluation")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--task", required=True,
                   choices=("likes", "subscriptions", "comments"))
    p.add_argument("--format", default="json", choices=FORMATS)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("network", help="channel co-subscriber graph analytics")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--trials", type=int, default=30)
    p.set_defaults(func=cmd_network)

    p = sub.add_parser("report", help="re-render a report json")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None)
    p.add_argument("--format", default="markdown", choices=FORMATS)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (CorpusError, ProviderError, FileNotFoundError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except Exception as exc:  # pragma: no cover - defensive
        import traceback
        traceback.print_exc()
        print(f"internal error: {exc}", file=sys.stderr)
        return INTERNAL_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
