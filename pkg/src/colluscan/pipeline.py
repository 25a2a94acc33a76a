"""End-to-end task pipelines under cross-validation.

Three tasks: videos buying likes and channels buying subscriptions are
scored by the one-class suite on static features (TPR-only, there is no
labeled negative class); videos buying comments run the full pipeline:
binned series -> recurrent predictor -> error Gaussian -> peaks -> comment
similarity -> fused 7-vector -> autoencoder classifier, evaluated with the
four standard metrics. Every stage draws its randomness from a sub-seed
derived from the global seed and the stage name, and test-fold labels are
only read after scoring (a label guard keeps the audit trail).
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .dac import DacConfig, train_dac
from .embedders import EmbeddingProvider, make_provider
from .errormodel import ErrorModel, anomaly_scores, fit_error_model
from .gru import GruConfig, GruPredictor, prediction_errors, train_predictor
from .metadata import extract_channel_features, extract_video_features
from .metrics import Metrics, evaluate, feature_importance, mean_metrics
from .oneclass import KINDS, train_one_class
from .peaks import (PeakParams, anomaly_features, detect_peaks,
                    propagation_metrics, shift_peaks)
from .records import Corpus, CorpusError
from .descriptive import propagation_report
from .series import DAY, build_time_series
from .similarity import FUSED_FEATURE_NAMES, comment_features, fuse
from .splits import kfold_split, stratified_kfold_split

TASKS = ("likes", "subscriptions", "comments")

CHANNEL_FEATURE_NAMES = (
    "hidden_subscriber_count", "video_count", "subscriber_count",
    "view_count", "comment_count",
)
VIDEO_FEATURE_NAMES = ("activeness", "favorability", "view_rate", "duration")


def derive_seed(master: int, stage: str) -> int:
    """Independent per-stage RNG stream keyed by the stage name."""
    digest = hashlib.blake2b(stage.encode("utf-8"),
                             key=int(master).to_bytes(8, "little", signed=True),
                             digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


@dataclass(frozen=True)
class TaskConfig:
    seed: int = 0
    k_folds: int = 5
    stratified: bool = True
    embedder: str = "hash"
    window_size: int = 10
    bin_width: int = DAY
    series_mode: str = "increment"
    holdout_fraction: float = 0.2  # organic slice reserved for the error model
    peak_height_percentile: float = 95.0
    gru: GruConfig = field(default_factory=GruConfig)
    dac: DacConfig = field(default_factory=DacConfig)
    oneclass_params: dict = field(default_factory=dict)
    compute_importance: bool = True
    now: int | None = None

    def snapshot(self) -> dict:
        obj = asdict(self)
        obj["gru"]["hidden"] = list(self.gru.hidden)
        return obj


class LabelGuard:
    """Label access choke point; records (stage, id) so leakage is auditable."""

    def __init__(self, labels: dict[str, str | None]):
        self._labels = labels
        self.log: list[tuple[str, str]] = []
        self.stage = "setup"

    def set_stage(self, stage: str) -> None:
        self.stage = stage

    def label(self, entity_id: str):
        self.log.append((self.stage, entity_id))
        return self._labels.get(entity_id)

    def first_access_stage(self, entity_id: str):
        for stage, eid in self.log:
            if eid == entity_id:
                return stage
        return None


@dataclass
class RunReport:
    task: str
    config_snapshot: dict
    seeds: dict
    per_fold: list[dict]
    mean: dict
    feature_importances: list
    propagation: dict | None
    leakage_audit: dict
    timings: dict

    def deterministic_obj(self) -> dict:
        """Everything except wall-clock timings, which vary run to run."""
        return {
            "task": self.task,
            "config_snapshot": self.config_snapshot,
            "seeds": self.seeds,
            "per_fold": self.per_fold,
            "mean": self.mean,
            "feature_importances": [list(kv) for kv in self.feature_importances],
            "propagation": self.propagation,
            "leakage_audit": self.leakage_audit,
        }


def _reference_now(corpus: Corpus, config: TaskConfig) -> int:
    if config.now is not None:
        return config.now
    stamps = [v.publish_time for v in corpus.videos]
    stamps += [c.timestamp for c in corpus.comments]
    return (max(stamps) + DAY) if stamps else int(time.time())


def run_task(task: str, corpus: Corpus, config: TaskConfig) -> RunReport:
    if task not in TASKS:
        raise ValueError(f"unknown task '{task}'")
    t_start = time.perf_counter()
    if task == "comments":
        report = _run_comments_task(corpus, config)
    else:
        report = _run_one_class_task(task, corpus, config)
    report.timings["total_s"] = time.perf_counter() - t_start
    return report


# ---------------------------------------------------------------------------
# one-class tasks (likes, subscriptions)
# ---------------------------------------------------------------------------

def _one_class_matrix(task: str, corpus: Corpus, now: int):
    if task == "likes":
        if not corpus.videos:
            raise CorpusError("likes task needs video records")
        entities = [(v.video_id, v.label) for v in corpus.videos]
        rows = {v.video_id: extract_video_features(v, mode="full", now=now).vector()
                for v in corpus.videos}
        names = VIDEO_FEATURE_NAMES
    else:
        if not corpus.channels:
            raise CorpusError("subscriptions task needs channel records")
        entities = [(c.channel_id, c.label) for c in corpus.channels]
        rows = {c.channel_id: extract_channel_features(c).vector()
                for c in corpus.channels}
        names = CHANNEL_FEATURE_NAMES
    collusive_ids = [eid for eid, label in entities if label == "collusive"]
    if len(collusive_ids) < 2:
        raise CorpusError(f"{task} task needs at least 2 collusive entities")
    return collusive_ids, rows, names


def _run_one_class_task(task: str, corpus: Corpus, config: TaskConfig) -> RunReport:
    timings: dict[str, float] = {}
    now = _reference_now(corpus, config)
    collusive_ids, rows, names = _one_class_matrix(task, corpus, now)
    split_seed = derive_seed(config.seed, f"{task}-split")
    splits = kfold_split(collusive_ids, config.k_folds, split_seed)
    model_seed = derive_seed(config.seed, f"{task}-oneclass")

    per_fold = []
    t0 = time.perf_counter()
    for split in splits:
        train_x = np.stack([rows[i] for i in sorted(split.train_ids)])
        test_x = np.stack([rows[i] for i in sorted(split.test_ids)])
        fold_entry: dict = {"fold": split.fold_index}
        for kind in KINDS:
            params = dict(config.oneclass_params.get(kind, {}))
            params.setdefault("seed", model_seed + split.fold_index)
            model = train_one_class(train_x, kind, params)
            scores = model.scores(test_x)
            inlier = scores >= model.threshold
            metrics = evaluate(scores, inlier, np.ones(len(test_x), dtype=bool))
            fold_entry[kind] = metrics.as_dict()
        per_fold.append(fold_entry)
    timings["cross_validation_s"] = time.perf_counter() - t0

    mean = {}
    for kind in KINDS:
        mean[kind] = mean_metrics(
            [Metrics(**f[kind]) for f in per_fold]).as_dict()

    importances: list = []
    if config.compute_importance:
        t0 = time.perf_counter()
        all_x = np.stack([rows[i] for i in collusive_ids])

        def tpr_of(matrix: np.ndarray) -> float:
            fold_tprs = []
            for split in splits:
                keep = [collusive_ids.index(i) for i in sorted(split.train_ids)]
                test = [collusive_ids.index(i) for i in sorted(split.test_ids)]
                params = dict(config.oneclass_params.get("ocsvm", {}))
                params.setdefault("seed", model_seed + split.fold_index)
                model = train_one_class(matrix[keep], "ocsvm", params)
                scores = model.scores(matrix[test])
                fold_tprs.append(float((scores >= model.threshold).mean()))
            return float(np.mean(fold_tprs))

        importances = feature_importance(tpr_of, all_x, names)
        timings["feature_importance_s"] = time.perf_counter() - t0

    return RunReport(
        task=task,
        config_snapshot=config.snapshot(),
        seeds={"master": config.seed, "split": split_seed, "model": model_seed},
        per_fold=per_fold,
        mean=mean,
        feature_importances=importances,
        propagation=None,
        leakage_audit={"note": "one-class tasks consume collusive labels only"},
        timings=timings,
    )


# ---------------------------------------------------------------------------
# comments task (full pipeline)
# ---------------------------------------------------------------------------

@dataclass
class AnomalyArtifacts:
    predictor: GruPredictor
    error_model: ErrorModel
    peak_params: PeakParams


def train_anomaly_stage(series_by_id: dict, organic_ids: list[str],
                        config: TaskConfig, seed: int) -> AnomalyArtifacts:
    """Train predictor on organic series, fit the error Gaussian on a
    held-out slice, and calibrate peak thresholds from its scores."""
    rng = np.random.default_rng(seed)
    usable = [i for i in organic_ids
              if i in series_by_id and len(series_by_id[i]) > config.gru.horizon]
    if len(usable) < 3:
        raise CorpusError("not enough organic series to train the predictor")
    order = rng.permutation(len(usable))
    n_holdout = max(1, int(round(config.holdout_fraction * len(usable))))
    holdout = [usable[i] for i in order[:n_holdout]]
    train = [usable[i] for i in order[n_holdout:]]
    if len(train) < 2:
        train = usable
    gru_cfg = GruConfig(**{**config.gru.__dict__, "seed": seed})
    predictor, _, _ = train_predictor([series_by_id[i] for i in train], gru_cfg)
    err_rows = [prediction_errors(predictor, series_by_id[i]) for i in holdout]
    errors = np.concatenate(err_rows, axis=0)
    error_model = fit_error_model(errors)
    holdout_scores = np.concatenate(
        [anomaly_scores(error_model, rows) for rows in err_rows])
    min_height = float(np.percentile(holdout_scores,
                                     config.peak_height_percentile))
    peak_params = PeakParams(min_height=min_height,
                             min_prominence=min_height / 2.0,
                             width_eval_rel_height=0.5)
    return AnomalyArtifacts(predictor=predictor, error_model=error_model,
                            peak_params=peak_params)


def video_fused_features(video, comments, series, artifacts: AnomalyArtifacts,
                         provider: EmbeddingProvider, config: TaskConfig,
                         now: int):
    """Fused 7-vector plus the peak set (in series-bin coordinates)."""
    v_m = extract_video_features(video, mode="collate", now=now)
    horizon = artifacts.predictor.config.horizon
    if series is not None and len(series) > horizon:
        errors = prediction_errors(artifacts.predictor, series)
        scores = anomaly_scores(artifacts.error_model, errors)
        peaks = shift_peaks(detect_peaks(scores, artifacts.peak_params), horizon)
    else:
        peaks = []
    v_a = anomaly_features(peaks)
    v_c = comment_features(video, peaks, comments, series, provider=provider,
                           scorer="embedding", window_size=config.window_size)
    return fuse(v_m, v_a, v_c, video_id=video.video_id), peaks


def _run_comments_task(corpus: Corpus, config: TaskConfig) -> RunReport:
    timings: dict[str, float] = {}
    if not corpus.videos:
        raise CorpusError("comments task needs video records")
    if not corpus.comments:
        raise CorpusError("comments task needs comment records")
    now = _reference_now(corpus, config)
    guard = LabelGuard({v.video_id: v.label for v in corpus.videos})
    videos = {v.video_id: v for v in corpus.videos}
    video_ids = sorted(videos)

    t0 = time.perf_counter()
    comments_by_video = corpus.comments_by_video()
    series_by_id = {}
    for vid in video_ids:
        comments = comments_by_video.get(vid, [])
        if comments:
            series_by_id[vid] = build_time_series(
                comments, bin_width=config.bin_width, mode=config.series_mode)
    timings["series_s"] = time.perf_counter() - t0

    # Stratification and the corpus precondition need labels before folds
    # exist; these split-stage reads are reported separately in the audit.
    guard.set_stage("split")
    split_labels = {vid: guard.label(vid) for vid in video_ids}
    if sum(1 for l in split_labels.values() if l == "collusive") < config.k_folds:
        raise CorpusError("comments task needs collusive examples in every fold")
    split_seed = derive_seed(config.seed, "comments-split")
    if config.stratified:
        splits = stratified_kfold_split(video_ids, split_labels, config.k_folds,
                                        split_seed)
    else:
        splits = kfold_split(video_ids, config.k_folds, split_seed)
    n_split_reads = len(guard.log)

    provider = make_provider(config.embedder,
                             seed=derive_seed(config.seed, "embedder"))

    per_fold: list[dict] = []
    fold0_cache: dict = {}
    t_cv = time.perf_counter()
    for split in splits:
        guard.set_stage(f"fold{split.fold_index}-anomaly")
        train_ids = sorted(split.train_ids)
        test_ids = sorted(split.test_ids)
        train_y = [guard.label(i) for i in train_ids]
        organic_train = [i for i, lab in zip(train_ids, train_y)
                         if lab == "other"]
        anomaly_seed = derive_seed(config.seed,
                                   f"fold{split.fold_index}-anomaly")
        artifacts = train_anomaly_stage(series_by_id, organic_train, config,
                                        anomaly_seed)

        guard.set_stage(f"fold{split.fold_index}-features")
        fused: dict[str, np.ndarray] = {}
        for vid in video_ids:
            feat, _ = video_fused_features(
                videos[vid], comments_by_video.get(vid, []),
                series_by_id.get(vid), artifacts, provider, config, now)
            fused[vid] = feat.vector

        guard.set_stage(f"fold{split.fold_index}-train")
        dac_seed = derive_seed(config.seed, f"fold{split.fold_index}-dac")
        dac_cfg = DacConfig(**{**config.dac.__dict__, "seed": dac_seed})
        train_x = np.stack([fused[i] for i in train_ids])
        model = train_dac(train_x, train_y, dac_cfg)

        guard.set_stage(f"fold{split.fold_index}-score")
        test_x = np.stack([fused[i] for i in test_ids])
        probs = model.predict_proba(test_x)
        collusive_scores = probs[:, 0]
        predicted = probs.argmax(axis=1) == 0

        guard.set_stage(f"fold{split.fold_index}-evaluate")
        truth = np.array([guard.label(i) == "collusive" for i in test_ids])
        metrics = evaluate(collusive_scores, predicted, truth)
        entry = {"fold": split.fold_index}
        entry.update(metrics.as_dict())
        per_fold.append(entry)
        if split.fold_index == 0:
            fold0_cache = {"train_ids": train_ids, "test_ids": test_ids,
                           "fused": fused, "dac_seed": dac_seed}
    timings["cross_validation_s"] = time.perf_counter() - t_cv

    mean = mean_metrics([Metrics(tpr=f["tpr"], fpr=f["fpr"],
                                 accuracy=f["accuracy"], auc=f["auc"])
                         for f in per_fold]).as_dict()

    importances: list = []
    if config.compute_importance:
        t0 = time.perf_counter()
        guard.set_stage("importance")
        importances = _comments_importance(fold0_cache, guard, config)
        timings["feature_importance_s"] = time.perf_counter() - t0

    guard.set_stage("report")
    t0 = time.perf_counter()
    propagation = _propagation_tables(corpus, series_by_id, guard, config)
    timings["propagation_s"] = time.perf_counter() - t0

    audit = _leakage_audit(guard, splits, n_split_reads)
    return RunReport(
        task="comments",
        config_snapshot=config.snapshot(),
        seeds={"master": config.seed, "split": split_seed},
        per_fold=per_fold,
        mean=mean,
        feature_importances=importances,
        propagation=propagation,
        leakage_audit=audit,
        timings=timings,
    )


def _comments_importance(cache: dict, guard: LabelGuard,
                         config: TaskConfig) -> list:
    """Drop-one importance on the first fold, AUC as the metric."""
    train_ids, test_ids = cache["train_ids"], cache["test_ids"]
    fused = cache["fused"]
    full = np.stack([fused[i] for i in train_ids + test_ids])
    n_train = len(train_ids)
    truth = np.array([guard.label(i) == "collusive" for i in test_ids])
    train_y = [guard.label(i) for i in train_ids]
    dac_cfg = DacConfig(**{**config.dac.__dict__, "seed": cache["dac_seed"]})

    def auc_of(matrix: np.ndarray) -> float:
        model = train_dac(matrix[:n_train], train_y, dac_cfg)
        probs = model.predict_proba(matrix[n_train:])
        metrics = evaluate(probs[:, 0], probs.argmax(axis=1) == 0, truth)
        return metrics.auc

    return feature_importance(auc_of, full, FUSED_FEATURE_NAMES)


def _propagation_tables(corpus, series_by_id, guard: LabelGuard,
                        config: TaskConfig) -> dict:
    """Descriptive burst/lifetime tables from artifacts trained on all
    organic videos (the same artifacts the train-anomaly stage emits)."""
    videos = {v.video_id: v for v in corpus.videos}
    labels = {vid: guard.label(vid) for vid in sorted(videos)}
    organic = [vid for vid, label in labels.items() if label == "other"]
    seed = derive_seed(config.seed, "propagation-anomaly")
    try:
        artifacts = train_anomaly_stage(series_by_id, organic, config, seed)
    except CorpusError:
        return {"note": "insufficient organic series for propagation table"}
    horizon = artifacts.predictor.config.horizon
    per_video: dict[str, dict] = {}
    for vid, series in series_by_id.items():
        if labels.get(vid) != "collusive":
            continue
        if len(series) > horizon:
            errors = prediction_errors(artifacts.predictor, series)
            scores = anomaly_scores(artifacts.error_model, errors)
            peaks = shift_peaks(detect_peaks(scores, artifacts.peak_params),
                                horizon)
        else:
            peaks = []
        per_video[vid] = propagation_metrics(peaks, series, videos[vid])
    return propagation_report(per_video)


def _leakage_audit(guard: LabelGuard, splits, n_split_reads: int) -> dict:
    """Count test-fold label reads that happened before that fold scored."""
    test_fold_of = {}
    for split in splits:
        for vid in split.test_ids:
            test_fold_of[vid] = split.fold_index
    early_reads = 0
    for stage, vid in guard.log:
        fold = test_fold_of.get(vid)
        if fold is None or not stage.startswith("fold"):
            continue
        stage_fold = int(stage.split("-")[0][4:])
        phase = stage.split("-", 1)[1]
        if stage_fold == fold and phase not in ("evaluate",):
            early_reads += 1
    return {
        "label_reads": len(guard.log),
        "split_stage_reads": n_split_reads,
        "test_label_reads_before_scoring": early_reads,
    }
