"""Toolkit for detecting collusive engagement on video platforms."""

__version__ = "0.1.0"

from .records import (ChannelRecord, CommentRecord, Corpus, CorpusError,
                      SubscriptionEdge, VideoRecord, load_corpus,
                      load_records, save_corpus)
from .splits import DatasetSplit, kfold_split, stratified_kfold_split
from .metadata import (ChannelFeatures, VideoFeatures,
                       extract_channel_features, extract_video_features)
from .series import TimeSeries, build_time_series
from .gru import GruConfig, GruPredictor, prediction_errors, train_predictor
from .errormodel import ErrorModel, anomaly_scores, fit_error_model
from .peaks import (AnomalyFeatures, Peak, PeakParams, anomaly_features,
                    detect_peaks, propagation_metrics, shift_peaks)
from .windows import Window, make_windows, select_peak_comments
from .similarity import (CommentFeatures, FusedFeature, comment_features,
                         fuse, similarity_eta)
from .wmd import WmdResult, wmd
from .embedders import (EmbeddingProvider, FileBackedProvider, HashEmbedder,
                        ProviderError, RemoteProvider, make_provider)
from .dac import (DacConfig, DacModel, corrupt_input, dac_predict, train_dac,
                  train_mlp)
from .oneclass import OneClassModel, score_one_class, train_one_class
from .metrics import Metrics, evaluate, feature_importance
from .graphstats import (ChannelGraph, NetworkStats, build_channel_graph,
                         giant_component, network_stats,
                         random_graph_baseline)
from .descriptive import descriptive_distributions, propagation_report
from .synth import BurstSpec, SyntheticConfig, generate_synthetic_corpus
from .pipeline import RunReport, TaskConfig, run_task
from .report import write_report
