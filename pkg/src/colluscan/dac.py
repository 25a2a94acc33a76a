"""Denoising-autoencoder classifier and its plain-MLP counterpart.

Two-stage training: the autoencoder first learns to reconstruct clean
feature vectors from multiplicatively corrupted ones with the classifier
head frozen; the head is then trained with cross-entropy while the
reconstruction loss stays active, so both losses shape the encoder but the
decoder never receives classification gradient. All gradients are
hand-written and finite-difference checked.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .nn import Adam, Params, Standardizer, glorot_uniform, relu, softmax

FORMAT_VERSION = 1
CLASSES = ("collusive", "other")

ENCODER_KEYS = ("enc1.W", "enc1.b", "enc2.W", "enc2.b")
DECODER_KEYS = ("dec.W", "dec.b")
HEAD_KEYS = ("head.W", "head.b")


@dataclass(frozen=True)
class DacConfig:
    input_dim: int = 7
    hidden: int = 128
    latent: int = 128
    ae_epochs: int = 25
    clf_epochs: int = 150
    corruption: float = 0.1
    learning_rate: float = 1e-3
    batch_size: int = 32
    recon_weight: float = 1.0
    seed: int = 0


def init_params(cfg: DacConfig, rng: np.random.Generator) -> Params:
    return {
        "enc1.W": glorot_uniform(rng, cfg.input_dim, cfg.hidden),
        "enc1.b": np.zeros(cfg.hidden),
        "enc2.W": glorot_uniform(rng, cfg.hidden, cfg.latent),
        "enc2.b": np.zeros(cfg.latent),
        "dec.W": glorot_uniform(rng, cfg.latent, cfg.input_dim),
        "dec.b": np.zeros(cfg.input_dim),
        "head.W": glorot_uniform(rng, cfg.latent, 2),
        "head.b": np.zeros(2),
    }


def corrupt_input(x: np.ndarray, amount: float,
                  rng: np.random.Generator) -> np.ndarray:
    """Scale every coordinate by an independent Uniform(1-amount, 1+amount)."""
    if amount < 0:
        raise ValueError("corruption amount must be >= 0")
    x = np.asarray(x, dtype=float)
    if amount == 0:
        return x.copy()
    return x * rng.uniform(1.0 - amount, 1.0 + amount, size=x.shape)


def _forward(params: Params, x: np.ndarray):
    a1 = x @ params["enc1.W"].T + params["enc1.b"]
    h1 = relu(a1)
    a2 = h1 @ params["enc2.W"].T + params["enc2.b"]
    z = relu(a2)
    recon = z @ params["dec.W"].T + params["dec.b"]
    scores = z @ params["head.W"].T + params["head.b"]
    return {"x": x, "a1": a1, "h1": h1, "a2": a2, "z": z,
            "recon": recon, "scores": scores}


def _backprop_encoder(params: Params, cache: dict, dz: np.ndarray,
                      grads: Params) -> None:
    da2 = dz * (cache["a2"] > 0)
    grads["enc2.W"] += da2.T @ cache["h1"]
    grads["enc2.b"] += da2.sum(axis=0)
    dh1 = da2 @ params["enc2.W"]
    da1 = dh1 * (cache["a1"] > 0)
    grads["enc1.W"] += da1.T @ cache["x"]
    grads["enc1.b"] += da1.sum(axis=0)


def loss_and_grads(params: Params, x_clean: np.ndarray, x_corrupt: np.ndarray,
                   labels: np.ndarray | None, recon_weight: float,
                   train_head: bool):
    """Joint loss and gradients on one batch.

    Reconstruction MSE always targets the clean input. With ``labels``
    given, cross-entropy is added; its gradient reaches the head and the
    encoder but never the decoder. ``train_head=False`` freezes the head
    (stage 1).
    """
    n, dim = x_clean.shape
    cache = _forward(params, x_corrupt)
    grads: Params = {k: np.zeros_like(v) for k, v in params.items()}
    diff = cache["recon"] - x_clean
    recon_loss = float((diff ** 2).mean())
    loss = recon_weight * recon_loss
    drecon = recon_weight * 2.0 * diff / diff.size
    grads["dec.W"] += drecon.T @ cache["z"]
    grads["dec.b"] += drecon.sum(axis=0)
    dz = drecon @ params["dec.W"]
    if labels is not None:
        probs = softmax(cache["scores"])
        picked = probs[np.arange(n), labels]
        loss += float(-np.log(np.clip(picked, 1e-12, None)).mean())
        dscores = probs.copy()
        dscores[np.arange(n), labels] -= 1.0
        dscores /= n
        if train_head:
            grads["head.W"] += dscores.T @ cache["z"]
            grads["head.b"] += dscores.sum(axis=0)
        dz = dz + dscores @ params["head.W"]
    _backprop_encoder(params, cache, dz, grads)
    if not train_head:
        for k in HEAD_KEYS:
            grads[k] = np.zeros_like(params[k])
    return loss, grads


@dataclass
class DacModel:
    config: DacConfig
    params: Params
    norm: Standardizer
    classes: tuple[str, str] = CLASSES
    seed: int = 0
    # per-epoch training losses; diagnostic only, not serialized
    ae_losses: list = field(default_factory=list, repr=False)
    clf_losses: list = field(default_factory=list, repr=False)

    def parameter_count(self) -> int:
        return sum(v.size for v in self.params.values())

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.config.input_dim:
            raise ValueError(
                f"input dim {x.shape[1]} does not match model dim "
                f"{self.config.input_dim}")
        cache = _forward(self.params, self.norm.transform(x))
        return softmax(cache["scores"])

    def to_obj(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "kind": "dac",
            "config": self.config.__dict__,
            "classes": list(self.classes),
            "seed": self.seed,
            "norm": self.norm.to_obj(),
            "params": {k: v.tolist() for k, v in self.params.items()},
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "DacModel":
        if obj.get("format_version") != FORMAT_VERSION:
            raise ValueError("unsupported model format version")
        return cls(config=DacConfig(**obj["config"]),
                   params={k: np.asarray(v) for k, v in obj["params"].items()},
                   norm=Standardizer.from_obj(obj["norm"]),
                   classes=tuple(obj["classes"]), seed=obj["seed"])


def encode_labels(labels) -> np.ndarray:
    out = []
    for lab in labels:
        if lab not in CLASSES:
            raise ValueError(f"unknown label '{lab}'")
        out.append(CLASSES.index(lab))
    return np.asarray(out, dtype=int)


def train_dac(features: np.ndarray, labels, config: DacConfig) -> DacModel:
    """Two-stage training; deterministic given ``config.seed``.

    ``labels`` aligns with feature rows; None marks unlabeled rows, which
    participate in the reconstruction stage only.
    """
    x = np.asarray(features, dtype=float)
    if x.ndim != 2:
        raise ValueError("features must be a 2-D array")
    label_idx = np.array([CLASSES.index(l) if l is not None else -1
                          for l in labels], dtype=int)
    labeled = label_idx >= 0
    counts = np.bincount(label_idx[labeled], minlength=2)
    if (counts < 2).any():
        raise ValueError("need at least 2 labeled examples per class")

    norm = Standardizer.fit(x)
    cfg = DacConfig(**{**config.__dict__, "input_dim": x.shape[1]})
    rng = np.random.default_rng(cfg.seed)
    params = init_params(cfg, rng)

    def batch_pair(raw: np.ndarray):
        # Corruption perturbs original feature values; the network always
        # sees standardized inputs and reconstructs standardized cleans.
        corrupt = corrupt_input(raw, cfg.corruption, rng)
        return norm.transform(raw), norm.transform(corrupt)

    ae_losses, clf_losses = [], []
    ae_opt = Adam({k: params[k] for k in ENCODER_KEYS + DECODER_KEYS},
                  lr=cfg.learning_rate)
    for _ in range(cfg.ae_epochs):
        order = rng.permutation(len(x))
        epoch_loss, batches = 0.0, 0
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            clean, corrupt = batch_pair(x[idx])
            loss, grads = loss_and_grads(params, clean, corrupt, labels=None,
                                         recon_weight=1.0, train_head=False)
            ae_opt.step(params, {k: grads[k] for k in ENCODER_KEYS + DECODER_KEYS})
            epoch_loss += loss
            batches += 1
        ae_losses.append(epoch_loss / batches)

    xl = x[labeled]
    yl = label_idx[labeled]
    clf_opt = Adam(params, lr=cfg.learning_rate)
    for _ in range(cfg.clf_epochs):
        order = rng.permutation(len(xl))
        epoch_loss, batches = 0.0, 0
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            clean, corrupt = batch_pair(xl[idx])
            loss, grads = loss_and_grads(params, clean, corrupt, labels=yl[idx],
                                         recon_weight=cfg.recon_weight,
                                         train_head=True)
            clf_opt.step(params, grads)
            epoch_loss += loss
            batches += 1
        clf_losses.append(epoch_loss / batches)

    return DacModel(config=cfg, params=params, norm=norm, seed=cfg.seed,
                    ae_losses=ae_losses, clf_losses=clf_losses)


def dac_predict(model: DacModel, v: np.ndarray) -> dict[str, float]:
    """Class probabilities for one fused feature vector."""
    probs = model.predict_proba(np.asarray(v, dtype=float).reshape(1, -1))[0]
    return {cls: float(p) for cls, p in zip(model.classes, probs)}


@dataclass
class MlpModel:
    """Cross-entropy-only baseline with the same layer shape as the DAC."""

    config: DacConfig
    params: Params
    norm: Standardizer
    classes: tuple[str, str] = CLASSES

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        cache = _forward(self.params, self.norm.transform(x))
        return softmax(cache["scores"])


def train_mlp(features: np.ndarray, labels, config: DacConfig) -> MlpModel:
    x = np.asarray(features, dtype=float)
    y = encode_labels(labels)
    norm = Standardizer.fit(x)
    xs = norm.transform(x)
    cfg = DacConfig(**{**config.__dict__, "input_dim": xs.shape[1]})
    rng = np.random.default_rng(cfg.seed)
    params = init_params(cfg, rng)
    keys = ENCODER_KEYS + HEAD_KEYS
    opt = Adam({k: params[k] for k in keys}, lr=cfg.learning_rate)
    for _ in range(cfg.clf_epochs):
        order = rng.permutation(len(xs))
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            _, grads = loss_and_grads(params, xs[idx], xs[idx], labels=y[idx],
                                      recon_weight=0.0, train_head=True)
            opt.step(params, {k: grads[k] for k in keys})
    return MlpModel(config=cfg, params=params, norm=norm)
