"""Stacked-GRU next-step predictor trained on non-collusive comment series.

The recurrent stack reads an m-dimensional binned series and, at every
step, emits predictions for the next ``horizon`` values of the first
``predict_dims`` input dimensions. Training minimizes mean squared
prediction error with truncated backpropagation through time; all math is
hand-written numpy so the analytic gradients can be verified against
finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn import (Adam, Params, Standardizer, glorot_uniform, orthogonal,
                 sigmoid)
from .series import TimeSeries

FORMAT_VERSION = 1


@dataclass(frozen=True)
class GruConfig:
    hidden: tuple[int, ...] = (32, 32)
    input_dim: int = 1
    predict_dims: int = 1
    horizon: int = 3
    learning_rate: float = 5e-3
    epochs: int = 30
    batch_size: int = 64
    bptt_steps: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.predict_dims > self.input_dim:
            raise ValueError("predict_dims must not exceed input_dim")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not self.hidden:
            raise ValueError("need at least one recurrent layer")


def init_params(cfg: GruConfig, rng: np.random.Generator) -> Params:
    """Glorot input weights, orthogonal recurrent weights, zero biases."""
    params: Params = {}
    size_in = cfg.input_dim
    for k, h in enumerate(cfg.hidden):
        for gate in ("z", "r", "h"):
            params[f"l{k}.W{gate}"] = glorot_uniform(rng, size_in, h)
            params[f"l{k}.U{gate}"] = orthogonal(rng, h)
            params[f"l{k}.b{gate}"] = np.zeros(h)
        size_in = h
    out_dim = cfg.predict_dims * cfg.horizon
    params["out.W"] = glorot_uniform(rng, cfg.hidden[-1], out_dim)
    params["out.b"] = np.zeros(out_dim)
    return params


def _forward_chunk(params: Params, cfg: GruConfig, x: np.ndarray,
                   mask: np.ndarray, h0: list[np.ndarray]):
    """One chunk of the stacked forward pass, keeping per-step caches."""
    B, T, _ = x.shape
    L = len(cfg.hidden)
    cache = {key: [np.zeros((B, T, h)) for h in cfg.hidden]
             for key in ("Z", "R", "HC", "H", "Hprev")}
    cache["INP"] = [np.zeros((B, T, cfg.input_dim if k == 0 else cfg.hidden[k - 1]))
                    for k in range(L)]
    h = [h0[k].copy() for k in range(L)]
    y = np.zeros((B, T, cfg.predict_dims * cfg.horizon))
    for t in range(T):
        inp = x[:, t, :]
        m = mask[:, t][:, None]
        for k in range(L):
            hp = h[k]
            z = sigmoid(inp @ params[f"l{k}.Wz"].T + hp @ params[f"l{k}.Uz"].T
                        + params[f"l{k}.bz"])
            r = sigmoid(inp @ params[f"l{k}.Wr"].T + hp @ params[f"l{k}.Ur"].T
                        + params[f"l{k}.br"])
            hc = np.tanh(inp @ params[f"l{k}.Wh"].T
                         + (r * hp) @ params[f"l{k}.Uh"].T + params[f"l{k}.bh"])
            hn = (1.0 - z) * hp + z * hc
            hn = m * hn + (1.0 - m) * hp  # padded steps carry state unchanged
            cache["INP"][k][:, t] = inp
            cache["Hprev"][k][:, t] = hp
            cache["Z"][k][:, t] = z
            cache["R"][k][:, t] = r
            cache["HC"][k][:, t] = hc
            cache["H"][k][:, t] = hn
            h[k] = hn
            inp = hn
        y[:, t] = inp @ params["out.W"].T + params["out.b"]
    return y, cache, h


def _targets(x: np.ndarray, lengths: np.ndarray, cfg: GruConfig):
    """Next-horizon targets and their validity mask, both (B, T, d, l)."""
    B, T, _ = x.shape
    d, l = cfg.predict_dims, cfg.horizon
    tgt = np.zeros((B, T, d, l))
    valid = np.zeros((B, T, d, l), dtype=bool)
    for j in range(1, l + 1):
        upto = T - j
        tgt[:, :upto, :, j - 1] = x[:, j:, :d]
        t_idx = np.arange(upto)[None, :]
        valid[:, :upto, :, j - 1] = (t_idx + j <= (lengths - 1)[:, None])[:, :, None]
    return tgt, valid


def loss_and_grads(params: Params, cfg: GruConfig, x: np.ndarray,
                   lengths: np.ndarray):
    """Mean squared next-horizon prediction error and its gradients.

    ``x`` is a padded batch (B, T, m) in standardized space; ``lengths``
    holds true series lengths. Backpropagation is truncated at
    ``cfg.bptt_steps`` boundaries.
    """
    B, T, _ = x.shape
    L = len(cfg.hidden)
    d, l = cfg.predict_dims, cfg.horizon
    mask = np.arange(T)[None, :] < lengths[:, None]
    tgt, valid = _targets(x, lengths, cfg)
    n_valid = int(valid.sum())
    if n_valid == 0:
        raise ValueError("no valid prediction targets in batch")
    grads: Params = {k: np.zeros_like(v) for k, v in params.items()}
    h = [np.zeros((B, hsz)) for hsz in cfg.hidden]
    loss = 0.0
    for start in range(0, T, cfg.bptt_steps):
        stop = min(start + cfg.bptt_steps, T)
        xc, mc = x[:, start:stop], mask[:, start:stop]
        y, cache, h = _forward_chunk(params, cfg, xc, mc, h)
        yv = y.reshape(B, stop - start, d, l)
        diff = np.where(valid[:, start:stop], yv - tgt[:, start:stop], 0.0)
        loss += float((diff ** 2).sum()) / n_valid
        dy = (2.0 * diff / n_valid).reshape(B, stop - start, d * l)
        _backward_chunk(params, cfg, cache, mc, dy, grads)
    return loss, grads


def _backward_chunk(params: Params, cfg: GruConfig, cache: dict,
                    mask: np.ndarray, dy: np.ndarray, grads: Params) -> None:
    B, Tc = mask.shape
    L = len(cfg.hidden)
    dcarry = [np.zeros((B, hsz)) for hsz in cfg.hidden]
    for t in range(Tc - 1, -1, -1):
        htop = cache["H"][L - 1][:, t]
        grads["out.W"] += dy[:, t].T @ htop
        grads["out.b"] += dy[:, t].sum(axis=0)
        dinp = dy[:, t] @ params["out.W"]
        for k in range(L - 1, -1, -1):
            dh = dcarry[k] + dinp
            m = mask[:, t][:, None]
            dh_new = m * dh
            dprev = (1.0 - m) * dh
            z = cache["Z"][k][:, t]
            r = cache["R"][k][:, t]
            hc = cache["HC"][k][:, t]
            hp = cache["Hprev"][k][:, t]
            inp = cache["INP"][k][:, t]
            dz = dh_new * (hc - hp)
            dhc = dh_new * z
            dprev += dh_new * (1.0 - z)
            dah = dhc * (1.0 - hc * hc)
            grads[f"l{k}.Wh"] += dah.T @ inp
            grads[f"l{k}.Uh"] += dah.T @ (r * hp)
            grads[f"l{k}.bh"] += dah.sum(axis=0)
            dinp_k = dah @ params[f"l{k}.Wh"]
            dq = dah @ params[f"l{k}.Uh"]
            dr = dq * hp
            dprev += dq * r
            dar = dr * r * (1.0 - r)
            grads[f"l{k}.Wr"] += dar.T @ inp
            grads[f"l{k}.Ur"] += dar.T @ hp
            grads[f"l{k}.br"] += dar.sum(axis=0)
            dinp_k += dar @ params[f"l{k}.Wr"]
            dprev += dar @ params[f"l{k}.Ur"]
            daz = dz * z * (1.0 - z)
            grads[f"l{k}.Wz"] += daz.T @ inp
            grads[f"l{k}.Uz"] += daz.T @ hp
            grads[f"l{k}.bz"] += daz.sum(axis=0)
            dinp_k += daz @ params[f"l{k}.Wz"]
            dprev += daz @ params[f"l{k}.Uz"]
            dcarry[k] = dprev
            dinp = dinp_k


@dataclass
class GruPredictor:
    config: GruConfig
    params: Params
    norm: Standardizer
    mode: str  # series mode the predictor was trained on
    seed: int

    def predict_series(self, values: np.ndarray) -> np.ndarray:
        """Raw-space predictions, shape (T, predict_dims, horizon)."""
        values = np.atleast_2d(np.asarray(values, dtype=float))
        if values.shape[0] == 1 and self.config.input_dim == 1:
            values = values.T
        x = self.norm.transform(values)[None, :, :]
        lengths = np.array([values.shape[0]])
        mask = np.ones((1, values.shape[0]), dtype=bool)
        h = [np.zeros((1, hsz)) for hsz in self.config.hidden]
        y, _, _ = _forward_chunk(self.params, self.config, x, mask, h)
        d, l = self.config.predict_dims, self.config.horizon
        y = y[0].reshape(-1, d, l)
        return y * self.norm.std[:d, None] + self.norm.mean[:d, None]

    def to_obj(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "kind": "gru_predictor",
            "config": {
                "hidden": list(self.config.hidden),
                "input_dim": self.config.input_dim,
                "predict_dims": self.config.predict_dims,
                "horizon": self.config.horizon,
                "learning_rate": self.config.learning_rate,
                "epochs": self.config.epochs,
                "batch_size": self.config.batch_size,
                "bptt_steps": self.config.bptt_steps,
                "seed": self.config.seed,
            },
            "mode": self.mode,
            "seed": self.seed,
            "norm": self.norm.to_obj(),
            "params": {k: v.tolist() for k, v in self.params.items()},
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "GruPredictor":
        if obj.get("format_version") != FORMAT_VERSION:
            raise ValueError("unsupported predictor format version")
        cfg_obj = dict(obj["config"])
        cfg_obj["hidden"] = tuple(cfg_obj["hidden"])
        cfg = GruConfig(**cfg_obj)
        params = {k: np.asarray(v, dtype=float) for k, v in obj["params"].items()}
        return cls(config=cfg, params=params,
                   norm=Standardizer.from_obj(obj["norm"]),
                   mode=obj["mode"], seed=obj["seed"])


def _pad_batch(series_values: list[np.ndarray]):
    lengths = np.array([len(v) for v in series_values])
    T = int(lengths.max())
    m = series_values[0].shape[1]
    x = np.zeros((len(series_values), T, m))
    for i, v in enumerate(series_values):
        x[i, :len(v)] = v
    return x, lengths


def train_predictor(normal_series: list[TimeSeries], config: GruConfig):
    """Train on non-collusive series; deterministic given ``config.seed``.

    Series not longer than the horizon are excluded with a warning entry;
    returns ``(predictor, epoch_losses, warnings)``.
    """
    warnings: list[str] = []
    usable, mode = [], None
    for s in normal_series:
        if mode is None:
            mode = s.mode
        elif s.mode != mode:
            raise ValueError("mixed series modes in training set")
        if len(s) <= config.horizon:
            warnings.append(f"{s.video_id}: length {len(s)} <= horizon, excluded")
            continue
        usable.append(s)
    if len(usable) < 2:
        raise ValueError("need at least 2 usable training series")

    values = [np.asarray(s.values, dtype=float).reshape(len(s), -1) for s in usable]
    if values[0].shape[1] != config.input_dim:
        raise ValueError("series dimensionality does not match config.input_dim")
    norm = Standardizer.fit(np.concatenate(values, axis=0))
    values = [norm.transform(v) for v in values]

    rng = np.random.default_rng(config.seed)
    params = init_params(config, rng)
    opt = Adam(params, lr=config.learning_rate)
    epoch_losses: list[float] = []
    for _ in range(config.epochs):
        order = rng.permutation(len(values))
        total, batches = 0.0, 0
        for start in range(0, len(order), config.batch_size):
            chosen = [values[i] for i in order[start:start + config.batch_size]]
            x, lengths = _pad_batch(chosen)
            loss, grads = loss_and_grads(params, config, x, lengths)
            opt.step(params, grads)
            total += loss
            batches += 1
        epoch_losses.append(total / batches)
    predictor = GruPredictor(config=config, params=params, norm=norm,
                             mode=mode or "increment", seed=config.seed)
    return predictor, epoch_losses, warnings


def prediction_errors(predictor: GruPredictor, series: TimeSeries) -> np.ndarray:
    """Actual-minus-predicted error vectors, one row per scoreable bin.

    Row t (for bins ``horizon`` .. n-1 of the series) holds, in
    dimension-major order, the errors of the predictions of that bin made
    1 .. horizon steps earlier.
    """
    if series.mode != predictor.mode:
        raise ValueError(
            f"series mode '{series.mode}' does not match predictor mode "
            f"'{predictor.mode}'")
    d, l = predictor.config.predict_dims, predictor.config.horizon
    n = len(series)
    if n <= l:
        raise ValueError(f"series length {n} must exceed horizon {l}")
    values = np.asarray(series.values, dtype=float).reshape(n, -1)
    preds = predictor.predict_series(values)  # (n, d, l)
    errors = np.zeros((n - l, d * l))
    for row, t in enumerate(range(l, n)):
        e = np.zeros((d, l))
        for j in range(1, l + 1):
            e[:, j - 1] = values[t, :d] - preds[t - j, :, j - 1]
        errors[row] = e.ravel()
    return errors


def score_start_bin(predictor: GruPredictor) -> int:
    """Index of the first series bin that receives an anomaly score."""
    return predictor.config.horizon
