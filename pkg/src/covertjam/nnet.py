"""The eavesdropper's signal-vs-noise CNN, implemented directly on numpy.

Architecture: one conv layer (F filters, 1x3 kernel, valid convolution slid
along the 16-sample axis over the I and Q rows), ReLU, flatten, one hidden
dense layer with ReLU and inverted dropout, dense output with softmax over the
two classes. Class 0 is "signal", class 1 is "noise".

Everything the jammer needs — in particular exact gradients of the
cross-entropy with respect to the *input block* — is computed by hand-rolled
backpropagation, so no autodiff framework is involved. All randomness flows
through explicit numpy generators; identical seeds give identical weights,
dropout masks and shuffles.
"""

from dataclasses import dataclass, field

import numpy as np

from . import channel, modem, waveform5g

BLOCK_LEN = 16  # samples per classifier input
SIGNAL, NOISE = 0, 1
LABEL_NAMES = ("signal", "noise")

_PROB_FLOOR = 1e-12  # log clamp inside the loss


class ModelFormatError(ValueError):
    pass


class TrainingDivergedError(RuntimeError):
    pass


def iq_from_complex(x: np.ndarray) -> np.ndarray:
    """Complex blocks (..., 16) -> stacked real I/Q rows (..., 2, 16)."""
    x = np.asarray(x, dtype=np.complex128)
    return np.stack([x.real, x.imag], axis=-2)


def complex_from_iq(b: np.ndarray) -> np.ndarray:
    """Inverse of iq_from_complex."""
    b = np.asarray(b, dtype=np.float64)
    return b[..., 0, :] + 1j * b[..., 1, :]


def one_hot(label: int) -> np.ndarray:
    y = np.zeros(2)
    y[label] = 1.0
    return y


@dataclass
class ClassifierModel:
    conv_w: np.ndarray  # (F, 3)
    conv_b: np.ndarray  # (F,)
    w1: np.ndarray      # (H, F*2*14)
    b1: np.ndarray      # (H,)
    w2: np.ndarray      # (2, H)
    b2: np.ndarray      # (2,)
    dropout_rate: float = 0.1

    @property
    def f_filters(self) -> int:
        return self.conv_w.shape[0]

    @property
    def hidden(self) -> int:
        return self.w1.shape[0]

    def copy(self) -> "ClassifierModel":
        return ClassifierModel(
            conv_w=self.conv_w.copy(), conv_b=self.conv_b.copy(),
            w1=self.w1.copy(), b1=self.b1.copy(),
            w2=self.w2.copy(), b2=self.b2.copy(),
            dropout_rate=self.dropout_rate,
        )

    def params(self) -> dict[str, np.ndarray]:
        return {"conv_w": self.conv_w, "conv_b": self.conv_b,
                "w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2}

    def n_params(self) -> int:
        return sum(p.size for p in self.params().values())


@dataclass
class LabeledDataset:
    x: np.ndarray        # (N, 2, 16)
    y: np.ndarray        # (N,) in {SIGNAL, NOISE}
    n_train: int         # x[:n_train] trains, the rest validates

    def __post_init__(self):
        if self.x.shape[0] != self.y.shape[0]:
            raise ValueError("blocks and labels differ in length")
        if not (0 < self.n_train < self.x.shape[0]):
            raise ValueError("train/validation split leaves one side empty")
        if len(np.unique(self.y)) < 2:
            raise ValueError("dataset must contain both classes")

    @property
    def train_x(self): return self.x[: self.n_train]
    @property
    def train_y(self): return self.y[: self.n_train]
    @property
    def val_x(self): return self.x[self.n_train :]
    @property
    def val_y(self): return self.y[self.n_train :]


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 64
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ValueError("epochs and batch_size must be >= 1, learning_rate > 0")


def init_model(f_filters: int, hidden: int, seed: int, dropout_rate: float = 0.1) -> ClassifierModel:
    """Glorot-uniform weights, zero biases, deterministic under seed."""
    if f_filters < 1 or hidden < 1:
        raise ValueError("f_filters and hidden must be >= 1")
    if not 0 <= dropout_rate < 1:
        raise ValueError("dropout_rate must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    d_flat = f_filters * 2 * (BLOCK_LEN - 2)

    def glorot(shape, fan_in, fan_out):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=shape)

    return ClassifierModel(
        conv_w=glorot((f_filters, 3), 3, 3 * f_filters),
        conv_b=np.zeros(f_filters),
        w1=glorot((hidden, d_flat), d_flat, hidden),
        b1=np.zeros(hidden),
        w2=glorot((2, hidden), hidden, 2),
        b2=np.zeros(2),
        dropout_rate=dropout_rate,
    )


def zero_model(f_filters: int = 1, hidden: int = 1, dropout_rate: float = 0.0) -> ClassifierModel:
    """All-zero weights; predicts (0.5, 0.5) everywhere. Handy as a degenerate case."""
    m = init_model(f_filters, hidden, seed=0, dropout_rate=dropout_rate)
    for p in m.params().values():
        p[...] = 0.0
    return m


def _forward_cache(model, X, training=False, rng=None):
    X = np.asarray(X, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise ValueError("classifier input contains non-finite values")
    squeeze = X.ndim == 2
    if squeeze:
        X = X[None]
    n = X.shape[0]
    xw = np.lib.stride_tricks.sliding_window_view(X, 3, axis=2)  # (N, 2, 14, 3)
    z0 = np.einsum("nrtk,fk->nfrt", xw, model.conv_w) + model.conv_b[None, :, None, None]
    a0 = np.maximum(z0, 0.0)
    flat = a0.reshape(n, -1)
    z1 = flat @ model.w1.T + model.b1
    a1 = np.maximum(z1, 0.0)
    if training and model.dropout_rate > 0.0:
        if rng is None:
            raise ValueError("training-mode forward needs an rng for dropout")
        keep = 1.0 - model.dropout_rate
        mask = (rng.random(a1.shape) < keep) / keep
    else:
        mask = None
    a1d = a1 if mask is None else a1 * mask
    z2 = a1d @ model.w2.T + model.b2
    z2 = z2 - z2.max(axis=1, keepdims=True)
    e = np.exp(z2)
    probs = e / e.sum(axis=1, keepdims=True)
    cache = {"xw": xw, "z0": z0, "flat": flat, "z1": z1, "mask": mask,
             "a1d": a1d, "probs": probs, "squeeze": squeeze}
    return probs, cache


def forward(model: ClassifierModel, x, training: bool = False, rng=None) -> tuple[float, float]:
    """Class probabilities (p_signal, p_noise) for one 2x16 block."""
    probs, _ = _forward_cache(model, x, training=training, rng=rng)
    return float(probs[0, SIGNAL]), float(probs[0, NOISE])


def forward_batch(model: ClassifierModel, X, training: bool = False, rng=None) -> np.ndarray:
    probs, _ = _forward_cache(model, X, training=training, rng=rng)
    return probs


def predict(model: ClassifierModel, X) -> np.ndarray:
    """Argmax labels for a batch of blocks."""
    return np.argmax(forward_batch(model, X), axis=1)


def loss(model: ClassifierModel, x, y_onehot) -> float:
    """Cross-entropy of the inference-mode forward pass against a one-hot target."""
    y = np.asarray(y_onehot, dtype=np.float64)
    if y.shape != (2,) or not np.isclose(y.sum(), 1.0) or set(np.unique(y)) - {0.0, 1.0}:
        raise ValueError("target must be one-hot over the two classes")
    probs, _ = _forward_cache(model, x)
    p = np.clip(probs[0], _PROB_FLOOR, 1.0 - _PROB_FLOOR)
    return float(-np.sum(y * np.log(p)))


def input_gradient_batch(model: ClassifierModel, X, target: int) -> np.ndarray:
    """d(cross-entropy vs one-hot target)/d(input), dropout off, shape like X."""
    probs, c = _forward_cache(model, X)
    n, f = probs.shape[0], model.f_filters
    dz2 = probs.copy()
    dz2[:, target] -= 1.0
    da1 = dz2 @ model.w2
    dz1 = da1 * (c["z1"] > 0)
    dflat = dz1 @ model.w1
    da0 = dflat.reshape(n, f, 2, BLOCK_LEN - 2) * (c["z0"] > 0)
    dX = np.zeros((n, 2, BLOCK_LEN))
    for k in range(3):
        dX[:, :, k : k + BLOCK_LEN - 2] += np.einsum("nfrt,f->nrt", da0, model.conv_w[:, k])
    return dX[0] if c["squeeze"] else dX


def input_gradient(model: ClassifierModel, x, y_target) -> np.ndarray:
    """Gradient of loss(model, x, y_target) with respect to the 2x16 input block."""
    y = np.asarray(y_target, dtype=np.float64)
    target = int(np.argmax(y))
    return input_gradient_batch(model, x, target)


def _param_grads(model, cache, y_idx):
    """Parameter gradients of the mean cross-entropy over the cached batch."""
    probs = cache["probs"]
    n, f = probs.shape[0], model.f_filters
    dz2 = probs.copy()
    dz2[np.arange(n), y_idx] -= 1.0
    dz2 /= n
    g = {}
    g["w2"] = dz2.T @ cache["a1d"]
    g["b2"] = dz2.sum(axis=0)
    da1d = dz2 @ model.w2
    da1 = da1d if cache["mask"] is None else da1d * cache["mask"]
    dz1 = da1 * (cache["z1"] > 0)
    g["w1"] = dz1.T @ cache["flat"]
    g["b1"] = dz1.sum(axis=0)
    dflat = dz1 @ model.w1
    da0 = dflat.reshape(n, f, 2, BLOCK_LEN - 2) * (cache["z0"] > 0)
    g["conv_w"] = np.einsum("nfrt,nrtk->fk", da0, cache["xw"])
    g["conv_b"] = da0.sum(axis=(0, 2, 3))
    return g


@dataclass
class AdamState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: int = 0


def adam_step(model: ClassifierModel, grads: dict, state: AdamState, cfg: TrainConfig):
    state.t += 1
    b1, b2 = cfg.adam_beta1, cfg.adam_beta2
    params = model.params()
    for name, p in params.items():
        g = grads[name]
        m = state.m.setdefault(name, np.zeros_like(p))
        v = state.v.setdefault(name, np.zeros_like(p))
        m[...] = b1 * m + (1 - b1) * g
        v[...] = b2 * v + (1 - b2) * g * g
        m_hat = m / (1 - b1 ** state.t)
        v_hat = v / (1 - b2 ** state.t)
        p -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)


def train(model: ClassifierModel, dataset: LabeledDataset, cfg: TrainConfig):
    """Adam + backprop on a private copy; returns (trained model, per-epoch trace)."""
    net = model.copy()
    rng = np.random.default_rng(cfg.seed)
    state = AdamState()
    trace = []
    tx, ty = dataset.train_x, dataset.train_y
    for epoch in range(cfg.epochs):
        perm = rng.permutation(tx.shape[0])
        losses = []
        for start in range(0, tx.shape[0], cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            probs, cache = _forward_cache(net, tx[idx], training=True, rng=rng)
            p = np.clip(probs[np.arange(idx.size), ty[idx]], _PROB_FLOOR, 1.0)
            batch_loss = float(-np.mean(np.log(p)))
            if not np.isfinite(batch_loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch starting {start}"
                )
            losses.append(batch_loss)
            adam_step(net, _param_grads(net, cache, ty[idx]), state, cfg)
        val_acc, _ = evaluate(net, dataset, split="val")
        trace.append({"epoch": epoch, "train_loss": float(np.mean(losses)),
                      "val_accuracy": val_acc})
    return net, trace


def evaluate(model: ClassifierModel, dataset: LabeledDataset, split: str = "all"):
    """(accuracy, 2x2 confusion counts[true, predicted]) over the chosen split."""
    if split == "all":
        x, y = dataset.x, dataset.y
    elif split == "train":
        x, y = dataset.train_x, dataset.train_y
    elif split == "val":
        x, y = dataset.val_x, dataset.val_y
    else:
        raise ValueError(f"unknown split {split!r}")
    if x.shape[0] == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    pred = predict(model, x)
    confusion = np.zeros((2, 2), dtype=np.int64)
    for t in (SIGNAL, NOISE):
        for p in (SIGNAL, NOISE):
            confusion[t, p] = int(np.sum((y == t) & (pred == p)))
    return float(np.mean(pred == y)), confusion


def tx_sample_power(signal_type: str, ofdm_cfg: "waveform5g.OfdmConfig | None" = None) -> float:
    """Average transmit power per complex sample for a given waveform."""
    if signal_type in (modem.QPSK, modem.QAM16):
        return 1.0  # unit-energy constellations
    if signal_type == "ofdm":
        cfg = ofdm_cfg or waveform5g.OfdmConfig()
        return cfg.used_subcarriers / cfg.fft_size
    raise ValueError(f"unknown signal type {signal_type!r}")


# Payload size whose CRC-extended frame fills OFDM symbols AND segments into
# 16-sample blocks with no remainder: 176+16 bits = 96 QPSK symbols
# = 2 OFDM symbols = 144 time samples = 9 blocks.
OFDM_FRAME_PAYLOAD_BITS = 176


def _ofdm_sample_stream(n_samples: int, cfg: waveform5g.OfdmConfig, rng) -> np.ndarray:
    """Concatenated random OFDM frames, truncated to exactly n_samples."""
    chunks = []
    total = 0
    while total < n_samples:
        payload = generate_payload(rng)
        frame = waveform5g.frame_tx(payload, cfg)
        chunks.append(frame)
        total += frame.size
    return np.concatenate(chunks)[:n_samples]


def generate_payload(rng) -> np.ndarray:
    return modem.generate_bits(OFDM_FRAME_PAYLOAD_BITS, rng)


def build_dataset(
    signal_type: str,
    snr_db: float,
    topology: channel.Topology,
    n_symbols: int,
    rng: np.random.Generator,
    d0: float = 1.0,
    gamma: float = 2.8,
    ofdm_cfg: "waveform5g.OfdmConfig | None" = None,
    train_fraction: float = 0.8,
) -> LabeledDataset:
    """Balanced signal-vs-noise blocks observed at the eavesdropper.

    Signal blocks are modulated random bits (or OFDM frames) passed through the
    transmitter->eavesdropper link; noise blocks are pure noise of the same
    variance. The noise variance realizes the requested received SNR.
    """
    if n_symbols % BLOCK_LEN != 0:
        raise ValueError(f"n_symbols must be divisible by {BLOCK_LEN}")
    h_te = channel.path_gain(channel.LinkSpec(topology.d_te, d0, gamma))
    p_rx = h_te * h_te * tx_sample_power(signal_type, ofdm_cfg)
    sigma2 = channel.noise_power_for_snr(snr_db, p_rx)

    if signal_type == "ofdm":
        x = _ofdm_sample_stream(n_symbols, ofdm_cfg or waveform5g.OfdmConfig(), rng)
    else:
        scheme = modem.ModulationScheme(signal_type)
        bits = modem.generate_bits(n_symbols * scheme.bits_per_symbol, rng)
        x = modem.modulate(bits, scheme)

    link = channel.LinkSpec(topology.d_te, d0, gamma, noise_power=sigma2)
    received = channel.apply_link(x, link, rng)
    n_blocks = n_symbols // BLOCK_LEN
    signal_blocks = iq_from_complex(received.reshape(n_blocks, BLOCK_LEN))
    noise_blocks = iq_from_complex(
        channel.complex_noise(n_symbols, sigma2, rng).reshape(n_blocks, BLOCK_LEN)
    )

    blocks = np.concatenate([signal_blocks, noise_blocks])
    labels = np.concatenate([
        np.full(n_blocks, SIGNAL, dtype=np.int8),
        np.full(n_blocks, NOISE, dtype=np.int8),
    ])
    perm = rng.permutation(blocks.shape[0])
    n_train = int(round(train_fraction * blocks.shape[0]))
    return LabeledDataset(x=blocks[perm], y=labels[perm], n_train=n_train)


# ---------------------------------------------------------------------------
# Model file format: magic, version, dims, dropout, then float64 weights in
# the order conv_w, conv_b, w1, b1, w2, b2 (C order). Round trip is bit exact.
# ---------------------------------------------------------------------------

_MAGIC = b"CJNET\x00"
_VERSION = 1
_HEADER = np.dtype([("version", "<u4"), ("f_filters", "<u4"),
                    ("hidden", "<u4"), ("dropout", "<f8")])


def save_model(model: ClassifierModel, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        header = np.zeros(1, dtype=_HEADER)
        header["version"] = _VERSION
        header["f_filters"] = model.f_filters
        header["hidden"] = model.hidden
        header["dropout"] = model.dropout_rate
        fh.write(header.tobytes())
        for name in ("conv_w", "conv_b", "w1", "b1", "w2", "b2"):
            fh.write(np.ascontiguousarray(model.params()[name], dtype="<f8").tobytes())


def load_model(path) -> ClassifierModel:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(_MAGIC)] != _MAGIC:
        raise ModelFormatError("not a classifier model file (bad magic)")
    off = len(_MAGIC)
    if len(blob) < off + _HEADER.itemsize:
        raise ModelFormatError("model file truncated inside header")
    header = np.frombuffer(blob[off : off + _HEADER.itemsize], dtype=_HEADER)[0]
    if int(header["version"]) != _VERSION:
        raise ModelFormatError(f"unsupported model format version {int(header['version'])}")
    f, h = int(header["f_filters"]), int(header["hidden"])
    d_flat = f * 2 * (BLOCK_LEN - 2)
    shapes = [("conv_w", (f, 3)), ("conv_b", (f,)), ("w1", (h, d_flat)),
              ("b1", (h,)), ("w2", (2, h)), ("b2", (2,))]
    expected = sum(int(np.prod(s)) for _, s in shapes) * 8
    payload = blob[off + _HEADER.itemsize :]
    if len(payload) != expected:
        raise ModelFormatError(
            f"weight payload is {len(payload)} bytes but header dims "
            f"(f_filters={f}, hidden={h}) require {expected}"
        )
    arrays = {}
    pos = 0
    for name, shape in shapes:
        count = int(np.prod(shape))
        arrays[name] = np.frombuffer(payload, dtype="<f8", count=count, offset=pos
                                     ).reshape(shape).copy()
        pos += count * 8
    return ClassifierModel(dropout_rate=float(header["dropout"]), **arrays)
