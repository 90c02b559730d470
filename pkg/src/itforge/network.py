"""Shallow softmax predictors over pair features.

One hidden layer (affine -> ReLU -> affine -> softmax), minibatch gradient
descent with adaptive moment estimation. Four head kinds share the
architecture and differ only in output arity: the two-level CMI head, the
three-level SC and STAT heads, and the eight-way classic head.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .kernels import get_backend
from .taxonomy import (
    CLASSES,
    CMI_LEVELS,
    Label,
    MetricTriple,
    RelationClass,
    SC_LEVELS,
    STAT_LEVELS,
    classify_triple,
    triple_of_class,
)

MODEL_FORMAT = "itforge-model"
MODEL_VERSION = 1


class Head(enum.Enum):
    CMI = "cmi"
    SC = "sc"
    STAT = "stat"
    CLASSIC = "classic"

    @property
    def arity(self) -> int:
        return len(head_levels(self))


def head_levels(head: Head) -> tuple:
    """Output index -> level (or class) mapping, in canonical order."""
    return {
        Head.CMI: CMI_LEVELS,
        Head.SC: SC_LEVELS,
        Head.STAT: STAT_LEVELS,
        Head.CLASSIC: CLASSES,
    }[head]


def label_index(head: Head, cls: RelationClass) -> int:
    """Training label for a pair of class ``cls`` under ``head``."""
    if head is Head.CLASSIC:
        return CLASSES.index(cls)
    triple = triple_of_class(cls)
    level = {"cmi": triple.cmi, "sc": triple.sc, "stat": triple.stat}[head.value]
    return head_levels(head).index(level)


@dataclass
class TrainConfig:
    epochs: int = 150
    learning_rate: float = 1e-3
    batch_size: int = 32
    seed: int = 0
    hidden_dim: int = 128
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    class_weighting: bool = False
    backend: str | None = None

    def to_json(self) -> dict:
        return {
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "hidden_dim": self.hidden_dim,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "class_weighting": self.class_weighting,
        }


@dataclass
class BaselineModel:
    head: Head
    w1: np.ndarray  # [hidden, input]
    b1: np.ndarray
    w2: np.ndarray  # [outputs, hidden]
    b2: np.ndarray
    schema_hash: str = ""
    metadata: dict = field(default_factory=dict)

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def output_dim(self) -> int:
        return self.w2.shape[0]


def _as_batches(
    x: np.ndarray, y: np.ndarray, w: np.ndarray, order: np.ndarray, batch_size: int
) -> Iterable[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    for start in range(0, len(order), batch_size):
        idx = order[start : start + batch_size]
        yield np.ascontiguousarray(x[idx]), y[idx], w[idx]


def batch_loss(
    backend, x: np.ndarray, y: np.ndarray, w: np.ndarray, params: tuple
) -> float:
    """Weighted mean cross-entropy of a batch; oracle-checkable."""
    _, p = backend.forward(x, *params)
    picked = p[np.arange(len(y)), y]
    return float(np.sum(w * -np.log(np.maximum(picked, 1e-300))) / np.sum(w))


def batch_gradients(
    backend, x: np.ndarray, y: np.ndarray, w: np.ndarray, params: tuple
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Analytic gradients of :func:`batch_loss` for all four parameters."""
    w1, b1, w2, b2 = params
    h, p = backend.forward(x, w1, b1, w2, b2)
    dz2 = p.copy()
    dz2[np.arange(len(y)), y] -= 1.0
    dz2 *= (w / np.sum(w))[:, None]
    return backend.backward(x, h, np.ascontiguousarray(dz2), w2)


def train(
    dataset: Sequence[tuple[np.ndarray, int]],
    head: Head,
    config: TrainConfig | None = None,
    schema_hash: str = "",
) -> BaselineModel:
    """Fit one head on (feature vector, label index) samples.

    Deterministic given the seed. The fitted model carries its loss trace
    and training configuration in ``metadata``. A non-finite loss aborts
    with a diagnostic rather than returning garbage weights.
    """
    config = config or TrainConfig()
    if not dataset:
        raise ValueError("empty training dataset")
    x = np.ascontiguousarray([np.asarray(f, dtype=np.float64) for f, _ in dataset])
    y = np.asarray([label for _, label in dataset], dtype=np.int64)
    arity = head.arity
    if y.min() < 0 or y.max() >= arity:
        raise ValueError(
            f"label out of range for head {head.value!r} with {arity} outputs"
        )
    backend = get_backend(config.backend)
    n, input_dim = x.shape
    rng = np.random.default_rng(config.seed)
    w1 = rng.normal(0.0, np.sqrt(2.0 / input_dim), size=(config.hidden_dim, input_dim))
    b1 = np.zeros(config.hidden_dim)
    w2 = rng.normal(0.0, np.sqrt(2.0 / config.hidden_dim), size=(arity, config.hidden_dim))
    b2 = np.zeros(arity)
    params = (w1, b1, w2, b2)

    if config.class_weighting:
        counts = np.bincount(y, minlength=arity).astype(np.float64)
        weights = n / (np.count_nonzero(counts) * counts[y])
    else:
        weights = np.ones(n)

    moments = [(np.zeros_like(p), np.zeros_like(p)) for p in params]
    step = 0
    trace: list[float] = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        loss_sum = 0.0
        weight_sum = 0.0
        for xb, yb, wb in _as_batches(x, y, weights, order, config.batch_size):
            h, p = backend.forward(xb, *params)
            picked = p[np.arange(len(yb)), yb]
            loss_sum += float(np.sum(wb * -np.log(np.maximum(picked, 1e-300))))
            weight_sum += float(np.sum(wb))
            dz2 = p
            dz2[np.arange(len(yb)), yb] -= 1.0
            dz2 *= (wb / np.sum(wb))[:, None]
            grads = backend.backward(xb, h, np.ascontiguousarray(dz2), w2)
            step += 1
            for (param, grad, (m, v)) in zip(params, grads, moments):
                backend.adam_step(
                    param.reshape(-1),
                    np.ascontiguousarray(grad.reshape(-1)),
                    m.reshape(-1),
                    v.reshape(-1),
                    step,
                    config.learning_rate,
                    config.beta1,
                    config.beta2,
                    config.eps,
                )
        epoch_loss = loss_sum / weight_sum
        if not np.isfinite(epoch_loss):
            raise RuntimeError(
                f"non-finite loss at epoch {epoch}: {epoch_loss!r} "
                f"(head={head.value}, lr={config.learning_rate})"
            )
        trace.append(epoch_loss)

    return BaselineModel(
        head=head,
        w1=w1,
        b1=b1,
        w2=w2,
        b2=b2,
        schema_hash=schema_hash,
        metadata={
            "config": config.to_json(),
            "backend": backend.NAME,
            "samples": n,
            "final_loss": trace[-1],
            "loss_trace": trace,
        },
    )


def predict_proba(model: BaselineModel, f: np.ndarray) -> np.ndarray:
    """Class probabilities for one feature vector; sums to 1."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (model.input_dim,):
        raise ValueError(
            f"feature dimension {f.shape} does not match model input ({model.input_dim},)"
        )
    backend = get_backend()
    _, p = backend.forward(
        np.ascontiguousarray(f[None, :]), model.w1, model.b1, model.w2, model.b2
    )
    return p[0]


def predict_proba_batch(model: BaselineModel, x: np.ndarray) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.input_dim:
        raise ValueError(
            f"feature matrix {x.shape} does not match model input ({model.input_dim})"
        )
    backend = get_backend()
    _, p = backend.forward(x, model.w1, model.b1, model.w2, model.b2)
    return p


def classic_predict(model: BaselineModel, f: np.ndarray) -> RelationClass:
    """Most likely of the eight classes; ties go to the lowest class index."""
    if model.head is not Head.CLASSIC:
        raise ValueError(f"expected a classic head, got {model.head.value!r}")
    return CLASSES[int(np.argmax(predict_proba(model, f)))]


def cascade_predict(
    m_cmi: BaselineModel,
    m_sc: BaselineModel,
    m_stat: BaselineModel,
    f: np.ndarray,
) -> Label:
    """Combine the three metric heads through the taxonomy.

    Each head argmaxes independently, so evaluation order cannot matter;
    the assembled triple may hit one of the ten invalid combinations, in
    which case the reasoned Undefined rejection comes back.
    """
    for model, head in ((m_cmi, Head.CMI), (m_sc, Head.SC), (m_stat, Head.STAT)):
        if model.head is not head:
            raise ValueError(
                f"expected a {head.value!r} head, got {model.head.value!r}"
            )
    cmi = CMI_LEVELS[int(np.argmax(predict_proba(m_cmi, f)))]
    sc = SC_LEVELS[int(np.argmax(predict_proba(m_sc, f)))]
    stat = STAT_LEVELS[int(np.argmax(predict_proba(m_stat, f)))]
    return classify_triple(MetricTriple(cmi, sc, stat))


def save_model(model: BaselineModel, path: str | Path) -> None:
    """Write a model as a versioned JSON container (row-major weights)."""
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "head": model.head.value,
        "input_dim": model.input_dim,
        "hidden_dim": model.hidden_dim,
        "output_dim": model.output_dim,
        "schema_hash": model.schema_hash,
        "metadata": model.metadata,
        "weights": {
            "w1": model.w1.tolist(),
            "b1": model.b1.tolist(),
            "w2": model.w2.tolist(),
            "b2": model.b2.tolist(),
        },
    }
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(
        json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n",
        encoding="utf-8",
    )
    tmp.replace(path)


def load_model(path: str | Path, expected_schema_hash: str | None = None) -> BaselineModel:
    """Read a model container; refuses wrong formats and schema hashes."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != MODEL_FORMAT or payload.get("version") != MODEL_VERSION:
        raise ValueError(f"{path}: not a version-{MODEL_VERSION} {MODEL_FORMAT} file")
    if expected_schema_hash is not None and payload["schema_hash"] != expected_schema_hash:
        raise ValueError(
            f"{path}: feature schema hash {payload['schema_hash']!r} does not match "
            f"expected {expected_schema_hash!r}; refusing to predict with mismatched features"
        )
    weights = payload["weights"]
    model = BaselineModel(
        head=Head(payload["head"]),
        w1=np.array(weights["w1"], dtype=np.float64),
        b1=np.array(weights["b1"], dtype=np.float64),
        w2=np.array(weights["w2"], dtype=np.float64),
        b2=np.array(weights["b2"], dtype=np.float64),
        schema_hash=payload["schema_hash"],
        metadata=payload.get("metadata", {}),
    )
    if model.w1.shape != (payload["hidden_dim"], payload["input_dim"]) or model.w2.shape != (
        payload["output_dim"],
        payload["hidden_dim"],
    ):
        raise ValueError(f"{path}: weight shapes disagree with declared dimensions")
    return model
