"""MLP implicit neural representations: containers, evaluation, file I/O.

A network maps world coordinates to one scalar. Internally coordinates are
normalized per axis to [-1, 1] over the network domain and the raw output is
mapped back to data units through ``value_scale`` / ``value_offset``; both
mappings are part of the stored model.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    ContractViolationError,
    NetworkValidationError,
    WeightFormatError,
)

WEIGHTS_SCHEMA = "inr-weights-v1"


class ActivationKind(enum.Enum):
    SINE = "sine"
    RELU = "relu"
    ELU = "elu"

    @classmethod
    def parse(cls, name: str) -> "ActivationKind":
        try:
            return cls(name.lower())
        except ValueError:
            raise WeightFormatError(
                f"unknown activation {name!r}; expected one of "
                f"{[k.value for k in cls]}"
            ) from None


@dataclass(frozen=True)
class LinearLayer:
    """Dense layer y = W x + b with W of shape (rows, cols)."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float64))
        b = np.ascontiguousarray(np.asarray(self.bias, dtype=np.float64))
        if w.ndim != 2:
            raise NetworkValidationError("layer weights must be a 2-D matrix")
        if b.shape != (w.shape[0],):
            raise NetworkValidationError(
                f"bias length {b.shape} does not match weight rows {w.shape[0]}"
            )
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise NetworkValidationError("layer weights/bias must be finite")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def rows(self) -> int:
        return self.weights.shape[0]

    @property
    def cols(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class MlpNetwork:
    """Immutable MLP; activation after every layer except the last."""

    layers: tuple[LinearLayer, ...]
    activation: ActivationKind
    input_dim: int
    output_dim: int
    domain_lower: np.ndarray
    domain_upper: np.ndarray
    value_scale: float = 1.0
    value_offset: float = 0.0

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise NetworkValidationError("network needs at least one layer")
        if layers[0].cols != self.input_dim:
            raise NetworkValidationError(
                f"first layer expects {layers[0].cols} inputs, "
                f"network declares input_dim={self.input_dim}"
            )
        for i in range(1, len(layers)):
            if layers[i].cols != layers[i - 1].rows:
                raise NetworkValidationError(
                    f"layer {i} takes {layers[i].cols} inputs but layer "
                    f"{i - 1} produces {layers[i - 1].rows}"
                )
        if layers[-1].rows != self.output_dim:
            raise NetworkValidationError(
                f"last layer produces {layers[-1].rows} outputs, "
                f"network declares output_dim={self.output_dim}"
            )
        lo = np.asarray(self.domain_lower, dtype=np.float64).reshape(-1).copy()
        hi = np.asarray(self.domain_upper, dtype=np.float64).reshape(-1).copy()
        if lo.shape != (self.input_dim,) or hi.shape != (self.input_dim,):
            raise NetworkValidationError("domain bounds must match input_dim")
        if not np.all(lo < hi):
            raise NetworkValidationError("domain_lower must be < domain_upper")
        if self.value_scale == 0.0 or not math.isfinite(self.value_scale):
            raise NetworkValidationError("value_scale must be finite and nonzero")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "domain_lower", lo)
        object.__setattr__(self, "domain_upper", hi)

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @cached_property
    def packed(self):
        """Padded-array form consumed by the propagation kernels."""
        from .kernels.packed import pack_network

        return pack_network(self)

    def domain_center_half(self) -> tuple[np.ndarray, np.ndarray]:
        center = 0.5 * (self.domain_lower + self.domain_upper)
        half = 0.5 * (self.domain_upper - self.domain_lower)
        return center, half


@dataclass(frozen=True)
class ScalarVolume:
    """Regular scalar grid, x-fastest storage; world mapping comes from the
    network domain it is paired with."""

    dims: tuple[int, int, int]
    data: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        data = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64)).reshape(-1)
        if len(dims) != 3 or any(d < 1 for d in dims):
            raise ContractViolationError(f"bad volume dims {dims}")
        if data.size != dims[0] * dims[1] * dims[2]:
            raise ContractViolationError(
                f"volume data length {data.size} != product of dims {dims}"
            )
        if not np.isfinite(data).all():
            raise ContractViolationError("volume data must be finite")
        data.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "data", data)

    def value_at(self, i: int, j: int, k: int) -> float:
        nx, ny, _ = self.dims
        return float(self.data[i + nx * (j + ny * k)])

    def value_range(self) -> float:
        return float(self.data.max() - self.data.min())


def grid_axes(lower, upper, resolution) -> list[np.ndarray]:
    """Per-axis coordinates spanning [lower, upper] inclusively.

    Every grid consumer (dense reconstruction, cell corners, marching cubes)
    must index into these arrays so corner positions agree bit-exactly.
    """
    lower = np.asarray(lower, dtype=np.float64).reshape(-1)
    upper = np.asarray(upper, dtype=np.float64).reshape(-1)
    return [np.linspace(lower[d], upper[d], int(resolution[d]))
            for d in range(lower.size)]


def grid_points(lower, upper, resolution) -> np.ndarray:
    """All grid vertices as an (N, dim) array in x-fastest order."""
    axes = grid_axes(lower, upper, resolution)
    mesh = np.meshgrid(*axes, indexing="ij")
    # x-fastest linear order: index = i + nx*(j + ny*k)
    cols = [m.transpose(*reversed(range(len(axes)))).reshape(-1) for m in mesh]
    return np.column_stack(cols)


def forward(net: MlpNetwork, point) -> float:
    """Evaluate the network at one world-space point (data units)."""
    p = np.asarray(point, dtype=np.float64).reshape(-1)
    if p.shape != (net.input_dim,):
        raise ContractViolationError(
            f"point has dimension {p.shape[0]}, network expects {net.input_dim}"
        )
    return float(forward_many(net, p[None, :])[0])


def forward_many(net: MlpNetwork, points: np.ndarray, threads: int = 1) -> np.ndarray:
    """Evaluate the network at an (N, dim) batch of world points."""
    from .kernels import batch_forward

    pts = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
    if pts.ndim != 2 or pts.shape[1] != net.input_dim:
        raise ContractViolationError(
            f"points must have shape (N, {net.input_dim}), got {pts.shape}"
        )
    return batch_forward(net.packed, pts, threads=threads)


def dense_reconstruct(net: MlpNetwork, resolution: tuple[int, int, int],
                      threads: int = 1) -> ScalarVolume:
    """Sample the network on an inclusive regular grid over its domain."""
    resolution = tuple(int(r) for r in resolution)
    if net.input_dim != 3:
        raise ContractViolationError("dense_reconstruct expects a 3-D network")
    if any(r < 2 for r in resolution):
        raise ContractViolationError("resolution must be >= 2 per axis")
    pts = grid_points(net.domain_lower, net.domain_upper, resolution)
    values = forward_many(net, pts, threads=threads)
    return ScalarVolume(dims=resolution, data=values)


# ---------------------------------------------------------------------------
# Weight bundle I/O (schema "inr-weights-v1"): textual JSON, numbers written
# with 17 significant digits so save -> load round-trips bit-exactly.
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_list(values) -> str:
    return "[" + ", ".join(_fmt(v) for v in np.asarray(values).reshape(-1)) + "]"


def save_network(net: MlpNetwork, path) -> None:
    lines = ["{"]
    lines.append(f'  "schema": "{WEIGHTS_SCHEMA}",')
    lines.append(f'  "activation": "{net.activation.value}",')
    lines.append(f'  "input_dim": {net.input_dim},')
    lines.append(f'  "output_dim": {net.output_dim},')
    lines.append(f'  "domain_lower": {_fmt_list(net.domain_lower)},')
    lines.append(f'  "domain_upper": {_fmt_list(net.domain_upper)},')
    lines.append(f'  "value_scale": {_fmt(net.value_scale)},')
    lines.append(f'  "value_offset": {_fmt(net.value_offset)},')
    lines.append('  "layers": [')
    for i, layer in enumerate(net.layers):
        sep = "," if i + 1 < len(net.layers) else ""
        lines.append("    {")
        lines.append(f'      "rows": {layer.rows},')
        lines.append(f'      "cols": {layer.cols},')
        lines.append(f'      "weights": {_fmt_list(layer.weights)},')
        lines.append(f'      "bias": {_fmt_list(layer.bias)}')
        lines.append("    }" + sep)
    lines.append("  ]")
    lines.append("}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def _require(doc: dict, key: str):
    if key not in doc:
        raise WeightFormatError(f"weight bundle missing field {key!r}")
    return doc[key]


def load_network(path) -> MlpNetwork:
    try:
        with open(path, "r", encoding="ascii") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise WeightFormatError(f"weight bundle is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise WeightFormatError("weight bundle must be a JSON object")
    schema = _require(doc, "schema")
    if schema != WEIGHTS_SCHEMA:
        raise WeightFormatError(f"unsupported schema {schema!r}")
    activation = ActivationKind.parse(str(_require(doc, "activation")))
    input_dim = int(_require(doc, "input_dim"))
    output_dim = int(_require(doc, "output_dim"))
    layers = []
    raw_layers = _require(doc, "layers")
    if not isinstance(raw_layers, list) or not raw_layers:
        raise WeightFormatError("field 'layers' must be a non-empty list")
    for idx, entry in enumerate(raw_layers):
        rows = int(_require(entry, "rows"))
        cols = int(_require(entry, "cols"))
        weights = np.asarray(_require(entry, "weights"), dtype=np.float64)
        bias = np.asarray(_require(entry, "bias"), dtype=np.float64)
        if weights.size != rows * cols:
            raise WeightFormatError(
                f"layer {idx}: field 'weights' has {weights.size} entries, "
                f"expected rows*cols = {rows * cols}"
            )
        if bias.size != rows:
            raise WeightFormatError(
                f"layer {idx}: field 'bias' has {bias.size} entries, expected {rows}"
            )
        layers.append(LinearLayer(weights=weights.reshape(rows, cols), bias=bias))
    return MlpNetwork(
        layers=tuple(layers),
        activation=activation,
        input_dim=input_dim,
        output_dim=output_dim,
        domain_lower=np.asarray(_require(doc, "domain_lower"), dtype=np.float64),
        domain_upper=np.asarray(_require(doc, "domain_upper"), dtype=np.float64),
        value_scale=float(_require(doc, "value_scale")),
        value_offset=float(_require(doc, "value_offset")),
    )


# ---------------------------------------------------------------------------
# Raw volume files: little-endian float32, x-fastest, dims supplied out of
# band (CLI flags).
# ---------------------------------------------------------------------------

def save_volume_f32(volume: ScalarVolume, path) -> None:
    volume.data.astype("<f4").tofile(path)


def load_volume_f32(path, dims: tuple[int, int, int]) -> ScalarVolume:
    raw = np.fromfile(path, dtype="<f4")
    nx, ny, nz = (int(d) for d in dims)
    if raw.size != nx * ny * nz:
        raise WeightFormatError(
            f"volume file holds {raw.size} floats, dims {dims} need {nx * ny * nz}"
        )
    return ScalarVolume(dims=(nx, ny, nz), data=raw.astype(np.float64))
