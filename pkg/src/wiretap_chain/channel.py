"""Discrete memoryless wiretap channels.

A channel is stored as the joint transition tensor ``p(y, z | x)`` indexed
``[x, y, z]``. The physically degraded case ``X -> Y -> Z`` is built from a
forward matrix ``p(y|x)`` and a degrading matrix ``p(z|y)``; tensors given
directly are accepted but marked as having unverified degradedness.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError, ValidationError

ROW_TOL = 1e-12


def _check_stochastic(matrix: np.ndarray, name: str) -> None:
    if matrix.ndim != 2 or matrix.size == 0:
        raise ValidationError(f"{name} must be a non-empty 2-D matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)) or np.any(matrix < 0):
        bad = int(np.argwhere(~np.isfinite(matrix) | (matrix < 0))[0, 0])
        raise ValidationError(f"{name} row {bad} has a negative or non-finite entry")
    sums = matrix.sum(axis=1)
    off = np.flatnonzero(np.abs(sums - 1.0) > ROW_TOL)
    if off.size:
        r = int(off[0])
        raise ValidationError(f"{name} row {r} sums to {sums[r]!r}, expected 1")


def bsc(p: float) -> np.ndarray:
    """Transition matrix of a binary symmetric channel with crossover ``p``."""
    if not 0.0 <= p <= 1.0:
        raise InputError(f"crossover probability must lie in [0, 1], got {p}")
    return np.array([[1.0 - p, p], [p, 1.0 - p]])


@dataclass(frozen=True)
class CascadeSpec:
    forward: np.ndarray  # p(y|x), rows indexed by x
    degrade: np.ndarray  # p(z|y), rows indexed by y

    def __post_init__(self):
        fwd = np.array(self.forward, dtype=float)
        deg = np.array(self.degrade, dtype=float)
        _check_stochastic(fwd, "forward")
        _check_stochastic(deg, "degrade")
        if fwd.shape[1] != deg.shape[0]:
            raise ValidationError(
                f"forward has {fwd.shape[1]} outputs but degrade has {deg.shape[0]} rows"
            )
        fwd.setflags(write=False)
        deg.setflags(write=False)
        object.__setattr__(self, "forward", fwd)
        object.__setattr__(self, "degrade", deg)


@dataclass(frozen=True)
class ChannelModel:
    """Finite-alphabet wiretap channel ``p(y, z | x)``.

    Instances are immutable; the transition tensor is stored read-only.
    ``degraded`` is True only when the model was built from a cascade.
    """

    transition: np.ndarray
    degraded: bool = False
    cascade: CascadeSpec | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        t = np.array(self.transition, dtype=float)
        if t.ndim != 3 or 0 in t.shape:
            raise ValidationError(f"transition must be a non-empty [x][y][z] tensor, got shape {t.shape}")
        _check_stochastic(t.reshape(t.shape[0], -1), "transition")
        t.setflags(write=False)
        object.__setattr__(self, "transition", t)

    @property
    def x_size(self) -> int:
        return self.transition.shape[0]

    @property
    def y_size(self) -> int:
        return self.transition.shape[1]

    @property
    def z_size(self) -> int:
        return self.transition.shape[2]

    @property
    def bob(self) -> np.ndarray:
        """Marginal ``p(y|x)`` as an ``(x_size, y_size)`` matrix."""
        return self.transition.sum(axis=2)

    @property
    def eve(self) -> np.ndarray:
        """Marginal ``p(z|x)`` as an ``(x_size, z_size)`` matrix."""
        return self.transition.sum(axis=1)

    def to_dict(self) -> dict:
        if self.cascade is not None:
            return {"cascade": {"forward": self.cascade.forward.tolist(),
                                "degrade": self.cascade.degrade.tolist()}}
        return {"x_size": self.x_size, "y_size": self.y_size, "z_size": self.z_size,
                "transition": self.transition.tolist()}


def from_cascade(spec: CascadeSpec) -> ChannelModel:
    """Build ``p(y,z|x) = p(y|x) p(z|y)`` from a physically degraded cascade."""
    t = spec.forward[:, :, None] * spec.degrade[None, :, :]
    return ChannelModel(t, degraded=True, cascade=spec)


def from_transition(tensor) -> ChannelModel:
    """Wrap an explicit ``[x][y][z]`` tensor. Degradedness is not checked."""
    return ChannelModel(np.asarray(tensor, dtype=float), degraded=False)


def bsc_cascade(p_bob: float, p_degrade: float) -> ChannelModel:
    """Bob sees BSC(p_bob); Eve sees Bob's output through a further BSC(p_degrade)."""
    return from_cascade(CascadeSpec(bsc(p_bob), bsc(p_degrade)))


def load_channel(source) -> ChannelModel:
    """Load a channel from a JSON file path or an already-parsed dict.

    Accepted layouts::

        {"cascade": {"forward": [[...]], "degrade": [[...]]}}
        {"x_size": 2, "y_size": 2, "z_size": 2, "transition": [[[...]]]}
    """
    if isinstance(source, (str, Path)):
        with open(source) as fh:
            data = json.load(fh)
    else:
        data = source
    if not isinstance(data, dict):
        raise ValidationError("channel config must be a JSON object")
    if "cascade" in data:
        c = data["cascade"]
        try:
            return from_cascade(CascadeSpec(c["forward"], c["degrade"]))
        except KeyError as exc:
            raise ValidationError(f"cascade entry is missing {exc}") from None
    if "transition" in data:
        model = from_transition(data["transition"])
        for key, got in (("x_size", model.x_size), ("y_size", model.y_size), ("z_size", model.z_size)):
            if key not in data:
                raise ValidationError(f"transition channel must declare {key}")
            if int(data[key]) != got:
                raise ValidationError(f"{key}={data[key]} disagrees with tensor dimension {got}")
        return model
    raise ValidationError("channel config needs either a 'cascade' or a 'transition' entry")


def _as_symbols(block, size: int, name: str) -> np.ndarray:
    arr = np.asarray(block, dtype=np.int64).reshape(-1)
    if arr.size and (arr.min() < 0 or arr.max() >= size):
        raise InputError(f"{name} symbol out of range [0, {size})")
    return arr


def sample_block(model: ChannelModel, x_block, rng: np.random.Generator):
    """Pass ``x_block`` through the channel, one independent use per symbol.

    Returns ``(y_block, z_block)`` as int arrays. Deterministic for a given
    generator state.
    """
    x = _as_symbols(x_block, model.x_size, "x")
    if x.size == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty.copy()
    flat = model.transition.reshape(model.x_size, -1)
    cdf = np.cumsum(flat, axis=1)[x]
    u = rng.random(x.size)
    joint = (u[:, None] >= cdf).sum(axis=1)
    # guards against u landing beyond a cdf that rounds to slightly under 1
    np.minimum(joint, flat.shape[1] - 1, out=joint)
    return joint // model.z_size, joint % model.z_size


def _log_likelihood(matrix: np.ndarray, x, out, size_out: int) -> float:
    x = _as_symbols(x, matrix.shape[0], "x")
    out = _as_symbols(out, size_out, "output")
    if x.size != out.size:
        raise InputError(f"length mismatch: {x.size} inputs vs {out.size} outputs")
    with np.errstate(divide="ignore"):
        return float(np.log(matrix[x, out]).sum())


def block_likelihood(model: ChannelModel, x_block, y_block) -> float:
    """``prod_i p(y_i | x_i)`` under Bob's marginal."""
    return float(np.exp(_log_likelihood(model.bob, x_block, y_block, model.y_size)))


def eve_block_likelihood(model: ChannelModel, x_block, z_block) -> float:
    """``prod_i p(z_i | x_i)`` under Eve's marginal."""
    return float(np.exp(_log_likelihood(model.eve, x_block, z_block, model.z_size)))


def joint_block_likelihood(model: ChannelModel, x_block, y_block, z_block) -> float:
    """``prod_i p(y_i, z_i | x_i)``."""
    y = _as_symbols(y_block, model.y_size, "y")
    z = _as_symbols(z_block, model.z_size, "z")
    if y.size != z.size:
        raise InputError(f"length mismatch: {y.size} y symbols vs {z.size} z symbols")
    flat = model.transition.reshape(model.x_size, -1)
    return float(np.exp(_log_likelihood(flat, x_block, y * model.z_size + z, flat.shape[1])))
