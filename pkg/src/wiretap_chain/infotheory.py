"""Entropy and mutual-information kernels, rate optimization, Gaussian closed forms.

All logarithms are base 2, so every quantity is in bits (per channel use
for rates).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelModel
from .errors import NoSecrecyError, ValidationError

MASS_TOL = 1e-9
INTEGER_RATIO_TOL = 1e-9
NO_SECRECY_TOL = 1e-12
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _check_joint(joint, ndim: int) -> np.ndarray:
    p = np.asarray(joint, dtype=float)
    if p.ndim != ndim:
        raise ValidationError(f"expected a {ndim}-D joint distribution, got shape {p.shape}")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValidationError("joint distribution has negative or non-finite entries")
    total = p.sum()
    if abs(total - 1.0) > MASS_TOL:
        raise ValidationError(f"joint distribution has total mass {total!r}, expected 1")
    return p


def entropy(probs) -> float:
    """Shannon entropy in bits, with ``0 log 0 = 0``."""
    p = np.asarray(probs, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def h2(p: float) -> float:
    """Binary entropy function."""
    return entropy([p, 1.0 - p])


def mutual_information(joint) -> float:
    """I(A;B) of a two-variable joint pmf ``joint[a, b]``.

    Evaluated as ``sum p(a,b) log2 p(a,b)/(p(a)p(b))`` over the support and
    clamped at zero.
    """
    p = _check_joint(joint, 2)
    pa = p.sum(axis=1, keepdims=True)
    pb = p.sum(axis=0, keepdims=True)
    mask = p > 0
    # log differences, not a ratio: products of tiny marginals underflow
    log_ratio = np.log2(p[mask]) - np.log2(np.broadcast_to(pa, p.shape)[mask]) \
        - np.log2(np.broadcast_to(pb, p.shape)[mask])
    return max(float((p[mask] * log_ratio).sum()), 0.0)


def conditional_mi(joint) -> float:
    """I(A;B|C) of a three-variable joint pmf ``joint[a, b, c]``."""
    p = _check_joint(joint, 3)
    pc = p.sum(axis=(0, 1), keepdims=True)
    pac = p.sum(axis=1, keepdims=True)
    pbc = p.sum(axis=0, keepdims=True)
    mask = p > 0

    def lg(a):
        return np.log2(np.broadcast_to(a, p.shape)[mask])

    log_ratio = lg(p) + lg(pc) - lg(pac) - lg(pbc)
    return max(float((p[mask] * log_ratio).sum()), 0.0)


def channel_mi(input_probs, channel_matrix) -> np.ndarray:
    """I(X;Y) for one or many input distributions over a channel ``p(y|x)``.

    ``input_probs`` may be a single vector or a stack ``(..., x_size)``; the
    result has the leading shape.
    """
    px = np.asarray(input_probs, dtype=float)
    w = np.asarray(channel_matrix, dtype=float)
    py = px @ w
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = np.where(w > 0, np.log2(np.where(w > 0, w, 1.0)), 0.0)
        # sum_x p(x) sum_y w log w  -  sum_y p(y) log p(y)
        h_y_given_x = -(px * (w * log_ratio).sum(axis=1)).sum(axis=-1)
        h_y = -np.where(py > 0, py * np.log2(np.where(py > 0, py, 1.0)), 0.0).sum(axis=-1)
    return np.maximum(h_y - h_y_given_x, 0.0)


@dataclass(frozen=True)
class InputDistribution:
    probs: tuple[float, ...]

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValidationError(f"input distribution must be a probability vector, got {self.probs}")
        object.__setattr__(self, "probs", tuple(float(v) for v in p))

    @classmethod
    def uniform(cls, size: int) -> "InputDistribution":
        return cls(tuple([1.0 / size] * size))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs)

    def __len__(self):
        return len(self.probs)


@dataclass(frozen=True)
class RateProfile:
    main_capacity: float
    secrecy_capacity: float
    lam: int
    ratio_is_integer: bool
    optimizer_c: InputDistribution | None = None
    optimizer_rs: InputDistribution | None = None

    @property
    def keyed_rate(self) -> float:
        """Steady-state secret rate ``lam * R_s`` (equals C when the ratio is integer)."""
        return self.lam * self.secrecy_capacity

    def to_dict(self) -> dict:
        return {
            "C": self.main_capacity,
            "R_s": self.secrecy_capacity,
            "lambda": self.lam,
            "ratio_is_integer": self.ratio_is_integer,
            "optimizer_c": list(self.optimizer_c.probs) if self.optimizer_c else None,
            "optimizer_rs": list(self.optimizer_rs.probs) if self.optimizer_rs else None,
        }


def lambda_from_rates(capacity: float, secrecy: float) -> tuple[int, bool]:
    """Integer part of ``C / R_s`` and whether the ratio is (numerically) integral."""
    if secrecy <= NO_SECRECY_TOL:
        raise NoSecrecyError(f"no secrecy: R_s = {secrecy:.3g} bits/use")
    ratio = capacity / secrecy
    nearest = round(ratio)
    if abs(ratio - nearest) < INTEGER_RATIO_TOL:
        return max(int(nearest), 1), True
    return max(int(math.floor(ratio)), 1), False


def simplex_grid(size: int, steps: int) -> np.ndarray:
    """All distributions on ``size`` points with coordinates in multiples of ``1/(steps-1)``.

    Rows come out in lexicographic order of the first coordinate, so row 0 is
    the vertex ``(0, ..., 0, 1)``.
    """
    if size == 1:
        return np.ones((1, 1))
    total = steps - 1
    if size == 2:
        a = np.arange(total + 1)
        return np.column_stack([a, total - a]) / total
    rows = []
    # stars and bars: choose size-1 bar positions among total+size-1 slots
    for bars in itertools.combinations(range(total + size - 1), size - 1):
        prev = -1
        counts = []
        for b in bars:
            counts.append(b - prev - 1)
            prev = b
        counts.append(total + size - 2 - prev)
        rows.append(counts)
    return np.asarray(rows, dtype=float) / total


def _golden_max(f, lo: float, hi: float, iters: int) -> tuple[float, float]:
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = (a + b) / 2
    return x, f(x)


def _refine(objective, p0: np.ndarray, value0: float, step: float, iters: int) -> tuple[np.ndarray, float]:
    """Golden-section line searches along mass-transfer directions ``e_i - e_j``."""
    best, best_val = p0.copy(), value0
    size = p0.size
    for _sweep in range(3 if size > 2 else 1):
        for i, j in itertools.combinations(range(size), 2):
            lo = -min(best[i], step)
            hi = min(best[j], step)
            if hi - lo <= 0:
                continue

            def along(t, i=i, j=j, base=best):
                q = base.copy()
                q[i] += t
                q[j] -= t
                return float(objective(np.clip(q, 0.0, 1.0)))

            t, val = _golden_max(along, lo, hi, iters)
            if val > best_val:
                best = best.copy()
                best[i] += t
                best[j] -= t
                best = np.clip(best, 0.0, 1.0)
                best /= best.sum()
                best_val = val
    return best, best_val


def _maximize(objective, size: int, grid_steps: int, refine_iters: int) -> tuple[np.ndarray, float]:
    grid = simplex_grid(size, grid_steps)
    values = objective(grid)
    idx = int(np.argmax(values))  # first maximum = lowest-index grid point
    p, val = grid[idx], float(values[idx])
    if refine_iters > 0 and size > 1:
        p, val = _refine(objective, p, val, 1.0 / (grid_steps - 1), refine_iters)
    return p, val


def rate_profile(model: ChannelModel, grid_steps: int = 201, refine_iters: int = 60) -> RateProfile:
    """Main-channel capacity, secrecy capacity and ``lambda`` for a discrete channel.

    Both maximizations run a grid search over the input simplex followed by
    golden-section refinement. Raises :class:`NoSecrecyError` when the
    secrecy capacity is not positive.
    """
    if grid_steps < 2:
        raise ValidationError("grid_steps must be at least 2")
    bob, eve = model.bob, model.eve

    def cap_obj(p):
        return channel_mi(p, bob)

    def sec_obj(p):
        return channel_mi(p, bob) - channel_mi(p, eve)

    p_c, c = _maximize(cap_obj, model.x_size, grid_steps, refine_iters)
    p_s, rs = _maximize(sec_obj, model.x_size, grid_steps, refine_iters)
    rs = max(rs, 0.0)
    lam, is_int = lambda_from_rates(c, rs)
    return RateProfile(c, rs, lam, is_int,
                       InputDistribution(tuple(p_c / p_c.sum())),
                       InputDistribution(tuple(p_s / p_s.sum())))


@dataclass(frozen=True)
class GaussianWiretapParams:
    power: float
    sigma_b_sq: float
    sigma_e_sq: float

    def __post_init__(self):
        for name in ("power", "sigma_b_sq", "sigma_e_sq"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be a positive number, got {v!r}")


def gaussian_rates(params: GaussianWiretapParams) -> RateProfile:
    """Closed-form rates of the AWGN wiretap channel with Gaussian inputs."""
    if params.sigma_b_sq >= params.sigma_e_sq:
        raise NoSecrecyError(
            f"no secrecy: Bob noise variance {params.sigma_b_sq} is not below Eve's {params.sigma_e_sq}"
        )
    c = 0.5 * math.log2(1.0 + params.power / params.sigma_b_sq)
    rs = c - 0.5 * math.log2(1.0 + params.power / params.sigma_e_sq)
    lam, is_int = lambda_from_rates(c, rs)
    return RateProfile(c, rs, lam, is_int)
