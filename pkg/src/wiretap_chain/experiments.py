"""Monte-Carlo harness, rate ramp and result files.

Every random draw comes from :mod:`wiretap_chain.seeding` streams keyed by
the config seed and the trial index, so results do not depend on how the
trials are split across worker processes.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .chain_protocol import (
    ProtocolCodebooks,
    SlotSchedule,
    build_codebooks,
    build_schedule,
    local_layout,
    run_session,
    schedule_for_lambda,
)
from .channel import ChannelModel, load_channel, sample_block
from .errors import InputError, ValidationError
from .infotheory import InputDistribution, RateProfile, rate_profile
from .leakage_audit import DEFAULT_JOINT_CAP, LeakageReport, audit_all, build_joint
from .seeding import component_rng
from .wiretap_code import DEFAULT_MAX_N, decode_many, default_bin_bits

SCHEMA_VERSION = 1
CONFIDENCE = 0.95


@dataclass
class ExperimentConfig:
    channel: dict
    n: int
    rate_bits: int
    slots: int
    trials: int = 1000
    seed: int = 0
    bin_bits: int | None = None
    restart_period: int | None = None
    lam: int | None = None  # explicit lambda: fixes the slot layout, skips the rate check
    grid_steps: int = 201
    joint_cap: int = DEFAULT_JOINT_CAP
    max_n: int = DEFAULT_MAX_N
    outputs: tuple[str, ...] = ("ramp", "errors")

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("trials must be at least 1")
        for name in ("n", "rate_bits", "slots"):
            if int(getattr(self, name)) < 1:
                raise ValidationError(f"{name} must be a positive integer")

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        data = dict(data)
        ref = data.pop("channel", None)
        if ref is None:
            raise ValidationError("config needs a 'channel' entry (path or inline object)")
        if isinstance(ref, str):
            path = Path(ref)
            if not path.is_absolute() and base_dir is not None:
                path = base_dir / path
            with open(path) as fh:
                ref = json.load(fh)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        known = set(cls.__dataclass_fields__) - {"channel"}
        extra = set(data) - known
        if extra:
            raise ValidationError(f"unknown config keys: {sorted(extra)}")
        if "outputs" in data:
            data["outputs"] = tuple(data["outputs"])
        return cls(channel=ref, **data)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        path = Path(path)
        with open(path) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValidationError("config file must hold a JSON object")
        return cls.from_dict(data, path.parent)

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["outputs"] = list(self.outputs)
        out["lambda"] = out.pop("lam")
        return out


@dataclass
class Setup:
    model: ChannelModel
    profile: RateProfile | None
    schedule: SlotSchedule
    codebooks: ProtocolCodebooks
    bin_bits: int


def prepare(config: ExperimentConfig) -> Setup:
    """Channel, rates, schedule and codebooks for a config."""
    model = load_channel(config.channel)
    if config.lam is None:
        profile = rate_profile(model, config.grid_steps)
        schedule = build_schedule(profile, config.rate_bits, config.n, config.slots, config.restart_period)
        wt_dist, keyed_dist = profile.optimizer_rs, profile.optimizer_c
    else:
        profile = None
        schedule = schedule_for_lambda(config.lam, config.rate_bits, config.n, config.slots,
                                       config.restart_period)
        wt_dist = keyed_dist = InputDistribution.uniform(model.x_size)
    bin_bits = config.bin_bits
    if bin_bits is None:
        bin_bits = default_bin_bits(config.n, wt_dist, model)
    codebooks = build_codebooks(schedule, bin_bits, config.seed, wt_dist, keyed_dist, config.max_n)
    return Setup(model, profile, schedule, codebooks, bin_bits)


@dataclass(frozen=True)
class Proportion:
    """Error count with a Wilson interval."""

    errors: int
    trials: int
    confidence: float = CONFIDENCE

    @property
    def p(self) -> float:
        return self.errors / self.trials

    @property
    def sigma(self) -> float:
        return math.sqrt(self.p * (1 - self.p) / self.trials)

    @property
    def interval(self) -> tuple[float, float]:
        ci = stats.binomtest(self.errors, self.trials).proportion_ci(self.confidence, method="wilson")
        return float(ci.low), float(ci.high)

    @property
    def half_width(self) -> float:
        lo, hi = self.interval
        return (hi - lo) / 2


@dataclass(frozen=True)
class ErrorEstimate:
    """Monte-Carlo message error rates of the component codes."""

    wiretap: Proportion
    keyed: dict[int, Proportion] = field(default_factory=dict)

    @property
    def epsilon(self) -> float:
        return self.wiretap.p

    @property
    def delta(self) -> float:
        """Worst keyed-code error rate (0 when no keyed code exists)."""
        return max((p.p for p in self.keyed.values()), default=0.0)

    @property
    def delta_sigma(self) -> float:
        worst = max(self.keyed.values(), key=lambda p: p.p, default=None)
        return worst.sigma if worst else 0.0


def _code_error_count(book, channel: ChannelModel, trials: int, rng: np.random.Generator,
                      binned: bool) -> int:
    count = 1 << book.rate_bits if binned else book.num_codewords
    msgs = rng.integers(count, size=trials)
    rows = msgs * book.bin_size + rng.integers(book.bin_size, size=trials) if binned else msgs
    x = book.codewords[rows]
    y, _ = sample_block(channel, x.ravel(), rng)
    decoded = decode_many(book, y.reshape(x.shape), channel)
    return int(np.count_nonzero(decoded != msgs))


def measure_component_errors(channel: ChannelModel, codebooks: ProtocolCodebooks, trials: int,
                             rng: np.random.Generator) -> ErrorEstimate:
    """Estimate the wiretap-code and keyed-code message error rates over Bob's channel."""
    if trials < 100:
        raise InputError(f"need at least 100 trials, got {trials}")
    wt = Proportion(_code_error_count(codebooks.wiretap, channel, trials, rng, True), trials)
    keyed = {b: Proportion(_code_error_count(book, channel, trials, rng, False), trials)
             for b, book in sorted(codebooks.keyed.items())}
    return ErrorEstimate(wt, keyed)


@dataclass(frozen=True)
class SlotError:
    slot: int
    local: int
    estimate: Proportion
    bound: float
    sigma: float

    @property
    def flag(self) -> bool:
        """True when the measured error exceeds the propagation bound by more than 3 sigma."""
        return self.estimate.p > self.bound + 3 * self.sigma


@dataclass
class ErrorCurve:
    rows: list[SlotError]
    components: ErrorEstimate
    indicators: np.ndarray  # (trials, slots) bool, per-session slot errors

    @property
    def violations(self) -> list[int]:
        return [r.slot for r in self.rows if r.flag]


def _session_chunk(args) -> np.ndarray:
    model, schedule, codebooks, seed, start, stop = args
    out = np.zeros((stop - start, len(schedule)), dtype=bool)
    for i, t in enumerate(range(start, stop)):
        rec = run_session(model, schedule, codebooks, component_rng(seed, "session", t))
        out[i] = rec.errors
    return out


def simulate_sessions(setup: Setup, trials: int, seed: int, threads: int = 1) -> np.ndarray:
    """Per-session, per-slot error indicators for ``trials`` independent sessions."""
    threads = max(1, min(threads, trials))
    if threads == 1:
        return _session_chunk((setup.model, setup.schedule, setup.codebooks, seed, 0, trials))
    edges = np.linspace(0, trials, threads + 1).astype(int)
    jobs = [(setup.model, setup.schedule, setup.codebooks, seed, int(a), int(b))
            for a, b in zip(edges[:-1], edges[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return np.concatenate(list(pool.map(_session_chunk, jobs)))


def propagation_bound(local: int, comp: ErrorEstimate) -> tuple[float, float]:
    """``local * eps + (local - 1) * delta`` and the standard error of that sum."""
    bound = local * comp.epsilon + (local - 1) * comp.delta
    var = (local * comp.wiretap.sigma) ** 2 + ((local - 1) * comp.delta_sigma) ** 2
    return bound, math.sqrt(var)


def error_propagation_curve(config: ExperimentConfig, threads: int = 1,
                            setup: Setup | None = None) -> ErrorCurve:
    """Per-slot message error rates of full sessions, checked against the propagation bound."""
    setup = setup or prepare(config)
    comp = measure_component_errors(setup.model, setup.codebooks, max(config.trials, 100),
                                    component_rng(config.seed, "components"))
    ind = simulate_sessions(setup, config.trials, config.seed, threads)
    rows = []
    for spec, col in zip(setup.schedule, ind.T):
        est = Proportion(int(col.sum()), config.trials)
        bound, bsig = propagation_bound(spec.local, comp)
        rows.append(SlotError(spec.index, spec.local, est, bound, math.hypot(est.sigma, bsig)))
    return ErrorCurve(rows, comp, ind)


def two_proportion_test(a: Proportion, b: Proportion) -> float:
    """Two-sided p-value of the pooled two-proportion z-test."""
    pooled = (a.errors + b.errors) / (a.trials + b.trials)
    se = math.sqrt(pooled * (1 - pooled) * (1 / a.trials + 1 / b.trials))
    if se == 0:
        return 1.0
    z = (a.p - b.p) / se
    return float(2 * stats.norm.sf(abs(z)))


def restart_equivalence(curve: ErrorCurve, period: int, confidence: float = CONFIDENCE):
    """Compare each slot after a restart with the slot ``period`` earlier.

    Returns ``(slot_a, slot_b, p_value, same)`` tuples; the per-pair level is
    Bonferroni-adjusted so the family holds at ``confidence``.
    """
    pairs = [(r.slot, r.slot + period) for r in curve.rows if r.slot + period <= len(curve.rows)]
    if not pairs:
        return []
    alpha = (1 - confidence) / len(pairs)
    out = []
    for a, b in pairs:
        pv = two_proportion_test(curve.rows[a - 1].estimate, curve.rows[b - 1].estimate)
        out.append((a, b, pv, pv >= alpha))
    return out


@dataclass(frozen=True)
class RampRow:
    slot: int
    mini_slots: int
    rate: float


@dataclass
class RampTable:
    rows: list[RampRow]
    limit: float
    ratio_is_integer: bool

    @property
    def cumulative_average(self) -> list[float]:
        """Running secret bits per channel use (weighted by slot length)."""
        bits = uses = 0.0
        out = []
        for r in self.rows:
            bits += r.rate * r.mini_slots
            uses += r.mini_slots
            out.append(bits / uses)
        return out


def rate_ramp(profile: RateProfile, slots: int, restart_period: int | None = None) -> RampTable:
    """Per-slot secret rate in bits per channel use.

    Slot 1 runs at ``R_s``, window slots ``2..lam`` at ``k R_s / 2``, then
    ``lam R_s`` (which is ``C`` only when ``C / R_s`` is an integer).
    ``restart_period`` of ``None`` or ``0`` means no restarts.
    """
    rows = []
    for k in range(1, slots + 1):
        local = (k - 1) % restart_period + 1 if restart_period else k
        mini, wt, keyed = local_layout(local, profile.lam)
        rows.append(RampRow(k, mini, (wt + keyed) * profile.secrecy_capacity / mini))
    return RampTable(rows, profile.keyed_rate, profile.ratio_is_integer)


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def write_ramp_csv(path, table: RampTable) -> None:
    lines = [f"# wiretap-chain ramp schema v{SCHEMA_VERSION}", "slot,minislots,rate"]
    lines += [f"{r.slot},{r.mini_slots},{_fmt(r.rate)}" for r in table.rows]
    Path(path).write_text("\n".join(lines) + "\n")


def write_errors_csv(path, curve: ErrorCurve) -> None:
    lines = [f"# wiretap-chain errors schema v{SCHEMA_VERSION}", "slot,p_err,ci_lo,ci_hi,bound,flag"]
    for r in curve.rows:
        lo, hi = r.estimate.interval
        lines.append(f"{r.slot},{_fmt(r.estimate.p)},{_fmt(lo)},{_fmt(hi)},{_fmt(r.bound)},{int(r.flag)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_json(path, data: dict) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def manifest(config: ExperimentConfig, setup: Setup, extra: dict | None = None) -> dict:
    out = {
        "schema": SCHEMA_VERSION,
        "config": config.to_dict(),
        "bin_bits": setup.bin_bits,
        "lambda": setup.schedule.lam,
        "restart_period": setup.schedule.restart_period,
        "rates": setup.profile.to_dict() if setup.profile else None,
        "codebooks": setup.codebooks.to_dict(),
        "schedule": setup.schedule.to_rows(),
    }
    if extra:
        out.update(extra)
    return out


def run_simulation(config: ExperimentConfig, out_dir, threads: int = 1) -> ErrorCurve:
    """Write ``ramp.csv``, ``errors.csv`` and ``manifest.json`` into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    setup = prepare(config)
    curve = error_propagation_curve(config, threads, setup)
    if "ramp" in config.outputs and setup.profile is not None:
        write_ramp_csv(out_dir / "ramp.csv", rate_ramp(setup.profile, config.slots,
                                                       setup.schedule.restart_period))
    if "errors" in config.outputs:
        write_errors_csv(out_dir / "errors.csv", curve)
    comp = curve.components
    write_json(out_dir / "manifest.json", manifest(config, setup, {
        "epsilon": comp.epsilon,
        "delta": {str(b): p.p for b, p in comp.keyed.items()},
    }))
    return curve


def run_leakage(config: ExperimentConfig, out_dir=None) -> LeakageReport:
    """Exact audit over ``config.slots`` slots; optionally writes ``leakage.json``."""
    setup = prepare(config)
    joint = build_joint(setup.model, setup.codebooks, setup.schedule, config.slots, config.joint_cap)
    report = audit_all(joint)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        data = report.to_dict()
        data["state_count"] = joint.state_count
        write_json(out_dir / "leakage.json", data)
        write_json(out_dir / "manifest.json", manifest(config, setup, {"state_count": joint.state_count}))
    return report


def default_threads() -> int:
    return os.cpu_count() or 1
