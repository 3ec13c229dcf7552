"""Key-chaining protocol: slot schedule and the Alice/Bob state machines.

Within a restart window, local slot ``j`` is laid out as follows (``lam`` is
the integer part of C / R_s):

* ``j == 1``: one mini-slot, one wiretap-coded message.
* ``2 <= j <= lam``: two mini-slots; one wiretap message plus ``j - 1``
  messages one-time-padded with the whole previous slot message.
* ``j > lam``: one mini-slot carrying ``lam`` keyed messages.

Each slot's full message becomes the pad for the next slot, so the key
length always equals the keyed payload length. A restart drops the key and
starts again from ``j == 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelModel, sample_block
from .errors import InputError, ProtocolError, RateError
from .infotheory import InputDistribution, RateProfile
from .seeding import derive_seed
from .wiretap_code import (
    DEFAULT_MAX_N,
    ChannelCodebook,
    WiretapCodebook,
    bits_to_int,
    build_channel_code,
    build_wiretap,
    channel_decode,
    channel_encode,
    int_to_bits,
    wiretap_decode,
    wiretap_encode,
)

RATE_TOL = 1e-12


@dataclass(frozen=True)
class SlotSpec:
    index: int
    local: int
    mini_slots: int
    wiretap_msgs: int
    keyed_msgs: int
    rate_bits: int
    n: int

    @property
    def wiretap_bits(self) -> int:
        return self.wiretap_msgs * self.rate_bits

    @property
    def key_rate_bits(self) -> int:
        return self.keyed_msgs * self.rate_bits

    @property
    def message_bits(self) -> int:
        return self.wiretap_bits + self.key_rate_bits

    @property
    def channel_uses(self) -> int:
        return self.mini_slots * self.n

    @property
    def slot_rate(self) -> float:
        """Secret bits per channel use."""
        return self.message_bits / self.channel_uses

    @property
    def is_restart(self) -> bool:
        return self.local == 1


@dataclass(frozen=True)
class SlotSchedule:
    slots: tuple[SlotSpec, ...]
    lam: int
    rate_bits: int
    n: int
    restart_period: int  # 0 means never restart

    def __len__(self):
        return len(self.slots)

    def __iter__(self):
        return iter(self.slots)

    def slot(self, k: int) -> SlotSpec:
        """Slot ``k``, 1-based."""
        if not 1 <= k <= len(self.slots):
            raise ProtocolError(f"slot {k} is outside the {len(self.slots)}-slot schedule")
        return self.slots[k - 1]

    @property
    def keyed_widths(self) -> tuple[int, ...]:
        return tuple(sorted({s.key_rate_bits for s in self.slots if s.key_rate_bits}))

    def to_rows(self) -> list[dict]:
        return [{"slot": s.index, "local": s.local, "mini_slots": s.mini_slots,
                 "wiretap_msgs": s.wiretap_msgs, "keyed_msgs": s.keyed_msgs,
                 "key_rate_bits": s.key_rate_bits, "slot_rate": s.slot_rate}
                for s in self.slots]


def local_layout(local: int, lam: int) -> tuple[int, int, int]:
    """``(mini_slots, wiretap_msgs, keyed_msgs)`` for window position ``local``."""
    if local == 1:
        return 1, 1, 0
    if local <= lam:
        return 2, 1, local - 1
    return 1, 0, lam


def schedule_for_lambda(lam: int, rate_bits: int, n: int, num_slots: int,
                        restart_period: int | None = None) -> SlotSchedule:
    """Schedule with an explicit ``lam``; no check against channel rates.

    ``restart_period=None`` selects the default ``10 * lam``; ``0`` disables
    restarts.
    """
    if lam < 1:
        raise InputError(f"lambda must be a positive integer, got {lam}")
    if num_slots < 1:
        raise InputError("num_slots must be at least 1")
    if rate_bits < 1 or n < 1:
        raise InputError("rate_bits and n must be positive")
    if restart_period is None:
        restart_period = 10 * lam
    if restart_period < 0:
        raise InputError("restart_period must be non-negative")
    slots = []
    for k in range(1, num_slots + 1):
        local = (k - 1) % restart_period + 1 if restart_period else k
        mini, wt, keyed = local_layout(local, lam)
        slots.append(SlotSpec(k, local, mini, wt, keyed, rate_bits, n))
    return SlotSchedule(tuple(slots), lam, rate_bits, n, restart_period)


def build_schedule(profile: RateProfile, rate_bits: int, n: int, num_slots: int,
                   restart_period: int | None = None) -> SlotSchedule:
    """Schedule for a channel whose rates are summarized by ``profile``.

    The per-message rate ``rate_bits / n`` must not exceed the secrecy
    capacity.
    """
    if rate_bits / n > profile.secrecy_capacity + RATE_TOL:
        raise RateError(
            f"rate exceeds secrecy capacity: {rate_bits}/{n} = {rate_bits / n:.4f} "
            f"> R_s = {profile.secrecy_capacity:.4f}"
        )
    return schedule_for_lambda(profile.lam, rate_bits, n, num_slots, restart_period)


@dataclass(frozen=True)
class ProtocolCodebooks:
    wiretap: WiretapCodebook
    keyed: dict[int, ChannelCodebook] = field(default_factory=dict)

    def keyed_for(self, bits: int) -> ChannelCodebook:
        try:
            return self.keyed[bits]
        except KeyError:
            raise ProtocolError(f"no keyed channel code for {bits}-bit payloads") from None

    def to_dict(self) -> dict:
        return {"wiretap": self.wiretap.to_dict(),
                "keyed": {str(b): book.to_dict() for b, book in sorted(self.keyed.items())}}


def build_codebooks(schedule: SlotSchedule, bin_bits: int, seed: int,
                    wiretap_dist: InputDistribution, keyed_dist: InputDistribution | None = None,
                    max_n: int = DEFAULT_MAX_N) -> ProtocolCodebooks:
    """One wiretap code plus one channel code per keyed payload width in ``schedule``."""
    keyed_dist = keyed_dist or wiretap_dist
    wt = build_wiretap(schedule.n, schedule.rate_bits, bin_bits, wiretap_dist,
                       derive_seed(seed, "wiretap"), max_n)
    keyed = {b: build_channel_code(schedule.n, b, keyed_dist, derive_seed(seed, f"keyed-{b}"), max_n)
             for b in schedule.keyed_widths}
    return ProtocolCodebooks(wt, keyed)


@dataclass
class ProtocolState:
    """Mutable per-party state. ``slot_index`` counts completed slots."""

    role: str
    schedule: SlotSchedule
    codebooks: ProtocolCodebooks
    model: ChannelModel | None = None
    slot_index: int = 0
    key_buffer: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8))

    def __post_init__(self):
        if self.role not in ("alice", "bob"):
            raise InputError(f"role must be 'alice' or 'bob', got {self.role!r}")
        if self.role == "bob" and self.model is None:
            raise InputError("Bob's state needs the channel model for decoding")

    @property
    def restart_period(self) -> int:
        return self.schedule.restart_period

    def next_slot(self) -> SlotSpec:
        if self.slot_index >= len(self.schedule):
            raise ProtocolError(f"schedule exhausted after {self.slot_index} slots")
        return self.schedule.slots[self.slot_index]

    def _key_for(self, spec: SlotSpec) -> np.ndarray:
        if spec.is_restart:
            self.key_buffer = np.zeros(0, dtype=np.uint8)
        need = spec.key_rate_bits
        if need > self.key_buffer.size:
            raise ProtocolError(
                f"slot {spec.index} needs {need} key bits but only {self.key_buffer.size} are buffered"
            )
        return self.key_buffer[:need]


def alice_encode_slot(state: ProtocolState, fresh_bits, rng: np.random.Generator) -> list[np.ndarray]:
    """Encode the next slot's message; advances ``state`` in place.

    Returns one channel-input block per mini-slot: the wiretap block first
    (if the slot has one), then the keyed block.
    """
    if state.role != "alice":
        raise ProtocolError("alice_encode_slot called on a non-Alice state")
    spec = state.next_slot()
    bits = np.asarray(fresh_bits, dtype=np.uint8).reshape(-1)
    if bits.size != spec.message_bits:
        raise InputError(f"slot {spec.index} carries {spec.message_bits} bits, got {bits.size}")
    key = state._key_for(spec)
    books = state.codebooks
    blocks = []
    if spec.wiretap_msgs:
        blocks.append(wiretap_encode(books.wiretap, bits_to_int(bits[:spec.wiretap_bits]), rng))
    if spec.keyed_msgs:
        cipher = bits[spec.wiretap_bits:] ^ key
        blocks.append(channel_encode(books.keyed_for(spec.key_rate_bits), bits_to_int(cipher)))
    state.key_buffer = bits.copy()
    state.slot_index += 1
    return blocks


def bob_decode_slot(state: ProtocolState, y_blocks) -> np.ndarray:
    """Decode the next slot from Bob's received blocks; advances ``state`` in place.

    Bob's decoded message (right or wrong) becomes his next key, so decoding
    errors propagate until the next restart.
    """
    if state.role != "bob":
        raise ProtocolError("bob_decode_slot called on a non-Bob state")
    spec = state.next_slot()
    if len(y_blocks) != spec.mini_slots:
        raise InputError(f"slot {spec.index} expects {spec.mini_slots} blocks, got {len(y_blocks)}")
    key = state._key_for(spec)
    books = state.codebooks
    parts = []
    pos = 0
    if spec.wiretap_msgs:
        w = wiretap_decode(books.wiretap, y_blocks[pos], state.model)
        parts.append(int_to_bits(w, spec.wiretap_bits))
        pos += 1
    if spec.keyed_msgs:
        c = channel_decode(books.keyed_for(spec.key_rate_bits), y_blocks[pos], state.model)
        parts.append(int_to_bits(c, spec.key_rate_bits) ^ key)
    decoded = np.concatenate(parts) if parts else np.zeros(0, dtype=np.uint8)
    state.key_buffer = decoded.copy()
    state.slot_index += 1
    return decoded


@dataclass
class TranscriptRecord:
    """Everything that crossed the channel in one session, slot by slot."""

    schedule: SlotSchedule
    messages: list[np.ndarray] = field(default_factory=list)
    x_blocks: list[list[np.ndarray]] = field(default_factory=list)
    y_blocks: list[list[np.ndarray]] = field(default_factory=list)
    z_blocks: list[list[np.ndarray]] = field(default_factory=list)
    decoded: list[np.ndarray] = field(default_factory=list)
    key_consumed: list[int] = field(default_factory=list)

    @property
    def errors(self) -> np.ndarray:
        return np.array([not np.array_equal(w, d) for w, d in zip(self.messages, self.decoded)])

    @property
    def delivered_bits(self) -> np.ndarray:
        """Secret bits delivered correctly in each slot."""
        sizes = np.array([w.size for w in self.messages])
        return np.where(self.errors, 0, sizes)

    @property
    def throughput(self) -> np.ndarray:
        uses = np.array([self.schedule.slots[i].channel_uses for i in range(len(self.messages))])
        return self.delivered_bits / uses

    def eve_view(self, k: int) -> np.ndarray:
        """Eve's observations ``Z^(k)`` from slots 1..k, concatenated."""
        blocks = [b for slot in self.z_blocks[:k] for b in slot]
        return np.concatenate(blocks) if blocks else np.zeros(0, dtype=np.int64)


def run_session(channel: ChannelModel, schedule: SlotSchedule, codebooks: ProtocolCodebooks,
                rng: np.random.Generator, num_slots: int | None = None,
                allow_nondegraded: bool = False) -> TranscriptRecord:
    """Run Alice, the channel, Bob and Eve for ``num_slots`` slots.

    Messages are uniform bits drawn from ``rng``; the same generator drives
    bin selection and channel noise, so equal seeds give identical
    transcripts.
    """
    if not channel.degraded and not allow_nondegraded:
        raise ProtocolError("protocol runs need a degraded (cascade) channel; "
                            "pass allow_nondegraded=True to override")
    num_slots = len(schedule) if num_slots is None else num_slots
    if not 1 <= num_slots <= len(schedule):
        raise InputError(f"num_slots must lie in [1, {len(schedule)}]")
    alice = ProtocolState("alice", schedule, codebooks)
    bob = ProtocolState("bob", schedule, codebooks, model=channel)
    rec = TranscriptRecord(schedule)
    for _ in range(num_slots):
        spec = alice.next_slot()
        bits = rng.integers(0, 2, size=spec.message_bits).astype(np.uint8)
        xs = alice_encode_slot(alice, bits, rng)
        ys, zs = [], []
        for x in xs:
            y, z = sample_block(channel, x, rng)
            ys.append(y)
            zs.append(z)
        rec.messages.append(bits)
        rec.x_blocks.append(xs)
        rec.y_blocks.append(ys)
        rec.z_blocks.append(zs)
        rec.key_consumed.append(spec.key_rate_bits)
        rec.decoded.append(bob_decode_slot(bob, ys))
    return rec
