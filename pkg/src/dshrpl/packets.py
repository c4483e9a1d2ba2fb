"""Control and data packets with a fixed big-endian wire layout.

Every packet starts with the same four octets::

    0      1      2      3
    +------+------+------+------+
    | type | code |   checksum  |
    +------+------+------+------+

followed by a variant-specific payload (all integers network byte order):

DIO       sender u32, rank u16, reliability u16 (1/10000 units),
          opinion count u16, then (node u32, reliability u16) per opinion
REQP_R    node id u32, energy u32 (milli-units), source address 16B,
          source sequence u32, route count u16, route node ids u32 each
ACK       origin u32, sequence u32, route count u16, route ids u32 each,
          entry count u16, then (neighbor u32, trust u32, energy u32,
          veracity u16) per entry
RPL_MC    base (destination address) 16B, option bytes to end of packet
WARNING   malicious id u32, malicious rank u16, issue time u64 (us),
          observer u32
DATA      sequence u32, key id u32, origin count u16, origin ids u32 each,
          ciphertext length u16, ciphertext bytes

The checksum is the 16-bit ones'-complement of the ones'-complement sum of
the whole packet taken with the checksum field zeroed (odd lengths are
padded with a zero octet).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Tuple, Union

from .errors import EncodingError, FormatError, IntegrityError
from .types import U16_MAX, U32_MAX

RELIABILITY_SCALE = 10_000
ADDRESS_PREFIX = bytes.fromhex("fd00000000000000")


class PacketType(IntEnum):
    DIO = 1
    REQP_R = 2
    ACK = 3
    RPL_MC = 4
    WARNING = 5
    DATA = 6


class AckCode(IntEnum):
    REQP_R = 0
    RPL_MC = 1


class WarningCode(IntEnum):
    REPORT = 0       # node -> root: suspicious DIO observed
    QUARANTINE = 1   # root -> all: node isolated


@dataclass(frozen=True)
class Dio:
    sender: int
    rank: int
    reliability: int                       # fixed point, 1/10000
    opinions: Tuple[Tuple[int, int], ...] = ()
    code: int = 0
    kind = PacketType.DIO


@dataclass(frozen=True)
class ReqpR:
    node_id: int
    energy: int
    source: bytes
    seq: int
    route: Tuple[int, ...]
    code: int = 0
    kind = PacketType.REQP_R


@dataclass(frozen=True)
class AckEntry:
    neighbor: int
    trust: int
    energy: int
    veracity: int                          # fixed point, 1/10000


@dataclass(frozen=True)
class Ack:
    origin: int
    seq: int
    route: Tuple[int, ...]
    entries: Tuple[AckEntry, ...] = ()
    code: int = AckCode.REQP_R
    kind = PacketType.ACK


@dataclass(frozen=True)
class RplMc:
    base: bytes
    options: bytes = b""
    code: int = 0
    kind = PacketType.RPL_MC


@dataclass(frozen=True)
class WarningPacket:
    malicious: int
    rank: int
    issue_time: int
    observer: int = 0
    code: int = WarningCode.QUARANTINE
    kind = PacketType.WARNING


@dataclass(frozen=True)
class Data:
    seq: int
    key_id: int
    origins: Tuple[int, ...]
    ciphertext: bytes
    code: int = 0
    kind = PacketType.DATA


Packet = Union[Dio, ReqpR, Ack, RplMc, WarningPacket, Data]


def to_fixed(value: float) -> int:
    """Scale a reliability in [0, 1] to the 16-bit 1/10000 representation."""
    return int(round(min(1.0, max(0.0, value)) * RELIABILITY_SCALE))


def from_fixed(value: int) -> float:
    return value / RELIABILITY_SCALE


def node_address(node_id: int) -> bytes:
    return ADDRESS_PREFIX + node_id.to_bytes(8, "big")


def address_node(addr: bytes) -> int:
    if len(addr) != 16 or addr[:8] != ADDRESS_PREFIX:
        raise FormatError("address outside the simulated prefix")
    return int.from_bytes(addr[8:], "big")


def internet_checksum(data: bytes) -> int:
    """RFC 1071 ones'-complement checksum."""
    if len(data) % 2:
        data += b"\x00"
    total = sum(struct.unpack(f"!{len(data) // 2}H", data))
    while total >> 16:
        total = (total & 0xFFFF) + (total >> 16)
    return ~total & 0xFFFF


# --- encoding -------------------------------------------------------------

def _u(name, value, limit):
    if not isinstance(value, int) or not 0 <= value <= limit:
        raise EncodingError(name, value)
    return value


def _u8(name, v):
    return _u(name, v, 0xFF)


def _u16(name, v):
    return _u(name, v, U16_MAX)


def _u32(name, v):
    return _u(name, v, U32_MAX)


def _bytes16(name, v):
    if not isinstance(v, (bytes, bytearray)) or len(v) != 16:
        raise EncodingError(name, v, "need exactly 16 octets")
    return bytes(v)


def _ids(name, ids):
    _u16(f"{name}.count", len(ids))
    return struct.pack(f"!H{len(ids)}I", len(ids), *(_u32(name, i) for i in ids))


def _reliability(name, v):
    return _u(name, v, RELIABILITY_SCALE)


def _payload(p: Packet) -> bytes:
    if isinstance(p, Dio):
        out = [struct.pack("!IHH", _u32("sender", p.sender), _u16("rank", p.rank),
                           _reliability("reliability", p.reliability))]
        _u16("opinions.count", len(p.opinions))
        out.append(struct.pack("!H", len(p.opinions)))
        for node, rel in p.opinions:
            out.append(struct.pack("!IH", _u32("opinions.node", node),
                                   _reliability("opinions.reliability", rel)))
        return b"".join(out)
    if isinstance(p, ReqpR):
        return (struct.pack("!II", _u32("node_id", p.node_id), _u32("energy", p.energy))
                + _bytes16("source", p.source)
                + struct.pack("!I", _u32("seq", p.seq))
                + _ids("route", p.route))
    if isinstance(p, Ack):
        out = [struct.pack("!II", _u32("origin", p.origin), _u32("seq", p.seq)),
               _ids("route", p.route)]
        _u16("entries.count", len(p.entries))
        out.append(struct.pack("!H", len(p.entries)))
        for e in p.entries:
            out.append(struct.pack("!IIIH", _u32("entries.neighbor", e.neighbor),
                                   _u32("entries.trust", e.trust),
                                   _u32("entries.energy", e.energy),
                                   _reliability("entries.veracity", e.veracity)))
        return b"".join(out)
    if isinstance(p, RplMc):
        if not isinstance(p.options, (bytes, bytearray)):
            raise EncodingError("options", p.options)
        return _bytes16("base", p.base) + bytes(p.options)
    if isinstance(p, WarningPacket):
        return struct.pack("!IHQI", _u32("malicious", p.malicious), _u16("rank", p.rank),
                           _u("issue_time", p.issue_time, 2 ** 64 - 1),
                           _u32("observer", p.observer))
    if isinstance(p, Data):
        if not isinstance(p.ciphertext, (bytes, bytearray)):
            raise EncodingError("ciphertext", p.ciphertext)
        _u16("ciphertext.length", len(p.ciphertext))
        return (struct.pack("!II", _u32("seq", p.seq), _u32("key_id", p.key_id))
                + _ids("origins", p.origins)
                + struct.pack("!H", len(p.ciphertext)) + bytes(p.ciphertext))
    raise EncodingError("kind", type(p).__name__, "not a packet")


def encode_packet(p: Packet) -> bytes:
    body = _payload(p)
    header = struct.pack("!BBH", int(p.kind), _u8("code", int(p.code)), 0)
    raw = header + body
    csum = internet_checksum(raw)
    return raw[:2] + struct.pack("!H", csum) + raw[4:]


# --- decoding -------------------------------------------------------------

class _Reader:
    def __init__(self, buf: bytes, pos: int):
        self.buf = buf
        self.pos = pos

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.buf):
            raise FormatError("truncated packet")
        vals = struct.unpack_from(fmt, self.buf, self.pos)
        self.pos += size
        return vals

    def raw(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise FormatError("truncated packet")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def ids(self) -> Tuple[int, ...]:
        (n,) = self.take("!H")
        return self.take(f"!{n}I")

    def rest(self) -> bytes:
        out = self.buf[self.pos:]
        self.pos = len(self.buf)
        return out

    def done(self):
        if self.pos != len(self.buf):
            raise FormatError("trailing octets after payload")


def _check_rel(v):
    if v > RELIABILITY_SCALE:
        raise FormatError(f"reliability {v} above scale")
    return v


def decode_packet(buf: bytes) -> Packet:
    buf = bytes(buf)
    if len(buf) < 4:
        raise FormatError("packet shorter than the 4-octet header")
    tag, code, csum = struct.unpack_from("!BBH", buf)
    if internet_checksum(buf[:2] + b"\x00\x00" + buf[4:]) != csum:
        raise IntegrityError("checksum mismatch")
    try:
        kind = PacketType(tag)
    except ValueError:
        raise FormatError(f"unknown packet type {tag}") from None
    r = _Reader(buf, 4)
    if kind is PacketType.DIO:
        sender, rank, rel = r.take("!IHH")
        (n,) = r.take("!H")
        ops = tuple((node, _check_rel(v)) for node, v in (r.take("!IH") for _ in range(n)))
        r.done()
        return Dio(sender, rank, _check_rel(rel), ops, code)
    if kind is PacketType.REQP_R:
        node_id, energy = r.take("!II")
        source = r.raw(16)
        (seq,) = r.take("!I")
        route = r.ids()
        r.done()
        return ReqpR(node_id, energy, source, seq, route, code)
    if kind is PacketType.ACK:
        origin, seq = r.take("!II")
        route = r.ids()
        (n,) = r.take("!H")
        entries = []
        for _ in range(n):
            nb, trust, energy, ver = r.take("!IIIH")
            entries.append(AckEntry(nb, trust, energy, _check_rel(ver)))
        r.done()
        return Ack(origin, seq, route, tuple(entries), code)
    if kind is PacketType.RPL_MC:
        base = r.raw(16)
        return RplMc(base, r.rest(), code)
    if kind is PacketType.WARNING:
        mal, rank, t, obs = r.take("!IHQI")
        r.done()
        return WarningPacket(mal, rank, t, obs, code)
    seq, key_id = r.take("!II")
    origins = r.ids()
    (n,) = r.take("!H")
    ct = r.raw(n)
    r.done()
    return Data(seq, key_id, origins, ct, code)


# --- RPL-MC option block used by the root's probing sessions -------------

@dataclass(frozen=True)
class ProbeOptions:
    serial: int                 # echoed back in the ACK's sequence field
    route: Tuple[int, ...]      # source route, root first


def encode_probe_options(o: ProbeOptions) -> bytes:
    return struct.pack("!I", _u32("serial", o.serial)) + _ids("route", o.route)


def decode_probe_options(raw: bytes) -> ProbeOptions:
    r = _Reader(raw, 0)
    (serial,) = r.take("!I")
    route = r.ids()
    r.done()
    return ProbeOptions(serial, route)
