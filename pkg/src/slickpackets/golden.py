"""Golden-vector files: a serialized header plus the inputs that produced it.

Format (one ``key: value`` per line, ``#`` comments allowed)::

    topology: path/to/edges.txt
    source: 0
    dest: 3
    format: default
    bits: 41
    hex: 01...

The first payload byte is a format tag (01 Default, 02 Direct) followed by
the header bytes, zero-padded to a whole byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .bits import HeaderError, from_bytes, to_bytes
from .codec_default import DefaultHeader
from .codec_direct import DirectHeader

TAGS = {"default": 0x01, "direct": 0x02}
FORMATS = {v: k for k, v in TAGS.items()}


@dataclass(frozen=True)
class GoldenVector:
    topology: str
    source: str
    dest: str
    format: str
    bits: str

    @property
    def payload(self) -> bytes:
        return bytes([TAGS[self.format]]) + to_bytes(self.bits)

    def header(self) -> DefaultHeader | DirectHeader:
        return header_from_payload(self.payload, len(self.bits))

    def dumps(self) -> str:
        return (
            f"topology: {self.topology}\n"
            f"source: {self.source}\n"
            f"dest: {self.dest}\n"
            f"format: {self.format}\n"
            f"bits: {len(self.bits)}\n"
            f"hex: {self.payload.hex()}\n"
        )

    @classmethod
    def loads(cls, text: str) -> "GoldenVector":
        fields = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition(":")
            if not sep:
                raise HeaderError(f"bad golden line {line!r}")
            fields[key.strip()] = value.strip()
        try:
            payload = bytes.fromhex(fields["hex"])
            nbits = int(fields["bits"])
            fmt = fields["format"]
        except (KeyError, ValueError) as exc:
            raise HeaderError(f"incomplete golden vector: {exc}") from None
        if not payload or FORMATS.get(payload[0]) != fmt:
            raise HeaderError("format tag does not match the format field")
        bits = from_bytes(payload[1:])
        if nbits > len(bits):
            raise HeaderError("bit count exceeds payload")
        return cls(fields.get("topology", ""), fields.get("source", ""),
                   fields.get("dest", ""), fmt, bits[:nbits])

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path: str | Path) -> "GoldenVector":
        return cls.loads(Path(path).read_text())


def header_from_payload(payload: bytes, nbits: int | None = None) -> DefaultHeader | DirectHeader:
    """Decode a tagged payload; ``nbits`` trims the padding when known."""
    if not payload:
        raise HeaderError("empty payload")
    fmt = FORMATS.get(payload[0])
    if fmt is None:
        raise HeaderError(f"unknown format tag {payload[0]:#04x}")
    bits = from_bytes(payload[1:])
    if nbits is not None:
        bits = bits[:nbits]
    if fmt == "default":
        return DefaultHeader.from_bits(bits)
    return DirectHeader(bits)
