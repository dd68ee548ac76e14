"""Bit strings as ``str`` of ``'0'``/``'1'``, MSB first."""

from __future__ import annotations


class HeaderError(ValueError):
    """Malformed or truncated header."""


def uint(value: int, width: int) -> str:
    if value < 0 or value >> width:
        raise ValueError(f"{value} does not fit in {width} bits")
    return format(value, f"0{width}b") if width else ""


def to_bytes(bits: str) -> bytes:
    if not bits:
        return b""
    pad = (-len(bits)) % 8
    padded = bits + "0" * pad
    return int(padded, 2).to_bytes(len(padded) // 8, "big")


def from_bytes(data: bytes) -> str:
    if not data:
        return ""
    return format(int.from_bytes(data, "big"), f"0{len(data) * 8}b")


def nbytes(nbits: int) -> int:
    return -(-nbits // 8)


class BitReader:
    """Sequential reader over a bit string."""

    def __init__(self, bits: str, pos: int = 0, end: int | None = None):
        self.bits = bits
        self.pos = pos
        self.end = len(bits) if end is None else end

    @property
    def remaining(self) -> int:
        return self.end - self.pos

    def read(self, width: int) -> str:
        if width > self.remaining:
            raise HeaderError(
                f"truncated header: need {width} bits at offset {self.pos}, "
                f"{self.remaining} left"
            )
        out = self.bits[self.pos:self.pos + width]
        self.pos += width
        return out

    def read_uint(self, width: int) -> int:
        chunk = self.read(width)
        return int(chunk, 2) if chunk else 0

    def read_prefix_code(self, table: dict[str, int], max_len: int) -> tuple[str, int]:
        """Read one code word of a prefix-free ``table``."""
        word = ""
        while len(word) < max_len:
            word += self.read(1)
            if word in table:
                return word, table[word]
        raise HeaderError(f"invalid prefix code {word!r}")
