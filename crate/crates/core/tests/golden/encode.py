"""Writes the golden wire fixtures from a standalone encoder.

Run from this directory: python3 encode.py
"""

import struct


def bits(values):
    out = bytearray((len(values) + 7) // 8)
    for i, v in enumerate(values):
        if v:
            out[i // 8] |= 1 << (i % 8)
    return struct.pack(">I", len(values)) + bytes(out)


def indices(values):
    return struct.pack(">I", len(values)) + b"".join(struct.pack(">I", v) for v in values)


def frame(kind, payload):
    return struct.pack(">IB", len(payload), kind) + payload


MESSAGES = [
    frame(0x01, struct.pack(">Q", 0x0102030405060708) + bytes(range(32))),
    frame(
        0x02,
        bits([i % 3 == 0 for i in range(13)])
        + bits([i % 2 == 1 for i in range(13)])
        + bits([i < 5 for i in range(13)])
        + bits([i == 7 for i in range(13)]),
    ),
    frame(0x03, indices([3, 70000, 0xFFFFFFFF])),
    frame(0x04, bits([])),
    frame(0x05, bits([i % 5 == 0 for i in range(17)])),
    frame(0x06, bits([True] * 64)),
    frame(0x07, bits([True])),
    frame(0x08, bits([i % 2 == 0 for i in range(9)])),
    frame(0x09, bytes([1, 0]) + bits([True])),
    frame(0x0A, bytes([7])),
    frame(0x0B, indices([])),
    frame(0x09, bytes([0, 2]) + bits([])),
]

TRANSCRIPT = (
    b"BCNS1"
    + bytes([1])
    + struct.pack(">Q", 42)
    + bytes([0xAB] * 32)
    + bytes([1]) + struct.pack(">Q", 0) + frame(0x01, struct.pack(">Q", 42) + bytes([0xAB] * 32))
    + bytes([0]) + struct.pack(">Q", 2_000_000_123) + frame(0x07, bits([True]))
    + bytes([1]) + struct.pack(">Q", 2_500_000_000) + frame(0x09, bytes([1, 0]) + bits([False]))
)

with open("frames.bin", "wb") as f:
    f.write(b"".join(MESSAGES))
with open("transcript.bin", "wb") as f:
    f.write(TRANSCRIPT)
