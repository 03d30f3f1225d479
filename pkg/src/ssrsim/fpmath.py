"""Single-precision arithmetic helpers shared by the simulator and the
host-side golden models, so both round identically.

Values travel as Python floats that are always exactly representable in
binary32. Fused multiply-add evaluates the product and sum in float64 and
rounds once to float32.
"""

from __future__ import annotations

import math
import struct

_PACK = struct.Struct("<f").pack
_UNPACK = struct.Struct("<f").unpack
_PACK_I = struct.Struct("<I").pack
_UNPACK_I = struct.Struct("<I").unpack


def f32(x: float) -> float:
    """Round to the nearest binary32 value."""
    try:
        return _UNPACK(_PACK(x))[0]
    except OverflowError:
        return math.inf if x > 0 else -math.inf


def fma32(a: float, b: float, c: float) -> float:
    """a*b + c rounded once to binary32 (product is exact in float64)."""
    return f32(a * b + c)


def f32_to_bits(x: float) -> int:
    try:
        return _UNPACK_I(_PACK(x))[0]
    except OverflowError:
        return 0x7F800000 if x > 0 else 0xFF800000


def bits_to_f32(bits: int) -> float:
    return _UNPACK(_PACK_I(bits & 0xFFFFFFFF))[0]


def fmin32(a: float, b: float) -> float:
    return a if a < b else b


def fmax32(a: float, b: float) -> float:
    return a if a > b else b
