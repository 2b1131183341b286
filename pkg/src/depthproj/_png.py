"""Minimal 16-bit grayscale PNG codec (stdlib only).

Writes color type 0, bit depth 16, no interlace, filter 0 on every row.
Reads any single-channel 16-bit PNG, including files produced by other
writers that use the full filter set (Sub, Up, Average, Paeth). Chunk CRCs
are verified. Anything that is not 16-bit grayscale is rejected.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from .errors import FormatError

SIGNATURE = b"\x89PNG\r\n\x1a\n"


def _chunk(tag: bytes, payload: bytes) -> bytes:
    crc = zlib.crc32(tag + payload) & 0xFFFFFFFF
    return struct.pack(">I", len(payload)) + tag + payload + struct.pack(">I", crc)


def encode_gray16(codes: np.ndarray, compress_level: int = 6) -> bytes:
    """Serialize a (h, w) uint16 array as PNG bytes."""
    codes = np.asarray(codes)
    if codes.ndim != 2 or codes.dtype != np.uint16:
        raise FormatError("encode_gray16 expects a 2-D uint16 array")
    h, w = codes.shape
    ihdr = struct.pack(">IIBBBBB", w, h, 16, 0, 0, 0, 0)
    rows = codes.astype(">u2").tobytes()
    stride = 2 * w
    raw = bytearray()
    for r in range(h):
        raw.append(0)
        raw.extend(rows[r * stride:(r + 1) * stride])
    idat = zlib.compress(bytes(raw), compress_level)
    return SIGNATURE + _chunk(b"IHDR", ihdr) + _chunk(b"IDAT", idat) + _chunk(b"IEND", b"")


def _paeth(a: int, b: int, c: int) -> int:
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    if pb <= pc:
        return b
    return c


def _unfilter(raw: bytes, width: int, height: int) -> np.ndarray:
    """Undo PNG row filters for 2-byte pixels; returns (h, w) uint16."""
    stride = 2 * width
    if len(raw) != height * (stride + 1):
        raise FormatError("PNG pixel data has the wrong length")
    out = np.zeros((height, stride), dtype=np.uint8)
    prev = np.zeros(stride, dtype=np.int64)
    for r in range(height):
        ftype = raw[r * (stride + 1)]
        row = np.frombuffer(raw, dtype=np.uint8,
                            count=stride, offset=r * (stride + 1) + 1).astype(np.int64)
        if ftype == 0:
            recon = row
        elif ftype == 1:  # Sub: cumulative within each byte lane (bpp = 2)
            recon = row.copy()
            recon[0::2] = np.cumsum(recon[0::2]) % 256
            recon[1::2] = np.cumsum(recon[1::2]) % 256
        elif ftype == 2:  # Up
            recon = (row + prev) % 256
        elif ftype == 3:  # Average, serial in the left neighbor
            recon = np.zeros(stride, dtype=np.int64)
            for i in range(stride):
                left = recon[i - 2] if i >= 2 else 0
                recon[i] = (row[i] + (left + prev[i]) // 2) % 256
        elif ftype == 4:  # Paeth, serial in the left neighbor
            recon = np.zeros(stride, dtype=np.int64)
            for i in range(stride):
                left = recon[i - 2] if i >= 2 else 0
                upleft = prev[i - 2] if i >= 2 else 0
                recon[i] = (row[i] + _paeth(left, int(prev[i]), upleft)) % 256
        else:
            raise FormatError(f"unsupported PNG filter type {ftype}")
        out[r] = recon.astype(np.uint8)
        prev = recon
    pairs = out.reshape(height, width, 2).astype(np.uint16)
    return (pairs[..., 0] << 8) | pairs[..., 1]


def decode_gray16(data: bytes) -> np.ndarray:
    """Parse PNG bytes into a (h, w) uint16 array."""
    if not data.startswith(SIGNATURE):
        raise FormatError("not a PNG file (bad signature)")
    pos = len(SIGNATURE)
    header = None
    idat = bytearray()
    seen_end = False
    while pos < len(data):
        if pos + 8 > len(data):
            raise FormatError("truncated PNG chunk header")
        (length,) = struct.unpack_from(">I", data, pos)
        tag = data[pos + 4:pos + 8]
        payload = data[pos + 8:pos + 8 + length]
        if len(payload) != length or pos + 12 + length > len(data):
            raise FormatError("truncated PNG chunk payload")
        (crc,) = struct.unpack_from(">I", data, pos + 8 + length)
        if crc != (zlib.crc32(tag + payload) & 0xFFFFFFFF):
            raise FormatError(f"CRC mismatch in {tag!r} chunk")
        pos += 12 + length
        if tag == b"IHDR":
            if header is not None:
                raise FormatError("duplicate IHDR chunk")
            header = struct.unpack(">IIBBBBB", payload)
        elif tag == b"IDAT":
            idat.extend(payload)
        elif tag == b"IEND":
            seen_end = True
            break
    if header is None:
        raise FormatError("missing IHDR chunk")
    if not idat:
        raise FormatError("missing IDAT chunk")
    if not seen_end:
        raise FormatError("missing IEND chunk")
    width, height, depth, color, comp, filt, interlace = header
    if (depth, color) != (16, 0):
        raise FormatError(f"expected 16-bit grayscale PNG, got depth={depth} color={color}")
    if comp != 0 or filt != 0:
        raise FormatError("unsupported PNG compression or filter method")
    if interlace != 0:
        raise FormatError("interlaced PNG is not supported")
    try:
        raw = zlib.decompress(bytes(idat))
    except zlib.error as exc:
        raise FormatError(f"corrupt PNG pixel data: {exc}") from exc
    return _unfilter(raw, width, height)
