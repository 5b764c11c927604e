"""On-disk formats: matrix CSV, JSON documents and PPM heatmaps.

Matrices are written one row per line, comma separated, each value printed
with ``repr`` so a read/write round trip is exact. Heatmaps are binary PPM
(``P6``) images: a square block of ``cell`` pixels per matrix entry, red for
positive, blue for negative, white for zero, with saturation proportional to
``|b| / max |b|``.
"""
import csv
import json
from pathlib import Path

import numpy as np

from .exceptions import ParameterError, ParseError


def write_matrix_csv(path, A):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for row in A:
            fh.write(",".join(repr(float(x)) for x in row))
            fh.write("\n")


def read_matrix_csv(path, square=False):
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec:
                continue
            try:
                rows.append([float(x) for x in rec])
            except ValueError:
                raise ParseError("non-numeric cell", line=lineno) from None
            if len(rows[-1]) != len(rows[0]):
                raise ParseError("ragged matrix row", line=lineno)
    if not rows:
        raise ParseError("empty matrix file")
    A = np.array(rows)
    if square and A.shape[0] != A.shape[1]:
        raise ParameterError(f"matrix must be square, got {A.shape}")
    return A


def write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def heatmap_image(B, cell=12):
    """RGB ``uint8`` image of ``B`` on a symmetric diverging scale."""
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ParameterError(f"heatmap needs a square matrix, got shape {B.shape}")
    vmax = np.max(np.abs(B)) if B.size else 0.0
    s = np.abs(B) / vmax if vmax > 0 else np.zeros_like(B)
    fade = np.rint(255.0 * (1.0 - s)).astype(np.uint8)
    full = np.full(B.shape, 255, dtype=np.uint8)
    pos = B > 0
    r = np.where(pos, full, fade)
    g = fade
    b = np.where(pos, fade, full)
    rgb = np.stack([r, g, b], axis=-1)
    rgb[B == 0] = 255
    return np.repeat(np.repeat(rgb, cell, axis=0), cell, axis=1)


def write_ppm(path, image):
    image = np.asarray(image, dtype=np.uint8)
    h, w, _ = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(image.tobytes())


def read_ppm(path):
    data = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P6":
        raise ParseError("not a binary PPM file")
    w, h, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise ParseError("only 8-bit PPM is supported")
    # exactly one whitespace byte separates the header from the pixels
    pixels = np.frombuffer(data[pos + 1: pos + 1 + w * h * 3], dtype=np.uint8)
    return pixels.reshape(h, w, 3)
