"""Binary PGM (P5) image I/O plus the JSON metadata sidecar for captures.

16-bit images use maxval 65535 with big-endian sample order; 8-bit images
use maxval 255. The sidecar lives next to the image with a .json suffix and
records the grid geometry and the noise model used for the capture.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .bench import CCDImage, NoiseModel
from .modes import GridSpec


def _atomic_write_bytes(path: Path, payload: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(payload)
    os.replace(tmp, path)


def write_pgm(path, counts: np.ndarray, maxval: int) -> None:
    """Write integer counts as binary PGM; maxval picks 8- vs 16-bit samples."""
    if maxval not in (255, 65535):
        raise ValueError(f"maxval must be 255 or 65535, got {maxval}")
    if counts.ndim != 2:
        raise ValueError(f"PGM data must be 2-D, got shape {counts.shape}")
    if counts.min() < 0 or counts.max() > maxval:
        raise ValueError("counts outside [0, maxval]")
    h, w = counts.shape
    header = f"P5\n{w} {h}\n{maxval}\n".encode("ascii")
    dtype = ">u2" if maxval > 255 else "u1"
    _atomic_write_bytes(Path(path), header + counts.astype(dtype).tobytes())


def read_pgm(path):
    """Read a binary PGM; returns (counts int ndarray, maxval)."""
    data = Path(path).read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        if pos >= len(data):
            raise ValueError(f"{path}: truncated PGM header")
        ch = data[pos : pos + 1]
        if ch == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            start = pos
            while pos < len(data) and not data[pos : pos + 1].isspace():
                pos += 1
            tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {tokens[0]!r})")
    w, h, maxval = (int(t) for t in tokens[1:])
    pos += 1  # single whitespace byte after maxval
    dtype = ">u2" if maxval > 255 else "u1"
    n_bytes = w * h * (2 if maxval > 255 else 1)
    raw = data[pos : pos + n_bytes]
    if len(raw) != n_bytes:
        raise ValueError(f"{path}: expected {n_bytes} sample bytes, got {len(raw)}")
    counts = np.frombuffer(raw, dtype=dtype).reshape(h, w)
    return counts.astype(np.int64), maxval


def sidecar_path(image_path) -> Path:
    return Path(image_path).with_suffix(".json")


def write_ccd_image(path, img: CCDImage) -> Path:
    """Write a capture as PGM plus its JSON sidecar; returns the sidecar path."""
    path = Path(path)
    write_pgm(path, img.counts, img.noise.full_scale)
    meta = {
        "n": img.grid.n,
        "half_extent": img.grid.half_extent,
        "waist": img.grid.waist,
        "noise": asdict(img.noise),
        "exposure_id": img.exposure_id,
        "saturation_fraction": img.saturation_fraction,
    }
    side = sidecar_path(path)
    _atomic_write_bytes(side, (json.dumps(meta, sort_keys=True, indent=2) + "\n").encode("ascii"))
    return side


def read_ccd_image(path) -> CCDImage:
    """Read a PGM and its sidecar back into a CCDImage."""
    counts, maxval = read_pgm(path)
    meta = json.loads(sidecar_path(path).read_text())
    grid = GridSpec(n=meta["n"], half_extent=meta["half_extent"], waist=meta["waist"])
    noise = NoiseModel(**meta["noise"])
    if noise.full_scale != maxval:
        raise ValueError(f"{path}: sidecar bit depth disagrees with PGM maxval {maxval}")
    return CCDImage(
        counts.astype(np.uint16),
        grid,
        noise,
        int(meta["exposure_id"]),
        float(meta["saturation_fraction"]),
    )
