"""Readers and writers for the on-disk raster and annotation formats.

GrayImage and BinaryMask serialize as binary PGM (P5, maxval 255; masks use
0/255). ProbMap serializes as single-channel PFM ("Pf", scale -1.0 meaning
little-endian 32-bit floats, rows stored bottom-up as is conventional).
Polyline annotations serialize as JSON lines, one object per polyline:
{"image_id": str, "class": str, "points": [[x, y], ...]}.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import FormatError
from .raster import BinaryMask, CvcClass, GrayImage, PolylineAnnotation, ProbMap


def write_pgm(path, image) -> None:
    """Write a GrayImage (rounded to 8 bit) or BinaryMask (0/255) as P5 PGM."""
    if isinstance(image, GrayImage):
        payload = np.rint(image.data * 255.0).astype(np.uint8)
    elif isinstance(image, BinaryMask):
        payload = np.where(image.data, 255, 0).astype(np.uint8)
    else:
        raise TypeError(f"write_pgm expects GrayImage or BinaryMask, got {type(image).__name__}")
    h, w = payload.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(payload.tobytes())


def _read_pgm_tokens(f, n: int) -> list[bytes]:
    # Header tokens separated by whitespace, '#' comments run to end of line.
    tokens = []
    while len(tokens) < n:
        c = f.read(1)
        if not c:
            raise FormatError("unexpected end of PGM header")
        if c.isspace():
            continue
        if c == b"#":
            while c and c != b"\n":
                c = f.read(1)
            continue
        tok = c
        while True:
            c = f.read(1)
            if not c or c.isspace():
                break
            tok += c
        tokens.append(tok)
    return tokens


def _read_pgm_array(path) -> np.ndarray:
    with open(path, "rb") as f:
        magic, w_tok, h_tok, maxval_tok = _read_pgm_tokens(f, 4)
        if magic != b"P5":
            raise FormatError(f"{path}: not a binary PGM (magic {magic!r})")
        try:
            w, h, maxval = int(w_tok), int(h_tok), int(maxval_tok)
        except ValueError as exc:
            raise FormatError(f"{path}: malformed PGM header") from exc
        if w < 1 or h < 1 or not (0 < maxval < 256):
            raise FormatError(f"{path}: unsupported PGM geometry {w}x{h} maxval {maxval}")
        raw = f.read(w * h)
        if len(raw) != w * h:
            raise FormatError(f"{path}: truncated PGM payload")
    data = np.frombuffer(raw, dtype=np.uint8).reshape(h, w)
    return data.astype(np.float64) / float(maxval)


def read_pgm_image(path) -> GrayImage:
    return GrayImage(_read_pgm_array(path))


def read_pgm_mask(path) -> BinaryMask:
    return BinaryMask(_read_pgm_array(path) > 0.5)


def write_pfm(path, pmap: ProbMap) -> None:
    data = pmap.data.astype("<f4")
    h, w = data.shape
    with open(path, "wb") as f:
        f.write(f"Pf\n{w} {h}\n-1.0\n".encode("ascii"))
        f.write(np.flipud(data).tobytes())


def read_pfm(path) -> ProbMap:
    with open(path, "rb") as f:
        magic = f.readline().strip()
        if magic != b"Pf":
            raise FormatError(f"{path}: not a single-channel PFM (magic {magic!r})")
        dims = f.readline().split()
        try:
            w, h = int(dims[0]), int(dims[1])
            scale = float(f.readline().strip())
        except (IndexError, ValueError) as exc:
            raise FormatError(f"{path}: malformed PFM header") from exc
        if w < 1 or h < 1:
            raise FormatError(f"{path}: bad PFM dimensions {w}x{h}")
        raw = f.read(4 * w * h)
        if len(raw) != 4 * w * h:
            raise FormatError(f"{path}: truncated PFM payload")
    dtype = "<f4" if scale < 0 else ">f4"
    data = np.flipud(np.frombuffer(raw, dtype=dtype).reshape(h, w))
    return ProbMap(data.astype(np.float64))


def annotation_to_json(ann: PolylineAnnotation) -> str:
    obj = {
        "image_id": ann.image_id,
        "class": ann.cvc_class.value,
        "points": [[float(x), float(y)] for x, y in ann.points],
    }
    return json.dumps(obj, separators=(",", ":"), sort_keys=True)


def annotation_from_json(line: str) -> PolylineAnnotation:
    try:
        obj = json.loads(line)
        return PolylineAnnotation(
            points=np.asarray(obj["points"], dtype=np.float64),
            cvc_class=CvcClass(obj["class"]),
            image_id=str(obj["image_id"]),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"bad annotation line: {exc}") from exc


def write_annotations_jsonl(path, annotations) -> None:
    with open(path, "w", encoding="ascii") as f:
        for ann in annotations:
            f.write(annotation_to_json(ann))
            f.write("\n")


def read_annotations_jsonl(path) -> list[PolylineAnnotation]:
    out = []
    for line in Path(path).read_text(encoding="ascii").splitlines():
        if line.strip():
            out.append(annotation_from_json(line))
    return out
