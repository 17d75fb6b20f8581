"""Score and label file formats, binary and CSV.

Binary score files: magic ``LSG1``, three little-endian u32 (|V|, H, W),
then |V|*H*W little-endian float32 values in node-major, row-major pixel
order (canonical node ordering).  Binary label files: magic ``LSL1``, two
u32 (H, W), then H*W little-endian u32 leaf ids.  Both are trivially
parseable from any language and round-trip bit-exactly.

CSV mode is for tiny hand-written vectors: scores are |V| comma-separated
rows of K values; labels are one leaf id per line.  CSV files carry no grid
shape, so they read back as a 1 x K grid.
"""

from __future__ import annotations

import numpy as np

SCORE_MAGIC = b"LSG1"
LABEL_MAGIC = b"LSL1"

FORMATS = ("binary", "csv")


class FormatError(ValueError):
    """Raised when a score/label file is malformed."""


def write_scores(path, values, height: int, width: int) -> None:
    """Write a score tensor [|V|, H*W]; values are stored as float32."""
    arr = np.ascontiguousarray(values, dtype=np.float32)
    if arr.ndim != 2 or arr.shape[1] != height * width:
        raise FormatError(
            f"score shape {arr.shape} does not match grid {height}x{width}"
        )
    header = np.array([arr.shape[0], height, width], dtype="<u4")
    with open(path, "wb") as fh:
        fh.write(SCORE_MAGIC)
        fh.write(header.tobytes())
        fh.write(arr.astype("<f4").tobytes())


def read_scores(path) -> tuple[np.ndarray, int, int]:
    """Read a binary score file; returns (float32 [|V|, H*W], H, W)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != SCORE_MAGIC:
            raise FormatError(f"bad score file magic {magic!r}")
        header = np.frombuffer(fh.read(12), dtype="<u4")
        if header.size != 3:
            raise FormatError("truncated score header")
        size, height, width = (int(x) for x in header)
        payload = fh.read()
    if len(payload) != 4 * size * height * width:
        raise FormatError(
            f"score payload holds {len(payload)} bytes, "
            f"expected {4 * size * height * width}"
        )
    data = np.frombuffer(payload, dtype="<f4")
    return data.reshape(size, height * width).copy(), height, width


def write_labels(path, leaf_ids, height: int, width: int) -> None:
    """Write per-pixel leaf ids for an H x W grid."""
    ids = np.ascontiguousarray(leaf_ids, dtype="<u4").ravel()
    if ids.size != height * width:
        raise FormatError(f"{ids.size} labels do not match grid {height}x{width}")
    header = np.array([height, width], dtype="<u4")
    with open(path, "wb") as fh:
        fh.write(LABEL_MAGIC)
        fh.write(header.tobytes())
        fh.write(ids.tobytes())


def read_labels(path) -> tuple[np.ndarray, int, int]:
    """Read a binary label file; returns (u32 ids [H*W], H, W)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != LABEL_MAGIC:
            raise FormatError(f"bad label file magic {magic!r}")
        header = np.frombuffer(fh.read(8), dtype="<u4")
        if header.size != 2:
            raise FormatError("truncated label header")
        height, width = (int(x) for x in header)
        payload = fh.read()
    if len(payload) != 4 * height * width:
        raise FormatError(
            f"label payload holds {len(payload)} bytes, expected {4 * height * width}"
        )
    data = np.frombuffer(payload, dtype="<u4")
    return data.copy(), height, width


def write_scores_csv(path, values) -> None:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise FormatError(f"scores must be 2-D, got shape {arr.shape}")
    np.savetxt(path, arr, delimiter=",", fmt="%.17g")


def read_scores_csv(path) -> tuple[np.ndarray, int, int]:
    try:
        arr = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise FormatError(f"unparseable score CSV: {exc}") from exc
    return arr, 1, arr.shape[1]


def write_labels_csv(path, leaf_ids) -> None:
    ids = np.asarray(leaf_ids, dtype=np.int64).ravel()
    np.savetxt(path, ids[:, None], fmt="%d")


def read_labels_csv(path) -> tuple[np.ndarray, int, int]:
    try:
        ids = np.loadtxt(path, dtype=np.int64, ndmin=1).ravel()
    except ValueError as exc:
        raise FormatError(f"unparseable label CSV: {exc}") from exc
    if ids.size and ids.min() < 0:
        raise FormatError("negative leaf id in label CSV")
    return ids, 1, ids.size


def load_scores(path, fmt: str = "binary"):
    if fmt == "binary":
        return read_scores(path)
    if fmt == "csv":
        return read_scores_csv(path)
    raise FormatError(f"unknown format {fmt!r}")


def load_labels(path, fmt: str = "binary"):
    if fmt == "binary":
        return read_labels(path)
    if fmt == "csv":
        return read_labels_csv(path)
    raise FormatError(f"unknown format {fmt!r}")


def save_scores(path, values, height: int, width: int, fmt: str = "binary"):
    if fmt == "binary":
        write_scores(path, values, height, width)
    elif fmt == "csv":
        write_scores_csv(path, values)
    else:
        raise FormatError(f"unknown format {fmt!r}")


def save_labels(path, leaf_ids, height: int, width: int, fmt: str = "binary"):
    if fmt == "binary":
        write_labels(path, leaf_ids, height, width)
    elif fmt == "csv":
        write_labels_csv(path, leaf_ids)
    else:
        raise FormatError(f"unknown format {fmt!r}")
