"""
TNSR binary format.

Layout: b"TNSR", u32 version (=1), u32 order, order x u64 dims, then the
entries as little-endian f64 with the first index fastest.
"""

import logging
import struct
from pathlib import Path

import numpy as np

from src.tensor_core.errors import TensorFormatError

logger = logging.getLogger(__name__)

MAGIC = b"TNSR"
VERSION = 1


def write_tnsr(path, tensor):
    tensor = np.asarray(tensor, dtype=float)
    path = Path(path)
    header = MAGIC + struct.pack("<II", VERSION, tensor.ndim)
    header += struct.pack(f"<{tensor.ndim}Q", *tensor.shape)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(tensor.astype("<f8").tobytes(order="F"))
    logger.debug("Wrote %s tensor to %s", tensor.shape, path)


def read_tnsr(path):
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[:4] != MAGIC:
        raise TensorFormatError(f"{path}: missing TNSR magic bytes.")
    version, order = struct.unpack_from("<II", raw, 4)
    if version != VERSION:
        raise TensorFormatError(f"{path}: unsupported TNSR version {version}.")
    if order < 1:
        raise TensorFormatError(f"{path}: tensor order must be positive.")

    offset = 12
    if len(raw) < offset + 8 * order:
        raise TensorFormatError(f"{path}: truncated dims header.")
    dims = struct.unpack_from(f"<{order}Q", raw, offset)
    offset += 8 * order

    n = int(np.prod(dims))
    if len(raw) - offset != 8 * n:
        raise TensorFormatError(
            f"{path}: expected {n} values for dims {tuple(dims)}, found {(len(raw) - offset) / 8:g}."
        )
    data = np.frombuffer(raw, dtype="<f8", count=n, offset=offset)
    tensor = data.reshape(dims, order="F").astype(float)
    if not np.all(np.isfinite(tensor)):
        raise TensorFormatError(f"{path}: tensor contains non-finite values.")
    return tensor
