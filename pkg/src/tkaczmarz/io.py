"""Binary tensor files and CSV error traces.

Tensor file layout (all little-endian)::

    offset  size  field
    0       4     magic b"TT3\\0"
    4       2     u16 version (= 1)
    6       12    u32 n1, n2, n3
    18      8*N   float64 payload, N = n1*n2*n3, frontal-slice-major
                  (row index fastest, then column, then slice)
"""
import csv
import io as _io
import struct

import numpy as np

MAGIC = b"TT3\x00"
VERSION = 1
_HEADER = struct.Struct("<4sH3I")


class TensorFileError(ValueError):
    """Malformed tensor file: bad magic, unknown version, or wrong length."""


def encode_tensor(a):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={a.ndim}")
    header = _HEADER.pack(MAGIC, VERSION, *a.shape)
    return header + np.asarray(a.ravel(order="F"), dtype="<f8").tobytes()


def decode_tensor(data):
    if len(data) < _HEADER.size:
        raise TensorFileError("truncated header")
    magic, version, n1, n2, n3 = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise TensorFileError(f"bad magic {magic!r}")
    if version != VERSION:
        raise TensorFileError(f"unsupported version {version}")
    if min(n1, n2, n3) < 1:
        raise TensorFileError(f"invalid extents {(n1, n2, n3)}")
    count = n1 * n2 * n3
    payload = data[_HEADER.size :]
    if len(payload) != 8 * count:
        raise TensorFileError(f"payload has {len(payload)} bytes, expected {8 * count}")
    flat = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    return np.ascontiguousarray(flat.reshape((n1, n2, n3), order="F"))


def write_tensor(path, a):
    with open(path, "wb") as fh:
        fh.write(encode_tensor(a))


def read_tensor(path):
    with open(path, "rb") as fh:
        return decode_tensor(fh.read())


def format_trace_csv(iters, columns):
    """Render ``iter,<name>...`` rows; floats use 17 significant digits.

    ``columns`` maps a column name to a sequence aligned with ``iters``.
    """
    iters = [int(k) for k in iters]
    if any(b <= a for a, b in zip(iters, iters[1:])):
        raise ValueError("trace iterations must be strictly increasing")
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    names = list(columns)
    writer.writerow(["iter", *names])
    for row, k in enumerate(iters):
        writer.writerow([k, *(format(float(columns[n][row]), ".17g") for n in names)])
    return buf.getvalue()


def write_trace_csv(path, iters, columns):
    text = format_trace_csv(iters, columns)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return text


def read_trace_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    iters = np.array([int(r[0]) for r in body])
    cols = {name: np.array([float(r[c]) for r in body]) for c, name in enumerate(header[1:], 1)}
    return iters, cols
