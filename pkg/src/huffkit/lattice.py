"""Dense exact-integer / real tensors and the aperiodic correlation engine.

Everything downstream (constructions, metrics, projections, imaging) is built
on top of the two dtype modes defined here:

* ``"int"``   — exact signed integers.  Stored as int64 whenever the worst-case
  correlation accumulator provably fits, otherwise as an object array of
  Python ints, so overflow is impossible rather than unlikely.
* ``"real"``  — float64.

Correlation convention: ``correlate(a, b)`` computes

    C(s) = sum_r a(r) * b(r + s)

over every shift with any overlap ("full" output, extent ``Na + Nb - 1`` per
axis), and the zero shift sits at flat index ``Na - 1`` along each axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as _iproduct
from typing import Iterable, Sequence

import numpy as np
from scipy import signal as _signal

__all__ = [
    "Tensor",
    "CorrelationResult",
    "as_tensor",
    "correlate",
    "convolve",
    "flip",
    "outer_product",
    "dft_magnitudes",
    "read_text",
    "write_text",
    "read_pgm",
    "write_pgm",
]

_INT64_MAX = 2**63 - 1

# Real-mode correlations switch to the FFT backend once both operands are at
# least this large per side; below that the direct engine is faster and exact.
_FFT_MIN_SIDE = 64


class LatticeError(ValueError):
    """Domain error raised for malformed tensors or incompatible operands."""


def _is_int_array(arr: np.ndarray) -> bool:
    return arr.dtype.kind in "iu" or (
        arr.dtype == object and all(isinstance(v, (int, np.integer)) for v in arr.flat)
    )


@dataclass(frozen=True)
class Tensor:
    """A dense n-dimensional array tagged with a value mode.

    The mode never changes silently: integer tensors stay exact through every
    operation, and conversion to real is the explicit :meth:`to_real`.
    """

    data: np.ndarray
    mode: str  # "int" | "real"

    def __post_init__(self):
        if self.mode not in ("int", "real"):
            raise LatticeError(f"unknown tensor mode {self.mode!r}")
        if self.data.size == 0:
            raise LatticeError("empty tensor")
        if any(n < 1 for n in self.data.shape):
            raise LatticeError("tensor extents must be >= 1")

    # -- construction ------------------------------------------------------

    @staticmethod
    def from_values(values, mode: str | None = None) -> "Tensor":
        arr = np.asarray(values)
        if mode is None:
            mode = "int" if _is_int_array(arr) else "real"
        if mode == "int":
            if arr.dtype != object:
                arr = arr.astype(np.int64)
        else:
            arr = arr.astype(np.float64)
        return Tensor(arr, mode)

    # -- views -------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def to_real(self) -> "Tensor":
        return Tensor(self.data.astype(np.float64), "real")

    def max_abs(self):
        if self.data.dtype == object:
            return max(abs(int(v)) for v in self.data.flat)
        if self.mode == "int":
            return int(np.abs(self.data).max())
        return float(np.abs(self.data).max())

    def tolist(self):
        return self.data.tolist()

    def __array__(self, dtype=None):
        return np.asarray(self.data, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        return (
            self.mode == other.mode
            and self.shape == other.shape
            and bool(np.array_equal(self.data, other.data))
        )

    def __hash__(self):  # frozen dataclass wants it; identity is fine here
        return id(self)


def as_tensor(x, mode: str | None = None) -> Tensor:
    if isinstance(x, Tensor):
        return x if mode is None or x.mode == mode else Tensor.from_values(x.data, mode)
    return Tensor.from_values(x, mode)


@dataclass(frozen=True)
class CorrelationResult:
    """Full aperiodic correlation plus the headline scalar views of it.

    ``peak`` is the zero-shift value C0; ``edge`` the end/corner correlation
    (product of opposite extreme elements — only defined when the operand
    extents match); ``off_peak_max`` the largest off-peak magnitude; ``op``
    the largest magnitude that is also not one of the edge-correlation
    entries (the ends in 1D, plus the maximal-overlap diagonal tips
    (+/-m, ..., +/-m), m = (N-1)/2, when every extent is odd).
    """

    values: Tensor
    peak: object
    edge: object | None
    off_peak_max: object
    op: object
    zero_index: tuple[int, ...]


# ---------------------------------------------------------------------------
# correlation / convolution engine


def _bound_product(a: Tensor, b: Tensor) -> int:
    """Worst-case |accumulator| for a correlation, in exact Python ints."""
    overlap = min(a.size, b.size)
    return overlap * int(a.max_abs()) * int(b.max_abs())


def _direct_object_correlate(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Naive shift-and-sum on Python ints.  Slow, exact, any magnitude."""
    out_shape = tuple(na + nb - 1 for na, nb in zip(a.shape, b.shape))
    out = np.zeros(out_shape, dtype=object)
    a_obj = a.astype(object)
    for idx in _iproduct(*(range(n) for n in b.shape)):
        v = b[idx]
        if v == 0:
            continue
        dest = tuple(
            slice(nb - 1 - i, nb - 1 - i + na)
            for i, na, nb in zip(idx, a.shape, b.shape)
        )
        out[dest] += int(v) * a_obj
    return out


def _raw_correlate(a: Tensor, b: Tensor) -> Tensor:
    """C(s) = sum_r a(r) b(r+s), full extent, mode-preserving."""
    if a.ndim != b.ndim:
        raise LatticeError(
            f"dimensionality mismatch: {a.ndim}D vs {b.ndim}D"
        )
    if a.mode == "int" and b.mode == "int":
        if _bound_product(a, b) <= _INT64_MAX and a.data.dtype != object and b.data.dtype != object:
            out = _signal.correlate(
                b.data.astype(np.int64), a.data.astype(np.int64), mode="full", method="direct"
            )
            return Tensor(out, "int")
        # exact big-integer path; the scatter helper correlates its second
        # argument against its first, zero shift at Na - 1
        return Tensor(_direct_object_correlate(b.data, a.data), "int")
    ar, br = a.to_real(), b.to_real()
    method = (
        "fft"
        if min(ar.shape) >= _FFT_MIN_SIDE and min(br.shape) >= _FFT_MIN_SIDE
        else "direct"
    )
    out = _signal.correlate(br.data, ar.data, mode="full", method=method)
    return Tensor(out, "real")


def _edge_shift_indices(shape: tuple[int, ...]) -> list[tuple[int, ...]]:
    """Indices of the edge-correlation entries in a full auto-correlation.

    Ends/corners (every axis at an extreme) always count; when every input
    extent is odd, the diagonal maximal-overlap tips at shifts
    (+/-m_1, ..., +/-m_n), m_i = (N_i - 1)/2, count as well.
    """
    full = tuple(2 * n - 1 for n in shape)
    out = []
    for signs in _iproduct(*[(0, 1)] * len(shape)):
        out.append(tuple(0 if s == 0 else f - 1 for s, f in zip(signs, full)))
    if all(n % 2 == 1 for n in shape) and all(n >= 3 for n in shape):
        centre = tuple(n - 1 for n in shape)
        m = tuple((n - 1) // 2 for n in shape)
        for signs in _iproduct(*[(-1, 1)] * len(shape)):
            out.append(tuple(c + s * mi for c, s, mi in zip(centre, signs, m)))
    return sorted(set(out))


def correlate(a, b) -> CorrelationResult:
    """Full aperiodic cross-correlation of two same-dimensionality tensors.

    Integer inputs give exact integer output.  ``peak`` is read at the zero
    shift (index ``Na-1`` per axis); the edge/op fields follow the module
    docstring conventions.
    """
    a, b = as_tensor(a), as_tensor(b)
    values = _raw_correlate(a, b)
    zero = tuple(n - 1 for n in a.shape)
    peak = values.data[zero]
    same_extent = a.shape == b.shape
    arr = values.data

    edge = arr[tuple(n - 1 for n in values.shape)] if same_extent else None

    mask = np.ones(values.shape, dtype=bool)
    mask[zero] = False
    opmask = mask.copy()
    if same_extent:
        for idx in _edge_shift_indices(a.shape):
            opmask[idx] = False

    if arr.dtype == object:
        def _max_abs(m):
            vals = [abs(int(v)) for v in arr[m]]
            return max(vals) if vals else 0
        off_peak_max = _max_abs(mask)
        op = _max_abs(opmask) if same_extent else off_peak_max
    else:
        mags = np.abs(arr)
        off_peak_max = mags[mask].max() if mask.any() else type(peak)(0)
        op = (mags[opmask].max() if opmask.any() else 0) if same_extent else off_peak_max

    if values.mode == "int":
        peak = int(peak)
        edge = None if edge is None else int(edge)
        off_peak_max = int(off_peak_max)
        op = int(op)
    else:
        peak = float(peak)
        edge = None if edge is None else float(edge)
        off_peak_max = float(off_peak_max)
        op = float(op)
    return CorrelationResult(values, peak, edge, off_peak_max, op, zero)


def convolve(a, b) -> Tensor:
    """Full aperiodic convolution; equals ``correlate(flip(a), b).values``."""
    a, b = as_tensor(a), as_tensor(b)
    return _raw_correlate(flip(a), b)


def flip(a) -> Tensor:
    """Coordinate inversion a(-r); an involution."""
    a = as_tensor(a)
    rev = a.data[tuple(slice(None, None, -1) for _ in range(a.ndim))]
    return Tensor(np.ascontiguousarray(rev), a.mode)


def outer_product(factors: Sequence) -> Tensor:
    """Outer product of 1D factors; correlation factorizes over the result."""
    factors = [as_tensor(f) for f in factors]
    if not factors:
        raise LatticeError("empty factor list")
    for f in factors:
        if f.ndim != 1:
            raise LatticeError("outer_product factors must be 1D")
    mode = "int" if all(f.mode == "int" for f in factors) else "real"
    out = factors[0].data
    for f in factors[1:]:
        out = np.multiply.outer(out, f.data)
    return Tensor.from_values(out, mode)


def dft_magnitudes(a, oversample: int = 1) -> Tensor:
    """|DFT| at the array's native size (one bin per element per dimension).

    ``oversample`` > 1 zero-pads each axis by that factor, giving a finer
    sampling of the underlying transform; the default matches the native-size
    convention used everywhere metrics are defined.
    """
    a = as_tensor(a)
    shape = tuple(int(n * oversample) for n in a.shape)
    mags = np.abs(np.fft.fftn(a.data.astype(np.float64), s=shape, axes=range(a.ndim)))
    return Tensor(mags, "real")


# ---------------------------------------------------------------------------
# text / PGM serialization


def write_text(t: Tensor, path) -> None:
    """First line: extents.  Following lines: row-major values."""
    t = as_tensor(t)
    with open(path, "w") as fh:
        fh.write(" ".join(str(n) for n in t.shape) + "\n")
        flat = t.data.reshape(-1)
        if t.mode == "int":
            vals = [str(int(v)) for v in flat]
        else:
            vals = [repr(float(v)) for v in flat]
        # one logical row per line for 2D, single line otherwise
        if t.ndim == 2:
            ncol = t.shape[1]
            for r in range(t.shape[0]):
                fh.write(" ".join(vals[r * ncol : (r + 1) * ncol]) + "\n")
        else:
            fh.write(" ".join(vals) + "\n")


def read_text(path) -> Tensor:
    with open(path) as fh:
        header = fh.readline().split()
        shape = tuple(int(x) for x in header)
        body = fh.read().split()
    if any("." in v or "e" in v or "E" in v or v in ("inf", "-inf", "nan") for v in body):
        arr = np.array([float(v) for v in body], dtype=np.float64)
        mode = "real"
    else:
        ints = [int(v) for v in body]
        if max((abs(v) for v in ints), default=0) <= _INT64_MAX:
            arr = np.array(ints, dtype=np.int64)
        else:
            arr = np.array(ints, dtype=object)
        mode = "int"
    if len(body) != math.prod(shape):
        raise LatticeError(f"{path}: expected {math.prod(shape)} values, got {len(body)}")
    return Tensor(arr.reshape(shape), mode)


def write_pgm(t: Tensor, path, maxval: int = 255) -> None:
    """Write a 2D tensor as binary PGM (8-bit for maxval<=255 else 16-bit)."""
    t = as_tensor(t)
    if t.ndim != 2:
        raise LatticeError("PGM output requires a 2D tensor")
    if maxval not in (255, 65535):
        raise LatticeError("maxval must be 255 or 65535")
    arr = t.data.astype(np.float64)
    lo, hi = arr.min(), arr.max()
    if t.mode == "int" and lo >= 0 and hi <= maxval:
        scaled = t.data.astype(np.uint16 if maxval > 255 else np.uint8)
    else:
        span = (hi - lo) or 1.0
        scaled = np.round((arr - lo) / span * maxval)
        scaled = scaled.astype(np.uint16 if maxval > 255 else np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n%d\n" % (t.shape[1], t.shape[0], maxval))
        if maxval > 255:
            fh.write(scaled.astype(">u2").tobytes())
        else:
            fh.write(scaled.tobytes())


def read_pgm(path) -> Tensor:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise LatticeError(f"{path}: not a binary PGM file")
    # header = magic, width, height, maxval — comments allowed
    fields: list[bytes] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    width, height, maxval = (int(f) for f in fields)
    dtype = ">u2" if maxval > 255 else np.uint8
    arr = np.frombuffer(data, dtype=dtype, count=width * height, offset=pos)
    return Tensor(arr.reshape(height, width).astype(np.int64), "int")
