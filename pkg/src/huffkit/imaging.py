"""Diffuse-mask imaging experiments: encode/decode, iterative deblurring,
two-shot pedestal acquisition, ghost imaging, watermarking, and the random /
multiplex baselines.

Conventions shared by every operation here:

* encode scans the mask across the object: B(s) = sum_r O(r) H(r - s), the
  full cross-correlation at extent No + Nm - 1 per axis (an impulse object
  therefore yields a flipped, shifted copy of the mask, and a 1x1 delta mask
  is the identity);
* decode convolves the blurred image with the same mask — equivalently,
  correlates with the coordinate-inverted mask — so the two steps telescope
  through the mask auto-correlation and the estimate comes out unflipped;
  the result is cropped to the fully-overlapped ("valid") region, which is
  exactly the object extent;
* the de-blur recursion subtracts alias copies using the *off-peak* part of
  the mask auto-correlation: o <- o1 - convolve(o, A_off)/C0, run at full
  size and centrally cropped at the end;
* all Monte-Carlo helpers derive one RNG per trial from (seed, trial index)
  through a 64-bit mix, so results never depend on execution order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import signal as _signal

from .lattice import LatticeError, Tensor, as_tensor, convolve, correlate
from .metrics import merit_factor, side_lobe_ratio

__all__ = [
    "ImagingError",
    "ImagingRun",
    "valid_region",
    "central_crop",
    "encode",
    "decode",
    "DeblurResult",
    "deblur",
    "pedestal_pair",
    "GhostResult",
    "ghost_image",
    "watermark_embed",
    "WatermarkMatch",
    "watermark_locate",
    "BaselineStats",
    "random_baseline",
    "NoiseStudy",
    "multiplex_noise_study",
    "trial_rng",
]


class ImagingError(ValueError):
    """Domain error for imaging experiments."""


# ---------------------------------------------------------------------------
# seeding


def _mix64(seed: int, index: int) -> int:
    """splitmix64 step on seed+index; the per-trial seeding rule."""
    mask = (1 << 64) - 1
    z = (int(seed) + int(index) * 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return z ^ (z >> 31)


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for one Monte-Carlo trial."""
    return np.random.default_rng(_mix64(seed, index))


# ---------------------------------------------------------------------------
# encode / decode


def valid_region(outer_shape: Sequence[int], inner_shape: Sequence[int]) -> tuple[slice, ...]:
    """Fully-overlapped slice of correlate(outer, inner): length No - Ni + 1.

    For a blurred image correlated back with its mask this is exactly the
    original object extent.
    """
    if len(outer_shape) != len(inner_shape):
        raise ImagingError("dimensionality mismatch")
    if any(o < i for o, i in zip(outer_shape, inner_shape)):
        raise ImagingError(
            f"no fully-overlapped region for extents {tuple(outer_shape)} vs "
            f"{tuple(inner_shape)}"
        )
    return tuple(slice(i - 1, o) for o, i in zip(outer_shape, inner_shape))


def central_crop(t, shape: Sequence[int]) -> Tensor:
    """Centre-aligned crop to the requested extents."""
    t = as_tensor(t)
    if any((big - small) % 2 for big, small in zip(t.shape, shape)):
        raise ImagingError(f"cannot centre {shape} inside {t.shape}")
    sel = tuple(
        slice((big - small) // 2, (big - small) // 2 + small)
        for big, small in zip(t.shape, shape)
    )
    return Tensor(np.ascontiguousarray(t.data[sel]), t.mode)


def encode(obj, mask) -> Tensor:
    """Blur: scan the mask across the object, B(s) = sum_r O(r) H(r - s).

    Output extent is No + Nm - 1 per axis.  An impulse object gives back a
    flipped, shifted copy of the mask; a 1x1 delta mask leaves the object
    unchanged.
    """
    obj, mask = as_tensor(obj), as_tensor(mask)
    if obj.ndim != mask.ndim:
        raise ImagingError(f"dimensionality mismatch: {obj.ndim}D vs {mask.ndim}D")
    return correlate(mask, obj).values


def decode(blurred, mask) -> Tensor:
    """First-order estimate O1: convolve with the mask, crop to valid region.

    Convolving undoes the flip picked up in encode, so the composition is the
    object filtered by the mask *auto-correlation*.  Unnormalized — divide by
    the mask's C0 for grey values; O1/C0 then differs from the object by
    aliases bounded by the mask's 1/R.
    """
    blurred, mask = as_tensor(blurred), as_tensor(mask)
    if blurred.ndim != mask.ndim:
        raise ImagingError(f"dimensionality mismatch: {blurred.ndim}D vs {mask.ndim}D")
    full = convolve(blurred, mask)
    sel = valid_region(blurred.shape, mask.shape)
    return Tensor(np.ascontiguousarray(full.data[sel]), full.mode)


# ---------------------------------------------------------------------------
# iterative deblurring


@dataclass(frozen=True)
class DeblurResult:
    estimate: Tensor  # cropped to the object extent, normalized by C0
    iterations: int  # estimates computed (p); 1 means plain decode
    diverged: bool
    step_sizes: tuple[float, ...]  # max-abs change per recursion step


def deblur(blurred, mask, iterations: int = 2) -> DeblurResult:
    """Remove alias copies by the recursion o <- o1 - convolve(o, A_off)/C0.

    ``iterations`` = p counts estimates: p = 1 is plain normalized decode,
    p = 2 applies one de-blur step, and so on.  The recursion runs on the
    full-size back-correlation and the final estimate is centrally cropped to
    the object extent.  Stops early (``diverged`` set) if the step size grows
    three times in a row — a mask too far from delta-correlated.
    """
    if iterations < 1:
        raise ImagingError("iterations must be >= 1")
    blurred, mask = as_tensor(blurred), as_tensor(mask)
    if blurred.ndim != mask.ndim:
        raise ImagingError(f"dimensionality mismatch: {blurred.ndim}D vs {mask.ndim}D")
    if any(b < 2 * m - 1 for b, m in zip(blurred.shape, mask.shape)):
        raise ImagingError("blurred image smaller than encode(object, mask) output")

    auto = correlate(mask, mask)
    c0 = float(auto.peak)
    if c0 == 0.0:
        raise ImagingError("zero-energy mask")
    a_off = np.asarray(auto.values.data, dtype=np.float64).copy()
    a_off[auto.zero_index] = 0.0

    o1 = np.asarray(convolve(blurred, mask).data, dtype=np.float64) / c0
    obj_shape = tuple(b - m + 1 for b, m in zip(blurred.shape, mask.shape))

    o = o1
    steps: list[float] = []
    diverged = False
    growth = 0
    for _ in range(iterations - 1):
        nxt = o1 - _signal.convolve(o, a_off, mode="same", method="auto") / c0
        steps.append(float(np.abs(nxt - o).max()))
        o = nxt
        if len(steps) >= 2 and steps[-1] > steps[-2]:
            growth += 1
            if growth >= 3:
                diverged = True
                break
        else:
            growth = 0
    estimate = central_crop(Tensor(o, "real"), obj_shape)
    return DeblurResult(estimate, len(steps) + 1, diverged, tuple(steps))


# ---------------------------------------------------------------------------
# two-shot pedestal acquisition


def pedestal_pair(obj, mask, kappa) -> Tensor:
    """Difference of the two non-negative-mask exposures: I1 - I2 = 2 * O (x) H.

    Both H + kappa and -H + kappa must be physically non-negative, so kappa
    must reach max|H|.  Exact in integer mode for integer kappa.
    """
    obj, mask = as_tensor(obj), as_tensor(mask)
    if obj.ndim != mask.ndim:
        raise ImagingError(f"dimensionality mismatch: {obj.ndim}D vs {mask.ndim}D")
    need = float(mask.max_abs())
    if float(kappa) < need:
        raise ImagingError(
            f"pedestal kappa={kappa} leaves a mask exposure negative (needs >= {need})"
        )
    exact = obj.mode == "int" and mask.mode == "int" and float(kappa) == int(kappa)
    if exact:
        k = int(kappa)
        plus = Tensor(mask.data + k, "int")
        minus = Tensor(-mask.data + k, "int")
    else:
        k = float(kappa)
        plus = Tensor(mask.data.astype(np.float64) + k, "real")
        minus = Tensor(-mask.data.astype(np.float64) + k, "real")
    i1 = correlate(plus, obj).values
    i2 = correlate(minus, obj).values
    return Tensor(i1.data - i2.data, i1.mode)


# ---------------------------------------------------------------------------
# computational ghost imaging


@dataclass(frozen=True)
class GhostResult:
    bucket: Tensor
    reconstruction: Tensor  # normalized by the mask's C0
    kappa_prime: float
    kappa_prime_mode: str
    partial: bool


def _boundary_mean(arr: np.ndarray) -> float:
    mask = np.zeros(arr.shape, dtype=bool)
    for axis in range(arr.ndim):
        sel = [slice(None)] * arr.ndim
        sel[axis] = 0
        mask[tuple(sel)] = True
        sel[axis] = -1
        mask[tuple(sel)] = True
    return float(np.asarray(arr, dtype=np.float64)[mask].mean())


def ghost_image(obj, mask, kappa, kappa_prime="exact", scan=None) -> GhostResult:
    """Bucket acquisition with the non-negative mask H + kappa, then
    convolution with the signed H and pedestal removal.

    The pedestal is a full-field backdrop: every scan position additionally
    collects kappa * sum(O), so the back-correlated pedestal is the constant
    kappa * sum(O) * sum(H) across the whole valid region.

    ``kappa_prime`` selects the constant subtracted after back-correlation:
    ``"exact"`` uses that analytic value (needs the object sum, i.e. known
    compact support), ``"boundary"`` averages the raw back-correlation on the
    border of the scanned region (the empirical rule), or pass a number
    directly.  ``scan`` optionally restricts the recorded bucket positions
    (slices into the full correlation extent); anything outside is lost and
    the result is flagged partial.
    """
    obj, mask = as_tensor(obj), as_tensor(mask)
    if obj.ndim != mask.ndim:
        raise ImagingError(f"dimensionality mismatch: {obj.ndim}D vs {mask.ndim}D")
    need = max(0.0, -float(np.asarray(mask.data, dtype=np.float64).min()))
    if float(kappa) < need:
        raise ImagingError(
            f"pedestal kappa={kappa} leaves the mask negative (needs >= {need})"
        )
    signed = correlate(mask, obj).values
    exact_int = (
        obj.mode == "int" and mask.mode == "int" and float(kappa) == int(kappa)
    )
    if exact_int:
        backdrop = int(kappa) * int(np.asarray(obj.data, dtype=object).sum())
        bucket = Tensor(signed.data + backdrop, "int")
    else:
        backdrop = float(kappa) * float(np.asarray(obj.data, dtype=np.float64).sum())
        bucket = Tensor(signed.data.astype(np.float64) + backdrop, "real")
    partial = False
    if scan is not None:
        kept = np.zeros(bucket.shape, dtype=bool)
        kept[tuple(scan)] = True
        partial = not kept.all()
        data = bucket.data.copy()
        data[~kept] = 0
        bucket = Tensor(data, bucket.mode)

    auto = correlate(mask, mask)
    c0 = float(auto.peak)
    raw_full = convolve(bucket, mask)
    sel = valid_region(bucket.shape, mask.shape)
    raw = np.asarray(raw_full.data[sel], dtype=np.float64)

    if isinstance(kappa_prime, str):
        if kappa_prime == "exact":
            ksum = float(kappa) * float(np.sum(np.asarray(obj.data, dtype=np.float64)))
            kp = ksum * float(np.sum(np.asarray(mask.data, dtype=np.float64)))
            mode = "exact"
        elif kappa_prime == "boundary":
            kp = _boundary_mean(raw)
            mode = "boundary"
        else:
            raise ImagingError(f"unknown kappa_prime mode {kappa_prime!r}")
    else:
        kp = float(kappa_prime)
        mode = "given"
    recon = Tensor((raw - kp) / c0, "real")
    return GhostResult(bucket, recon, kp, mode, partial)


# ---------------------------------------------------------------------------
# watermarking


def watermark_embed(host, mark, offset: Sequence[int]) -> Tensor:
    """Add the mark into the host with its first corner at ``offset``."""
    host, mark = as_tensor(host), as_tensor(mark)
    if host.ndim != mark.ndim:
        raise ImagingError(f"dimensionality mismatch: {host.ndim}D vs {mark.ndim}D")
    offset = tuple(int(v) for v in offset)
    if len(offset) != host.ndim:
        raise ImagingError("offset rank mismatch")
    if any(o < 0 or o + m > h for o, m, h in zip(offset, mark.shape, host.shape)):
        raise ImagingError(f"mark {mark.shape} at {offset} exceeds host {host.shape}")
    mode = "int" if host.mode == mark.mode == "int" else "real"
    sel = tuple(slice(o, o + m) for o, m in zip(offset, mark.shape))
    if mode == "real":
        data = host.data.astype(np.float64)
        data[sel] = data[sel] + mark.data.astype(np.float64)
    else:
        promote = host.data.dtype == object or mark.data.dtype == object
        data = host.data.astype(object) if promote else host.data.copy()
        data[sel] = data[sel] + mark.data
    return Tensor(data, mode)


class WatermarkMatch(NamedTuple):
    offset: tuple[int, ...]
    peak: float
    threshold: float
    detected: bool


def watermark_locate(marked, mark) -> WatermarkMatch:
    """Single cross-correlation; the peak position gives the embed offset.

    The image is mean-subtracted first, otherwise a bright host's flat
    background (host mean times the mark's element sum) swamps the mark's
    C0 spike.  The peak lands at host_extent - 1 - offset per axis, so the
    top-left embed offset is recovered exactly; detection threshold is half
    the mark's C0.
    """
    marked, mark = as_tensor(marked), as_tensor(mark)
    if marked.ndim != mark.ndim:
        raise ImagingError(f"dimensionality mismatch: {marked.ndim}D vs {mark.ndim}D")
    if any(h < m for h, m in zip(marked.shape, mark.shape)):
        raise ImagingError("mark larger than the image searched")
    flat_img = np.asarray(marked.data, dtype=np.float64)
    centered = Tensor(flat_img - flat_img.mean(), "real")
    c = correlate(centered, mark)
    arr = np.asarray(c.values.data, dtype=np.float64)
    where = np.unravel_index(int(np.argmax(arr)), arr.shape)
    offset = tuple(z - w for z, w in zip(c.zero_index, where))
    c0 = float(correlate(mark, mark).peak)
    peak = float(arr[where])
    return WatermarkMatch(offset, peak, c0 / 2.0, peak >= c0 / 2.0)


# ---------------------------------------------------------------------------
# random-array baseline


@dataclass(frozen=True)
class BaselineStats:
    trials: int
    seed: int
    shape: tuple[int, ...]
    R: tuple[float, float, float]  # min, mean, max
    M: tuple[float, float, float]
    R_values: tuple[float, ...] = field(repr=False)
    M_values: tuple[float, ...] = field(repr=False)
    undefined: bool = False


def random_baseline(
    shape: Sequence[int] = (5, 5),
    values: Sequence[int] = range(-12, 14),
    trials: int = 10_000,
    seed: int = 0,
) -> BaselineStats:
    """Quality statistics of arrays filled with non-repeated random integers.

    Each trial draws ``prod(shape)`` distinct values from ``values`` using its
    own (seed, trial)-derived generator, so any subset of trials reproduces.
    """
    shape = tuple(int(n) for n in shape)
    count = math.prod(shape)
    pool = np.asarray(list(values), dtype=np.int64)
    if trials < 1:
        raise ImagingError("trials must be >= 1")
    if len(pool) < count:
        raise ImagingError(f"value pool smaller than {count} cells")
    if count == 1:
        return BaselineStats(
            trials, seed, shape, (math.nan,) * 3, (math.nan,) * 3, (), (), True
        )
    rs, ms = np.empty(trials), np.empty(trials)
    for i in range(trials):
        rng = trial_rng(seed, i)
        arr = rng.choice(pool, size=count, replace=False).reshape(shape)
        c = correlate(Tensor(arr, "int"), Tensor(arr, "int"))
        rs[i] = side_lobe_ratio(c)
        ms[i] = merit_factor(c)
    return BaselineStats(
        trials,
        seed,
        shape,
        (float(rs.min()), float(rs.mean()), float(rs.max())),
        (float(ms.min()), float(ms.mean()), float(ms.max())),
        tuple(float(v) for v in rs),
        tuple(float(v) for v in ms),
    )


# ---------------------------------------------------------------------------
# multiplex (Fellgett) noise study


@dataclass(frozen=True)
class NoiseStudy:
    trials: int
    seed: int
    sigma: float
    element_count: int
    mse_raster: float
    mse_diffuse: float
    ratio_mean: float
    ratios: tuple[float, ...] = field(repr=False)


def multiplex_noise_study(obj, mask, sigma: float, trials: int = 500, seed: int = 0) -> NoiseStudy:
    """MSE of raster vs diffuse acquisition under equal per-measurement noise.

    The mask is normalized to unit-RMS elements (so its C0 equals its element
    count N), every measurement in either scheme gets independent N(0, sigma^2)
    noise, and each scheme's MSE is taken against its own noiseless output —
    isolating noise propagation.  The expected MSE ratio is N.
    """
    obj, mask = as_tensor(obj), as_tensor(mask)
    if obj.ndim != mask.ndim:
        raise ImagingError(f"dimensionality mismatch: {obj.ndim}D vs {mask.ndim}D")
    if sigma < 0 or not math.isfinite(sigma):
        raise ImagingError("sigma must be finite and >= 0")
    if trials < 1:
        raise ImagingError("trials must be >= 1")
    o = np.asarray(obj.data, dtype=np.float64)
    h = np.asarray(mask.data, dtype=np.float64)
    rms = math.sqrt(float((h * h).mean()))
    if rms == 0.0:
        raise ImagingError("zero mask")
    hn = Tensor(h / rms, "real")
    c0 = float((hn.data * hn.data).sum())  # == element count
    ot = Tensor(o, "real")

    clean_i = encode(ot, hn)
    clean_est = np.asarray(decode(clean_i, hn).data, dtype=np.float64) / c0

    ratios = np.empty(trials)
    mse_a_total = mse_b_total = 0.0
    for t in range(trials):
        rng = trial_rng(seed, t)
        noise_a = rng.normal(0.0, sigma, size=o.shape)
        mse_a = float((noise_a**2).mean())
        noisy_i = Tensor(clean_i.data + rng.normal(0.0, sigma, size=clean_i.shape), "real")
        est = np.asarray(decode(noisy_i, hn).data, dtype=np.float64) / c0
        mse_b = float(((est - clean_est) ** 2).mean())
        mse_a_total += mse_a
        mse_b_total += mse_b
        ratios[t] = math.nan if mse_b == 0.0 else mse_a / mse_b
    return NoiseStudy(
        trials,
        seed,
        float(sigma),
        mask.size,
        mse_a_total / trials,
        mse_b_total / trials,
        float(np.nanmean(ratios)) if sigma > 0 else math.nan,
        tuple(float(v) for v in ratios),
    )


# ---------------------------------------------------------------------------
# run record


@dataclass(frozen=True)
class ImagingRun:
    """Flat record of one imaging experiment, for provenance files.

    ``stats`` carries only JSON-safe scalars; error statistics are computed
    on the valid (fully-overlapped) region, and the kappa-prime estimation
    rule used is part of the record.
    """

    operation: str
    object_shape: tuple[int, ...]
    mask_shape: tuple[int, ...]
    seed: int | None = None
    kappa: float | None = None
    kappa_prime: float | None = None
    kappa_prime_mode: str | None = None
    sigma: float | None = None
    iterations: int | None = None
    stats: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "operation": self.operation,
            "object_shape": list(self.object_shape),
            "mask_shape": list(self.mask_shape),
            "seed": self.seed,
            "kappa": self.kappa,
            "kappa_prime": self.kappa_prime,
            "kappa_prime_mode": self.kappa_prime_mode,
            "sigma": self.sigma,
            "iterations": self.iterations,
            "stats": self.stats,
        }
        return json.dumps(payload, sort_keys=True)
