"""Histogram ingestion, weighted samples, synthetic data, and the
DCT-coefficient histogram pipeline for grayscale images."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.fft import dctn

from .errors import EmptyHistogram, ImageTooSmall

WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Histogram:
    """Binned counts: ``bin_edges`` holds n+1 ascending values, ``counts`` n."""

    bin_edges: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        edges = np.array(self.bin_edges, dtype=float)
        counts = np.array(self.counts, dtype=float)
        if edges.ndim != 1 or counts.ndim != 1 or counts.size != edges.size - 1:
            raise ValueError("need n+1 bin edges for n counts")
        if counts.size == 0:
            raise ValueError("histogram needs at least one bin")
        if not np.all(np.isfinite(edges)) or not np.all(np.diff(edges) > 0):
            raise ValueError("bin edges must be finite and strictly increasing")
        if not np.all(np.isfinite(counts)) or np.any(counts < 0):
            raise ValueError("counts must be finite and non-negative")
        if counts.sum() <= 0:
            raise EmptyHistogram("histogram has zero total count")
        edges.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


@dataclass(frozen=True)
class WeightedSample:
    """Observation points with normalized weights and optional per-point
    density estimates (the observed values a fitted density is compared to)."""

    points: np.ndarray
    weights: np.ndarray
    densities: np.ndarray | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        w = np.array(self.weights, dtype=float)
        if pts.ndim != 1 or w.shape != pts.shape:
            raise ValueError("points and weights must be 1-D and aligned")
        if pts.size == 0:
            raise ValueError("sample needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError("weights must sum to 1")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        if self.densities is not None:
            d = np.array(self.densities, dtype=float)
            if d.shape != pts.shape:
                raise ValueError("densities must align 1:1 with points")
            if np.any(d < 0) or not np.all(np.isfinite(d)):
                raise ValueError("densities must be finite and non-negative")
            d.setflags(write=False)
            object.__setattr__(self, "densities", d)

    @property
    def size(self) -> int:
        return self.points.size


def histogram_to_sample(hist: Histogram) -> WeightedSample:
    """Turn a histogram into a weighted sample.

    Points are bin midpoints, weights are relative frequencies, and the
    attached densities are counts / (total * width) so that they integrate
    to one over the binning.  Zero-count bins carry no weight and are
    dropped (a zero weight contributes nothing to any mean and breaks
    log-domain evaluation at negative orders).
    """
    total = hist.total
    keep = hist.counts > 0
    counts = hist.counts[keep]
    return WeightedSample(
        points=hist.midpoints[keep],
        weights=counts / total,
        densities=counts / (total * hist.widths[keep]),
    )


def exponential_draws(
    theta: float,
    n: int,
    contamination: float = 0.0,
    outlier_scale: float = 10.0,
    seed: int = 0,
) -> np.ndarray:
    """Raw draws behind :func:`synth_exponential`.

    ``(1 - contamination) * n`` draws come from rate ``theta``, the rest from
    rate ``theta / outlier_scale`` (a heavier tail).  Deterministic per seed;
    the clean draws always come first in the returned array.
    """
    if theta <= 0:
        raise ValueError("theta must be positive")
    if n < 1:
        raise ValueError("need at least one draw")
    if not 0 <= contamination < 1:
        raise ValueError("contamination must be in [0, 1)")
    if outlier_scale <= 0:
        raise ValueError("outlier_scale must be positive")
    rng = np.random.default_rng(seed)
    n_out = int(round(contamination * n))
    clean = rng.exponential(1.0 / theta, n - n_out)
    outliers = rng.exponential(outlier_scale / theta, n_out)
    return np.concatenate([clean, outliers])


def synth_exponential(
    theta: float,
    n: int,
    contamination: float = 0.0,
    outlier_scale: float = 10.0,
    seed: int = 0,
    bins: int = 64,
) -> Histogram:
    """Equal-width histogram over [0, max draw] of contaminated exponential
    draws; deterministic for a fixed seed."""
    if bins < 1:
        raise ValueError("need at least one bin")
    draws = exponential_draws(theta, n, contamination, outlier_scale, seed)
    counts, edges = np.histogram(draws, bins=bins, range=(0.0, float(draws.max())))
    return Histogram(edges, counts)


def dct_abs_histogram(
    image: np.ndarray,
    block: int = 8,
    bins: int = 64,
    exclude_dc: bool = True,
) -> Histogram:
    """Histogram of absolute orthonormal type-II DCT coefficients.

    The image is tiled into ``block x block`` blocks (partial edge blocks
    truncated), each block transformed, and the coefficient magnitudes
    pooled into an equal-width histogram over [0, observed max].  With
    ``exclude_dc`` the first coefficient of every block is left out; the
    exponential family has its mode at zero and DC terms are large
    positive outliers.
    """
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise ValueError("expected a 2-D grayscale image")
    nby, nbx = img.shape[0] // block, img.shape[1] // block
    if nby < 1 or nbx < 1:
        raise ImageTooSmall(
            f"image {img.shape} smaller than one {block}x{block} block"
        )
    tiles = (
        img[: nby * block, : nbx * block]
        .reshape(nby, block, nbx, block)
        .transpose(0, 2, 1, 3)
    )
    mag = np.abs(dctn(tiles, type=2, norm="ortho", axes=(-2, -1)))
    flat = mag.reshape(-1, block * block)
    values = flat[:, 1:].ravel() if exclude_dc else flat.ravel()
    hi = float(values.max())
    if hi <= 0.0:
        hi = 1.0  # all coefficients zero: keep the mass in the first bin
    counts, edges = np.histogram(values, bins=bins, range=(0.0, hi))
    return Histogram(edges, counts)


def read_pgm(path: str | Path) -> np.ndarray:
    """Read a binary 8-bit PGM (P5, maxval 255) into a 2-D uint8 array."""
    raw = Path(path).read_bytes()
    tokens: list[bytes] = []
    i = 0
    while len(tokens) < 4:
        if i >= len(raw):
            raise ValueError("truncated PGM header")
        c = raw[i : i + 1]
        if c == b"#":
            nl = raw.find(b"\n", i)
            if nl < 0:
                raise ValueError("truncated PGM header")
            i = nl + 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(raw) and not raw[j : j + 1].isspace() and raw[j : j + 1] != b"#":
                j += 1
            tokens.append(raw[i:j])
            i = j
    if tokens[0] != b"P5":
        raise ValueError("not a binary PGM (P5) file")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise ValueError("malformed PGM header") from exc
    if maxval != 255:
        raise ValueError("only maxval 255 PGM files are supported")
    i += 1  # single whitespace byte separates header from raster
    raster = raw[i : i + width * height]
    if len(raster) < width * height:
        raise ValueError("truncated PGM raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width)


def write_pgm(path: str | Path, image: np.ndarray) -> None:
    """Write a 2-D uint8 array as a binary PGM (P5, maxval 255)."""
    img = np.asarray(image)
    if img.ndim != 2 or img.dtype != np.uint8:
        raise ValueError("expected a 2-D uint8 image")
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.tobytes())


def write_histogram_csv(path: str | Path, hist: Histogram) -> None:
    """Write ``bin_left,bin_right,count`` rows with round-trip precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_left", "bin_right", "count"])
        for left, right, count in zip(
            hist.bin_edges[:-1], hist.bin_edges[1:], hist.counts
        ):
            writer.writerow([repr(float(left)), repr(float(right)), repr(float(count))])


def read_histogram_csv(path: str | Path) -> Histogram:
    """Read a ``bin_left,bin_right,count`` CSV into a Histogram.

    Bins must be contiguous: each row's left edge equals the previous
    row's right edge.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["bin_left", "bin_right", "count"]:
            raise ValueError("expected header bin_left,bin_right,count")
        lefts, rights, counts = [], [], []
        for row in reader:
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"malformed row: {row!r}")
            try:
                lefts.append(float(row[0]))
                rights.append(float(row[1]))
                counts.append(float(row[2]))
            except ValueError as exc:
                raise ValueError(f"non-numeric row: {row!r}") from exc
    if not lefts:
        raise ValueError("histogram CSV has no bins")
    for i in range(1, len(lefts)):
        if lefts[i] != rights[i - 1]:
            raise ValueError("bins must be contiguous")
    edges = np.array(lefts + [rights[-1]])
    return Histogram(edges, np.array(counts))
