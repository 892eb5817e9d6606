"""Morlet wavelet coherence with Monte Carlo significance and FDR control.

The continuous wavelet transform uses the analytic Morlet mother wavelet
psi(eta) = pi^(-1/4) exp(i w0 eta) exp(-eta^2 / 2) with w0 = 6 and the
unit-energy sqrt(dt/s) normalization.  Squared coherence is

    R2(s, t) = |S(W_xy / s)|^2 / ( S(|W_x|^2 / s) * S(|W_y|^2 / s) )

where S is a smoothing operator acting along time (Gaussian of std s/dt
samples) and scale (short boxcar); by Cauchy-Schwarz this lands in [0, 1].
Significance comes from AR(1) surrogate pairs that preserve each input's
lag-1 autocorrelation and variance; multiplicity is handled per scale with
Benjamini-Hochberg and globally with pooled Benjamini-Yekutieli q-values.
Cells outside the cone of influence (edge-contaminated) carry NaN p-values
and are never tested.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft
from scipy.signal import lfilter

from .errors import ConfigError, DataError, NumericalError

OMEGA0 = 6.0
#: kernel truncation: the Gaussian envelope at |eta| = 8 is ~ 1e-14
_KERNEL_HALF_WIDTH = 8.0
#: boxcar length in octaves for scale smoothing (Morlet decorrelation length)
_SCALE_SMOOTH_OCTAVES = 0.6


def fourier_period(scale):
    """Equivalent Fourier period of a Morlet wavelet scale."""
    return 4.0 * np.pi * np.asarray(scale) / (OMEGA0 + np.sqrt(2.0 + OMEGA0**2))


def scale_for_period(period):
    """Inverse of :func:`fourier_period`."""
    return np.asarray(period) * (OMEGA0 + np.sqrt(2.0 + OMEGA0**2)) / (4.0 * np.pi)


def dyadic_scales(n: int, dt: float, s0: float | None = None,
                  dj: float = 1.0 / 12.0) -> np.ndarray:
    """Dyadic scale grid s0 * 2^(j*dj), spanning up to n*dt/4."""
    if n < 4:
        raise DataError("series too short for a scale grid")
    if dj <= 0:
        raise ConfigError("dj must be > 0")
    if s0 is None:
        s0 = 2.0 * dt
    s_max = n * dt / 4.0
    if s0 > s_max:
        raise DataError(f"smallest scale {s0} exceeds the usable maximum {s_max}")
    J = int(np.floor(np.log2(s_max / s0) / dj))
    return s0 * 2.0 ** (dj * np.arange(J + 1))


def coi(n: int, dt: float) -> np.ndarray:
    """Cone-of-influence boundary: the largest edge-safe scale per time index.

    The Morlet e-folding time is sqrt(2)*s, so a cell (s, t) is reliable when
    s <= dt * min(t, n-1-t) / sqrt(2); edges get boundary 0.
    """
    if n < 2:
        raise DataError("need n >= 2")
    t = np.arange(n, dtype=np.float64)
    return dt * np.minimum(t, n - 1 - t) / np.sqrt(2.0)


class CwtPlan:
    """Cached FFT plan: kernel transforms for a fixed (n, scales, dt) triple.

    Reusing a plan across many series (surrogate batches) skips the kernel
    construction and kernel FFT on every call.
    """

    def __init__(self, n: int, scales: np.ndarray, dt: float):
        scales = np.asarray(scales, dtype=np.float64)
        if scales.size == 0:
            raise ConfigError("empty scale vector")
        if np.any(scales <= 0) or np.any(np.diff(scales) <= 0):
            raise ConfigError("scales must be positive and strictly increasing")
        self.n = int(n)
        self.dt = float(dt)
        self.scales = scales
        self.half_widths = np.ceil(_KERNEL_HALF_WIDTH * scales / dt).astype(int)
        L_max = int(self.half_widths.max())
        self.m_fft = int(2 ** np.ceil(np.log2(n + 2 * L_max + 1)))
        self.kernel_ffts = np.empty((scales.size, self.m_fft), dtype=np.complex128)
        for idx, s in enumerate(scales):
            L = self.half_widths[idx]
            eta = np.arange(-L, L + 1) * dt / s
            psi_bar = np.pi ** (-0.25) * np.exp(-1j * OMEGA0 * eta - 0.5 * eta * eta)
            # W(s, tau) = sum_t' x(t') * g(t' - tau) = (x * h)(tau), h(i) = g(-i)
            g = np.sqrt(dt / s) * psi_bar
            h = g[::-1]
            self.kernel_ffts[idx] = sfft.fft(h, self.m_fft)

    def cwt(self, x: np.ndarray) -> np.ndarray:
        """Complex coefficients, shape (n_scales, n)."""
        x = np.asarray(x, dtype=np.float64).ravel()
        if x.size != self.n:
            raise DataError(f"series length {x.size} does not match plan ({self.n})")
        X = sfft.fft(x, self.m_fft)
        conv = sfft.ifft(X[None, :] * self.kernel_ffts, axis=1)
        out = np.empty((self.scales.size, self.n), dtype=np.complex128)
        for idx in range(self.scales.size):
            L = self.half_widths[idx]
            out[idx] = conv[idx, L: L + self.n]
        return out


def morlet_cwt(x: np.ndarray, scales: np.ndarray, dt: float = 1.0) -> np.ndarray:
    """One-shot continuous wavelet transform (builds a throwaway plan)."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size < 4:
        raise DataError("series too short (need >= 4 points)")
    return CwtPlan(x.size, np.asarray(scales, dtype=np.float64), dt).cwt(x)


def _smooth_same(row: np.ndarray, win: np.ndarray) -> np.ndarray:
    """'Same'-size smoothing with edge renormalization (weights always sum to 1).

    The window is odd-length and centered; slicing the full convolution keeps
    the output aligned even when the window is longer than the row.
    """
    start = (len(win) - 1) // 2
    num = np.convolve(row, win)[start: start + len(row)]
    den = np.convolve(np.ones(len(row)), win)[start: start + len(row)]
    return num / den


def _smooth_field(field: np.ndarray, scales: np.ndarray, dt: float,
                  dj: float) -> np.ndarray:
    """Time-then-scale smoothing used by the coherence estimator."""
    out = np.empty_like(field)
    for idx, s in enumerate(scales):
        std = s / dt
        half = max(int(np.ceil(4.0 * std)), 1)
        grid = np.arange(-half, half + 1)
        win = np.exp(-0.5 * (grid / std) ** 2)
        win /= win.sum()
        out[idx] = _smooth_same(field[idx], win)
    length = int(round(_SCALE_SMOOTH_OCTAVES / dj))
    length = max(length, 1)
    if length % 2 == 0:
        length += 1
    if length > 1:
        box = np.full(length, 1.0 / length)
        for t in range(field.shape[1]):
            out[:, t] = _smooth_same(out[:, t], box)
    return out


@dataclass(frozen=True)
class CoherenceMap:
    """Squared coherence, phase and (optionally) significance fields."""

    scales: np.ndarray
    times: np.ndarray
    r2: np.ndarray
    phase: np.ndarray
    coi: np.ndarray
    params: dict = field(compare=False)
    pvals: np.ndarray | None = None
    mask_fdr: np.ndarray | None = None
    qvals_by: np.ndarray | None = None

    @property
    def in_coi(self) -> np.ndarray:
        """True where the cell is edge-safe (inside the cone, reliable)."""
        return self.scales[:, None] <= self.coi[None, :]

    @property
    def periods(self) -> np.ndarray:
        return fourier_period(self.scales)


def coherence(x: np.ndarray, y: np.ndarray, scales: np.ndarray | None = None,
              dt: float = 1.0, dj: float = 1.0 / 12.0,
              plan: CwtPlan | None = None) -> CoherenceMap:
    """Smoothed squared wavelet coherence and phase of two equal-length series."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise DataError("series lengths disagree")
    n = x.size
    if plan is None:
        if scales is None:
            scales = dyadic_scales(n, dt, dj=dj)
        plan = CwtPlan(n, scales, dt)
    scales = plan.scales
    dt = plan.dt

    Wx = plan.cwt(x)
    Wy = plan.cwt(y)
    r2, phase = _coherence_fields(Wx, Wy, scales, dt, dj)
    return CoherenceMap(
        scales=scales,
        times=np.arange(n, dtype=np.float64) * dt,
        r2=r2,
        phase=phase,
        coi=coi(n, dt),
        params={"omega0": OMEGA0, "dt": dt, "dj": dj},
    )


def _coherence_fields(Wx, Wy, scales, dt, dj):
    inv_s = 1.0 / scales[:, None]
    cross = _smooth_field(Wx * np.conj(Wy) * inv_s, scales, dt, dj)
    px = _smooth_field(np.abs(Wx) ** 2 * inv_s, scales, dt, dj)
    py = _smooth_field(np.abs(Wy) ** 2 * inv_s, scales, dt, dj)
    denom = px * py
    tiny = np.finfo(np.float64).tiny
    r2 = np.abs(cross) ** 2 / np.maximum(denom, tiny)
    if np.any(r2 > 1.0 + 1e-8):
        raise NumericalError("coherence exceeded 1 beyond tolerance")
    r2 = np.clip(r2, 0.0, 1.0)
    phase = np.angle(cross)
    return r2, phase


def ar1_surrogates(x: np.ndarray, B: int, rng: np.random.Generator) -> np.ndarray:
    """B stationary AR(1) surrogates matching lag-1 autocorrelation and variance.

    Returns a (B, n) array around the source mean; deterministic per generator
    state.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    n = x.size
    if n < 3:
        raise DataError("series too short for surrogate fitting")
    c = x - x.mean()
    denom = float(c @ c)
    if denom == 0.0:
        raise DataError("constant series has no autocorrelation structure")
    rho = float(c[1:] @ c[:-1]) / denom
    if abs(rho) >= 1.0 - 1e-10:
        raise NumericalError(f"lag-1 autocorrelation estimate {rho} is (near) unit root")
    var = float(np.var(x, ddof=1))
    e = rng.standard_normal((B, n))
    e[:, 0] *= np.sqrt(var)
    e[:, 1:] *= np.sqrt(var * (1.0 - rho * rho))
    z = lfilter([1.0], [1.0, -rho], e, axis=1)
    return x.mean() + z


def significance(x: np.ndarray, y: np.ndarray, B: int = 1000,
                 rng: np.random.Generator | None = None,
                 scales: np.ndarray | None = None, dt: float = 1.0,
                 dj: float = 1.0 / 12.0,
                 alpha_fdr: float = 0.10) -> CoherenceMap:
    """Coherence with per-cell Monte Carlo p-values and FDR summaries.

    p(s, t) = (1 + #{surrogate R2 >= observed R2}) / (B + 1), computed only on
    edge-safe cells (NaN elsewhere).  ``mask_fdr`` applies per-scale
    Benjamini-Hochberg at ``alpha_fdr``; ``qvals_by`` are pooled
    Benjamini-Yekutieli q-values over all tested cells.
    """
    if B < 100:
        raise ConfigError("B must be >= 100 for meaningful Monte Carlo p-values")
    if rng is None:
        rng = np.random.default_rng()
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise DataError("series lengths disagree")
    n = x.size
    if scales is None:
        scales = dyadic_scales(n, dt, dj=dj)
    plan = CwtPlan(n, scales, dt)
    base = coherence(x, y, dt=dt, dj=dj, plan=plan)

    xs = ar1_surrogates(x, B, rng)
    ys = ar1_surrogates(y, B, rng)
    exceed = np.zeros_like(base.r2)
    for b in range(B):
        Wx = plan.cwt(xs[b])
        Wy = plan.cwt(ys[b])
        r2_b, _ = _coherence_fields(Wx, Wy, scales, plan.dt, dj)
        exceed += (r2_b >= base.r2)

    pvals = (exceed + 1.0) / (B + 1.0)
    reliable = base.in_coi
    pvals = np.where(reliable, pvals, np.nan)
    mask = fdr_bh_per_scale(pvals, alpha_fdr)
    qvals = by_pooled_qvalues(pvals)
    params = dict(base.params)
    params.update({"B": B, "alpha_fdr": alpha_fdr})
    return CoherenceMap(
        scales=base.scales,
        times=base.times,
        r2=base.r2,
        phase=base.phase,
        coi=base.coi,
        params=params,
        pvals=pvals,
        mask_fdr=mask,
        qvals_by=qvals,
    )


def fdr_bh_per_scale(pvals: np.ndarray, alpha: float) -> np.ndarray:
    """Benjamini-Hochberg step-up applied independently within each scale row.

    NaN cells (untested) are never significant and do not count toward m.
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigError("alpha must lie in (0, 1)")
    pvals = np.asarray(pvals, dtype=np.float64)
    mask = np.zeros(pvals.shape, dtype=bool)
    for row in range(pvals.shape[0]):
        p = pvals[row]
        finite = np.isfinite(p)
        m = int(finite.sum())
        if m == 0:
            continue
        ps = np.sort(p[finite])
        thresholds = alpha * np.arange(1, m + 1) / m
        passing = np.nonzero(ps <= thresholds)[0]
        if passing.size == 0:
            continue
        cutoff = ps[passing[-1]]
        mask[row] = finite & (p <= cutoff)
    return mask


def by_pooled_qvalues(pvals: np.ndarray) -> np.ndarray:
    """Pooled Benjamini-Yekutieli q-values over every finite cell.

    q_(i) = min_{j >= i} p_(j) * M * c(M) / j with c(M) the harmonic sum;
    valid under arbitrary dependence.  NaN cells stay NaN.
    """
    pvals = np.asarray(pvals, dtype=np.float64)
    flat = pvals.ravel()
    finite_idx = np.nonzero(np.isfinite(flat))[0]
    if finite_idx.size == 0:
        raise DataError("no finite p-values to adjust")
    M = finite_idx.size
    c_m = float(np.sum(1.0 / np.arange(1, M + 1)))
    order = finite_idx[np.argsort(flat[finite_idx], kind="stable")]
    ranked = flat[order]
    raw = ranked * M * c_m / np.arange(1, M + 1)
    q = np.minimum.accumulate(raw[::-1])[::-1]
    q = np.clip(q, 0.0, 1.0)
    out = np.full(flat.shape, np.nan)
    out[order] = q
    return out.reshape(pvals.shape)
