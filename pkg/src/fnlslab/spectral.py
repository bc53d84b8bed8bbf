"""Fourier representation of periodic functions and the linear operators on them.

A field is a finite trigonometric polynomial on the torus T = R/(2*pi*Z),
stored as complex coefficients c(k) for |k| <= K.  All integrals use the
normalized measure

    int_T f dx := (1/2pi) * int_{-pi}^{pi} f(x) dx,

so Parseval reads ||f||_{L2}^2 = sum_k |c(k)|^2 with no 2*pi factors and
||e^{ikx}||_{L2} = 1.

Operators provided as free functions: the fractional derivative D^alpha
(multiplier |k|^alpha), the Japanese bracket <D>^s (multiplier (1+k^2)^{s/2}),
mean/nonmean/positive/negative mode projections, the mean-free antiderivative
(multiplier 1/(ik) off k=0), and alias-free pointwise products via zero-padded
FFT grids.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

__all__ = [
    "SpectralField",
    "DealiasBudgetError",
    "grid_size",
    "fractional_derivative",
    "bracket_power",
    "sobolev_norm",
    "project",
    "antiderivative",
    "derivative",
    "pointwise_product",
    "conjugate",
    "real_part",
    "imag_part",
    "translate",
    "truncate_modes",
    "sup_norm",
    "convolve_coefficients",
    "random_field",
    "write_field_csv",
    "read_field_csv",
]

# Hard cap on padded FFT grids; products requiring more raise.
MAX_GRID_POINTS = 1 << 22


class DealiasBudgetError(RuntimeError):
    """Raised when an alias-free product would exceed the padded-grid budget."""


def _next_pow2(n: int) -> int:
    m = 1
    while m < n:
        m <<= 1
    return m


def grid_size(cutoff: int, degree: int) -> int:
    """Padded grid size for alias-free degree-`degree` products of K-band fields.

    A monomial of total degree p in fields band-limited to |k| <= K has true
    bandwidth p*K; sampling on M points folds mode m onto m +- M, so modes
    |k| <= K come out exact as soon as M >= (p+1)*K + 1.  Rounded up to a
    power of two for transform efficiency.
    """
    degree = max(degree, 1)
    m = _next_pow2(max((degree + 1) * cutoff + 1, 2 * cutoff + 2))
    if m > MAX_GRID_POINTS:
        raise DealiasBudgetError(
            f"alias-free grid needs {m} points (cutoff={cutoff}, degree={degree}), "
            f"budget is {MAX_GRID_POINTS}"
        )
    return m


@dataclass(frozen=True)
class SpectralField:
    """Band-limited periodic function, coefficients over k = -K..K.

    ``coeffs[i]`` holds the Fourier coefficient of mode ``k = i - cutoff``.
    Instances are immutable value objects; all operations return new fields.
    """

    coeffs: np.ndarray
    cutoff: int

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=np.complex128)
        if self.cutoff < 0:
            raise ValueError("cutoff must be nonnegative")
        if arr.shape != (2 * self.cutoff + 1,):
            raise ValueError(
                f"expected {2 * self.cutoff + 1} coefficients for cutoff "
                f"{self.cutoff}, got shape {arr.shape}"
            )
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zeros(cls, cutoff: int) -> "SpectralField":
        return cls(np.zeros(2 * cutoff + 1, dtype=np.complex128), cutoff)

    @classmethod
    def from_modes(cls, modes: Mapping[int, complex], cutoff: int) -> "SpectralField":
        """Field with prescribed coefficients, e.g. {1: 1.0} for e^{ix}."""
        c = np.zeros(2 * cutoff + 1, dtype=np.complex128)
        for k, a in modes.items():
            if abs(k) > cutoff:
                raise ValueError(f"mode {k} outside cutoff {cutoff}")
            c[k + cutoff] = a
        return cls(c, cutoff)

    @classmethod
    def constant(cls, value: complex, cutoff: int = 0) -> "SpectralField":
        return cls.from_modes({0: value}, cutoff)

    @classmethod
    def from_samples(cls, samples: np.ndarray, cutoff: int) -> "SpectralField":
        """Recover coefficients from uniform physical samples.

        Exact for fields band-limited to the cutoff when the sample count is
        at least 2*cutoff + 1.
        """
        samples = np.asarray(samples, dtype=np.complex128)
        m = samples.shape[0]
        if m < 2 * cutoff + 1:
            raise ValueError(f"{m} samples cannot resolve cutoff {cutoff}")
        hat = np.fft.fft(samples) / m
        ks = np.arange(-cutoff, cutoff + 1)
        return cls(hat[np.mod(ks, m)], cutoff)

    # -- basic accessors ----------------------------------------------------

    def wavenumbers(self) -> np.ndarray:
        return np.arange(-self.cutoff, self.cutoff + 1)

    def coefficient(self, k: int) -> complex:
        if abs(k) > self.cutoff:
            return 0.0 + 0.0j
        return complex(self.coeffs[k + self.cutoff])

    def to_samples(self, npoints: int | None = None) -> np.ndarray:
        """Values on `npoints` uniform points x_j = 2*pi*j/M."""
        m = npoints if npoints is not None else _next_pow2(2 * self.cutoff + 2)
        if m < 2 * self.cutoff + 1:
            raise ValueError("sample grid too coarse for this cutoff")
        buf = np.zeros(m, dtype=np.complex128)
        ks = self.wavenumbers()
        np.add.at(buf, np.mod(ks, m), self.coeffs)
        return np.fft.ifft(buf) * m

    def with_cutoff(self, cutoff: int) -> "SpectralField":
        """Embed (zero pad) or truncate to a new cutoff."""
        if cutoff == self.cutoff:
            return self
        c = np.zeros(2 * cutoff + 1, dtype=np.complex128)
        lo = min(cutoff, self.cutoff)
        c[cutoff - lo : cutoff + lo + 1] = self.coeffs[
            self.cutoff - lo : self.cutoff + lo + 1
        ]
        return SpectralField(c, cutoff)

    # -- arithmetic (value semantics) ---------------------------------------

    def __add__(self, other: "SpectralField") -> "SpectralField":
        k = max(self.cutoff, other.cutoff)
        return SpectralField(
            self.with_cutoff(k).coeffs + other.with_cutoff(k).coeffs, k
        )

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        k = max(self.cutoff, other.cutoff)
        return SpectralField(
            self.with_cutoff(k).coeffs - other.with_cutoff(k).coeffs, k
        )

    def __mul__(self, scalar: complex) -> "SpectralField":
        return SpectralField(self.coeffs * scalar, self.cutoff)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(-self.coeffs, self.cutoff)

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.coeffs)) <= tol)


# -- Fourier multipliers -----------------------------------------------------


def fractional_derivative(f: SpectralField, alpha: float) -> SpectralField:
    """D^alpha f: multiply mode k by |k|^alpha; the mean is annihilated for alpha > 0."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0; use antiderivative for the inverse")
    k = f.wavenumbers().astype(float)
    mult = np.zeros_like(k)
    nz = k != 0
    mult[nz] = np.abs(k[nz]) ** alpha
    if alpha == 0:
        mult[~nz] = 1.0
    return SpectralField(f.coeffs * mult, f.cutoff)


def bracket_power(f: SpectralField, s: float) -> SpectralField:
    """<D>^s f: multiply mode k by (1+k^2)^{s/2}.  Any real s."""
    k = f.wavenumbers().astype(float)
    return SpectralField(f.coeffs * (1.0 + k * k) ** (s / 2.0), f.cutoff)


def sobolev_norm(f: SpectralField, s: float = 0.0) -> float:
    """H^s norm (sum <k>^{2s} |c(k)|^2)^{1/2}; s=0 is the L2 norm."""
    k = f.wavenumbers().astype(float)
    w = (1.0 + k * k) ** s
    return float(np.sqrt(np.sum(w * np.abs(f.coeffs) ** 2)))


def project(f: SpectralField, which: str) -> SpectralField:
    """Restrict support: 'mean' (k=0), 'nonmean' (k!=0), 'plus' (k>0), 'minus' (k<0)."""
    k = f.wavenumbers()
    if which == "mean":
        mask = k == 0
    elif which == "nonmean":
        mask = k != 0
    elif which == "plus":
        mask = k > 0
    elif which == "minus":
        mask = k < 0
    else:
        raise ValueError(f"unknown projection {which!r}")
    return SpectralField(np.where(mask, f.coeffs, 0.0), f.cutoff)


def derivative(f: SpectralField) -> SpectralField:
    """d/dx: multiply mode k by ik."""
    return SpectralField(f.coeffs * (1j * f.wavenumbers()), f.cutoff)


def antiderivative(f: SpectralField) -> SpectralField:
    """Mean-free antiderivative: c(k)/(ik) for k != 0, zero mean.

    Satisfies d/dx (antiderivative f) = P_nonmean f.
    """
    k = f.wavenumbers()
    out = np.zeros_like(f.coeffs)
    nz = k != 0
    out[nz] = f.coeffs[nz] / (1j * k[nz])
    return SpectralField(out, f.cutoff)


def conjugate(f: SpectralField) -> SpectralField:
    """Complex conjugate of the function: c(k) -> conj(c(-k))."""
    return SpectralField(np.conj(f.coeffs[::-1]), f.cutoff)


def real_part(f: SpectralField) -> SpectralField:
    return 0.5 * (f + conjugate(f))


def imag_part(f: SpectralField) -> SpectralField:
    return (-0.5j) * (f - conjugate(f))


def translate(f: SpectralField, a: float) -> SpectralField:
    """f(x - a): phase modulation e^{-ika} per mode.  Preserves all |c(k)|."""
    return SpectralField(f.coeffs * np.exp(-1j * f.wavenumbers() * a), f.cutoff)


def truncate_modes(f: SpectralField, mu: int) -> SpectralField:
    """Sharp Fourier truncation: zero all modes with |k| > mu (cutoff kept)."""
    if mu < 0:
        raise ValueError("mu must be >= 0")
    k = f.wavenumbers()
    return SpectralField(np.where(np.abs(k) <= mu, f.coeffs, 0.0), f.cutoff)


def sup_norm(f: SpectralField, oversample: int = 4) -> float:
    """L-infinity norm estimated on an oversampled uniform grid."""
    m = _next_pow2(oversample * (2 * f.cutoff + 2))
    return float(np.max(np.abs(f.to_samples(m))))


# -- products ----------------------------------------------------------------


def pointwise_product(
    f: SpectralField, g: SpectralField, out_cutoff: int | None = None
) -> SpectralField:
    """Coefficients of f*g, alias-free via a zero-padded FFT grid.

    The default output cutoff is max of the input cutoffs (band-limited
    truncation); pass ``out_cutoff`` up to ``f.cutoff + g.cutoff`` for the
    full product.
    """
    full = f.cutoff + g.cutoff
    kout = max(f.cutoff, g.cutoff) if out_cutoff is None else out_cutoff
    kout = min(kout, full)
    m = _next_pow2(full + kout + 2)
    if m > MAX_GRID_POINTS:
        raise DealiasBudgetError(f"product grid {m} exceeds budget")
    vals = f.to_samples(m) * g.to_samples(m)
    return SpectralField.from_samples(vals, kout)


def convolve_coefficients(f: SpectralField, g: SpectralField) -> SpectralField:
    """Direct convolution of the coefficient sequences (independent of the FFT path)."""
    c = np.convolve(f.coeffs, g.coeffs)
    return SpectralField(c, f.cutoff + g.cutoff)


# -- random fields and I/O -----------------------------------------------------


def random_field(
    cutoff: int,
    decay: float,
    rng: np.random.Generator,
    amplitude: float = 1.0,
    side: str | None = None,
    include_mean: bool = True,
) -> SpectralField:
    """Random trigonometric polynomial with coefficient decay <k>^{-decay}.

    Coefficients are complex Gaussian; ``side`` restricts support to 'plus'
    or 'minus' modes.
    """
    k = np.arange(-cutoff, cutoff + 1)
    w = (1.0 + k.astype(float) ** 2) ** (-decay / 2.0)
    z = rng.standard_normal(2 * cutoff + 1) + 1j * rng.standard_normal(2 * cutoff + 1)
    c = amplitude * w * z / np.sqrt(2.0)
    if side == "plus":
        c[k <= 0] = 0.0
    elif side == "minus":
        c[k >= 0] = 0.0
    elif side is not None:
        raise ValueError(f"unknown side {side!r}")
    if not include_mean:
        c[k == 0] = 0.0
    return SpectralField(c, cutoff)


def write_field_csv(f: SpectralField, path) -> None:
    """Spectrum snapshot: header then rows ``k,re,im``."""
    with open(path, "w") as fh:
        fh.write("k,re,im\n")
        for k, c in zip(f.wavenumbers(), f.coeffs):
            fh.write(f"{k},{c.real:.17g},{c.imag:.17g}\n")


def read_field_csv(path) -> SpectralField:
    ks: list[int] = []
    cs: list[complex] = []
    with open(path) as fh:
        header = fh.readline()
        if not header.lower().startswith("k"):
            raise ValueError("expected header 'k,re,im'")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            k_s, re_s, im_s = line.split(",")
            ks.append(int(k_s))
            cs.append(float(re_s) + 1j * float(im_s))
    cutoff = max(abs(k) for k in ks) if ks else 0
    return SpectralField.from_modes(dict(zip(ks, cs)), cutoff)
