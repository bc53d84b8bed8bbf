"""Polynomial nonlinearities F(zeta, omega, zeta_bar, omega_bar) and their algebra.

A nonlinearity is a finitely supported sum

    F = sum C[a,b,c,d] * zeta^a * omega^b * zeta_bar^c * omega_bar^d,

evaluated along a field u with the slots (u, u_x, conj u, conj u_x).  Wirtinger
derivatives treat the four slots as independent variables, so F_omega lowers
the omega exponent and multiplies by it.

The well-posedness criterion functional is

    G(psi) = int_T Im F_omega(psi, psi_x, conj psi, conj psi_x) dx,

the mean (zeroth Fourier coefficient) of the imaginary part of F_omega along
psi.  The flow admits solutions exactly when G vanishes identically; the
randomized checker falsifies "G == 0 for all psi" by sampling structured and
random trigonometric polynomials (G is a polynomial functional of finitely
many Fourier coefficients at each cutoff, so a nonzero functional is detected
almost surely).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .spectral import (
    DealiasBudgetError,
    SpectralField,
    derivative,
    grid_size,
    random_field,
)

__all__ = [
    "PolynomialNonlinearity",
    "CriterionVerdict",
    "wirtinger_derivative",
    "theta_omega_mean",
    "criterion_functional",
    "check_wellposedness_condition",
    "derived_system_rhs",
    "structured_witnesses",
    "cubic",
    "example_b",
    "example_c",
    "example_d",
    "linear_transport",
    "preset",
    "parse_nonlinearity",
    "format_nonlinearity",
]

VARIABLES = ("zeta", "omega", "zeta_bar", "omega_bar")

Index = tuple[int, int, int, int]


@dataclass(frozen=True)
class PolynomialNonlinearity:
    """Finitely supported map (a,b,c,d) -> coefficient, zero entries dropped."""

    terms: tuple[tuple[Index, complex], ...]

    @classmethod
    def from_terms(cls, mapping: Mapping[Index, complex]) -> "PolynomialNonlinearity":
        items = []
        for idx, coeff in mapping.items():
            idx = tuple(int(e) for e in idx)
            if len(idx) != 4 or any(e < 0 for e in idx):
                raise ValueError(f"bad multi-index {idx}")
            coeff = complex(coeff)
            if coeff != 0:
                items.append((idx, coeff))
        items.sort(key=lambda t: t[0])
        return cls(tuple(items))

    @classmethod
    def zero(cls) -> "PolynomialNonlinearity":
        return cls(())

    def as_dict(self) -> dict[Index, complex]:
        return {idx: c for idx, c in self.terms}

    @property
    def total_degree(self) -> int:
        """Max a+b+c+d over the support; drives dealias padding."""
        if not self.terms:
            return 0
        return max(sum(idx) for idx, _ in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "PolynomialNonlinearity") -> "PolynomialNonlinearity":
        d = self.as_dict()
        for idx, c in other.terms:
            d[idx] = d.get(idx, 0.0) + c
        return PolynomialNonlinearity.from_terms(d)

    def __mul__(self, scalar: complex) -> "PolynomialNonlinearity":
        return PolynomialNonlinearity.from_terms(
            {idx: scalar * c for idx, c in self.terms}
        )

    __rmul__ = __mul__

    def conjugate_coefficients(self) -> "PolynomialNonlinearity":
        """Coefficient-wise conjugation C -> conj(C).

        Together with conjugating the initial data this mirrors the flow:
        the criterion functional flips sign, so a one-sided growth mechanism
        switches between the negative and positive frequency halves.
        """
        return PolynomialNonlinearity.from_terms(
            {idx: np.conj(c) for idx, c in self.terms}
        )

    def wirtinger(self, var: str) -> "PolynomialNonlinearity":
        """Formal partial derivative in one of the four independent slots."""
        if var not in VARIABLES:
            raise ValueError(f"var must be one of {VARIABLES}")
        pos = VARIABLES.index(var)
        out: dict[Index, complex] = {}
        for idx, c in self.terms:
            e = idx[pos]
            if e == 0:
                continue
            new = list(idx)
            new[pos] = e - 1
            key = tuple(new)
            out[key] = out.get(key, 0.0) + c * e
        return PolynomialNonlinearity.from_terms(out)

    # -- evaluation ----------------------------------------------------------

    def evaluate_values(self, u_vals, du_vals) -> np.ndarray:
        """Pointwise values of F on given sample arrays of u and u_x."""
        cu = np.conj(u_vals)
        cdu = np.conj(du_vals)
        out = np.zeros_like(u_vals)
        for (a, b, c, d), coeff in self.terms:
            term = np.full_like(u_vals, coeff)
            if a:
                term = term * u_vals**a
            if b:
                term = term * du_vals**b
            if c:
                term = term * cu**c
            if d:
                term = term * cdu**d
            out = out + term
        return out

    def evaluate(
        self, u: SpectralField, out_cutoff: int | None = None
    ) -> SpectralField:
        """F(u, u_x, conj u, conj u_x) as an alias-free field.

        Default output keeps the full product bandwidth total_degree * K;
        pass ``out_cutoff`` (e.g. K) to truncate.
        """
        p = max(self.total_degree, 1)
        kfull = p * u.cutoff
        kout = kfull if out_cutoff is None else min(out_cutoff, kfull)
        if self.is_zero():
            return SpectralField.zeros(kout)
        m = _eval_grid(u.cutoff, p, kout)
        uv = u.to_samples(m)
        dv = derivative(u).to_samples(m)
        return SpectralField.from_samples(self.evaluate_values(uv, dv), kout)


def _eval_grid(cutoff: int, degree: int, out_cutoff: int) -> int:
    # Need M > degree*K + out_cutoff so no alias lands inside |k| <= out_cutoff.
    from .spectral import MAX_GRID_POINTS, _next_pow2

    m = _next_pow2(degree * cutoff + out_cutoff + 2)
    if m > MAX_GRID_POINTS:
        raise DealiasBudgetError(f"evaluation grid {m} exceeds budget")
    return m


def wirtinger_derivative(F: PolynomialNonlinearity, var: str) -> PolynomialNonlinearity:
    return F.wirtinger(var)


def theta_omega_mean(F: PolynomialNonlinearity, u: SpectralField) -> complex:
    """Mean (zeroth coefficient) of F_omega along u, as a complex number."""
    fo = F.wirtinger("omega")
    if fo.is_zero():
        return 0.0 + 0.0j
    p = max(fo.total_degree, 1)
    m = grid_size(u.cutoff, p)
    vals = fo.evaluate_values(u.to_samples(m), derivative(u).to_samples(m))
    return complex(np.mean(vals))


def criterion_functional(F: PolynomialNonlinearity, psi: SpectralField) -> float:
    """G(psi): normalized-mean of Im F_omega along psi.  Always real."""
    return float(theta_omega_mean(F, psi).imag)


@dataclass(frozen=True)
class CriterionVerdict:
    """Outcome of the randomized identity test of G == 0.

    ``satisfied`` is probabilistically sound: a nonzero functional is caught
    almost surely; when False the witness is exact (|G(witness)| > tolerance).
    """

    satisfied: bool
    witness: SpectralField | None
    witness_value: float
    trials: int
    tolerance: float


def structured_witnesses(max_mode: int = 2) -> list[SpectralField]:
    """Human-readable candidate fields: constants, single modes, two-mode combos."""
    out: list[SpectralField] = []
    thetas = [j * np.pi / 8 for j in range(16)]
    for r in (0.5, 1.0, 2.0):
        for th in thetas:
            out.append(SpectralField.constant(r * np.exp(1j * th), cutoff=1))
    amps = [1.0, np.exp(1j * np.pi / 4), 1j, 2.0]
    for k in range(1, max_mode + 1):
        for a in amps:
            out.append(SpectralField.from_modes({k: a}, max_mode))
            out.append(SpectralField.from_modes({-k: a}, max_mode))
    for c0 in (1.0, 1j):
        for c1 in (1.0, 1j, 0.5):
            for k in (1, 2):
                out.append(SpectralField.from_modes({0: c0, k: c1}, max_mode))
    out.append(SpectralField.from_modes({1: 1.0, -1: 1.0}, max_mode))
    out.append(SpectralField.from_modes({1: 1.0, -1: -1.0}, max_mode))
    return out


def check_wellposedness_condition(
    F: PolynomialNonlinearity,
    trials: int = 40,
    cutoffs: Iterable[int] = (2, 4, 8),
    tol: float = 1e-9,
    seed: int = 0,
    decay: float = 3.5,
) -> CriterionVerdict:
    """Decide whether G(psi) = 0 for all psi, by structured + random sampling.

    Structured witnesses run first so a failure is reported on a readable
    field; random trigonometric polynomials (coefficient decay <k>^{-decay})
    are sampled at each cutoff.  Deterministic in (seed, trials, cutoffs).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    best_val = 0.0
    best_field: SpectralField | None = None
    n_eval = 0
    for psi in structured_witnesses():
        g = criterion_functional(F, psi)
        n_eval += 1
        if abs(g) > abs(best_val):
            best_val, best_field = g, psi
        if abs(g) > tol:
            return CriterionVerdict(False, psi, g, n_eval, tol)
    rng = np.random.default_rng(seed)
    for cut in cutoffs:
        for _ in range(trials):
            psi = random_field(cut, decay, rng)
            g = criterion_functional(F, psi)
            n_eval += 1
            if abs(g) > abs(best_val):
                best_val, best_field = g, psi
            if abs(g) > tol:
                return CriterionVerdict(False, psi, g, n_eval, tol)
    return CriterionVerdict(True, None, best_val, n_eval, tol)


def derived_system_rhs(
    F: PolynomialNonlinearity, u: SpectralField, out_cutoff: int | None = None
) -> tuple[SpectralField, SpectralField, SpectralField]:
    """Coefficient fields of the equation for v = u_x, split as the flow splits them.

    Returns (theta_omega, theta_omega_bar, remainder) where theta_* are the
    omega-derivatives of F along u and the zeroth-order remainder is
    R = F_zeta(u,...) * v + F_zeta_bar(u,...) * conj v.
    """
    v = derivative(u)
    th_o = F.wirtinger("omega").evaluate(u, out_cutoff)
    th_ob = F.wirtinger("omega_bar").evaluate(u, out_cutoff)
    p = max(F.total_degree, 1)
    kfull = p * u.cutoff
    kout = kfull if out_cutoff is None else min(out_cutoff, kfull)
    m = _eval_grid(u.cutoff, p, kout)
    uv = u.to_samples(m)
    dv = derivative(u).to_samples(m)
    rz = F.wirtinger("zeta").evaluate_values(uv, dv)
    rzb = F.wirtinger("zeta_bar").evaluate_values(uv, dv)
    rvals = rz * dv + rzb * np.conj(dv)
    remainder = SpectralField.from_samples(rvals, kout)
    return th_o, th_ob, remainder


# -- presets and text format ---------------------------------------------------


def cubic(c: complex = 1j) -> PolynomialNonlinearity:
    """c * |u|^2 u  (independent of u_x, criterion holds for every c)."""
    return PolynomialNonlinearity.from_terms({(2, 0, 1, 0): c})


def example_b(c: complex = 1.0, m: int = 1) -> PolynomialNonlinearity:
    """c * u^m u_x; criterion holds iff c == 0."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return PolynomialNonlinearity.from_terms({(m, 1, 0, 0): c})


def example_c(c: complex = 1.0) -> PolynomialNonlinearity:
    """c * d/dx(|u|^2 u) = 2c |u|^2 u_x + c u^2 conj u_x; criterion holds iff c real."""
    return PolynomialNonlinearity.from_terms({(1, 1, 1, 0): 2 * c, (2, 0, 0, 1): c})


def example_d(c1: complex = 1.0, c2: complex = 2.0) -> PolynomialNonlinearity:
    """c1 (u_x)^2 conj u + c2 |u_x|^2 u; criterion holds iff Re(2 c1 - c2) == 0."""
    return PolynomialNonlinearity.from_terms({(0, 2, 1, 0): c1, (1, 1, 0, 1): c2})


def linear_transport(c: complex = 1j) -> PolynomialNonlinearity:
    """c * u_x; the c = i case has the exact solution with one-sided mode growth."""
    return PolynomialNonlinearity.from_terms({(0, 1, 0, 0): c})


_PRESETS = {
    "cubic": cubic,
    "example_b": example_b,
    "example_c": example_c,
    "example_d": example_d,
    "linear_transport": linear_transport,
}


def preset(name: str, **params) -> PolynomialNonlinearity:
    if name not in _PRESETS:
        raise KeyError(f"unknown preset {name!r}; have {sorted(_PRESETS)}")
    return _PRESETS[name](**params)


def parse_nonlinearity(text: str) -> PolynomialNonlinearity:
    """One term per line: ``a b c d re im`` (exponents, then the coefficient)."""
    terms: dict[Index, complex] = {}
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 6:
            raise ValueError(f"line {ln}: expected 'a b c d re im', got {line!r}")
        a, b, c, d = (int(p) for p in parts[:4])
        coeff = float(parts[4]) + 1j * float(parts[5])
        key = (a, b, c, d)
        terms[key] = terms.get(key, 0.0) + coeff
    return PolynomialNonlinearity.from_terms(terms)


def format_nonlinearity(F: PolynomialNonlinearity) -> str:
    lines = [
        f"{a} {b} {c} {d} {coeff.real:.17g} {coeff.imag:.17g}"
        for (a, b, c, d), coeff in F.terms
    ]
    return "\n".join(lines) + ("\n" if lines else "")
