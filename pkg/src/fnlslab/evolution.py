"""Time integration of the regularized flow in Fourier space.

The equation advanced is

    u_t + i D^alpha u - eps u_xx = F(u, u_x, conj u, conj u_x),  |k| <= K,

as a Galerkin system for the coefficients.  The scheme is an
integrating-factor Runge-Kutta 4: the stiff diagonal part
exp(t(-i|k|^alpha - eps k^2)) is applied exactly and classical RK4 handles the
transformed nonlinearity, so F = 0 reproduces the semigroup to roundoff.
Diagonal linear terms of F itself (the zeta and omega monomials of degree one,
Fourier multipliers c0 + i c1 k) are absorbed into the integrating factor as
well; this keeps single-multiplier flows such as transport exact instead of
leaving an O(dt^4) residual.

Runs that go nonfinite or exceed a configurable H^1 ceiling stop cleanly and
return a record flagged as truncated; ill-posed data must terminate
informatively, not crash.

Horizons are always user-set.  The guaranteed-existence-time formula of the
energy theory depends on an abstract constant that is not computable, so no
a-priori horizon is derived here; runs that outlive their welcome are caught
by the blowup ceiling instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .nonlinearity import PolynomialNonlinearity
from .spectral import SpectralField, sobolev_norm, truncate_modes, _next_pow2

__all__ = [
    "EvolutionConfig",
    "TrajectoryRecord",
    "linear_semigroup_apply",
    "integrate",
    "eps_convergence_study",
    "EpsConvergenceTable",
    "continuity_probe",
    "truncate_modes",  # sharp initial-data truncation, defined in spectral
    "suggested_dt",
    "sup_l2_gap",
    "write_trajectory",
    "read_trajectory",
]


@dataclass(frozen=True)
class EvolutionConfig:
    """Parameters of one run.  alpha > 2; eps >= 0 (eps = 0 is the Galerkin flow)."""

    alpha: float
    eps: float = 0.0
    cutoff: int = 64
    dt: float = 1e-3
    horizon: float = 1.0
    scheme: str = "IFRK4"
    record_every: int = 10
    blowup_ceiling: float = 1e6
    absorb_linear: bool = True

    def __post_init__(self):
        if not self.alpha > 2:
            raise ValueError("alpha must exceed 2")
        if self.eps < 0:
            raise ValueError("eps must be >= 0")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.horizon < self.dt:
            raise ValueError("horizon must be at least one step")
        if self.scheme != "IFRK4":
            raise ValueError(f"unsupported scheme {self.scheme!r}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    snapshots: list[SpectralField]
    config: EvolutionConfig
    truncated: bool = False

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if len(t) != len(self.snapshots):
            raise ValueError("times and snapshots length mismatch")
        if len(t) > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        k = self.config.cutoff
        if any(s.cutoff != k for s in self.snapshots):
            raise ValueError("snapshot cutoffs must equal the configured cutoff")
        self.times = t

    def snapshot_at(self, t: float) -> SpectralField:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"no snapshot recorded at t={t}")
        return self.snapshots[i]


def suggested_dt(cutoff: int, alpha: float, eps: float = 0.0, base: float = 1e-3) -> float:
    """Default step: 1e-3, shrunk like K^{-alpha/2} for eps = 0 runs.

    Not a stability bound (the linear part is exact); it controls the
    quadrature error of the oscillatory nonlinear integrand.
    """
    if eps > 0:
        return base
    return min(base, float(cutoff) ** (-alpha / 2.0))


def _multipliers(k: np.ndarray, alpha: float, eps: float) -> np.ndarray:
    return -1j * np.abs(k.astype(float)) ** alpha - eps * k.astype(float) ** 2


def linear_semigroup_apply(
    f: SpectralField, t: float, alpha: float, eps: float = 0.0
) -> SpectralField:
    """exp(t(-i D^alpha + eps d_xx)) f.  Backward heat (t < 0 with eps > 0) is refused."""
    if eps > 0 and t < 0:
        raise ValueError("t must be >= 0 when eps > 0")
    lam = _multipliers(f.wavenumbers(), alpha, eps)
    return SpectralField(f.coeffs * np.exp(t * lam), f.cutoff)


def _split_diagonal_linear(
    F: PolynomialNonlinearity,
) -> tuple[complex, complex, PolynomialNonlinearity]:
    """Extract c0*zeta + c1*omega (Fourier multiplier c0 + i c1 k) from F."""
    c0 = 0.0 + 0.0j
    c1 = 0.0 + 0.0j
    rest: dict = {}
    for idx, c in F.terms:
        if idx == (1, 0, 0, 0):
            c0 = c
        elif idx == (0, 1, 0, 0):
            c1 = c
        else:
            rest[idx] = c
    return c0, c1, PolynomialNonlinearity.from_terms(rest)


class _NonlinearRHS:
    """Cached padded-grid evaluator for the Galerkin nonlinearity on raw arrays."""

    def __init__(self, F: PolynomialNonlinearity, cutoff: int):
        self.F = F
        self.cutoff = cutoff
        p = max(F.total_degree, 1)
        self.m = _next_pow2(p * cutoff + cutoff + 2)
        ks = np.arange(-cutoff, cutoff + 1)
        self.idx = np.mod(ks, self.m)
        self.ik = 1j * ks.astype(float)

    def __call__(self, coeffs: np.ndarray) -> np.ndarray:
        if self.F.is_zero():
            return np.zeros_like(coeffs)
        buf = np.zeros(self.m, dtype=np.complex128)
        buf[self.idx] = coeffs
        u_vals = np.fft.ifft(buf) * self.m
        buf[self.idx] = coeffs * self.ik
        du_vals = np.fft.ifft(buf) * self.m
        vals = self.F.evaluate_values(u_vals, du_vals)
        hat = np.fft.fft(vals) / self.m
        return hat[self.idx]


def integrate(
    phi: SpectralField, F: PolynomialNonlinearity, cfg: EvolutionConfig
) -> TrajectoryRecord:
    """Advance the flow from phi; snapshots every record_every steps.

    The record is flagged truncated (never an exception) when the state goes
    nonfinite or its H^1 norm crosses cfg.blowup_ceiling.
    """
    k = cfg.cutoff
    if phi.cutoff > k:
        raise ValueError(f"initial data cutoff {phi.cutoff} exceeds config cutoff {k}")
    phi = phi.with_cutoff(k)

    ks = phi.wavenumbers()
    lam = _multipliers(ks, cfg.alpha, cfg.eps)
    if cfg.absorb_linear:
        c0, c1, F_rest = _split_diagonal_linear(F)
        lam = lam + c0 + 1j * c1 * ks.astype(float)
    else:
        F_rest = F
    rhs = _NonlinearRHS(F_rest, k)

    dt = cfg.dt
    nsteps = max(1, int(round(cfg.horizon / dt)))
    e_half = np.exp(lam * dt / 2.0)
    e_full = np.exp(lam * dt)

    sob_w = np.sqrt(1.0 + ks.astype(float) ** 2)  # H^1 weights

    u = phi.coeffs.copy()
    times = [0.0]
    snaps = [SpectralField(u, k)]
    truncated = False

    for step in range(1, nsteps + 1):
        n1 = rhs(u)
        a2 = e_half * (u + 0.5 * dt * n1)
        n2 = rhs(a2)
        a3 = e_half * u + 0.5 * dt * n2
        n3 = rhs(a3)
        a4 = e_full * u + dt * e_half * n3
        n4 = rhs(a4)
        u = e_full * u + (dt / 6.0) * (e_full * n1 + 2.0 * e_half * (n2 + n3) + n4)

        if not np.all(np.isfinite(u)) or np.linalg.norm(sob_w * u) > cfg.blowup_ceiling:
            truncated = True
            break
        if step % cfg.record_every == 0 or step == nsteps:
            times.append(step * dt)
            snaps.append(SpectralField(u, k))

    return TrajectoryRecord(np.asarray(times), snaps, cfg, truncated)


def sup_l2_gap(a: TrajectoryRecord, b: TrajectoryRecord) -> float:
    """sup over common recorded times of the L2 distance between the runs."""
    n = min(len(a.times), len(b.times))
    if not np.allclose(a.times[:n], b.times[:n]):
        raise ValueError("trajectories were recorded on different time grids")
    k = max(a.config.cutoff, b.config.cutoff)
    gap = 0.0
    for i in range(n):
        d = a.snapshots[i].with_cutoff(k) - b.snapshots[i].with_cutoff(k)
        gap = max(gap, sobolev_norm(d, 0.0))
    return gap


@dataclass
class EpsConvergenceTable:
    """Pairwise sup-in-time L2 differences across a viscosity family."""

    eps_values: tuple[float, ...]
    pairs: list[tuple[float, float, float]]  # (eps_i, eps_j, sup_t L2 diff)
    beta: float  # fitted exponent of diff ~ |eps_i - eps_j|^beta
    truncated: bool


def eps_convergence_study(
    phi: SpectralField,
    F: PolynomialNonlinearity,
    cfg: EvolutionConfig,
    eps_list: list[float],
) -> EpsConvergenceTable:
    """Run the flow for each eps and fit the vanishing-viscosity difference rate."""
    if len(eps_list) < 2:
        raise ValueError("need at least two eps values")
    runs = [integrate(phi, F, replace(cfg, eps=e)) for e in eps_list]
    truncated = any(r.truncated for r in runs)
    pairs = []
    xs, ys = [], []
    for i in range(len(eps_list)):
        for j in range(i + 1, len(eps_list)):
            d = sup_l2_gap(runs[i], runs[j])
            pairs.append((eps_list[i], eps_list[j], d))
            gap = abs(eps_list[i] - eps_list[j])
            if gap > 0 and d > 0:
                xs.append(math.log(gap))
                ys.append(math.log(d))
    beta = float("nan")
    if len(xs) >= 2 and max(xs) > min(xs):
        beta = float(np.polyfit(xs, ys, 1)[0])
    return EpsConvergenceTable(tuple(eps_list), pairs, beta, truncated)


def continuity_probe(
    phi: SpectralField,
    dpsi: SpectralField,
    F: PolynomialNonlinearity,
    cfg: EvolutionConfig,
) -> float:
    """Empirical Lipschitz ratio sup_t ||u[phi+dpsi] - u[phi]||_{H^1} / ||dpsi||_{H^1}."""
    denom = sobolev_norm(dpsi, 1.0)
    if denom == 0.0:
        return 0.0
    base = integrate(phi, F, cfg)
    pert = integrate(phi + dpsi, F, cfg)
    n = min(len(base.times), len(pert.times))
    k = max(base.config.cutoff, pert.config.cutoff)
    sup = 0.0
    for i in range(n):
        d = pert.snapshots[i].with_cutoff(k) - base.snapshots[i].with_cutoff(k)
        sup = max(sup, sobolev_norm(d, 1.0))
    return sup / denom


# -- storage -------------------------------------------------------------------


def write_trajectory(
    traj: TrajectoryRecord, csv_path, json_path=None, extra: dict | None = None
) -> None:
    """Long-format CSV ``t,k,re,im`` plus a JSON sidecar with config and flags."""
    with open(csv_path, "w") as fh:
        fh.write("t,k,re,im\n")
        for t, snap in zip(traj.times, traj.snapshots):
            for k, c in zip(snap.wavenumbers(), snap.coeffs):
                fh.write(f"{t:.17g},{k},{c.real:.17g},{c.imag:.17g}\n")
    if json_path is not None:
        meta = {
            "alpha": traj.config.alpha,
            "eps": traj.config.eps,
            "cutoff": traj.config.cutoff,
            "dt": traj.config.dt,
            "horizon": traj.config.horizon,
            "scheme": traj.config.scheme,
            "record_every": traj.config.record_every,
            "blowup_ceiling": traj.config.blowup_ceiling,
            "absorb_linear": traj.config.absorb_linear,
            "truncated": traj.truncated,
        }
        if extra:
            meta.update(extra)
        with open(json_path, "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")


def read_trajectory(csv_path, json_path) -> TrajectoryRecord:
    with open(json_path) as fh:
        meta = json.load(fh)
    cfg = EvolutionConfig(
        alpha=meta["alpha"],
        eps=meta["eps"],
        cutoff=meta["cutoff"],
        dt=meta["dt"],
        horizon=meta["horizon"],
        scheme=meta.get("scheme", "IFRK4"),
        record_every=meta.get("record_every", 10),
        blowup_ceiling=meta.get("blowup_ceiling", 1e6),
        absorb_linear=meta.get("absorb_linear", True),
    )
    k = cfg.cutoff
    by_time: dict[float, np.ndarray] = {}
    order: list[float] = []
    with open(csv_path) as fh:
        fh.readline()
        for line in fh:
            line = line.strip()
            if not line:
                continue
            t_s, k_s, re_s, im_s = line.split(",")
            t = float(t_s)
            if t not in by_time:
                by_time[t] = np.zeros(2 * k + 1, dtype=np.complex128)
                order.append(t)
            by_time[t][int(k_s) + k] = float(re_s) + 1j * float(im_s)
    snaps = [SpectralField(by_time[t], k) for t in order]
    return TrajectoryRecord(
        np.asarray(order), snaps, cfg, truncated=bool(meta.get("truncated", False))
    )
