"""Detection of the one-sided ill-posedness mechanism.

When the mean of Im F_omega along the solution is nonzero, the equation for
the interaction variable

    Vhat(t,k) = e^{i|k|^alpha t} vhat(t,k),   v = u_x,

carries the non-dispersive term -(Im P0 T_w(t)) k Vhat(t,k): one frequency
half grows like e^{|k| m t} (the negative half when m > 0, the positive half
when m < 0) and the Cauchy problem has no solution for rough data on that
side.  A finite Galerkin system always has local solutions, so the observable
signature is two-sided: per-mode exponential rates on one half matching the
measured mean of Im P0 T_w, together with divergence between paired K and 2K
runs while a well-posed control converges under the same refinement.

The machinery implemented here:

  gauge_shift             removes the real mean transport by translating each
                          snapshot by the time integral of Re P0 T_w (a pure
                          phase in Fourier; amplitudes untouched);
  interaction_picture     conjugates v by the free flow;
  resonant_decomposition  splits the Vhat equation into directly bounded
                          convolution parts (near-diagonal pairs |k1| >=
                          |k2|/2), normal-form parts M_j with denominators
                          |k|^alpha -+ |k2|^alpha on the separated pairs, and
                          their time-derivative remainders K_j, with the time
                          derivatives substituted from the evolution equation
                          rather than finite-differenced;
  resonant_norm_audit     the weighted l2 bounds each part must satisfy on a
                          bounded run;
  directional_growth      per-mode log-linear rate fits and the paired
                          resolution-divergence metric;
  nonexistence_verdict    the two-sided classification.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .evolution import TrajectoryRecord, sup_l2_gap
from .nonlinearity import PolynomialNonlinearity, theta_omega_mean
from .spectral import (
    SpectralField,
    conjugate,
    derivative,
    pointwise_product,
    sobolev_norm,
    translate,
)

__all__ = [
    "gauge_shift",
    "interaction_picture",
    "ResonantParts",
    "resonant_decomposition",
    "decomposition_series",
    "PartNorms",
    "resonant_norm_audit",
    "GrowthReport",
    "directional_growth",
    "nonexistence_verdict",
    "Verdict",
    "probe_initial_data",
    "weighted_l2",
    "write_growth_csv",
    "verdict_json",
]


def gauge_shift(traj: TrajectoryRecord, F: PolynomialNonlinearity) -> TrajectoryRecord:
    """Translate snapshots by the cumulative integral of Re P0 T_w.

    Pure phase modulation per mode; every amplitude |uhat(t,k)| is preserved.
    Trajectories with purely imaginary mean (e.g. T_w = i|u|^2 flows) are
    returned unchanged up to roundoff.
    """
    t = traj.times
    m_re = np.array(
        [theta_omega_mean(F, u).real for u in traj.snapshots], dtype=float
    )
    if len(t) > 1:
        shift = np.concatenate(
            ([0.0], np.cumsum(0.5 * (m_re[1:] + m_re[:-1]) * np.diff(t)))
        )
    else:
        shift = np.zeros(1)
    snaps = [translate(u, a) for u, a in zip(traj.snapshots, shift)]
    return TrajectoryRecord(t.copy(), snaps, traj.config, traj.truncated)


def interaction_picture(
    traj: TrajectoryRecord,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(times, wavenumbers, Vhat) with Vhat[i, j] = e^{i|k_j|^alpha t_i} ik_j uhat."""
    alpha = traj.config.alpha
    ks = traj.snapshots[0].wavenumbers()
    phase_rate = np.abs(ks.astype(float)) ** alpha
    rows = []
    for t, u in zip(traj.times, traj.snapshots):
        rows.append(np.exp(1j * phase_rate * t) * (1j * ks) * u.coeffs)
    return traj.times.copy(), ks, np.asarray(rows)


# -- resonant decomposition ------------------------------------------------------


@dataclass
class ResonantParts:
    """The seven coefficient arrays of the Vhat equation at one time."""

    time: float
    k: np.ndarray
    n11: np.ndarray
    n21: np.ndarray
    n3: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    mean_im: float
    min_denominator_ratio: float  # min |Delta| / (|k1| |k2|^{alpha-1}) over used pairs

    def by_name(self) -> dict[str, np.ndarray]:
        return {
            "n11": self.n11,
            "n21": self.n21,
            "n3": self.n3,
            "m1": self.m1,
            "m2": self.m2,
            "k1": self.k1,
            "k2": self.k2,
        }


def _lookup(coeffs: np.ndarray, cutoff: int, k: np.ndarray) -> np.ndarray:
    """coeffs over -cutoff..cutoff evaluated at integer array k, zero outside."""
    inside = np.abs(k) <= cutoff
    idx = np.clip(k + cutoff, 0, 2 * cutoff)
    return np.where(inside, coeffs[idx], 0.0)


def _galerkin_time_derivative(
    u: SpectralField,
    F: PolynomialNonlinearity,
    alpha: float,
    eps: float,
    mean_re: float,
) -> SpectralField:
    """du/dt from the (gauge-shifted) evolution equation, truncated to the cutoff."""
    k = u.wavenumbers().astype(float)
    lin = (-1j * np.abs(k) ** alpha - eps * k**2) * u.coeffs
    theta = F.evaluate(u, out_cutoff=u.cutoff)
    transport = -mean_re * (1j * k) * u.coeffs
    return SpectralField(lin + theta.coeffs + transport, u.cutoff)


def resonant_decomposition(
    traj: TrajectoryRecord, F: PolynomialNonlinearity, t: float
) -> ResonantParts:
    """All seven arrays at recorded time t, output modes |k| <= cutoff.

    Expects a gauge-shifted trajectory (or one whose Re P0 T_w vanishes);
    the residual real mean is folded into the substituted time derivatives
    either way.  Sums run over the literal near-diagonal / separated index
    sets; zero denominators cannot occur on the separated set (asserted).
    """
    u = traj.snapshot_at(t)
    alpha = traj.config.alpha
    eps = traj.config.eps
    v = derivative(u)
    ks = u.wavenumbers()

    theta_o = F.wirtinger("omega").evaluate(u)
    theta_ob = F.wirtinger("omega_bar").evaluate(u)
    mean_theta = theta_o.coefficient(0)
    mean_im = float(mean_theta.imag)
    mean_re = float(mean_theta.real)

    dtu = _galerkin_time_derivative(u, F, alpha, eps, mean_re)
    dtv = derivative(dtu)

    # Chain rule through the equation for the inner time derivatives.
    def chain(theta_var: PolynomialNonlinearity) -> SpectralField:
        tz = theta_var.wirtinger("zeta").evaluate(u)
        tw = theta_var.wirtinger("omega").evaluate(u)
        tzb = theta_var.wirtinger("zeta_bar").evaluate(u)
        twb = theta_var.wirtinger("omega_bar").evaluate(u)
        out = SpectralField.zeros(0)
        for coef_field, darg in (
            (tz, dtu),
            (tw, dtv),
            (tzb, conjugate(dtu)),
            (twb, conjugate(dtv)),
        ):
            if coef_field.is_zero():
                continue
            full = coef_field.cutoff + darg.cutoff
            out = out + pointwise_product(coef_field, darg, out_cutoff=full)
        return out

    dtheta_o = chain(F.wirtinger("omega"))
    dtheta_ob = chain(F.wirtinger("omega_bar"))

    # Remainder R = T_z v + T_zb conj v and its free-flow phase.
    tz = F.wirtinger("zeta").evaluate(u)
    tzb = F.wirtinger("zeta_bar").evaluate(u)
    r_field = SpectralField.zeros(0)
    if not tz.is_zero():
        r_field = r_field + pointwise_product(tz, v, out_cutoff=tz.cutoff + v.cutoff)
    if not tzb.is_zero():
        r_field = r_field + pointwise_product(
            tzb, conjugate(v), out_cutoff=tzb.cutoff + v.cutoff
        )

    absk = np.abs(ks.astype(float))
    phase = np.exp(1j * absk**alpha * t)
    vhat = (1j * ks) * u.coeffs
    Vhat = phase * vhat
    dtVhat = phase * (1j * absk**alpha * vhat + dtv.coeffs)

    # Pair grids: rows = output k, cols = k2 (both over -K..K).
    kk = ks[:, None].astype(float)
    k2 = ks[None, :].astype(float)
    k1 = kk - k2
    k1_int = k1.astype(int)

    th = _lookup(theta_o.coeffs, theta_o.cutoff, k1_int)
    th_nz = np.where(k1_int != 0, th, 0.0)  # P_nonmean for the omega family
    dth = _lookup(dtheta_o.coeffs, dtheta_o.cutoff, k1_int)
    dth_nz = np.where(k1_int != 0, dth, 0.0)
    thb = _lookup(theta_ob.coeffs, theta_ob.cutoff, k1_int)
    dthb = _lookup(dtheta_ob.coeffs, dtheta_ob.cutoff, k1_int)

    V2 = Vhat[None, :]
    dV2 = dtVhat[None, :]
    Vm2 = np.conj(Vhat[::-1])[None, :]  # conj(Vhat(-k2)) aligned with k2
    dVm2 = np.conj(dtVhat[::-1])[None, :]

    d1 = np.abs(k1) >= np.abs(k2) / 2.0
    d2 = ~d1

    abs_k = np.abs(kk)
    abs_k2 = np.abs(k2)
    delta = abs_k**alpha - abs_k2**alpha
    sigma = abs_k**alpha + abs_k2**alpha

    # Separated pairs with k1 != 0 never have |k2| == |k|; assert before dividing.
    used_m1 = d2 & (k1_int != 0) & (th != 0)
    if np.any(used_m1 & (delta == 0.0)):
        raise AssertionError("zero denominator on the separated index set")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.abs(delta) / (np.abs(k1) * np.maximum(abs_k2, 1.0) ** (alpha - 1.0))
    min_ratio = float(np.min(ratio[used_m1])) if np.any(used_m1) else float("inf")

    exp_d = np.exp(1j * delta * t)
    exp_s = np.exp(1j * sigma * t)

    n11 = np.sum(np.where(d1, 1j * exp_d * th_nz * k2 * V2, 0.0), axis=1)
    n21 = np.sum(np.where(d1, 1j * exp_s * thb * k2 * Vm2, 0.0), axis=1)

    safe_delta = np.where(delta == 0.0, 1.0, delta)
    w1 = np.where(d2 & (k1_int != 0), exp_d / safe_delta, 0.0)
    m1 = np.sum(w1 * th_nz * k2 * V2, axis=1)
    k1_arr = -np.sum(w1 * (dth_nz * k2 * V2 + th_nz * k2 * dV2), axis=1)

    safe_sigma = np.where(sigma == 0.0, 1.0, sigma)
    w2 = np.where(d2, exp_s / safe_sigma, 0.0)
    m2 = np.sum(w2 * thb * k2 * Vm2, axis=1)
    k2_arr = -np.sum(w2 * (dthb * k2 * Vm2 + thb * k2 * dVm2), axis=1)

    n3 = phase * _lookup(r_field.coeffs, r_field.cutoff, ks)

    return ResonantParts(
        time=float(t),
        k=ks.copy(),
        n11=n11,
        n21=n21,
        n3=n3,
        m1=m1,
        m2=m2,
        k1=k1_arr,
        k2=k2_arr,
        mean_im=mean_im,
        min_denominator_ratio=min_ratio,
    )


def decomposition_series(
    traj: TrajectoryRecord, F: PolynomialNonlinearity, times=None
) -> list[ResonantParts]:
    ts = traj.times if times is None else times
    return [resonant_decomposition(traj, F, t) for t in ts]


def weighted_l2(values: np.ndarray, k: np.ndarray, s: float) -> float:
    w = (1.0 + k.astype(float) ** 2) ** s
    return float(np.sqrt(np.sum(w * np.abs(values) ** 2)))


@dataclass
class PartNorms:
    name: str
    weight: float
    norms: np.ndarray
    initial: float
    sup: float
    flagged: bool


def resonant_norm_audit(
    parts: list[ResonantParts],
    s: float,
    alpha: float,
    growth_multiple: float = 10.0,
    floor: float = 1e-10,
) -> dict[str, PartNorms]:
    """Weighted sup-in-time norms of the seven parts against their proved weights.

    n11, n21, n3 are measured in l2_{s-1}; m1, m2 in l2_{s+alpha-3};
    k1, k2 in l2_{s+min(-1, alpha-4)}.  A part is flagged when its sup
    exceeds growth_multiple times its initial size (identically small parts
    never flag).
    """
    weights = {
        "n11": s - 1.0,
        "n21": s - 1.0,
        "n3": s - 1.0,
        "m1": s + alpha - 3.0,
        "m2": s + alpha - 3.0,
        "k1": s + min(-1.0, alpha - 4.0),
        "k2": s + min(-1.0, alpha - 4.0),
    }
    out: dict[str, PartNorms] = {}
    for name, sig in weights.items():
        norms = np.array([weighted_l2(p.by_name()[name], p.k, sig) for p in parts])
        initial, sup = float(norms[0]), float(np.max(norms))
        if sup <= floor:
            flagged = False
        elif initial <= floor:
            flagged = True
        else:
            flagged = sup > growth_multiple * initial
        out[name] = PartNorms(name, sig, norms, initial, sup, flagged)
    return out


# -- growth fitting and the verdict ----------------------------------------------


@dataclass
class GrowthReport:
    side: str
    fit_window: tuple[float, float]
    mode_rates: dict[int, float]
    ratios: dict[int, float]  # rate / (-k), comparable to mean Im P0 T_w
    predicted_slope: float
    matching_run: int  # longest consecutive-mode run matching the prediction
    rate_tol: float
    divergence: float | None = None
    cutoff: int = 0


def directional_growth(
    traj: TrajectoryRecord,
    F: PolynomialNonlinearity,
    side: str = "minus",
    fit_window: tuple[float, float] | None = None,
    paired: TrajectoryRecord | None = None,
    rate_tol: float = 0.25,
    min_amplitude: float = 1e-13,
) -> GrowthReport:
    """Least-squares exponential rates of |uhat(t,k)| on one frequency half.

    The fitted rate of mode k divided by -k is compared against the window
    mean of Im P0 T_w; under the one-sided mechanism they agree on the
    growing half.  Modes dipping below min_amplitude are excluded.
    """
    if side not in ("plus", "minus"):
        raise ValueError("side must be 'plus' or 'minus'")
    tmax = float(traj.times[-1])
    if fit_window is None:
        fit_window = (0.05 * tmax, 0.3 * tmax)
    lo, hi = fit_window
    sel = np.where((traj.times >= lo) & (traj.times <= hi))[0]
    if len(sel) < 3:
        raise ValueError("fit window contains fewer than three snapshots")
    ts = traj.times[sel]
    ks = traj.snapshots[0].wavenumbers()
    amps = np.array([np.abs(traj.snapshots[i].coeffs) for i in sel])

    predicted = float(
        np.mean([theta_omega_mean(F, traj.snapshots[i]).imag for i in sel])
    )

    side_modes = [k for k in ks if (k < 0 if side == "minus" else k > 0)]
    side_modes.sort(key=abs)
    rates: dict[int, float] = {}
    ratios: dict[int, float] = {}
    for k in side_modes:
        col = amps[:, k + traj.config.cutoff]
        if np.min(col) < min_amplitude:
            continue
        slope = float(np.polyfit(ts, np.log(col), 1)[0])
        rates[k] = slope
        ratios[k] = slope / (-k)

    run = 0
    best = 0
    scale = max(abs(predicted), 1e-30)
    for k in side_modes:
        if k in ratios and abs(ratios[k] - predicted) <= rate_tol * scale:
            run += 1
            best = max(best, run)
        else:
            run = 0

    divergence = sup_l2_gap(traj, paired) if paired is not None else None
    return GrowthReport(
        side=side,
        fit_window=(float(lo), float(hi)),
        mode_rates=rates,
        ratios=ratios,
        predicted_slope=predicted,
        matching_run=best,
        rate_tol=rate_tol,
        divergence=divergence,
        cutoff=traj.config.cutoff,
    )


@dataclass
class Verdict:
    classification: str  # consistent_wellposed | directional_growth_detected | inconclusive
    side: str
    matching_run: int
    min_consecutive: int
    rate_tol: float
    divergence: float | None
    diverge_threshold: float
    agree_threshold: float
    control_divergence: float | None = None


def nonexistence_verdict(
    report: GrowthReport,
    control_divergence: float | None = None,
    min_consecutive: int = 5,
    diverge_threshold: float = 1e-3,
    agree_threshold: float = 1e-6,
) -> Verdict:
    """Two-sided classification from a growth report carrying a paired divergence.

    directional_growth_detected needs the rate match on >= min_consecutive
    consecutive modes AND paired-resolution divergence, with the optional
    control run still converging; agreement of the pair to agree_threshold
    yields consistent_wellposed; anything else is inconclusive.
    """
    if report.divergence is None:
        raise ValueError("report carries no paired-resolution divergence")
    detected = (
        report.matching_run >= min_consecutive
        and report.divergence > diverge_threshold
        and (control_divergence is None or control_divergence < agree_threshold)
    )
    if detected:
        cls = "directional_growth_detected"
    elif report.divergence < agree_threshold:
        cls = "consistent_wellposed"
    else:
        cls = "inconclusive"
    return Verdict(
        classification=cls,
        side=report.side,
        matching_run=report.matching_run,
        min_consecutive=min_consecutive,
        rate_tol=report.rate_tol,
        divergence=report.divergence,
        diverge_threshold=diverge_threshold,
        agree_threshold=agree_threshold,
        control_divergence=control_divergence,
    )


def probe_initial_data(
    witness: SpectralField,
    cutoff: int,
    s: float,
    side: str = "minus",
    rel_amplitude: float = 0.1,
    seed: int = 0,
) -> SpectralField:
    """Witness plus a rough one-sided tail, just outside H^{s + delta}.

    Tail coefficients <k>^{-s-1/2-0.01} e^{i theta_k} with random phases on
    the probed side, scaled to rel_amplitude of the witness L2 norm; the
    witness keeps the criterion mean bounded away from zero at t = 0.
    """
    rng = np.random.default_rng(seed)
    ks = np.arange(-cutoff, cutoff + 1)
    tail = np.zeros(2 * cutoff + 1, dtype=np.complex128)
    mask = ks < 0 if side == "minus" else ks > 0
    kk = ks[mask].astype(float)
    tail[mask] = (1.0 + kk**2) ** (-(s + 0.5 + 0.01) / 2.0) * np.exp(
        2j * np.pi * rng.random(mask.sum())
    )
    tail_field = SpectralField(tail, cutoff)
    tn = sobolev_norm(tail_field, 0.0)
    wn = sobolev_norm(witness, 0.0)
    if tn > 0 and wn > 0:
        tail_field = tail_field * (rel_amplitude * wn / tn)
    return witness.with_cutoff(cutoff) + tail_field


def write_growth_csv(report: GrowthReport, path) -> None:
    """CSV ``k,fitted_rate,predicted,relative_error``."""
    pred = report.predicted_slope
    with open(path, "w") as fh:
        fh.write("k,fitted_rate,predicted,relative_error\n")
        for k in sorted(report.mode_rates):
            rate = report.mode_rates[k]
            expected = -k * pred
            rel = abs(rate - expected) / max(abs(expected), 1e-30)
            fh.write(f"{k},{rate:.17g},{expected:.17g},{rel:.17g}\n")


def verdict_json(v: Verdict) -> str:
    """One-line machine-readable verdict with thresholds echoed."""
    payload = {
        "classification": v.classification,
        "side": v.side,
        "matching_run": v.matching_run,
        "min_consecutive": v.min_consecutive,
        "rate_tol": v.rate_tol,
        "divergence": v.divergence,
        "diverge_threshold": v.diverge_threshold,
        "agree_threshold": v.agree_threshold,
        "control_divergence": v.control_divergence,
    }
    return json.dumps(payload, sort_keys=True)
