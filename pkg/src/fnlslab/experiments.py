"""Named experiment presets, artifact emission, and the machine-readable summary.

Each preset bundles a nonlinearity family, an initial-data recipe, evolution
defaults and the analyses that make sense for it:

  cubic             criterion check (holds for every coefficient), energy
                    audit, viscosity convergence rate;
  example_b         c u^m u_x: criterion fails for c != 0; growth probe;
  example_c         c (|u|^2 u)_x: criterion iff c real; audit or probe;
  example_d         c1 u_x^2 conj u + c2 |u_x|^2 u: criterion iff
                    Re(2 c1 - c2) = 0; audit or probe;
  linear_transport  c u_x: exact-solution regression, growth probe for c = i.

Paired-resolution probes evaluate the data recipe at each run's own cutoff:
the two runs approximate the same rough continuum datum, and the coarse run
is its sharp truncation.  Well-posed control pairs use a fast-decay tail so
the unresolved data tail sits far below the agreement threshold.

Every run writes into its artifact directory: trajectory CSVs with JSON
sidecars, energy/growth/ratio CSVs, gnuplot scripts for them, and a
summary.json of shape {preset, seed, analyses: [{name, pass, metrics}]} with
the effective configuration echoed for provenance.  Outputs are
byte-reproducible for a fixed seed.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from . import energy as energy_mod
from . import estimates as est_mod
from . import growth as growth_mod
from .evolution import (
    EvolutionConfig,
    eps_convergence_study,
    integrate,
    write_trajectory,
)
from .nonlinearity import (
    PolynomialNonlinearity,
    check_wellposedness_condition,
    format_nonlinearity,
    preset as nonlinearity_preset,
)
from .spectral import SpectralField, random_field, sobolev_norm, truncate_modes

__all__ = [
    "ExperimentPreset",
    "PRESETS",
    "regularity_threshold",
    "run",
    "sweep",
    "run_estimates",
    "paired_growth_probe",
    "parse_config_file",
    "parse_complex",
]


def regularity_threshold(alpha: float) -> float:
    """max(alpha/2 + 1, 5/2): the Sobolev index above which the theory applies."""
    return max(alpha / 2.0 + 1.0, 2.5)


def parse_complex(text: str) -> complex:
    """Accept '1', '-2.5', 'i', '-i', '2i', '1+2i' (j also works)."""
    t = text.strip().replace("i", "j")
    if t in ("j", "+j"):
        return 1j
    if t == "-j":
        return -1j
    return complex(t)


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    default_params: dict
    analyses: tuple[str, ...]
    alpha: float = 3.0
    eps: float = 0.0
    cutoff: int = 32
    dt: float = 2.5e-4
    horizon: float = 0.1
    record_every: int = 10


PRESETS: dict[str, ExperimentPreset] = {
    "cubic": ExperimentPreset(
        name="cubic",
        default_params={"c": 1j},
        analyses=("criterion", "energy_audit", "eps_rate"),
        eps=1e-2,
        dt=1e-3,
        horizon=0.25,
        record_every=25,
    ),
    "example_b": ExperimentPreset(
        name="example_b",
        default_params={"c": 1.0, "m": 1},
        analyses=("criterion", "dynamics"),
        horizon=0.18,
    ),
    "example_c": ExperimentPreset(
        name="example_c",
        default_params={"c": 1j},
        analyses=("criterion", "dynamics"),
    ),
    "example_d": ExperimentPreset(
        name="example_d",
        default_params={"c1": 1.0, "c2": 2.0},
        analyses=("criterion", "dynamics"),
        horizon=0.18,
    ),
    "linear_transport": ExperimentPreset(
        name="linear_transport",
        default_params={"c": 1j},
        analyses=("criterion", "linear_regression", "dynamics"),
        cutoff=64,
        dt=1e-3,
        horizon=1.0,
    ),
}


def _criterion_expected(name: str, params: dict) -> bool | None:
    """Known classification of a preset family; None for custom nonlinearities."""
    if params.get("_custom"):
        return None
    if name == "cubic":
        return True
    if name == "example_b":
        return params["c"] == 0
    if name == "example_c":
        return complex(params["c"]).imag == 0.0
    if name == "example_d":
        return (2 * complex(params["c1"]) - complex(params["c2"])).real == 0.0
    if name == "linear_transport":
        return complex(params["c"]).imag == 0.0
    raise KeyError(name)


def _known_witness(name: str, params: dict, cutoff: int, F=None, seed: int = 0) -> SpectralField:
    """The readable witness each family is known to violate the criterion on.

    Custom nonlinearities fall back to the checker's own witness.
    """
    if params.get("_custom"):
        verdict = check_wellposedness_condition(F, seed=seed)
        if verdict.witness is not None:
            return verdict.witness
        return SpectralField.constant(1.0, cutoff)
    if name == "example_b":
        c, m = complex(params["c"]), int(params["m"])
        val = c ** (-1.0 / m) * np.exp(1j * np.pi / (2 * m)) if c != 0 else 1.0
        return SpectralField.constant(val, cutoff)
    if name == "example_d":
        return SpectralField.from_modes({1: 1.0}, cutoff)
    # example_c and the linear flow are violated already on constants
    return SpectralField.constant(1.0, cutoff)


def _wellposed_sibling(name: str, params: dict) -> PolynomialNonlinearity:
    """A criterion-satisfying member of the same family, for control pairs."""
    if params.get("_custom"):
        return nonlinearity_preset("cubic", c=1j)
    if name == "example_c":
        return nonlinearity_preset(name, c=abs(complex(params["c"])))
    if name == "example_d":
        c1 = complex(params["c1"])
        return nonlinearity_preset(name, c1=c1, c2=2 * c1)
    if name == "linear_transport":
        return nonlinearity_preset(name, c=complex(params["c"]).real)
    return nonlinearity_preset("cubic", c=1j)


def _build_nonlinearity(name: str, params: dict) -> PolynomialNonlinearity:
    return nonlinearity_preset(name, **params)


# -- analyses -------------------------------------------------------------------


def _analysis_criterion(name, F, params, cfg, seed, out_dir):
    verdict = check_wellposedness_condition(F, seed=seed)
    expected = _criterion_expected(name, params)
    ok = True if expected is None else verdict.satisfied == expected
    metrics = {
        "satisfied": verdict.satisfied,
        "expected": expected,
        "witness_value": verdict.witness_value,
        "trials": verdict.trials,
        "tolerance": verdict.tolerance,
    }
    if verdict.witness is not None:
        metrics["witness"] = [
            [int(k), float(c.real), float(c.imag)]
            for k, c in zip(verdict.witness.wavenumbers(), verdict.witness.coeffs)
            if c != 0
        ]
    return ok, metrics


def _analysis_linear_regression(name, F, params, cfg, seed, out_dir):
    if params.get("_custom"):
        return True, {"skipped": "exact-solution regression applies to the preset formula only"}
    rng = np.random.default_rng(seed)
    k = cfg.cutoff
    ks = np.arange(-k, k + 1)
    phi = SpectralField(
        np.exp(-np.abs(ks).astype(float)) * np.exp(2j * np.pi * rng.random(2 * k + 1)),
        k,
    )
    traj = integrate(phi, F, cfg)
    write_trajectory(
        traj,
        os.path.join(out_dir, "linear_trajectory.csv"),
        os.path.join(out_dir, "linear_trajectory.json"),
        extra={"nonlinearity": format_nonlinearity(F)},
    )
    c = complex(params["c"])
    worst = 0.0
    for t, snap in zip(traj.times, traj.snapshots):
        exact = phi.coeffs * np.exp((-1j * np.abs(ks) ** cfg.alpha + 1j * c * ks) * t)
        nz = np.abs(exact) > 0
        rel = np.abs(snap.coeffs[nz] - exact[nz]) / np.abs(exact[nz])
        worst = max(worst, float(np.max(rel)))
    return worst <= 1e-8, {"sup_relative_error": worst, "tolerance": 1e-8}


def _smooth_small_data(cutoff: int, seed: int, amplitude: float = 0.2) -> SpectralField:
    # Band-limited inside cutoff // 2 so paired-resolution runs share the datum.
    rng = np.random.default_rng(seed)
    f = random_field(max(cutoff // 2, 2), 4.0, rng, amplitude=amplitude)
    return truncate_modes(f.with_cutoff(cutoff), max(cutoff // 2, 2))


def _analysis_energy_audit(name, F, params, cfg, seed, out_dir):
    r = regularity_threshold(cfg.alpha) + 0.1
    phi = _smooth_small_data(cfg.cutoff, seed)
    traj = integrate(phi, F, cfg)
    trace = energy_mod.energy_audit(traj, F, r)
    energy_mod.write_energy_csv(trace, os.path.join(out_dir, "energy_trace.csv"))
    _gnuplot_energy(os.path.join(out_dir, "energy_trace.gp"))
    ok = bool(np.all(trace.coercivity_ok)) and not traj.truncated
    return ok, {
        "coercivity_violations": int(np.sum(~trace.coercivity_ok)),
        "lipschitz": trace.lipschitz,
        "truncated": traj.truncated,
        "r": r,
        "ladder_depth": trace.ladder.depth,
    }


def _analysis_eps_rate(name, F, params, cfg, seed, out_dir):
    phi = _smooth_small_data(cfg.cutoff, seed)
    eps_list = [1e-1, 1e-2, 1e-3]
    table = eps_convergence_study(phi, F, cfg, eps_list)
    with open(os.path.join(out_dir, "eps_rate.csv"), "w") as fh:
        fh.write("eps_1,eps_2,sup_l2_diff\n")
        for e1, e2, d in table.pairs:
            fh.write(f"{e1:.17g},{e2:.17g},{d:.17g}\n")
    with open(os.path.join(out_dir, "eps_rate.gp"), "w") as fh:
        fh.write(
            "set datafile separator ','\n"
            "set key autotitle columnhead\n"
            "set logscale xy\n"
            "set xlabel '|eps_1 - eps_2|'\n"
            "plot 'eps_rate.csv' using (abs($1-$2)):3 with points title 'sup-t L2 gap'\n"
        )
    ok = (not math.isnan(table.beta)) and table.beta >= 0.45
    return ok, {"beta": table.beta, "eps_list": eps_list, "threshold": 0.45}


def paired_growth_probe(
    F: PolynomialNonlinearity,
    witness: SpectralField,
    cfg: EvolutionConfig,
    s: float,
    side: str = "minus",
    seed: int = 0,
    control: PolynomialNonlinearity | None = None,
    fit_window: tuple[float, float] | None = None,
):
    """Paired K / 2K runs from the same rough continuum datum, plus a verdict.

    The datum (witness + one-sided rough tail with phases from `seed`) is
    evaluated at each run's own cutoff.  When a control nonlinearity is given
    it runs on an identical-protocol pair with a fast-decay tail whose
    unresolved part is negligible, providing the convergence baseline.
    """
    k = cfg.cutoff
    phi_k = growth_mod.probe_initial_data(witness, k, s, side=side, seed=seed)
    phi_2k = growth_mod.probe_initial_data(witness, 2 * k, s, side=side, seed=seed)
    run_k = integrate(phi_k, F, cfg)
    run_2k = integrate(phi_2k, F, replace(cfg, cutoff=2 * k))

    control_div = None
    if control is not None:
        smooth_k = _control_data(witness, k, s, side, seed)
        smooth_2k = smooth_k.with_cutoff(2 * k)
        c_k = integrate(smooth_k, control, cfg)
        c_2k = integrate(smooth_2k, control, replace(cfg, cutoff=2 * k))
        from .evolution import sup_l2_gap

        control_div = sup_l2_gap(c_k, c_2k)

    report = growth_mod.directional_growth(
        run_k, F, side=side, paired=run_2k, fit_window=fit_window
    )
    verdict = growth_mod.nonexistence_verdict(report, control_divergence=control_div)
    return report, verdict, run_k, run_2k


def _control_data(witness, cutoff, s, side, seed):
    rng = np.random.default_rng(seed)
    tail = random_field(cutoff, s + 4.0, rng, amplitude=0.1, side=side, include_mean=False)
    wn = sobolev_norm(witness, 0.0)
    tn = sobolev_norm(tail, 0.0)
    if tn > 0 and wn > 0:
        tail = tail * (0.1 * wn / tn)
    return witness.with_cutoff(cutoff) + tail


def _analysis_growth_probe(name, F, params, cfg, seed, out_dir):
    s = regularity_threshold(cfg.alpha) + 0.1
    witness = _known_witness(name, params, 2, F=F, seed=seed)
    from .nonlinearity import theta_omega_mean

    mean0 = theta_omega_mean(F, witness).imag
    side = "minus" if mean0 >= 0 else "plus"
    control = _wellposed_sibling(name, params)
    report, verdict, run_k, run_2k = paired_growth_probe(
        F, witness, cfg, s, side=side, seed=seed, control=control
    )
    growth_mod.write_growth_csv(report, os.path.join(out_dir, "growth_rates.csv"))
    _gnuplot_growth(os.path.join(out_dir, "growth_rates.gp"))
    with open(os.path.join(out_dir, "verdict.json"), "w") as fh:
        fh.write(growth_mod.verdict_json(verdict) + "\n")
    write_trajectory(
        run_k,
        os.path.join(out_dir, "probe_trajectory.csv"),
        os.path.join(out_dir, "probe_trajectory.json"),
        extra={"nonlinearity": format_nonlinearity(F)},
    )
    expected = "directional_growth_detected"
    ok = verdict.classification == expected
    return ok, {
        "classification": verdict.classification,
        "expected": expected,
        "side": side,
        "matching_run": report.matching_run,
        "predicted_slope": report.predicted_slope,
        "divergence": report.divergence,
        "control_divergence": verdict.control_divergence,
    }


_ANALYSES = {
    "criterion": _analysis_criterion,
    "linear_regression": _analysis_linear_regression,
    "energy_audit": _analysis_energy_audit,
    "eps_rate": _analysis_eps_rate,
    "growth_probe": _analysis_growth_probe,
}


# -- run / sweep ------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (bool, int, float, str)) or x is None:
        return x
    return str(x)


def run(
    preset_name: str,
    out_dir: str,
    overrides: dict | None = None,
    nonlinearity: PolynomialNonlinearity | None = None,
    seed: int = 0,
    analyses: tuple[str, ...] | None = None,
) -> dict:
    """Execute a preset (or an explicit nonlinearity) and write its artifacts.

    Returns the summary dict; also written as summary.json.  Per-analysis
    failures are recorded, never raised; blowup is recorded, not fatal.
    """
    if preset_name not in PRESETS:
        raise KeyError(f"unknown preset {preset_name!r}; have {sorted(PRESETS)}")
    spec = PRESETS[preset_name]
    overrides = dict(overrides or {})
    params = dict(spec.default_params)
    for key in list(overrides):
        if key in params:
            params[key] = overrides.pop(key)
    cfg = EvolutionConfig(
        alpha=float(overrides.pop("alpha", spec.alpha)),
        eps=float(overrides.pop("eps", spec.eps)),
        cutoff=int(overrides.pop("modes", spec.cutoff)),
        dt=float(overrides.pop("dt", spec.dt)),
        horizon=float(overrides.pop("horizon", spec.horizon)),
        record_every=int(overrides.pop("record_every", spec.record_every)),
    )
    if overrides:
        raise ValueError(f"unknown overrides: {sorted(overrides)}")
    if nonlinearity is not None:
        F = nonlinearity
        params = dict(params, _custom=True)
    else:
        F = _build_nonlinearity(preset_name, params)
    os.makedirs(out_dir, exist_ok=True)

    results = []
    for analysis in analyses or spec.analyses:
        if analysis == "dynamics":
            # auto-dispatch: well-posed families get the energy audit, the
            # others the paired-resolution growth probe
            satisfied = check_wellposedness_condition(F, seed=seed).satisfied
            analysis = "energy_audit" if satisfied else "growth_probe"
        fn = _ANALYSES[analysis]
        try:
            ok, metrics = fn(preset_name, F, params, cfg, seed, out_dir)
        except Exception as exc:  # analysis failures are data, not crashes
            ok, metrics = False, {"error": f"{type(exc).__name__}: {exc}"}
        results.append({"name": analysis, "pass": bool(ok), "metrics": _jsonable(metrics)})

    summary = {
        "preset": preset_name,
        "seed": seed,
        "analyses": results,
        "config": _jsonable(
            {
                "alpha": cfg.alpha,
                "eps": cfg.eps,
                "modes": cfg.cutoff,
                "dt": cfg.dt,
                "horizon": cfg.horizon,
                "record_every": cfg.record_every,
                "params": {k: v for k, v in params.items() if k != "_custom"},
                "custom_nonlinearity": format_nonlinearity(F).strip().splitlines()
                if params.get("_custom")
                else None,
            }
        ),
    }
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def sweep(
    preset_name: str,
    axis: str,
    values: list,
    out_dir: str,
    overrides: dict | None = None,
    seed: int = 0,
) -> list[dict]:
    """Run a preset across parameter values; per-run failures stay isolated."""
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for i, value in enumerate(values):
        sub = os.path.join(out_dir, f"{axis}_{i:03d}")
        ov = dict(overrides or {})
        ov[axis] = value
        try:
            summary = run(preset_name, sub, overrides=ov, seed=seed)
            rows.append({"value": value, "summary": summary, "error": None})
        except Exception as exc:
            rows.append(
                {"value": value, "summary": None, "error": f"{type(exc).__name__}: {exc}"}
            )
    with open(os.path.join(out_dir, "sweep.csv"), "w") as fh:
        fh.write("value,analysis,pass\n")
        for row in rows:
            if row["summary"] is None:
                fh.write(f"{row['value']},error,0\n")
                continue
            for a in row["summary"]["analyses"]:
                fh.write(f"{row['value']},{a['name']},{int(a['pass'])}\n")
    with open(os.path.join(out_dir, "sweep.json"), "w") as fh:
        json.dump(_jsonable(rows), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return rows


def run_estimates(out_dir: str, seed: int = 0, quick: bool = False) -> dict:
    """The inequality stress lab: four estimates plus the cancellation exponent."""
    os.makedirs(out_dir, exist_ok=True)
    cutoffs = (16, 32, 64, 128) if quick else (16, 32, 64, 128, 256)
    spec = est_mod.EnsembleSpec(cutoffs=cutoffs, samples_per_cutoff=6, decay=2.0, seed=seed)
    jobs = [
        ("bilinear", {"s0": 0.0, "s1": 1.0, "s2": 1.0}),
        ("commutator", {"s": 1.0}),
        ("commutator", {"s": -1.0}),
        ("refined_commutator", {"s": 2.25}),
    ]
    reports = []
    checks = []
    for op, params in jobs:
        rep = est_mod.run_ensemble(op, spec, **params)
        ok, worst, slope = est_mod.bounded_constant_check(rep)
        reports.append(rep)
        checks.append(
            {
                "estimate": op,
                "params": _jsonable(params),
                "pass": bool(ok),
                "worst_growth": worst,
                "slope": slope,
            }
        )
    est_mod.write_ratio_csv(reports, os.path.join(out_dir, "estimate_ratios.csv"))
    with open(os.path.join(out_dir, "estimate_ratios.gp"), "w") as fh:
        fh.write(
            "set datafile separator ','\n"
            "set key autotitle columnhead\n"
            "set logscale x 2\n"
            "set xlabel 'cutoff'\n"
            "plot 'estimate_ratios.csv' using 2:3 with linespoints title 'max ratio'\n"
        )
    s_c = 2.25
    expo = est_mod.cancellation_exponent(s_c, cutoffs)
    cancel_ok = expo <= s_c - 2.0 + 0.2
    summary = {
        "preset": "estimates",
        "seed": seed,
        "analyses": checks
        + [
            {
                "name": "cancellation_exponent",
                "pass": bool(cancel_ok),
                "metrics": {"s": s_c, "exponent": expo, "bound": s_c - 1.8},
            }
        ],
    }
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


# -- config files and gnuplot ------------------------------------------------------


def parse_config_file(path) -> dict:
    """Flat key=value lines; '#' starts a comment."""
    out: dict = {}
    with open(path) as fh:
        for ln, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{ln}: expected key=value, got {raw!r}")
            key, val = (x.strip() for x in line.split("=", 1))
            out[key] = val
    return out


def _gnuplot_energy(path) -> None:
    with open(path, "w") as fh:
        fh.write(
            "set datafile separator ','\n"
            "set key autotitle columnhead\n"
            "set xlabel 't'\n"
            "set logscale y\n"
            "plot 'energy_trace.csv' using 1:2 with lines title 'E', \\\n"
            "     '' using 1:3 with lines title 'norm_u', \\\n"
            "     '' using 1:4 with lines title 'norm_v'\n"
        )


def _gnuplot_growth(path) -> None:
    with open(path, "w") as fh:
        fh.write(
            "set datafile separator ','\n"
            "set key autotitle columnhead\n"
            "set xlabel 'k'\n"
            "plot 'growth_rates.csv' using 1:2 with points title 'fitted', \\\n"
            "     '' using 1:3 with lines title 'predicted'\n"
        )
