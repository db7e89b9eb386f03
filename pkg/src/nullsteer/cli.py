"""Command-line front end.

    nullsteer run --config cfg.json --out outdir [--dump-states]
                  [--tie-tol X] [--grouping-tol X]
    nullsteer reproduce fig5 --out outdir

Exit codes: 0 success, 2 invalid or inapplicable configuration, 3 certain
detection (null conditioning impossible, reported with the step index),
4 numerical failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .charges import (
    DEFAULT_TIE_TOL,
    ZERO_CHARGE_THRESHOLD,
    charges as compute_charges,
    stationary_points,
    zeno_bound,
)
from .configio import build_model, load_config, resolve_detection, resolve_state
from .csvio import write_csv
from .errors import (
    BoundNotApplicableError,
    CertainDetectionError,
    ConfigError,
    NotApplicableError,
    NullsteerError,
)
from .evolution import (
    DEFAULT_DARK_OVERLAP_TOL,
    classify_regime,
    crossover_step,
    evolve,
)
from .figures import FIGURES
from .models import propagator, spectral_decompose
from .perturbation import (
    triple_charge_estimate,
    two_merge_estimate,
    weak_charge_estimate,
    zeno_time_estimate,
)
from .survival import build_survival, full_spectrum, merged_charge_config


def _pool_size():
    env = os.environ.get("NULLSTEER_THREADS", "")
    if env.strip():
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError(f"NULLSTEER_THREADS must be an integer, got {env!r}") from exc
        return max(1, n)
    return max(1, min(8, os.cpu_count() or 1))


def _map_in_order(fn, values):
    """Apply fn over values with a bounded pool; results in input order."""
    if len(values) == 1:
        return [fn(values[0])]
    with concurrent.futures.ThreadPoolExecutor(max_workers=_pool_size()) as pool:
        return list(pool.map(fn, values))


class _Runtime:
    """Resolved model machinery shared by the experiment runners."""

    def __init__(self, config, tie_tol=None, grouping_tol=None):
        tols = dict(config.tolerances)
        if tie_tol is not None:
            tols["tie_tol"] = tie_tol
        if grouping_tol is not None:
            tols["grouping_tol"] = grouping_tol
        self.config = config
        self.grouping_tol = tols.get("grouping_tol")
        self.tie_tol = tols.get("tie_tol", DEFAULT_TIE_TOL)
        self.zero_threshold = tols.get("zero_threshold", ZERO_CHARGE_THRESHOLD)
        self.dark_overlap_tol = tols.get("dark_overlap_tol", DEFAULT_DARK_OVERLAP_TOL)
        self.model = build_model(config)
        self.decomp = spectral_decompose(self.model, self.grouping_tol)
        self.psi_d = resolve_detection(config, self.model, self.decomp)

    def initial_state(self, tau):
        if self.config.initial_state is None:
            return None
        return resolve_state(
            self.config.initial_state, self.model, self.decomp, self.psi_d, tau
        )

    def spectrum(self, tau):
        return full_spectrum(
            self.model,
            self.psi_d,
            tau,
            grouping_tol=self.grouping_tol,
            tie_tol=self.tie_tol,
        )

    def charge_config(self, tau):
        return compute_charges(
            self.decomp, self.psi_d, tau, zero_threshold=self.zero_threshold
        )

    def resolved_tolerances(self):
        return {
            "grouping_tol": self.decomp.grouping_tol,
            "tie_tol": self.tie_tol,
            "zero_threshold": self.zero_threshold,
            "dark_overlap_tol": self.dark_overlap_tol,
        }


def _run_spectrum(rt, out_dir):
    spectrum = rt.spectrum(rt.config.tau_values[0])
    rows = []
    for t in spectrum.triples:
        rows.append(
            (
                t.kind,
                float(t.xi.real),
                float(t.xi.imag),
                float(abs(t.xi)),
                -1 if t.source_level is None else int(t.source_level),
                float(abs(np.vdot(t.left, t.right))),
            )
        )
    path = os.path.join(out_dir, "spectrum.csv")
    write_csv(
        path,
        ("class", "re_xi", "im_xi", "abs_xi", "source_level", "biorthogonal_overlap"),
        rows,
    )
    return [path]


def _run_charges(rt, out_dir):
    tau = rt.config.tau_values[0]
    config = rt.charge_config(tau)
    charge_rows = [
        (c.energy, c.p, float(c.phase.real), float(c.phase.imag))
        for c in config.charges
    ]
    charges_path = os.path.join(out_dir, "charges.csv")
    write_csv(charges_path, ("E_k", "p_k", "re_phase", "im_phase"), charge_rows)

    sp = stationary_points(merged_charge_config(config), tie_tol=rt.tie_tol)
    root_rows = [
        (
            float(r.real),
            float(r.imag),
            float(abs(r)),
            float(np.angle(r)),
            float(res),
        )
        for r, res in zip(sp.roots, sp.residuals)
    ]
    roots_path = os.path.join(out_dir, "roots.csv")
    write_csv(roots_path, ("re_xi", "im_xi", "abs_xi", "arg_xi", "residual"), root_rows)
    return [charges_path, roots_path]


def _run_evolve(rt, out_dir, dump_states):
    tau = rt.config.tau_values[0]
    psi_in = rt.initial_state(tau)
    if psi_in is None:
        raise ConfigError("experiment 'evolve' requires an initial_state")
    U = propagator(rt.decomp, tau)
    S = build_survival(U, rt.psi_d, tau=tau, source_decomp=rt.decomp)
    traj = evolve(S, psi_in, rt.config.n_steps, rt.model.hamiltonian)

    header = [
        "n",
        "mean_energy",
        "survival_amplitude",
        "cumulative_no_detection_probability",
        "phase",
    ]
    if dump_states:
        for label in rt.model.basis_labels:
            header += [f"re_{label}", f"im_{label}"]
    rows = []
    for n, rec in enumerate(traj.records):
        row = [
            n,
            rec.mean_energy,
            rec.survival_amplitude,
            rec.cumulative_no_detection_probability,
            rec.phase,
        ]
        if dump_states:
            for amp in rec.state:
                row += [float(amp.real), float(amp.imag)]
        rows.append(row)
    path = os.path.join(out_dir, "trajectory.csv")
    write_csv(path, tuple(header), rows)
    return [path]


def _regime_summary(rt, tau):
    spectrum = rt.spectrum(tau)
    psi_in = rt.initial_state(tau)
    regime = classify_regime(
        spectrum, psi_in, tie_tol=rt.tie_tol, dark_overlap_tol=rt.dark_overlap_tol
    )
    try:
        crossover = crossover_step(
            spectrum, psi_in, tie_tol=rt.tie_tol, dark_overlap_tol=rt.dark_overlap_tol
        )
    except NullsteerError:
        crossover = None
    return spectrum, regime, crossover


def _run_regime(rt, out_dir):
    if rt.config.tau_is_sweep:
        def worker(tau):
            _, regime, crossover = _regime_summary(rt, tau)
            energy = regime.predicted_energy
            return (
                tau,
                regime.kind,
                float("nan") if energy is None else float(energy),
                len(regime.dominant),
                -1 if crossover is None else crossover,
            )

        rows = _map_in_order(worker, list(rt.config.tau_values))
        path = os.path.join(out_dir, "regime_sweep.csv")
        write_csv(
            path,
            ("tau", "kind", "predicted_energy", "n_dominant", "crossover_step"),
            rows,
        )
        return [path]

    tau = rt.config.tau_values[0]
    _, regime, crossover = _regime_summary(rt, tau)
    payload = {
        "tau": tau,
        "kind": regime.kind,
        "predicted_energy": regime.predicted_energy,
        "oscillation": None,
        "dominant": [
            {"re_xi": t.xi.real, "im_xi": t.xi.imag, "abs_xi": abs(t.xi)}
            for t in regime.dominant
        ],
        "crossover_step": crossover,
    }
    if regime.oscillation is not None:
        payload["oscillation"] = {
            "energies": [float(e) for e in regime.oscillation["energies"]],
            "relative_phase": float(regime.oscillation["relative_phase"]),
        }
    path = os.path.join(out_dir, "regime.json")
    with open(path, "w", newline="") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return [path]


def _run_sweep_tau(rt, out_dir):
    def worker(tau):
        config = rt.charge_config(tau)
        merged = merged_charge_config(config)
        sp = stationary_points(merged, tie_tol=rt.tie_tol)
        mods = sorted((abs(r) for r in sp.roots), reverse=True)
        top = mods[0] if mods else float("nan")
        second = mods[1] if len(mods) > 1 else float("nan")
        lead = max(sp.roots, key=lambda r: (abs(r), r.real, r.imag), default=0j)
        n_circle = rt.model.dim - len(merged.active())
        try:
            bound = zeno_bound(rt.decomp, tau)[0]
        except BoundNotApplicableError:
            bound = float("nan")
        kind = ""
        if rt.config.initial_state is not None:
            kind = _regime_summary(rt, tau)[1].kind
        return (
            tau,
            float(lead.real),
            float(lead.imag),
            top,
            second,
            n_circle,
            bound,
            kind,
        )

    rows = _map_in_order(worker, list(rt.config.tau_values))
    path = os.path.join(out_dir, "sweep.csv")
    write_csv(
        path,
        (
            "tau",
            "re_xi_1",
            "im_xi_1",
            "abs_xi_1",
            "abs_xi_2",
            "n_circle",
            "zeno_lower_bound",
            "regime",
        ),
        rows,
    )
    return [path]


def _run_perturb(rt, out_dir):
    tau = rt.config.tau_values[0]
    options = rt.config.perturb
    scheme = options["scheme"]
    config = rt.charge_config(tau)
    if scheme == "weak_charge":
        est = weak_charge_estimate(config, options["weak_index"], decomp=rt.decomp)
    elif scheme == "two_merge":
        est = two_merge_estimate(
            config,
            options["index_a"],
            options["index_b"],
            decomp=rt.decomp,
            psi_d=rt.psi_d,
        )
    elif scheme == "triple_charge":
        est = triple_charge_estimate(
            config,
            options["center_index"],
            tuple(options["pair_indices"]),
            delta=options.get("delta"),
        )
    else:
        est = zeno_time_estimate(rt.decomp, tau, config=config)

    compare = bool(options.get("compare_exact", False))
    exact_roots = []
    if compare:
        exact_roots = list(stationary_points(merged_charge_config(config)).roots)

    rows = []
    for xi in est.xi_estimates:
        re_exact = im_exact = err = float("nan")
        if compare and exact_roots:
            if scheme == "zeno":
                exact = max(exact_roots, key=abs)
                exact = complex(abs(exact))
            else:
                exact = min(exact_roots, key=lambda r: abs(r - xi))
            re_exact, im_exact = float(exact.real), float(exact.imag)
            err = float(abs(xi - exact))
        rows.append(
            (
                est.scheme,
                est.small_parameter,
                float(xi.real),
                float(xi.imag),
                re_exact,
                im_exact,
                err,
            )
        )
    path = os.path.join(out_dir, "estimates.csv")
    write_csv(
        path,
        (
            "scheme",
            "small_parameter",
            "re_xi_estimate",
            "im_xi_estimate",
            "re_xi_exact",
            "im_xi_exact",
            "abs_error",
        ),
        rows,
    )
    return [path]


def _write_manifest(out_dir, payload):
    path = os.path.join(out_dir, "run_manifest.json")
    with open(path, "w", newline="") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return path


def run_experiment(config_path, out_dir, dump_states=False, tie_tol=None,
                   grouping_tol=None):
    """Execute one config; returns the list of files written."""
    started = time.monotonic()
    config = load_config(config_path)
    rt = _Runtime(config, tie_tol=tie_tol, grouping_tol=grouping_tol)
    os.makedirs(out_dir, exist_ok=True)

    if config.experiment == "spectrum":
        files = _run_spectrum(rt, out_dir)
    elif config.experiment == "charges":
        files = _run_charges(rt, out_dir)
    elif config.experiment == "evolve":
        files = _run_evolve(rt, out_dir, dump_states)
    elif config.experiment == "regime":
        files = _run_regime(rt, out_dir)
    elif config.experiment == "sweep-tau":
        files = _run_sweep_tau(rt, out_dir)
    else:
        files = _run_perturb(rt, out_dir)

    manifest = {
        "command": "run",
        "config_path": str(config_path),
        "config": config.raw,
        "experiment": config.experiment,
        "tau_values": list(config.tau_values),
        "n_steps": config.n_steps,
        "dump_states": bool(dump_states),
        "tolerances": rt.resolved_tolerances(),
        "versions": {
            "nullsteer": __version__,
            "numpy": np.__version__,
            "python": ".".join(map(str, sys.version_info[:3])),
        },
        "wall_time_s": time.monotonic() - started,
        "outputs": [os.path.basename(f) for f in files],
    }
    files.append(_write_manifest(out_dir, manifest))
    return files


def run_reproduce(figure_id, out_dir):
    started = time.monotonic()
    os.makedirs(out_dir, exist_ok=True)
    files = FIGURES[figure_id](out_dir)
    manifest = {
        "command": "reproduce",
        "figure": figure_id,
        "versions": {
            "nullsteer": __version__,
            "numpy": np.__version__,
            "python": ".".join(map(str, sys.version_info[:3])),
        },
        "wall_time_s": time.monotonic() - started,
        "outputs": [os.path.basename(f) for f in files],
    }
    files.append(_write_manifest(out_dir, manifest))
    return files


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="nullsteer",
        description="Repeated conditional null measurements on finite quantum systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment config")
    run_p.add_argument("--config", required=True, help="path to a JSON config")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--dump-states", action="store_true",
                       help="add per-component state columns to trajectory.csv")
    run_p.add_argument("--tie-tol", type=float, default=None,
                       help="override the dominant-eigenvalue tie tolerance")
    run_p.add_argument("--grouping-tol", type=float, default=None,
                       help="override the energy-level grouping tolerance")

    rep_p = sub.add_parser("reproduce", help="regenerate a bundled figure")
    rep_p.add_argument("figure_id", choices=sorted(FIGURES))
    rep_p.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            files = run_experiment(
                args.config,
                args.out,
                dump_states=args.dump_states,
                tie_tol=args.tie_tol,
                grouping_tol=args.grouping_tol,
            )
        else:
            files = run_reproduce(args.figure_id, args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NotApplicableError, BoundNotApplicableError) as exc:
        print(f"error: not applicable: {exc}", file=sys.stderr)
        return 2
    except CertainDetectionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (NullsteerError, np.linalg.LinAlgError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 4
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
