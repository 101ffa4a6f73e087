"""Command-line front end.

Subcommands
-----------
blocks        conjugation-block sizes (and optional anticommutation census)
lambdas       decay eigenvalues from block weights, closed-form vs census route
twirl-verify  brute-force group twirl of a channel vs its block average
simulate      run a benchmarking config; writes decay.csv + summary + manifest
fit           fit decay CSV(s); optional infidelity bounds; plot-ready curve
report        consolidate a run directory and compare fit vs prediction

Exit codes: 0 success, 2 configuration error, 3 enumeration/cap error,
4 numerical-diagnostic failure.  Every command is deterministic for a fixed
seed and config; only the manifest carries timestamps.  ``SUBRB_OUT_DIR``
sets the default output directory for ``simulate``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .analysis import estimate_infidelity, fit_single_exponential, fit_two_exponentials
from .channels import (
    PauliChannel,
    VARIANT_CNOT_L3,
    VARIANT_CNOT_L12,
    VARIANT_REAL,
    asymptotic_lambdas,
    block_eigenvalue,
    closed_form_lambdas,
    dense_group_twirl,
    twirl_to_blocks,
)
from .engine import DecayData, ExperimentConfig, run_experiment
from .errors import (
    CapExceededError,
    ConfigError,
    DegenerateFitError,
    NonUniformCensusError,
    SubrbError,
    VerificationError,
)
from .orbits import anticommutation_census, compute_blocks, decomposition_report
from .tableau import enumerate_group, group_by_name, unsigned_action_index

_VARIANTS = (VARIANT_REAL, VARIANT_CNOT_L12, VARIANT_CNOT_L3)


# -- small helpers ------------------------------------------------------------


def _canonical_json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_canonical_json(payload))


def _read_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"missing file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def _sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _parse_p(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError as exc:
        raise ConfigError(f"cannot parse block weights {text!r}: {exc}") from exc


def _fmt(x: float) -> str:
    return f"{x:.17g}"


# -- blocks -------------------------------------------------------------------


def cmd_blocks(args) -> int:
    group = group_by_name(args.group)
    d = compute_blocks(group, args.n)
    census = anticommutation_census(d) if args.census else None
    report = decomposition_report(d, census)
    print(f"group {group.name}, n = {args.n}")
    print(f"non-identity block sizes: {d.sizes}")
    if report["closed_form_sizes"] is not None:
        print(f"closed-form sizes:        {report['closed_form_sizes']}")
    for i, members in enumerate(report["blocks"]):
        label = "identity" if i == 0 else f"block {i}"
        shown = ", ".join(members[:8]) + (", ..." if len(members) > 8 else "")
        print(f"  {label:9s} ({len(members):3d}): {shown}")
    if census is not None:
        print("anticommutation census (rows: rep's block, cols: counted block):")
        for i, row in enumerate(census.matrix):
            print(f"  B{i}: {list(row)}")
    if args.out:
        _write_json(args.out, report)
        print(f"wrote {args.out}")
    return 0


# -- lambdas ------------------------------------------------------------------


def cmd_lambdas(args) -> int:
    group = group_by_name(args.group)
    d = compute_blocks(group, args.n)
    p = _parse_p(args.p)
    if len(p) != d.block_count - 1:
        raise ConfigError(
            f"{group.name} at n={args.n} has {d.block_count - 1} non-identity "
            f"blocks; got {len(p)} weights"
        )
    closed = closed_form_lambdas(group, args.n, p)
    census = anticommutation_census(d)
    from .channels import BlockChannel

    bc = BlockChannel(d, 1.0 - sum(p), tuple(p))
    census_route = [
        block_eigenvalue(bc, census, b) for b in range(1, d.block_count)
    ]
    deltas = [
        abs(a - b) if np.isfinite(a) and np.isfinite(b) else 0.0
        for a, b in zip(closed, census_route)
    ]
    report = {
        "group": group.name,
        "n_qubits": args.n,
        "p": list(p),
        "closed_form": [None if not np.isfinite(v) else v for v in closed],
        "census_based": [None if not np.isfinite(v) else v for v in census_route],
        "max_abs_delta": max(deltas) if deltas else 0.0,
    }
    try:
        report["asymptotic"] = asymptotic_lambdas(group, args.n, p)
    except ConfigError:
        report["asymptotic"] = None
    print(f"group {group.name}, n = {args.n}, p = {list(p)}")
    print(f"{'block':>6} {'closed form':>20} {'census route':>20} {'|delta|':>10}")
    for i, (a, b, dl) in enumerate(zip(closed, census_route, deltas), start=1):
        print(f"{i:>6} {a:>20.12f} {b:>20.12f} {dl:>10.2e}")
    if args.out:
        _write_json(args.out, report)
        print(f"wrote {args.out}")
    return 0


# -- twirl-verify -------------------------------------------------------------


def cmd_twirl_verify(args) -> int:
    group = group_by_name(args.group)
    chan = PauliChannel.load(args.channel)
    if chan.n_qubits != args.n:
        raise ConfigError(
            f"channel file is on {chan.n_qubits} qubits, --n says {args.n}"
        )
    d = compute_blocks(group, args.n)
    block_avg = twirl_to_blocks(chan, d).uniform_channel()
    if args.cap is not None:
        actions = unsigned_action_index(group, args.n, cap=args.cap)
    else:
        actions = unsigned_action_index(group, args.n)
    dense = dense_group_twirl(chan, actions)
    deviation = float(np.max(np.abs(dense.weights - block_avg.weights)))
    passed = deviation <= args.tol
    report = {
        "group": group.name,
        "n_qubits": args.n,
        "channel_file": os.path.basename(args.channel),
        "group_order": len(actions),
        "max_abs_deviation": deviation,
        "tolerance": args.tol,
        "passed": passed,
        "block_weights": [
            float(sum(chan.weights[i] for i in members))
            for members in d.blocks[1:]
        ],
    }
    print(
        f"group {group.name} (order {len(actions)}), n = {args.n}: "
        f"max |brute-force twirl - block average| = {deviation:.3e}"
    )
    print(f"{'PASS' if passed else 'FAIL'} (tolerance {args.tol:g})")
    if args.out:
        _write_json(args.out, report)
        print(f"wrote {args.out}")
    if not passed:
        raise VerificationError(
            f"twirl deviation {deviation:.3e} exceeds tolerance {args.tol:g}"
        )
    return 0


# -- simulate -----------------------------------------------------------------


def _config_hash(cfg: ExperimentConfig) -> str:
    canon = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def cmd_simulate(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    cfg_hash = _config_hash(cfg)
    out_dir = args.out or os.environ.get("SUBRB_OUT_DIR") or f"run_{cfg_hash[:8]}"
    os.makedirs(out_dir, exist_ok=True)

    data = run_experiment(cfg)

    config_path = os.path.join(out_dir, "config.json")
    csv_path = os.path.join(out_dir, "decay.csv")
    summary_path = os.path.join(out_dir, "summary.json")
    _write_json(config_path, cfg.to_dict())
    data.to_csv(csv_path)
    summary = data.summary()
    summary.update(
        {
            "group": cfg.group.name,
            "n_qubits": cfg.n_qubits,
            "measured_pauli": cfg.measured_pauli.to_string(),
            "shots_per_sequence": cfg.shots_per_sequence,
            "rng_seed": cfg.rng_seed,
            "config_sha256": cfg_hash,
        }
    )
    _write_json(summary_path, summary)

    outputs = []
    for path in (config_path, csv_path, summary_path):
        outputs.append(
            {
                "name": os.path.basename(path),
                "sha256": _sha256_file(path),
                "bytes": os.path.getsize(path),
            }
        )
    manifest = {
        "tool": "subrb",
        "version": __version__,
        "config_sha256": cfg_hash,
        "rng_seed": cfg.rng_seed,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "outputs": outputs,
    }
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)

    print(f"run {cfg.group.name} n={cfg.n_qubits} seed={cfg.rng_seed} -> {out_dir}")
    print(f"{'length':>7} {'mean':>12} {'stderr':>11}")
    for l, m, s in zip(data.lengths, data.mean, data.stderr):
        print(f"{l:>7d} {m:>12.8f} {s:>11.2e}")
    return 0


# -- fit ----------------------------------------------------------------------


def _fit_one(csv_path, model):
    data = DecayData.from_csv(csv_path)
    if model == "single":
        return data, fit_single_exponential(data)
    return data, fit_two_exponentials(data)


def _write_curve(path, data: DecayData, fit) -> None:
    fitted = fit.predict(data.lengths)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("length,observed,fitted\n")
        for l, obs, pred in zip(data.lengths, data.mean, fitted):
            fh.write(f"{l},{_fmt(obs)},{_fmt(pred)}\n")


def cmd_fit(args) -> int:
    csvs = args.csv
    if args.variant and not (args.group and args.n):
        raise ConfigError("--variant requires --group and --n")
    if args.variant == VARIANT_CNOT_L12:
        if len(csvs) != 2:
            raise ConfigError(
                f"{VARIANT_CNOT_L12!r} needs two decay CSVs (λ1 run, λ2 run)"
            )
    elif len(csvs) != 1:
        raise ConfigError("exactly one decay CSV expected (two only for the λ1λ2 variant)")
    if len(csvs) == 2 and args.model == "double":
        raise ConfigError("paired runs are fitted with one exponential each")

    out_dir = args.out or os.path.dirname(os.path.abspath(csvs[0]))
    os.makedirs(out_dir, exist_ok=True)

    fits = []
    for i, path in enumerate(csvs):
        data, fit = _fit_one(path, args.model)
        fits.append(fit)
        curve_name = "fit_curve.csv" if i == 0 else f"fit_curve_{i + 1}.csv"
        _write_curve(os.path.join(out_dir, curve_name), data, fit)
        print(f"{os.path.basename(path)}: ", end="")
        lam_txt = ", ".join(
            f"λ{j + 1}={lam:.8f}±{se:.2g}"
            for j, (lam, se) in enumerate(zip(fit.lambdas, fit.lambda_stderrs))
        )
        print(
            f"c0={fit.offset:.6f}  {lam_txt}  residual={fit.residual_norm:.3e}  "
            f"{'converged' if fit.converged else 'NOT CONVERGED'}"
        )

    report = {
        "model": args.model,
        "inputs": [os.path.basename(p) for p in csvs],
        "fits": [f.to_dict() for f in fits],
        "infidelity": None,
    }
    if args.variant:
        fit_arg = fits[0] if len(fits) == 1 else tuple(fits)
        est = estimate_infidelity(fit_arg, args.group, args.variant, args.n)
        report["infidelity"] = est.to_dict()
        print(
            f"infidelity ({args.variant}): p ∈ [{est.lower:.6g}, {est.upper:.6g}]"
            f"  point={est.point_estimate:.6g}±{est.point_stderr:.2g}"
            f"  worst-case factor {est.worst_case_factor:g}"
        )
    fit_path = os.path.join(out_dir, "fit.json")
    _write_json(fit_path, report)
    print(f"wrote {fit_path}")
    return 0


# -- report -------------------------------------------------------------------


def cmd_report(args) -> int:
    run_dir = args.run_dir
    if not os.path.isdir(run_dir):
        raise ConfigError(f"not a directory: {run_dir}")
    config_path = os.path.join(run_dir, "config.json")
    csv_path = os.path.join(run_dir, "decay.csv")
    if not os.path.exists(config_path) or not os.path.exists(csv_path):
        raise ConfigError(
            f"{run_dir} is not a run directory (need config.json and decay.csv)"
        )
    warnings: list[str] = []
    cfg = ExperimentConfig.from_dict(_read_json(config_path))
    cfg_hash = _config_hash(cfg)

    manifest_path = os.path.join(run_dir, "manifest.json")
    manifest = None
    if os.path.exists(manifest_path):
        manifest = _read_json(manifest_path)
        if manifest.get("rng_seed") != cfg.rng_seed:
            warnings.append(
                f"manifest rng_seed {manifest.get('rng_seed')} != config rng_seed "
                f"{cfg.rng_seed}; outputs may mix seeds"
            )
        if manifest.get("config_sha256") not in (None, cfg_hash):
            warnings.append("manifest config hash does not match config.json")
    else:
        warnings.append("manifest.json missing; provenance unchecked")

    data = DecayData.from_csv(csv_path)

    fit_path = os.path.join(run_dir, "fit.json")
    if os.path.exists(fit_path):
        fit_payload = _read_json(fit_path)
        fit_dict = fit_payload["fits"][0]
        infidelity = fit_payload.get("infidelity")
        lam_fit = fit_dict["lambdas"][0]
        lam_err = fit_dict["lambda_stderrs"][0]
    else:
        fit = fit_single_exponential(data)
        fit_dict = fit.to_dict()
        infidelity = None
        lam_fit = fit.lambdas[0]
        lam_err = fit.lambda_stderrs[0]

    # Analytic prediction for the measured Pauli's block, from the gate
    # channel alone (SPAM only rescales the decay amplitude).
    d = compute_blocks(cfg.group, cfg.n_qubits)
    census = anticommutation_census(d)
    bc = twirl_to_blocks(cfg.gate_channel, d)
    block = d.block_of_pauli(cfg.measured_pauli)
    lam_pred = block_eigenvalue(bc, census, block)
    try:
        closed = closed_form_lambdas(cfg.group, cfg.n_qubits, bc.block_weights)
        lam_closed = closed[block - 1]
    except ConfigError:
        lam_closed = None

    delta = abs(lam_fit - lam_pred)
    tolerance = 3.0 * lam_err + 1e-9  # absolute floor for noise-free runs
    passed = bool(delta <= tolerance)

    report = {
        "run_dir": os.path.basename(os.path.abspath(run_dir)),
        "config": cfg.to_dict(),
        "config_sha256": cfg_hash,
        "block_sizes": d.sizes,
        "block_weights": list(bc.block_weights),
        "measured_block": block,
        "lambda_predicted": lam_pred,
        "lambda_closed_form": lam_closed,
        "fit": fit_dict,
        "infidelity": infidelity,
        "comparison": {
            "lambda_fit": lam_fit,
            "lambda_predicted": lam_pred,
            "abs_delta": delta,
            "tolerance": tolerance,
            "passed": passed,
        },
        "warnings": warnings,
    }
    out_path = args.out or os.path.join(run_dir, "report.json")
    _write_json(out_path, report)

    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(
        f"block {block} of {cfg.group.name} n={cfg.n_qubits}: "
        f"fit λ = {lam_fit:.8f} ± {lam_err:.2g}, predicted λ = {lam_pred:.8f}"
    )
    print(
        f"{'PASS' if passed else 'FAIL'}: |Δ| = {delta:.2e} "
        f"{'≤' if passed else '>'} {tolerance:.2e}"
    )
    print(f"wrote {out_path}")
    if not passed:
        raise VerificationError(
            f"fitted λ deviates from prediction by {delta:.3e} (> {tolerance:.3e})"
        )
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subrb",
        description="Randomized-benchmarking workbench for restricted Clifford gate sets.",
    )
    parser.add_argument("--version", action="version", version=f"subrb {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_blocks = sub.add_parser("blocks", help="conjugation-block decomposition")
    p_blocks.add_argument("--group", required=True)
    p_blocks.add_argument("--n", type=int, required=True)
    p_blocks.add_argument("--census", action="store_true", help="include anticommutation census")
    p_blocks.add_argument("--out", help="write JSON report here")
    p_blocks.set_defaults(func=cmd_blocks)

    p_lam = sub.add_parser("lambdas", help="decay eigenvalues from block weights")
    p_lam.add_argument("--group", required=True)
    p_lam.add_argument("--n", type=int, required=True)
    p_lam.add_argument("--p", required=True, help="comma-separated block weights")
    p_lam.add_argument("--out", help="write JSON report here")
    p_lam.set_defaults(func=cmd_lambdas)

    p_tw = sub.add_parser("twirl-verify", help="brute-force twirl vs block average")
    p_tw.add_argument("--group", required=True)
    p_tw.add_argument("--n", type=int, required=True)
    p_tw.add_argument("--channel", required=True, help="channel JSON file")
    p_tw.add_argument("--tol", type=float, default=1e-12)
    p_tw.add_argument(
        "--cap", type=int, default=None, help="group enumeration cap override"
    )
    p_tw.add_argument("--out", help="write JSON report here")
    p_tw.set_defaults(func=cmd_twirl_verify)

    p_sim = sub.add_parser("simulate", help="run a benchmarking config")
    p_sim.add_argument("--config", required=True, help="JSON or TOML config file")
    p_sim.add_argument("--out", help="output directory (default $SUBRB_OUT_DIR or run_<hash>)")
    p_sim.add_argument("--seed", type=int, help="override the config rng_seed")
    p_sim.set_defaults(func=cmd_simulate)

    p_fit = sub.add_parser("fit", help="fit decay CSV(s)")
    p_fit.add_argument("--csv", nargs="+", required=True, help="decay CSV (two for the λ1λ2 variant)")
    p_fit.add_argument("--model", choices=("single", "double"), default="single")
    p_fit.add_argument("--group")
    p_fit.add_argument("--variant", choices=_VARIANTS)
    p_fit.add_argument("--n", type=int)
    p_fit.add_argument("--out", help="output directory (default: alongside the CSV)")
    p_fit.set_defaults(func=cmd_fit)

    p_rep = sub.add_parser("report", help="consolidate a run directory")
    p_rep.add_argument("--run-dir", required=True)
    p_rep.add_argument("--out", help="report path (default <run-dir>/report.json)")
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CapExceededError, NonUniformCensusError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (DegenerateFitError, VerificationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename or exc}", file=sys.stderr)
        return 2
    except (ConfigError, SubrbError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
