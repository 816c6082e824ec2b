"""Command-line entry point: ``hingefnn <command> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..bpsk import Scheme, assemble_scheme, db_to_linear, generate_samples, optimal_detect, optimal_pe, test_set
from ..rng import derive_rng
from ..theory import (
    PeDecomposition,
    closed_form_pe,
    decompose_model,
    lemma1_indicator,
    simulate_pe_detailed,
    zero_norm_pe,
)
from ..training import check_gradients, random_gradcheck_case
from .config import ExperimentConfig, format_config, load_config
from .experiment import evaluate_model, scatter_table, train_experiment
from .io import load_checkpoint, load_dataset, save_checkpoint, save_dataset
from .reports import emit_reports

log = logging.getLogger("hingefnn")


def _csv_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def resolve_testset(spec: str, default_n: int = 50_000):
    """A CSV path, or ``seed=S[,n=N]`` to regenerate the evaluation set."""
    path = Path(spec)
    if path.exists():
        return load_dataset(path)
    if spec.startswith("seed="):
        opts = dict(part.split("=", 1) for part in spec.split(","))
        unknown = set(opts) - {"seed", "n"}
        if unknown:
            raise ValueError(f"unknown test-set options {sorted(unknown)}")
        return test_set(int(opts.get("n", default_n)), int(opts["seed"]))
    raise FileNotFoundError(f"test set {spec!r} is neither a file nor a seed=... spec")


def cmd_gen_data(args) -> int:
    data = assemble_scheme(args.scheme, args.per_snr_n, args.seed)
    save_dataset(data, args.out)
    print(f"wrote {len(data)} samples to {args.out}")
    return 0


def cmd_train(args) -> int:
    config = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    out = Path(args.out_dir or config.out_dir or "run")
    if args.out_dir:
        config = config.replace(out_dir=str(out))
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(format_config(config))
    model, report = train_experiment(config)
    save_checkpoint(model, out / "model.ckpt")
    testset = test_set(config.per_snr_test_n, config.seed)
    evaluation = evaluate_model(model, testset)
    emit_reports(out, train=report, evaluation=evaluation, scatter=scatter_table(model, testset),
                 title=f"K={config.depth}, H={config.half_width}, {config.scheme.value}")
    print(f"stopped at epoch {report.stop_epoch} ({report.stop_reason}); overall P_e {evaluation.overall_pe:.6f}")
    for r in evaluation.rows:
        print(f"  {r.snr_db:5.1f} dB  P_e {r.pe:.6f}  optimal {r.optimal_pe:.4e}")
    return 0


def cmd_eval(args) -> int:
    model = load_checkpoint(args.model)
    testset = resolve_testset(args.testset)
    evaluation = evaluate_model(model, testset)
    if args.out_dir:
        emit_reports(args.out_dir, evaluation=evaluation)
    print("snr_db,pe,optimal_pe,n")
    for r in evaluation.rows:
        print(f"{r.snr_db:g},{r.pe:.17g},{r.optimal_pe:.17g},{r.n}")
    print(f"# overall P_e {evaluation.overall_pe:.17g}")
    return 0


def cmd_scatter(args) -> int:
    model = load_checkpoint(args.model)
    table = scatter_table(model, resolve_testset(args.testset))
    files = emit_reports(args.out_dir, scatter=table, title=Path(args.model).stem)
    print("\n".join(str(f) for f in files))
    return 0


def cmd_gradcheck(args) -> int:
    worst, checked, excluded = 0.0, 0, 0
    for i in range(args.trials):
        rng = derive_rng(args.seed, "gradcheck", i)
        model, batch = random_gradcheck_case(rng, head="linear" if i % 2 == 0 else "tanh")
        res = check_gradients(model, batch)
        worst = max(worst, res.max_rel_error)
        checked += res.n_checked
        excluded += res.n_excluded
    ok = worst <= args.tol
    print(f"{'PASS' if ok else 'FAIL'} max relative error {worst:.3e} over {args.trials} models "
          f"({checked} weights checked, {excluded} excluded near kinks)")
    return 0 if ok else 1


def _canonical_vector(norm: float, dim: int) -> np.ndarray:
    y = np.zeros(dim)
    y[0] = norm
    return y


def cmd_oracle_pe(args) -> int:
    spec = json.loads(Path(args.spec).read_text())
    d = PeDecomposition(spec["H"], spec.get("alpha_init", 2.0), spec["norm_m1"], spec["norm_p1"],
                        spec["s_m1"], spec["s_p1"])
    dim = 2 * d.half_width
    y_m1 = spec.get("y_m1", _canonical_vector(d.norm_m1, dim))
    y_p1 = spec.get("y_p1", _canonical_vector(d.norm_p1, dim))
    sim = simulate_pe_detailed(d, y_m1, y_p1, args.draws, args.seed)
    cf = closed_form_pe(d)
    out = {
        "form": "per_vector",
        "closed_form_pe": cf,
        "simulated_pe": sim.pe,
        "simulated_stderr": sim.stderr,
        "z": (sim.pe - cf) / sim.stderr if sim.stderr > 0 else 0.0,
        "draws": sim.n_draws,
    }
    print(json.dumps(out, indent=1))
    return 0


def cmd_baseline(args) -> int:
    snrs = _csv_floats(args.snr_list)
    print("snr_db,optimal_pe" + (",empirical_pe,n" if args.samples else ""))
    for s in snrs:
        line = f"{s:g},{optimal_pe(db_to_linear(s)):.6e}"
        if args.samples:
            n = args.samples + args.samples % 2
            data = generate_samples(s, n, args.seed)
            errs = int(np.count_nonzero(optimal_detect(data.x) != data.labels))
            line += f",{errs / n:.6e},{n}"
        print(line)
    return 0


def _lemma1_check(seed: int) -> dict:
    grid = [(lab, phi) for lab in (-1, 1) for phi in (-1.0, -0.5, 0.0, 0.5, 1.0)]
    rng = derive_rng(seed, "lemma1")
    labels = rng.choice([-1, 1], size=100_000)
    phis = rng.normal(size=100_000)
    phis[:100] = 0.0
    a, b = lemma1_indicator(labels, phis)
    agree = all(lemma1_indicator(lab, p)[0] == lemma1_indicator(lab, p)[1] for lab, p in grid)
    return {"cases": len(grid) + len(labels), "all_agree": bool(agree and np.array_equal(a, b))}


def cmd_validate_theory(args) -> int:
    model = load_checkpoint(args.model)
    testset = resolve_testset(args.testset)
    result = {"lemma1": _lemma1_check(args.seed)}
    try:
        result["zero_norm"] = {"applicable": True, "pe": zero_norm_pe(model, testset)}
    except ValueError as exc:
        result["zero_norm"] = {"applicable": False, "reason": str(exc)}
    if model.init is None:
        result["scaling"] = {"applicable": False, "reason": "checkpoint has no init provenance"}
    else:
        dec = decompose_model(model, testset)
        result["scaling"] = {
            "form": "list_averaged, shifts held fixed",
            "pe": {f"x{f:g}": dec.scaled(f).pointwise_pe() for f in (1.0, 1e4, 1e6)},
        }
    print(json.dumps(result, indent=1))
    ok = result["lemma1"]["all_agree"] and (
        not result["zero_norm"]["applicable"] or result["zero_norm"]["pe"] == 1.0
    )
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hingefnn", description="Hinge-loss ReLU networks as BPSK detectors.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen-data", help="write a training-scheme dataset as CSV")
    s.add_argument("--scheme", choices=[v.value for v in Scheme], default=Scheme.ALL_SNR.value)
    s.add_argument("--per-snr-n", type=int, default=20_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen_data)

    s = sub.add_parser("train", help="train, evaluate and write reports")
    s.add_argument("--config")
    s.add_argument("--seed", type=int)
    s.add_argument("--out-dir")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", help="per-SNR error rates of a checkpoint")
    s.add_argument("--model", required=True)
    s.add_argument("--testset", required=True, help="CSV path or seed=S[,n=N]")
    s.add_argument("--out-dir")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("scatter", help="penultimate-norm scatter CSV and SVG")
    s.add_argument("--model", required=True)
    s.add_argument("--testset", required=True)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_scatter)

    s = sub.add_parser("gradcheck", help="backprop against central differences")
    s.add_argument("--trials", type=int, default=50)
    s.add_argument("--tol", type=float, default=1e-5)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_gradcheck)

    s = sub.add_parser("oracle-pe", help="closed-form vs simulated misclassification probability")
    s.add_argument("--spec", required=True, help="JSON with H, alpha_init, norm_m1, norm_p1, s_m1, s_p1")
    s.add_argument("--draws", type=int, default=10**6)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_oracle_pe)

    s = sub.add_parser("baseline", help="optimal-detector error probabilities")
    s.add_argument("--snr-list", default="0,5,10,15,20,25,30,35")
    s.add_argument("--samples", type=int, default=0, help="also simulate this many samples per SNR")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_baseline)

    s = sub.add_parser("validate-theory", help="error-indicator, zero-norm and norm-scaling checks")
    s.add_argument("--model", required=True)
    s.add_argument("--testset", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_validate_theory)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
