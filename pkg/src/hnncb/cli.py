"""Command-line harness: generate instances, execute runs, audit, plot.

Subcommands: ``run`` (execute a config), ``audit`` (lemma checks on run
artifacts), ``plot`` (regret curves as SVG + CSV), ``gen`` (write an
instance to CSV), ``validate`` (metric axioms).  Exit codes: 0 ok,
1 usage/IO error, 2 audit failure.

Everything is seeded: running the same config twice produces byte-identical
artifacts, recorded with content hashes in a manifest.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from .agents import read_run_csv, regret_vs, run_exp3, run_hnn_cb, run_nan, run_nn_cb
from .audit import AnalysisConstants, MarginSpec, verify_lemmas
from .bandit import SubroutineParams
from .environments import (BoundaryCoverConfig, DiskPolicy, HalfspacePolicy,
                           TwoBallsConfig, gen_boundary_cover, gen_two_balls,
                           read_loss_csv, read_policy_csv, write_loss_csv,
                           write_policy_csv)
from .errors import HnncbError, NoData
from .metric import (MetricInstance, read_contexts_csv, read_matrix_csv,
                     validate_metric, write_contexts_csv)

_ENV_KEYS = {
    "two_balls": {"kind", "dim", "r", "T", "trials_per_ball", "gap", "seed",
                  "order"},
    "boundary_cover": {"kind", "dim", "T", "gap", "seed", "xi", "C",
                       "policy", "balls"},
}
_AGENT_KEYS = {
    "hnn": {"kind", "nu", "lam", "eta", "gamma", "theta", "label"},
    "nn": {"kind", "nu", "lam", "eta", "gamma", "theta", "label"},
    "exp3": {"kind", "lam", "eta", "gamma", "theta", "label"},
    "nan": {"kind", "nu", "lam", "eta", "gamma", "theta", "label",
            "rho_grid", "mode"},
}
_TOP_KEYS = {"env", "agents", "seeds", "out", "audit"}
_AUDIT_KEYS = {"sigmas", "margin"}


def _check_keys(block, allowed, where):
    unknown = set(block) - allowed
    if unknown:
        raise ValueError(f"unknown key(s) {sorted(unknown)} in {where}")


def load_config(path):
    """Parse and validate an experiment config; unknown keys are rejected."""
    with open(path, "r", encoding="utf-8") as fh:
        cfg = yaml.safe_load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("config must be a mapping")
    _check_keys(cfg, _TOP_KEYS, "top level")
    env = cfg.get("env")
    if not env or "kind" not in env:
        raise ValueError("config needs an env block with a kind")
    if env["kind"] not in _ENV_KEYS:
        raise ValueError(f"unknown env kind {env['kind']!r}")
    _check_keys(env, _ENV_KEYS[env["kind"]], f"env ({env['kind']})")
    for i, agent in enumerate(cfg.get("agents", [])):
        kind = agent.get("kind")
        if kind not in _AGENT_KEYS:
            raise ValueError(f"unknown agent kind {kind!r}")
        _check_keys(agent, _AGENT_KEYS[kind], f"agents[{i}]")
    if "audit" in cfg:
        _check_keys(cfg["audit"], _AUDIT_KEYS, "audit")
    cfg.setdefault("agents", [])
    cfg.setdefault("seeds", [0])
    return cfg


def _build_policy(block):
    kind = block.get("kind")
    if kind == "halfspace":
        return HalfspacePolicy(np.asarray(block["normal"], dtype=float),
                               float(block.get("offset", 0.0)))
    if kind == "disk":
        return DiskPolicy(np.asarray(block["center"], dtype=float),
                          float(block["radius"]))
    raise ValueError(f"unknown policy kind {kind!r}")


def build_env(env, seed_shift=0):
    """Instantiate the environment; the run seed shifts the env seed so each
    run sees an independent draw of the instance."""
    seed = int(env.get("seed", 0)) + int(seed_shift)
    if env["kind"] == "two_balls":
        per_ball = env.get("trials_per_ball", env.get("T", 256))
        cfg = TwoBallsConfig(dim=int(env.get("dim", 2)),
                             r=float(env.get("r", 1.0)),
                             trials_per_ball=int(per_ball),
                             gap=float(env.get("gap", 0.5)),
                             seed=seed,
                             order=env.get("order", "shuffled"))
        instance, y, model = gen_two_balls(cfg)
        margin_ids = []
    else:
        cfg = BoundaryCoverConfig(policy=_build_policy(env["policy"]),
                                  balls=[(np.asarray(b[:-1], dtype=float),
                                          float(b[-1])) for b in env["balls"]],
                                  xi=float(env.get("xi", 1.5)),
                                  C=float(env.get("C", 1.0)),
                                  T=int(env.get("T", 256)),
                                  dim=int(env.get("dim", 2)),
                                  seed=seed,
                                  gap=float(env.get("gap", 0.5)))
        instance, y, margin, model = gen_boundary_cover(cfg)
        margin_ids = [int(i) + 1 for i in np.nonzero(margin)[0]]
    return instance, y, model, margin_ids


def _agent_params(agent, T, K):
    return SubroutineParams.for_horizon(
        T, K, lam=float(agent.get("lam", 1.0)),
        eta=agent.get("eta"), gamma=agent.get("gamma"),
        theta=agent.get("theta"))


def execute_agent(agent, instance, y, model, seed):
    """Run one agent spec; returns a list of records."""
    params = _agent_params(agent, instance.T, instance.K)
    kind = agent["kind"]
    label = agent.get("label", kind)
    nu = float(agent.get("nu", 1.0))
    if kind == "hnn":
        return [run_hnn_cb(instance, model, nu, params, seed,
                           reference=y, label=label)]
    if kind == "nn":
        return [run_nn_cb(instance, model, nu, params, seed,
                          reference=y, label=label)]
    if kind == "exp3":
        return [run_exp3(instance, model, params, seed,
                         reference=y, label=label)]
    if kind == "nan":
        return run_nan(instance, model, nu, params,
                       rho_grid=[float(r) for r in agent["rho_grid"]],
                       mode=agent.get("mode", "per_rho"), seed=seed,
                       reference=y)
    raise ValueError(f"unknown agent kind {kind!r}")


def _run_one_seed(cfg, seed, outdir):
    """Worker: all agents for one seed, artifacts under outdir/seed<seed>/."""
    sub = Path(outdir) / f"seed{seed}"
    sub.mkdir(parents=True, exist_ok=True)
    instance, y, model, margin_ids = build_env(cfg["env"], seed_shift=seed)
    write_contexts_csv(sub / "contexts.csv", instance.contexts)
    write_policy_csv(sub / "policy.csv", y)
    write_loss_csv(sub / "means.csv", model.means)
    with open(sub / "margin.json", "w", encoding="utf-8") as fh:
        json.dump({"margin": margin_ids}, fh, sort_keys=True)
        fh.write("\n")
    written = ["contexts.csv", "policy.csv", "means.csv", "margin.json"]
    for agent in cfg["agents"]:
        for rec in execute_agent(agent, instance, y, model, seed):
            rec.regret = regret_vs(rec, y)
            base = f"{rec.label}-s{seed}"
            rec.to_csv(sub / f"{base}.csv")
            rec.to_json(sub / f"{base}.json")
            written.extend([f"{base}.csv", f"{base}.json"])
    return [f"seed{seed}/{name}" for name in written]


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def cmd_run(config_path, out=None, seeds=None, parallel=1):
    cfg = load_config(config_path)
    outdir = Path(out or cfg.get("out", "runs"))
    outdir.mkdir(parents=True, exist_ok=True)
    seed_list = seeds if seeds is not None else cfg["seeds"]
    if not cfg["agents"]:
        seed_list = []
    if parallel > 1 and len(seed_list) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=parallel) as ex:
            futures = [ex.submit(_run_one_seed, cfg, s, str(outdir))
                       for s in seed_list]
            names = [n for f in futures for n in f.result()]
    else:
        names = [n for s in seed_list for n in _run_one_seed(cfg, s, outdir)]
    manifest = {
        "config": cfg,
        "artifacts": {name: _sha256(outdir / name) for name in sorted(names)},
    }
    with open(outdir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {len(names)} artifact(s) to {outdir}")
    return 0


def _load_margin(margin_arg, sub, T):
    if margin_arg in (None, "empty"):
        return np.zeros(T, dtype=bool), None
    path = Path(margin_arg)
    if not path.is_absolute() and not path.exists():
        cand = sub / margin_arg
        if cand.exists():
            path = cand
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    mask = np.zeros(T, dtype=bool)
    for t in data.get("margin", []):
        mask[int(t) - 1] = True
    policy = np.asarray(data["policy"], dtype=int) if "policy" in data else None
    return mask, policy


def cmd_audit(run_dir, sigma=0.5, margin="empty"):
    run_dir = Path(run_dir)
    audited, failed = 0, 0
    for meta_path in sorted(run_dir.glob("seed*/*.json")):
        if meta_path.name == "margin.json":
            continue
        with open(meta_path, "r", encoding="utf-8") as fh:
            meta = json.load(fh)
        if meta.get("kind") != "hnn":
            continue
        sub = meta_path.parent
        contexts = read_contexts_csv(sub / "contexts.csv")
        instance = MetricInstance.from_contexts(contexts, K=meta["K"])
        means = read_loss_csv(sub / "means.csv")
        cols = read_run_csv(meta_path.with_suffix(".csv"))
        depths = cols["depth"].astype(int)
        parents = cols["parent"].astype(int)
        mask, policy = _load_margin(margin, sub, instance.T)
        if policy is None:
            policy = read_policy_csv(sub / "policy.csv")
        spec = MarginSpec(policy=policy, margin=mask)
        consts = AnalysisConstants(sigma=float(sigma),
                                   nu=float(meta["config"].get("nu", 1.0)))
        report = verify_lemmas(instance, depths, parents, spec, consts, means,
                               lam=meta["config"].get("lam"))
        out = sub / f"audit-{meta_path.stem}.json"
        report.to_json(out)
        audited += 1
        status = "ok" if report.ok else "FAIL"
        print(f"{meta_path.relative_to(run_dir)}: {status} "
              f"({len(report.checks)} checks) -> {out.name}")
        if not report.ok:
            failed += 1
            for chk in report.failed():
                print(f"  failed {chk.check_id}: {chk.witness}")
    if audited == 0:
        print("no hierarchical runs found to audit", file=sys.stderr)
        return 1
    return 2 if failed else 0


def _plot_series(run_paths):
    series = []
    for csv_path in run_paths:
        meta_path = csv_path.with_suffix(".json")
        label = csv_path.stem
        if meta_path.exists():
            with open(meta_path, "r", encoding="utf-8") as fh:
                meta = json.load(fh)
            label = f"{meta['label']}-s{meta['seed']}"
        cols = read_run_csv(csv_path)
        series.append((label, cols["trial"], cols["regret"]))
    series.sort(key=lambda s: s[0])
    return series


def _fit_final_decade(trials, regret):
    T = trials[-1]
    mask = trials >= max(T / 10.0, 2)
    x = np.log(trials[mask])
    yv = np.log(np.maximum(regret[mask], 1e-9))
    if len(x) < 2:
        return float("nan")
    slope = np.polyfit(x, yv, 1)[0]
    return float(slope)


def cmd_plot(run_dirs, out="plots", loglog=False):
    paths = []
    for entry in run_dirs:
        p = Path(entry)
        if p.is_dir():
            paths.extend(sorted(q for q in p.glob("**/*.csv")
                                if q.with_suffix(".json").exists()))
        elif p.suffix == ".csv":
            paths.append(p)
    series = _plot_series(paths)
    if not series:
        raise NoData("no runs with regret data found")
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)

    import matplotlib
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "hnncb"
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, trials, regret in series:
        slope = _fit_final_decade(trials, regret)
        ax.plot(trials, regret, label=f"{label} (slope {slope:.2f})")
    if loglog:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("trial")
    ax.set_ylabel("pseudo-regret")
    ax.legend(fontsize=8)
    fig.tight_layout()
    svg = outdir / "regret.svg"
    fig.savefig(svg, format="svg", metadata={"Date": None})
    plt.close(fig)

    csv_out = outdir / "regret.csv"
    with open(csv_out, "w", encoding="utf-8") as fh:
        fh.write("trial," + ",".join(label for label, *_ in series) + "\n")
        length = max(len(tr) for _, tr, _ in series)
        for i in range(length):
            row = [str(i + 1)]
            for _, tr, rg in series:
                row.append(repr(float(rg[i])) if i < len(tr) else "")
            fh.write(",".join(row) + "\n")
    print(f"wrote {svg} and {csv_out}")
    return 0


def cmd_gen(config_path, out):
    cfg = load_config(config_path)
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    instance, y, model, margin_ids = build_env(cfg["env"])
    write_contexts_csv(outdir / "contexts.csv", instance.contexts)
    write_policy_csv(outdir / "policy.csv", y)
    write_loss_csv(outdir / "means.csv", model.means)
    with open(outdir / "margin.json", "w", encoding="utf-8") as fh:
        json.dump({"margin": margin_ids}, fh, sort_keys=True)
        fh.write("\n")
    print(f"wrote instance with T={instance.T} to {outdir}")
    return 0


def cmd_validate(path):
    with open(path, "r", encoding="utf-8") as fh:
        head = fh.readline()
    if head.startswith("trial,"):
        instance = MetricInstance.from_contexts(read_contexts_csv(path), K=1)
    else:
        instance = MetricInstance.from_matrix(read_matrix_csv(path), K=1)
    report = validate_metric(instance)
    print(report.summary())
    return 0 if report.ok else 2


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="hnncb",
        description="hierarchical nearest-neighbour bandit harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--seed", type=int, action="append", default=None,
                       help="override the config seed list (repeatable)")
    p_run.add_argument("--parallel", type=int, default=1)

    p_audit = sub.add_parser("audit", help="lemma checks on run artifacts")
    p_audit.add_argument("run_dir")
    p_audit.add_argument("--sigma", type=float, default=0.5)
    p_audit.add_argument("--margin", default="empty",
                         help="'empty' or a JSON file with margin trial ids")

    p_plot = sub.add_parser("plot", help="regret curves as SVG + CSV")
    p_plot.add_argument("run_dirs", nargs="+")
    p_plot.add_argument("--out", default="plots")
    p_plot.add_argument("--loglog", action="store_true")

    p_gen = sub.add_parser("gen", help="write an instance to CSV")
    p_gen.add_argument("--config", required=True)
    p_gen.add_argument("--out", required=True)

    p_val = sub.add_parser("validate", help="check metric axioms of a CSV")
    p_val.add_argument("path")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.config, out=args.out, seeds=args.seed,
                           parallel=args.parallel)
        if args.command == "audit":
            return cmd_audit(args.run_dir, sigma=args.sigma, margin=args.margin)
        if args.command == "plot":
            return cmd_plot(args.run_dirs, out=args.out, loglog=args.loglog)
        if args.command == "gen":
            return cmd_gen(args.config, args.out)
        if args.command == "validate":
            return cmd_validate(args.path)
    except (HnncbError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
