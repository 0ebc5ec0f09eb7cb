"""Command-line entry point: simulate | fit | predict | attribute | diagnose | plot."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from . import attribution as attr
from . import diagnostics as diag
from .boosting import BoostConfig, forward_stagewise, ls_boost
from .config import RunConfig, load_config
from .core import ActiveSet, standardize
from .dataio import IngestError, align_columns, ingest_csv, load_model, read_features, save_model, split, split_sizes
from .plotting import emit_plot
from .simulation import METRIC_FIELDS, SimConfig, draw_dataset, run_experiment
from .tuning import mspe, validate_select
from .twostage import fit_families, write_family_csv

log = logging.getLogger("lassoboost")


def _csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def _json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _outdir(cfg):
    os.makedirs(cfg.out, exist_ok=True)
    return cfg.out


def _svg(cfg, csv_path, **kw):
    if cfg.svg:
        emit_plot(csv_path, os.path.splitext(csv_path)[0] + ".svg", **kw)


def cmd_simulate(cfg: RunConfig):
    """Run the SNR sweep and write metrics, manifest and per-metric plot data."""
    out = _outdir(cfg)
    sim = SimConfig(cfg.beta_type, cfg.n, cfg.p, cfg.s, cfg.rho, cfg.snr, cfg.replications, cfg.seed, cfg.methods,
                    cfg.tuning, cfg.fit_settings())
    res = run_experiment(sim, threads=cfg.threads)
    res.write_csv(os.path.join(out, "metrics.csv"))
    res.write_manifest(os.path.join(out, "manifest.json"))
    written = ["metrics.csv", "manifest.json"]
    for metric in METRIC_FIELDS[:4]:
        rows = []
        for snr in sim.snr:
            for m in sim.methods:
                mean = res.cells[(m, snr)].mean
                if mean is not None:
                    rows.append([snr, m, getattr(mean, metric), mean.correct_nonzeros])
        path = os.path.join(out, f"plot_{metric}.csv")
        _csv(path, ["snr", "method", "value", "correct_nonzeros"], rows)
        _svg(cfg, path, title=metric.upper())
        written.append(os.path.basename(path))
    return written


def _safe(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", label) or "group"


def _fit_group(cfg, index, label, data):
    seed = int(np.random.SeedSequence(cfg.seed, spawn_key=(index,)).generate_state(1)[0])
    n_train, n_val, n_test = split_sizes(data.n, cfg.split)
    if n_train < 2 or n_val < 1 or n_test < 1:
        return {"label": label, "skipped": f"{data.n} rows too few for the split"}
    train, val, test = split(data, cfg.split, seed)
    fams = fit_families(standardize(train), cfg.methods, cfg.fit_settings())
    results = {}
    for m, fam in fams.items():
        sel = validate_select(fam, val)
        results[m] = (sel, fam, mspe(sel.coef, test))
    return {"label": label, "sizes": (train.n, val.n, test.n), "results": results, "names": data.column_names}


def cmd_fit_predict(cfg: RunConfig):
    """Ingest, split, fit, tune on validation and score MSPE on test, per group when grouped."""
    if not cfg.input:
        raise SystemExit("fit needs 'input' in the config")
    out = _outdir(cfg)
    loaded = ingest_csv(cfg.input, cfg.response, cfg.group, cfg.drop)
    groups = loaded if isinstance(loaded, dict) else {"all": loaded}
    items = list(enumerate(groups.items()))

    def work(item):
        i, (label, data) = item
        return _fit_group(cfg, i, label, data)

    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            done = list(pool.map(work, items))
    else:
        done = [work(it) for it in items]

    report, scatter, skipped = [], [], []
    per_method = {m: {"mspe": [], "nnz": []} for m in cfg.methods}
    model_dir = os.path.join(out, "models")
    os.makedirs(model_dir, exist_ok=True)
    for i, g in enumerate(done):
        if "skipped" in g:
            skipped.append([g["label"], g["skipped"]])
            log.warning("group %s skipped: %s", g["label"], g["skipped"])
            continue
        for m in cfg.methods:
            sel, fam, err = g["results"][m]
            chosen = [g["names"][j] for j in np.flatnonzero(sel.coef.values)]
            report.append([g["label"], m, *g["sizes"], sel.error, err, float(np.sqrt(err)), sel.nnz, sel.q,
                           sel.stage2_index, ";".join(chosen)])
            scatter.append([i, g["label"], m, sel.nnz])
            per_method[m]["mspe"].append(err)
            per_method[m]["nnz"].append(sel.nnz)
            meta = {"group": g["label"], "q": sel.q, "stage2_index": sel.stage2_index,
                    "validation_mse": float(sel.error).hex(), "test_mspe": float(err).hex()}
            save_model(os.path.join(model_dir, f"{_safe(g['label'])}__{m}.json"), m, sel.coef, g["names"], meta)
            if cfg.group is None:
                write_family_csv(fam, os.path.join(out, f"family_{m}.csv"), g["names"])
    _csv(os.path.join(out, "report.csv"),
         ["group", "method", "n_train", "n_validation", "n_test", "validation_mse", "mspe", "root_mspe", "nnz", "q",
          "stage2_index", "selected"], report)
    summary = []
    for m in cfg.methods:
        e, k = per_method[m]["mspe"], per_method[m]["nnz"]
        if e:
            summary.append([m, len(e), float(np.mean(e)), float(np.median(e)), float(np.mean(k)),
                            float(np.median(k))])
        else:
            summary.append([m, 0, "", "", "", ""])
    _csv(os.path.join(out, "summary.csv"),
         ["method", "groups_completed", "mean_mspe", "median_mspe", "mean_nnz", "median_nnz"], summary)
    path = os.path.join(out, "model_size.csv")
    _csv(path, ["group_index", "group", "method", "nnz"], scatter)
    _svg(cfg, path, kind="scatter", x="group_index", y="nnz", series="method", title="model size")
    _csv(os.path.join(out, "skipped.csv"), ["group", "reason"], skipped)
    return ["report.csv", "summary.csv", "model_size.csv", "skipped.csv", "models/"]


def cmd_predict(cfg: RunConfig):
    """Apply a saved model to ``input``; scores MSPE when the response column is present."""
    if not cfg.model or not cfg.input:
        raise SystemExit("predict needs 'model' and 'input' in the config")
    out = _outdir(cfg)
    method, coef, names, _ = load_model(cfg.model)
    X, y = read_features(cfg.input, names, cfg.response)
    pred = coef.predict(X)
    _csv(os.path.join(out, "predictions.csv"), ["row", "prediction"], [[i, v] for i, v in enumerate(pred)])
    doc = {"method": method, "rows": int(X.shape[0])}
    if y is not None:
        err = float(np.mean((y - pred) ** 2))
        doc.update(mspe=err, root_mspe=float(np.sqrt(err)))
    _json(os.path.join(out, "prediction_summary.json"), doc)
    return ["predictions.csv", "prediction_summary.json"]


def _trajectories(cfg, data):
    for src in cfg.trajectory:
        if src == "lasso":
            yield "lasso", attr.lasso_trajectory(data, cfg.lambda_steps), {}
        elif src == "ls-boost":
            t = attr.boost_trajectory(data, cfg.boost_learning_rate, cfg.boost_iterations)
            bp = ls_boost(data, ActiveSet(range(data.X.shape[1])),
                          BoostConfig(cfg.boost_learning_rate, cfg.boost_iterations, "aicc"))
            yield "ls-boost", t, {"aicc_iteration": int(bp.k_star)}
        elif src == "file":
            if not cfg.trajectory_file:
                raise SystemExit("trajectory 'file' needs 'trajectory_file'")
            yield "file", attr.read_trajectory_csv(cfg.trajectory_file, data), {}
        else:
            raise SystemExit(f"unknown trajectory {src!r}")


def cmd_attribute(cfg: RunConfig):
    """Path-integrated-gradient attribution of lasso and LS-boost trajectories."""
    if not cfg.input:
        raise SystemExit("attribute needs 'input' in the config")
    out = _outdir(cfg)
    data = ingest_csv(cfg.input, cfg.response, drop=cfg.drop + ((cfg.group,) if cfg.group else ()))
    if cfg.subset:
        data = align_columns(data, cfg.subset)  # keeps the requested column order
    base = standardize(data).base  # demeaned and scaled
    names = base.column_names
    table, ftc = {}, {}
    written = []
    for src, traj, extra in _trajectories(cfg, base):
        G = attr.path_ig_matrix(traj, names)
        per = attr.per_parameter_attribution(G)
        s = attr.sapa(G)
        scpa, capa = attr.scpa_capa(G)
        L = traj.losses()
        tag = _safe(src)
        attr.write_matrix_csv(os.path.join(out, f"attribution_{tag}.csv"), G.G, names)
        _csv(os.path.join(out, f"sapa_{tag}.csv"), ["step", "sapa", "capa"],
             [[q + 1, a, b] for q, (a, b) in enumerate(zip(s, capa))])
        rows = [[q + 1, name, scpa[j, q]] for q in range(scpa.shape[1]) for j, name in enumerate(names)
                if not np.isnan(scpa[j, q])]
        path = os.path.join(out, f"scpa_{tag}.csv")
        _csv(path, ["step", "parameter", "share"], rows)
        _svg(cfg, path, x="step", y="share", series="parameter", title=f"SCPA {src}")
        path = os.path.join(out, f"sapa_{tag}.csv")
        _svg(cfg, path, x="step", y="sapa", series=None, title=f"SAPA {src}")
        table[src] = per
        ftc[src] = {"loss_start": float(L[0]), "loss_end": float(L[-1]), "total_attribution": G.total,
                    "discrepancy": attr.ftc_check(traj, G), "steps": traj.n_steps, **extra}
        written += [f"attribution_{tag}.csv", f"sapa_{tag}.csv", f"scpa_{tag}.csv"]
    srcs = list(table)
    _csv(os.path.join(out, "attribution_table.csv"), ["parameter", *srcs],
         [[name, *(table[s][j] for s in srcs)] for j, name in enumerate(names)])
    _json(os.path.join(out, "ftc.json"), ftc)
    return written + ["attribution_table.csv", "ftc.json"]


def cmd_diagnose(cfg: RunConfig):
    """Rate curves, bound audits and the scaled-loss rate table."""
    out = _outdir(cfg)
    rows = []
    summary = {"gamma_range": {}, "bound_holds": [], "fs_witness": [], "rate": {}}
    for rho in cfg.rhos:
        c = diag.eigen_curve(cfg.diag_n, rho, cfg.sizes, cfg.diag_epsilon, cfg.diag_replications, cfg.seed,
                             cfg.gamma_scaling, cfg.subsets)
        rows += c.rows()
        summary["gamma_range"][repr(rho)] = [float(c.gamma_all.min()), float(c.gamma_all.max())]
    path = os.path.join(out, "rate_curve.csv")
    diag.write_rows(path, diag.RATE_HEADER, rows)
    _svg(cfg, path, x="size", y="gamma_mean", series="rho", title="gamma by active-set size")

    sim = SimConfig(cfg.beta_type, cfg.n, cfg.p, cfg.s, cfg.rho, (cfg.rate_snr,), cfg.bound_instances, cfg.seed)
    bound_rows, fs_rows = [], []
    for rep in range(cfg.bound_instances):
        d = draw_dataset(sim, cfg.rate_snr, rep)
        full = ActiveSet(range(cfg.p))
        bp = ls_boost(d.train, full, BoostConfig(cfg.learning_rate, cfg.bound_steps, "fixed"))
        tr = diag.prediction_bound_terms(d.train, d.beta_star, bp)
        bound_rows += [[rep, *r] for r in tr.rows()]
        summary["bound_holds"].append(tr.holds())
        fp = forward_stagewise(d.train, full, BoostConfig(cfg.learning_rate, 500, "fixed"))
        for k in (50, 500):
            w = diag.fs_bound_terms(d.train, d.beta_star, fp, k)
            fs_rows.append([rep, k, w.witness, w.bound])
            summary["fs_witness"].append(w.witness >= 0)
    diag.write_rows(os.path.join(out, "bound_trace.csv"), ["instance", *diag.BOUND_HEADER], bound_rows)
    diag.write_rows(os.path.join(out, "fs_bound.csv"), ["instance", "k", "witness", "bound"], fs_rows)

    rate_rows = []
    for m in cfg.rate_methods:
        table = diag.rate_check(cfg.rate_ns, m, cfg.p, cfg.s, cfg.beta_type, cfg.rho, cfg.rate_snr,
                                cfg.rate_replications, cfg.seed, cfg.fit_settings())
        rate_rows += [[m, r.n, r.scaled_loss, r.scaled_gap, r.replications] for r in table]
        loss = [r.scaled_loss for r in table]
        gap = [r.scaled_gap for r in table]
        summary["rate"][m] = {"scaled_loss_ratio": max(loss) / min(loss), "scaled_gap_ratio": max(gap) / min(gap)}
    diag.write_rows(os.path.join(out, "rate_check.csv"),
                    ["method", "n", "n_inf_loss", "n_loss_gap", "replications"], rate_rows)
    _json(os.path.join(out, "diagnose.json"), summary)
    return ["rate_curve.csv", "bound_trace.csv", "fs_bound.csv", "rate_check.csv", "diagnose.json"]


def cmd_plot(cfg: RunConfig):
    if not cfg.plot_input:
        raise SystemExit("plot needs 'plot_input' in the config")
    out = _outdir(cfg)
    name = os.path.splitext(os.path.basename(cfg.plot_input))[0] + ".svg"
    emit_plot(cfg.plot_input, os.path.join(out, name), cfg.plot_kind, cfg.x, cfg.y, cfg.series)
    return [name]


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit_predict,
    "predict": cmd_predict,
    "attribute": cmd_attribute,
    "diagnose": cmd_diagnose,
    "plot": cmd_plot,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="lassoboost", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=(fn.__doc__ or "").strip().splitlines()[0] if fn.__doc__ else None)
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--method", action="append", help="method name (repeatable)")
        p.add_argument("--threads", type=int)
    return ap


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.out is not None:
        over["out"] = args.out
    if args.method:
        over["methods"] = tuple(args.method)
    if args.threads is not None:
        over["threads"] = args.threads
    return replace(cfg, **over)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = resolve_config(args)
        written = COMMANDS[args.command](cfg)
    except (IngestError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return 2
    for w in written:
        print(os.path.join(cfg.out, w))
    return 0


if __name__ == "__main__":
    sys.exit(main())
