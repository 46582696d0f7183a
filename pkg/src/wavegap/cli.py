"""Command-line entry point: norms, propagation, point values, data
factories, experiment sweeps and report merging.

Every run writes a manifest next to its outputs (config echo, input/output
paths with content checksums, wall time, grid parameters, seed).  Exit
codes: 0 for success / pass verdict, 2 for a fail verdict, 1 for errors.
Stdout carries machine-parseable JSON lines only.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import construct, experiment, field, norms, wave

ARTIFACT_VERSION = "0.1.0"


def _emit(obj):
    sys.stdout.write(json.dumps(obj) + "\n")


def _sha256(path):
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def _write_manifest(out_dir, name, sub, config, inputs, outputs, t0, seed=None,
                    grid=None):
    man = {
        "subcommand": sub,
        "config": config,
        "inputs": [str(p) for p in inputs],
        "outputs": [{"path": str(p), "sha256": _sha256(p)} for p in outputs],
        "artifact_version": ARTIFACT_VERSION,
        "wall_time_s": round(time.time() - t0, 3),
        "seed": seed,
        "grid": grid,
    }
    path = Path(out_dir) / f"{name}.manifest.json"
    path.write_text(json.dumps(man, indent=1))
    return path


def _load_config(path) -> dict:
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise FileNotFoundError(f"config file not found: {path}")
    sec = cp["run"] if cp.has_section("run") else cp["DEFAULT"]
    out = {}
    for key, val in sec.items():
        if key in ("deltas",):
            out[key] = tuple(float(v) for v in val.split(","))
        elif key in ("n", "grid_n", "seed", "jobs"):
            out[key] = int(val)
        elif key in ("lam", "mu", "r0", "grid_l", "t_step"):
            out[key] = float(val)
        elif key in ("negative_control",):
            out[key] = val.strip().lower() in ("1", "true", "yes")
        elif key == "target_params":
            out[key] = json.loads(val)
        else:
            out[key] = val
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_norms(args):
    f = field.load_field(args.infile)
    if args.method == "fourier":
        val = norms.sobolev_norm(f, args.s, homogeneous=args.homogeneous)
        _emit({"norm": val, "method": "fourier", "s": args.s,
               "homogeneous": args.homogeneous, "shells_used": None,
               "tail_estimate": None})
    else:
        val, shells = norms.besov_norm(f, args.s, args.p, args.q, return_shells=True)
        tail = shells[-1]["contribution"] / max(sum(sh["contribution"] for sh in shells), 1e-300)
        _emit({"norm": val, "method": "difference", "s": args.s, "p": args.p,
               "q": args.q, "shells_used": len(shells), "tail_estimate": tail})
    return 0


def cmd_propagate(args):
    t0 = time.time()
    u, ut, t_in = field.load_state(args.infile)
    state = wave.WaveState(u, ut, t_in)
    out = wave.spectral_propagate(state, args.t)
    field.save_state(out.u, out.ut, args.t, args.outfile)
    out_dir = Path(args.outfile).parent
    _write_manifest(out_dir, Path(args.outfile).stem, "propagate",
                    {"t": args.t}, [args.infile], [args.outfile], t0,
                    grid={"dim": u.grid.dim, "n": u.grid.n, "L": u.grid.half_width})
    _emit({"t": args.t, "outfile": str(args.outfile)})
    return 0


def _profile_from_spec(spec):
    kind, _, param = spec.partition(":")
    if kind == "gaussian":
        a = float(param or 1.0)
        return field.RadialProfile.from_callable(
            lambda r: np.exp(-a * np.asarray(r, float) ** 2), r_max=12.0, dim_hint=2), ()
    if kind in ("annulus_exact", "annulus_smooth"):
        fam = construct.delta_family(float(param))
        prof = (construct.psi_exact(fam) if kind == "annulus_exact"
                else construct.psi_smooth(fam))
        breaks = (fam.p, fam.q) if kind == "annulus_exact" else (fam.p1, fam.p, fam.q, fam.q1)
        return prof, breaks
    raise ValueError(f"unknown profile spec {spec!r}")


def cmd_pointvalue(args):
    prof, breaks = _profile_from_spec(args.profile)
    x = tuple(float(v) for v in args.x.split(",")) if args.x else (0.0,)
    if args.method == "kernel":
        val = wave.kernel_solution_2d(prof, args.t, np.asarray(x), tol=args.tol,
                                      breakpoints=breaks)
        err = args.tol
    elif args.method == "kirchhoff":
        prof3 = field.RadialProfile(prof.r_max, prof.samples, 3, exact=prof.exact)
        val, err = wave.kirchhoff_3d_origin(prof3), 0.0
    elif args.method == "evenrep":
        val, err = wave.radial_even_representation(prof, args.n, breaks), None
    elif args.method == "oddrep":
        val, err = wave.odd_n_boundary_value(prof, args.n), None
    else:
        raise ValueError(args.method)
    _emit({"method": args.method, "t": args.t, "x": list(x), "value": val,
           "err_est": err})
    return 0


def cmd_lemma1(args):
    t0 = time.time()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    deltas = [float(v) for v in args.deltas.split(",")]
    data = construct.focusing_sequence(args.n, deltas)
    rows, outputs = [], []
    for datum in data:
        tag = f"phi_n{args.n}_{datum.delta:g}"
        path = out_dir / f"{tag}.json"
        grid = field.TorusGrid(2, 4.0, 256) if args.n == 2 else field.TorusGrid(2, 4.0, 64)
        emb = field.radial_embed(datum.phi, grid)
        field.save_field(emb, path)
        outputs.append(path)
        row = {"delta": datum.delta, "norm": datum.norm,
               "z10": datum.z_value_at_10, "dimension": datum.dimension}
        if args.n == 2 and args.normalize:
            nz = construct.strip_normalize(datum)
            row.update({"t_j": nz.t_j, "m_j": nz.m_j})
        rows.append(row)
    man_path = out_dir / "lemma1.json"
    man_path.write_text(json.dumps(rows, indent=1))
    outputs.append(man_path)
    _write_manifest(out_dir, "lemma1", "lemma1",
                    {"n": args.n, "deltas": deltas}, [], outputs, t0)
    _emit({"rows": rows})
    return 0


def cmd_chi(args):
    t0 = time.time()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    chi = construct.chi_mean_zero(args.n)
    grid = field.TorusGrid(min(args.n, 2), 16.0, 256)
    emb = construct.chi_field(chi, grid)
    path = out_dir / f"chi_n{args.n}.field"
    field.save_field(emb, path)
    info = out_dir / f"chi_n{args.n}.json"
    info.write_text(json.dumps({"kappa": chi.kappa, "support_radius": 2.0,
                                "n": args.n}))
    _write_manifest(out_dir, f"chi_n{args.n}", "chi", {"n": args.n}, [],
                    [path, info], t0)
    _emit({"kappa": chi.kappa, "outfile": str(path)})
    return 0


def cmd_sweep(args):
    t0 = time.time()
    conf = _load_config(args.config)
    kind = conf.pop("kind", "gap")
    if getattr(args, "jobs", None):
        conf["jobs"] = args.jobs
    cfg = experiment.GapRunConfig(**conf)
    run = experiment.gap_run if kind == "gap" else experiment.certified_radial_run
    report = run(cfg)
    doc = {"kind": kind, "config_echo": report.config, "rows": report.rows,
           "constants": report.constants, "verdict": report.verdict,
           "verdict_detail": report.verdict_detail}
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=1))
    _write_manifest(out.parent, out.stem, "sweep", conf, [args.config], [out],
                    t0, seed=cfg.seed,
                    grid={"n": cfg.grid_n, "L": cfg.grid_l})
    _emit({"verdict": report.verdict, "out": str(out),
           "detail": report.verdict_detail})
    return 0 if report.verdict == "pass" else 2


def cmd_appendix(args):
    t0 = time.time()
    rep = experiment.appendix_ratio_suite(seed=args.seed, n_pairs=args.pairs)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(rep, indent=1))
    _write_manifest(out.parent, out.stem, "appendix", {"seed": args.seed},
                    [], [out], t0, seed=args.seed)
    _emit({"out": str(out), "multest_max": rep["multest_max"]})
    return 0


def cmd_scaling(args):
    t0 = time.time()
    rep = experiment.scaling_suite()
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(rep, indent=1))
    _write_manifest(out.parent, out.stem, "scaling", {}, [], [out], t0)
    _emit({"out": str(out), "slopes": {k: v["slope"] for k, v in rep["slopes"].items()}})
    return 0


def cmd_report(args):
    if not args.inputs:
        raise ValueError("no report files given")
    t0 = time.time()
    docs = []
    for p in args.inputs:
        doc = json.loads(Path(p).read_text())
        if "rows" not in doc:
            raise ValueError(f"schema mismatch: {p} has no rows")
        docs.append((Path(p).stem, doc))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "merged.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["delta"]
        for name, _ in docs:
            header += [f"{name}_data_distance", f"{name}_gap"]
        w.writerow(header)
        deltas = [r["delta"] for r in docs[0][1]["rows"]]
        for i, d in enumerate(deltas):
            row = [d]
            for _, doc in docs:
                row += [doc["rows"][i]["data_distance"], doc["rows"][i]["gap"]]
            w.writerow(row)
    dat_path = out_dir / "merged.dat"
    with open(dat_path, "w") as fh:
        fh.write("# delta" + "".join(f" {n}_dd {n}_gap" for n, _ in docs) + "\n")
        for i, d in enumerate(deltas):
            cols = [f"{d:.6g}"]
            for _, doc in docs:
                cols += [f"{doc['rows'][i]['data_distance']:.8g}",
                         f"{doc['rows'][i]['gap']:.8g}"]
            fh.write(" ".join(cols) + "\n")
    _write_manifest(out_dir, "report", "report", {}, args.inputs,
                    [csv_path, dat_path], t0)
    _emit({"csv": str(csv_path), "dat": str(dat_path)})
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="wavegap",
                                 description="wave-map solution-gap laboratory")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("norms", help="norm of a stored field")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--homogeneous", action="store_true")
    p.add_argument("--method", choices=("fourier", "difference"), default="fourier")
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("propagate", help="evolve a stored wave state")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("pointvalue", help="kernel/representation point values")
    p.add_argument("--method", choices=("kernel", "kirchhoff", "evenrep", "oddrep"),
                   required=True)
    p.add_argument("--profile", required=True,
                   help="gaussian:a | annulus_exact:delta | annulus_smooth:delta")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--x", default="")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_pointvalue)

    p = sub.add_parser("lemma1", help="write the concentrating data sequence")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--deltas", default="0.3,0.1,0.03")
    p.add_argument("--out", required=True)
    p.add_argument("--normalize", action="store_true",
                   help="also run the strip normalization (records t_j, m_j)")
    p.set_defaults(func=cmd_lemma1)

    p = sub.add_parser("chi", help="write the mean-zero reference bump")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_chi)

    p = sub.add_parser("sweep", help="run a gap experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="report.json")
    p.add_argument("--jobs", type=int, default=None,
                   help="parallel workers for the per-element pipelines")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("appendix", help="inequality ratio suite")
    p.add_argument("--out", default="appendix.json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pairs", type=int, default=100)
    p.set_defaults(func=cmd_appendix)

    p = sub.add_parser("scaling", help="rescaling-law sweep")
    p.add_argument("--out", default="scaling.json")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("report", help="merge reports into CSV/plot data")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--out-dir", default="reportdata")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        return args.func(args)
    except SystemExit as e:  # argparse errors carry their own code
        return 1 if e.code not in (0, None) else 0
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError, KeyError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
