"""Command-line front end.

    levyfield {params,simulate,scan,verify,fbs} --config run.json [--out DIR] [--threads N] [--seed S]

Exit codes: 0 success, 1 runtime failure, 2 violated model assumptions, 64 bad configuration.
"""
import argparse
import copy
import hashlib
import json
import sys
from pathlib import Path

import jsonschema
import numpy as np

from .errors import AssumptionViolation, ConfigError, LabError
from .exponents import (classify_region, hurst_indices, rectangent_normalization, tangent_normalization,
                        validate_assumptions)
from .field_sim import REPRESENTATIONS, RECT_SHEET, simulate_field
from .kernels import kernel_from_config
from .levy_basis import basis_from_config
from .limit_fields import FbsSpec, sample_fbs
from .scaling_lab import DEFAULT_LADDER, ExperimentSpec, scan_gamma, verify_limit_distribution

EXIT_OK, EXIT_RUNTIME, EXIT_ASSUMPTION, EXIT_CONFIG = 0, 1, 2, 64

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_point = {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 2, "maxItems": 2}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kernel", "basis", "output"],
    "properties": {
        "kernel": {
            "type": "object", "additionalProperties": False, "required": ["family"],
            "properties": {"family": {"type": "string"}, "params": {"type": "object"},
                           "initial_functions": {"type": ["string", "null"]}},
        },
        "basis": {
            "type": "object", "additionalProperties": False, "required": ["kind"],
            "properties": {"kind": {"type": "string"}, "params": {"type": "object"}},
        },
        "experiment": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["rectangent", "tangent"]},
                "gammas": {"type": "array", "items": _pos, "minItems": 1},
                "lambdas": {"type": "array", "items": _pos, "minItems": 3},
                "reps": {"type": "integer", "minimum": 1},
                "t0_ensemble": {"type": "integer", "minimum": 1},
                "t": _point,
                "statistic": {"type": "string"},
                "fine": {"type": "integer", "minimum": 8},
                "bootstrap": {"type": "integer", "minimum": 0},
                "samples": {"type": "integer", "minimum": 100},
            },
        },
        "grid": {
            "type": "object", "additionalProperties": False, "required": ["n1", "n2", "h1", "h2"],
            "properties": {"n1": {"type": "integer"}, "n2": {"type": "integer"}, "h1": _num, "h2": _num,
                           "fine": {"type": "integer"}, "truncation_radius": _pos,
                           "representation": {"enum": list(REPRESENTATIONS)}, "eps_tail": _pos,
                           "replication": {"type": "integer", "minimum": 0}},
        },
        "fbs": {
            "type": "object", "additionalProperties": False, "required": ["H1", "H2", "points"],
            "properties": {"H1": {"type": "number", "minimum": 0, "maximum": 1},
                           "H2": {"type": "number", "minimum": 0, "maximum": 1},
                           "points": {"type": "array", "items": _point, "minItems": 1},
                           "reps": {"type": "integer", "minimum": 1}},
        },
        "output": {
            "type": "object", "additionalProperties": False, "required": ["seed"],
            "properties": {"dir": {"type": "string"},
                           "formats": {"type": "array", "items": {"enum": ["csv", "json", "svg"]}},
                           "seed": {"type": "integer", "minimum": 0}},
        },
    },
}


# configuration ---------------------------------------------------------------

def load_config(path, seed=None) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    if seed is not None and isinstance(cfg.get("output"), dict):
        cfg["output"]["seed"] = int(seed)
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config invalid at {list(exc.absolute_path)}: {exc.message}") from exc
    return cfg


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


class Run:
    """Parsed configuration plus output helpers."""

    def __init__(self, cfg: dict, out=None, threads: int = 1):
        self.cfg = cfg
        self.hash = config_hash(cfg)
        self.seed = int(cfg["output"]["seed"])
        self.threads = max(1, int(threads))
        self.formats = cfg["output"].get("formats", ["csv", "json"])
        self.out = Path(out or cfg["output"].get("dir", "."))
        self.kernel = kernel_from_config(cfg["kernel"])
        self.basis = basis_from_config(cfg["basis"])
        self.exp = cfg.get("experiment", {})

    @property
    def stamp(self) -> dict:
        return {"config_sha256": self.hash, "seed": self.seed}

    def write_json(self, name, payload):
        self.out.mkdir(parents=True, exist_ok=True)
        doc = {**self.stamp, "config": self.cfg, **payload}
        (self.out / name).write_text(json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n")

    def write_csv(self, name, header, rows):
        self.out.mkdir(parents=True, exist_ok=True)
        lines = [f"# config_sha256={self.hash} seed={self.seed}", ",".join(header)]
        lines += [",".join(_cell(v) for v in row) for row in rows]
        (self.out / name).write_text("\n".join(lines) + "\n")

    def experiment_spec(self) -> ExperimentSpec:
        e = self.exp
        return ExperimentSpec(
            self.kernel, self.basis, mode=e.get("mode", "rectangent"),
            gammas=tuple(e.get("gammas", (0.5, 0.75, 1.0, 1.5, 2.0))),
            lambdas=tuple(e.get("lambdas", DEFAULT_LADDER)), t0_ensemble=e.get("t0_ensemble", 1),
            replications=e.get("reps", 500), statistic=e.get("statistic"), t=tuple(e.get("t", (1.0, 1.0))),
            seed=self.seed, fine=e.get("fine", 256), threads=self.threads, bootstrap=e.get("bootstrap", 200))


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x)}")


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "pass" if v else "fail"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _svg(path, draw):
    """Write an SVG with matplotlib (optional dependency)."""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed; skipping SVG output", file=sys.stderr)
        return
    matplotlib.rcParams["svg.hashsalt"] = "levyfield"
    fig, ax = plt.subplots(figsize=(5, 4))
    draw(fig, ax)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# commands ------------------------------------------------------------------------

def cmd_params(run: Run) -> int:
    mode = run.exp.get("mode", "rectangent")
    prof = run.kernel.profile(run.basis.alpha)
    violations = validate_assumptions(prof, mode)
    print(f"orders q = ({prof.q1:g}, {prof.q2:g}), chi = {prof.chi:g}, alpha = {prof.alpha:g}")
    print(f"Q = {prof.Q:.6g}  p = ({prof.p1:.6g}, {prof.p2:.6g})  P = {prof.P:.6g}  gamma0 = {prof.gamma0:.6g}")
    payload = {"profile": prof.__dict__, "violations": violations, "mode": mode}
    if violations:
        print("violated assumptions:")
        for v in violations:
            print(f"  {v}")
        if "json" in run.formats:
            run.write_json("params.json", payload)
        return EXIT_ASSUMPTION
    gammas = run.exp.get("gammas", (0.5, 0.75, 1.0, 1.5, 2.0))
    table = []
    if mode == "rectangent":
        lab = classify_region(prof)
        hi = hurst_indices(prof)
        print(f"region {lab.region}: V- = {lab.v_minus_kind} {lab.hurst_pair_minus}, "
              f"V+ = {lab.v_plus_kind} {lab.hurst_pair_plus}")
        print(f"H_a1 = {hi.H_a1:.6g}  H_a2 = {hi.H_a2:.6g}  Ht_a1 = {hi.Ht_a1:.6g}  Ht_a2 = {hi.Ht_a2:.6g}")
        payload.update(region=lab.__dict__, hurst=hi.__dict__)
        norm = rectangent_normalization
    else:
        norm = tangent_normalization
    print("gamma  H(gamma)")
    for g in gammas:
        h = norm(prof, g)
        table.append([float(g), h])
        print(f"{g:<6g} {h:.6g}")
    payload["H_table"] = table
    if "json" in run.formats:
        run.write_json("params.json", payload)
    if "csv" in run.formats:
        run.write_csv("params.csv", ["gamma", "H"], table)
    return EXIT_OK


def cmd_simulate(run: Run) -> int:
    g = run.cfg.get("grid")
    if g is None:
        raise ConfigError("simulate needs a grid section")
    if g["n1"] < 1 or g["n2"] < 1 or g["h1"] <= 0 or g["h2"] <= 0:
        raise ConfigError("grid must have n_i >= 1 and h_i > 0")
    field = simulate_field(run.kernel, run.basis, (g["n1"], g["n2"], g["h1"], g["h2"]),
                           truncation_radius=g.get("truncation_radius"), seed=run.seed,
                           representation=g.get("representation", RECT_SHEET), fine=g.get("fine", 1),
                           replication=g.get("replication", 0), eps_tail=g.get("eps_tail", 1e-4))
    field.meta.update(run.stamp)
    run.out.mkdir(parents=True, exist_ok=True)
    field.to_binary(run.out / "field.bin")
    if "csv" in run.formats:
        t1, t2 = field.coords()
        T1, T2 = np.meshgrid(t1, t2, indexing="ij")
        run.write_csv("field.csv", ["t1", "t2", "value"],
                      zip(T1.ravel(), T2.ravel(), field.values.ravel()))
    if "svg" in run.formats:
        def draw(fig, ax):
            im = ax.imshow(field.values.T, origin="lower", cmap="viridis",
                           extent=(0, g["n1"] * g["h1"], 0, g["n2"] * g["h2"]))
            fig.colorbar(im, ax=ax)
            ax.set_xlabel("t1")
            ax.set_ylabel("t2")
        _svg(run.out / "field.svg", draw)
    return EXIT_OK


def cmd_scan(run: Run) -> int:
    spec = run.experiment_spec()
    rep = scan_gamma(spec)
    if "json" in run.formats:
        run.write_json("scan.json", rep.to_dict())
    if "csv" in run.formats:
        run.write_csv("scan.csv", ["gamma", "H_hat", "stderr", "H_theory", "verdict"],
                      [[r.gamma, r.H_hat, r.stderr, r.H_theory, r.verdict] for r in rep.results])
    if "svg" in run.formats:
        def draw(fig, ax):
            g = [r.gamma for r in rep.results]
            ax.errorbar(g, [r.H_hat for r in rep.results], yerr=[2 * r.stderr for r in rep.results],
                        fmt="o", label="estimate")
            if all(r.H_theory is not None for r in rep.results):
                gg = np.linspace(min(g), max(g), 200)
                from .scaling_lab import theoretical_H
                ax.plot(gg, [theoretical_H(spec, x) for x in gg], "-", label="theory")
            ax.set_xlabel("gamma")
            ax.set_ylabel("H(gamma)")
            ax.legend()
        _svg(run.out / "scan.svg", draw)
    for r in rep.results:
        th = "" if r.H_theory is None else f" theory {r.H_theory:.4f}"
        print(f"gamma {r.gamma:<6g} H_hat {r.H_hat:.4f} +- {r.stderr:.4f}{th}")
    if rep.kink:
        k = rep.kink
        print(f"kink {k['gamma0_hat']:.4f}  95% CI [{k['ci'][0]:.4f}, {k['ci'][1]:.4f}]")
    return EXIT_OK


def cmd_verify(run: Run) -> int:
    spec = run.experiment_spec()
    n = run.exp.get("samples", 10_000)
    rows = [verify_limit_distribution(spec, g, n_samples=n) for g in spec.gammas]
    if "json" in run.formats:
        run.write_json("verify.json", {"checks": rows})
    if "csv" in run.formats:
        run.write_csv("verify.csv", ["gamma", "limit", "H", "cf_distance", "verdict"],
                      [[r["gamma"], r["limit"], r["H"], r["cf_distance"], r["passed"]] for r in rows])
    for r in rows:
        print(f"gamma {r['gamma']:<6g} limit {r['limit']:<6} cf distance {r['cf_distance']:.4f} "
              f"{'pass' if r['passed'] else 'fail'}")
    return EXIT_OK


def cmd_fbs(run: Run) -> int:
    f = run.cfg.get("fbs")
    if f is None:
        raise ConfigError("fbs needs an fbs section")
    spec = FbsSpec(f["H1"], f["H2"])
    s = sample_fbs(spec, f["points"], f.get("reps", 5000), run.seed)
    emp = np.cov(s.values.T, bias=True).reshape(len(s.points), len(s.points))
    ana = spec.covariance(s.points)
    if "json" in run.formats:
        run.write_json("fbs.json", {"points": s.points, "empirical_cov": emp, "analytic_cov": ana})
    if "csv" in run.formats:
        run.write_csv("fbs.csv", ["t1", "t2", "replication", "value"],
                      [[a, b, r, v] for r in range(s.values.shape[0])
                       for (a, b), v in zip(s.points, s.values[r])])
    print(f"max |empirical - analytic| covariance: {np.abs(emp - ana).max():.4f}")
    return EXIT_OK


COMMANDS = {"params": cmd_params, "simulate": cmd_simulate, "scan": cmd_scan, "verify": cmd_verify,
            "fbs": cmd_fbs}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="levyfield", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", help="output directory (overrides output.dir)")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    p.add_argument("--seed", type=int, help="overrides output.seed")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = Run(load_config(args.config, args.seed), args.out, args.threads)
        return COMMANDS[args.command](run)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AssumptionViolation as exc:
        print(f"assumption violated: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
