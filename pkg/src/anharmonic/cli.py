"""Command-line driver: ``anharmonic TASK --config run.yaml --out results/``.

A run is described by one YAML or JSON document::

    oscillator: {family: PolynomialL, a: 1, im_coeffs: [0, 1]}
    basis: {size: 128}
    task: proj
    params: {count: 30}
    output: {dir: out, svg: false}

Exit status is 0 on success, 1 when ``verify`` reports a failed criterion,
2 for configuration or validation errors and 3 for convergence failures.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import acceptance, gauge, linalg, model, pseudomode, spectra
from .discretize import BasisSpec, DiscretizationError, choose_scaling, convergence_check

TASKS = ("eigs", "proj", "pspec", "pmode", "gauge", "verify", "report")
SCHEMA_VERSION = 1
THREADS_ENV = "ANHARMONIC_THREADS"

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 1, 2, 3

# allowed keys per task and their defaults
TASK_PARAMS: dict[str, dict] = {
    "eigs": {"count": 20, "check": True, "min_trusted": 1},
    "proj": {"count": 20, "check": True, "min_trusted": 1, "include_untrusted": False,
             "fit_sigma": None, "fit_range": None},
    "pspec": {"rect": None, "nx": 41, "ny": 41},
    "pmode": {"curve": None, "epsilon": 0.5, "delta_override": 0.3, "n_terms": None, "cheb_order": 32,
              "quad_order": 256, "support_rule": "disc", "omega": None, "allow_inadmissible": False,
              "certify": False},
    "gauge": {"nu": 1.0, "rho": 1.0 / 3.0, "n_max": 20, "points": []},
    "verify": {"criteria": None},
    "report": {"count": 20},
}

NEEDS_OPERATOR = {"eigs", "proj", "pspec", "pmode", "report"}


class ConfigError(ValueError):
    pass


class ConvergenceFailure(RuntimeError):
    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report


# {{{ configuration


@dataclass
class RunConfig:
    task: str
    oscillator: model.OscillatorSpec | None = None
    basis: dict | None = None
    params: dict = field(default_factory=dict)
    output: dict = field(default_factory=lambda: {"dir": ".", "svg": False})

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        if not isinstance(d, dict):
            raise ConfigError("config must be a mapping")
        extra = set(d) - {"task", "oscillator", "basis", "params", "output"}
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        task = d.get("task")
        if task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}, got {task!r}")
        osc = None
        if d.get("oscillator") is not None:
            try:
                osc = model.OscillatorSpec.from_dict(dict(d["oscillator"]))
            except TypeError as exc:
                raise ConfigError(f"bad oscillator entry: {exc}") from exc
            violations = model.validate(osc)
            if violations:
                raise ConfigError("invalid oscillator: " + "; ".join(violations))
        elif task in NEEDS_OPERATOR:
            raise ConfigError(f"task {task} needs an oscillator")
        basis = d.get("basis")
        if basis is not None:
            basis = dict(basis)
            bad = set(basis) - {"size", "scaling", "assembly", "quad_extra"}
            if bad:
                raise ConfigError(f"unknown basis keys: {sorted(bad)}")
            if "size" not in basis:
                raise ConfigError("basis needs a size")
        elif task in NEEDS_OPERATOR:
            raise ConfigError(f"task {task} needs a basis")
        params = dict(d.get("params") or {})
        bad = set(params) - set(TASK_PARAMS[task])
        if bad:
            raise ConfigError(f"unknown params for task {task}: {sorted(bad)}")
        output = {"dir": ".", "svg": False}
        out_in = dict(d.get("output") or {})
        bad = set(out_in) - set(output)
        if bad:
            raise ConfigError(f"unknown output keys: {sorted(bad)}")
        output.update(out_in)
        cfg = cls(task, osc, basis, params, output)
        cfg.basis_spec()  # validate eagerly
        return cfg

    def to_dict(self) -> dict:
        d: dict = {"task": self.task}
        if self.oscillator is not None:
            d["oscillator"] = self.oscillator.to_dict()
        if self.basis is not None:
            d["basis"] = dict(self.basis)
        if self.params:
            d["params"] = dict(self.params)
        d["output"] = dict(self.output)
        return d

    def param(self, key: str):
        return self.params.get(key, TASK_PARAMS[self.task][key])

    def basis_spec(self) -> BasisSpec | None:
        if self.basis is None:
            return None
        b = self.basis
        try:
            size = int(b["size"])
            scaling = b.get("scaling")
            if scaling is None and self.oscillator is not None:
                scaling = choose_scaling(self.oscillator, size)
            return BasisSpec(size, float(scaling if scaling is not None else 1.0),
                             b.get("assembly", "Ladder"), int(b.get("quad_extra", 32)))
        except (DiscretizationError, model.ModelError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid basis: {exc}") from exc


def parse_config(text: str) -> RunConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML/JSON: {exc}") from exc
    return RunConfig.from_dict(data or {})


def serialize_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True)


# }}}

# {{{ output


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, schema: str, columns: list[str], rows) -> None:
    lines = [f"# schema: anharmonic/{schema} v{SCHEMA_VERSION}", ",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    _atomic_write(path, "\n".join(lines) + "\n")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def write_json(path: Path, obj) -> None:
    _atomic_write(path, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def _svg(path: Path, draw) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "anharmonic"
    fig, ax = plt.subplots(figsize=(6, 4))
    draw(ax)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".svg.tmp")
    fig.savefig(tmp, format="svg", metadata={"Date": None})
    plt.close(fig)
    os.replace(tmp, path)


# }}}

# {{{ tasks


def _spectrum(cfg: RunConfig):
    basis = cfg.basis_spec()
    count = int(cfg.param("count"))
    s = spectra.compute_spectrum(cfg.oscillator, basis, count, check=bool(cfg.param("check")))
    if cfg.param("check") and int(np.sum(s.trusted)) < int(cfg.param("min_trusted")):
        rep = convergence_check(cfg.oscillator, basis, max(1, min(count, basis.size // 4)))
        raise ConvergenceFailure(f"only {int(np.sum(s.trusted))} modes passed the doubling check", rep.to_dict())
    return s


def task_eigs(cfg: RunConfig, out: Path, threads: int | None) -> dict:
    s = _spectrum(cfg)
    rows = [(i + 1, v.real, v.imag, t) for i, (v, t) in enumerate(zip(s.values, s.trusted))]
    write_csv(out / "eigs.csv", "eigs", ["n", "re_lambda", "im_lambda", "trusted"], rows)
    if cfg.output.get("svg"):
        _svg(out / "eigs.svg", lambda ax: (ax.plot(s.values.real, s.values.imag, "o", ms=3),
                                           ax.set_xlabel("Re"), ax.set_ylabel("Im")))
    return {"modes": len(s), "trusted": int(np.sum(s.trusted))}


def task_proj(cfg: RunConfig, out: Path, threads: int | None) -> dict:
    s = _spectrum(cfg)
    pn = s.projection_norms
    rows = [(i + 1, v.real, v.imag, abs(o), p, math.log(p), lim)
            for i, (v, o, p, lim) in enumerate(zip(s.values, s.overlaps, pn, s.precision_limited))]
    cols = ["n", "re_lambda", "im_lambda", "overlap_abs", "proj_norm", "log_proj_norm", "precision_limited"]
    write_csv(out / "proj.csv", "proj", cols, rows)
    pairs = spectra.projection_norms(s, include_untrusted=bool(cfg.param("include_untrusted")))
    rng = cfg.param("fit_range")
    if rng is not None:
        lo, hi = rng
        pairs = [(n, v) for n, v in pairs if lo <= n <= hi]
    summary = {"modes": len(s), "trusted": int(np.sum(s.trusted))}
    if len(pairs) >= 5:
        fit = spectra.fit_growth(pairs, cfg.param("fit_sigma"))
        summary["fit"] = {"gamma_hat": fit.gamma_hat, "intercept": fit.intercept, "r_squared": fit.r_squared,
                          "sigma": fit.sigma, "points": len(pairs)}
    else:
        summary["fit"] = None
    write_json(out / "proj_fit.json", summary)
    if cfg.output.get("svg"):
        _svg(out / "proj.svg", lambda ax: (ax.semilogy(np.arange(1, len(pn) + 1), pn, "o-", ms=3),
                                           ax.set_xlabel("n"), ax.set_ylabel("projection norm")))
    return summary


def task_pspec(cfg: RunConfig, out: Path, threads: int | None) -> dict:
    rect = cfg.param("rect")
    if rect is None or len(rect) != 4:
        raise ConfigError("pspec needs params.rect = [re_min, re_max, im_min, im_max]")
    grid = spectra.pseudospectra_grid(cfg.oscillator, cfg.basis_spec(), tuple(float(v) for v in rect),
                                      int(cfg.param("nx")), int(cfg.param("ny")), threads)
    rows = [(s.z.real, s.z.imag, s.norm, s.dist_to_spectrum) for s in grid.samples]
    write_csv(out / "pspec.csv", "pspec", ["re_z", "im_z", "resolvent_norm", "dist_to_spectrum"], rows)
    if cfg.output.get("svg"):
        def draw(ax):
            cs = ax.contour(grid.re, grid.im, np.log10(grid.norms), levels=12)
            ax.clabel(cs, fontsize=6)
            ax.set_xlabel("Re z")
            ax.set_ylabel("Im z")
        _svg(out / "pspec.svg", draw)
    return {"samples": len(rows), "max_log10_norm": float(np.max(np.log10(grid.norms)))}


def _complex_point(p) -> complex:
    if isinstance(p, (list, tuple)):
        if len(p) != 2:
            raise ConfigError("curve points are numbers or [re, im] pairs")
        return complex(float(p[0]), float(p[1]))
    return complex(p)


def task_pmode(cfg: RunConfig, out: Path, threads: int | None) -> dict:
    curve = cfg.param("curve")
    if not curve:
        raise ConfigError("pmode needs params.curve")
    pts = [_complex_point(p) for p in curve]
    keys = ("epsilon", "delta_override", "n_terms", "cheb_order", "quad_order", "support_rule", "omega",
            "allow_inadmissible")
    try:
        params = pseudomode.PseudomodeParams(**{k: cfg.param(k) for k in keys})
    except pseudomode.PseudomodeError as exc:
        raise ConfigError(str(exc)) from exc
    rows, report = [], {"points": []}
    for z in pts:
        entry: dict = {"lambda": z}
        try:
            r = pseudomode.build(cfg.oscillator, z, params)
        except (pseudomode.PseudomodeError, model.ModelError) as exc:
            entry["error"] = str(exc)
            report["points"].append(entry)
            continue
        entry.update(q=r.q, lower_bound=r.lower_bound, delta_lambda=r.delta_lambda, mu_lambda=r.mu_lambda,
                     n_used=r.n_used, n_ceiling=r.n_ceiling, support=list(r.support), history=list(r.history))
        if cfg.param("certify"):
            c = pseudomode.certify_against_svd(cfg.oscillator, cfg.basis_spec(), z, params, result=r)
            entry["certificate"] = {"resolvent_norm": c.resolvent_norm, "projection_defect": c.projection_defect,
                                    "holds": c.holds, "valid": c.valid, "informative": c.informative,
                                    "note": c.note}
        rows.append((z.real, z.imag, r.q, r.lower_bound, r.mu_lambda, r.n_used))
        report["points"].append(entry)
    ok = [e for e in report["points"] if "q" in e]
    if len(ok) >= 2:
        mus = np.array([e["mu_lambda"] for e in ok])
        ys = np.log([e["lower_bound"] for e in ok])
        if np.ptp(mus) > 0:
            report["eta_hat"] = float(np.polyfit(mus, ys, 1)[0])
    write_csv(out / "pmode.csv", "pmode", ["re_lambda", "im_lambda", "q", "lower_bound", "mu_lambda", "n_used"], rows)
    write_json(out / "pmode.json", report)
    return {"built": len(ok), "failed": len(pts) - len(ok)}


def task_gauge(cfg: RunConfig, out: Path, threads: int | None) -> dict:
    try:
        g = gauge.GaugeSpec(float(cfg.param("nu")), float(cfg.param("rho")))
    except gauge.GaugeError as exc:
        raise ConfigError(str(exc)) from exc
    n_max = int(cfg.param("n_max"))
    rows = []
    for n in range(1, n_max + 1):
        rows.append((n, gauge.zero(g, n), gauge.log_a_product(n, g.b), gauge.log_abs_f_prime(g, n)))
    write_csv(out / "gauge.csv", "gauge", ["n", "a_n", "log_a_product", "log_abs_f_prime"], rows)
    pts = []
    for p in cfg.param("points") or []:
        w = _complex_point(p)
        v = gauge.eval_F(g, w)
        pts.append((w.real, w.imag, v.log_abs, v.arg, v.tail_bound, v.terms))
    if pts:
        write_csv(out / "gauge_values.csv", "gauge_values",
                  ["re_w", "im_w", "log_abs_f", "arg_f", "tail_bound", "terms"], pts)
    return {"zeros": n_max, "points": len(pts)}


def task_verify(cfg: RunConfig, out: Path, threads: int | None) -> dict:
    which = cfg.param("criteria")
    results = acceptance.run_all(which, echo=print)
    write_json(out / "verify.json", {"criteria": [r.to_dict() for r in results]})
    failed = [r.number for r in results if not r.passed]
    return {"passed": len(results) - len(failed), "failed": failed}


def task_report(cfg: RunConfig, out: Path, threads: int | None) -> dict:
    basis = cfg.basis_spec()
    count = int(cfg.param("count"))
    s = spectra.compute_spectrum(cfg.oscillator, basis, count)
    rep = {
        "oscillator": cfg.oscillator.to_dict(),
        "basis": basis.to_dict(),
        "constants": {k: v for k, v in vars(model.constants(cfg.oscillator)).items() if v is not None},
        "modes": [{"n": m.index, "lambda": m.value, "projection_norm": m.projection_norm, "trusted": m.trusted,
                   "precision_limited": m.precision_limited} for m in s.modes],
    }
    pairs = spectra.projection_norms(s)
    if len(pairs) >= 5:
        fit = spectra.fit_growth(pairs, None if all(v > 1 for _, v in pairs) else 1.0)
        rep["growth_fit"] = vars(fit)
    write_json(out / "report.json", rep)
    return {"modes": len(s)}


RUNNERS = {
    "eigs": task_eigs,
    "proj": task_proj,
    "pspec": task_pspec,
    "pmode": task_pmode,
    "gauge": task_gauge,
    "verify": task_verify,
    "report": task_report,
}


# }}}


def resolve_threads(flag: int | None) -> int | None:
    if flag is not None:
        return flag
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}")
    return None


def run(cfg: RunConfig, threads: int | None = None) -> int:
    out = Path(cfg.output.get("dir", "."))
    try:
        summary = RUNNERS[cfg.task](cfg, out, threads)
    except ConvergenceFailure as exc:
        write_json(out / "convergence.json", exc.report or {})
        print(f"error: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (linalg.LinalgError, gauge.TruncationError) as exc:
        print(f"error: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ConfigError, model.ModelError, DiscretizationError, gauge.GaugeError,
            pseudomode.PseudomodeError, spectra.SpectrumError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps(_jsonable(summary), sort_keys=True))
    if cfg.task == "verify" and summary["failed"]:
        return EXIT_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="anharmonic", description="Spectra, projections and pseudomodes of "
                                "non-self-adjoint anharmonic oscillators.")
    p.add_argument("task", nargs="?", choices=TASKS, help="overrides the task in the config")
    p.add_argument("--config", type=Path, help="YAML or JSON run description")
    p.add_argument("--out", type=Path, help="output directory (overrides output.dir)")
    p.add_argument("--threads", type=int, help=f"worker threads (else ${THREADS_ENV})")
    p.add_argument("--svg", action="store_true", help="also write SVG plots")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            try:
                text = args.config.read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
            data = yaml.safe_load(text) or {}
            if not isinstance(data, dict):
                raise ConfigError("config must be a mapping")
        else:
            data = {}
        if args.task:
            data["task"] = args.task
        cfg = RunConfig.from_dict(data)
        if args.out is not None:
            cfg.output["dir"] = str(args.out)
        if args.svg:
            cfg.output["svg"] = True
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be positive")
        threads = resolve_threads(args.threads)
    except (ConfigError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg, threads)


if __name__ == "__main__":
    sys.exit(main())
