"""Command-line driver.

``chebli <command> [--config run.yaml] [overrides]`` writes JSON reports and
CSV tables into the output directory (``--output-dir``, else
``$CHEBLI_OUTPUT_DIR``, else the config value).  Exit status: 0 on
completion, 1 on errors, 2 under ``--strict`` when a verdict is
inconclusive because some family did not converge.
"""

from __future__ import annotations

import argparse
import copy
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from . import asymptotics as asy
from . import config as cf
from . import convolution as cv
from . import decision as de
from . import eigenfunctions as ef
from . import spectral as sp
from .io import digest, dump_json

log = logging.getLogger("chebli")

SPEC_FILE = "plancherel.json"
COMMANDS = cf.STAGES + ("run",)


class CliError(RuntimeError):
    pass


# ----------------------------------------------------------------------------
# arguments
# ----------------------------------------------------------------------------

def _common(p):
    p.add_argument("--config", type=Path, help="YAML run configuration")
    p.add_argument("--output-dir", help="artifact directory (overrides $CHEBLI_OUTPUT_DIR and the config)")
    p.add_argument("--spec", type=Path, help="Plancherel artifact to consume (default: <output-dir>/plancherel.json)")
    p.add_argument("--strict", action="store_true", help="exit 2 when non-convergence makes a verdict inconclusive")
    p.add_argument("--family", help="coefficient family")
    p.add_argument("--model-alpha", type=float, dest="model_alpha")
    p.add_argument("--model-beta", type=float, dest="model_beta")
    p.add_argument("--step", action="append", metavar="AT:HEIGHT", help="step perturbation (repeatable)")
    p.add_argument("--cutoff", type=float, help="spectral cutoff")
    p.add_argument("--t-max", type=float, dest="t_max", help="largest radius the spectral grid resolves")
    p.add_argument("--tol", type=float, help="Cauchy tolerance")
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="chebli", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"chebli {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _common(p)
        if name in ("decide", "weights"):
            p.add_argument("--inject", choices=de.INJECTIONS, help="decide on a closed-form symbol")
            p.add_argument("--alpha", type=float, help="injected symbol parameter alpha")
            p.add_argument("--beta", type=float, help="injected symbol parameter beta")
            p.add_argument("--x-star", type=float, dest="x_star", help="radius of the injected Bessel character")
        else:
            p.add_argument("--alpha", type=float, dest="model_alpha_alias", help="alias of --model-alpha")
            p.add_argument("--beta", type=float, dest="model_beta_alias", help="alias of --model-beta")
        if name in ("weights", "run"):
            p.add_argument("--weight", choices=("constant", "polynomial", "exponential"))
            p.add_argument("--weight-s", type=float, dest="weight_s")
            p.add_argument("--weight-a", type=float, dest="weight_a")
        if name in ("product", "asym", "run"):
            p.add_argument("--x", type=float)
        if name in ("product", "run"):
            p.add_argument("--y", type=float)
        if name in ("eigen", "run"):
            p.add_argument("--lambda", type=float, dest="lam")
    return parser


def _overrides(raw, args):
    raw = copy.deepcopy(raw)
    m = raw.setdefault("model", {}) or {}
    raw["model"] = m
    alias_a = getattr(args, "model_alpha_alias", None)
    alias_b = getattr(args, "model_beta_alias", None)
    for key, val in (("family", args.family), ("alpha", args.model_alpha if args.model_alpha is not None else alias_a),
                     ("beta", args.model_beta if args.model_beta is not None else alias_b)):
        if val is not None:
            m[key] = val
    if args.step:
        steps = []
        for s in args.step:
            try:
                a, c = s.split(":")
                steps.append([float(a), float(c)])
            except ValueError as exc:
                raise cf.ConfigError("model.steps", f"--step expects AT:HEIGHT, got {s!r}") from exc
        m["steps"] = steps
    g = raw.setdefault("grid", {}) or {}
    raw["grid"] = g
    if args.cutoff is not None:
        g["cutoff"] = args.cutoff
    if args.t_max is not None:
        g["t_max"] = args.t_max
    t = raw.setdefault("tolerances", {}) or {}
    raw["tolerances"] = t
    for key in ("eps", "delta"):
        if getattr(args, key) is not None:
            t[key] = getattr(args, key)
    if args.tol is not None:
        t["cauchy"] = args.tol
    s = raw.setdefault("schedules", {}) or {}
    raw["schedules"] = s
    for key in ("x", "y"):
        if getattr(args, key, None) is not None:
            s[key] = getattr(args, key)
    if getattr(args, "lam", None) is not None:
        raw["eigen_lambda"] = args.lam
    if getattr(args, "inject", None) is not None or getattr(args, "x_star", None) is not None:
        d = raw.setdefault("decide", {}) or {}
        raw["decide"] = d
        for key in ("inject", "alpha", "beta", "x_star"):
            if getattr(args, key, None) is not None:
                d[key] = getattr(args, key)
    elif getattr(args, "alpha", None) is not None or getattr(args, "beta", None) is not None:
        d = raw.setdefault("decide", {}) or {}
        raw["decide"] = d
        for key in ("alpha", "beta"):
            if getattr(args, key, None) is not None:
                d[key] = getattr(args, key)
    if getattr(args, "weight", None) is not None:
        raw["weight"] = {"kind": args.weight, "s": args.weight_s or 0.0, "a": args.weight_a or 0.0}
    return raw


def load_config(args):
    lines = {}
    raw = {}
    if args.config is not None:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise cf.ConfigError("", f"cannot read config: {exc}") from exc
        cf.loads(text)  # surfaces parse and field errors with line numbers
        raw = yaml.safe_load(text) or {}
        lines = cf._line_index(text)
    cfg = cf.from_dict(_overrides(raw, args), lines)
    out = args.output_dir or os.environ.get("CHEBLI_OUTPUT_DIR") or cfg.output_dir
    cfg.output_dir = str(out)
    return cfg


# ----------------------------------------------------------------------------
# context shared by the stages of one run
# ----------------------------------------------------------------------------

class Context:
    def __init__(self, cfg, spec_path=None):
        self.cfg = cfg
        self.out = Path(cfg.output_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.model = cfg.model.build()
        # where artifacts land does not change what they contain
        self.config_digest = digest({k: v for k, v in cfg.to_dict().items() if k != "output_dir"})
        self.spec_path = Path(spec_path) if spec_path else self.out / SPEC_FILE
        self._spec = None
        self.nonconverged = False

    def spec(self, required=True):
        if self._spec is None:
            if not self.spec_path.exists():
                if not required:
                    return None
                raise CliError(f"missing calibration artifact {self.spec_path}; run `chebli calibrate` first")
            self._spec = sp.PlancherelSpec.from_json(self.spec_path)
        self._spec.require_usable()
        return self._spec

    def spec_for_model(self, required=True):
        spec = self.spec(required)
        if spec is not None and spec.coefficient_model() != self.model:
            raise CliError(f"calibration artifact is for {spec.coefficient_model().describe()}, "
                           f"not {self.model.describe()}")
        return spec

    def needs_spec(self):
        return not cv._direct_ok(self.model)

    def report(self, name, result, spec=None):
        body = {
            "command": name,
            "chebli_version": __version__,
            "model": self.model.to_dict(),
            "config_digest": self.config_digest,
            "calibration_digest": spec.digest() if spec is not None else None,
            "result": result,
        }
        path = dump_json(body, self.out / f"{name}.json")
        log.info("wrote %s", path)
        return path

    def y_schedule(self, x):
        s = self.cfg.schedules
        base = max(1.0, x) if s.y_scale_with_x else 1.0
        return [base * y for y in s.y_schedule]


def _write_rows(path, header, rows):
    with Path(path).open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for r in rows:
            wr.writerow([f"{v:.12e}" if isinstance(v, (float, np.floating)) else v for v in r])
    return path


def _write_symbol(path, sym):
    vals = np.asarray(sym.values, dtype=complex)
    return _write_rows(path, ["lambda", "re", "im"], zip(sym.lambda_grid, vals.real, vals.imag))


# ----------------------------------------------------------------------------
# stages
# ----------------------------------------------------------------------------

def stage_calibrate(ctx):
    g = ctx.cfg.grid
    spec = sp.calibrate_plancherel(ctx.model, g.cutoff, g.t_max, ctx.cfg.tolerances.unitarity)
    spec.to_json(ctx.spec_path)
    ctx._spec = spec
    _write_rows(ctx.out / "plancherel_density.csv", ["lambda", "density"], zip(spec.lambda_grid, spec.density))
    res = {k: v for k, v in spec.to_dict().items() if k not in ("lambda_grid", "weights", "density")}
    res["nodes"] = int(spec.lambda_grid.size)
    res["artifact"] = ctx.spec_path.name
    ctx.report("calibrate", res, spec)
    if not spec.usable:
        log.warning("calibration error %.3e exceeds tolerance; downstream stages will refuse this spec",
                    spec.calibration_error)


def stage_eigen(ctx):
    lam = ctx.cfg.eigen_lambda
    g = ctx.cfg.grid
    xs = np.linspace(max(g.x_min, ctx.model.domain_floor), g.x_max, g.x_points)
    phi = ef.character(ctx.model, lam).evaluate(xs)
    res = {"lambda": lam, "character_source": ef.character(ctx.model, lam).source}
    try:
        js = ef.solve_jost(ctx.model, lam, tol=ctx.cfg.tolerances.jost)
        m = js.m_at(xs)
        res.update(sup_deviation=js.sup_deviation, iterations=js.iterations, residual=js.residual,
                   operator_bound=js.operator_bound, error_bound=js.error_bound, x_inf=js.x_inf, pieces=js.pieces)
    except ef.JostError as exc:
        m = np.full(xs.shape, np.nan + 1j * np.nan)
        res["jost_error"] = str(exc)
    _write_rows(ctx.out / "eigen.csv", ["x", "re_m", "im_m", "phi"], zip(xs, m.real, m.imag, phi))
    ctx.report("eigen", res)


def stage_product(ctx):
    s = ctx.cfg.schedules
    spec = ctx.spec_for_model() if ctx.needs_spec() else ctx.spec_for_model(required=False)
    mu = cv.product_measure(ctx.model, s.x, s.y, spec)
    cv.write_measure_csv(mu, ctx.out / "product.csv")
    lams = np.linspace(0.0, 20.0, 51)
    phi = ef.character_matrix(ctx.model, lams, np.array([s.x, s.y]))
    resid = float(np.max(np.abs(np.real(cv.forward_transform(mu, ctx.model, lams).values) - phi[:, 0] * phi[:, 1])))
    res = {"x": s.x, "y": s.y, "support": list(mu.support), "total_mass": cv.total_mass(mu),
           "min_density": float(np.min(mu.density)) if mu.grid.size else 0.0,
           "product_formula_residual": resid, "atoms": [list(a) for a in mu.atoms]}
    ctx.report("product", res, spec)


def stage_asym(ctx):
    x = ctx.cfg.schedules.x
    spec = ctx.spec_for_model() if ctx.needs_spec() else ctx.spec_for_model(required=False)
    nu, rep = asy.asymptotic_measure(ctx.model, spec, x, ctx.y_schedule(x), ctx.cfg.tolerances.cauchy)
    cv.write_measure_csv(nu, ctx.out / "asym_measure.csv")
    pair = list(rep.pairwise) + [float("nan")]
    _write_rows(ctx.out / "asym_distances.csv", ["y", "distance_to_next", "distance_to_limit"],
                zip(rep.schedule, pair, rep.to_limit))
    ctx.nonconverged |= not rep.converged
    ctx.report("asym", {"x": x, "convergence": rep.to_dict(), "total_mass": cv.total_mass(nu)}, spec)


def _limit(ctx, spec):
    s = ctx.cfg.schedules
    return asy.limit_measure(ctx.model, spec, s.x_schedule, ctx.y_schedule, ctx.cfg.tolerances.cauchy)


def stage_limit(ctx):
    spec = ctx.spec_for_model() if ctx.needs_spec() else ctx.spec_for_model(required=False)
    nu, rep = _limit(ctx, spec)
    pair = list(rep.pairwise) + [float("nan")]
    _write_rows(ctx.out / "limit_trace.csv", ["x", "distance_to_next"], zip(rep.schedule, pair))
    if nu is not None:
        cv.write_measure_csv(nu, ctx.out / "limit_measure.csv")
    ctx.nonconverged |= not rep.converged
    ctx.report("limit", {"convergence": rep.to_dict(), "limit_available": nu is not None}, spec)


def _symbol(ctx, spec):
    """Injected symbol, or the line transform of nu_inf with its upstream verdict."""
    d = ctx.cfg.decide
    if d.inject is not None:
        return de.injected_symbol(d.inject, spec, d.alpha, d.beta, d.x_star, d.value), (), None
    nu, rep = _limit(ctx, spec if ctx.needs_spec() else None)
    if nu is None:
        sym = sp.SpectralSymbol(spec.lambda_grid, np.zeros(spec.lambda_grid.size), "TransformOfMeasure", "line",
                                "nu_inf (not available)")
    else:
        sym = sp.line_transform(nu, spec.lambda_grid)
        sym = sp.SpectralSymbol(sym.lambda_grid, sym.values, sym.provenance, "line", "line transform of nu_inf")
    return sym, (rep.verdict,), rep


def stage_decide(ctx):
    spec = ctx.spec()
    t, d = ctx.cfg.tolerances, ctx.cfg.decide
    sym, ups, rep = _symbol(ctx, spec)
    out = de.decide_irregularity(sym, spec, t.eps, t.delta, tuple(d.window), ups)
    _write_symbol(ctx.out / "decide_symbol.csv", sym)
    res = out.to_dict()
    if rep is not None:
        res["limit_convergence"] = rep.to_dict()
    if out.verdict == de.INCONCLUSIVE and ups and any(u != asy.CONVERGED for u in ups):
        ctx.nonconverged = True
    ctx.report("decide", res, spec)


def stage_weights(ctx):
    spec = ctx.spec()
    w = ctx.cfg.weight_spec()
    t, d, s = ctx.cfg.tolerances, ctx.cfg.decide, ctx.cfg.schedules
    dspec = spec if ctx.needs_spec() else None
    if ctx.needs_spec():
        ctx.spec_for_model()
    C, bad = de.check_beurling(ctx.model, dspec, w, ctx.cfg.beurling_pairs)
    adm = de.weighted_admissibility(ctx.model, dspec, w, s.weight_x, ctx.y_schedule, t.cauchy)
    sym, ups, _ = _symbol(ctx, spec)
    out = de.decide_weighted(ctx.model, spec, w, sym, admissibility=adm, beurling=(C, bad), eps=t.eps,
                             delta=t.delta, window=tuple(d.window), upstream=ups)
    if out.verdict == de.INCONCLUSIVE and any(u != asy.CONVERGED for u in out.upstream):
        ctx.nonconverged = True
    ctx.report("weights", {"beurling_constant": C, "violations": [list(v) for v in bad], "admissibility": adm,
                           "decision": out.to_dict()}, spec)


def stage_centres(ctx):
    spec = ctx.spec()
    if ctx.needs_spec():
        ctx.spec_for_model()
    dspec = spec if ctx.needs_spec() else None
    t = ctx.cfg.tolerances
    out = de.compare_centres(ctx.model, dspec, ctx.cfg.schedules.centres_x, ctx.y_schedule, t.centres,
                             cauchy_tol=t.cauchy)
    if out.verdict == de.INCONCLUSIVE and any(u != asy.CONVERGED for u in out.upstream):
        ctx.nonconverged = True
    ctx.report("centres", out.to_dict(), spec)


STAGE_FUNCS = {
    "calibrate": stage_calibrate, "eigen": stage_eigen, "product": stage_product, "asym": stage_asym,
    "limit": stage_limit, "decide": stage_decide, "weights": stage_weights, "centres": stage_centres,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args)
        ctx = Context(cfg, args.spec)
        stages = cfg.pipeline if args.command == "run" else [args.command]
        for st in stages:
            log.info("stage %s", st)
            STAGE_FUNCS[st](ctx)
    except cf.ConfigError as exc:
        print(f"chebli: config error: {exc}", file=sys.stderr)
        return 1
    except (CliError, sp.CalibrationError, sp.ResolutionError, ef.JostError, ef.CharacterError, ValueError,
            OSError) as exc:
        print(f"chebli: error: {exc}", file=sys.stderr)
        return 1
    if args.strict and ctx.nonconverged:
        print("chebli: a family did not converge; verdicts are inconclusive", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
