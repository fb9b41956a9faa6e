"""Command-line front end.

    gfbm-price price-bs  --a 1 --b 0 --hurst 0.5 --s0 100 --strike 100 \\
                         --rate 0.05 --sigma 0.2 --maturity 1
    gfbm-price price-cev ... --alpha 1.5 [--method mc --paths 200000 --steps 512]
    gfbm-price density   --model bs|cev ... --s-min 1 --s-max 400 --points 801
    gfbm-price simulate  --model bs|cev ... --paths 100000 --seed 1 [--dump paths.csv]
    gfbm-price validate  --suite reductions|phi|limit|qlimit|all

Output is one JSON document (default) or RFC-4180 CSV on stdout. Exit
status: 0 success, 1 usage or domain error, 2 validation failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from . import bs, cev, mc
from .errors import GfbmError
from .process import GfbmParams, classify
from .quotes import PriceQuote
from .specfun import noncentral_chi2_sf, q_normal_limit

__all__ = ["RunConfig", "UsageError", "build_parser", "emit_density_table", "run", "main"]

COMMANDS = ("price-bs", "price-cev", "density", "simulate", "validate")
SUITES = ("reductions", "phi", "limit", "qlimit", "all")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    params: dict
    fmt: str = "json"
    seed: Optional[int] = None
    paths: Optional[int] = None
    steps: Optional[int] = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        params = {}
        for name in ("a", "b", "hurst", "s0", "strike", "rate", "sigma", "maturity", "alpha"):
            value = getattr(ns, name, None)
            if value is not None:
                params[name] = value
        extra = {}
        for name in ("model", "method", "s_min", "s_max", "points", "suite", "dump", "noise"):
            value = getattr(ns, name, None)
            if value is not None:
                extra[name] = value
        for name, low in (("paths", 2), ("steps", 1)):
            value = getattr(ns, name, None)
            if value is not None and value < low:
                raise UsageError(f"--{name} must be at least {low}, got {value}")
        return cls(
            command=ns.command,
            params=params,
            fmt=ns.format,
            seed=getattr(ns, "seed", None),
            paths=getattr(ns, "paths", None),
            steps=getattr(ns, "steps", None),
            extra=extra,
        )

    def require(self, *names: str) -> None:
        missing = [n for n in names if n not in self.params]
        if missing:
            raise UsageError("missing required option(s): " + ", ".join("--" + n for n in missing))

    def gfbm(self) -> GfbmParams:
        self.require("a", "b", "hurst")
        return GfbmParams(self.params["a"], self.params["b"], self.params["hurst"])

    def market(self) -> bs.MarketParams:
        self.require("s0", "strike", "rate", "sigma", "maturity")
        p = self.params
        return bs.MarketParams(p["s0"], p["strike"], p["rate"], p["sigma"], p["maturity"])

    def cev_params(self) -> cev.CevParams:
        self.require("alpha")
        return cev.CevParams(self.market(), self.params["alpha"])

    def echo(self) -> dict:
        out = dict(self.params)
        for name in ("seed", "paths", "steps"):
            if getattr(self, name) is not None:
                out[name] = getattr(self, name)
        out.update({k: v for k, v in self.extra.items() if k != "suite"})
        return out


def _add_model_options(sp: argparse.ArgumentParser, cev_model: bool) -> None:
    g = sp.add_argument_group("model")
    g.add_argument("--a", type=float, help="weight of B^H_t")
    g.add_argument("--b", type=float, help="weight of B^H_{-t}")
    g.add_argument("--hurst", type=float, help="Hurst exponent in (0, 1)")
    g.add_argument("--s0", type=float, help="spot price")
    g.add_argument("--strike", type=float, help="strike price")
    g.add_argument("--rate", type=float, help="risk-free rate")
    g.add_argument("--sigma", type=float,
                   help="volatility in the model's native scale (CEV: diffusion scale)")
    g.add_argument("--maturity", type=float, help="time to maturity")
    if cev_model:
        g.add_argument("--alpha", type=float, help="CEV elasticity (alpha != 2)")


def _add_mc_options(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--paths", type=int, default=None)
    sp.add_argument("--steps", type=int, default=None)
    sp.add_argument("--seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gfbm-price", description=__doc__.splitlines()[0])
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    sp = sub.add_parser("price-bs", help="call price under gfBm Black-Scholes")
    _add_model_options(sp, cev_model=False)
    sp.add_argument("--method", choices=("closed-form", "mc"), default="closed-form")
    _add_mc_options(sp)

    sp = sub.add_parser("price-cev", help="call price under gfBm CEV")
    _add_model_options(sp, cev_model=True)
    sp.add_argument("--method", choices=("closed-form", "mc"), default="closed-form")
    sp.add_argument("--noise", choices=("martingale", "gfbm"), default=None)
    _add_mc_options(sp)

    sp = sub.add_parser("density", help="tabulate the terminal price density")
    sp.add_argument("--model", choices=("bs", "cev"), default="bs")
    _add_model_options(sp, cev_model=True)
    sp.add_argument("--s-min", type=float, required=True)
    sp.add_argument("--s-max", type=float, required=True)
    sp.add_argument("--points", type=int, default=201)

    sp = sub.add_parser("simulate", help="Monte Carlo terminal prices and call estimate")
    sp.add_argument("--model", choices=("bs", "cev"), default="bs")
    _add_model_options(sp, cev_model=True)
    sp.add_argument("--noise", choices=("martingale", "gfbm"), default=None)
    sp.add_argument("--dump", default=None, help="write simulated paths to this CSV file")
    _add_mc_options(sp)

    sp = sub.add_parser("validate", help="run a built-in consistency suite")
    sp.add_argument("--suite", choices=SUITES, default="reductions")

    # --format is accepted after the subcommand too
    for name, sp in sub.choices.items():
        sp.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
    return parser


# -- commands -------------------------------------------------------------------

def _quote_doc(model: str, cfg: RunConfig, quote) -> dict:
    doc = {"model": model, "params": cfg.echo(), "price": quote.price}
    if quote.std_error is not None:
        doc["std_error"] = quote.std_error
    doc["provenance"] = quote.provenance
    return doc


def _mc_quote(samples, m: bs.MarketParams):
    est = mc.mc_price(samples, m.e, m.r, m.t)
    return PriceQuote(est.mean, "monte-carlo", est.std_error, est.n_paths)


def _price_bs(cfg: RunConfig) -> dict:
    p, m = cfg.gfbm(), cfg.market()
    if cfg.extra.get("method") == "mc":
        cfg.paths = cfg.paths or 100_000
        cfg.seed = 0 if cfg.seed is None else cfg.seed
        quote = _mc_quote(mc.bs_terminal(p, m, cfg.paths, cfg.seed), m)
    else:
        quote = bs.call_price(p, m)
    doc = _quote_doc("bs", cfg, quote)
    doc["process"] = classify(p).value
    return doc


def _cev_terminal(cfg: RunConfig, p, c):
    cfg.paths = cfg.paths or 100_000
    cfg.steps = cfg.steps or 512
    cfg.seed = 0 if cfg.seed is None else cfg.seed
    noise = cfg.extra.setdefault("noise", "martingale")
    grid = mc.TimeGrid.uniform(c.market.t, cfg.steps)
    return mc.cev_terminal_euler(p, c, grid, cfg.paths, cfg.seed, noise=noise)


def _price_cev(cfg: RunConfig) -> dict:
    p, c = cfg.gfbm(), cfg.cev_params()
    if cfg.extra.get("method") == "mc":
        term = _cev_terminal(cfg, p, c)
        quote = _mc_quote(mc.cev_terminal_prices(term.y, c.alpha), c.market)
        doc = _quote_doc("cev", cfg, quote)
        doc["absorbed_fraction"] = term.absorption_fraction
    else:
        doc = _quote_doc("cev", cfg, cev.call_price_cev(p, c))
    doc["process"] = classify(p).value
    return doc


def emit_density_table(cfg: RunConfig) -> tuple[list[tuple[float, float]], dict]:
    """Rows (s, density) on an even grid plus a metadata record.

    The metadata ``mass`` is the adaptive-quadrature integral of the density
    over [s_min, s_max].
    """
    s_min, s_max = cfg.extra.get("s_min"), cfg.extra.get("s_max")
    n = cfg.extra.get("points", 201)
    if s_min is None or s_max is None:
        raise UsageError("density needs --s-min and --s-max")
    if not (0.0 < s_min < s_max):
        raise UsageError(f"density grid needs 0 < s-min < s-max, got [{s_min}, {s_max}]")
    if n < 2:
        raise UsageError(f"--points must be at least 2, got {n}")
    p = cfg.gfbm()
    if cfg.extra.get("model", "bs") == "cev":
        c = cfg.cev_params()
        f = lambda s: cev.transition_density_s(p, c, s)
        meta = {"absorbed": cev.absorption_probability(p, c)}
    else:
        m = cfg.market()
        f = lambda s: bs.price_density(p, m, s)
        meta = {}
    grid = np.linspace(s_min, s_max, n)
    rows = [(float(s), f(float(s))) for s in grid]
    mass, _ = integrate.quad(f, s_min, s_max, limit=500, epsabs=1e-12, epsrel=1e-10)
    meta["mass"] = mass
    return rows, meta


def _density(cfg: RunConfig) -> dict:
    rows, meta = emit_density_table(cfg)
    return {
        "model": cfg.extra.get("model", "bs"),
        "params": cfg.echo(),
        "rows": [{"s": s, "density": d} for s, d in rows],
        **meta,
        "provenance": "closed-form",
    }


def _simulate(cfg: RunConfig) -> dict:
    p = cfg.gfbm()
    model = cfg.extra.get("model", "bs")
    if model == "cev":
        c = cfg.cev_params()
        m = c.market
        term = _cev_terminal(cfg, p, c)
        samples = mc.cev_terminal_prices(term.y, c.alpha)
        if cfg.extra.get("dump"):
            batch = mc.cev_paths_euler(p, c, mc.TimeGrid.uniform(m.t, cfg.steps),
                                       cfg.paths, cfg.seed, noise=cfg.extra["noise"])
            batch.to_csv(cfg.extra["dump"])
        extra = {"absorbed_fraction": term.absorption_fraction}
    else:
        m = cfg.market()
        cfg.paths = cfg.paths or 100_000
        cfg.seed = 0 if cfg.seed is None else cfg.seed
        samples = mc.bs_terminal(p, m, cfg.paths, cfg.seed)
        if cfg.extra.get("dump"):
            cfg.steps = cfg.steps or 64
            batch = mc.gfbm_paths(p, mc.TimeGrid.uniform(m.t, cfg.steps), cfg.paths, cfg.seed)
            batch.to_csv(cfg.extra["dump"])
        extra = {}
    finite = samples[np.isfinite(samples)]
    doc = _quote_doc(model, cfg, _mc_quote(samples, m))
    doc.update(extra)
    doc["terminal_mean"] = float(finite.mean())
    doc["discounted_mean"] = float(math.exp(-m.r * m.t) * finite.mean())
    return doc


# -- validation suites --------------------------------------------------------------

def _suite_reductions():
    rng = np.random.default_rng(20240601)
    worst = {"fractional": 0.0, "sub-fractional": 0.0, "standard": 0.0}
    for _ in range(200):
        m = bs.MarketParams(rng.uniform(50, 150), rng.uniform(50, 150), rng.uniform(-0.02, 0.1),
                            rng.uniform(0.05, 0.6), rng.uniform(0.1, 3.0))
        h = float(rng.uniform(0.05, 0.95))
        for p in (GfbmParams.standard(), GfbmParams.fractional(h), GfbmParams.sub_fractional(h)):
            for rep in bs.reduction_report(p, m):
                worst[rep.case] = max(worst[rep.case], rep.gap)
    return [(f"{case} reduction gap", gap, 1e-12) for case, gap in worst.items()]


def _suite_phi():
    rng = np.random.default_rng(20240602)
    worst = 0.0
    for _ in range(100):
        p = GfbmParams(1.0, float(rng.uniform(0, 1)), float(rng.uniform(0.05, 0.95)))
        alpha = float(rng.choice([rng.uniform(0.0, 1.9), rng.uniform(2.1, 4.0)]))
        m = bs.MarketParams(100.0, 100.0, rng.uniform(-0.05, 0.2), rng.uniform(0.05, 2.0), rng.uniform(0.1, 5.0))
        c = cev.CevParams(m, alpha)
        closed, quad = cev.phi(p, c), cev.phi_quadrature(p, c)
        worst = max(worst, abs(closed - quad) / quad)
    rows = [("phi closed form vs quadrature (relative)", worst, 1e-10)]
    worst_k = 0.0
    for alpha in (0.5, 1.0, 1.5, 2.5, 3.0):
        m = bs.MarketParams(100.0, 100.0, 0.05, 0.4, 2.0)
        c = cev.CevParams(m, alpha)
        k = 1.0 / cev.phi(GfbmParams.standard(), c)
        ref = 2 * m.r / (m.sigma**2 * (2 - alpha) * (math.exp((2 - alpha) * m.r * m.t) - 1))
        worst_k = max(worst_k, abs(k - ref) / abs(ref))
    rows.append(("standard CEV k identity (relative)", worst_k, 1e-12))
    return rows


def _suite_limit():
    p = GfbmParams(1.0, 0.5, 0.7)
    m = bs.MarketParams(100.0, 100.0, 0.05, 0.2, 1.0)
    rows = []
    for side in ((1.9, 1.99, 1.999), (2.1, 2.01, 2.001)):
        gaps = [r.gap for r in cev.bs_limit_gap(p, m, side)]
        bs_price = bs.call_price(p, m).price
        monotone = all(g1 > g2 for g1, g2 in zip(gaps, gaps[1:]))
        rows.append((f"alpha->2 gap at {side[-1]} / C_bs", gaps[-1] / bs_price, 1e-2))
        rows.append((f"alpha->2 gaps decreasing along {side} (0 = yes)", 0.0 if monotone else 1.0, 0.5))
    return rows


def _suite_qlimit():
    v = 1e4
    worst = 0.0
    for lam in (0.0, 10.0, 50.0, 100.0):
        sd = math.sqrt(2.0 * (v + 2.0 * lam))
        for z in np.linspace(-4, 4, 17):
            n = v + lam + z * sd
            worst = max(worst, abs(noncentral_chi2_sf(n, v, lam) - q_normal_limit(n, v, lam)))
    return [("Q vs normal limit, v=1e4", worst, 1e-2)]


_SUITES = {
    "reductions": _suite_reductions,
    "phi": _suite_phi,
    "limit": _suite_limit,
    "qlimit": _suite_qlimit,
}


def _validate(cfg: RunConfig) -> dict:
    suite = cfg.extra.get("suite", "reductions")
    names = list(_SUITES) if suite == "all" else [suite]
    rows = []
    for name in names:
        for label, value, tol in _SUITES[name]():
            value = float(value)
            rows.append({"suite": name, "check": label, "value": value,
                         "tolerance": tol, "pass": bool(value <= tol)})
    return {"model": "validate", "params": {"suite": suite}, "checks": rows,
            "passed": all(r["pass"] for r in rows), "provenance": "closed-form"}


_HANDLERS = {
    "price-bs": _price_bs,
    "price-cev": _price_cev,
    "density": _density,
    "simulate": _simulate,
    "validate": _validate,
}


# -- output ---------------------------------------------------------------------------

def _to_csv(doc: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    if "rows" in doc:
        w.writerow(["s", "density"])
        for row in doc["rows"]:
            w.writerow([repr(row["s"]), repr(row["density"])])
        w.writerow(["mass", repr(doc["mass"])])
    elif "checks" in doc:
        w.writerow(["suite", "check", "value", "tolerance", "pass"])
        for r in doc["checks"]:
            w.writerow([r["suite"], r["check"], repr(r["value"]), repr(r["tolerance"]), r["pass"]])
    else:
        flat = {k: v for k, v in doc.items() if k != "params"}
        flat.update({f"param_{k}": v for k, v in doc["params"].items()})
        w.writerow(list(flat))
        w.writerow([repr(v) if isinstance(v, float) else v for v in flat.values()])
    return buf.getvalue()


def run(argv=None, stdout=None, stderr=None) -> int:
    """Execute one command; returns the process exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    start = time.perf_counter()
    try:
        ns = build_parser().parse_args(argv)
        if ns.command is None:
            raise UsageError("a command is required: " + ", ".join(COMMANDS))
        cfg = RunConfig.from_namespace(ns)
        doc = _HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"gfbm-price: usage error: {exc}", file=stderr)
        return 1
    except GfbmError as exc:
        print(f"gfbm-price: {type(exc).__name__}: {exc}", file=stderr)
        return 1
    doc["runtime_ms"] = 1e3 * (time.perf_counter() - start)
    if cfg.fmt == "csv":
        stdout.write(_to_csv(doc))
    else:
        stdout.write(json.dumps(doc, indent=2) + "\n")
    if cfg.command == "validate" and not doc["passed"]:
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
