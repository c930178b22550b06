"""Command-line entry point.

Commands: solve-resolvent, evolve, besov-norm, verify and sweep.  Every run
echoes its effective configuration (all defaults filled in) to
``<out>/config.yaml``; feeding that file back with ``--config`` reproduces
the run.

Exit codes: 0 success, 1 audit failure (reports are still written), 2 bad
configuration or arguments, 3 inadmissible lambda, 4 I/O failure, 5 contour
construction failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import yaml

from .besov import BesovParams, besov_norm_halfspace
from .grid_fourier import FieldFormatError, HalfGrid, NormalGrid, TangentialGrid, load_field, save_field
from .resolvent_halfspace import DEFAULT_PAD, solve_resolvent
from .semigroup import (
    ContourError,
    ContourSpec,
    EvolutionState,
    build_contour,
    evolve_many,
    l1_maximal_integral,
    state_l2,
)
from .spectral_core import (
    DomainError,
    FluidParams,
    PreconditionError,
    SectorSpec,
    admissibility_thresholds,
    sector_violation,
)
from .verify import (
    TARGETS,
    Report,
    SampleSpec,
    corpus,
    decay_sweeps,
    default_rays,
    default_sigma,
    h_norm,
    halfspace_suite,
    l1_corpus,
    recipe,
    residual_resolvent,
    residue_suite,
    semigroup_suite,
    state_corpus,
    symbols_suite,
    t1_rate_probe,
    wholespace_suite,
    write_csv,
    write_json,
)

EXIT_OK, EXIT_AUDIT, EXIT_CONFIG, EXIT_LAMBDA, EXIT_IO, EXIT_CONTOUR = 0, 1, 2, 3, 4, 5
SUITES = ("symbols", "residue", "wholespace", "halfspace", "semigroup", "all")


class ConfigError(ValueError):
    pass


@dataclass
class VerifySizes:
    """Corpus and sample sizes used by the verify and sweep commands."""

    residue_points: int = 20
    audit_samples: int = 10_000
    wholespace_lambdas: int = 5
    halfspace_data: int = 5
    halfspace_lambdas: int = 5
    semigroup_states: int = 5
    l1_states: int = 10
    sweep_corpus: int = 10
    ray_points: int = 16
    ray_span: float = 1e3


@dataclass
class EvolveOptions:
    t: list = field(default_factory=list)
    t_min: float = 1e-3
    T_end: float = 10.0
    per_decade: int = 12
    recipe: str = "gauss-1"


@dataclass
class RunConfig:
    params: FluidParams = field(default_factory=FluidParams)
    sector: SectorSpec = field(default_factory=SectorSpec)
    grid: HalfGrid = field(default_factory=HalfGrid)
    besov: BesovParams = field(default_factory=BesovParams)
    sigma: float | None = None
    contour: ContourSpec = field(default_factory=ContourSpec)
    seed: int = 0
    threads: int = 1
    pad: int = DEFAULT_PAD
    out: str = "out"
    verify: VerifySizes = field(default_factory=VerifySizes)
    evolve: EvolveOptions = field(default_factory=EvolveOptions)

    def __post_init__(self):
        bp = self.besov
        if not bp.halfspace_equivalent:
            raise ConfigError(f"besov.s = {bp.s} must lie in (-1 + 1/q, 1/q) = ({-1 + 1 / bp.q:.4g}, {1 / bp.q:.4g})")
        if self.sigma is None:
            self.sigma = default_sigma(bp)
        lo, hi = -1 + 1 / bp.q, 1 / bp.q
        if not (self.sigma > 0 and lo < bp.s - self.sigma and bp.s + self.sigma < hi):
            raise ConfigError(f"sigma = {self.sigma} must satisfy -1 + 1/q < s - sigma < s + sigma < 1/q")
        if self.params.dim != self.grid.dim:
            raise ConfigError(f"params.dim = {self.params.dim} does not match the grid dimension {self.grid.dim}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def to_dict(self) -> dict:
        t, n = self.grid.tangential, self.grid.normal
        return {
            "params": asdict(self.params),
            "sector": asdict(self.sector),
            "grid": {"L": t.L, "M": t.M, "Y_max": n.Y_max, "n": n.n},
            "besov": {"s": self.besov.s, "q": self.besov.q},
            "sigma": self.sigma,
            "contour": asdict(self.contour),
            "seed": self.seed,
            "threads": self.threads,
            "pad": self.pad,
            "out": self.out,
            "verify": asdict(self.verify),
            "evolve": asdict(self.evolve),
        }

    @classmethod
    def from_dict(cls, d: dict | None) -> "RunConfig":
        d = dict(d or {})
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        try:
            kw = {}
            if "params" in d:
                kw["params"] = _build(FluidParams, d["params"], "params")
            if "sector" in d:
                kw["sector"] = _build(SectorSpec, d["sector"], "sector")
            if "grid" in d:
                g = _section(d["grid"], "grid", {"L", "M", "Y_max", "n"})
                dim = int((d.get("params") or {}).get("dim", 2))
                tg = TangentialGrid(float(g.get("L", 8.0)), int(g.get("M", 128)), dim - 1)
                ng = NormalGrid(float(g.get("Y_max", 8.0)), int(g.get("n", 96)))
                kw["grid"] = HalfGrid(tg, ng)
            elif "params" in d and int(d["params"].get("dim", 2)) != 2:
                kw["grid"] = HalfGrid(TangentialGrid(dim_t=int(d["params"]["dim"]) - 1))
            if "besov" in d:
                b = _section(d["besov"], "besov", {"s", "q"})
                kw["besov"] = BesovParams(float(b.get("s", 0.0)), float(b.get("q", 2.0)), 1.0)
            if "contour" in d:
                kw["contour"] = _build(ContourSpec, d["contour"], "contour")
            if "verify" in d:
                kw["verify"] = _build(VerifySizes, d["verify"], "verify")
            if "evolve" in d:
                kw["evolve"] = _build(EvolveOptions, d["evolve"], "evolve")
            for key in ("sigma", "seed", "threads", "pad", "out"):
                if key in d:
                    kw[key] = d[key]
            if kw.get("sigma") is not None:
                kw["sigma"] = float(kw["sigma"])
            return cls(**kw)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


def _section(value, name: str, allowed: set) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"config section {name!r} must be a mapping")
    bad = set(value) - allowed
    if bad:
        raise ConfigError(f"unknown keys in {name!r}: {', '.join(sorted(bad))}")
    return value


def _build(cls, value, name: str):
    allowed = {f.name for f in fields(cls)}
    return cls(**_section(value, name, allowed))


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigError("config file must hold a mapping at the top level")
    return RunConfig.from_dict(data)


def _parse_lambda(text: str) -> complex:
    try:
        re_, im_ = text.split(",")
        return complex(float(re_), float(im_))
    except ValueError as exc:
        raise ConfigError(f"--lambda expects RE,IM, got {text!r}") from exc


def _parse_times(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"--t expects a comma-separated list of numbers, got {text!r}") from exc


def _validate_times(ts: list) -> list:
    if any(not t > 0 for t in ts):
        raise ConfigError("times must be positive")
    if len(set(ts)) != len(ts):
        raise ConfigError("duplicate times in the t list")
    if ts != sorted(ts):
        raise ConfigError("times must be ascending")
    return ts


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.yaml").write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=True))
    return out


def _load_pair(cfg: RunConfig, args):
    if args.input_f or args.input_g:
        if not (args.input_f and args.input_g):
            raise ConfigError("--input-f and --input-g must be given together")
        return load_field(args.input_f), load_field(args.input_g)
    try:
        return recipe(args.recipe or cfg.evolve.recipe, cfg.grid, cfg.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# --------------------------------------------------------------------------
# commands


def cmd_solve_resolvent(cfg: RunConfig, args) -> int:
    if args.lam is None:
        raise ConfigError("solve-resolvent needs --lambda RE,IM")
    lam = _parse_lambda(args.lam)
    try:
        why = sector_violation(lam, cfg.sector, cfg.params)
    except DomainError as exc:
        why = str(exc)
    if why:
        print(f"inadmissible lambda {lam}: {why}", file=sys.stderr)
        return EXIT_LAMBDA
    f, g = _load_pair(cfg, args)
    try:
        sol = solve_resolvent(lam, f, g, cfg.params, cfg.pad)
    except PreconditionError as exc:
        print(f"inadmissible lambda {lam}: {exc}", file=sys.stderr)
        return EXIT_LAMBDA
    out = _outdir(cfg)
    res = residual_resolvent(lam, f, g, sol, cfg.params)
    save_field(out / "rho.npz", sol.rho)
    save_field(out / "u.npz", sol.u)
    write_json({"lambda": lam, "eq1": res.eq1, "eq2": res.eq2, "boundary": res.boundary,
                "within_contract": res.within()}, out / "residuals.json")
    bp = cfg.besov
    rows = [{"quantity": "data", "norm": h_norm(f, g, bp)},
            {"quantity": "solution", "norm": h_norm(sol.rho, sol.u, bp)},
            {"quantity": "lambda_solution", "norm": abs(lam) * h_norm(sol.rho, sol.u, bp)}]
    write_csv(rows, out / "norms.csv", columns=["quantity", "norm"])
    print(f"eq1 {res.eq1:.3e}  eq2 {res.eq2:.3e}  boundary {res.boundary:.3e}")
    return EXIT_OK


def _contour(cfg: RunConfig):
    return build_contour(cfg.contour, cfg.params, cfg.grid)


def cmd_evolve(cfg: RunConfig, args) -> int:
    ts = _parse_times(args.t) if args.t is not None else list(cfg.evolve.t)
    ts = _validate_times([float(t) for t in ts])
    rho0, u0 = _load_pair(cfg, args)
    s0 = EvolutionState(rho0, u0)
    try:
        contour = _contour(cfg)
    except ContourError as exc:
        print(f"contour construction failed: {exc}", file=sys.stderr)
        return EXIT_CONTOUR
    out = _outdir(cfg)
    rows = []
    if ts:
        if ts[0] < contour.t_min:
            raise ConfigError(f"smallest time {ts[0]} is below the contour reach {contour.t_min:.3g}")
        states = evolve_many(ts, s0, contour, cfg.params, pad=cfg.pad, workers=cfg.threads)
        n0 = state_l2(s0)
        for t, st in zip(ts, states):
            save_field(out / f"rho_t{t:.6g}.npz", st.rho)
            save_field(out / f"u_t{t:.6g}.npz", st.u)
            rows.append({"t": t, "l2": state_l2(st),
                         "relative_change": state_l2(st - s0) / n0 if n0 > 0 else 0.0})
    write_csv(rows, out / "trajectory.csv", columns=["t", "l2", "relative_change"])
    ev = cfg.evolve
    l1 = l1_maximal_integral(s0, ev.t_min, ev.T_end, contour, cfg.params, cfg.besov,
                             per_decade=ev.per_decade, pad=cfg.pad, workers=cfg.threads)
    write_json({"l1_integral": l1.value, "data_norm": l1.data_norm, "ratio": l1.ratio,
                "t_min": ev.t_min, "T_end": ev.T_end, "gamma_shift": l1.gamma_shift}, out / "l1.json")
    for r in rows:
        print(f"t {r['t']:.6g}  relative change {r['relative_change']:.3e}")
    print(f"L1 integral {l1.value:.6g}  ratio to data norm {l1.ratio:.6g}")
    return EXIT_OK


def cmd_besov_norm(cfg: RunConfig, args) -> int:
    if args.input:
        f = load_field(args.input)
        vals = {"field": float(besov_norm_halfspace(f, cfg.besov, check_range=False))}
    else:
        f, g = _load_pair(cfg, args)
        vals = {"f": float(besov_norm_halfspace(f, cfg.besov, check_range=False)),
                "g": float(besov_norm_halfspace(g, cfg.besov, check_range=False)),
                "pair_H": h_norm(f, g, cfg.besov)}
    out = _outdir(cfg)
    write_json({"s": cfg.besov.s, "q": cfg.besov.q, "norms": vals}, out / "besov_norm.json")
    for k, v in vals.items():
        print(f"{k} {v:.12g}")
    return EXIT_OK


def run_suite(name: str, cfg: RunConfig) -> Report:
    v = cfg.verify
    if name == "symbols":
        rep, audits = symbols_suite(cfg.params, SampleSpec(n=v.audit_samples, epsilon=cfg.sector.epsilon,
                                                           seed=cfg.seed))
        return rep
    if name == "residue":
        return residue_suite(cfg.params, n=v.residue_points, seed=cfg.seed, epsilon=cfg.sector.epsilon)
    if name == "wholespace":
        return wholespace_suite(cfg.params, cfg.grid, seed=cfg.seed, epsilon=cfg.sector.epsilon,
                                n_lambda=v.wholespace_lambdas)
    if name == "halfspace":
        return halfspace_suite(cfg.params, cfg.grid, seed=cfg.seed, epsilon=cfg.sector.epsilon,
                               n_data=v.halfspace_data, n_lambda=v.halfspace_lambdas, pad=cfg.pad)
    if name == "semigroup":
        contour = _contour(cfg)
        states = state_corpus(cfg.grid, v.semigroup_states, cfg.seed, cfg.besov, cfg.params)
        rep = semigroup_suite(states, contour, cfg.params, cfg.besov, cfg.sigma, t_min=cfg.evolve.t_min,
                              T_end=cfg.evolve.T_end, per_decade=cfg.evolve.per_decade, pad=cfg.pad,
                              workers=cfg.threads)
        if v.l1_states > v.semigroup_states:
            wide = l1_corpus(state_corpus(cfg.grid, v.l1_states, cfg.seed + 1, cfg.besov, cfg.params), contour,
                             cfg.params, cfg.besov, cfg.evolve.t_min, cfg.evolve.T_end,
                             cfg.evolve.per_decade, cfg.pad, cfg.threads)
            for c in wide.checks:
                rep.checks.append(replace(c, name=f"corpus_{c.name}"))
        probe = t1_rate_probe(cfg.grid, contour, cfg.params, cfg.besov, cfg.sigma, pad=cfg.pad,
                              workers=cfg.threads)
        rep.checks.extend(probe.checks)
        return rep
    raise ConfigError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")


def cmd_verify(cfg: RunConfig, args) -> int:
    suite = args.suite or "all"
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    names = SUITES[:-1] if suite == "all" else (suite,)
    try:
        reports = [run_suite(n, cfg) for n in names]
    except ContourError as exc:
        print(f"contour construction failed: {exc}", file=sys.stderr)
        return EXIT_CONTOUR
    out = _outdir(cfg)
    ok = True
    for rep in reports:
        write_json(rep.to_dict(), out / f"{rep.suite}.json")
        write_csv(rep.check_rows(), out / f"{rep.suite}_checks.csv")
        if rep.rows:
            write_csv(rep.rows, out / f"{rep.suite}_rows.csv")
        for c in rep.checks:
            print(f"{'PASS' if c.passed else 'FAIL'}  {rep.suite}.{c.name}  {c.value:.4g} {c.relation} {c.threshold:.4g}")
        ok &= rep.passed
    return EXIT_OK if ok else EXIT_AUDIT


def cmd_sweep(cfg: RunConfig, args) -> int:
    targets = [t for t in (args.target or ",".join(TARGETS)).split(",") if t]
    bad = [t for t in targets if t not in TARGETS]
    if bad:
        raise ConfigError(f"unknown sweep targets {bad}; choose from {', '.join(TARGETS)}")
    v = cfg.verify
    _, lam2 = admissibility_thresholds(cfg.params, cfg.sector, cfg.grid.tangential.nyquist)
    rays = default_rays(lam2, cfg.sector.epsilon, v.ray_points, v.ray_span)
    data = corpus(cfg.grid, v.sweep_corpus, cfg.seed, cfg.besov)
    reports = decay_sweeps(targets, rays, data, cfg.besov, cfg.params, cfg.sigma, cfg.pad, cfg.sector.epsilon)
    out = _outdir(cfg)
    rows = [r for rep in reports for r in rep.rows()]
    write_csv(rows, out / "sweep_points.csv", columns=["target", "theta", "lambda_abs", "ratio"])
    summary = [{"target": r.target, "theta": r.theta, "exponent": r.exponent, "constant": r.constant,
                "budget": r.budget, "slack": r.slack, "passed": r.passed} for r in reports]
    write_csv(summary, out / "sweep_summary.csv",
              columns=["target", "theta", "exponent", "constant", "budget", "slack", "passed"])
    write_json({"lambda_2": lam2, "sigma": cfg.sigma, "reports": [r.to_dict() for r in reports]},
               out / "sweep.json")
    for r in summary:
        print(f"{'PASS' if r['passed'] else 'FAIL'}  {r['target']:8s} theta {r['theta']:+.3f}  "
              f"exponent {r['exponent']:+.3f}  budget {r['budget']:+.3f}")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_AUDIT


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--seed", type=int, help="seed for generated data and samples")
    common.add_argument("--threads", type=int, help="worker cap for contour solves")

    p = argparse.ArgumentParser(prog="stokes-resolvent",
                                description="Resolvent and semigroup solver for the compressible Stokes half space.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve-resolvent", parents=[common], help="solve the resolvent problem at one lambda")
    s.add_argument("--lambda", dest="lam", metavar="RE,IM", help="resolvent parameter")
    s.add_argument("--recipe", help="test-data recipe: zero, gauss-1 or random")
    s.add_argument("--input-f", help="density data (.npz or .json field)")
    s.add_argument("--input-g", help="velocity data (.npz or .json field)")

    e = sub.add_parser("evolve", parents=[common], help="apply the semigroup to an initial state")
    e.add_argument("--t", help="comma-separated ascending times")
    e.add_argument("--recipe", help="initial-state recipe: zero, gauss-1 or random")
    e.add_argument("--input-f", help="initial density")
    e.add_argument("--input-g", help="initial velocity")

    b = sub.add_parser("besov-norm", parents=[common], help="half-space Besov norms of a field or recipe")
    b.add_argument("--input", help="field container")
    b.add_argument("--recipe", help="data recipe")
    b.add_argument("--input-f", help=argparse.SUPPRESS)
    b.add_argument("--input-g", help=argparse.SUPPRESS)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("--suite", help=f"one of {', '.join(SUITES)}")

    w = sub.add_parser("sweep", parents=[common], help="decay-exponent sweeps along rays")
    w.add_argument("--target", help=f"comma-separated subset of {', '.join(TARGETS)}")
    return p


COMMANDS = {
    "solve-resolvent": cmd_solve_resolvent,
    "evolve": cmd_evolve,
    "besov-norm": cmd_besov_norm,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config)
        overrides = {k: getattr(args, k) for k in ("out", "seed", "threads") if getattr(args, k, None) is not None}
        if overrides:
            cfg = RunConfig.from_dict({**cfg.to_dict(), **overrides})
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, FieldFormatError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
