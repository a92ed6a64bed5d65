"""``decohere`` command line: one scenario per invocation, CSV out.

Every option may also come from a JSON document given with ``--config``;
keys are the long option names with dashes or underscores.  Command-line
flags win over the file.

Exit codes: 0 success, 2 invalid input, 3 resource cap, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import nullcontext

import numpy as np

from . import __version__
from .csvio import format_csv, read_csv, write_csv
from .decoherence import (
    FeasibilityInput,
    dephasing_curve,
    discrete_s,
    estimate_decoherence_time,
    factor_oscillator,
    factor_two_level_exact,
    factor_two_level_thermal,
    factor_weak_coupling,
    feasibility,
    s_integral,
)
from .density import SystemState, evolve_reduced, purity
from .environment import (
    VACUUM,
    OscillatorCoupling,
    SpectralDensity,
    ThermalState,
    build_uniform_bath,
    load_bath,
    load_spectral_density,
    sample_bath,
)
from .errors import DomainError, NoDecayError, NumericError, ResourceCapError
from .registers import (
    RegisterSpec,
    decompose_subspaces,
    load_coupling_matrix,
    xi_table,
)
from .shor import (
    DecoherenceKernel,
    EfficiencySpec,
    ShorInstance,
    classify_efficiency,
    shor_distribution_decohered,
    success_probability,
)

EXIT_OK, EXIT_VALIDATION, EXIT_RESOURCE, EXIT_NUMERIC = 0, 2, 3, 4


class ConfigError(DomainError):
    pass


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).replace(",", " ").split()]


def _complexes(text):
    if isinstance(text, (list, tuple)):
        out = []
        for v in text:
            out.append(complex(*v) if isinstance(v, (list, tuple)) else complex(v))
        return out
    return [complex(v.replace(" ", "")) for v in str(text).split(",")]


def _require(o, *names):
    for name in names:
        if getattr(o, name) is None:
            raise ConfigError(f"{name}: required")


def _choice(o, name, allowed):
    val = getattr(o, name)
    if val not in allowed:
        raise ConfigError(f"{name}: expected one of {', '.join(allowed)}, got {val!r}")
    return val


def _time_grid(o):
    n = int(o.n_points)
    if n < 2:
        raise ConfigError("n_points: need at least 2 points")
    if not 0 <= o.t_min < o.t_max:
        raise ConfigError("t_min/t_max: need 0 <= t_min < t_max")
    return np.linspace(o.t_min, o.t_max, n)


def _thermal(o):
    return VACUUM if o.beta is None else ThermalState(float(o.beta))


def _bath(o):
    if o.bath_file:
        return load_bath(o.bath_file)
    if o.omega is None or o.g is None:
        raise ConfigError("omega/g: give --omega and --g or --bath-file")
    return build_uniform_bath(int(o.n_modes), float(o.omega), float(o.g))


def _emit(o, kind, columns, rows, report=None):
    text = format_csv(kind, columns, rows)
    if o.out:
        write_csv(o.out, kind, columns, rows)
        if report:
            print(report)
    else:
        sys.stdout.write(text)
        if report:
            print(report, file=sys.stderr)


def cmd_factor(o):
    _require(o, "xi_a", "xi_b")
    _choice(o, "model", ("exact", "thermal", "weak", "oscillator"))
    bath = _bath(o)
    times = _time_grid(o)
    if o.model == "oscillator":
        kw = {"oc": OscillatorCoupling(o.xi_a, o.xi_b)}
        fn = factor_oscillator
    else:
        kw = {"xi_a": float(o.xi_a), "xi_b": float(o.xi_b)}
        if o.model == "exact":
            fn = factor_two_level_exact
        elif o.model == "thermal":
            fn, kw["th"] = factor_two_level_thermal, _thermal(o)
        else:
            fn, kw["beta"] = factor_weak_coupling, o.beta
    curve = dephasing_curve(bath, fn, times, **kw)
    F = curve.factors
    rows = zip(times, F.real, F.imag, np.abs(F), curve.s_values)
    _emit(o, "factor", ["t", "re_F", "im_F", "abs_F", "S"], rows)


def _spectral_density(o):
    _choice(o, "kind", ("flat", "ohmic", "tabulated"))
    if o.kind == "tabulated":
        if not o.table:
            raise ConfigError("table: tabulated density needs --table")
        return load_spectral_density(o.table, o.cutoff)
    if o.cutoff is None:
        raise ConfigError("cutoff: required for flat and ohmic densities")
    if o.kind == "flat":
        _require(o, "gamma")
        return SpectralDensity.flat(float(o.gamma), float(o.cutoff))
    _require(o, "eta")
    return SpectralDensity.ohmic(float(o.eta), float(o.cutoff))


def cmd_spectrum(o):
    sd = _spectral_density(o)
    times = _time_grid(o)
    S = s_integral(sd, times)
    columns, cols = ["t", "S"], [times, S]
    if o.n_modes:
        columns.append("S_discrete")
        cols.append(discrete_s(sample_bath(sd, int(o.n_modes)), times))
    report = None
    mask = times > 0
    try:
        fit = estimate_decoherence_time(times[mask], np.exp(-S[mask]))
        report = f"rate={fit.rate!r} t_d={fit.t_d!r} residual={fit.residual!r}"
    except NoDecayError:
        report = "no decay detected"
    _emit(o, "spectrum", columns, zip(*cols), report)


def cmd_dfs(o):
    if o.coupling_file:
        cm = load_coupling_matrix(o.coupling_file, tol=o.tol)
        dec = decompose_subspaces(cm)
        rows = sorted((n, gi) for gi, g in enumerate(dec) for n in g.members)
        _emit(o, "dfs-groups", ["label", "group"], rows,
              f"groups={len(dec)} dimensions={dec.dimensions}")
        return
    if o.lambdas is None:
        raise ConfigError("lambdas: give --lambdas or --coupling-file")
    spec = RegisterSpec(_floats(o.lambdas))
    xis = xi_table(spec)
    levels = []
    group = np.empty(xis.size, dtype=int)
    for n, v in enumerate(xis):
        for gi, lv in enumerate(levels):
            if abs(v - lv) <= o.tol:
                group[n] = gi
                break
        else:
            group[n] = len(levels)
            levels.append(v)
    member = (np.ones(xis.size, dtype=int) if o.xi is None
              else (np.abs(xis - o.xi) <= o.tol).astype(int))
    L = spec.L
    columns = ["index"] + [f"q{k}" for k in range(L)] + ["xi", "group", "member"]
    rows = [[n] + [(n >> k) & 1 for k in range(L)] + [xis[n], int(group[n]), int(member[n])]
            for n in range(xis.size)]
    _emit(o, "dfs", columns, rows,
          f"groups={len(levels)} members={int(member.sum())}")


def cmd_density(o):
    if o.lambdas is None or o.amplitudes is None:
        raise ConfigError("lambdas/amplitudes: both are required")
    lam = _floats(o.lambdas)
    spec = RegisterSpec(lam, _floats(o.etas) if o.etas is not None else None)
    amps = np.array(_complexes(o.amplitudes))
    if amps.size != 2 ** spec.L:
        raise ConfigError(f"amplitudes: need {2 ** spec.L} values, got {amps.size}")
    state = SystemState(amps / np.linalg.norm(amps))
    bath, th = _bath(o), _thermal(o)
    if o.snapshot is not None:
        rho = np.asarray(evolve_reduced(state, spec, bath, th, float(o.snapshot)))
        d = rho.shape[0]
        rows = [(i, j, rho[i, j].real, rho[i, j].imag)
                for i in range(d) for j in range(d)]
        _emit(o, "density", ["row", "col", "re", "im"], rows,
              f"purity={purity(rho)!r}")
        return
    times = _time_grid(o)
    rows = [(t, purity(evolve_reduced(state, spec, bath, th, t))) for t in times]
    _emit(o, "purity", ["t", "purity"], rows)


def cmd_shor(o):
    _require(o, "n", "x", "q")
    _choice(o, "kernel", ("isolated", "complete", "two-level"))
    inst = ShorInstance(int(o.n), int(o.x), int(o.q))
    if o.kernel == "isolated":
        kernel = DecoherenceKernel.isolated()
    elif o.kernel == "complete":
        kernel = DecoherenceKernel.complete()
    else:
        kernel = DecoherenceKernel.two_level(_bath(o), float(o.t),
                                             L=inst.register_bits, th=_thermal(o))
    dist = shor_distribution_decohered(inst, kernel, max_work=float(o.max_work))
    p = dist.probabilities
    rows = [(c, k, p[c, k]) for c in range(inst.q) for k in range(inst.r)]
    report = None
    if inst.r > 1:
        report = success_probability(dist, inst).report()
    _emit(o, "shor", ["c", "k", "p"], rows, report)


def cmd_efficiency(o):
    _choice(o, "f", ("reciprocal-log", "reciprocal", "sampled"))
    poly = _floats(o.poly)
    if o.f == "reciprocal-log":
        es = EfficiencySpec.reciprocal_log(float(o.c), poly)
    elif o.f == "reciprocal":
        es = EfficiencySpec.reciprocal(poly)
    else:
        if not o.f_table:
            raise ConfigError("f_table: sampled f needs --f-table")
        data = np.loadtxt(o.f_table, comments="#", ndmin=2)
        es = EfficiencySpec.sampled(data[:, 0], data[:, 1], poly)
    grid = np.geomspace(float(o.n_min), float(o.n_max), int(o.n_points))
    v = classify_efficiency(es, grid, margin=float(o.margin))
    _emit(o, "efficiency", ["N", "Lambda"], zip(v.N, v.lam), v.report())


def cmd_feasibility(o):
    _require(o, "L", "tau", "K", "td")
    verdict = feasibility(FeasibilityInput(int(o.L), float(o.tau), float(o.K),
                                           float(o.td)))
    print(verdict.report())


def cmd_inspect(o):
    table = read_csv(o.file)
    print(f"kind={table.kind} version={table.version} rows={table.data.shape[0]} "
          f"columns={','.join(table.columns)}")
    for i, name in enumerate(table.columns):
        col = table.data[:, i]
        if col.size:
            print(f"  {name}: min={float(col.min())!r} max={float(col.max())!r}")


# (flag, default, type, help) per subcommand; defaults apply after the config file
_BATH = [
    ("--omega", None, float, "mode frequency of a uniform bath"),
    ("--g", None, float, "mode coupling of a uniform bath"),
    ("--n-modes", 1, int, "number of bath modes"),
    ("--bath-file", None, str, "two-column (omega, g) bath file"),
    ("--beta", None, float, "inverse temperature (omit for vacuum)"),
]
_GRID = [
    ("--t-min", 0.0, float, "first time point"),
    ("--t-max", 10.0, float, "last time point"),
    ("--n-points", 200, int, "number of time points"),
]
SUBCOMMANDS = {
    "factor": (cmd_factor, _BATH + _GRID + [
        ("--xi-a", None, float, "coupling eigenvalue (ket side); f(alpha) for oscillator"),
        ("--xi-b", None, float, "coupling eigenvalue (bra side); f(beta) for oscillator"),
        ("--model", "exact", str, "exact | thermal | weak | oscillator"),
    ]),
    "spectrum": (cmd_spectrum, _GRID + [
        ("--kind", "flat", str, "flat | ohmic | tabulated"),
        ("--gamma", None, float, "flat density rate"),
        ("--eta", None, float, "ohmic strength"),
        ("--cutoff", None, float, "frequency cutoff"),
        ("--table", None, str, "two-column (omega, rho*g^2) file"),
        ("--n-modes", None, int, "also report the sampled-bath S"),
    ]),
    "dfs": (cmd_dfs, [
        ("--lambdas", None, str, "comma-separated qubit couplings"),
        ("--xi", None, float, "mark labels with this xi"),
        ("--tol", 1e-12, float, "xi / signature tolerance"),
        ("--coupling-file", None, str, "coupling matrix file to decompose"),
    ]),
    "density": (cmd_density, _BATH + _GRID + [
        ("--lambdas", None, str, "comma-separated qubit couplings"),
        ("--etas", None, str, "comma-separated qubit splittings"),
        ("--amplitudes", None, str, "comma-separated complex amplitudes"),
        ("--snapshot", None, float, "emit rho(t) at this time instead of purity"),
    ]),
    "shor": (cmd_shor, _BATH + [
        ("--n", None, int, "number to factor"),
        ("--x", None, int, "base coprime to n"),
        ("--q", None, int, "first register size"),
        ("--kernel", "isolated", str, "isolated | complete | two-level"),
        ("--t", 0.0, float, "exposure time for the two-level kernel"),
        ("--max-work", 2.0 ** 32, float, "work cap"),
    ]),
    "efficiency": (cmd_efficiency, [
        ("--f", "reciprocal-log", str, "reciprocal-log | reciprocal | sampled"),
        ("--c", 3.0, float, "c in 1/(c ln N)"),
        ("--f-table", None, str, "two-column (N, f) file for sampled f"),
        ("--poly", "0,3", str, "polynomial coefficients, lowest order first"),
        ("--n-min", 10.0, float, "grid start"),
        ("--n-max", 1e12, float, "grid end"),
        ("--n-points", 221, int, "grid size"),
        ("--margin", 1e-3, float, "classification margin"),
    ]),
    "feasibility": (cmd_feasibility, [
        ("--L", None, int, "qubit count"),
        ("--tau", None, float, "time per step"),
        ("--K", None, float, "number of steps"),
        ("--td", None, float, "single-qubit decoherence time"),
    ]),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decohere", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"decohere {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, opts) in SUBCOMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with option values")
        p.add_argument("--out", help="CSV output path (default: stdout)")
        for flag, _, typ, hlp in opts:
            p.add_argument(flag, type=typ, default=argparse.SUPPRESS, help=hlp)
    p = sub.add_parser("inspect")
    p.add_argument("file")
    return parser


def _resolve(name, args) -> argparse.Namespace:
    """Merge defaults < config file < command-line flags."""
    _, opts = SUBCOMMANDS[name]
    values = {flag[2:].replace("-", "_"): default for flag, default, _, _ in opts}
    types = {flag[2:].replace("-", "_"): typ for flag, _, typ, _ in opts}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ConfigError("config: top level must be a JSON object")
        scenario = cfg.pop("scenario", name)
        if scenario != name:
            raise ConfigError(f"scenario: config is for {scenario!r}, not {name!r}")
        for key, val in cfg.items():
            k = key.replace("-", "_")
            if k == "out":
                values["out"] = val
                continue
            if k not in values:
                raise ConfigError(f"{key}: unknown option for {name}")
            if val is not None and types[k] is not str:
                try:
                    val = types[k](val)
                except (TypeError, ValueError):
                    raise ConfigError(f"{key}: cannot convert {val!r}") from None
            values[k] = val
    for k, v in vars(args).items():
        if k in ("command", "config"):
            continue
        if k == "out" and v is None:
            values.setdefault("out", None)
            continue
        values[k] = v
    return argparse.Namespace(**values)


def _thread_limit():
    raw = os.environ.get("DECOHERE_THREADS")
    if not raw:
        return nullcontext()
    try:
        n = int(raw)
        if n < 1:
            raise ValueError
    except ValueError:
        raise ConfigError(f"DECOHERE_THREADS: expected a positive integer, got {raw!r}")
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with _thread_limit():
            if args.command == "inspect":
                cmd_inspect(args)
            else:
                opts = _resolve(args.command, args)
                SUBCOMMANDS[args.command][0](opts)
    except ResourceCapError as exc:
        print(f"decohere: resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NumericError as exc:
        print(f"decohere: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"decohere: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
