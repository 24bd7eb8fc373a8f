"""Command-line harness.

Subcommands:

* ``run``          integrate one model and write a run directory
* ``compare``      convergence study of several schemes against a gold run
* ``upsample``     spectrally refine a stored snapshot
* ``list-models``  registered model names
* ``describe``     one model's equations, parameters, defaults

Configuration can come from a ``--config`` file (see runio); every flag
overrides the corresponding file key.  Exit codes: 0 success, 1 invalid
configuration or arguments, 2 numerical abort (blow-up or step failure).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .adi import adi_integrate
from .grid import make_grid, state_from_physical
from .harness import convergence_study
from .models import MODELS, default_timestep, get_model
from .postprocess import fourier_upsample_1d, fourier_upsample_2d
from .runio import (ALL_SCHEMES, ConfigError, RunConfig, RunWriter, load_config,
                    load_snapshot, read_header, read_index)
from .steppers import BlowUpError, StepControl, StepSizeError, integrate

__all__ = ["main"]


def _parse_params(pairs, problems) -> dict:
    out = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep or not key:
            problems.append(f"--param expects key=value, got {pair!r}")
            continue
        try:
            out[key.strip()] = float(value)
        except ValueError:
            problems.append(f"--param {key.strip()}: not a number: {value!r}")
    return out


def _merge_config(args, problems) -> RunConfig | None:
    """File config overlaid with whatever flags were given."""
    base = None
    if args.config:
        try:
            base = load_config(args.config)
        except ConfigError as err:
            problems.extend(err.problems)
            return None
        except OSError as err:
            problems.append(f"cannot read config: {err}")
            return None

    def pick(flag, key):
        return flag if flag is not None else (getattr(base, key) if base else None)

    params = dict(base.params) if base else {}
    params.update(_parse_params(args.param, problems))
    model = pick(args.model, "model")
    if model is None:
        problems.append("model is required (--model or a config file)")
        return None
    scheme = pick(args.scheme, "scheme")
    return RunConfig(
        model=model,
        scheme=scheme if scheme is not None else "rk4",
        n=pick(args.n, "n"),
        half_length=pick(args.L, "half_length"),
        dt=pick(args.dt, "dt"),
        rel_tol=pick(args.tol, "rel_tol"),
        t_final=pick(args.t_final, "t_final"),
        snap_every=pick(args.snap_every, "snap_every"),
        out=pick(args.out, "out"),
        dealias=bool(pick(args.dealias, "dealias")),
        params=params,
    )


def _fail(problems) -> int:
    for p in problems:
        print(f"error: {p}", file=sys.stderr)
    return 1


def _cmd_run(args) -> int:
    problems: list[str] = []
    cfg = _merge_config(args, problems)
    if cfg is not None:
        problems.extend(cfg.validate())
    if problems:
        return _fail(problems)

    spec = get_model(cfg.model)
    grid = cfg.grid()
    out = Path(cfg.out) if cfg.out else Path("runs") / cfg.model
    writer = RunWriter(out, grid, cfg.model, spec.species,
                       config=cfg, snap_every=cfg.snap_every)
    try:
        if cfg.scheme == "adi":
            summary = adi_integrate(spec, grid, dt=cfg.resolved_dt(),
                                    t_final=cfg.t_final, params=cfg.params,
                                    snap_every=cfg.snap_every, sink=writer)
        elif cfg.scheme == "ck45":
            control = StepControl(dt=cfg.dt if cfg.dt is not None else 0.1,
                                  rel_tol=cfg.rel_tol if cfg.rel_tol is not None else 1e-4)
            summary = integrate(spec, grid, scheme="ck45", t_final=cfg.t_final,
                                control=control, params=cfg.params,
                                dealias=cfg.dealias, snap_every=cfg.snap_every,
                                sink=writer)
        else:
            summary = integrate(spec, grid, scheme=cfg.scheme,
                                t_final=cfg.t_final, dt=cfg.resolved_dt(),
                                params=cfg.params, dealias=cfg.dealias,
                                snap_every=cfg.snap_every, sink=writer)
    except (BlowUpError, StepSizeError) as err:
        status = "blowup" if isinstance(err, BlowUpError) else "stepfail"
        writer.finish(None, status=status, detail=str(err))
        print(f"error: integration aborted: {err}", file=sys.stderr)
        print(f"partial artifacts in {out}", file=sys.stderr)
        return 2
    writer.finish(summary)
    print(f"{cfg.model} [{cfg.scheme}] -> {out}: {len(writer.rows)} snapshots, "
          f"{summary.steps} steps ({summary.accepted} accepted, "
          f"{summary.rejected} rejected), t_end = {summary.t_end:g}, "
          f"wall = {summary.wall_time:.3g} s")
    return 0


def _cmd_compare(args) -> int:
    problems: list[str] = []
    params = _parse_params(args.param, problems)
    if args.model not in MODELS:
        problems.append(f"unknown model {args.model!r}; valid models: "
                        f"{', '.join(sorted(MODELS))}")
    schemes = tuple(args.scheme) if args.scheme else ("rk4", "etdrk4", "etdrk4b")
    for scheme in schemes + (args.gold_scheme,):
        if scheme not in ALL_SCHEMES:
            problems.append(f"unknown scheme {scheme!r}; valid schemes: "
                            f"{', '.join(ALL_SCHEMES)}")
    if not args.dt:
        problems.append("at least one --dt is required")
    elif any(dt <= 0 for dt in args.dt):
        problems.append("every --dt must be positive")
    if args.t_final is None or args.t_final < 0:
        problems.append("--t-final is required and must be nonnegative")
    if ("adi" in schemes or args.gold_scheme == "adi") and args.model != "fisher2d":
        problems.append("scheme adi is valid only with model fisher2d")
    if args.model in MODELS and params:
        try:
            get_model(args.model).params(params)
        except ValueError as err:
            problems.append(str(err))
    if problems:
        return _fail(problems)

    grid = None
    if args.n is not None or args.L is not None:
        spec = get_model(args.model)
        n0, L0, dims = spec.default_grid_args
        grid = make_grid(args.n if args.n is not None else n0,
                         args.L if args.L is not None else L0, dims)
    try:
        study = convergence_study(args.model, schemes=schemes, dts=args.dt,
                                  t_final=args.t_final, grid=grid, params=params,
                                  gold_scheme=args.gold_scheme, gold_dt=args.gold_dt,
                                  dealias=bool(args.dealias))
    except (BlowUpError, StepSizeError) as err:
        print(f"error: gold run aborted, study cancelled: {err}", file=sys.stderr)
        return 2
    csv = study.to_csv()
    out = Path(args.out) if args.out else Path(f"compare_{args.model}.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(csv)
    sys.stdout.write(csv)
    print(f"written to {out}")
    return 0


def _parse_sizes(text, dims, problems):
    try:
        sizes = tuple(int(v) for v in text.split(","))
    except ValueError:
        problems.append(f"--n expects an integer or comma pair, got {text!r}")
        return None
    if len(sizes) == 1 and dims == 2:
        sizes = sizes * 2
    if len(sizes) != dims:
        problems.append(f"--n gave {len(sizes)} sizes for a {dims}D snapshot")
        return None
    if any(s < 2 or s % 2 for s in sizes):
        problems.append(f"target sizes must be even and >= 2, got {sizes}")
        return None
    return sizes


def _cmd_upsample(args) -> int:
    problems: list[str] = []
    run_dir = Path(args.run_dir)
    try:
        header = read_header(run_dir)
        rows = read_index(run_dir)
    except OSError as err:
        return _fail([f"not a run directory: {err}"])
    if not rows:
        return _fail(["run directory has no snapshots"])
    index = args.index if args.index is not None else rows[-1][0]
    sizes = _parse_sizes(args.n, header["dims"], problems)
    if sizes is not None and any(new < old for new, old in zip(sizes, header["n"])):
        problems.append(f"shrink rejected: requested {sizes}, stored {header['n']}")
    if problems:
        return _fail(problems)
    try:
        t, fields = load_snapshot(run_dir, index)
    except ValueError as err:
        return _fail([str(err)])

    if header["dims"] == 1:
        up = np.stack([fourier_upsample_1d(f, sizes[0]) for f in fields])
    else:
        nx, ny = sizes
        up = np.stack([fourier_upsample_2d(f, nx, ny) for f in fields])
    out = run_dir / ("up" + "x".join(str(v) for v in sizes))
    grid = make_grid(sizes, header["L"], header["dims"])
    writer = RunWriter(out, grid, header["model"], header["species"])
    writer(state_from_physical(grid, list(up), t=t))
    writer.finish(None, status="ok",
                  detail=f"snapshot {index} of {run_dir} upsampled to {sizes}")
    print(f"upsampled snapshot {index} ({header['n']} -> {sizes}) -> {out}")
    return 0


def _cmd_list_models(_args) -> int:
    for name in MODELS:
        print(name)
    return 0


def _cmd_describe(args) -> int:
    if args.model not in MODELS:
        return _fail([f"unknown model {args.model!r}; valid models: "
                      f"{', '.join(sorted(MODELS))}"])
    spec = get_model(args.model)
    n, L, dims = spec.default_grid_args
    print(spec.name)
    print(f"  species: {spec.species}")
    print(f"  equations: {spec.equations}")
    print(f"  default grid: n = {n}, L = {L:g}, {dims}D")
    print(f"  default dt: {default_timestep(spec):g}")
    if spec.default_params:
        print("  parameters:")
        for key in sorted(spec.default_params):
            doc = spec.param_doc.get(key, "")
            suffix = f"  ({doc})" if doc else ""
            print(f"    {key} = {spec.default_params[key]:g}{suffix}")
    else:
        print("  parameters: none")
    return 0


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--model", help="registered model name")
    p.add_argument("--scheme", help="rk4 | ck45 | etdrk4 | etdrk4b | adi")
    p.add_argument("--n", type=int, help="modes per direction")
    p.add_argument("--L", type=float, help="domain half-length")
    p.add_argument("--dt", type=float, help="fixed step (initial step for ck45)")
    p.add_argument("--tol", type=float, help="relative tolerance for ck45")
    p.add_argument("--t-final", type=float, dest="t_final")
    p.add_argument("--snap-every", type=float, dest="snap_every",
                   help="snapshot cadence in model time")
    p.add_argument("--out", help="output directory")
    p.add_argument("--dealias", action=argparse.BooleanOptionalAction,
                   default=None, help="2/3-rule dealiasing of the reaction term")
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="model parameter override (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdspectral",
        description="Pseudospectral reaction-diffusion solver harness.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a model, write artifacts")
    _add_run_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_cmp = sub.add_parser("compare", help="convergence study against a gold run")
    p_cmp.add_argument("--model", required=True)
    p_cmp.add_argument("--scheme", action="append",
                       help="scheme to sweep (repeatable; default the three 4th-order ones)")
    p_cmp.add_argument("--dt", type=float, action="append",
                       help="step size in the sweep (repeatable)")
    p_cmp.add_argument("--t-final", type=float, dest="t_final")
    p_cmp.add_argument("--n", type=int)
    p_cmp.add_argument("--L", type=float)
    p_cmp.add_argument("--gold-scheme", default="etdrk4b", dest="gold_scheme")
    p_cmp.add_argument("--gold-dt", type=float, default=1e-3, dest="gold_dt",
                       help="gold step; 1e-3 is the desk-scale reference default")
    p_cmp.add_argument("--out", help="CSV path (default compare_<model>.csv)")
    p_cmp.add_argument("--dealias", action=argparse.BooleanOptionalAction, default=None)
    p_cmp.add_argument("--param", action="append", metavar="KEY=VALUE")
    p_cmp.set_defaults(func=_cmd_compare)

    p_up = sub.add_parser("upsample", help="spectrally refine a stored snapshot")
    p_up.add_argument("run_dir", help="run directory holding the snapshot")
    p_up.add_argument("--index", type=int, help="snapshot index (default: last)")
    p_up.add_argument("--n", required=True,
                      help="new size, or nx,ny for an anisotropic 2D target")
    p_up.set_defaults(func=_cmd_upsample)

    p_ls = sub.add_parser("list-models", help="print registered model names")
    p_ls.set_defaults(func=_cmd_list_models)

    p_desc = sub.add_parser("describe", help="print one model's registry entry")
    p_desc.add_argument("model")
    p_desc.set_defaults(func=_cmd_describe)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors; remap
        return 0 if exc.code in (0, None) else 1
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
