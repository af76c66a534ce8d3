"""Command-line front end. Thin argument parsing over pipeline.py; all
output flows through the deterministic serializer so identical inputs
produce identical bytes.
"""

from __future__ import annotations

import argparse
import sys

from . import pipeline, session as sess
from .config import DEFAULT, Config, load_config
from .continuation import alpha_trajectory, theta_trajectory
from .errors import StabresError, ValidationError
from .stabilization import detect_windows

PROG = "stabres"


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog=PROG,
        description="Resonance extraction from stabilization curves by "
        "rational continuation, with a direct complex-scaling cross-check.",
    )
    p.add_argument("--config", help="key = value file overriding numeric defaults")
    p.add_argument(
        "--show-config", action="store_true", help="print the effective configuration and exit"
    )
    sub = p.add_subparsers(dest="command")

    def add_model_args(sp, required=True):
        sp.add_argument("--model", required=required, help="benchmark | harmonic | kinetic")
        sp.add_argument(
            "--basis",
            required=required,
            help="ho:N[:omega[:order]] or et:N:beta0:ratio[:order]",
        )

    sp = sub.add_parser("stabilize", help="sweep real alpha and detect windows/crossings")
    add_model_args(sp, required=False)
    sp.add_argument("--grid", help="alpha grid start:stop:count")
    sp.add_argument("--import", dest="import_path", help="CSV/JSON curves instead of computing")
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--session", required=True, help="session file to create")
    sp.add_argument("--id", help="session id (default: derived from inputs)")
    sp.add_argument("--json", action="store_true", help="print the full session document")

    sp = sub.add_parser("windows", help="re-detect stable windows on a stored sweep")
    sp.add_argument("--session", required=True)
    sp.add_argument("--flatness-tol", type=float)
    sp.add_argument("--min-points", type=int)
    sp.add_argument("--gap-tol", type=float)
    sp.add_argument("--guard-steps", type=int)
    sp.add_argument("--json", action="store_true")

    sp = sub.add_parser("fit", help="fit a continued fraction to window points")
    sp.add_argument("--session", required=True)
    sp.add_argument("--window", required=True, help="window id, e.g. w0")
    sp.add_argument("--points", help="inclusive grid index range i0:i1")
    sp.add_argument("--indices", help="comma-separated grid indices")
    sp.add_argument("--order", type=int, help="number of fit points M (even subsample)")
    sp.add_argument("--force", action="store_true", help="fit across a crossing anyway")

    sp = sub.add_parser("trajectory", help="evaluate a fit along a theta or alpha ray")
    sp.add_argument("--session", required=True)
    sp.add_argument("--fit", required=True, help="fit id, e.g. f0")
    sp.add_argument("--kind", required=True, choices=("theta", "alpha"))
    sp.add_argument("--fixed", type=float, required=True, help="the held parameter value")
    sp.add_argument("--grid", required=True, help="swept values start:stop:count")
    sp.add_argument("--csv", help="also write theta,alpha,re_e,im_e,pade_error rows here")

    sp = sub.add_parser("resonance", help="full chain: sweep, windows, fits, stationary points")
    add_model_args(sp)
    sp.add_argument("--grid", required=True, help="alpha grid start:stop:count")
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--session", help="also save the full session here")
    sp.add_argument("--id", help="session id (default: derived from inputs)")

    sp = sub.add_parser("crosscheck", help="re-derive a stationary point by diagonalization")
    sp.add_argument("--session", required=True)
    sp.add_argument("--stationary", required=True, help="stationary point id, e.g. s0")
    sp.add_argument("--model", help="override the model recorded in the session")
    sp.add_argument("--basis", help="override the basis recorded in the session")

    sp = sub.add_parser("landscape", help="|dE/dtheta| and |dE/dalpha| over a scaling grid")
    add_model_args(sp)
    sp.add_argument("--alpha", help="alpha grid start:stop:count (default from config)")
    sp.add_argument("--theta", help="theta grid start:stop:count (default from config)")
    sp.add_argument("--seed-re", type=float, required=True, help="seed energy, real part")
    sp.add_argument("--seed-im", type=float, default=0.0, help="seed energy, imaginary part")
    sp.add_argument("--csv", help="write alpha,theta,d_theta,d_alpha rows here")

    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)
    return p


def _effective_config(args) -> Config:
    cfg = DEFAULT
    if args.config:
        cfg = load_config(args.config, base=cfg)
    if getattr(args, "threads", None):
        cfg = cfg.replace(threads=args.threads)
    return cfg


def _load(path: str) -> sess.Session:
    try:
        return sess.load_session(path)
    except OSError as exc:
        raise ValidationError(f"cannot read session '{path}': {exc}") from exc


def _indices_from_args(args) -> list[int] | None:
    if args.points and args.indices:
        raise ValidationError("give either --points or --indices, not both")
    if args.points:
        lo, _, hi = args.points.partition(":")
        try:
            lo_i, hi_i = int(lo), int(hi)
        except ValueError as exc:
            raise ValidationError(f"bad --points '{args.points}': {exc}") from exc
        if hi_i < lo_i:
            raise ValidationError("--points range must be increasing")
        return list(range(lo_i, hi_i + 1))
    if args.indices:
        try:
            return sorted({int(tok) for tok in args.indices.split(",") if tok.strip()})
        except ValueError as exc:
            raise ValidationError(f"bad --indices '{args.indices}': {exc}") from exc
    return None


def _print(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _window_summary(wid: str, w) -> str:
    return (
        f"{wid} root={w.root_index} alpha=[{w.alpha_range[0]:.6g},{w.alpha_range[1]:.6g}] "
        f"points={len(w.point_indices)} flatness={w.flatness:.6g}"
    )


def _cmd_stabilize(args, cfg: Config) -> int:
    if args.import_path:
        data = sess.import_stabilization(args.import_path)
        label = args.import_path
    else:
        if not (args.model and args.basis and args.grid):
            raise ValidationError("stabilize needs --model/--basis/--grid or --import")
        model = pipeline.parse_model(args.model)
        basis_spec = pipeline.parse_basis(args.basis)
        grid = pipeline.parse_grid(args.grid)
        data, _, _, _ = pipeline.run_stabilization(
            model, basis_spec, grid, threads=cfg.threads, config=cfg
        )
        label = f"{args.model}/{args.basis}/{args.grid}"
    windows, crossings = detect_windows(data, config=cfg)
    sid = args.id or sess.deterministic_id("sess", label)
    s = sess.Session(id=sid, source=data.source)
    if not args.import_path:
        s.metadata["model"] = args.model
        s.metadata["basis"] = args.basis
        s.metadata["grid"] = args.grid
    s.set_stabilization(data, windows, crossings)
    sess.save_session(s, args.session)
    if args.json:
        _print(sess.session_to_json(s))
        return 0
    _print(f"session {sid}: {data.n_roots} curves over {len(data.alpha_grid)} alpha points")
    _print(f"windows: {len(s.windows)}")
    for wid, w in s.windows.items():
        _print(_window_summary(wid, w))
    _print(f"crossings: {len(s.crossings)}")
    for c in s.crossings:
        _print(
            f"  pair=({c.root_pair[0]},{c.root_pair[1]}) alpha={c.alpha_at_min_gap:.6g} "
            f"gap={c.min_gap:.6g}"
        )
    return 0


def _cmd_windows(args, cfg: Config) -> int:
    s = _load(args.session)
    if s.stabilization is None:
        raise ValidationError("session has no stabilization data")
    windows, crossings = detect_windows(
        s.stabilization,
        flatness_tol=args.flatness_tol,
        min_points=args.min_points,
        gap_tol=args.gap_tol,
        guard_steps=args.guard_steps,
        config=cfg,
    )
    s.set_stabilization(s.stabilization, windows, crossings)
    sess.save_session(s, args.session)
    if args.json:
        doc = {
            "windows": [{"id": wid, **sess.window_to_dict(w)} for wid, w in s.windows.items()],
            "crossings": [sess.crossing_to_dict(c) for c in s.crossings],
        }
        _print(sess.to_json(doc))
        return 0
    for wid, w in s.windows.items():
        _print(_window_summary(wid, w))
    return 0


def _cmd_fit(args, cfg: Config) -> int:
    s = _load(args.session)
    if s.stabilization is None:
        raise ValidationError("session has no stabilization data")
    if args.window not in s.windows:
        raise ValidationError(f"unknown window id '{args.window}'")
    window = s.windows[args.window]
    indices = _indices_from_args(args)
    cf, abs_idx, diag, hit = pipeline.make_fit(
        s.stabilization,
        window,
        s.crossings,
        point_indices=indices,
        order=args.order,
        force=args.force,
        config=cfg,
    )
    rec = s.add_fit(cf, abs_idx, window_id=args.window, diagnostics=diag, forced=hit is not None)
    sess.save_session(s, args.session)
    doc = {
        "id": rec.id,
        "window_id": rec.window_id,
        "point_indices": list(rec.point_indices),
        "order": rec.order,
        "forced": rec.forced,
        "diagnostics": sess.diagnostics_to_dict(diag),
    }
    _print(sess.to_json(doc))
    return 0


def _cmd_trajectory(args, cfg: Config) -> int:
    s = _load(args.session)
    if args.fit not in s.fits:
        raise ValidationError(f"unknown fit id '{args.fit}'")
    cf = s.fits[args.fit].fraction
    grid = pipeline.parse_grid(args.grid)
    if args.kind == "theta":
        traj = theta_trajectory(cf, alpha=args.fixed, theta_grid=grid, config=cfg)
    else:
        traj = alpha_trajectory(cf, theta=args.fixed, alpha_grid=grid, config=cfg)
    rec = s.add_trajectory(traj, fit_id=args.fit)
    sess.save_session(s, args.session)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(sess.trajectory_csv(traj))
    _print(sess.to_json({"id": rec.id, "fit_id": rec.fit_id, **sess.trajectory_to_dict(traj)}))
    return 0


def _cmd_resonance(args, cfg: Config) -> int:
    model = pipeline.parse_model(args.model)
    basis_spec = pipeline.parse_basis(args.basis)
    grid = pipeline.parse_grid(args.grid)
    sid = args.id or sess.deterministic_id("sess", args.model, args.basis, args.grid)
    s = sess.Session(id=sid)
    s.metadata["model"] = args.model
    s.metadata["basis"] = args.basis
    s.metadata["grid"] = args.grid
    pipeline.resonance_pipeline(s, model, basis_spec, grid, threads=cfg.threads, config=cfg)
    if args.session:
        sess.save_session(s, args.session)
    doc = {
        "session": s.id,
        "stationary_points": [
            {"id": rec.id, "fit_id": rec.fit_id, **sess.stationary_to_dict(rec.point)}
            for rec in s.stationary_points.values()
        ],
    }
    _print(sess.to_json(doc))
    return 0


def _cmd_crosscheck(args, cfg: Config) -> int:
    s = _load(args.session)
    if args.stationary not in s.stationary_points:
        raise ValidationError(f"unknown stationary point id '{args.stationary}'")
    model_text = args.model or s.metadata.get("model")
    basis_text = args.basis or s.metadata.get("basis")
    if not model_text or not basis_text:
        raise ValidationError(
            "session does not record model/basis; pass --model and --basis explicitly"
        )
    point = s.stationary_points[args.stationary].point
    ucs_pt, difference = pipeline.crosscheck_point(
        pipeline.parse_model(model_text), pipeline.parse_basis(basis_text), point, config=cfg
    )
    _print(sess.to_json(pipeline.crosscheck_doc(args.stationary, point, ucs_pt, difference)))
    return 0


def _cmd_landscape(args, cfg: Config) -> int:
    model = pipeline.parse_model(args.model)
    basis_spec = pipeline.parse_basis(args.basis)
    alpha_grid = pipeline.parse_grid(args.alpha) if args.alpha else None
    theta_grid = None
    if args.theta:
        theta_grid = pipeline.parse_grid(args.theta)
        if theta_grid[0] < 0:
            raise ValidationError("theta grid must start at >= 0")
    seed = complex(args.seed_re, args.seed_im)
    ls = pipeline.run_landscape(
        model, basis_spec, seed, alpha_grid=alpha_grid, theta_grid=theta_grid, config=cfg
    )
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(sess.landscape_csv(ls.alphas, ls.thetas, ls.d_theta, ls.d_alpha))
    _print(sess.to_json(pipeline.landscape_doc(ls)))
    return 0


def _cmd_serve(args, cfg: Config) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(config=cfg), host=args.host, port=args.port)
    return 0


_COMMANDS = {
    "stabilize": _cmd_stabilize,
    "windows": _cmd_windows,
    "fit": _cmd_fit,
    "trajectory": _cmd_trajectory,
    "resonance": _cmd_resonance,
    "crosscheck": _cmd_crosscheck,
    "landscape": _cmd_landscape,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _effective_config(args)
        if args.show_config:
            _print(cfg.show())
            return 0
        if not args.command:
            parser.print_help()
            return 2
        return _COMMANDS[args.command](args, cfg)
    except StabresError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
