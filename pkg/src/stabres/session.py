"""Sessions: the typed container for a full analysis, with deterministic
JSON persistence and the CSV import/export formats.

Determinism contract: identical sessions serialize to identical bytes.
Floats are emitted through repr (shortest round-trip), complex numbers as
[re, im] pairs, and every object writes its fields in a fixed order, so
byte equality is meaningful for regression comparisons.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .continuation import BranchPointEstimate, StationaryPoint, Trajectory
from .errors import MigrationError, SchemaError, ValidationError
from .hamiltonian import ScalingParameter
from .schlessinger import ContinuedFraction, FitDiagnostics
from .stabilization import SOURCE_IMPORTED, AvoidedCrossing, StabilizationData, StableWindow

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class FitRecord:
    id: str
    window_id: str | None
    point_indices: tuple[int, ...]
    order: int
    forced: bool
    fraction: ContinuedFraction
    diagnostics: FitDiagnostics | None = None


@dataclass(frozen=True)
class TrajectoryRecord:
    id: str
    fit_id: str | None
    trajectory: Trajectory


@dataclass(frozen=True)
class StationaryRecord:
    id: str
    fit_id: str | None
    point: StationaryPoint


@dataclass(frozen=True)
class BranchPointRecord:
    id: str
    fit_id: str | None
    estimate: BranchPointEstimate


@dataclass
class Session:
    id: str
    source: str = "computed"
    units: str = "hartree"
    created_at: str | None = None
    metadata: dict[str, str] = field(default_factory=dict)
    stabilization: StabilizationData | None = None
    windows: dict[str, StableWindow] = field(default_factory=dict)
    crossings: tuple[AvoidedCrossing, ...] = ()
    fits: dict[str, FitRecord] = field(default_factory=dict)
    trajectories: dict[str, TrajectoryRecord] = field(default_factory=dict)
    stationary_points: dict[str, StationaryRecord] = field(default_factory=dict)
    branch_points: dict[str, BranchPointRecord] = field(default_factory=dict)

    def set_stabilization(self, data: StabilizationData, windows=(), crossings=()):
        self.stabilization = data
        self.windows = {}
        self.crossings = tuple(crossings)
        self.fits = {}
        self.trajectories = {}
        self.stationary_points = {}
        self.branch_points = {}
        for w in windows:
            self.add_window(w)

    def add_window(self, window: StableWindow) -> str:
        wid = f"w{len(self.windows)}"
        self.windows[wid] = window
        return wid

    def add_fit(
        self,
        fraction: ContinuedFraction,
        point_indices,
        window_id: str | None = None,
        diagnostics: FitDiagnostics | None = None,
        forced: bool = False,
    ) -> FitRecord:
        if window_id is not None and window_id not in self.windows:
            raise ValidationError(f"unknown window id '{window_id}'")
        rec = FitRecord(
            id=f"f{len(self.fits)}",
            window_id=window_id,
            point_indices=tuple(int(i) for i in point_indices),
            order=fraction.order,
            forced=bool(forced),
            fraction=fraction,
            diagnostics=diagnostics,
        )
        self.fits[rec.id] = rec
        return rec

    def add_trajectory(self, trajectory: Trajectory, fit_id: str | None = None) -> TrajectoryRecord:
        if fit_id is not None and fit_id not in self.fits:
            raise ValidationError(f"unknown fit id '{fit_id}'")
        rec = TrajectoryRecord(id=f"t{len(self.trajectories)}", fit_id=fit_id, trajectory=trajectory)
        self.trajectories[rec.id] = rec
        return rec

    def add_stationary(self, point: StationaryPoint, fit_id: str | None = None) -> StationaryRecord:
        if fit_id is not None and fit_id not in self.fits:
            raise ValidationError(f"unknown fit id '{fit_id}'")
        rec = StationaryRecord(id=f"s{len(self.stationary_points)}", fit_id=fit_id, point=point)
        self.stationary_points[rec.id] = rec
        return rec

    def add_branch_point(
        self, estimate: BranchPointEstimate, fit_id: str | None = None
    ) -> BranchPointRecord:
        if fit_id is not None and fit_id not in self.fits:
            raise ValidationError(f"unknown fit id '{fit_id}'")
        rec = BranchPointRecord(id=f"b{len(self.branch_points)}", fit_id=fit_id, estimate=estimate)
        self.branch_points[rec.id] = rec
        return rec


def deterministic_id(prefix: str, *parts) -> str:
    digest = hashlib.sha256("\x1f".join(str(p) for p in parts).encode("utf-8")).hexdigest()
    return f"{prefix}-{digest[:12]}"


# ---------------------------------------------------------------- to JSON

def cpair(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _floats(xs) -> list[float]:
    return [float(x) for x in xs]


def fraction_to_dict(cf: ContinuedFraction) -> dict:
    return {
        "abscissae": _floats(cf.abscissae),
        "values": _floats(cf.values),
        "coefficients": [cpair(z) for z in cf.coefficients],
    }


def diagnostics_to_dict(d: FitDiagnostics | None) -> dict | None:
    if d is None:
        return None
    return {
        "interpolation_max": float(d.interpolation_max),
        "off_sample_max": float(d.off_sample_max),
        "leave_one_out_max": float(d.leave_one_out_max),
        "coefficient_max": float(d.coefficient_max),
        "density_warning": bool(d.density_warning),
        "warnings": list(d.warnings),
    }


def trajectory_to_dict(t: Trajectory) -> dict:
    return {
        "kind": t.kind,
        "fixed_value": float(t.fixed_value),
        "grid": _floats(t.grid),
        "energies": [cpair(e) for e in t.energies],
        "pade_errors": _floats(t.pade_errors),
        "pole_at": _floats(t.pole_at),
    }


def stationary_to_dict(p: StationaryPoint) -> dict:
    return {
        "eta_star": {"alpha": float(p.eta_star.alpha), "theta": float(p.eta_star.theta)},
        "energy": cpair(p.energy),
        "width": float(p.width),
        "derivative_norm": float(p.derivative_norm),
        "pade_error": float(p.pade_error),
        "window_id": p.window_id,
        "theta_cross_section": None
        if p.theta_cross_section is None
        else trajectory_to_dict(p.theta_cross_section),
        "alpha_cross_section": None
        if p.alpha_cross_section is None
        else trajectory_to_dict(p.alpha_cross_section),
    }


def branch_point_to_dict(b: BranchPointEstimate) -> dict:
    return {
        "eta_bp": cpair(b.eta_bp),
        "energy_bp": cpair(b.energy_bp),
        "coefficient_b": cpair(b.coefficient_b),
        "residual": float(b.residual),
        "poor_fit": bool(b.poor_fit),
    }


def window_to_dict(w: StableWindow) -> dict:
    return {
        "root_index": int(w.root_index),
        "alpha_range": _floats(w.alpha_range),
        "point_indices": [int(i) for i in w.point_indices],
        "flatness": float(w.flatness),
    }


def crossing_to_dict(c: AvoidedCrossing) -> dict:
    return {
        "root_pair": [int(c.root_pair[0]), int(c.root_pair[1])],
        "alpha_at_min_gap": float(c.alpha_at_min_gap),
        "min_gap": float(c.min_gap),
        "grid_index": int(c.grid_index),
        "participants": [int(c.participants[0]), int(c.participants[1])],
    }


def stabilization_to_dict(d: StabilizationData | None) -> dict | None:
    if d is None:
        return None
    return {
        "alpha_grid": _floats(d.alpha_grid),
        "curves": [_floats(row) for row in d.curves],
        "tracking_quality": _floats(d.tracking_quality),
        "source": d.source,
        "metadata": list(d.metadata),
    }


def session_to_dict(s: Session) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "id": s.id,
        "created_at": s.created_at,
        "source": s.source,
        "units": s.units,
        "metadata": {k: s.metadata[k] for k in sorted(s.metadata)},
        "stabilization": stabilization_to_dict(s.stabilization),
        "windows": [{"id": wid, **window_to_dict(w)} for wid, w in s.windows.items()],
        "crossings": [crossing_to_dict(c) for c in s.crossings],
        "fits": [
            {
                "id": f.id,
                "window_id": f.window_id,
                "point_indices": [int(i) for i in f.point_indices],
                "order": int(f.order),
                "forced": bool(f.forced),
                "fraction": fraction_to_dict(f.fraction),
                "diagnostics": diagnostics_to_dict(f.diagnostics),
            }
            for f in s.fits.values()
        ],
        "trajectories": [
            {"id": t.id, "fit_id": t.fit_id, **trajectory_to_dict(t.trajectory)}
            for t in s.trajectories.values()
        ],
        "stationary_points": [
            {"id": p.id, "fit_id": p.fit_id, **stationary_to_dict(p.point)}
            for p in s.stationary_points.values()
        ],
        "branch_points": [
            {"id": b.id, "fit_id": b.fit_id, **branch_point_to_dict(b.estimate)}
            for b in s.branch_points.values()
        ],
    }


def to_json(doc) -> str:
    """The one JSON emitter: fixed separators and indent, insertion order."""
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=True) + "\n"


def session_to_json(s: Session) -> str:
    return to_json(session_to_dict(s))


def save_session(s: Session, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(session_to_json(s))


# -------------------------------------------------------------- from JSON

def _from_pair(v) -> complex:
    return complex(float(v[0]), float(v[1]))


def fraction_from_dict(d: dict) -> ContinuedFraction:
    return ContinuedFraction(
        abscissae=tuple(float(x) for x in d["abscissae"]),
        values=tuple(float(x) for x in d["values"]),
        coefficients=tuple(_from_pair(z) for z in d["coefficients"]),
    )


def diagnostics_from_dict(d: dict | None) -> FitDiagnostics | None:
    if d is None:
        return None
    return FitDiagnostics(
        interpolation_max=float(d["interpolation_max"]),
        off_sample_max=float(d["off_sample_max"]),
        leave_one_out_max=float(d["leave_one_out_max"]),
        coefficient_max=float(d["coefficient_max"]),
        density_warning=bool(d["density_warning"]),
        warnings=tuple(d["warnings"]),
    )


def trajectory_from_dict(d: dict) -> Trajectory:
    return Trajectory(
        kind=d["kind"],
        fixed_value=float(d["fixed_value"]),
        grid=tuple(float(x) for x in d["grid"]),
        energies=tuple(_from_pair(e) for e in d["energies"]),
        pade_errors=tuple(float(x) for x in d["pade_errors"]),
        pole_at=tuple(float(x) for x in d["pole_at"]),
    )


def stationary_from_dict(d: dict) -> StationaryPoint:
    return StationaryPoint(
        eta_star=ScalingParameter(
            alpha=float(d["eta_star"]["alpha"]), theta=float(d["eta_star"]["theta"])
        ),
        energy=_from_pair(d["energy"]),
        width=float(d["width"]),
        derivative_norm=float(d["derivative_norm"]),
        pade_error=float(d["pade_error"]),
        window_id=d["window_id"],
        theta_cross_section=None
        if d["theta_cross_section"] is None
        else trajectory_from_dict(d["theta_cross_section"]),
        alpha_cross_section=None
        if d["alpha_cross_section"] is None
        else trajectory_from_dict(d["alpha_cross_section"]),
    )


def branch_point_from_dict(d: dict) -> BranchPointEstimate:
    return BranchPointEstimate(
        eta_bp=_from_pair(d["eta_bp"]),
        energy_bp=_from_pair(d["energy_bp"]),
        coefficient_b=_from_pair(d["coefficient_b"]),
        residual=float(d["residual"]),
        poor_fit=bool(d["poor_fit"]),
    )


def session_from_dict(doc: dict) -> Session:
    try:
        version = doc["schema_version"]
    except (KeyError, TypeError) as exc:
        raise SchemaError("session document lacks schema_version") from exc
    if not isinstance(version, int):
        raise SchemaError(f"schema_version must be an integer, got {version!r}")
    if version > SCHEMA_VERSION:
        raise MigrationError(
            f"session schema_version {version} is newer than supported {SCHEMA_VERSION}"
        )
    try:
        s = Session(
            id=doc["id"],
            source=doc["source"],
            units=doc["units"],
            created_at=doc["created_at"],
            metadata=dict(doc["metadata"]),
        )
        st = doc["stabilization"]
        if st is not None:
            s.stabilization = StabilizationData(
                alpha_grid=np.asarray(st["alpha_grid"], dtype=float),
                curves=np.asarray(st["curves"], dtype=float),
                tracking_quality=np.asarray(st["tracking_quality"], dtype=float),
                source=st["source"],
                metadata=tuple(st["metadata"]),
            )
        for w in doc["windows"]:
            s.windows[w["id"]] = StableWindow(
                root_index=int(w["root_index"]),
                alpha_range=(float(w["alpha_range"][0]), float(w["alpha_range"][1])),
                point_indices=tuple(int(i) for i in w["point_indices"]),
                flatness=float(w["flatness"]),
            )
        s.crossings = tuple(
            AvoidedCrossing(
                root_pair=(int(c["root_pair"][0]), int(c["root_pair"][1])),
                alpha_at_min_gap=float(c["alpha_at_min_gap"]),
                min_gap=float(c["min_gap"]),
                grid_index=int(c["grid_index"]),
                participants=(int(c["participants"][0]), int(c["participants"][1])),
            )
            for c in doc["crossings"]
        )
        for f in doc["fits"]:
            s.fits[f["id"]] = FitRecord(
                id=f["id"],
                window_id=f["window_id"],
                point_indices=tuple(int(i) for i in f["point_indices"]),
                order=int(f["order"]),
                forced=bool(f["forced"]),
                fraction=fraction_from_dict(f["fraction"]),
                diagnostics=diagnostics_from_dict(f["diagnostics"]),
            )
        for t in doc["trajectories"]:
            s.trajectories[t["id"]] = TrajectoryRecord(
                id=t["id"], fit_id=t["fit_id"], trajectory=trajectory_from_dict(t)
            )
        for p in doc["stationary_points"]:
            s.stationary_points[p["id"]] = StationaryRecord(
                id=p["id"], fit_id=p["fit_id"], point=stationary_from_dict(p)
            )
        for b in doc["branch_points"]:
            s.branch_points[b["id"]] = BranchPointRecord(
                id=b["id"], fit_id=b["fit_id"], estimate=branch_point_from_dict(b)
            )
    except (KeyError, IndexError, TypeError) as exc:
        raise SchemaError(f"malformed session document: {exc!r}") from exc
    return s


def load_session(path: str) -> Session:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path} is not valid JSON: {exc}") from exc
    return session_from_dict(doc)


# ------------------------------------------------------------- CSV import

def import_stabilization(path: str, source: str | None = None) -> StabilizationData:
    """Read tracked stabilization curves from CSV or JSON.

    CSV columns are `alpha,root,energy`; `#` comment lines are preserved
    as metadata. A file without the root column is accepted: levels are
    then re-threaded by nearest-energy assignment and the result is
    flagged in metadata, since energy-order threading can swap curves at
    close crossings.
    """
    if path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        try:
            grid = np.asarray(doc["alpha_grid"], dtype=float)
            curves = np.asarray(doc["curves"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed stabilization JSON: {exc!r}") from exc
        quality = np.asarray(doc.get("tracking_quality", np.ones(max(len(grid) - 1, 0))), dtype=float)
        meta = tuple(doc.get("metadata", ()))
        return StabilizationData(
            alpha_grid=grid,
            curves=curves,
            tracking_quality=quality,
            source=source or SOURCE_IMPORTED,
            metadata=meta,
        )

    comments: list[str] = []
    rows: list[tuple[float, int | None, float]] = []
    has_root: bool | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                comments.append(line.lstrip("#").strip())
                continue
            cells = [c.strip() for c in line.split(",")]
            if cells and cells[0].lower() == "alpha":
                names = [c.lower() for c in cells]
                if names == ["alpha", "root", "energy"]:
                    has_root = True
                elif names == ["alpha", "energy"]:
                    has_root = False
                else:
                    raise SchemaError(
                        f"{path}:{lineno}: expected header alpha,root,energy or alpha,energy"
                    )
                continue
            if has_root is None:
                has_root = len(cells) == 3
            try:
                if has_root:
                    if len(cells) != 3:
                        raise ValueError("need 3 columns")
                    rows.append((float(cells[0]), int(cells[1]), float(cells[2])))
                else:
                    if len(cells) != 2:
                        raise ValueError("need 2 columns")
                    rows.append((float(cells[0]), None, float(cells[1])))
            except ValueError as exc:
                raise SchemaError(f"{path}:{lineno}: bad row {line!r}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: no data rows")

    grid = np.array(sorted({r[0] for r in rows}))
    meta = list(comments)
    if has_root:
        roots = sorted({r[1] for r in rows})
        lookup = {(r[0], r[1]): r[2] for r in rows}
        curves = np.empty((len(roots), len(grid)))
        for i, root in enumerate(roots):
            for j, a in enumerate(grid):
                if (a, root) not in lookup:
                    raise SchemaError(f"{path}: root {root} has no energy at alpha={a}")
                curves[i, j] = lookup[(a, root)]
    else:
        by_alpha: dict[float, list[float]] = {}
        for a, _, e in rows:
            by_alpha.setdefault(a, []).append(e)
        counts = {len(v) for v in by_alpha.values()}
        if len(counts) != 1:
            raise SchemaError(f"{path}: unequal level counts per alpha: {sorted(counts)}")
        k = counts.pop()
        curves = np.empty((k, len(grid)))
        prev = np.array(sorted(by_alpha[grid[0]]))
        curves[:, 0] = prev
        for j, a in enumerate(grid[1:], 1):
            new = np.array(sorted(by_alpha[a]))
            cost = np.abs(prev[:, None] - new[None, :])
            ri, ci = linear_sum_assignment(cost)
            perm = ci[np.argsort(ri)]
            curves[:, j] = new[perm]
            prev = curves[:, j]
        meta.append("tracking: nearest-energy assignment (input had no root column)")
    quality = np.ones(max(len(grid) - 1, 0))
    return StabilizationData(
        alpha_grid=grid,
        curves=curves,
        tracking_quality=quality,
        source=source or SOURCE_IMPORTED,
        metadata=tuple(meta),
    )


# ------------------------------------------------------------- CSV export

def stabilization_csv(data: StabilizationData) -> str:
    lines = [f"# {m}" for m in data.metadata]
    lines.append("alpha,root,energy")
    for j, a in enumerate(data.alpha_grid):
        for i in range(data.n_roots):
            lines.append(f"{float(a)!r},{i},{float(data.curves[i, j])!r}")
    return "\n".join(lines) + "\n"


def trajectory_csv(t: Trajectory) -> str:
    from .continuation import THETA_TRAJECTORY

    lines = ["theta,alpha,re_e,im_e,pade_error"]
    for g, e, err in zip(t.grid, t.energies, t.pade_errors):
        theta, alpha = (g, t.fixed_value) if t.kind == THETA_TRAJECTORY else (t.fixed_value, g)
        lines.append(f"{float(theta)!r},{float(alpha)!r},{e.real!r},{e.imag!r},{float(err)!r}")
    return "\n".join(lines) + "\n"


def landscape_csv(alphas, thetas, d_theta, d_alpha) -> str:
    lines = ["alpha,theta,d_theta,d_alpha"]
    for i, a in enumerate(alphas):
        for j, t in enumerate(thetas):
            lines.append(
                f"{float(a)!r},{float(t)!r},{float(d_theta[i][j])!r},{float(d_alpha[i][j])!r}"
            )
    return "\n".join(lines) + "\n"
