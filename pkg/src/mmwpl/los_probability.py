"""Line-of-sight probability: ray-traced circle sampling and an analytic model.

The site-specific estimate classifies evenly spaced receiver positions on
circles around a transmitter as LOS or NLOS against a building database.  The
analytic side is a breakpoint plus exponential-decay model fitted to such
curves by exhaustive mean-squared-error search.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import (
    BuildingDB,
    Point3,
    PointInsideBuildingError,
    _segments_blocked,
    find_containing_building,
    points_strictly_inside,
)

DEFAULT_N_POINTS = 100
DEFAULT_RX_HEIGHT_M = 1.5

CURVE_CSV_HEADER = "radius_m,p_los,valid"

# Integer search grid for the MMSE fit, meters.
_COARSE_GRID = np.arange(1.0, 201.0)
# Half-width and resolution of the local refinement pass.
_REFINE_SPAN_M = 1.0
_REFINE_STEP_M = 0.1


@dataclass(frozen=True)
class LosProbParams:
    """Parameters of the breakpoint/exponential-decay LOS probability model.

    ``d_bp_m`` is the breakpoint distance below which LOS probability is 1,
    ``alpha_m`` the exponential decay constant.  ``squared`` selects the
    squared form; the WINNER-style variant omits the outer square.
    """

    d_bp_m: float
    alpha_m: float
    squared: bool = True

    def __post_init__(self):
        if not (self.d_bp_m > 0 and np.isfinite(self.d_bp_m)):
            raise ValueError(f"d_bp_m must be positive, got {self.d_bp_m!r}")
        if not (self.alpha_m > 0 and np.isfinite(self.alpha_m)):
            raise ValueError(f"alpha_m must be positive, got {self.alpha_m!r}")


@dataclass(frozen=True)
class LosProbabilityCurve:
    """LOS probability per radius, with a validity mask.

    A radius is invalid when the probability was undefined there (every
    sampled circle position fell inside a building); ``p_los`` holds NaN at
    invalid radii.
    """

    radii_m: np.ndarray
    p_los: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        radii = np.asarray(self.radii_m, dtype=float)
        p = np.asarray(self.p_los, dtype=float)
        valid = np.asarray(self.valid, dtype=bool)
        if radii.ndim != 1 or p.shape != radii.shape or valid.shape != radii.shape:
            raise ValueError("radii_m, p_los and valid must be 1-D arrays of equal length")
        if radii.size == 0:
            raise ValueError("curve must contain at least one radius")
        if not np.all(np.diff(radii) > 0):
            raise ValueError("radii must be strictly increasing")
        good = p[valid]
        if good.size and (np.any(good < 0) or np.any(good > 1) or np.any(~np.isfinite(good))):
            raise ValueError("valid p_los values must lie in [0, 1]")
        object.__setattr__(self, "radii_m", radii)
        object.__setattr__(self, "p_los", p)
        object.__setattr__(self, "valid", valid)

    def __len__(self) -> int:
        return self.radii_m.size


def radius_grid(r_min: float, r_max: float, step: float) -> np.ndarray:
    """Radii r_min, r_min+step, ... up to and including r_max when it lands on the grid."""
    if r_min <= 0:
        raise ValueError(f"r_min must be positive, got {r_min:g}")
    if r_max < r_min:
        raise ValueError(f"r_max must be >= r_min, got r_min={r_min:g} r_max={r_max:g}")
    if step <= 0:
        raise ValueError(f"step must be positive, got {step:g}")
    count = int(np.floor((r_max - r_min) / step + 1e-9)) + 1
    return r_min + step * np.arange(count)


def los_probability_at_radius(
    db: BuildingDB,
    tx: Point3,
    radius_m: float,
    n_points: int = DEFAULT_N_POINTS,
    rx_height_m: float = DEFAULT_RX_HEIGHT_M,
    interior_counts_as_nlos: bool = False,
) -> float | None:
    """Fraction of circle positions with line of sight to the transmitter.

    ``n_points`` receiver positions are spread evenly around a circle of the
    given radius centered on the transmitter's ground position, at height
    ``rx_height_m``, starting on the +x axis.  Positions strictly inside a
    building are dropped from both numerator and denominator; pass
    ``interior_counts_as_nlos=True`` to keep them in the denominator as NLOS
    instead.

    Returns None when every position is interior (the probability is
    undefined at that radius).

    Raises:
        PointInsideBuildingError: when the transmitter is inside a building.
        ValueError: on a non-positive radius or fewer than 4 points.
    """
    if radius_m <= 0:
        raise ValueError(f"radius must be positive, got {radius_m:g}")
    if n_points < 4:
        raise ValueError(f"n_points must be at least 4, got {n_points}")
    idx = find_containing_building(db, tx)
    if idx is not None:
        raise PointInsideBuildingError(tx, idx)

    angles = 2.0 * np.pi * np.arange(n_points) / n_points
    rx = np.column_stack(
        (
            tx.x + radius_m * np.cos(angles),
            tx.y + radius_m * np.sin(angles),
            np.full(n_points, float(rx_height_m)),
        )
    )
    interior = points_strictly_inside(db, rx)
    exterior = ~interior
    n_exterior = int(exterior.sum())
    if n_exterior == 0:
        return None
    if len(db) == 0:
        n_los = n_exterior
    else:
        starts = np.tile(tx.to_array(), (n_exterior, 1))
        blocked = _segments_blocked(starts, rx[exterior], db.min_array, db.max_array)
        n_los = int((~blocked).sum())
    denominator = n_points if interior_counts_as_nlos else n_exterior
    return n_los / denominator


def los_probability_curve(
    db: BuildingDB,
    tx: Point3,
    r_min: float = 10.0,
    r_max: float = 200.0,
    step: float = 1.0,
    n_points: int = DEFAULT_N_POINTS,
    rx_height_m: float = DEFAULT_RX_HEIGHT_M,
    interior_counts_as_nlos: bool = False,
    max_workers: int | None = None,
) -> LosProbabilityCurve:
    """Sweep circle radii and collect the LOS probability at each.

    Radii where the probability is undefined are masked invalid.  Work is
    split across ``max_workers`` threads when given; results are assembled in
    radius order either way, so the output is identical.
    """
    radii = radius_grid(r_min, r_max, step)
    idx = find_containing_building(db, tx)
    if idx is not None:
        raise PointInsideBuildingError(tx, idx)

    def one(r: float) -> float | None:
        return los_probability_at_radius(
            db, tx, r, n_points=n_points, rx_height_m=rx_height_m,
            interior_counts_as_nlos=interior_counts_as_nlos,
        )

    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            values = list(pool.map(one, radii))
    else:
        values = [one(r) for r in radii]

    p = np.array([np.nan if v is None else v for v in values])
    valid = ~np.isnan(p)
    return LosProbabilityCurve(radii, p, valid)


def mean_curve(curves: "list[LosProbabilityCurve]") -> LosProbabilityCurve:
    """Average curves sharing one radius grid, per radius over the valid ones.

    Raises:
        ValueError: when no curves are given, grids differ, or some radius has
            no valid curve at all.
    """
    if not curves:
        raise ValueError("mean_curve requires at least one curve")
    base = curves[0].radii_m
    for i, c in enumerate(curves[1:], start=1):
        if not np.array_equal(c.radii_m, base):
            raise ValueError(f"curve {i} has a mismatched radius grid")
    values = np.stack([c.p_los for c in curves])
    masks = np.stack([c.valid for c in curves])
    counts = masks.sum(axis=0)
    if np.any(counts == 0):
        r = base[np.nonzero(counts == 0)[0][0]]
        raise ValueError(f"no valid curve at radius {r:g} m")
    total = np.where(masks, values, 0.0).sum(axis=0)
    return LosProbabilityCurve(base.copy(), total / counts, np.ones_like(base, dtype=bool))


def p_los_model(d_m, params: LosProbParams):
    """Evaluate the analytic LOS probability model at distance(s) d_m.

    Below the breakpoint the probability is exactly 1; beyond it the
    breakpoint ratio and exponential decay take over.  Scalar in, scalar out;
    array in, array out.
    """
    d = np.asarray(d_m, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distances must be positive")
    ratio = params.d_bp_m / d
    decay = np.exp(-d / params.alpha_m)
    # Explicit saturation keeps p exactly 1.0 below the breakpoint instead of
    # trusting (1 - decay) + decay to round back to 1.
    bracket = np.where(ratio >= 1.0, 1.0, ratio * (1.0 - decay) + decay)
    out = bracket * bracket if params.squared else bracket
    if out.ndim == 0:
        return float(out)
    return out


def _mse_grid(radii: np.ndarray, target: np.ndarray, bp_values: np.ndarray, alpha_values: np.ndarray):
    """Best (d_bp, alpha, mse) over the cross product of candidate values.

    Ties resolve to the smallest d_bp, then the smallest alpha; candidates
    must be sorted ascending for that to hold.
    """
    decay = np.exp(-radii[None, :] / alpha_values[:, None])
    rise = 1.0 - decay
    best_mse = np.inf
    best_bp = bp_values[0]
    best_alpha = alpha_values[0]
    chunk = 32
    for start in range(0, bp_values.size, chunk):
        bp = bp_values[start : start + chunk]
        ratio = np.minimum(bp[:, None] / radii[None, :], 1.0)
        bracket = np.where(
            ratio[:, None, :] >= 1.0,
            1.0,
            ratio[:, None, :] * rise[None, :, :] + decay[None, :, :],
        )
        err = bracket * bracket - target[None, None, :]
        mse = np.mean(err * err, axis=2)
        flat = int(np.argmin(mse))
        i, j = divmod(flat, alpha_values.size)
        if mse[i, j] < best_mse:
            best_mse = float(mse[i, j])
            best_bp = float(bp[i])
            best_alpha = float(alpha_values[j])
    return best_bp, best_alpha, best_mse


def fit_p_los(curve: LosProbabilityCurve) -> tuple[LosProbParams, float]:
    """MMSE fit of the squared model to a curve's valid points.

    Exhaustive search over integer (d_bp, alpha) pairs from 1 to 200 m,
    followed by a 0.1 m local refinement around the winning cell.  The
    refinement window recenters while its winner lands on a window edge, so
    optima up to a few meters off the coarse winner are still resolved.  The
    refinement is skipped when the coarse fit is already exact.  Returns the
    parameters and the mean squared error they achieve.

    Raises:
        ValueError: with fewer than 2 valid curve points.
    """
    radii = curve.radii_m[curve.valid]
    target = curve.p_los[curve.valid]
    if radii.size < 2:
        raise ValueError("fit requires at least 2 valid curve points")

    bp, alpha, mse = _mse_grid(radii, target, _COARSE_GRID, _COARSE_GRID)
    offsets = np.round(
        np.arange(-_REFINE_SPAN_M, _REFINE_SPAN_M + _REFINE_STEP_M / 2, _REFINE_STEP_M), 6
    )
    for _ in range(16):
        if mse == 0.0:
            break
        fine_bp = np.round(bp + offsets, 6)
        fine_alpha = np.round(alpha + offsets, 6)
        fine_bp = fine_bp[fine_bp > 0]
        fine_alpha = fine_alpha[fine_alpha > 0]
        # the window contains its own center, so the mse never degrades here
        bp, alpha, mse = _mse_grid(radii, target, fine_bp, fine_alpha)
        on_edge = bp in (fine_bp[0], fine_bp[-1]) or alpha in (fine_alpha[0], fine_alpha[-1])
        if not on_edge:
            break
    return LosProbParams(bp, alpha, squared=True), mse


# Published breakpoint/decay parameters (squared form) for four dense-urban
# Manhattan transmitter sites and for the pooled fit across all of them,
# derived from 28 and 73 GHz measurement-campaign ray tracing.
NYC_SITE_LOS_PARAMS = {
    "COL1": LosProbParams(36.0, 71.0),
    "COL2": LosProbParams(39.0, 68.0),
    "KAU": LosProbParams(30.0, 21.0),
    "KIM2": LosProbParams(15.0, 95.0),
    "all": LosProbParams(27.0, 71.0),
}


def _format(v: float) -> str:
    return format(v, ".6g")


def curve_to_csv(curve: LosProbabilityCurve) -> str:
    """Serialize a curve; invalid radii carry NaN and a 0 in the valid column."""
    lines = [CURVE_CSV_HEADER]
    for r, p, ok in zip(curve.radii_m, curve.p_los, curve.valid):
        lines.append(f"{_format(r)},{_format(p)},{1 if ok else 0}")
    return "\n".join(lines) + "\n"


def curve_from_csv(text: str) -> LosProbabilityCurve:
    """Parse a curve CSV produced by curve_to_csv.

    Raises:
        ValueError: on a wrong header, malformed rows or invariant violations.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != CURVE_CSV_HEADER:
        raise ValueError(f"curve CSV must start with header '{CURVE_CSV_HEADER}'")
    radii, p, valid = [], [], []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 3:
            raise ValueError(f"malformed curve CSV row: {ln!r}")
        try:
            radii.append(float(parts[0]))
            p.append(float(parts[1]))
            flag = int(parts[2])
        except ValueError:
            raise ValueError(f"malformed curve CSV row: {ln!r}") from None
        if flag not in (0, 1):
            raise ValueError(f"valid flag must be 0 or 1 in row: {ln!r}")
        valid.append(bool(flag))
    return LosProbabilityCurve(np.array(radii), np.array(p), np.array(valid))
