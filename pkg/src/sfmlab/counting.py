"""Integer dimension counting for point/camera reconstruction problems.

A configuration of ``n`` points and ``m`` cameras can only be locally unique
modulo the symmetry group when the measurement count plus the group dimension
covers the unknown count:

    d*n + f*m + h  <=  s*n*m + g

Everything here is exact integer arithmetic; no tolerances. The moving-point
variant replaces ``d`` by the per-point motion-model dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cameras import CameraClass, catalog_lookup

# Reference counts quoted elsewhere that differ from what the inequality
# yields for the implemented catalog entries. Keyed by (class name, m);
# values are the quoted point counts.
REFERENCE_COUNT_NOTES: dict[tuple[str, int], int] = {
    ("perspective-zoom-3d", 2): 8,  # inequality gives 7
    ("perspective-zoom-2d", 4): 7,  # inequality gives 6
}

# Planar circle-motion preset: 4 motion coefficients per point, cameras with
# 3 parameters and the 4-dimensional similarity group, scalar measurements.
CIRCLE_PRESET = {"point_dim": 4, "f": 3, "g": 4, "h": 0, "s": 1}


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of the dimension inequality at one (n, m) cell."""

    n: int
    m: int
    lhs: int  # unknowns: d*n + f*m + h
    rhs: int  # measurements plus symmetry: s*n*m + g
    slack: int

    @property
    def feasible(self) -> bool:
        return self.slack >= 0

    @property
    def borderline(self) -> bool:
        return self.slack == 0


def _cls(cls: CameraClass | str) -> CameraClass:
    return catalog_lookup(cls) if isinstance(cls, str) else cls


def feasible(cls: CameraClass | str, n: int, m: int) -> FeasibilityReport:
    c = _cls(cls)
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    lhs = c.d * n + c.f * m + c.h
    rhs = c.s * n * m + c.g
    return FeasibilityReport(n, m, lhs, rhs, rhs - lhs)


def _min_count(per_unit: int, constant: int) -> int | None:
    """Smallest k >= 1 with per_unit * k + constant >= 0, or None.

    ``per_unit`` is the slack gained per added unit, ``constant`` the slack at
    k = 0; solved by coefficient comparison, not bounded search.
    """
    if per_unit > 0:
        need = -constant
        if need <= per_unit:
            return 1
        return -(-need // per_unit)  # ceil division
    # slack never grows with k; only k = 1 can work
    return 1 if per_unit + constant >= 0 else None


def min_points(cls: CameraClass | str, m: int) -> int | None:
    """Smallest feasible point count for ``m`` cameras, None if no count works."""
    c = _cls(cls)
    if m < 1:
        raise ValueError("need m >= 1")
    return _min_count(c.s * m - c.d, c.g - c.f * m - c.h)


def min_cameras(cls: CameraClass | str, n: int) -> int | None:
    """Smallest feasible camera count for ``n`` points, None if no count works."""
    c = _cls(cls)
    if n < 1:
        raise ValueError("need n >= 1")
    return _min_count(c.s * n - c.f, c.g - c.d * n - c.h)


def forbidden_region(cls: CameraClass | str, n_max: int, m_max: int) -> list[list[FeasibilityReport]]:
    """Reports for the full grid 1..n_max x 1..m_max, indexed [n-1][m-1].

    Infeasible cells form the forbidden region: counts where reconstruction
    cannot be locally unique no matter the data.
    """
    c = _cls(cls)
    if n_max < 1 or m_max < 1:
        raise ValueError("grid bounds must be >= 1")
    return [[feasible(c, n, m) for m in range(1, m_max + 1)] for n in range(1, n_max + 1)]


def jet_feasible(point_dim: int, f: int, g: int, h: int, s: int,
                 n: int, m: int) -> FeasibilityReport:
    """Dimension inequality for moving points with ``point_dim`` coefficients
    per point: point_dim*n + f*m + h <= s*n*m + g."""
    if min(point_dim, f, g, h, s) < 0:
        raise ValueError("dimensions must be non-negative")
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    lhs = point_dim * n + f * m + h
    rhs = s * n * m + g
    return FeasibilityReport(n, m, lhs, rhs, rhs - lhs)


def jet_min_points(point_dim: int, f: int, g: int, h: int, s: int, m: int) -> int | None:
    """Smallest feasible point count for the moving-point inequality."""
    if m < 1:
        raise ValueError("need m >= 1")
    return _min_count(s * m - point_dim, g - f * m - h)


def jet_min_cameras(point_dim: int, f: int, g: int, h: int, s: int) -> int:
    """Smallest camera count for which some point count is feasible."""
    if s < 1:
        raise ValueError("need at least one measured value per picture (s >= 1)")
    m = 1
    while True:
        per_point = s * m - point_dim
        if per_point > 0 or (per_point == 0 and g - f * m - h >= 0):
            return m
        m += 1


def anchored_slack(cls: CameraClass | str, n: int, m: int) -> int:
    """Slack of the inequality rewritten with one point held at the origin.

    Anchoring a point spends ``d`` of the group dimensions and gives every
    retina a chart origin, removing ``s = d - 1`` parameters per camera:

        d*(n-1) + (f - (d-1))*m + h  <=  (d-1)*(n-1)*m + (g - d)

    Valid for hypersurface retinas (s = d - 1); algebraically the same
    inequality, which the tests verify cell by cell.
    """
    c = _cls(cls)
    if c.s != c.d - 1:
        raise ValueError("anchored form needs a hypersurface retina (s = d - 1)")
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    lhs = c.d * (n - 1) + (c.f - (c.d - 1)) * m + c.h
    rhs = (c.d - 1) * (n - 1) * m + (c.g - c.d)
    return rhs - lhs
