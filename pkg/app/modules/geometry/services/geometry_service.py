import math
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from app.core.exceptions import GeometryError
from app.modules.geometry.schemas import EllipseBody, Point2, SaturatedContact, Vec2

GRID_SAMPLES = 720
ROOT_XTOL = 1e-12
TANGENCY_TOL = 1e-9

ContactAngle = Optional[Union[float, SaturatedContact]]


@lru_cache(maxsize=8)
def _grid(samples: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    phis = np.linspace(0.0, math.pi, samples)
    return phis, np.cos(phis), np.sin(phis)


class GeometryService:

    @staticmethod
    def ellipse_point(phi: float, body: EllipseBody) -> Point2:
        if not math.isfinite(phi):
            raise GeometryError(f"ellipse angle must be finite, got {phi}")
        return Point2(body.R_x * math.cos(phi) + body.X_r, body.R_y * math.sin(phi))

    @staticmethod
    def surface_frame(phi: float, body: EllipseBody) -> Tuple[Vec2, Vec2]:
        """
        Inward unit normal and backward unit tangent at angle phi.
        Both are normalised by sqrt(R_y^2 cos^2 + R_x^2 sin^2), the length of
        the (-R_y cos, -R_x sin) numerator. On the lower half the tangent is
        flipped so it still points back along the channel.
        """
        c, s = math.cos(phi), math.sin(phi)
        norm = math.sqrt((body.R_y * c) ** 2 + (body.R_x * s) ** 2)
        n_hat = Vec2(-body.R_y * c / norm, -body.R_x * s / norm)
        if s < 0.0:
            t_hat = Vec2(body.R_x * s / norm, -body.R_y * c / norm)
        else:
            t_hat = Vec2(-body.R_x * s / norm, body.R_y * c / norm)
        return n_hat, t_hat

    @staticmethod
    def contains(p: Point2, body: EllipseBody) -> bool:
        return ((p.x - body.X_r) / body.R_x) ** 2 + (p.y / body.R_y) ** 2 < 1.0

    @staticmethod
    def contact_angle(
        base: Point2,
        L: float,
        body: EllipseBody,
        samples: int = GRID_SAMPLES,
        lower: bool = False,
    ) -> ContactAngle:
        """
        Furthest-forward intersection of the circle of radius L about the beam
        base with the top half of the ellipse (the bottom half when `lower`,
        for a base below the channel axis).

        Returns None when the undeflected tip does not reach the ellipse, a
        SaturatedContact when the base itself is inside the body, and the
        contact angle in [0, pi] ([-pi, 0] when `lower`) otherwise.
        """
        return GeometryService.contact_angles([base.x], base.y, L, body, samples, lower)[0]

    @staticmethod
    def contact_angles(
        bases_x: Sequence[float],
        base_y: float,
        L: float,
        body: EllipseBody,
        samples: int = GRID_SAMPLES,
        lower: bool = False,
    ) -> List[ContactAngle]:
        """contact_angle for a row of beams sharing one wall line, with the
        distance grid evaluated for every reaching beam in a single pass."""
        bx = np.asarray(bases_x, dtype=float)
        if not (np.all(np.isfinite(bx)) and math.isfinite(base_y) and math.isfinite(L)):
            raise GeometryError("contact_angle inputs must be finite")
        if L <= 0:
            raise GeometryError(f"beam length must be positive, got {L}")

        # both halves are searched over psi in [0, pi] with phi = sign * psi
        sign = -1.0 if lower else 1.0
        R_x, X_r = body.R_x, body.X_r
        R_y = sign * body.R_y
        results: List[ContactAngle] = [None] * len(bx)

        tip_radius = ((bx - X_r) / R_x) ** 2 + ((base_y - sign * L) / body.R_y) ** 2
        reach = np.nonzero(tip_radius <= 1.0 + 1e-12)[0]
        if reach.size == 0:
            return results

        psis, cos_g, sin_g = _grid(samples)
        values = np.hypot(R_x * cos_g + X_r - bx[reach, None], R_y * sin_g - base_y) - L

        zero = values == 0.0
        change = values[:, :-1] * values[:, 1:] < 0.0
        first_zero = np.where(zero.any(axis=1), zero.argmax(axis=1), samples)
        first_change = np.where(change.any(axis=1), change.argmax(axis=1), samples)

        for row, j in enumerate(reach):
            angle = GeometryService._solve_row(
                float(bx[j]), base_y, L, body, R_y, psis, values[row],
                int(first_zero[row]), int(first_change[row]),
            )
            if isinstance(angle, SaturatedContact):
                angle = SaturatedContact(sign * angle.phi)
            elif angle is not None:
                angle = sign * angle
            results[j] = angle
        return results

    @staticmethod
    def _solve_row(
        bx: float,
        by: float,
        L: float,
        body: EllipseBody,
        R_y: float,
        psis: np.ndarray,
        values: np.ndarray,
        first_zero: int,
        first_change: int,
    ) -> ContactAngle:
        """Contact for one beam in the half-plane parameter psi; R_y carries the
        half's sign."""
        R_x, X_r = body.R_x, body.X_r

        def f(psi: float) -> float:
            return math.hypot(R_x * math.cos(psi) + X_r - bx, R_y * math.sin(psi) - by) - L

        samples = len(psis)
        root: Optional[float] = None
        # x decreases with psi, so the first root on the grid is furthest forward.
        # A sign change at cell k cannot share an index with an exact zero.
        if first_change < samples and first_change < first_zero:
            root = brentq(f, psis[first_change], psis[first_change + 1], xtol=ROOT_XTOL)
        elif first_zero < samples:
            root = float(psis[first_zero])

        psi_min = f_min = None
        if root is None:
            psi_min, f_min, hidden = GeometryService._closest_approach(f, psis, values)
            if hidden:
                root = min(hidden)

        if GeometryService.contains(Point2(bx, by), body):
            # Degenerate: the beam would pass through the shell
            return SaturatedContact(root if root is not None else psi_min)
        if root is not None:
            return root
        if f_min <= TANGENCY_TOL * L:
            return psi_min
        return None

    @staticmethod
    def _closest_approach(
        f: Callable[[float], float], phis: np.ndarray, values: np.ndarray
    ) -> Tuple[float, float, List[float]]:
        """Refine the grid minimum of the distance function. Returns the minimiser,
        the minimum and any root pair hidden inside a single grid cell."""
        k = int(np.argmin(values))
        lo, hi = float(phis[max(k - 1, 0)]), float(phis[min(k + 1, len(phis) - 1)])
        result = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        phi_min, f_min = float(result.x), float(result.fun)
        if values[k] < f_min:
            phi_min, f_min = float(phis[k]), float(values[k])

        hidden: List[float] = []
        if f_min < 0.0:
            if f(lo) > 0.0:
                hidden.append(brentq(f, lo, phi_min, xtol=ROOT_XTOL))
            if f(hi) > 0.0:
                hidden.append(brentq(f, phi_min, hi, xtol=ROOT_XTOL))
        return phi_min, f_min, hidden
