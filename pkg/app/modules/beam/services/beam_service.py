import math
from typing import List, Optional, Tuple

from app.core.exceptions import ContactStateError
from app.modules.beam.schemas import BeamSpec
from app.modules.geometry.schemas import EllipseBody, Vec2
from app.modules.geometry.services.geometry_service import GeometryService

DELTA_THETA_MAX = math.pi / 2
# Slack for contacts landing a rounding error behind the base
CONTACT_SLACK = 1e-9


class BeamService:

    @staticmethod
    def torsional_stiffness(spec: BeamSpec) -> float:
        """k_t = E I / L with I = w t^3 / 12."""
        I = spec.w * spec.t ** 3 / 12.0
        return spec.E * I / spec.L

    @staticmethod
    def angular_deflection(
        X_i: float, l_i: float, L: float, delta_theta_max: float = DELTA_THETA_MAX
    ) -> Tuple[float, bool]:
        """
        Deflection asin((X_i - l_i) / L), clamped to delta_theta_max.
        Returns (delta_theta, saturated).
        """
        offset = X_i - l_i
        if offset < -CONTACT_SLACK * L:
            raise ContactStateError(
                f"contact at {X_i:.6g} m trails beam base at {l_i:.6g} m"
            )
        ratio = max(offset, 0.0) / L
        if ratio >= 1.0:
            return delta_theta_max, True
        delta_theta = math.asin(ratio)
        if delta_theta >= delta_theta_max:
            return delta_theta_max, True
        return delta_theta, False

    @staticmethod
    def beam_force(delta_theta: float, phi: float, spec: BeamSpec, body: EllipseBody) -> Vec2:
        """Force on the body, on the edge of the sliding friction cone about the inward normal."""
        if delta_theta == 0.0:
            return Vec2(0.0, 0.0)
        n_hat, t_hat = GeometryService.surface_frame(phi, body)
        magnitude = BeamService.torsional_stiffness(spec) / spec.L * delta_theta
        return Vec2(
            magnitude * (n_hat.x + spec.mu_k * t_hat.x),
            magnitude * (n_hat.y + spec.mu_k * t_hat.y),
        )

    @staticmethod
    def beam_base_positions(
        n: int, l_channel: float, spacing: Optional[float] = None, x0: float = 0.0
    ) -> List[float]:
        """Base positions l_i = x0 + (l_channel / n)(i - 1), or x0 + spacing (i - 1)
        when an explicit spacing is given."""
        if n < 1:
            raise ValueError(f"beam count must be >= 1, got {n}")
        if l_channel <= 0:
            raise ValueError(f"channel length must be positive, got {l_channel}")
        step = spacing if spacing is not None else l_channel / n
        return [x0 + step * i for i in range(n)]
