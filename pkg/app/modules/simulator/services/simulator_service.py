import math
from concurrent.futures import ProcessPoolExecutor
from typing import List, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from app.core.logging import logger
from app.modules.beam.services.beam_service import BeamService
from app.modules.geometry.schemas import EllipseBody, SaturatedContact, Vec2
from app.modules.geometry.services.geometry_service import GeometryService
from app.modules.simulator.schemas import (
    ChannelSpec,
    ForceSample,
    ForceTrace,
    Side,
    SideContact,
    TraceSummary,
)


class SimulatorService:

    @staticmethod
    def base_positions(channel: ChannelSpec, side: Side = Side.top) -> List[float]:
        x0 = channel.x0 + (channel.stagger if side is Side.bottom else 0.0)
        return BeamService.beam_base_positions(
            channel.n, channel.l_channel, channel.spacing_override, x0
        )

    @staticmethod
    def contact_set(
        X_r: float, channel: ChannelSpec, body: EllipseBody, side: Side = Side.top
    ) -> List[SideContact]:
        """
        Contacting beams of one row with the body centred at X_r. The top row
        hangs from y = b/2 + L onto the upper half of the shell, the bottom row
        from y = -(b/2 + L) onto the lower half.
        """
        if channel.free:
            return []
        body = body.at(X_r)
        beam = channel.beam
        lower = side is Side.bottom
        bases = SimulatorService.base_positions(channel, side)
        wall_y = -channel.wall_y if lower else channel.wall_y
        angles = GeometryService.contact_angles(bases, wall_y, beam.L, body, lower=lower)

        contacts: List[SideContact] = []
        for i, (l_i, angle) in enumerate(zip(bases, angles), start=1):
            if angle is None:
                continue
            saturated = isinstance(angle, SaturatedContact)
            phi = angle.phi if saturated else angle
            X_i = GeometryService.ellipse_point(phi, body).x
            if saturated:
                delta_theta = math.pi / 2
            else:
                delta_theta, saturated = BeamService.angular_deflection(X_i, l_i, beam.L)
            force = BeamService.beam_force(delta_theta, phi, beam, body)
            # fields come straight from the solver; skip per-contact validation
            contacts.append(
                SideContact.model_construct(
                    beam_index=i,
                    phi=phi,
                    X_i=X_i,
                    delta_theta=delta_theta,
                    force=force,
                    saturated=saturated,
                    side=side,
                )
            )
        return contacts

    @staticmethod
    def net_drag(contacts: Sequence[SideContact]) -> float:
        """Resistance from one row, doubled for the mirror row: -2 * sum(F_i . x)."""
        # + 0.0 turns the empty-row -0.0 into 0.0
        return -2.0 * sum(c.force.x for c in contacts) + 0.0

    @staticmethod
    def sweep_window(channel: ChannelSpec, body: EllipseBody) -> Tuple[float, float]:
        low = channel.x0 + min(channel.stagger, 0.0)
        high = channel.x0 + channel.l_channel + max(channel.stagger, 0.0)
        return low - body.R_x - channel.beam.L, high + body.R_x + channel.beam.L

    @staticmethod
    def row_centre(channel: ChannelSpec) -> float:
        bases = SimulatorService.base_positions(channel)
        return 0.5 * (bases[0] + bases[-1])

    @staticmethod
    def sweep(
        channel: ChannelSpec,
        body: EllipseBody,
        dx: float = 1e-3,
        v: float = 0.05,
        direction: int = 1,
        two_sided: bool = False,
    ) -> ForceTrace:
        """
        Kinematic sweep of the body through the channel at constant speed v.

        direction=-1 runs the body backwards; it is solved in the frame mirrored
        about the centre of the beam row, so samples stay in time order.
        two_sided solves the bottom row on the lower half of the shell instead of
        doubling the top row, so staggered rows are supported.
        """
        if dx <= 0 or v <= 0:
            raise ValueError("dx and v must be positive")
        if direction not in (1, -1):
            raise ValueError(f"direction must be +1 or -1, got {direction}")
        if channel.stagger != 0.0 and not two_sided:
            raise ValueError("a staggered bottom row needs the two-sided sweep")
        if channel.stagger != 0.0 and direction == -1:
            raise ValueError("reverse sweeps need mirror-symmetric rows (stagger = 0)")

        start, end = SimulatorService.sweep_window(channel, body)
        count = int(math.floor((end - start) / dx + 1e-9)) + 1
        centre = SimulatorService.row_centre(channel)
        logger.info(
            f"Sweep start: n={channel.n} b={channel.b} dx={dx} samples={count} "
            f"direction={direction} two_sided={two_sided}"
        )

        samples: List[ForceSample] = []
        for k in range(count):
            if direction == 1:
                X_r = start + k * dx
                X_model = X_r
            else:
                X_r = end - k * dx
                X_model = 2.0 * centre - X_r

            if two_sided:
                contacts = SimulatorService.contact_set(X_model, channel, body, Side.top)
                contacts += SimulatorService.contact_set(X_model, channel, body, Side.bottom)
                F_drag = -sum(c.force.x for c in contacts) + 0.0
                fy_net = sum(c.force.y for c in contacts)
            else:
                contacts = SimulatorService.contact_set(X_model, channel, body)
                F_drag = SimulatorService.net_drag(contacts)
                fy_net = None

            if direction == -1:
                contacts = [SimulatorService._mirror(c, channel, centre) for c in contacts]

            samples.append(
                ForceSample(
                    X_r=X_r,
                    t=k * dx / v,
                    F_drag=F_drag,
                    contact_count=len(contacts),
                    contacts=contacts,
                    fy_net=fy_net,
                )
            )

        saturated = sum(c.saturated for s in samples for c in s.contacts)
        if saturated:
            logger.debug(f"{saturated} saturated contacts in sweep")
        logger.info(f"Sweep done: peak drag {max(s.F_drag for s in samples):.4f} N")
        return ForceTrace(samples=samples, dx=dx, v=v, direction=direction, two_sided=two_sided)

    @staticmethod
    def _mirror(contact: SideContact, channel: ChannelSpec, centre: float) -> SideContact:
        sign = 1.0 if contact.phi >= 0 else -1.0
        return contact.model_copy(
            update={
                "beam_index": channel.n + 1 - contact.beam_index,
                "phi": sign * math.pi - contact.phi,
                "X_i": 2.0 * centre - contact.X_i,
                "force": Vec2(-contact.force.x, contact.force.y),
            }
        )

    @staticmethod
    def plateau_mask(trace: ForceTrace, channel: ChannelSpec, body: EllipseBody) -> np.ndarray:
        """Samples with the body spanning only the beam row; when the row is shorter
        than the body, the samples at the maximum contact count."""
        X = np.array([s.X_r for s in trace.samples])
        if channel.free:
            return np.ones(len(X), dtype=bool)
        bases = SimulatorService.base_positions(channel)
        mask = (X >= bases[0] + body.R_x) & (X <= bases[-1] - body.R_x)
        if not mask.any():
            counts = np.array([s.contact_count for s in trace.samples])
            mask = counts == counts.max()
        return mask

    @staticmethod
    def summarize(trace: ForceTrace, channel: ChannelSpec, body: EllipseBody) -> TraceSummary:
        drag = np.array([s.F_drag for s in trace.samples])
        counts = np.array([s.contact_count for s in trace.samples])
        X = np.array([s.X_r for s in trace.samples])
        mask = SimulatorService.plateau_mask(trace, channel, body)
        plateau = drag[mask]
        mean = float(plateau.mean())
        return TraceSummary(
            n_samples=len(drag),
            plateau_samples=int(mask.sum()),
            plateau_mean_drag=mean,
            plateau_min_drag=float(plateau.min()),
            plateau_max_drag=float(plateau.max()),
            plateau_contact_counts=sorted({int(c) for c in counts[mask]}),
            max_contact_count=int(counts.max()),
            saturated_contacts=sum(c.saturated for s in trace.samples for c in s.contacts),
            peak_drag=float(drag.max()),
            drag_energy=mean * channel.l_channel,
            transit_work=float(abs(trapezoid(drag, X))),
        )

    @staticmethod
    def run_batch(
        channels: Sequence[ChannelSpec],
        body: EllipseBody,
        dx: float = 1e-3,
        v: float = 0.05,
        max_workers: int = 1,
    ) -> List[Tuple[ForceTrace, TraceSummary]]:
        """Independent sweeps, returned in input order."""
        if max_workers > 1 and len(channels) > 1:
            with ProcessPoolExecutor(max_workers=min(max_workers, len(channels))) as pool:
                return list(pool.map(_sweep_and_summarize, channels, [body] * len(channels),
                                     [dx] * len(channels), [v] * len(channels)))
        return [_sweep_and_summarize(c, body, dx, v) for c in channels]


def _sweep_and_summarize(
    channel: ChannelSpec, body: EllipseBody, dx: float, v: float
) -> Tuple[ForceTrace, TraceSummary]:
    trace = SimulatorService.sweep(channel, body, dx, v)
    return trace, SimulatorService.summarize(trace, channel, body)
