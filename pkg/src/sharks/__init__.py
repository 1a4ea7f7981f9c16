"""Decentralised target-circling swarm simulator and experiment harness."""

from .geometry import Point2, annulus_area, displace, distance, heading_from_to, rotate_cw
from .initializers import BoxPlacement, CapacityError, InitSpec, build_state
from .protocol import (
    FieldSpec,
    ProtocolError,
    SwarmConfig,
    SwarmState,
    is_stable,
    run_until_stable,
    step_epoch,
)

__version__ = "0.1.0"
