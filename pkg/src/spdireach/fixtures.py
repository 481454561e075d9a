"""Small hand-built instances used by tests, demos, and docs."""

from __future__ import annotations

from .model import Spdi, build_spdi


def hcorridor() -> Spdi:
    """Two unit squares side by side, both flowing straight right.

    Points entering on the left edge cross the shared middle edge and reach
    the right edge at the same height: every interval successor along the
    corridor is the identity.
    """
    vertices = {
        0: (0.0, 0.0),
        1: (1.0, 0.0),
        2: (2.0, 0.0),
        3: (0.0, 1.0),
        4: (1.0, 1.0),
        5: (2.0, 1.0),
    }
    regions = [
        ("R1", (0, 1, 4, 3), (1.0, 0.0), (1.0, 0.0)),
        ("R2", (1, 2, 5, 4), (1.0, 0.0), (1.0, 0.0)),
    ]
    return build_spdi(vertices, regions)


# HCorridor edge ids, for readability in tests.
HC_LEFT = "e0_3"
HC_MID = "e1_4"
HC_RIGHT = "e2_5"
HC_BOTTOM_L = "e0_1"
HC_BOTTOM_R = "e1_2"
HC_TOP_L = "e3_4"
HC_TOP_R = "e4_5"


def spinbox() -> Spdi:
    """Unit square cut into four triangles around the centre.

    Each triangle's single flow direction is the previous one rotated a
    quarter turn, so trajectories spiral counterclockwise and inward: the
    four diagonal edges form a cycle whose one-lap map contracts toward the
    centre vertex.
    """
    vertices = {
        0: (0.0, 0.0),
        1: (1.0, 0.0),
        2: (1.0, 1.0),
        3: (0.0, 1.0),
        4: (0.5, 0.5),
    }
    regions = [
        ("bottom", (0, 1, 4), (1.0, 0.2), (1.0, 0.2)),
        ("right", (1, 2, 4), (-0.2, 1.0), (-0.2, 1.0)),
        ("top", (2, 3, 4), (-1.0, -0.2), (-1.0, -0.2)),
        ("left", (3, 0, 4), (0.2, -1.0), (0.2, -1.0)),
    ]
    return build_spdi(vertices, regions)


# SpinBox edge ids: outer walls and the four centre diagonals.
SB_BOTTOM = "e0_1"
SB_RIGHT = "e1_2"
SB_TOP = "e2_3"
SB_LEFT = "e0_3"
SB_DIAG_BL = "e0_4"
SB_DIAG_BR = "e1_4"
SB_DIAG_TR = "e2_4"
SB_DIAG_TL = "e3_4"
