# SPDX-License-Identifier: MIT
# SPDX-FileCopyrightText: 2024 swarmsim contributors
from . import behaviors
from .base import adversary_broadcast
from .base import AdversaryBehavior
from .behaviors.constant import ConstantPosition
from .behaviors.offset import OffsetPosition
from .behaviors.sinusoid import SinusoidOffset
from .placement import PlacementStrategy
from .placement import select_adversaries

__all__ = [
    "AdversaryBehavior",
    "ConstantPosition",
    "OffsetPosition",
    "SinusoidOffset",
    "PlacementStrategy",
    "adversary_broadcast",
    "behaviors",
    "select_adversaries",
]
