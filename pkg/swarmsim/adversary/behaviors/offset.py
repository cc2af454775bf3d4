# SPDX-License-Identifier: MIT
# SPDX-FileCopyrightText: 2024 swarmsim contributors
from ..base import AdversaryBehavior


class OffsetPosition(AdversaryBehavior):
    """ Reports the true coordinate shifted by a constant """
    kind = "offset_position"

    def __init__(self, axis: int = 0, offset: float = 0.0, fabricate_velocity=None):
        super().__init__(axis, fabricate_velocity)
        self.offset = float(offset)

    def _fabricate_position(self, true_value, t, dt):
        return true_value + self.offset

    def _params(self):
        return {"offset": self.offset}
