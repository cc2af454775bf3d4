# SPDX-License-Identifier: MIT
# SPDX-FileCopyrightText: 2024 swarmsim contributors
# Claims a fixed coordinate regardless of where the agent really is
from ..base import AdversaryBehavior


class ConstantPosition(AdversaryBehavior):
    kind = "constant_position"
    # a fixed claimed position comes with zero claimed velocity
    fabricates_velocity_by_default = True

    def __init__(self, axis: int = 0, value: float = 0.0, fabricate_velocity=None):
        super().__init__(axis, fabricate_velocity)
        self.value = float(value)

    def _fabricate_position(self, true_value, t, dt):
        return self.value

    def _fabricate_velocity(self, true_value, t, dt):
        return 0.0

    def _params(self):
        return {"value": self.value}
