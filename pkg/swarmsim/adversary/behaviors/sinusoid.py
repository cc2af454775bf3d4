# SPDX-License-Identifier: MIT
# SPDX-FileCopyrightText: 2024 swarmsim contributors
import math

from ..base import AdversaryBehavior


def sinusoid_drift(t: float, dt: float) -> float:
    """ Accumulated offset after adding sin(t_m) at every step m < k, with t = k dt.

    Evaluated as sin((k-1) dt/2) sin(k dt/2) / sin(dt/2) so the behaviour needs no memory.
    """
    k = int(round(t / dt))
    if k <= 1:
        return 0.0
    half = dt / 2
    denominator = math.sin(half)
    if abs(denominator) < 1e-15:
        return 0.0
    return math.sin((k - 1) * half) * math.sin(k * half) / denominator


class SinusoidOffset(AdversaryBehavior):
    """ Claimed coordinate drifts by sin(t) per step on top of the true one """
    kind = "sinusoid_offset"

    def _fabricate_position(self, true_value, t, dt):
        return true_value + sinusoid_drift(t, dt)

    def _fabricate_velocity(self, true_value, t, dt):
        # rate of the claimed drift over the coming step
        return true_value + math.sin(round(t / dt) * dt) / dt
