# SPDX-License-Identifier: MIT
# SPDX-FileCopyrightText: 2024 swarmsim contributors
import logging
from abc import ABC
from abc import abstractmethod
from typing import Any
from typing import ClassVar
from typing import Dict
from typing import Tuple
from typing import Type

import numpy as np

from ..dynamics import AgentState


class AdversaryBehavior(ABC):
    """ Fabrication rule for what a malicious agent broadcasts on one axis.

    The same claim goes to every receiver; the agent's true motion is left alone.
    Subclasses set ``kind`` and are registered under it for config loading.
    """
    kind: ClassVar[str] = ""
    # default for the fabricate_velocity switch
    fabricates_velocity_by_default: ClassVar[bool] = False
    _registry: ClassVar[Dict[str, Type["AdversaryBehavior"]]] = {}

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if cls.kind:
            AdversaryBehavior._registry[cls.kind] = cls

    def __init__(self, axis: int = 0, fabricate_velocity=None):
        if axis < 0:
            raise ValueError(f"Expected axis >= 0, got {axis}")
        self.axis = int(axis)
        self.fabricate_velocity = self.fabricates_velocity_by_default if fabricate_velocity is None \
            else bool(fabricate_velocity)
        self.log = logging.getLogger(f"swarmsim.adversary.{self.kind}")

    @abstractmethod
    def _fabricate_position(self, true_value: float, t: float, dt: float) -> float:
        """ Claimed coordinate on ``axis`` given the true one """

    def _fabricate_velocity(self, true_value: float, t: float, dt: float) -> float:
        return true_value

    def broadcast(self, state: AgentState, t: float, dt: float) -> Tuple[np.ndarray, np.ndarray]:
        if self.axis >= state.dimension:
            raise ValueError(f"Behaviour axis {self.axis} out of range for dimension {state.dimension}")
        position = state.position.copy()
        velocity = state.velocity.copy()
        position[self.axis] = self._fabricate_position(float(position[self.axis]), t, dt)
        if self.fabricate_velocity:
            velocity[self.axis] = self._fabricate_velocity(float(velocity[self.axis]), t, dt)
        return position, velocity

    def _params(self) -> Dict[str, Any]:
        return {}

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "axis": self.axis, **self._params(), "fabricate_velocity": self.fabricate_velocity}

    @classmethod
    def registered(cls) -> Dict[str, Type["AdversaryBehavior"]]:
        return dict(cls._registry)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AdversaryBehavior":
        data = dict(data)
        kind = data.pop("kind", None)
        if kind not in cls._registry:
            raise ValueError(f"Unknown adversary behaviour {kind!r}; expected one of {sorted(cls._registry)}")
        try:
            return cls._registry[kind](**data)
        except TypeError as e:
            raise ValueError(f"Invalid parameters for behaviour {kind!r}: {e}")

    def __eq__(self, other):
        if not isinstance(other, AdversaryBehavior):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(tuple(sorted(self.to_dict().items())))

    def __repr__(self):
        params = ", ".join(f"{k}={v!r}" for k, v in self.to_dict().items() if k != "kind")
        return f"{type(self).__name__}({params})"


def adversary_broadcast(behavior: AdversaryBehavior, state: AgentState, t: float, dt: float):
    """ The (position, velocity) pair an agent sends to all of its neighbours """
    if behavior is None:
        return state.position.copy(), state.velocity.copy()
    return behavior.broadcast(state, t, dt)
