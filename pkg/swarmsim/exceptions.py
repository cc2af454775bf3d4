# SPDX-License-Identifier: MIT
# SPDX-FileCopyrightText: 2024 swarmsim contributors
from typing import Iterable


class SwarmSimError(Exception):
    pass


class ScenarioConfigError(SwarmSimError, ValueError):
    """ Raised once per config load, carrying every schema problem found """

    def __init__(self, errors: Iterable[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors) if self.errors else "invalid scenario config")


class CapabilityError(SwarmSimError):
    pass


class NonSymmetricMatrixError(SwarmSimError, ValueError):
    pass


class NonFiniteStateError(SwarmSimError, ArithmeticError):
    pass


class EstimatorError(SwarmSimError):
    pass
