# SPDX-License-Identifier: MIT
# SPDX-FileCopyrightText: 2024 swarmsim contributors
# Imports every module in this directory so its behaviours register and are exported here
import os
import sys

from ..base import AdversaryBehavior

__dir_path = os.path.dirname(os.path.abspath(__file__))
__ignore = ['__init__.py']

__all__ = []

for f in sorted(f[:-3] for f in os.listdir(__dir_path) if f.endswith('.py') and f not in __ignore):
    mod = __import__('.'.join([__name__, f]), fromlist=[f])
    for obj in vars(mod).values():
        try:
            if issubclass(obj, AdversaryBehavior) and obj is not AdversaryBehavior:
                setattr(sys.modules[__name__], obj.__name__, obj)
                __all__.append(obj.__name__)
        except TypeError:
            pass
