# vibromirror/runtime/integrators.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

from __future__ import annotations

from typing import Callable, TypeVar

import numpy as np

State = TypeVar("State", np.ndarray, complex, float)


def rk4_step(f: Callable[[float, State], State], t: float, y: State, h: float) -> State:
    """
    Advance y' = f(t, y) by one classical fourth-order Runge-Kutta step.

    :param f: Right-hand side; must accept and return objects supporting + and scalar *.
    :param t: Current time.
    :param y: Current state.
    :param h: Step size.
    :return: State at t + h.
    """
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + (0.5 * h) * k1)
    k3 = f(t + 0.5 * h, y + (0.5 * h) * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
