import numpy as np

from monofw.core import Objective


class Quadratic(Objective):
    """0.5 ||x - c||^2 on all of R^n."""

    def __init__(self, c):
        self.c = np.asarray(c, dtype=float)
        self.dim = self.c.size

    def in_domain(self, x):
        return True

    def _value(self, x):
        r = x - self.c
        return 0.5 * r @ r

    def gradient(self, x):
        return x - self.c

    def hessian_vec(self, x, d):
        return np.asarray(d, dtype=float)


class Linear(Objective):
    def __init__(self, c):
        self.c = np.asarray(c, dtype=float)
        self.dim = self.c.size

    def in_domain(self, x):
        return True

    def _value(self, x):
        return self.c @ x

    def gradient(self, x):
        return self.c.copy()


class Scripted(Objective):
    """1-d objective whose value is read off a function of x; domain x < bound."""

    def __init__(self, fn, bound=np.inf):
        self.fn, self.bound = fn, bound
        self.dim = 1

    def in_domain(self, x):
        return bool(x[0] < self.bound)

    def _value(self, x):
        return self.fn(float(x[0]))

    def gradient(self, x):
        return np.array([0.0])
