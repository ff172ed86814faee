"""Compensated (Neumaier) accumulation of floating-point partial sums."""


class NeumaierSum:
    """Running sum that carries the rounding error of every addition.

    Exact for the error-free part of each step (TwoSum), so a long sequence
    of chunk totals loses no more than one final rounding.
    """

    __slots__ = ("total", "carry")

    def __init__(self, start=0.0):
        self.total = float(start)
        self.carry = 0.0

    def add(self, value):
        value = float(value)
        t = self.total + value
        if abs(self.total) >= abs(value):
            self.carry += (self.total - t) + value
        else:
            self.carry += (value - t) + self.total
        self.total = t
        return self

    @property
    def value(self):
        return self.total + self.carry
