"""Exception types raised across the package.

Everything derives from ArimotoRateError so callers can catch broadly;
channel validation problems additionally derive from InvalidChannel and
carry the offending row/column index where one exists.
"""

from __future__ import annotations


class ArimotoRateError(Exception):
    """Base class for all errors raised by this package."""


class InvalidChannel(ArimotoRateError):
    """A proposed channel matrix failed validation."""


class NegativeEntry(InvalidChannel):
    def __init__(self, row: int, col: int, value: float):
        self.row, self.col, self.value = row, col, value
        super().__init__(f"matrix entry [{row}][{col}] = {value!r} is negative")


class RowNotNormalized(InvalidChannel):
    def __init__(self, row: int, total: float):
        self.row, self.total = row, total
        super().__init__(f"row {row} sums to {total!r}, not 1")


class UselessOutputColumn(InvalidChannel):
    def __init__(self, col: int):
        self.col = col
        super().__init__(f"output column {col} is identically zero")


class RankDeficient(InvalidChannel):
    def __init__(self, rank: int, m: int):
        self.rank, self.m = rank, m
        super().__init__(f"matrix has numerical rank {rank} < {m} input rows")


class LengthMismatch(ArimotoRateError):
    """Vector arguments whose lengths must agree do not."""


class ZeroOutputMass(ArimotoRateError):
    """An output symbol has zero probability where positive mass is required."""

    def __init__(self, col: int):
        self.col = col
        super().__init__(f"output symbol {col} has zero probability under the input")


class NotInterior(ArimotoRateError):
    """An interior (strictly positive) distribution was required."""


class DomainError(ArimotoRateError):
    """Logarithm of a nonpositive quantity was requested."""


class NoConvergence(ArimotoRateError):
    """An iterative phase exhausted its budget without converging."""


class AmbiguousSupport(ArimotoRateError):
    """The solver's support detection oscillated between candidates."""

    def __init__(self, candidates):
        self.candidates = tuple(tuple(c) for c in candidates)
        super().__init__(f"support oscillates between candidates {self.candidates}")


class EmptyTypeI(ArimotoRateError):
    """Fewer than two support indices were found; signals a solver failure."""


class WrongShape(ArimotoRateError):
    """The operation requires a specific alphabet size."""


class WrongCase(ArimotoRateError):
    """The slow-rate machinery needs exactly two support indices and one degenerate index."""


class NonpositiveRho(ArimotoRateError):
    """The curvature coefficient is not positive, so the 1/N limit theory does not apply."""

    def __init__(self, rho: float):
        self.rho = rho
        super().__init__(f"curvature coefficient rho = {rho!r} is not positive")


class DegenerateSpectrum(ArimotoRateError):
    """The leading eigenvalue has multiplicity greater than one."""


class ComplexSpectrum(ArimotoRateError):
    """A closed-form eigenvalue routine met a matrix with complex eigenvalues."""


class TooLarge(ArimotoRateError):
    """Brute-force search was requested beyond its supported size."""


class ExactConvergence(ArimotoRateError):
    """All recorded iterates coincide with the fixed point; no rate curve exists."""

    def __init__(self, n: int):
        self.n = n
        super().__init__(f"iterate {n} equals the fixed point exactly")


class RegimeMismatch(ArimotoRateError):
    """A prediction and a measured curve describe different convergence regimes."""
