"""Exception hierarchy shared by all hamlab modules."""


class HamlabError(Exception):
    """Base class for all errors raised by hamlab."""


class DimensionMismatch(HamlabError):
    """Two polynomials (or a polynomial and a point) disagree on the ambient dimension."""


class NotActionRepresentable(HamlabError):
    """A polynomial cannot be written as a function of the formal actions."""


class OutOfDomain(HamlabError):
    """A phase-space point lies outside the domain of validity."""


class ResonantFrequency(HamlabError):
    """A frequency vector admits an integer relation below the zero tolerance."""

    def __init__(self, witness, value=0.0):
        self.witness = tuple(witness)
        self.value = value
        super().__init__(f"resonant frequency: k={self.witness}, |k.alpha|={value:.3e}")


class ResonanceEncountered(HamlabError):
    """A small divisor fell below the divisor floor during normalization."""

    def __init__(self, degree, k, value):
        self.degree = degree
        self.k = tuple(k)
        self.value = value
        super().__init__(
            f"resonance at degree {degree}: k={self.k}, |k.alpha|={value:.3e}"
        )


class OrderTooHigh(HamlabError):
    """Requested working degree exceeds the configured memory budget."""


class ThresholdViolation(HamlabError):
    """A smallness threshold (e.g. rho < gamma) is violated."""


class CombinatorialBudgetExceeded(HamlabError):
    """A lattice enumeration would visit more candidates than the configured cap."""


class FixedPointDivergence(HamlabError):
    """The implicit-step fixed-point iteration failed to converge (dt too large)."""
