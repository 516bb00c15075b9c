"""Exception hierarchy.

Two families matter for the CLI exit-code contract: ``InputError`` covers
parse and validation failures (exit code 1), ``MathError`` covers failures
of a mathematical precondition discovered during computation (exit code 2).
"""


class TderivError(Exception):
    """Base class for all package errors."""


class InputError(TderivError):
    """Bad input: parse errors and validation failures."""


class MathError(TderivError):
    """A mathematical precondition failed during computation."""


class ParseError(InputError):
    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


# -- exact algebra ----------------------------------------------------------

class DivisionByNonUnit(MathError):
    """Series division by a series with zero constant term."""


class DenominatorVanishes(MathError):
    """A rational function was evaluated where its denominator is zero."""


class ZeroDenominator(MathError):
    """A division node's denominator normalizes to the zero function."""


class SingularJacobian(MathError):
    """The Jacobian block to invert is identically singular."""


# -- derivative operators ---------------------------------------------------

class IdentityInGenerators(InputError):
    """The identity operator may not generate a proper upward-closed set."""


# -- jet rewriting ----------------------------------------------------------

class QuantifierUnsupported(InputError):
    """Only quantifier-free formulas are rewritten."""


# -- evaluation backends ----------------------------------------------------

class HigherDerivationInGermModel(MathError):
    """The germ backend carries a single derivation."""


# -- matroids ---------------------------------------------------------------

class UnknownElement(InputError):
    """Rank query mentions an element outside the ground set."""


class MonotonicityViolation(MathError):
    """Rank increments increased along a jet chain: inconsistent oracle."""


class NonCommutingDerivations(MathError):
    """The supplied derivations do not commute on the generators."""


# -- conditions and coherence -----------------------------------------------

class ConditionInvalid(InputError):
    """Base class for condition validation failures."""


class NotAntichain(ConditionInvalid):
    pass


class DependenceViolation(ConditionInvalid):
    def __init__(self, beta, theta):
        super().__init__(f"f_{beta} depends on z^{theta}, which is not below {beta}")
        self.beta = beta
        self.theta = theta


class VariableInB(ConditionInvalid):
    def __init__(self, theta):
        super().__init__(f"z^{theta} is a bounded derivative, not a free one")
        self.theta = theta


class WitnessFails(ConditionInvalid):
    pass


class NotCoherent(MathError):
    """Solving was requested for a condition that is not coherent."""


class SingularInitialData(MathError):
    def __init__(self, theta):
        super().__init__(f"denominator of the bounding function for {theta} vanishes at the initial data")
        self.theta = theta


# -- differential field axiom instances --------------------------------------

class PremiseFails(MathError):
    """The axiom-instance premise does not hold at the supplied point."""


class SeparantVanishes(MathError):
    """The separant vanished during formal solving (guarded against)."""


# -- univariate decision -----------------------------------------------------

class ZeroPolynomialWithStrictSign(InputError):
    """A strict sign constraint on the zero polynomial is malformed."""


class EmptyInterval(InputError):
    """A requested open interval is empty."""
