"""This file contains all custom errors defined for pyfairmod

Classes
-------
PyFairModError
    Base class for every error raised by pyfairmod
FormulaError
    Base class for scLTL formula errors
FormulaSyntaxError
    Formula text could not be parsed, carries the failing position
UnknownPropositionError
    Formula references a proposition outside the declared alphabet
NegationOnCompoundError
    Negation applied to something other than an atomic proposition
PatternArityError
    Wrong number of destinations for a request pattern
DfaConstructionError
    Formula progression produced more states than the configured cap
UnknownStateError
    DFA state id not part of the automaton
MapError
    Base class for road network errors
MapSchemaError
    Map document does not follow the map schema
NonPositiveWeightError
    Edge travel time below one second
ProbabilityRangeError
    Arrival probability outside [0, 1]
DanglingEndpointError
    Edge endpoint not declared as a node
MapNotFoundError
    Map file does not exist
InvalidProductStateError
    Product automaton built from an invalid position or DFA state
InfeasibleRequestError
    No route satisfies the request formula
ProtocolError
    Auction agents misused the message bus
OracleCapError
    Assignment matrix exceeds the exhaustive oracle size cap
ConfigError
    Scenario configuration is missing or invalid
RequestGenerationError
    No feasible request could be sampled within the retry budget
WorldConsistencyError
    Simulation state violated an internal invariant
ReportSchemaError
    Emitted report does not follow the report schema
"""


class PyFairModError(Exception):
    """Base class for every error raised by pyfairmod
    """

    pass


class FormulaError(PyFairModError):
    pass


class FormulaSyntaxError(FormulaError):
    """Raised when formula text cannot be parsed

    Attributes
    ----------
    position : int
        Character offset in the formula text where parsing failed
    """

    def __init__(self, message, position):
        """Constructor for FormulaSyntaxError
        """

        super().__init__('{} (at position {})'.format(message, position))
        self.position = position


class UnknownPropositionError(FormulaError):
    pass


class NegationOnCompoundError(FormulaError):
    pass


class PatternArityError(FormulaError):
    pass


class DfaConstructionError(PyFairModError):
    pass


class UnknownStateError(PyFairModError):
    pass


class MapError(PyFairModError):
    pass


class MapSchemaError(MapError):
    pass


class NonPositiveWeightError(MapError):
    pass


class ProbabilityRangeError(MapError):
    pass


class DanglingEndpointError(MapError):
    pass


class MapNotFoundError(MapError):
    pass


class InvalidProductStateError(PyFairModError):
    pass


class InfeasibleRequestError(PyFairModError):
    pass


class ProtocolError(PyFairModError):
    pass


class OracleCapError(PyFairModError):
    pass


class ConfigError(PyFairModError):
    pass


class RequestGenerationError(PyFairModError):
    pass


class WorldConsistencyError(PyFairModError):
    pass


class ReportSchemaError(PyFairModError):
    pass
