"""Exception types shared across the package.

PhysicsError subclasses signal a physically meaningful failure (instability,
unreachable operating point, singular geometry); they map to CLI exit code 1.
ScenarioError signals bad user input (malformed scenario file, invalid
parameter combinations) and maps to exit code 2.
"""


class PhysicsError(Exception):
    pass


class InvalidGeometryError(PhysicsError):
    # cavity stability parameter outside (-1, 1) without the planar limit
    pass


class BranchAmbiguityError(PhysicsError):
    # complex-branch bookkeeping of the frequency shift cannot be trusted
    pass


class SingularConfigurationError(PhysicsError):
    # a denominator of the general longitudinal factor vanished
    pass


class UnstableSystemError(PhysicsError):
    # drift matrix has an eigenvalue with non-negative real part
    pass


class SteadyStateError(PhysicsError):
    # classical steady-state solve failed (no root / target detuning unreachable)
    pass


class HeatingError(PhysicsError):
    # net cooling rate non-positive; the weak-coupling occupancy formula diverges
    pass


class UnphysicalStateError(PhysicsError):
    # covariance matrix violates Gaussian-state constraints beyond tolerance
    pass


class QuadratureError(PhysicsError):
    # numerical integration did not reach the requested tolerance
    pass


class ScenarioError(Exception):
    """Invalid scenario file or CLI usage; carries a list of messages."""

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))
