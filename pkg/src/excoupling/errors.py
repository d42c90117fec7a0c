"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter or evaluation point lies outside an operation's domain."""


class IntegrationError(RuntimeError):
    """The ODE integrator could not reach its target (step budget, underflow)."""


class RefinementError(RuntimeError):
    """A sampled trajectory is too coarse to certify a crossing count."""


class NumericalConsistencyError(RuntimeError):
    """A numerical result contradicts a structural property it must satisfy."""


class RecursionCheckError(AssertionError):
    """An exact identity of the polynomial recursion failed."""


class LadderTermination(RuntimeError):
    """A raising step produced the zero function.

    ``states`` holds the nontrivial levels built before the failure.
    """

    def __init__(self, level, states):
        super().__init__(f"ladder terminates: v_{level} is trivial on the grid")
        self.level = level
        self.states = states
