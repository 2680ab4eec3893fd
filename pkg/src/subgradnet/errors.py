"""Exception types shared across the package."""


class ScenarioError(ValueError):
    """A scenario file or run configuration is invalid (CLI exit code 2)."""


class UpdateRegularityError(ScenarioError):
    """Update schedules do not perform a constant positive number of
    optimization updates in every length-T window."""


class SingularDataError(ArithmeticError):
    """The observed data matrix is rank deficient; the weight pair cannot
    be recovered from it (CLI exit code 3)."""


class CertificateNotConstructible(RuntimeError):
    """The span condition fails but no strictly positive row is available
    to perturb, so no alternative weight pair can be exhibited by this
    construction.  Distinct from the weights being discoverable."""


class UnboundedSubgradientError(ValueError):
    """No finite subgradient bound exists over the requested region."""
