"""Exception hierarchy for the mbx package."""


class MbxError(Exception):
    """Base class for all mbx errors."""


class PoleError(MbxError):
    """A special function was evaluated exactly at one of its poles."""


class DomainError(MbxError):
    """An argument lies outside the domain of validity of an operation."""


class ParameterCollision(MbxError):
    """A lower Pochhammer factor vanishes with a nonvanishing numerator."""


class HypothesisViolation(MbxError):
    """An input violates a stated hypothesis of a perturbation formula."""


class NearPole(MbxError):
    """Evaluation point is too close to a pole or apparent singularity.

    Callers receiving this must switch to the applicable limit formula
    instead of the direct closed form.
    """


class StripViolation(MbxError):
    """Mellin quadrature requested outside its strip of convergence."""


class ZetaPoleHit(MbxError):
    """An asymptotic sum would require zeta(1); the regime is wrong."""


class RegimeMismatch(MbxError):
    """Parameters do not satisfy the hypotheses of the requested engine."""


class NonconvergenceGuard(MbxError):
    """Direct summation exceeded its iteration budget."""


class UnsupportedRegime(MbxError):
    """Parameter combination not covered by any implemented expansion."""
