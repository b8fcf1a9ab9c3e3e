import logging
from enum import StrEnum

logger = logging.getLogger(__name__)


class ParameterKind(StrEnum):
    """
    Enum representing the shapes a boundary parameter B can take.

    Attributes
    ----------
    SCALAR : str
        B = b·I with a single real coupling b.
    LOCAL : str
        Diagonal Robin parameter sampled from a real function on the boundary nodes.
    NONLOCAL : str
        Dense Hermitian matrix coupling distinct boundary nodes.
    """

    SCALAR = "scalar"
    LOCAL = "local"
    NONLOCAL = "nonlocal"


class CertificateRoute(StrEnum):
    """
    Enum representing the argument a lower-bound certificate rests on.

    Attributes
    ----------
    DECAY : str
        Weyl-function decay envelope, value mu - (C·|B+|)^(1/alpha).
    NEGATIVITY : str
        B has no positive part, value min σ(A0).
    FORM : str
        Quadratic form and trace inequality, value essinf a - β(E/|B+|)·|B+|.
    """

    DECAY = "decay"
    NEGATIVITY = "negativity"
    FORM = "form"


class Verdict(StrEnum):
    """Outcome of a single hypothesis check."""

    PASS = "pass"
    FAIL = "fail"
    VACUOUS = "vacuous"


class SelfAdjointCriterion(StrEnum):
    """
    Enum representing which self-adjointness criterion a hypothesis report supports.

    Attributes
    ----------
    COMPLEX_PAIR : str
        The Krein block is invertible at a pair of points in the upper and lower
        half planes.
    REAL_POINT : str
        The Krein block is invertible at a real point of the resolvent set of A0,
        which then also lies in the resolvent set of A_[B].
    """

    COMPLEX_PAIR = "complex-pair"
    REAL_POINT = "real-point"


class ModelKind(StrEnum):
    DISCRETE = "discrete"
    HALFLINE = "halfline"
    RANDOM = "random"


class Experiment(StrEnum):
    """
    Enum representing the experiments the command line runner knows.

    ``green-check`` is accepted as an alias of ``triple-check``.
    """

    TRIPLE_CHECK = "triple-check"
    GREEN_CHECK = "green-check"
    KREIN_CHECK = "krein-check"
    HYPOTHESES = "hypotheses"
    DECAY_FIT = "decay-fit"
    BOUND_CERTIFY = "bound-certify"
    SWEEP = "sweep"


class BoundarySide(StrEnum):
    X0 = "x0"
    X1 = "x1"
    Y0 = "y0"
    Y1 = "y1"
