from .discrete import DiscreteEllipticModel, DiscreteTripleModel, build_discrete_model
from .halfline import HalfLineModel, build_halfline_model
from .triple import TripleModel, gamma_field, weyl
