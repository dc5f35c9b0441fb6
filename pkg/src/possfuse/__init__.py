"""Supremum-based outer measures on finite spaces: constraints, transport and fusion."""

from .constraint import (
    Constraint,
    DiscreteProbability,
    MassFunction,
    as_mass_function,
    as_probability,
    canonicalize,
    dominates,
    equivalent,
    from_indicator,
    from_mass_function,
    from_partition,
    from_possibility,
    from_probability,
    independent_product,
    lower_bound,
    norm,
    outer_measure,
    uninformative,
)
from .errors import (
    IncompatibleConstraints,
    KernelNotAssociative,
    NonTotalMap,
    SpaceMismatch,
    ZeroConstraint,
)
from .funcspace import Dense, GaussShape, PointMap, StateSpace, SubsetMask
from .fusion import (
    FusionDiagnostics,
    FusionKernel,
    check_kernel_associativity,
    dempster_combine,
    fuse,
    general_fuse,
    odot,
)
from .transport import marginalize, pullback, pushforward

__version__ = "0.1.0"
