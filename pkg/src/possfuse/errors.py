"""Exception types raised across the package."""


class SpaceMismatch(ValueError):
    """Operands live on different state spaces."""


class NonTotalMap(ValueError):
    """A point map leaves some domain label unmapped or maps outside its codomain."""


class ZeroConstraint(ValueError):
    """Every component of a constraint vanished (zero norm)."""


class IncompatibleConstraints(ValueError):
    """Fusion normalizer is zero: the two sources are in total conflict."""


class KernelNotAssociative(ValueError):
    pass


class KernelClosureError(ValueError):
    """A second-order kernel would map outside its enumerated point set."""


class SpaceTooLarge(ValueError):
    """Exhaustive subset enumeration was requested on too large a space."""


class DocError(ValueError):
    """An input document does not parse into the expected object."""
