from fredcomplex.providers import Logger


class FredcomplexError(Exception):
    """Base class of numerical errors.

    Every subclass carries a short ``code`` naming the failure kind.
    """

    code = 'error'

    def __init__(self, msg=None):
        """Store the message.

        :param msg: error message, the code is used when missing
        """
        self.msg = msg if msg is not None else self.code
        super().__init__(self.msg)

    def __str__(self):
        """Represent the object as a string."""
        return '{}: {}'.format(self.code, self.msg)


class NonFiniteMatrix(FredcomplexError):
    """Matrix contains NaN or Inf entries."""

    code = 'non-finite'


class StructuralError(FredcomplexError):
    """Shapes of differentials or projections do not chain."""

    code = 'structural'

    def __init__(self, msg, position=None):
        """
        :param str msg: description of the mismatch
        :param int position: offending position j, if any
        """
        self.position = position
        if position is not None:
            msg = 'position {}: {}'.format(position, msg)
        super().__init__(msg)


class CompositionViolation(FredcomplexError):
    """Consecutive differentials do not compose to zero."""

    code = 'composition-violation'

    def __init__(self, position, defect):
        self.position = position
        self.defect = defect
        super().__init__(
            'position {}: relative composition norm {:.3e}'.format(
                position, defect)
        )


class CommutingSquareViolation(FredcomplexError):
    """Vertical maps of a morphism do not commute with differentials."""

    code = 'commuting-square'

    def __init__(self, position, defect):
        self.position = position
        self.defect = defect
        super().__init__(
            'position {}: defect norm {:.3e}'.format(position, defect)
        )


class CohomologyMismatch(FredcomplexError):
    """Laplacian kernels and rank-nullity disagree."""

    code = 'cohomology-mismatch'

    def __init__(self, position, laplacian_dim, rank_nullity_dim):
        self.position = position
        super().__init__(
            'position {}: dim ker Laplacian {} != rank-nullity {}'.format(
                position, laplacian_dim, rank_nullity_dim)
        )


class LaplacianSingular(FredcomplexError):
    """Pseudo-inversion of a Laplacian is not well posed."""

    code = 'laplacian-singular'

    def __init__(self, position, msg=''):
        self.position = position
        text = 'position {}'.format(position)
        if msg:
            text += ': {}'.format(msg)
        super().__init__(text)


class UnstableIndex(FredcomplexError):
    """Index differs between two truncations."""

    code = 'unstable-index'

    def __init__(self, indices):
        """
        :param dict indices: truncation -> index
        """
        self.indices = indices
        super().__init__('index per truncation {}'.format(
            ', '.join('N={}: {}'.format(k, v) for k, v in indices.items())
        ))


class SymbolVanishes(FredcomplexError):
    """Symbol is not bounded away from zero."""

    code = 'symbol-vanishes'


class DecayViolation(FredcomplexError):
    """Exponential e^(-beta r) does not decay on the cutoff support."""

    code = 'decay-violation'


class SectionJump(FredcomplexError):
    """Adjacent kernel fibers are too far apart to align phases."""

    code = 'section-jump'

    def __init__(self, distance, where):
        self.distance = distance
        super().__init__(
            'adjacent-fiber distance {:.3f} at {}'.format(distance, where)
        )


class ProviderError(Exception):
    """Output or provider failure."""

    def __init__(self, msg=None):
        """Report the failure through the logger.

        :param msg: error message
        """
        self.msg = msg
        Logger.fatal(msg)
        super().__init__(msg)

    def __str__(self):
        """Represent the object as a string."""
        return '{}'.format(self.msg)


class ConfigError(Exception):
    """Invalid or incomplete configuration."""

    pass
