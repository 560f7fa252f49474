class Surface:
    """Closed discrete surfaces of the cochain demo."""

    sphere_octahedron = 0
    torus_grid = 1

    @classmethod
    def __getitem__(cls, key):
        if key in ('sphere', 'sphere-octahedron'):
            return cls.sphere_octahedron
        elif key in ('torus', 'torus-grid'):
            return cls.torus_grid
        else:
            raise KeyError('Unknown surface: {}'.format(key))

    @classmethod
    def name(cls, value):
        return {
            cls.sphere_octahedron: 'sphere-octahedron',
            cls.torus_grid: 'torus-grid',
        }[value]


class FiberClass:
    """Classification of a Dolbeault fiber by its cohomology."""

    exact = 'exact'
    skew_diagonal = 'skew-diagonal'
    marginal = 'marginal'
    unexpected = 'unexpected'
