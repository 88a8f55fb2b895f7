"""Exception types shared across the package."""


class MQLefschetzError(Exception):
    """Base class for all package errors."""


class CutLocusViolation(MQLefschetzError):
    """The target point lies on or beyond the cut locus of the source point."""


class BaseMismatch(MQLefschetzError):
    """A tangent vector was supplied at the wrong base point."""


class NotAntisymmetric(MQLefschetzError):
    """Pfaffian input is not antisymmetric within tolerance."""


class ConjugatePoint(MQLefschetzError):
    """Jacobi boundary problem is singular (kappa=+1 and d >= pi)."""


class DegenerateChart(MQLefschetzError):
    """Chart-based differential requested at a degenerate chart point."""


class UnsupportedManifold(MQLefschetzError):
    """Operation not available for this manifold (no global quadrature)."""


class NonFiniteDensity(MQLefschetzError):
    """A quadrature density evaluated to NaN/inf at some node."""

    def __init__(self, node_index: int, node_coords, value):
        self.node_index = node_index
        self.node_coords = node_coords
        self.value = value
        super().__init__(
            f"non-finite density {value!r} at node {node_index} (coords {node_coords})"
        )


class DegenerateFixedSet(MQLefschetzError):
    """Fixed-point set is degenerate (det(M - I) = 0 for a torus map)."""


class DegenerateRecord(MQLefschetzError):
    """A fixed-point record with det(Id - df) = 0 cannot carry a sign."""


class CleanIntersectionViolation(MQLefschetzError):
    """A fixed component violates the non-degeneracy det(Id - df_nu) != 0."""


class ZeroOnCircle(MQLefschetzError):
    """Vector field vanishes on the sampling circle of a winding index."""


class EmptyFixedSet(MQLefschetzError):
    """Localization requested for a map with empty fixed-point set."""


class NonFiniteCutSet(MQLefschetzError):
    """Sign refinement requires a finite cut set."""


class ParseError(MQLefschetzError):
    """A CLI descriptor string could not be parsed."""
