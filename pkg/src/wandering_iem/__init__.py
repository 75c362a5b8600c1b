"""Self-similar interval exchange maps, their fractals, and affine maps with wandering intervals."""
from .numberfield import ALPHA, BETA, CubicNumber, char_poly, eigen_pair, root_of_unity_check
from .iem import AffineIem, Iem, Partition, first_return, itinerary, self_similarity_check
from .substitution import PssPath, PssTriple, Substitution, TwoSidedWindow

__version__ = "0.1.0"
