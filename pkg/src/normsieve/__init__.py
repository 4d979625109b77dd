"""normsieve: counting binary quadratic form values that are norms from an
abelian number field.

The package realizes, at desk scale, the count

    N_{F,L}(B) = #{(s,t) in [-B,B]^2 : F(s,t) is a norm of an integral ideal
                 of the abelian field L}

together with the local densities, lattice-point estimates, and beta-sieve
machinery that control its order of magnitude B^2 / (log B)^(1 - r/n).
"""

from .errors import HypothesisError, ResourceBudgetError
from .fields import FieldSpec
from .forms import FormSpec

__all__ = ["FieldSpec", "FormSpec", "HypothesisError", "ResourceBudgetError"]

__version__ = "0.1.0"
