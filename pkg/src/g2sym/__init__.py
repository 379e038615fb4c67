"""Closed G2-structures on 7-dimensional Lie algebras and on the 7-torus."""

from .exterior import (DimensionError, FlavorError, FormParseError, KForm, basis_enumerate,
                       coefficient, format_form, interior, parse_form, wedge)
from .g2core import (G2Structure, NotPositiveError, DegenerateFormError, TorsionReport,
                     bilinear_from_phi, hodge_star, karigiannis_identity_residual,
                     metric_from_phi, standard_phi, su3_lift, torsion_report)
from .liealg import (BettiVector, JacobiError, LieAlgebra, betti, bracket, builtin, ce_d,
                     d_matrix, is_unimodular, parse_salamon)
from .symmetry import (NotFound, SymmetryAlgebra, TheoremHypothesisError, VerificationReport,
                       find_closed_g2, lie_derivative_phi, symmetry_algebra,
                       verify_theorem_bounds)
from .torusfield import (CoeffFn, FieldForm, build_torus_example, coordinate_symmetry_count,
                         fd_d_of_derived, field_d, torus_report)

__version__ = "0.1.0"
