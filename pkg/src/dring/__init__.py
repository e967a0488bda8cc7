"""Formal group laws of order two, D-rings and Steenrod squares over F_2, and the
extended-power calculus of finite coverings."""

from .series import (CoeffRing, MultiSeries, NotASquare, PrecisionError, RingElem, RingMismatch,
                     SubstitutionError, Var, frobenius_sqrt, make_ring, map_coefficients,
                     substitute)
from .parse import ParseError, parse_series, series_from_json, series_to_json
from .fgl import (FormalGroupLaw, InvalidLaw, NotCompatible, OrderTwoRequired,
                  SolverInconsistency, additive_law, check_fgl, frobenius_descend, is_morphism,
                  lubin_twist, square_compose, twist_morphism, universal_order_two,
                  validate_fgl)
from .model import (CompatibilityViolated, DRing, MissingCoefficientAction, check_D1, check_D2,
                    check_D3, check_grading, check_homomorphism, check_naturality, euler_total,
                    make_model)
from .steenrod import (NonAdditiveModel, NonHomogeneous, OpWord, adem_normalize, cartan_check,
                       compose_ops, q_op, sq)
from .covering import (FiniteCovering, IndexedPolynomial, NonConstantSheetCount, compose,
                       covering_product, covering_sum, derivative, extended_power, frames,
                       iso_check)

__version__ = "0.1.0"
