"""Exact travelling-wave solver for autonomous algebraic ODEs.

Pole families and Laurent series of the ODE determine a first-order
Briot-Bouquet subequation by linear algebra; its curve genus selects an
elliptic or degenerate (tanh / rational) closed form, which is then checked
exactly and numerically.
"""

__version__ = "0.1.0"

from .arith import ParamField, bareiss_solve, factor_limited, rat, render
from .closed_forms import (EllipticForm, RationalForm, TrigForm, degenerate_check,
                           integrate_genus0, integrate_genus1)
from .curves import PlaneCurve, genus
from .errors import (AllPointsSingular, BriotBouquetError, DegenerateBalance,
                     DivisionByZeroDenominator, InternalInconsistency, IrrationalSingularLocus,
                     LogarithmRequired, NoClosedForm, NoPoleFamily, NonAutonomousError,
                     OdeSyntaxError, PrecisionLoss, ProblemFileError, TruncationTooShort,
                     UndeclaredSymbolError, UnresolvedConstraints, UnsupportedSingularity)
from .ode import AutonomousODE, parse_ode, substitute_series, total_derivative
from .pipeline import analyze, load_problem, parse_problem, solve, verify_report
from .singular import (fuchs_indices, indicial_polynomial, laurent_expand, leading_orders,
                       residue_conditions)
from .subeq import SubeqTemplate, assemble_system, elliptic_order, solve_branches
from .verify import verify_exact, verify_numeric, verify_subeq_consequence, wp_eval

__all__ = [
    'ParamField', 'bareiss_solve', 'factor_limited', 'rat', 'render', 'EllipticForm',
    'RationalForm', 'TrigForm', 'degenerate_check', 'integrate_genus0', 'integrate_genus1',
    'PlaneCurve', 'genus', 'AllPointsSingular', 'BriotBouquetError', 'DegenerateBalance',
    'DivisionByZeroDenominator', 'InternalInconsistency', 'IrrationalSingularLocus',
    'LogarithmRequired', 'NoClosedForm', 'NoPoleFamily', 'NonAutonomousError', 'OdeSyntaxError',
    'PrecisionLoss', 'ProblemFileError', 'TruncationTooShort', 'UndeclaredSymbolError',
    'UnresolvedConstraints', 'UnsupportedSingularity', 'AutonomousODE', 'parse_ode',
    'substitute_series', 'total_derivative', 'analyze', 'load_problem', 'parse_problem',
    'solve', 'verify_report', 'fuchs_indices', 'indicial_polynomial', 'laurent_expand',
    'leading_orders', 'residue_conditions', 'SubeqTemplate', 'assemble_system',
    'elliptic_order', 'solve_branches', 'verify_exact', 'verify_numeric',
    'verify_subeq_consequence', 'wp_eval',
]
