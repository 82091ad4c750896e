"""Maltsev operations and Kan fibrations for finite simplicial algebras."""
from .algebra import (FiniteAlgebra, Signature, check_maltsev_axioms, eval_term,
                      eval_term_vec, is_homomorphism)
from .detect import closure_stats, maltsev_witness
from .horn import (Horn, LiftProblem, TraceEntry, check_matching, fill_horn,
                   lift_horn, verify_lift)
from .oracle import (FibrationReport, brute_fill, brute_lift, kan12_circle,
                     verify_fibration)
from .simplicial import (CircleElement, SimplicialHom, TruncatedSimplicialAlgebra,
                         circle_free_mod, constant, is_levelwise_surjective,
                         nerve_abelian, validate)
from .terms import App, Var, format_term, parse_term

__version__ = "0.1.0"
