"""A workbench for the constructive modal logic CK on finite structures."""
from .algebra import FiniteCKAlgebra, alg_valid, check_algebra, interpret, pdt_check
from .correspondence import (correspondence_check, fo_equivalent, p_persistence_check,
                             sahlqvist_correspondent, standard_translation)
from .duality import (GeneralFrame, check_descriptive, check_semi_descriptive, dual_frame,
                      eta_bar, prime_filters, prune, segment_extension, segments, theta_bar)
from .fol import fo_eval, parse_fo
from .frames import (CKFrame, CKModel, check_bounded_morphism, check_frame, complex_algebra,
                     disjoint_union, eval_formula, forces, frame_valid, generated_subframe,
                     heyting_ops, is_bounded_morphic_image)
from .syntax import Formula, parse, substitute, to_text

__version__ = "0.1.0"
