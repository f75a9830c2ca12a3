"""μLp properties: syntax, normal forms, the navigation-guarded fragment, and compatibility."""

from .ast import *  # noqa: F401,F403
from .ast import Formula, conjoin, disjoin, fixpoint_vars, free_vars, is_closed, to_text
from .logic import (CompatibilityResult, FragmentResult, NavCompatibility, class_quantified_roots, comp,
                    expand_abbreviations, is_pseudo_navigational, navigationally_compatible, negate,
                    termination_property, to_nnf)
from .parser import check_guards, check_monotone, parse_property, tokenize
