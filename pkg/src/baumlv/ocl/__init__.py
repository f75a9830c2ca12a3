"""OCL subset: AST, parser, evaluator, effect normal form, navigational test."""

from . import ast
from .ast import to_text
from .effects import EffectNormalForm, apply_effects, postcondition_holds, to_effect_normal_form
from .evaluate import eval_query, holds
from .navigation import is_navigational_from, role_mentions, static_type
from .parser import parse_ocl

__all__ = [
    "ast", "to_text", "parse_ocl", "eval_query", "holds", "EffectNormalForm",
    "to_effect_normal_form", "apply_effects", "postcondition_holds",
    "is_navigational_from", "role_mentions", "static_type",
]
