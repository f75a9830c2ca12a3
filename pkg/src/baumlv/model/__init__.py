"""BAUML model types and the `.bauml` language."""

from .dsl import parse_model, parse_model_unchecked, serialize_model
from .types import (
    PRE_INITIAL, ActivityDiagram, AssocDecl, Attribute, BaumlModel, Cardinality, ClassDecl,
    ClassModel, DbObject, Edge, InitialDb, Node, Param, RoleRef, StateMachine, TaskContract,
    Transition, hierarchy_queries,
)
from .validate import CODES, validate

__all__ = [
    "parse_model", "parse_model_unchecked", "serialize_model", "validate", "CODES",
    "PRE_INITIAL", "ActivityDiagram", "AssocDecl", "Attribute", "BaumlModel", "Cardinality",
    "ClassDecl", "ClassModel", "DbObject", "Edge", "InitialDb", "Node", "Param", "RoleRef",
    "StateMachine", "TaskContract", "Transition", "hierarchy_queries",
]
