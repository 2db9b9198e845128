"""Closed-form scalar expressions in x, y, z and vector fields built from them."""

from .dual import DualNumber3, EvaluationError, evaluate_dual, evaluate_scalar
from .field import (
    DOMAIN_ERROR,
    OK,
    ZERO_VECTOR,
    Jet,
    JetBatch,
    VectorFieldSpec,
    ZeroVectorError,
    evaluate,
    evaluate_jet,
    evaluate_jet_reference,
    evaluate_jets,
    evaluate_many,
)
from .nodes import BinOp, Call, Const, Expression, Neg, Num, Var, derivative, to_text
from .parser import (
    ArityError,
    ExpressionSyntaxError,
    ParseError,
    UnknownIdentifierError,
    parse_expression,
    split_components,
)

__all__ = [
    "ArityError",
    "BinOp",
    "Call",
    "Const",
    "DOMAIN_ERROR",
    "DualNumber3",
    "EvaluationError",
    "Expression",
    "ExpressionSyntaxError",
    "Jet",
    "JetBatch",
    "Neg",
    "Num",
    "OK",
    "ParseError",
    "UnknownIdentifierError",
    "Var",
    "VectorFieldSpec",
    "ZERO_VECTOR",
    "ZeroVectorError",
    "derivative",
    "evaluate",
    "evaluate_dual",
    "evaluate_jet",
    "evaluate_jet_reference",
    "evaluate_jets",
    "evaluate_many",
    "evaluate_scalar",
    "parse_expression",
    "split_components",
    "to_text",
]
