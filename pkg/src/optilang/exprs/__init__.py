"""Expression mini-language: parsing, analysis, evaluation, affine lowering."""

from .affine import (
    AffineConstraint,
    AffineExpr,
    LoweringError,
    NonlinearityError,
    VarTable,
    expand_constraints,
    lower_affine,
)
from .analysis import free_roots
from .interp import (
    DataEnv,
    EvalError,
    EvalTypeError,
    KeyArityError,
    MissingDataPairError,
    NameResolutionError,
    Table,
    eval_concrete,
)
from .lexer import ParseError
from .nodes import (
    BinOp,
    Call,
    Compare,
    Expr,
    ForClause,
    GeneratorExpr,
    MethodCall,
    Name,
    NumberLit,
    SelfAttr,
    StringLit,
    Subscript,
    UnaryNeg,
)
from .parser import parse_expr

__all__ = [
    "AffineConstraint",
    "AffineExpr",
    "BinOp",
    "Call",
    "Compare",
    "DataEnv",
    "EvalError",
    "EvalTypeError",
    "Expr",
    "ForClause",
    "GeneratorExpr",
    "KeyArityError",
    "LoweringError",
    "MethodCall",
    "MissingDataPairError",
    "Name",
    "NameResolutionError",
    "NonlinearityError",
    "NumberLit",
    "ParseError",
    "SelfAttr",
    "StringLit",
    "Subscript",
    "Table",
    "UnaryNeg",
    "VarTable",
    "eval_concrete",
    "expand_constraints",
    "free_roots",
    "lower_affine",
    "parse_expr",
]
