"""Wrapper language: lexer, parser, AST, and canonical formatter."""

from .formatter import format_path, format_wrapper
from .lexer import Kind, Token, tokenize
from .nodes import (
    AXES,
    Action,
    AnyTest,
    BoolOp,
    ClassTest,
    Compare,
    Expr,
    FieldTest,
    FuncCall,
    IdTest,
    KleeneGroup,
    Marker,
    NameTest,
    NodeTest,
    NumberLit,
    PathExpr,
    PathItem,
    Predicate,
    Step,
    StringLit,
    TextTest,
    WrapperAst,
)
from .parser import parse, parse_path

__all__ = [
    "AXES",
    "Action",
    "AnyTest",
    "BoolOp",
    "ClassTest",
    "Compare",
    "Expr",
    "FieldTest",
    "FuncCall",
    "IdTest",
    "Kind",
    "KleeneGroup",
    "Marker",
    "NameTest",
    "NodeTest",
    "NumberLit",
    "PathExpr",
    "PathItem",
    "Predicate",
    "Step",
    "StringLit",
    "TextTest",
    "Token",
    "WrapperAst",
    "format_path",
    "format_wrapper",
    "parse",
    "parse_path",
    "tokenize",
]
