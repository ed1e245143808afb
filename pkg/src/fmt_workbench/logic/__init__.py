"""First-order syntax, semantics and prefix classification."""

from .prenex import (
    EXISTS,
    FORALL,
    PrefixClass,
    classify_prefix,
    is_prenex,
    prefix_of,
    rectify,
    to_prenex,
)
from .semantics import CompiledFormula, evaluate, models
from .syntax import (
    And,
    Atom,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Var,
    atom,
    conj,
    disj,
    eq,
    exists,
    forall,
    free_vars,
    is_sentence,
    neq,
    parse,
    render,
    vocabulary_of,
)
