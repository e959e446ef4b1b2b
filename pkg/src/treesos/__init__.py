"""Tree embeddings in graphs of large average degree, with exact
certificates, an exhaustive small-graph oracle and a command line."""

from .errors import (BudgetExhausted, ContractViolation, EmbeddingFailure, GraphInvariantError,
                     PreconditionError, TreesosError)
from .graph import Graph
from .report import Config
from .trees import RootedTree

__version__ = "0.1.0"

__all__ = ["Graph", "RootedTree", "Config", "TreesosError", "GraphInvariantError", "PreconditionError",
           "ContractViolation", "EmbeddingFailure", "BudgetExhausted", "__version__"]
