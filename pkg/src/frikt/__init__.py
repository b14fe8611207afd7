"""Checked-semantics tooling for small Rust-subset cryptographic kernels.

Pipeline: :mod:`frikt.frontend` parses kernel source, :mod:`frikt.ir` lowers
it to a monadic IR with explicit panic paths, :mod:`frikt.evaluator` runs it
under a fuel budget, :mod:`frikt.specs` holds the mathematical reference
functions, and :mod:`frikt.checker` discharges obligations symbolically,
exhaustively or by seeded random testing.
"""

from .ir import Diverge, Ok, Panic, PanicKind, extract
from .evaluator import CompiledUnit, eval, eval_function

__version__ = "0.1.0"

__all__ = ["Diverge", "Ok", "Panic", "PanicKind", "extract", "CompiledUnit", "eval", "eval_function"]
