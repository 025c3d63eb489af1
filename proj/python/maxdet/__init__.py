"""Maximal determinants of +-1 matrices.

Matrices are nested lists of Python ints; designs hold +1/-1 entries.
"""

from ._maxdet import (
    FormatError,
    are_gram_equivalent,
    are_hadamard_equivalent,
    compress_values,
    decompose,
    det,
    dual_gram,
    ehlich_barba_bound,
    ehlich_bound,
    expand_values,
    full_spectrum,
    gram,
    gram_canonical,
    hadamard_bound,
    hadamard_canonical,
    hm_indecomposability,
    parse_int_expr,
    pipeline,
    rationally_equivalent,
    scaled_det,
    search_grams,
)

__all__ = [
    "FormatError",
    "are_gram_equivalent",
    "are_hadamard_equivalent",
    "compress_values",
    "decompose",
    "det",
    "dual_gram",
    "ehlich_barba_bound",
    "ehlich_bound",
    "expand_values",
    "full_spectrum",
    "gram",
    "gram_canonical",
    "hadamard_bound",
    "hadamard_canonical",
    "hm_indecomposability",
    "parse_int_expr",
    "pipeline",
    "rationally_equivalent",
    "scaled_det",
    "search_grams",
]
