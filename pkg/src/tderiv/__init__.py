"""Exact symbolic calculus for ordered differential fields.

Subpackages cover: sparse rational arithmetic and truncated series
(poly, series), the derivative-operator monoid (theta), derivations and
the chain-rule calculus (derivations), jet rewriting (terms, jets),
series and germ evaluation backends (models), jet-closure matroids
(matroid), commuting-derivation conditions and their series solutions
(coherence), axiom instances with a univariate exact decision backend
(codf, sturm), and a batch CLI (cli).
"""

__version__ = "0.1.0"
