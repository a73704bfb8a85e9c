"""langchev: exact solvers for a^(-F) a = c in classical groups over finite
fields, Chevalley basis construction/recognition for split reductive Lie
algebras, and Weyl group analytics.

Submodules:

- ``ff``: finite field towers with compatible embeddings and Frobenius.
- ``linalg``: exact dense linear algebra and polynomial factorization.
- ``rootdata``: root data, structure constants, Weyl group analytics.
- ``liealg``: structure-constant p-Lie algebras, split toral subalgebra
  search, Chevalley bases.
- ``lang``: the twisted-equation solvers for GL/SL/Sp/SO and split tori.
- ``cli``: the ``langchev`` command line front end.
"""

__version__ = "0.1.0"
