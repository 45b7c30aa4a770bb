"""Numerical checks of twistor-space symmetries of (super) Yang-Mills fields.

Modules: ``spinor`` (two-spinor algebra, alpha-planes), ``field`` (gauge
potentials, curvature, Wilson lines), ``morphism`` (self-dual and causal
morphisms, contact checks), ``pullback`` (nonlocal pullback of ASD
connections), ``grassmann`` and ``supersym`` (superspace, superconnections,
extended morphisms, the tau reduction) and ``cli`` (batch runner).
"""

__version__ = "0.1.0"
