"""homflag: flag curvature of homogeneous Finsler metrics on coset spaces.

Pipeline: build a compact Lie algebra and a reductive decomposition
(lie_core), equip m with an invariant Minkowski norm (minkowski), evaluate
the algebraic curvature operators (curvature), and certify or refute
positivity of the flag curvature by scanning (scanner).  Abstract root
systems and the Condition (A) classification live in root_systems; the CLI
ties everything to JSON configs and reports.
"""

__version__ = "0.1.0"
