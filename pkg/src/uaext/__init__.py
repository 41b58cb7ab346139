"""uaext: a finite-grid laboratory for uniform-algebra extension theory.

Spaces are finite point sets with complex coordinates, algebras are
degree-capped function systems on them, and the classical objects
(averaging operators, annihilating measures, Choquet boundaries, Cole
extensions, group-implemented extensions) become small pieces of exact
linear algebra and linear programming that can be machine-checked.
"""

__version__ = "0.1.0"
