"""armsynth: correct-by-construction synthesis of reconfigurable planar arms.

Given a module catalog, a labeled polytope workspace, and a reach-avoid
task, the package synthesizes both the structure (which modules, in what
order) and the link lengths of a planar manipulator, certified by a
configuration-robustness linear program.
"""

__version__ = "0.1.0"
