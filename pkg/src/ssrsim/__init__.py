"""ssrsim: cycle-approximate simulation of stream semantic registers.

Subpackages model a single-issue in-order core cluster with two data-mover
lanes per core, a banked single-cycle scratchpad, the hot-loop kernel suite,
a closed-form instruction-count model and a loop-nest-to-stream compiler
pass, all driven from one CLI.
"""

__version__ = "0.1.0"
