"""Multi-agent legal consultation engine.

Receptionist routing, domain-specialized lawyer dialogue with interactive
clarification trees, secretary report compilation, and reward-model response
selection, over pluggable chat/embedding backends.
"""

__version__ = "0.1.0"
