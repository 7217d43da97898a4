"""nlpscope: augmented Lagrangian NLP workbench with trace analytics."""

__version__ = "0.1.0"
