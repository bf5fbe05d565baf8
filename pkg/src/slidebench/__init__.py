"""slidebench: a microscope-slide image workbench.

Segments grain-scale objects from noisy bright-field scenes, extracts
per-object crops and masks, computes texture descriptors, trains and
evaluates classical classifiers, and serves a human labeling workflow.
"""

__version__ = "0.1.0"
