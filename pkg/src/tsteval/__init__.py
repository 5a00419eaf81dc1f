"""Automatic evaluation of text style transfer.

Three aspects are scored for an input text and its transferred output:
style transfer intensity (direction-corrected EMD over classifier style
distributions), content preservation (WMD and n-gram/embedding metrics on
style-masked or style-removed text) and naturalness (adversarial
classification).  Agreement and correlation statistics compare any of these
with human ratings.
"""

__version__ = "0.1.0"
