"""Synthetic electrostatic gait sensing toolkit.

Modules:
    simkit   - capacitive-coupling signal model and record synthesis
    dsp      - trimming, standardization and MFCC feature extraction
    forest   - from-scratch random forest, cross-validation and metrics
    legshake - streaming 5-6 Hz leg-shake detector
    io       - record / manifest / feature-table file formats
    cli      - command-line entry points
"""

from __future__ import annotations

__version__ = "0.1.0"
