"""Closed-loop tracking projection onto a moving plane with hidden fiducials.

Library layout:

- geometry: homographies, sl(3) parametrization, plane-induced maps
- imaging: rasters, sampling, gradients, erosion, P5/P6 I/O
- alignment: the direct-alignment engine shared by surface and fiducial tracking
- fiducial: chessboard pattern construction and selection masks
- sequencer: bitplane decomposition and the binary frame / LED schedule
- tracking: the per-camera-frame pipeline and four-frame initialization
- control: corner-wise dead-time-compensated PD control
- simulator: projector-camera-surface renderer and motion models
- evaluation: offline trial harness and summary tables
- cli: command-line front end
"""

__version__ = "0.1.0"
