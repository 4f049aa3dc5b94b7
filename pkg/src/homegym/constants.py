"""Numeric defaults shared across the simulator, cache, and factory."""

# Occupancy grid resolution (m per cell).
GRID_RES = 0.10

# Micro-step translation increment for navigation (m per step).
STEP_DELTA = 0.05

# Settling steps charged by a micro-path place.
SETTLE_STEPS = 50

# Deterministic busy-work charged per micro step (ms).
STEP_COST_MS = 1.0

# NextTo threshold (m) between footprints.
NEAR_DIST = 0.5

# Robot interaction reach (m) from a standing cell to the target footprint.
REACH_DIST = 0.75

# Pre-cached placement candidates per (subject, target, relation).
K_CANDIDATES = 8

# Clearance between neighbouring placement candidates (m).
CAND_GAP = 0.02

# Inset from support-face / container edges for candidate grids (m).
FACE_MARGIN = 0.02

# Hard cap on actions per rollout.
MAX_ACTIONS = 32
