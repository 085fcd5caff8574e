"""Versioned pass/fail thresholds for the experiment suite.

The ratio bounds (<= 4, stability brackets) are regression bounds fixed by
this artifact, not constants from any analysis; tightening them is an
auditable change to this file.
"""

THRESHOLDS_VERSION = 1

FRAME_IDENTITY_RESIDUAL = 1e-12
REDUCTION_RESIDUAL = 1e-8
SPIN_WAVE_L2 = 1e-6
RK4_ORDER_BRACKET = (3.7, 4.3)
CROSS_FORMULATION_SUP = 1e-5
CROSS_FORMULATION_DT_GAIN = 8.0
ENERGY_DRIFT = 1e-6
SPHERE_DRIFT = 1e-8
TAYLOR_ORACLE_REL = 1e-6
FACTORIZATION_RESIDUAL = 1e-10
MULTIPLIER_RATIO_BRACKET = (1.0 / 32.0, 32.0)
L_RATIO_BRACKET = (1.0 / 64.0, 64.0)
PARTITION_RESIDUAL = 1e-12
NORM_PERSISTENCE_RATIO = 4.0
NORM_PERSISTENCE_MONOTONE_SLACK = 0.10
LIPSCHITZ_RATIO = 4.0
LIPSCHITZ_STABILITY = 0.25
PICARD_CONTRACTION_RATIO = 0.5
PICARD_EPS_SCALING_FACTOR = 4.0
