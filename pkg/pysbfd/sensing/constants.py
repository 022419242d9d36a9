RANGE_SCALE_M = 10.0
"""Range difference counted as one unit in matching costs."""

RATE_SCALE_MPS = 10.0
"""Range rate difference counted as one unit in matching costs."""

FUSION_GATE = 5.0
"""Normalized distance beyond which sub-band estimates are not averaged."""

EXHAUSTIVE_LIMIT = 6
"""Largest model order matched by trying every permutation."""

DEFECTIVE_TOLERANCE = 1e-12
"""Smallest admissible signal eigenvalue relative to covariance trace."""

UNIT_MODULUS_FLOOR = 0.99
"""Smallest admissible magnitude of a transmitted resource element."""

N_FFT_DEFAULT = 4096
"""Zero padded transform length of the periodogram oracle."""
