from .esprit import CovarianceMatrix, PhaseEstimates, esprit_phases, periodogram_peaks, smoothed_covariance, wrap_phase
from .pipeline import (
    EstimateError, Pairing, QuotientGrid, TargetEstimate,
    associate_and_error, draw_waveform, estimate_subband, fuse_subbands, pair_estimates,
    phase_to_range, phase_to_rate, project_doppler, quotient_grid, range_to_phase, rate_to_phase, run_ap,
)
