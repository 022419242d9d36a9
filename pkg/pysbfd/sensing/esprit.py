from logging import getLogger
from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.linalg import LinAlgError, eigh, eigvals, lstsq
from scipy.signal import find_peaks

from .constants import DEFECTIVE_TOLERANCE, N_FFT_DEFAULT
from ..exceptions import EstimationError, WrongArguments

LOG = getLogger(__name__)


class CovarianceMatrix(NamedTuple):
    """Smoothed forward-backward covariance."""

    r: np.ndarray
    """L x L Hermitian matrix."""

    n_snapshots: int
    """Subarray vectors averaged."""

    @property
    def size(self) -> int:
        return self.r.shape[0]


class PhaseEstimates(NamedTuple):
    """Per sample phase steps of line spectrum components."""

    phases: np.ndarray
    """Ascending values in (-pi, pi]."""


def wrap_phase(phase):
    """Maps phases into (-pi, pi]."""
    wrapped = np.pi - np.mod(np.pi - np.asarray(phase, dtype=float), 2 * np.pi)
    return float(wrapped) if wrapped.ndim == 0 else wrapped


def _as_matrix(data) -> np.ndarray:
    data = np.asarray(data)

    if data.ndim == 1:
        data = data[:, None]

    if data.ndim != 2 or not data.size:
        raise WrongArguments(f'Expected non-empty matrix, got shape {data.shape}.')

    return data


def smoothed_covariance(data: np.ndarray, subarray: int) -> CovarianceMatrix:
    """Returns forward-backward averaged covariance of all length-L subarrays.

    R_f = 1/(K*S) sum_s sum_k x_ks x_ks^H, x_ks = D[k:k+L, s], K = N - L + 1.
    R = (R_f + J conj(R_f) J) / 2.

    :param data: N x S matrix, columns are snapshots along the estimation axis.
    :param subarray: Subarray length L, 1 <= L <= N.

    """
    data = _as_matrix(data)
    n_rows, n_snapshots = data.shape

    if not 1 <= subarray <= n_rows:
        raise WrongArguments(f'Subarray length must be within [1, {n_rows}], not {subarray}.')

    windows = sliding_window_view(data, subarray, axis=0)
    vectors = windows.reshape(-1, subarray)

    forward = vectors.T @ vectors.conj() / len(vectors)
    backward = np.flip(forward).conj()

    return CovarianceMatrix(r=(forward + backward) / 2, n_snapshots=len(vectors))


def esprit_phases(cov: CovarianceMatrix, order: int) -> PhaseEstimates:
    """Estimates line spectrum phase steps by least-squares ESPRIT.

    :param cov: Smoothed covariance.
    :param order: Number of lines, 1 <= order < L.

    """
    size = cov.size

    if not 1 <= order < size:
        raise WrongArguments(f'Model order must be within [1, {size - 1}], not {order}.')

    try:
        values, vectors = eigh(cov.r)

    except (LinAlgError, ValueError) as e:
        raise EstimationError(f'Eigendecomposition failed: {e}')

    trace = float(np.sum(values))

    if not np.all(np.isfinite(values)) or trace <= 0 or values[-order] <= DEFECTIVE_TOLERANCE * trace:
        raise EstimationError(
            f'Signal subspace of order {order} is defective: '
            f'eigenvalue {values[-order]:.3g} against trace {trace:.3g}.')

    signal = vectors[:, -order:]
    rotation, *_ = lstsq(signal[:-1], signal[1:])

    phases = np.sort(wrap_phase(np.angle(eigvals(rotation))))

    LOG.debug(f'ESPRIT phases: {phases}')

    return PhaseEstimates(phases=phases)


def periodogram_peaks(data: np.ndarray, order: int, n_fft: int = N_FFT_DEFAULT) -> PhaseEstimates:
    """Estimates phase steps as the largest peaks of the snapshot averaged zero padded spectrum.

    Serves as an independent oracle for ESPRIT.

    :param data: N x S matrix, columns are snapshots along the estimation axis.
    :param order: Number of peaks.
    :param n_fft: Transform length, at least 4N.

    """
    data = _as_matrix(data)
    n_rows = data.shape[0]

    if n_fft < 4 * n_rows:
        raise WrongArguments(f'Transform length must be at least {4 * n_rows}, not {n_fft}.')

    spectrum = np.mean(np.abs(np.fft.fft(data, n=n_fft, axis=0)) ** 2, axis=1)

    if not np.any(spectrum > 0):
        raise EstimationError('Spectrum is flat zero: no peaks.')

    # Circular neighbours, so that bins 0 and n_fft-1 may be peaks.
    padded = np.concatenate((spectrum[-1:], spectrum, spectrum[:1]))
    candidates, _ = find_peaks(padded)
    candidates = candidates - 1
    candidates = candidates[np.argsort(spectrum[candidates])[::-1]]

    separation = max(1, n_fft // n_rows)
    chosen = []

    for candidate in candidates:
        gaps = [min(abs(candidate - peak), n_fft - abs(candidate - peak)) for peak in chosen]

        if all(gap >= separation for gap in gaps):
            chosen.append(candidate)

        if len(chosen) == order:
            break

    if len(chosen) < order:
        raise EstimationError(f'Found {len(chosen)} separated peaks, {order} requested.')

    phases = np.sort(wrap_phase(2 * np.pi * np.array(chosen) / n_fft))

    return PhaseEstimates(phases=phases)
