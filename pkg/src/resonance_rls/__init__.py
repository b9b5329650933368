"""Online estimation of resonant modes from input/output signals.

STFT frames of the input and output are turned into linear measurement
equations around each resonance and fed to a recursive least-squares
estimator; a lumped driveline simulator provides test signals with known
modes.
"""

from .driveline import (
    DrivelineConfig,
    SimOutput,
    excitation_profile,
    ground_truth_modes,
    simulate,
    tune_for_target,
)
from .errors import EstimationError, InputError, ResonanceError
from .estimator import (
    EstimationRun,
    ModeInstanceConfig,
    RlsConfig,
    emit_run,
    run_estimation,
    write_spectrogram,
)
from .modeling import (
    DrivelineConstants,
    ModeParameters,
    ModeReport,
    eval_driveline_response,
    eval_siso_response,
    mode_report,
)
from .regression import (
    ParameterVector,
    RegressionPoint,
    Variant,
    band_points,
    build_driveline_point,
    build_siso_point,
)
from .rls import RlsState, rls_init, rls_run_frame, rls_update
from .signals import (
    FrequencyBand,
    SpectrumFrame,
    StftConfig,
    TimeSeries,
    excitation_check,
    load_timeseries_csv,
    stft,
)

__version__ = "0.1.0"
