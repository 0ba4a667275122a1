"""Virtual Laguerre-Gauss interferometer bench.

Synthesizes the two orthogonal LG mode-pair superpositions, mixes them with
orthogonal polarizations at a chosen intensity ratio, captures the combined
beam with a noisy virtual CCD, recovers the mixture weight by constrained
least squares, and converts weights to and from quantum discord values with
both a closed form and a brute-force measurement search.
"""

from .bell import (
    BellSpectrum,
    CorrelationVector,
    MeasurementDirection,
    analytic_discord,
    bell_density_matrix,
    binary_entropy,
    correlation_density_matrix,
    correlations_to_spectrum,
    invert_discord,
    oracle_discord,
    random_spectrum,
    spectrum_entropy,
    spectrum_to_correlations,
)
from .bench import (
    ArmSettings,
    CCDImage,
    NoiseModel,
    PolarizedField,
    block_arm,
    build_combined_state,
    ccd_capture,
    expected_profile,
    normalize_counts,
    normalize_image,
    trace_out_polarization,
    translate_bilinear,
)
from .config import ExperimentConfig, config_from_dict, load_config
from .errors import (
    ConfigError,
    DegenerateBasis,
    DegenerateProbability,
    EmptyImage,
    EmptyTermList,
    GridMismatch,
    GridTooCoarse,
    LgDiscordError,
    NonPhysical,
    ZeroPower,
)
from .modes import (
    GridSpec,
    IntensityMap,
    ScalarField,
    bell_modes,
    gram_matrix,
    inner_product,
    intensity,
    lg_mode,
    superpose,
)
from .pipeline import (
    RunArtifacts,
    RunRecord,
    recover_from_files,
    run_experiment,
    write_modes,
    write_run,
    write_sweep,
)
from .recovery import (
    RecoveryResult,
    SimplexResult,
    brute_force_fraction,
    project_simplex,
    recover_fraction,
    recover_simplex,
)

__version__ = "0.1.0"
