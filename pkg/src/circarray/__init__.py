"""Uniform circular array synthesis: phase-mode excitations, far fields, OAM analysis
and planar near-field transformation."""

from .element import (
    AnalyticPatch,
    CosPower,
    Isotropic,
    Tabulated,
    analytic_patch,
    eval_element,
    fit_cos_power,
    import_tabulated,
    read_tabulated_csv,
    write_tabulated_csv,
)
from .errors import (
    ConfigError,
    FormatError,
    InvalidArgumentError,
    SingularityError,
    SingularRingError,
    UndefinedBeamwidthError,
)
from .excitation import (
    CAST_PRESETS,
    ExcitationVector,
    ModeMixSpec,
    Normalization,
    cast_preset,
    inner_product,
    mix_modes,
    mode_weights,
    oam_weights,
    preset_weights,
)
from .farfield import (
    Cut,
    DirectionGrid,
    FarFieldPattern,
    array_factor,
    azimuth_cut,
    directivity,
    elevation_cut,
    evaluate_field,
    find_lobes,
    hpbw,
    rotate_pattern,
    synthesize_pattern,
)
from .geometry import ArrayGeometry, default_geometry, element_frame
from .nearfield import (
    NearFieldScan,
    PlaneSpec,
    near_field_at,
    nf2ff,
    normalized_error,
    read_scan,
    synthesize_near_field,
    write_scan,
)
from .oam import (
    OamSpectrum,
    RingSamples,
    array_ring,
    azimuthal_spectrum,
    best_fit_phase,
    crosstalk_matrix,
    ring_samples,
    winding_number,
)

__version__ = "0.1.0"
