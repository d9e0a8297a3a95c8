"""Polarimetric SAR analysis driven by stochastic distances.

Estimates polarization orientation angles by maximising the Hellinger
distance between rotated and un-rotated coherency-matrix channels, and uses
the maximum relative distance to redistribute four-component scattering
powers. Ships with a Wishart scene simulator and a band-file raster
pipeline.
"""

from .core import (
    Basis,
    CoherencyMatrix,
    ScatteringVector,
    multilook,
    pauli_from_lexicographic,
    rotate_coherency,
    rotated_diagonal,
    wishart_log_density,
    wishart_sample,
)
from .divergence import (
    DistanceFamily,
    DistanceValue,
    HELLINGER_SPEC,
    HPhiSpec,
    KL_SPEC,
    gamma_bhattacharyya_coefficient,
    hellinger_gamma,
    hellinger_wishart,
    hphi_distance_numeric,
    hphi_divergence_numeric,
    kl_gamma,
)
from .orientation import (
    OaCurves,
    OaEstimate,
    SearchConfig,
    lee_oa,
    oa_curves,
    sd_oa,
    t33_min_angle,
    wrap_oa,
)
from .powers import (
    ModulationParams,
    PowerComponents,
    alpha_beta_map,
    delta_h_max,
    negative_power_stats,
    relative_distance_max,
    sdy4o_decompose,
    sdy4o_modify,
    y4o_decompose,
    y4r_decompose,
)
from .scene import (
    GroundTruth,
    Region,
    SceneSpec,
    builtin_archetypes,
    deorient,
    generate_scene,
    pixel_rng,
)
from .raster import (
    PowerRaster,
    RoiStats,
    T3Raster,
    decompose_raster,
    oa_raster,
    read_power,
    read_t3,
    rgb_compose,
    roi_stats,
    write_power,
    write_rgb_png,
    write_t3,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
