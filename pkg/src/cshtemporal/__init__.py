"""Pseudospectral Chern-Simons-Higgs dynamics in temporal gauge on the 2-torus,
with an exact checker for wave-Sobolev exponent bookkeeping."""

from .config import ConfigError, RunConfig
from .data import gen_lowreg_data, neutralize_charge
from .dynamics import (
    DIRECT,
    GROUP_FACTOR,
    GROUP_PRODUCT,
    REFORMULATED,
    CshState,
    DirectState,
    Potential,
    adf_tendency,
    energy,
    gauss_residual,
    total_charge,
)
from .estimates import (
    REGISTRY,
    ExponentTuple,
    ExtScalar,
    afs_check,
    angle_bound_sample,
    ext_compare,
    verify_claim_registry,
    xsb_norm_discrete,
)
from .integrator import (
    InitialData,
    NonFiniteStateError,
    Stepper,
    StepperConfig,
    Trajectory,
    convergence_study,
    evolve,
    init,
    simulate,
    step,
)
from .spectral import Grid, SpectralField, dealiased_product, helmholtz_split, sobolev_norm

__version__ = "0.1.0"
