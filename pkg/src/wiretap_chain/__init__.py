"""Key-chaining wiretap protocol: rates, simulation and exact leakage audit."""

from .channel import ChannelModel, CascadeSpec, bsc, bsc_cascade, from_cascade, from_transition, load_channel
from .infotheory import (
    GaussianWiretapParams,
    InputDistribution,
    RateProfile,
    conditional_mi,
    gaussian_rates,
    mutual_information,
    rate_profile,
)

__all__ = [
    "CascadeSpec",
    "ChannelModel",
    "GaussianWiretapParams",
    "InputDistribution",
    "RateProfile",
    "bsc",
    "bsc_cascade",
    "conditional_mi",
    "from_cascade",
    "from_transition",
    "gaussian_rates",
    "load_channel",
    "mutual_information",
    "rate_profile",
]
