from configs import PROFILE, Config
from errors import ConfigError

from .four_line_profile import FourLineProfile
from .n_line_profile import NLineProfile
from .profile_abc import WeightProfile

PROFILES = (FourLineProfile, NLineProfile)


def profile_for(cfg: Config) -> WeightProfile:
    for profile in PROFILES:
        if profile.name == cfg[PROFILE]:
            return profile.from_config(cfg)
    raise ConfigError(f'Weight profile "{cfg[PROFILE]}" not found.')
