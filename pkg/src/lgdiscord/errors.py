"""Exception types shared across the package."""


class LgDiscordError(Exception):
    """Base class for all errors raised by this package."""


class NonPhysical(LgDiscordError):
    """Spectrum or correlation vector lies outside the physical state set."""


class DegenerateProbability(LgDiscordError):
    """Every candidate measurement direction produced a vanishing outcome probability."""


class GridTooCoarse(LgDiscordError):
    """Sampled mode norm deviates from 1 beyond the discretization tolerance."""


class GridMismatch(LgDiscordError):
    """Operands were sampled on different grids."""


class EmptyTermList(LgDiscordError):
    """A superposition was requested with no terms."""


class ZeroPower(LgDiscordError):
    """Both interferometer arms have zero intensity."""


class EmptyImage(LgDiscordError):
    """A captured image has zero total counts and cannot be normalized."""


class DegenerateBasis(LgDiscordError):
    """Basis intensity maps are indistinguishable; mixture weights are unidentifiable."""


class ConfigError(LgDiscordError):
    """Experiment configuration is malformed or inconsistent."""
