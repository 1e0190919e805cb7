import math

from adaptsgd.core.errors import DomainError

# Lanczos approximation, g = 7, nine coefficients.
LANCZOS_G = 7
LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_TWO_PI = math.sqrt(2.0 * math.pi)
# Γ(x) exceeds the largest double past this argument
GAMMA_OVERFLOW_X = 171.7


def gamma(x: float) -> float:
    """Γ(x) for x > 0 via the Lanczos approximation.

    Arguments below 0.5 are shifted up with Γ(x) = Γ(x + 1) / x. Values past the double
    range are returned as inf.
    """
    if not x > 0:
        raise DomainError(f"gamma is only defined here for x > 0, got {x}")
    if x < 0.5:
        return gamma(x + 1.0) / x
    if x > GAMMA_OVERFLOW_X:
        return math.inf

    z = x - 1.0
    series = LANCZOS_COEFFICIENTS[0]
    for i, coefficient in enumerate(LANCZOS_COEFFICIENTS[1:], start=1):
        series += coefficient / (z + i)
    t = z + LANCZOS_G + 0.5
    half_power = t ** ((z + 0.5) / 2.0)
    return _SQRT_TWO_PI * half_power * (half_power * math.exp(-t)) * series
