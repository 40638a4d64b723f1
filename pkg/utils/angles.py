"""
Angle parsing and formatting for wavenumbers and phases

Accepted forms: plain numbers ("0.7853981633974483", "1e-3"), multiples of pi
("pi", "-pi", "0.25pi", "3pi/2", "pi/3", "2*pi/3").
"""

import math
import re

from modules.core.errors import InvalidSpec

ANGLE_UNITS = ("rad", "pi")

_PI_PATTERN = re.compile(
    r"^(?P<coef>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[+-]?)\s*\*?\s*pi"
    r"(?:\s*/\s*(?P<den>\d+(?:\.\d*)?))?$"
)


def parse_angle(text, unit: str = "rad") -> float:
    """
    Parse an angle given as text or number

    Args:
        text: Angle text or a number
        unit: "rad" or "pi"; with "pi" a plain number is a multiple of pi

    Returns:
        Angle in radians
    """
    if unit not in ANGLE_UNITS:
        raise InvalidSpec(f"angle unit must be one of {ANGLE_UNITS}, got {unit!r}")
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        value = float(text)
        return value * math.pi if unit == "pi" else value

    raw = str(text).strip().lower().replace("π", "pi")
    match = _PI_PATTERN.match(raw)
    if match:
        coef = match.group("coef")
        if coef in ("", "+"):
            value = math.pi
        elif coef == "-":
            value = -math.pi
        else:
            value = float(coef) * math.pi
        if match.group("den"):
            denominator = float(match.group("den"))
            if denominator == 0:
                raise InvalidSpec(f"angle {text!r} divides by zero")
            value /= denominator
        return value

    try:
        value = float(raw)
    except ValueError:
        raise InvalidSpec(f"cannot parse angle {text!r} (try 0.25pi, pi/3 or radians)")
    if not math.isfinite(value):
        raise InvalidSpec(f"angle must be finite, got {text!r}")
    return value * math.pi if unit == "pi" else value


def format_angle(value: float) -> str:
    """Shortest text that parses back to exactly `value`"""
    ratio = value / math.pi
    candidate = f"{ratio!r}pi"
    if parse_angle(candidate) == value:
        return candidate
    return repr(float(value))


def display_angle(value: float, decimals: int = 6) -> str:
    """Fixed-precision multiple of pi for reports, e.g. 0.166667pi"""
    return f"{value / math.pi:.{decimals}f}pi"
