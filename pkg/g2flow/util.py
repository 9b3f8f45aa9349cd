"""Utility functions.
"""
import logging
import platform
import sys
from fractions import Fraction

import numpy as np

from g2flow.version import get_active_version


class G2FlowError(Exception):
    """Base class of every error raised by the g2flow library"""
    def __init__(self, message):
        self.message = message
        super().__init__(self.message)


def fromStr(valstr):
    """Try to parse as int, fraction, float or bool (and fallback to a string as last resort)

    Returns: an int, float, bool or str

    Args:
        valstr (string): A user provided string such as "3", "1/8", "0.25" or "true"
    """
    if valstr.lower() in {"t", "true", "yes"}:
        val = True
    elif valstr.lower() in {"f", "false", "no"}:
        val = False
    else:
        try:
            val = int(valstr)
        except ValueError:
            try:
                val = float(valstr)
            except ValueError:
                try:
                    val = float(Fraction(valstr))
                except (ValueError, ZeroDivisionError):
                    val = valstr  # Not a number, assume string
    return val


def stripnl(s):
    """Remove newlines from a string (and remove extra whitespace)"""
    s = str(s).replace("\n", " ")
    return " ".join(s.split())


def catchAndIgnore(reason, closure):
    """Call a closure but if it throws an exception log it and continue"""
    try:
        closure()
    except BaseException as ex:
        logging.error(f"Exception thrown in {reason}: {ex}")


def our_exit(message, return_value=1):
    """Print the message on the error stream and exit with return_value.
    return_value defaults to 1 (non-successful)
    """
    if message:
        print(message, file=sys.stderr)
    sys.exit(return_value)


def support_info():
    """Print out info that helps troubleshooting of the cli."""
    print("")
    print("When reporting a numerical issue with g2flow, include the following info:")
    print(f" System: {platform.system()}")
    print(f"   Platform: {platform.platform()}")
    print(f"   Machine: {platform.uname().machine}")
    print(f" g2flow: v{get_active_version()}")
    print(f" numpy: v{np.__version__}")
    print(f" Executable: {sys.argv[0]}")
    print(
        f" Python: {platform.python_version()} {platform.python_implementation()} {platform.python_compiler()}"
    )
    print("")
    print("Please also attach the config file and the output of: g2flow --selftest")


def camel_to_snake(a_string):
    """convert camelCase to snake_case"""
    return "".join(["_" + i.lower() if i.isupper() else i for i in a_string]).lstrip(
        "_"
    )


def normalize_keys(adict):
    """Return a copy of a (nested) dictionary with every key converted to snake_case"""
    result = {}
    for key, val in adict.items():
        newKey = camel_to_snake(key) if isinstance(key, str) else key
        result[newKey] = normalize_keys(val) if isinstance(val, dict) else val
    return result


def format_number(x):
    """Format a real with 17 significant digits (enough to round-trip a double)"""
    return f"{float(x):.17g}"


def max_abs(x):
    """Largest absolute entry of an array (0 for an empty one)"""
    arr = np.asarray(x, dtype=float)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(arr)))


def rk4_step(field, y, h):
    """One classical Runge-Kutta step of y' = field(y) for a flat numpy state vector"""
    k1 = field(y)
    k2 = field(y + 0.5 * h * k1)
    k3 = field(y + 0.5 * h * k2)
    k4 = field(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
