"""Hidden-level sample spaces and the per-unit functions ln phi_s and psi_s.

A hidden unit with level count ``s`` takes the ``s + 1`` evenly spaced values
of [-1, +1]; ``s = INF`` is the continuous interval.  ``phi_s(x)`` is the
level-averaged partition factor ``(2 / (s + 1)) * sum_h exp(x h)`` and
``psi_s = d/dx ln phi_s`` is the conditional mean of the unit given field x.

All functions accept scalars or numpy arrays and broadcast.
"""
import math

import numpy as np
from scipy.special import bernoulli

INF = math.inf

LN2 = math.log(2.0)

# below this argument the closed forms cancel; power series are used instead
SERIES_WINDOW = 0.5


def check_levels(s):
    """Validate a level count and return it as ``int`` or ``INF``."""
    if isinstance(s, str):
        return parse_levels(s)
    if s == INF:
        return INF
    if isinstance(s, (bool, np.bool_)) or int(s) != s or s < 1:
        raise ValueError(f"level count must be a positive integer or inf, got {s!r}")
    return int(s)


def parse_levels(text):
    """Parse ``"inf"`` / ``"3"`` style level tokens."""
    t = str(text).strip().lower()
    if t in ("inf", "infinity", "∞"):
        return INF
    try:
        value = int(t)
    except ValueError:
        raise ValueError(f"bad level token {text!r}") from None
    return check_levels(value)


def format_levels(s):
    return "inf" if s == INF else str(int(s))


def sample_space(s):
    """The ordered levels ``(2k - s) / s`` for ``k = 0..s``."""
    s = check_levels(s)
    if s == INF:
        raise ValueError("continuous space has no finite enumeration")
    return (2.0 * np.arange(s + 1) - s) / s


def _check_finite(x):
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("log_phi/psi require finite arguments")
    return x


def log_sinh(a):
    """ln sinh(a) for a > 0 without overflow."""
    a = np.asarray(a, dtype=np.float64)
    return a - LN2 + np.log(-np.expm1(-2.0 * a))


# sinh(y)/y - 1 = sum_k y^2k / (2k+1)!
_SINHC_COEF = np.array([1.0 / math.factorial(2 * k + 1) for k in range(1, 10)])
# coth(y) - 1/y = sum_n 2^2n B_2n y^(2n-1) / (2n)!
_LANGEVIN_COEF = np.array([2.0 ** (2 * n) * float(bernoulli(2 * n)[-1]) / math.factorial(2 * n)
                           for n in range(1, 14)])


def _horner(coef, z):
    """sum_n coef[n] z^n."""
    out = np.zeros_like(z)
    for c in coef[::-1]:
        out = out * z + c
    return out


def _log_sinhc(y):
    """ln(sinh(y) / y) for y >= 0, accurate to a few ulp everywhere."""
    small = y < SERIES_WINDOW
    y_big = np.where(small, 1.0, y)
    big = log_sinh(y_big) - np.log(y_big)
    return np.where(small, np.log1p(y * y * _horner(_SINHC_COEF, y * y)), big)


def _coth_m1(y):
    """coth(y) - 1 for y > 0."""
    with np.errstate(over="ignore"):
        return 2.0 / np.expm1(2.0 * y)


def _langevin(y):
    """coth(y) - 1/y, odd, without cancellation near 0."""
    a = np.abs(y)
    small = a < SERIES_WINDOW
    a_big = np.where(small, 1.0, a)
    big = np.sign(y) * (1.0 + _coth_m1(a_big) - 1.0 / a_big)
    return np.where(small, y * _horner(_LANGEVIN_COEF, y * y), big)


def _unwrap(x, out):
    return float(out) if np.ndim(x) == 0 else out


def log_phi(s, x):
    """ln phi_s(x); even in x, equal to ln 2 at x = 0."""
    s = check_levels(s)
    a = np.abs(_check_finite(x))
    if s == INF:
        out = LN2 + _log_sinhc(a)
    else:
        # the 1/(s+1) prefactor cancels exactly against sinh(y)/y normalization
        out = LN2 + _log_sinhc(a * ((s + 1.0) / s)) - _log_sinhc(a / s)
    return _unwrap(x, out)


def psi(s, x):
    """d/dx ln phi_s(x): odd, increasing, bounded by 1 in magnitude."""
    s = check_levels(s)
    x = _check_finite(x)
    if s == INF:
        return _unwrap(x, _langevin(x))
    r = (s + 1.0) / s
    a = np.abs(x)
    # the 1/x parts of the two Langevin terms cancel exactly
    near = ((s + 1.0) / s) * _langevin(a * r) - _langevin(a / s) / s
    # written as 1 - (positive terms) so saturation never overshoots 1
    b = np.where(a / s < SERIES_WINDOW, SERIES_WINDOW, a / s)
    far = 1.0 + r * _coth_m1(b * (s + 1.0)) - _coth_m1(b) / s
    out = np.sign(x) * np.where(a / s < SERIES_WINDOW, near, far)
    return _unwrap(x, out)
