"""Transverse-Mercator projection for UTM-family EPSG codes (WGS84).

Implements the 6th-order Krueger series, accurate to well under a
millimeter inside a UTM zone. Only EPSG 326xx / 327xx codes are
accepted; anything else raises ``UnsupportedCrsError``.
"""

from __future__ import annotations

import math

from .geometry import GeoPoint

# WGS84
_A = 6378137.0
_F = 1.0 / 298.257223563
_K0 = 0.9996
_FALSE_EASTING = 500000.0
_FALSE_NORTHING_SOUTH = 10000000.0

_N = _F / (2.0 - _F)
_N2 = _N * _N
_N3 = _N2 * _N
_N4 = _N3 * _N
_N5 = _N4 * _N
_N6 = _N5 * _N

# rectifying radius
_AR = _A / (1.0 + _N) * (1.0 + _N2 / 4.0 + _N4 / 64.0 + _N6 / 256.0)

_ALPHA = (
    _N / 2.0 - 2.0 * _N2 / 3.0 + 5.0 * _N3 / 16.0 + 41.0 * _N4 / 180.0
    - 127.0 * _N5 / 288.0 + 7891.0 * _N6 / 37800.0,
    13.0 * _N2 / 48.0 - 3.0 * _N3 / 5.0 + 557.0 * _N4 / 1440.0
    + 281.0 * _N5 / 630.0 - 1983433.0 * _N6 / 1935360.0,
    61.0 * _N3 / 240.0 - 103.0 * _N4 / 140.0 + 15061.0 * _N5 / 26880.0
    + 167603.0 * _N6 / 181440.0,
    49561.0 * _N4 / 161280.0 - 179.0 * _N5 / 168.0 + 6601661.0 * _N6 / 7257600.0,
    34729.0 * _N5 / 80640.0 - 3418889.0 * _N6 / 1995840.0,
    212378941.0 * _N6 / 319334400.0,
)

_BETA = (
    _N / 2.0 - 2.0 * _N2 / 3.0 + 37.0 * _N3 / 96.0 - _N4 / 360.0
    - 81.0 * _N5 / 512.0 + 96199.0 * _N6 / 604800.0,
    _N2 / 48.0 + _N3 / 15.0 - 437.0 * _N4 / 1440.0 + 46.0 * _N5 / 105.0
    - 1118711.0 * _N6 / 3870720.0,
    17.0 * _N3 / 480.0 - 37.0 * _N4 / 840.0 - 209.0 * _N5 / 4480.0
    + 5569.0 * _N6 / 90720.0,
    4397.0 * _N4 / 161280.0 - 11.0 * _N5 / 504.0 - 830251.0 * _N6 / 7257600.0,
    4583.0 * _N5 / 161280.0 - 108847.0 * _N6 / 3991680.0,
    20648693.0 * _N6 / 638668800.0,
)

_DELTA = (
    2.0 * _N - 2.0 * _N2 / 3.0 - 2.0 * _N3 + 116.0 * _N4 / 45.0
    + 26.0 * _N5 / 45.0 - 2854.0 * _N6 / 675.0,
    7.0 * _N2 / 3.0 - 8.0 * _N3 / 5.0 - 227.0 * _N4 / 45.0
    + 2704.0 * _N5 / 315.0 + 2323.0 * _N6 / 945.0,
    56.0 * _N3 / 15.0 - 136.0 * _N4 / 35.0 - 1262.0 * _N5 / 105.0
    + 73814.0 * _N6 / 2835.0,
    4279.0 * _N4 / 630.0 - 332.0 * _N5 / 35.0 - 399572.0 * _N6 / 14175.0,
    4174.0 * _N5 / 315.0 - 144838.0 * _N6 / 6237.0,
    601676.0 * _N6 / 22275.0,
)

# atanh(e sin phi) factor for the conformal latitude
_E2SQRTN = 2.0 * math.sqrt(_N) / (1.0 + _N)

# how far outside the nominal 6-degree zone we still project; UTM overlap
# between neighbouring zones is routinely used in practice
_MAX_DLON_DEG = 6.0
_MAX_LAT_DEG = 84.0


class UnsupportedCrsError(ValueError):
    """EPSG code outside the UTM transverse-Mercator family."""


class OutOfZoneError(ValueError):
    """Coordinates outside the validity region of the requested zone."""


def utm_zone(crs_code: int) -> tuple[int, bool]:
    """Zone number and north-hemisphere flag for a UTM EPSG code."""
    if 32601 <= crs_code <= 32660:
        return crs_code - 32600, True
    if 32701 <= crs_code <= 32760:
        return crs_code - 32700, False
    raise UnsupportedCrsError(
        f"EPSG:{crs_code} is not a supported UTM code (32601-32660, 32701-32760)")


def central_meridian(zone: int) -> float:
    return -183.0 + 6.0 * zone


def project(lon: float, lat: float, crs_code: int) -> GeoPoint:
    """Forward transverse-Mercator projection of a lon/lat pair (degrees)."""
    zone, north = utm_zone(crs_code)
    if not (-180.0 <= lon <= 180.0) or not (-90.0 <= lat <= 90.0):
        raise OutOfZoneError(f"({lon}, {lat}) is not a valid lon/lat pair")
    lon0 = central_meridian(zone)
    dlon = lon - lon0
    if abs(dlon) > _MAX_DLON_DEG or abs(lat) > _MAX_LAT_DEG:
        raise OutOfZoneError(
            f"({lon}, {lat}) lies outside the validity region of EPSG:{crs_code}")

    phi = math.radians(lat)
    lam = math.radians(dlon)

    t = math.sinh(math.atanh(math.sin(phi))
                  - _E2SQRTN * math.atanh(_E2SQRTN * math.sin(phi)))
    xi_p = math.atan2(t, math.cos(lam))
    eta_p = math.asinh(math.sin(lam) / math.hypot(t, math.cos(lam)))

    xi = xi_p
    eta = eta_p
    for j, a in enumerate(_ALPHA, start=1):
        xi += a * math.sin(2 * j * xi_p) * math.cosh(2 * j * eta_p)
        eta += a * math.cos(2 * j * xi_p) * math.sinh(2 * j * eta_p)

    x = _FALSE_EASTING + _K0 * _AR * eta
    y = _K0 * _AR * xi
    if not north:
        y += _FALSE_NORTHING_SOUTH
    return GeoPoint(x, y)


def unproject(x: float, y: float, crs_code: int) -> tuple[float, float]:
    """Inverse projection back to (lon, lat) in degrees."""
    zone, north = utm_zone(crs_code)
    if not north:
        y -= _FALSE_NORTHING_SOUTH

    xi = y / (_K0 * _AR)
    eta = (x - _FALSE_EASTING) / (_K0 * _AR)

    xi_p = xi
    eta_p = eta
    for j, b in enumerate(_BETA, start=1):
        xi_p -= b * math.sin(2 * j * xi) * math.cosh(2 * j * eta)
        eta_p -= b * math.cos(2 * j * xi) * math.sinh(2 * j * eta)

    chi = math.asin(math.sin(xi_p) / math.cosh(eta_p))
    phi = chi
    for j, d in enumerate(_DELTA, start=1):
        phi += d * math.sin(2 * j * chi)

    lam = math.atan2(math.sinh(eta_p), math.cos(xi_p))
    return central_meridian(zone) + math.degrees(lam), math.degrees(phi)
