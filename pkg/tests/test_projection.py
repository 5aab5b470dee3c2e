import numpy as np
import pytest

from oracles import snyder_utm
from syngrid.projection import (OutOfZoneError, UnsupportedCrsError,
                                central_meridian, project, unproject, utm_zone)


def test_zone_decoding():
    assert utm_zone(32632) == (32, True)
    assert utm_zone(32733) == (33, False)
    assert central_meridian(32) == 9.0


def test_unsupported_crs():
    with pytest.raises(UnsupportedCrsError):
        utm_zone(4326)
    with pytest.raises(UnsupportedCrsError):
        project(8.0, 47.0, 2056)


def test_central_meridian_equator_maps_to_offsets():
    p = project(9.0, 0.0, 32632)
    assert p.x == pytest.approx(500000.0, abs=1e-6)
    assert p.y == pytest.approx(0.0, abs=1e-6)


def test_south_hemisphere_false_northing():
    p = project(9.0, 0.0, 32732)
    assert p.x == pytest.approx(500000.0, abs=1e-6)
    assert p.y == pytest.approx(10000000.0, abs=1e-6)


def test_against_independent_series_bern():
    x, y = project(7.44, 46.95, 32632)
    ox, oy = snyder_utm(7.44, 46.95, 32)
    assert x == pytest.approx(ox, abs=5e-3)
    assert y == pytest.approx(oy, abs=5e-3)


@pytest.mark.parametrize("lon,lat,zone_code", [
    (9.0, 45.0, 32632), (11.9, 52.3, 32632), (6.1, 46.2, 32632),
    (13.4, 52.5, 32633), (18.4, -33.9, 32734),
])
def test_against_independent_series_sample(lon, lat, zone_code):
    zone, north = utm_zone(zone_code)
    x, y = project(lon, lat, zone_code)
    ox, oy = snyder_utm(lon, lat, zone, north)
    assert x == pytest.approx(ox, abs=5e-3)
    assert y == pytest.approx(oy, abs=5e-3)


def test_round_trip_thousand_random_points():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(1000):
        lon = 9.0 + rng.uniform(-3.0, 3.0)
        lat = rng.uniform(-80.0, 84.0)
        p = project(lon, lat, 32632)
        lon2, lat2 = unproject(p.x, p.y, 32632)
        worst = max(worst, abs(lon2 - lon), abs(lat2 - lat))
    assert worst < 1e-7


def test_out_of_zone_rejected():
    with pytest.raises(OutOfZoneError):
        project(30.0, 47.0, 32632)  # 21 degrees from the central meridian
    with pytest.raises(OutOfZoneError):
        project(9.0, 89.0, 32632)   # beyond the UTM latitude band


def test_deterministic():
    assert project(8.2, 47.1, 32632) == project(8.2, 47.1, 32632)
