import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gridgen import boundary_lonlat, osm_xml, rect, town_osm  # noqa: E402

from syngrid.geodata import parse_osm  # noqa: E402
from syngrid.pipeline import GenerationParams, generate  # noqa: E402
from gridgen import CRS  # noqa: E402


@pytest.fixture(scope="session")
def town_grid():
    """Town-scale generated grid shared by solver/scale/CLI tests."""
    xml, boundary = town_osm()
    params = GenerationParams(boundary=boundary, crs_code=CRS, radius_m=260.0,
                              seed=7)
    dataset = parse_osm(xml, boundary, CRS)
    grid, report = generate(params, dataset)
    return grid, report, params, xml, boundary


@pytest.fixture()
def small_village():
    """Tiny deterministic map: 4 roads, 6 buildings, one boundary."""
    roads = [
        [(0.0, 0.0), (400.0, 0.0)],
        [(0.0, 200.0), (400.0, 200.0)],
        [(100.0, -50.0), (100.0, 250.0)],
        [(300.0, -50.0), (300.0, 250.0)],
    ]
    buildings = [
        rect(60.0, 30.0, 12.0, 10.0),
        rect(160.0, 35.0, 20.0, 15.0),
        rect(260.0, 28.0, 10.0, 10.0),
        rect(80.0, 170.0, 14.0, 12.0),
        rect(220.0, 168.0, 16.0, 10.0),
        rect(340.0, 172.0, 10.0, 14.0),
    ]
    xml = osm_xml(roads, buildings)
    boundary = boundary_lonlat(-80.0, -120.0, 480.0, 320.0)
    return xml, boundary
