import networkx as nx
import pytest

from syngrid.model import CableType
from syngrid.profiles import ANCHORS, CFTable, cf_at, estimate_cf, generate_pool
from syngrid.sizing import (SizingError, aggregate_consumers, default_catalog,
                            drop_pct_per_km, line_current, peak_power,
                            select_cable, select_cable_for_edge,
                            size_transformer, size_tree_cables)

TABLE = CFTable(ANCHORS, (0.8, 0.6, 0.5, 0.42, 0.36, 0.32), 10, 0)


def chain(*lengths):
    g = nx.Graph()
    for i, ln in enumerate(lengths):
        g.add_edge(i, i + 1, length=ln)
    return g


# --- consumer aggregation ---------------------------------------------------


def test_chain_aggregation_single_load():
    g = chain(100.0, 50.0)
    counts = aggregate_consumers(g, 0, {2: 6})
    assert counts == {(0, 1): 6, (1, 2): 6}


def test_y_tree_aggregation():
    g = nx.Graph()
    g.add_edge("root", "j", length=10.0)
    g.add_edge("j", "a", length=5.0)
    g.add_edge("j", "b", length=5.0)
    counts = aggregate_consumers(g, "root", {"a": 2, "b": 3})
    assert counts[("j", "a")] == 2
    assert counts[("j", "b")] == 3
    assert counts[("root", "j")] == 5


def test_root_adjacent_edges_sum_to_total():
    g = nx.Graph()
    for k in range(4):
        g.add_edge("root", f"c{k}", length=1.0)
        g.add_edge(f"c{k}", f"l{k}", length=1.0)
    counts = aggregate_consumers(g, "root", {f"l{k}": k + 1 for k in range(4)})
    root_sum = sum(v for (p, _), v in counts.items() if p == "root")
    assert root_sum == 1 + 2 + 3 + 4


def test_no_loads_aborts_sizing():
    g = chain(100.0)
    counts = aggregate_consumers(g, 0, {})
    assert counts == {(0, 1): 0}
    with pytest.raises(SizingError):
        size_tree_cables(g, 0, {}, 0.4, 1.25, default_catalog(), TABLE, 5.0)


def test_disconnected_load_is_integrity_error():
    g = chain(100.0)
    with pytest.raises(SizingError):
        aggregate_consumers(g, 0, {99: 3})


# --- peak power and current -------------------------------------------------


def test_peak_power_single_consumer():
    assert peak_power(1, 5.0, TABLE) == 5.0


def test_peak_power_direct_evaluation():
    table = CFTable(ANCHORS, (0.9, 0.6, 0.5, 0.4, 0.35, 0.3), 10, 0)
    assert peak_power(4, 5.0, table) == pytest.approx(12.0, abs=1e-12)


def test_peak_power_flat_tail():
    assert peak_power(128, 5.0, TABLE) == pytest.approx(128 * 5.0 * 0.32, abs=1e-9)
    assert cf_at(TABLE, 128) == TABLE.cf_values[-1]


def test_peak_power_rejects_zero():
    with pytest.raises(ValueError):
        peak_power(0, 5.0, TABLE)


def test_line_current_hundred_amp():
    assert line_current(69.282, 0.4) == pytest.approx(100.0, abs=1e-3)


def test_line_current_zero():
    assert line_current(0.0, 0.4) == 0.0


def test_line_current_mv_example():
    assert line_current(1000.0, 16.0) == pytest.approx(36.084, abs=1e-3)


# --- cable selection --------------------------------------------------------


def _catalog(*i_m_a, v_op=0.4):
    return [CableType(f"c{i}", v_op, a / 1000.0, 0.3, 0.08)
            for i, a in enumerate(i_m_a)]


def test_select_cable_smallest_adequate():
    cable = select_cable(100.0, 0.4, 1.25, _catalog(120, 160, 250))
    assert cable.i_m_ka == pytest.approx(0.160)


def test_select_cable_voltage_window_rejection():
    catalog = _catalog(500, v_op=16.0) + _catalog(120)
    cable = select_cable(10.0, 0.4, 1.25, catalog)
    assert cable.v_op_kv == 0.4
    with pytest.raises(SizingError):
        select_cable(10.0, 0.4, 1.25, _catalog(500, v_op=16.0))


def test_select_cable_zero_current_gets_smallest():
    cable = select_cable(0.0, 0.4, 1.25, _catalog(120, 160, 250))
    assert cable.i_m_ka == pytest.approx(0.120)


def test_select_cable_infeasible_names_requirement():
    with pytest.raises(SizingError) as err:
        select_cable(400.0, 0.4, 1.25, _catalog(120, 160))
    assert "500.0 A" in str(err.value)


def test_parallel_fallback_doubles_ampacity():
    cable = select_cable_for_edge(400.0, 0.4, 1.25, _catalog(120, 160))
    assert cable.name == "4x c1"
    assert cable.i_m_ka * 1000.0 >= 1.25 * 400.0
    assert cable.r_ohm_per_km == pytest.approx(0.3 / 4)


def test_drop_limit_forces_upsizing():
    catalog = [CableType("thin", 0.4, 0.150, 0.9, 0.08),
               CableType("thick", 0.4, 0.400, 0.1, 0.08)]
    relaxed = select_cable_for_edge(100.0, 0.4, 1.25, catalog,
                                    max_drop_pct_per_km=None)
    assert relaxed.name == "thin"
    strict = select_cable_for_edge(100.0, 0.4, 1.25, catalog,
                                   max_drop_pct_per_km=10.0)
    assert strict.name == "thick"
    assert drop_pct_per_km(strict, 100.0, 0.4) <= 10.0


# --- transformer sizing -----------------------------------------------------


def test_transformer_at_point_one_mva_exact():
    s_r, v_k, p_cu = size_transformer(80.0, 1.25)  # 80 kW * 1.25 = 0.1 MVA
    assert s_r == 0.1
    assert p_cu == 1.5
    assert v_k == 4.0


def test_transformer_at_one_mva():
    s_r, v_k, p_cu = size_transformer(800.0, 1.25)
    assert s_r == 1.0
    assert p_cu == pytest.approx(1.5 - 0.7 / 3.0, abs=1e-15)
    assert v_k == pytest.approx(4.0 + 8.0 / 3.0, abs=1e-15)


def test_transformer_rating_covers_peak():
    s_r, _, _ = size_transformer(400.0, 1.25)
    assert s_r == 0.5
    assert s_r >= 400.0 / 1000.0


def test_transformer_clamps_small_units(caplog):
    import logging

    with caplog.at_level(logging.WARNING, logger="syngrid.sizing"):
        s_r, v_k, p_cu = size_transformer(6.25, 1.0)  # 0.00625 MVA
    assert v_k == 2.0  # clamped at the lower bound
    assert 0.5 <= p_cu <= 3.0
    assert any("clamped" in rec.message for rec in caplog.records)


def test_transformer_rejects_nonpositive():
    with pytest.raises(ValueError):
        size_transformer(0.0, 1.25)


# --- whole-tree sizing ------------------------------------------------------


def default_pool_table():
    pool = generate_pool(64, 5.0, seed=1)
    return estimate_cf(pool, 5.0, k=50, seed=1)


def test_sized_lines_satisfy_selection_inequalities():
    table = default_pool_table()
    g = nx.Graph()
    g.add_edge("r", "a", length=120.0)
    g.add_edge("a", "b", length=60.0)
    g.add_edge("a", "c", length=80.0)
    node_consumers = {"b": 12, "c": 30}
    catalog = default_catalog()
    cables = size_tree_cables(g, "r", node_consumers, 0.4, 1.25, catalog,
                              table, 5.0)
    counts = aggregate_consumers(g, "r", node_consumers)
    for edge, cable in cables.items():
        n = counts[edge]
        i = line_current(peak_power(n, 5.0, table), 0.4) if n else 0.0
        assert 0.5 * 0.4 <= cable.v_op_kv <= 1.5 * 0.4
        assert cable.i_m_ka * 1000.0 >= 1.25 * i


def test_ampacity_monotone_toward_root():
    # n * CF(n) non-decreasing over the sampled range for the default pool
    table = default_pool_table()
    values = [n * cf_at(table, n) for n in range(1, 10001)]
    for a, b in zip(values, values[1:]):
        assert b >= a - 1e-9


def test_default_catalog_loads():
    catalog = default_catalog()
    assert len(catalog) == 7
    assert {c.v_op_kv for c in catalog} == {0.4, 16.0}
