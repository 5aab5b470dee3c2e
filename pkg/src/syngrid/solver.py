"""Electrical validation: radial power flow and three-phase fault currents.

The power flow is a backward/forward sweep over the whole radial network
(LV trees, MV tree and transformers form a single tree hanging off the HV
slack bus). Loads are constant P at unity power factor, PV is a negative
active injection, transformers are series impedances derived from their
short-circuit voltage and copper losses.

Per-unit system: 1 MVA base, per-level voltage base equal to vn_kv.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .model import ModelError, Syngrid

S_BASE_MVA = 1.0
SQRT3 = math.sqrt(3.0)


class SingularFaultError(ValueError):
    """A bus has zero Thevenin impedance to the source."""


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    max_mismatch_pu: float
    worst_bus: str | None
    bus_vm_pu: dict[str, float]
    bus_va_deg: dict[str, float]
    line_loading_pct: dict[str, float]
    levels: dict[str, dict[str, float]]   # section tables, paper-style labels
    slack_mw: float
    slack_mvar: float
    total_load_mw: float
    total_gen_mw: float
    total_loss_mw: float
    total_loss_mvar: float


@dataclass
class FaultRow:
    bus: str
    grounding: str
    ik_min_ka: float
    ikss_max_ka: float
    ip_ka: float
    z_pu: float  # Thevenin impedance magnitude to the source, system pu


@dataclass
class FaultReport:
    rows: list[FaultRow] = field(default_factory=list)

    def by_bus(self) -> dict[str, FaultRow]:
        return {r.bus: r for r in self.rows}


def _level_label(vn_kv: float) -> str:
    return f"{vn_kv:.1f} kV"


def _tx_label(hv_kv: float, lv_kv: float) -> str:
    return f"{hv_kv:.1f}/{lv_kv:.1f} kV"


def _radial_structure(grid: Syngrid):
    """BFS order from the slack with one branch (line or transformer) per bus.

    Returns (order, parent, branch_z, branch_ref, buses). Raises
    :class:`ModelError` if the network is not a single radial tree.
    """
    buses = grid.bus_map()
    slack = next(b.id for b in grid.buses if b.role == "hv_slack")

    adjacency: dict[str, list[tuple[str, complex, object]]] = {b.id: [] for b in grid.buses}
    n_branches = 0
    for ln in grid.lines:
        level_kv = buses[ln.from_bus].vn_kv
        z_base = level_kv ** 2 / S_BASE_MVA
        km = ln.length_m / 1000.0
        z = complex(ln.cable.r_ohm_per_km * km, ln.cable.x_ohm_per_km * km) / z_base
        adjacency[ln.from_bus].append((ln.to_bus, z, ln))
        adjacency[ln.to_bus].append((ln.from_bus, z, ln))
        n_branches += 1
    for tx in grid.transformers:
        r = tx.p_cu_percent / 100.0
        vk = tx.v_k_percent / 100.0
        x = math.sqrt(max(0.0, vk * vk - r * r))
        z = complex(r, x) * (S_BASE_MVA / tx.s_r_mva)
        adjacency[tx.hv_bus].append((tx.lv_bus, z, tx))
        adjacency[tx.lv_bus].append((tx.hv_bus, z, tx))
        n_branches += 1

    if n_branches != len(buses) - 1:
        raise ModelError(
            f"network is not radial: {n_branches} branches for {len(buses)} buses")

    order = [slack]
    parent: dict[str, str] = {}
    branch_z: dict[str, complex] = {}
    branch_ref: dict[str, object] = {}
    seen = {slack}
    queue = [slack]
    while queue:
        node = queue.pop(0)
        for nbr, z, ref in adjacency[node]:
            if nbr in seen:
                continue
            seen.add(nbr)
            parent[nbr] = node
            branch_z[nbr] = z
            branch_ref[nbr] = ref
            order.append(nbr)
            queue.append(nbr)
    if len(seen) != len(buses):
        missing = sorted(set(buses) - seen)
        raise ModelError(f"bus {missing[0]} unreachable from the slack")
    return order, parent, branch_z, branch_ref, buses


def power_flow(grid: Syngrid, tolerance: float = 1e-6,
               max_iter: int = 100) -> SolveReport:
    """Backward/forward sweep until the largest voltage update is below
    ``tolerance`` (pu) or ``max_iter`` is hit."""
    order, parent, branch_z, branch_ref, buses = _radial_structure(grid)
    slack = order[0]

    s_inj: dict[str, complex] = {b: 0j for b in buses}
    for ld in grid.loads:
        s_inj[ld.bus] += complex((ld.p_kw - ld.pv_kw) / 1000.0, 0.0)

    v: dict[str, complex] = {b: 1.0 + 0j for b in buses}
    children: dict[str, list[str]] = {b: [] for b in buses}
    for child, par in parent.items():
        children[par].append(child)

    converged = False
    iterations = 0
    mismatch = math.inf
    worst: str | None = None
    i_branch: dict[str, complex] = {b: 0j for b in buses}
    while iterations < max_iter:
        iterations += 1
        # backward: accumulate branch currents from the leaves
        for node in reversed(order):
            i = (s_inj[node] / v[node]).conjugate() if s_inj[node] != 0 else 0j
            for ch in children[node]:
                i += i_branch[ch]
            i_branch[node] = i
        # forward: push voltages from the slack
        mismatch = 0.0
        worst = None
        for node in order[1:]:
            new_v = v[parent[node]] - branch_z[node] * i_branch[node]
            delta = abs(new_v - v[node])
            if delta > mismatch:
                mismatch = delta
                worst = node
            v[node] = new_v
        if mismatch < tolerance:
            converged = True
            break

    # aggregate per-level and per-transformer-group tables
    levels: dict[str, dict[str, float]] = {}

    def section(label: str) -> dict[str, float]:
        return levels.setdefault(label, {
            "load_mw": 0.0, "load_mvar": 0.0, "gen_mw": 0.0, "gen_mvar": 0.0,
            "flow_mw": 0.0, "flow_mvar": 0.0, "loss_mw": 0.0, "loss_mvar": 0.0,
        })

    for b in grid.buses:
        section(_level_label(b.vn_kv))
    for ld in grid.loads:
        sec = section(_level_label(buses[ld.bus].vn_kv))
        sec["load_mw"] += ld.p_kw / 1000.0
        sec["gen_mw"] += ld.pv_kw / 1000.0

    line_loading: dict[str, float] = {}
    for node in order[1:]:
        ref = branch_ref[node]
        ib = i_branch[node]
        s_send = v[parent[node]] * ib.conjugate()
        s_loss = branch_z[node] * abs(ib) ** 2
        if hasattr(ref, "cable"):  # a Line
            vn = buses[node].vn_kv
            label = _level_label(vn)
            i_base_a = S_BASE_MVA * 1e6 / (SQRT3 * vn * 1e3)
            line_loading[ref.id] = abs(ib) * i_base_a / (ref.cable.i_m_ka * 1e3) * 100.0
        else:  # a Transformer
            label = _tx_label(buses[ref.hv_bus].vn_kv, buses[ref.lv_bus].vn_kv)
        sec = section(label)
        sec["flow_mw"] += abs(s_send.real)
        sec["flow_mvar"] += s_send.imag
        sec["loss_mw"] += s_loss.real
        sec["loss_mvar"] += s_loss.imag

    s_slack = v[slack] * i_branch[slack].conjugate()
    return SolveReport(
        converged=converged,
        iterations=iterations,
        max_mismatch_pu=mismatch,
        worst_bus=worst if not converged else None,
        bus_vm_pu={b: abs(v[b]) for b in order},
        bus_va_deg={b: math.degrees(cmath.phase(v[b])) for b in order},
        line_loading_pct=line_loading,
        levels=levels,
        slack_mw=s_slack.real,
        slack_mvar=s_slack.imag,
        total_load_mw=sum(ld.p_kw for ld in grid.loads) / 1000.0,
        total_gen_mw=sum(ld.pv_kw for ld in grid.loads) / 1000.0,
        total_loss_mw=sum(sec["loss_mw"] for sec in levels.values()),
        total_loss_mvar=sum(sec["loss_mvar"] for sec in levels.values()),
    )


def kappa(r_over_x: float) -> float:
    """Peak-current factor 1.02 + 0.98 * exp(-3 R/X)."""
    if math.isinf(r_over_x):
        return 1.02
    return 1.02 + 0.98 * math.exp(-3.0 * r_over_x)


def short_circuit(grid: Syngrid, c_min: float = 0.95, c_max: float = 1.10,
                  hot_r_factor: float = 1.5) -> FaultReport:
    """Three-phase fault currents at every bus except the slack source.

    The Thevenin impedance is the sum of branch impedances along the
    unique path to the slack. The minimum column uses ``c_min`` with
    cable resistance scaled by ``hot_r_factor``; the peak current applies
    the kappa factor to the maximum initial symmetrical current.
    """
    order, parent, branch_z, branch_ref, buses = _radial_structure(grid)
    slack = order[0]

    z_path: dict[str, complex] = {slack: 0j}
    z_hot: dict[str, complex] = {slack: 0j}
    for node in order[1:]:
        z = branch_z[node]
        zh = z
        if hasattr(branch_ref[node], "cable"):
            zh = complex(z.real * hot_r_factor, z.imag)
        z_path[node] = z_path[parent[node]] + z
        z_hot[node] = z_hot[parent[node]] + zh

    rows = []
    for node in order[1:]:
        z = z_path[node]
        if abs(z) == 0.0:
            raise SingularFaultError(f"bus {node} has zero impedance to the source")
        vn = buses[node].vn_kv
        i_base_ka = S_BASE_MVA / (SQRT3 * vn)
        ikss_max = c_max / abs(z) * i_base_ka
        ik_min = c_min / abs(z_hot[node]) * i_base_ka
        rx = z.real / z.imag if z.imag != 0 else math.inf
        ip = kappa(rx) * math.sqrt(2.0) * ikss_max
        rows.append(FaultRow(node, "Direct", ik_min, ikss_max, ip, abs(z)))
    return FaultReport(rows)


# ---------------------------------------------------------------------------
# report rendering


def solve_report_to_dict(report: SolveReport) -> dict:
    return {
        "converged": report.converged,
        "iterations": report.iterations,
        "max_mismatch_pu": report.max_mismatch_pu,
        "worst_bus": report.worst_bus,
        "bus_vm_pu": report.bus_vm_pu,
        "bus_va_deg": report.bus_va_deg,
        "line_loading_pct": report.line_loading_pct,
        "levels": report.levels,
        "slack_mw": report.slack_mw,
        "slack_mvar": report.slack_mvar,
        "total_load_mw": report.total_load_mw,
        "total_gen_mw": report.total_gen_mw,
        "total_loss_mw": report.total_loss_mw,
        "total_loss_mvar": report.total_loss_mvar,
    }


def fault_report_to_dict(report: FaultReport) -> dict:
    return {"rows": [
        {"bus": r.bus, "grounding": r.grounding, "ik_min_ka": r.ik_min_ka,
         "ikss_max_ka": r.ikss_max_ka, "ip_ka": r.ip_ka, "z_pu": r.z_pu}
        for r in report.rows
    ]}


def _fmt_power(mw: float) -> str:
    return f"{mw * 1000:.2f} kW" if abs(mw) < 1.0 else f"{mw:.2f} MW"


def _fmt_reactive(mvar: float) -> str:
    if abs(mvar) < 0.001:
        return f"{mvar * 1e6:.2f} var"
    return f"{mvar * 1000:.2f} kvar" if abs(mvar) < 1.0 else f"{mvar:.2f} Mvar"


def solve_report_to_text(report: SolveReport) -> str:
    """Per-level summary table: Load, Generation, Flow and Losses sections."""
    bus_levels = [lbl for lbl in report.levels if "/" not in lbl]
    tx_levels = [lbl for lbl in report.levels if "/" in lbl]
    lines = [
        f"converged={report.converged} iterations={report.iterations}",
        f"{'Type':<12}{'Voltage level':<18}{'Active power':<16}{'Reactive power':<16}",
    ]

    def rows(kind: str, labels, p_key: str, q_key: str):
        total_p = total_q = 0.0
        for lbl in labels:
            sec = report.levels[lbl]
            lines.append(f"{kind:<12}{lbl:<18}"
                         f"{_fmt_power(sec[p_key]):<16}{_fmt_reactive(sec[q_key]):<16}")
            total_p += sec[p_key]
            total_q += sec[q_key]
        lines.append(f"{kind:<12}{'All levels':<18}"
                     f"{_fmt_power(total_p):<16}{_fmt_reactive(total_q):<16}")

    rows("Load", bus_levels, "load_mw", "load_mvar")
    rows("Generation", bus_levels, "gen_mw", "gen_mvar")
    rows("Flow", tx_levels + bus_levels, "flow_mw", "flow_mvar")
    rows("Losses", tx_levels + bus_levels, "loss_mw", "loss_mvar")
    return "\n".join(lines)


def fault_report_to_text(report: FaultReport, limit: int | None = 10) -> str:
    lines = [f"{'BusID':<24}{'Subgrid grounding':<20}"
             f"{'Minimum current [kA]':<24}{'Maximum peak current [kA]':<26}"]
    rows = report.rows if limit is None else report.rows[:limit]
    for r in rows:
        lines.append(f"{r.bus:<24}{r.grounding:<20}{r.ik_min_ka:<24.3f}{r.ip_ka:<26.3f}")
    if limit is not None and len(report.rows) > limit:
        lines.append(f"... {len(report.rows) - limit} more buses")
    if report.rows:
        lines.append(f"peak current range: {min(r.ip_ka for r in report.rows):.3f} "
                     f"to {max(r.ip_ka for r in report.rows):.3f} kA; "
                     f"minimum current range: {min(r.ik_min_ka for r in report.rows):.3f} "
                     f"to {max(r.ik_min_ka for r in report.rows):.3f} kA")
    return "\n".join(lines)
