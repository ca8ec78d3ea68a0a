"""Metrics over simulation event logs.

A verified reception of an original packet is either a direct
verification (hop 1) or an indirect acceptance (1 + the smallest
contributing confirmation depth at acceptance time). Reachability is
verified receptions over original packets sent; relative reachability
normalizes within a load level by the best graph at that load.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

from .sim import EventLog


@dataclass
class MetricsReport:
    graph: str
    load: int
    packets_sent: int
    verified_receptions: int
    indirect_receptions: int
    mean_processing_delay_ms: float
    mean_network_delay_ms: float
    mean_verification_wall_ms: float
    mean_hops: float
    reachability: float
    relative_reachability: float | None
    hop_histogram: dict[int, int]
    delay_by_hop_ms: dict[int, float]
    deep_acceptance_fraction: float
    counters: dict[str, int] = field(default_factory=dict)

    CSV_FIELDS = ("graph", "load", "mu_t_ms", "mu_tn_ms", "mu_h", "R", "R_pct")

    def csv_row(self) -> tuple[str, ...]:
        r_pct = "" if self.relative_reachability is None \
            else f"{self.relative_reachability:.1f}"
        return (self.graph, str(self.load),
                f"{self.mean_processing_delay_ms:.3f}",
                f"{self.mean_network_delay_ms:.3f}",
                f"{self.mean_hops:.4f}",
                f"{self.reachability:.4f}",
                r_pct)


def compute_metrics(log: EventLog, graph: str | None = None,
                    load: int | None = None) -> MetricsReport:
    graph = graph if graph is not None else log.header.get("graph", "?")
    load = load if load is not None else int(log.header.get("packets_per_node", 0))

    creation: dict[tuple[int, int], float] = {}
    deliver_time: dict[tuple[int, int, int], float] = {}
    receptions: list[tuple[float, float, int, int | None]] = []
    # (processing delay, network delay, hops, max contributing depth)
    for rec in log.records:
        if rec.kind == "SENT":
            creation[(rec.node, int(rec.fields[0]))] = rec.time_ms
        elif rec.kind == "NET_DELIVER":
            key = (rec.node, int(rec.fields[0]), int(rec.fields[1]))
            deliver_time.setdefault(key, rec.time_ms)
        elif rec.kind == "DIRECT_VERIFIED":
            origin = (int(rec.fields[0]), int(rec.fields[1]))
            created = creation[origin]
            net = deliver_time.get((rec.node,) + origin, rec.time_ms) - created
            receptions.append((rec.time_ms - created, net, 1, None))
        elif rec.kind == "INDIRECT_ACCEPTED":
            origin = (int(rec.fields[0]), int(rec.fields[1]))
            created = creation[origin]
            delivered = deliver_time.get((rec.node,) + origin)
            net = (delivered - created) if delivered is not None \
                else rec.time_ms - created
            receptions.append((rec.time_ms - created, net,
                               int(rec.fields[5]), int(rec.fields[6])))

    sent = len(creation)
    count = len(receptions)
    indirect = [r for r in receptions if r[3] is not None]
    hop_hist: dict[int, int] = {}
    delay_sum: dict[int, float] = {}
    for proc, _net, hops, _maxd in receptions:
        hop_hist[hops] = hop_hist.get(hops, 0) + 1
        delay_sum[hops] = delay_sum.get(hops, 0.0) + proc
    deep = sum(1 for r in indirect if r[3] > 3)

    return MetricsReport(
        graph=graph,
        load=load,
        packets_sent=sent,
        verified_receptions=count,
        indirect_receptions=len(indirect),
        mean_processing_delay_ms=(
            sum(r[0] for r in receptions) / count if count else 0.0),
        mean_network_delay_ms=(
            sum(r[1] for r in receptions) / count if count else 0.0),
        mean_verification_wall_ms=log.mean_verify_wall_ms,
        mean_hops=(sum(r[2] for r in receptions) / count if count else 0.0),
        reachability=(count / sent if sent else 0.0),
        relative_reachability=None,
        hop_histogram=dict(sorted(hop_hist.items())),
        delay_by_hop_ms={h: delay_sum[h] / hop_hist[h]
                         for h in sorted(hop_hist)},
        deep_acceptance_fraction=(deep / len(indirect) if indirect else 0.0),
        counters=dict(log.counters),
    )


def hop_histogram(log: EventLog) -> dict[int, int]:
    return compute_metrics(log).hop_histogram


def normalize_relative_reachability(reports: list[MetricsReport]) -> None:
    """Fill R% in place: each load level is normalized by its best graph."""
    by_load: dict[int, float] = {}
    for r in reports:
        by_load[r.load] = max(by_load.get(r.load, 0.0), r.reachability)
    for r in reports:
        best = by_load[r.load]
        r.relative_reachability = 100.0 * r.reachability / best if best else 0.0


def write_csv(reports: list[MetricsReport], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MetricsReport.CSV_FIELDS)
        for r in reports:
            writer.writerow(r.csv_row())


def format_table(reports: list[MetricsReport]) -> str:
    headers = ("graph", "load", "mu_t(ms)", "mu_tN(ms)", "mu_tV(ms)",
               "mu_H", "R", "R%")
    rows = [headers]
    for r in reports:
        rows.append((
            r.graph, str(r.load),
            f"{r.mean_processing_delay_ms:.2f}",
            f"{r.mean_network_delay_ms:.2f}",
            f"{r.mean_verification_wall_ms:.3f}",
            f"{r.mean_hops:.2f}",
            f"{r.reachability:.2f}",
            "-" if r.relative_reachability is None
            else f"{r.relative_reachability:.0f}%"))
    widths = [max(len(row[i]) for row in rows) for i in range(len(headers))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
             for row in rows]
    return "\n".join(lines)
