"""Run reports: JSON for machines, aligned columns for humans.

A report embeds the full configuration echo (timing parameters, cluster
shape, seed) so every number in any emitted table can be reproduced from
the report alone.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .cluster import ClusterConfig, RunResult


@dataclass
class SimReport:
    kernel: str
    variant: str
    per_core: list[dict]
    cycles: int
    instr_fetched: int
    useful_ops: int
    utilization: float
    tcdm: dict
    config: dict
    seed: int
    verified: bool | None = None
    max_rel_err: float | None = None
    speedup_vs_baseline: float | None = None
    baseline_cycles: int | None = None
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SimReport":
        return cls(**json.loads(text))

    def to_text(self) -> str:
        rows = [
            ("kernel", f"{self.kernel}/{self.variant}"),
            ("cores", str(len(self.per_core))),
            ("cycles", str(self.cycles)),
            ("instructions fetched", str(self.instr_fetched)),
            ("useful ops", str(self.useful_ops)),
            ("utilization", f"{100 * self.utilization:.1f}%"),
            ("tcdm immediate grants", f"{100 * self.tcdm['immediate_fraction']:.1f}%"),
        ]
        if self.speedup_vs_baseline is not None:
            rows.append(("speedup vs baseline", f"{self.speedup_vs_baseline:.2f}x"))
        if self.verified is not None:
            rows.append(("verified", "pass" if self.verified else "FAIL"))
        width = max(len(k) for k, _ in rows)
        out = [f"{k:<{width}}  {v}" for k, v in rows]
        for c in self.per_core:
            out.append(
                f"  core {c['core']}: cycles={c['cycles']} fetched={c['instr_fetched']} "
                f"useful={c['useful_ops']} eta={100 * c['utilization']:.1f}% "
                f"stalls={c['stalls']}")
        for w in self.warnings:
            out.append(f"  warning: {w}")
        return "\n".join(out) + "\n"


def make_report(kernel: str, variant: str, rr: RunResult, cfg: ClusterConfig,
                seed: int, verified=None, max_rel_err=None,
                baseline_cycles=None, warnings=None) -> SimReport:
    useful = rr.total_useful
    agg_eta = useful / (rr.cycles * cfg.n_cores) if rr.cycles else 0.0
    if cfg.n_cores == 1 and rr.cores[0]["cycles"]:
        agg_eta = rr.cores[0]["utilization"]
    return SimReport(
        kernel=kernel,
        variant=variant,
        per_core=rr.cores,
        cycles=rr.cycles,
        instr_fetched=rr.total_fetched,
        useful_ops=useful,
        utilization=agg_eta,
        tcdm=rr.tcdm,
        config={"cluster": cfg.as_dict(), "seed": seed},
        seed=seed,
        verified=verified,
        max_rel_err=max_rel_err,
        speedup_vs_baseline=(baseline_cycles / rr.cycles
                             if baseline_cycles else None),
        baseline_cycles=baseline_cycles,
        warnings=warnings or list(rr.warnings),
    )
