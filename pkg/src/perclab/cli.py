"""Reproducible experiment runner: ``perc <subcommand> --config plan.json``.

A plan JSON fully determines an experiment; identical plans with identical
seeds reproduce identical estimates bit-for-bit, because every estimator
reduces integer per-sample outcomes and the reductions are exact.  Records
store those integer sufficient statistics, so an interrupted run can be
resumed from the next unused sample index and the merged estimate equals an
uninterrupted run exactly.

Exit codes: 0 success, 2 validation error, 3 resource error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import ResourceError, UsageError
from .explorer import GrowthBudget, box_exploration, grow_cluster, regularity_check
from .lattice import Box, LatticeSpec, origin
from .random_field import FieldConfig, check_golden_csv, default_golden_path
from .estimators import (
    EstimatorConfig,
    PointEstimate,
    census_outcomes,
    cluster_size_outcomes,
    estimate_pc,
    fit_exponent,
    multi_arm_outcomes,
    one_arm_outcomes,
    restricted_mass_outcomes,
    two_point_outcomes,
)

SUBCOMMANDS = (
    "one-arm",
    "multi-arm",
    "two-point",
    "tail",
    "pc",
    "boundary-sum",
    "lowmass",
    "second-moment",
    "regularity",
    "explore",
    "oracle-verify",
)

CHUNK = 20_000
CSV_COLUMNS = ("scale", "value", "std_error", "n", "indeterminate_fraction")


@dataclass
class ExperimentPlan:
    """A validated plan; ``raw`` is the canonical dict that is hashed."""

    raw: dict

    @property
    def name(self) -> str:
        return self.raw["name"]

    @property
    def subcommand(self) -> str:
        return self.raw["subcommand"]

    @property
    def spec(self) -> LatticeSpec:
        return LatticeSpec.from_json(self.raw["spec"])

    @property
    def scales(self) -> list:
        return list(self.raw.get("scales", []))

    @property
    def n_samples(self) -> int:
        return int(self.raw.get("n_samples", 10_000))

    def budget(self) -> GrowthBudget:
        b = self.raw.get("budget", {})
        return GrowthBudget(
            max_vertices=int(b.get("max_vertices", 100_000)),
            max_graph_radius=b.get("max_graph_radius"),
        )

    def config(self, workers: int, seed: int) -> EstimatorConfig:
        return EstimatorConfig(
            n_samples=self.n_samples,
            master_seed=seed,
            budget=self.budget(),
            parallel_workers=workers,
        )

    @classmethod
    def from_json(cls, raw: dict) -> "ExperimentPlan":
        if not isinstance(raw, dict):
            raise UsageError("plan must be a JSON object")
        for key in ("name", "subcommand", "spec"):
            if key not in raw:
                raise UsageError(f"plan is missing required key {key!r}")
        if raw["subcommand"] not in SUBCOMMANDS:
            raise UsageError(f"unknown subcommand {raw['subcommand']!r}")
        LatticeSpec.from_json(raw["spec"])
        p = raw.get("p")
        if p == "auto" and "pc" not in raw:
            raise UsageError('p = "auto" requires a "pc" sub-plan')
        scales = raw.get("scales", [])
        if scales and any(b <= a for a, b in zip(scales, scales[1:])):
            raise UsageError("scales must be ascending")
        needs_scales = raw["subcommand"] in (
            "one-arm", "multi-arm", "two-point", "tail", "pc",
            "boundary-sum", "second-moment", "regularity",
        )
        if needs_scales and not scales:
            raise UsageError(f"{raw['subcommand']} requires nonempty scales")
        return cls(raw=raw)


def plan_hash(raw: dict) -> str:
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# -- integer sufficient statistics --------------------------------------------


def _new_bernoulli() -> dict:
    return {"kind": "bernoulli", "n_yes": 0, "n_no": 0, "n_indet": 0}


def _new_mean() -> dict:
    return {"kind": "mean", "n_det": 0, "n_indet": 0, "sum": 0, "sum_sq": 0}


def _add_bernoulli(stat: dict, out: np.ndarray) -> None:
    stat["n_yes"] += int((out == 1).sum())
    stat["n_no"] += int((out == 0).sum())
    stat["n_indet"] += int((out == 2).sum())


def _add_mean(stat: dict, values: np.ndarray, det: np.ndarray) -> None:
    sel = values[det]
    stat["n_det"] += int(det.sum())
    stat["n_indet"] += int((~det).sum())
    stat["sum"] += int(sel.sum())
    stat["sum_sq"] += int((sel.astype(object) ** 2).sum()) if sel.size else 0


def _estimate_from(stat: dict) -> PointEstimate:
    if stat["kind"] == "bernoulli":
        n = stat["n_yes"] + stat["n_no"]
        total = n + stat["n_indet"]
        if n == 0:
            return PointEstimate(float("nan"), float("nan"), 0, 1.0 if total else 0.0)
        v = stat["n_yes"] / n
        se = math.sqrt(v * (1 - v) / n)
        return PointEstimate(v, se, n, stat["n_indet"] / total)
    n = stat["n_det"]
    total = n + stat["n_indet"]
    if n == 0:
        return PointEstimate(float("nan"), float("nan"), 0, 1.0 if total else 0.0)
    mean = stat["sum"] / n
    if n > 1:
        var = (stat["sum_sq"] - stat["sum"] ** 2 / n) / (n - 1)
        se = math.sqrt(max(var, 0.0) / n)
    else:
        se = float("nan")
    return PointEstimate(mean, se, n, stat["n_indet"] / total)


# -- the runner ---------------------------------------------------------------


class Runner:
    def __init__(
        self,
        plan: ExperimentPlan,
        out_dir: str,
        seed: int,
        workers: int,
        stop_after: int | None = None,
    ):
        self.plan = plan
        self.out_dir = out_dir
        self.seed = seed
        self.workers = workers
        self.stop_after = stop_after
        self.record: dict = {
            "plan": plan.raw,
            "plan_hash": plan_hash(plan.raw),
            "tool_version": __version__,
            "seed": seed,
            "workers": workers,
            "timestamp": "",
            "truncated_run": False,
            "samples_done": 0,
            "stats": {},
            "results": [],
            "auto_p": None,
            "fit": None,
            "wall_clock_s": 0.0,
            "sample_count": plan.n_samples,
        }

    # ---- p resolution

    def resolve_p(self) -> float:
        raw_p = self.plan.raw.get("p", 0.5)
        if raw_p == "auto":
            sub = self.plan.raw["pc"]
            cfg = self.plan.config(self.workers, self.seed)
            pc = estimate_pc(
                self.plan.spec,
                int(sub["r"]),
                cfg,
                float(sub.get("tolerance", 1e-3)),
            )
            self.record["auto_p"] = {
                "p_hat": pc.p_hat,
                "bracket": list(pc.bracket),
                "criterion_radius": pc.criterion_radius,
                "samples_per_probe": pc.samples_per_probe,
            }
            return pc.p_hat
        return float(raw_p)

    # ---- chunked sampling over scales

    def run(self) -> dict:
        t0 = time.time()
        sub = self.plan.subcommand
        try:
            if sub == "oracle-verify":
                self._run_oracle_verify()
            elif sub == "pc":
                self._run_pc()
            elif sub in ("regularity", "explore"):
                self._run_reference_loops()
            else:
                self._run_sampled()
        except KeyboardInterrupt:
            self.record["truncated_run"] = True
        self.record["wall_clock_s"] = time.time() - t0
        self.record["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
        self._finalize()
        return self.record

    def _targets(self) -> int:
        n = self.plan.n_samples
        if self.stop_after is not None:
            n = min(n, self.stop_after)
        return n

    def _run_sampled(self, start: int = 0) -> None:
        plan, spec = self.plan, self.plan.spec
        p = self.resolve_p()
        self.record["p"] = p
        cfg = plan.config(self.workers, self.seed)
        sub = plan.subcommand
        scales = plan.scales
        stats = self.record["stats"]
        target = self._targets()
        done = start
        if sub == "lowmass":
            keys = [f"c={c}" for c in plan.raw.get("c_values", [0.01])] + ["one-arm"]
        elif sub == "multi-arm":
            self.record["points"] = plan.raw.get("points")
        if sub in ("one-arm", "multi-arm", "two-point"):
            for s in scales:
                stats.setdefault(str(s), _new_bernoulli())
        elif sub == "tail":
            for s in scales:
                stats.setdefault(str(s), _new_bernoulli())
        elif sub in ("boundary-sum", "second-moment"):
            for s in scales:
                stats.setdefault(str(s), _new_mean())
        elif sub == "lowmass":
            for k in keys:
                stats.setdefault(k, _new_bernoulli())

        while done < target:
            count = min(CHUNK, target - done)
            if sub == "one-arm":
                for s in scales:
                    out = one_arm_outcomes(spec, p, int(s), cfg, done, count)
                    _add_bernoulli(stats[str(s)], out)
            elif sub == "multi-arm":
                points = [tuple(pt) for pt in plan.raw["points"]]
                for s in scales:
                    out = multi_arm_outcomes(spec, p, int(s), points, cfg, done, count)
                    _add_bernoulli(stats[str(s)], out)
            elif sub == "two-point":
                for s in scales:
                    x = tuple([int(s)] + [0] * (spec.dimension - 1))
                    out = two_point_outcomes(spec, p, x, cfg, done, count)
                    _add_bernoulli(stats[str(s)], out)
            elif sub == "tail":
                thresholds = [int(s) for s in scales]
                if cfg.budget.max_vertices <= thresholds[-1]:
                    raise UsageError(
                        "budget.max_vertices must exceed the largest threshold"
                    )
                sizes, complete = cluster_size_outcomes(
                    spec, p, thresholds[-1] + 1, cfg, done, count,
                    env_radius=plan.raw.get("env_radius"),
                )
                for t in thresholds:
                    out = np.full(count, 2, dtype=np.uint8)
                    out[sizes > t] = 1
                    out[(complete == 1) & (sizes <= t)] = 0
                    _add_bernoulli(stats[str(t)], out)
            elif sub == "boundary-sum":
                for s in scales:
                    out_x, _, out_f = census_outcomes(
                        spec, p, int(s), 0, cfg, done, count
                    )
                    _add_mean(stats[str(s)], out_x, (out_f & 1) == 0)
            elif sub == "second-moment":
                for s in scales:
                    mass, mflags = restricted_mass_outcomes(
                        spec, p, int(s), cfg, done, count,
                        env_buffer=plan.raw.get("env_buffer"),
                    )
                    _add_mass_sq(stats[str(s)], mass, (mflags & 1) == 0)
            elif sub == "lowmass":
                j = int(plan.raw["j"])
                L = int(plan.raw["L"])
                out_x, out_a, out_f = census_outcomes(spec, p, j, L, cfg, done, count)
                x_trunc = (out_f & 1) != 0
                a_trunc = (out_f & 6) != 0
                rhs = np.full(count, 2, dtype=np.uint8)
                rhs[out_x >= 1] = 1
                rhs[(out_x < 1) & (~x_trunc)] = 0
                _add_bernoulli(stats["one-arm"], rhs)
                for c in plan.raw.get("c_values", [0.01]):
                    x_yes = out_x >= L * L
                    x_no = (~x_yes) & (~x_trunc)
                    a_no = out_a > float(c) * L**4
                    a_yes = (~a_no) & (~a_trunc)
                    lhs = np.full(count, 2, dtype=np.uint8)
                    lhs[x_no | a_no] = 0
                    lhs[x_yes & a_yes] = 1
                    _add_bernoulli(stats[f"c={c}"], lhs)
            done += count
            self.record["samples_done"] = done
        if done < self.plan.n_samples:
            self.record["truncated_run"] = True

    def _run_pc(self) -> None:
        cfg = self.plan.config(self.workers, self.seed)
        tol = float(self.plan.raw.get("tolerance", 1e-3))
        results = []
        for r in self.plan.scales:
            pc = estimate_pc(self.plan.spec, int(r), cfg, tol)
            results.append(
                {
                    "scale": int(r),
                    "value": pc.p_hat,
                    "std_error": (pc.bracket[1] - pc.bracket[0]) / 2,
                    "n": pc.samples_per_probe,
                    "indeterminate_fraction": 0.0,
                    "bracket": list(pc.bracket),
                }
            )
        self.record["pc_results"] = results
        self.record["samples_done"] = self.plan.n_samples

    def _run_reference_loops(self) -> None:
        plan, spec = self.plan, self.plan.spec
        p = self.resolve_p()
        self.record["p"] = p
        stats = self.record["stats"]
        target = self._targets()
        if plan.subcommand == "regularity":
            x = tuple(plan.raw.get("x", [0] * spec.dimension))
            for s in plan.scales:
                stat = stats.setdefault(str(s), _new_bernoulli())
                for i in range(target):
                    config = FieldConfig(self.seed, p, i)
                    rep = regularity_check(
                        spec, config, x, int(s),
                        envelope_exponent=float(
                            plan.raw.get("envelope_exponent", 2.0)
                        ),
                    )
                    out = np.array(
                        [0 if rep.t_s_loc_holds else 1], dtype=np.uint8
                    )
                    _add_bernoulli(stat, out)
        else:  # explore
            j = int(plan.raw["j"])
            box_scale = int(plan.raw.get("box_scale", 1))
            shift = tuple(plan.raw.get("shift", [0] * spec.dimension))
            stat = stats.setdefault(str(j), _new_bernoulli())
            budget = plan.budget()
            for i in range(target):
                config = FieldConfig(self.seed, p, i)
                trace = box_exploration(spec, config, j, box_scale, shift)
                direct = grow_cluster(
                    spec, config, origin(spec.dimension), Box(j), budget,
                    boundary_radius=j,
                )
                match = trace.boundary_hits == direct.boundary_hits
                _add_bernoulli(stat, np.array([1 if match else 0], dtype=np.uint8))
        self.record["samples_done"] = target
        if target < plan.n_samples:
            self.record["truncated_run"] = True

    def _run_oracle_verify(self) -> None:
        report = verify_oracle_corpus()
        report["golden_vectors"] = check_golden_csv(default_golden_path())
        self.record["oracle_report"] = report
        self.record["samples_done"] = self.plan.n_samples
        if not report["all_passed"]:
            raise ResourceError("oracle corpus verification failed")

    # ---- finalize + persistence

    def _finalize(self) -> None:
        stats = self.record["stats"]
        results = []
        for key, stat in stats.items():
            est = _estimate_from(stat)
            results.append(
                {
                    "scale": key,
                    "value": est.value,
                    "std_error": est.std_error,
                    "n": est.n,
                    "indeterminate_fraction": est.indeterminate_fraction,
                }
            )
        if self.plan.subcommand == "pc":
            results = self.record.get("pc_results", [])
        self.record["results"] = results
        usable = [
            (float(r["scale"]), PointEstimate(
                r["value"], r["std_error"], r["n"], r["indeterminate_fraction"]
            ))
            for r in results
            if _is_float(r["scale"])
        ]
        self.record["fit"] = None
        if (
            self.plan.subcommand in ("one-arm", "multi-arm", "two-point", "tail")
            and not self.record["truncated_run"]
        ):
            try:
                fit = fit_exponent(
                    usable,
                    min_scale=float(self.plan.raw.get("fit_min_scale", 4.0)),
                    max_indeterminate=float(
                        self.plan.raw.get("fit_max_indeterminate", 0.01)
                    ),
                )
                self.record["fit"] = {
                    "slope": fit.slope,
                    "intercept": fit.intercept,
                    "slope_std_error": fit.slope_std_error,
                    "fit_window": fit.fit_window,
                }
            except UsageError:
                pass

    def flush(self) -> tuple[str, str]:
        os.makedirs(self.out_dir, exist_ok=True)
        base = os.path.join(self.out_dir, self.plan.name)
        with open(base + ".json", "w") as fh:
            json.dump(self.record, fh, indent=2, sort_keys=True, default=_js)
            fh.write("\n")
        with open(base + ".csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in self.record["results"]:
                writer.writerow(
                    [
                        row["scale"],
                        repr(float(row["value"])),
                        repr(float(row["std_error"])),
                        row["n"],
                        repr(float(row["indeterminate_fraction"])),
                    ]
                )
        return base + ".json", base + ".csv"


def _js(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"not JSON serializable: {obj!r}")


def _is_float(x) -> bool:
    try:
        float(x)
        return True
    except (TypeError, ValueError):
        return False


def _add_mass_sq(stat: dict, mass: np.ndarray, det: np.ndarray) -> None:
    """Accumulate |C cap Q_r|^2 as a mean statistic (python ints: the fourth
    powers overflow int64 at moderate radii)."""
    sel = mass[det].astype(object)
    stat["n_det"] += int(det.sum())
    stat["n_indet"] += int((~det).sum())
    stat["sum"] += int((sel**2).sum()) if sel.size else 0
    stat["sum_sq"] += int((sel**4).sum()) if sel.size else 0


def verify_oracle_corpus(path: str | None = None) -> dict:
    """Run every bundled corpus entry: frozen exact values, BK and FKG
    inequalities, and flow-vs-witness-split equivalence."""
    from . import oracle

    entries = oracle.load_corpus(path)
    n_checked = 0
    failures = []
    for entry in entries:
        g = oracle.FiniteGraph.from_json(entry["graph"])
        for check in entry["checks"]:
            n_checked += 1
            kind = check["kind"]
            p = check["p"]
            if kind == "probability":
                ev = _corpus_event(check["event"])
                got = oracle.exact_probability(g, p, ev)
                if abs(got - check["expected"]) > 1e-12:
                    failures.append((entry["name"], check, got))
            elif kind == "bk":
                a = _corpus_event(check["a"])
                b = _corpus_event(check["b"])
                lhs, rhs, holds = oracle.verify_bk(g, p, a, b)
                if not holds:
                    failures.append((entry["name"], check, (lhs, rhs)))
            elif kind == "fkg":
                a = _corpus_event(check["a"])
                b = _corpus_event(check["b"])
                lhs, rhs, holds = oracle.verify_fkg(g, p, a, b)
                if not holds:
                    failures.append((entry["name"], check, (lhs, rhs)))
            elif kind == "disjoint":
                events = [_corpus_event(e) for e in check["events"]]
                got = oracle.exact_disjoint_occurrence(g, p, events)
                if abs(got - check["expected"]) > 1e-12:
                    failures.append((entry["name"], check, got))
            else:
                raise UsageError(f"unknown corpus check kind {kind!r}")
    return {
        "n_entries": len(entries),
        "n_checked": n_checked,
        "failures": [repr(f) for f in failures],
        "all_passed": not failures,
    }


def _corpus_event(obj: dict):
    from . import oracle

    kind = obj["kind"]
    if kind == "connect":
        return oracle.EventPredicate.connect(obj["a"], obj["b"])
    if kind == "connect_to_set":
        return oracle.EventPredicate.connect_to_set(obj["a"], obj["targets"])
    if kind == "size_at_least":
        return oracle.EventPredicate.size_at_least(obj["a"], obj["k"])
    raise UsageError(f"unknown corpus event kind {kind!r}")


# -- fit / resume -------------------------------------------------------------


def run_fit(paths: list[str]) -> str:
    """Fit an exponent to one or more CSV series; returns the report text."""
    series = []
    for path in paths:
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                try:
                    series.append(
                        (
                            float(row["scale"]),
                            PointEstimate(
                                float(row["value"]),
                                float(row["std_error"]),
                                int(row["n"]),
                                float(row["indeterminate_fraction"]),
                            ),
                        )
                    )
                except (KeyError, ValueError) as exc:
                    raise UsageError(f"malformed CSV row in {path}: {row}") from exc
    if len(series) < 3:
        raise UsageError("fit requires at least 3 rows")
    fit = fit_exponent(series, min_scale=0.0)
    lines = [
        f"slope     {fit.slope:+.4f} +- {fit.slope_std_error:.4f}",
        f"intercept {fit.intercept:+.4f}",
        f"window    {fit.fit_window}",
        "ratio test (doubled scales):",
    ]
    by_scale = {s: est for s, est in series}
    for s, est in sorted(by_scale.items()):
        if 2 * s in by_scale and est.value > 0:
            ratio = by_scale[2 * s].value / est.value
            lines.append(
                f"  value({2 * s:g})/value({s:g}) = {ratio:.4f}"
                f"  (2^slope = {2**fit.slope:.4f})"
            )
    return "\n".join(lines)


def run_resume(record_path: str, workers: int) -> tuple[dict, str]:
    """Continue a truncated record from the next unused sample index."""
    with open(record_path) as fh:
        record = json.load(fh)
    plan = ExperimentPlan.from_json(record["plan"])
    if plan_hash(plan.raw) != record["plan_hash"]:
        raise UsageError("record plan hash does not match its plan; refusing")
    if not record.get("truncated_run"):
        return record, "record is complete; nothing to resume"
    if plan.subcommand in ("pc", "regularity", "explore", "oracle-verify"):
        raise UsageError(
            f"{plan.subcommand} records are not resumable; re-run the plan"
        )
    runner = Runner(
        plan,
        os.path.dirname(record_path) or ".",
        seed=record["seed"],
        workers=workers,
    )
    runner.record["stats"] = record["stats"]
    runner.record["auto_p"] = record.get("auto_p")
    runner.record["samples_done"] = record["samples_done"]
    t0 = time.time()
    try:
        runner._run_sampled(start=record["samples_done"])
        runner.record["truncated_run"] = (
            runner.record["samples_done"] < plan.n_samples
        )
    except KeyboardInterrupt:
        runner.record["truncated_run"] = True
    runner.record["wall_clock_s"] = record.get("wall_clock_s", 0.0) + (
        time.time() - t0
    )
    runner.record["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    runner._finalize()
    runner.flush()
    return runner.record, "resumed"


# -- entry point ---------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="perc",
        description="Percolation laboratory experiment runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, help=f"run a {name} plan")
        sp.add_argument("--config", required=True, help="plan JSON path")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--workers", type=int, default=None)
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument(
            "--stop-after",
            type=int,
            default=None,
            help="process at most this many samples (testing/ops aid)",
        )
    fit_p = sub.add_parser("fit", help="fit an exponent to CSV series")
    fit_p.add_argument("csv", nargs="+")
    res_p = sub.add_parser("resume", help="continue a truncated record")
    res_p.add_argument("record")
    res_p.add_argument("--workers", type=int, default=None)

    args = parser.parse_args(argv)
    workers_env = os.environ.get("PERC_WORKERS")
    default_workers = int(workers_env) if workers_env else 1

    try:
        if args.command == "fit":
            print(run_fit(args.csv))
            return 0
        if args.command == "resume":
            record, message = run_resume(
                args.record, args.workers or default_workers
            )
            print(message)
            return 0
        with open(args.config) as fh:
            raw = json.load(fh)
        plan = ExperimentPlan.from_json(raw)
        if plan.subcommand != args.command:
            raise UsageError(
                f"plan subcommand {plan.subcommand!r} does not match "
                f"invocation {args.command!r}"
            )
        seed = args.seed if args.seed is not None else int(raw.get("master_seed", 1))
        workers = args.workers or int(raw.get("workers", default_workers))
        runner = Runner(
            plan, args.out, seed=seed, workers=workers, stop_after=args.stop_after
        )
        record = runner.run()
        json_path, csv_path = runner.flush()
        status = "truncated-run" if record["truncated_run"] else "complete"
        print(f"{status}: {json_path} {csv_path}")
        return 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ResourceError, MemoryError) as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
