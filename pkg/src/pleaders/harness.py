"""Monte Carlo experiment runner, rmse bookkeeping and file analysis.

An experiment synthesizes independent realizations of one process, analyzes
each with every configured estimator (p-leaders across a p list, MFDFA) and
aggregates per-target errors against the process oracles.  Per-realization
records persist as one JSON shard per index, so an interrupted run resumes
exactly: the seed stream is derived from (seed, index), never from run
order.  Failures of individual estimators are recorded and excluded from
aggregation with a count, never silently dropped.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import plots, synth
from .errors import InvalidInputError, InvalidParameterError, PleadersError
from .io import read_signal
from .pipeline import (
    AnalysisBundle,
    AnalysisOptions,
    analyze_field,
    analyze_pyramid,
    analyze_signal,
)

#: benchmark defaults: p sweep, fine regression cutoff, db2, linear detrending.
DEFAULT_P_VALUES = (0.25, 0.5, 1.0, 2.0, 4.0, 5.0, 8.0, 10.0, math.inf)

KNOWN_PROCESSES = ("mrw", "lws", "cmc-ln", "cmc-lp", "binomial-cascade")


def rmse(estimates, truth: float) -> float:
    """Root mean squared error of a batch of estimates."""
    est = np.asarray(estimates, dtype=float)
    if est.size == 0:
        raise InvalidInputError("rmse of an empty estimate list")
    return float(np.sqrt(np.mean((est - truth) ** 2)))


def p_tag(p: float) -> str:
    return "inf" if math.isinf(p) else f"{p:g}"


@dataclass
class ExperimentConfig:
    """Everything one Monte Carlo run needs; JSON round-trippable."""

    process: str = "mrw"
    params: dict = field(default_factory=dict)
    n_realizations: int = 50
    seed: int = 0
    p_values: tuple = DEFAULT_P_VALUES
    estimators: tuple = ("pleader",)
    j1: int = 4
    j2: int | None = None
    n_vanishing_moments: int = 2
    mode: str = "full"
    corrected: bool = True
    weighting: str = "nj"
    mfdfa_degree: int = 1
    mfdfa_integrate: bool = False  # off: direct comparison against p-leaders
    trend: dict | None = None
    out_dir: str | None = None
    workers: int = 0  # 0: PLEADERS_WORKERS env var, else sequential

    def __post_init__(self):
        if self.process not in KNOWN_PROCESSES:
            raise InvalidParameterError(
                f"unknown process {self.process!r}; expected one of "
                f"{KNOWN_PROCESSES}")
        self.p_values = tuple(
            math.inf if p in ("inf", math.inf) else float(p)
            for p in self.p_values)

    def analysis_options(self) -> AnalysisOptions:
        return AnalysisOptions(
            p_values=self.p_values,
            j1=self.j1,
            j2=self.j2,
            n_vanishing_moments=self.n_vanishing_moments,
            mode=self.mode,
            corrected=self.corrected,
            weighting=self.weighting,
            adapt_j1_positive=(self.process == "lws"),
            mfdfa_degree=(self.mfdfa_degree
                          if "mfdfa" in self.estimators else None),
            mfdfa_integrate=self.mfdfa_integrate,
        )

    def to_json(self) -> str:
        d = dataclasses.asdict(self)
        d["p_values"] = [p_tag(p) if math.isinf(p) else p
                         for p in self.p_values]
        return json.dumps(d, indent=2)

    @classmethod
    def from_json(cls, text: str, **overrides) -> "ExperimentConfig":
        d = json.loads(text)
        d.update(overrides)
        for key in ("p_values", "estimators"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


def oracle_targets(config: ExperimentConfig) -> dict[str, float]:
    """Truth values per record key, used for rmse aggregation."""
    targets: dict[str, float] = {}
    pr, pp = config.process, config.params

    def leader_cm(c: np.ndarray):
        for p in config.p_values:
            for m in range(1, 5):
                if m <= c.size:
                    targets[f"pleader_p{p_tag(p)}_c{m}"] = float(c[m - 1])

    if pr == "mrw":
        mp = synth.MrwParams(**pp)
        c1, c2 = synth.mrw_cumulants(mp)
        leader_cm(np.array([c1, c2, 0.0, 0.0]))
        for m, v in zip(range(1, 5), (c1, c2, 0.0, 0.0)):
            targets[f"mfdfa_c{m}"] = v
        targets["p0"] = synth.mrw_p0(mp)
    elif pr == "lws":
        lp = synth.LwsParams(**pp)
        for p in config.p_values:
            targets[f"pleader_p{p_tag(p)}_endpoint"] = synth.lws_support(
                lp, p)[1]
    elif pr in ("cmc-ln", "cmc-lp"):
        kind = "log-normal" if pr == "cmc-ln" else "log-poisson"
        leader_cm(synth.cmc_cumulants(synth.CmcParams(kind=kind, **pp)))
    elif pr == "binomial-cascade":
        w0, w1 = pp["omega0"], pp["omega1"]
        c1 = -(math.log2(w0) + math.log2(w1)) / 2.0
        a = (math.log(w0) - math.log(w1)) / 2.0
        leader_cm(np.array([c1, -a * a / math.log(2.0), 0.0,
                            2.0 * a ** 4 / math.log(2.0)]))
    return targets


def _synthesize(config: ExperimentConfig, index: int):
    """Return the analysis input for one realization (array or pyramid)."""
    rng = synth.rng_for(config.seed, index)
    pr, pp = config.process, config.params
    if pr == "mrw":
        x = synth.gen_mrw(synth.MrwParams(**pp), rng)
        if config.trend is not None:
            x = synth.add_trend(x, config.trend["kind"],
                                config.trend.get("coeffs"))
        return x
    if pr == "lws":
        return synth.gen_lws_pyramid(synth.LwsParams(**pp), rng)
    if pr in ("cmc-ln", "cmc-lp"):
        kind = "log-normal" if pr == "cmc-ln" else "log-poisson"
        return synth.gen_cmc2d(synth.CmcParams(kind=kind, **pp), rng)
    if pr == "binomial-cascade":
        return synth.gen_deterministic_cascade(
            pp["omega0"], pp["omega1"], pp.get("n_octaves", 14))
    raise InvalidParameterError(f"unknown process {pr!r}")


def _bundle_record(bundle: AnalysisBundle) -> dict[str, float]:
    rec: dict[str, float] = {"hmin": bundle.hmin}
    if bundle.p0 is not None:
        rec["p0"] = bundle.p0
    for p, res in bundle.results.items():
        tag = f"pleader_p{p_tag(p)}"
        for m in range(1, res.estimates.cm.size + 1):
            rec[f"{tag}_c{m}"] = float(res.estimates.cm[m - 1])
        rec[f"{tag}_eta"] = (float(res.eta_p) if np.isfinite(res.eta_p)
                             else math.inf)
        rec[f"{tag}_corrected"] = float(res.correction_applied)
        rec[f"{tag}_h_mode"] = res.spectrum.mode()
        rec[f"{tag}_endpoint"] = res.spectrum.right_endpoint()
        if res.bound is not None:
            rec[f"{tag}_bound_max"] = res.bound.max_violation
    if bundle.mfdfa is not None:
        est, spec = bundle.mfdfa
        for m in range(1, est.cm.size + 1):
            rec[f"mfdfa_c{m}"] = float(est.cm[m - 1])
        rec["mfdfa_h_mode"] = spec.mode()
    return rec


def run_realization(config: ExperimentConfig, index: int) -> dict:
    """Synthesize and analyze one realization; returns a JSON-safe shard."""
    opts = config.analysis_options()
    record: dict[str, float] = {}
    failures: dict[str, str] = {}
    try:
        data = _synthesize(config, index)
        if config.process == "lws":
            bundle = analyze_pyramid(data, opts)
        elif config.process == "binomial-cascade":
            bundle = analyze_pyramid(data, opts)
        elif config.process in ("cmc-ln", "cmc-lp"):
            bundle = analyze_field(data, opts)
        else:
            bundle = analyze_signal(data, opts)
        record = _bundle_record(bundle)
        warnings = bundle.warnings
    except PleadersError as exc:
        failures["analysis"] = f"{type(exc).__name__}: {exc}"
        warnings = []
    return {
        "index": index,
        "record": {k: (p_tag(v) if isinstance(v, float) and math.isinf(v)
                       else v) for k, v in record.items()},
        "failures": failures,
        "warnings": warnings,
    }


def _decode_shard(shard: dict) -> dict:
    rec = {k: (math.inf if v == "inf" else float(v))
           for k, v in shard["record"].items()}
    return {**shard, "record": rec}


@dataclass
class ResultSet:
    """Per-realization records plus rmse aggregates."""

    config: ExperimentConfig
    records: list[dict]
    failures: list[dict]
    targets: dict[str, float]
    aggregates: dict[str, dict] = field(default_factory=dict)

    def __post_init__(self):
        if not self.aggregates:
            self.aggregates = self._aggregate()

    def _aggregate(self) -> dict[str, dict]:
        keys = sorted({k for r in self.records for k in r})
        out = {}
        for key in keys:
            vals = np.array([r[key] for r in self.records if key in r
                             and np.isfinite(r[key])])
            n_inf = sum(1 for r in self.records
                        if key in r and not np.isfinite(r[key]))
            if vals.size == 0:
                out[key] = {"n": 0, "n_nonfinite": n_inf}
                continue
            entry = {
                "n": int(vals.size),
                "n_nonfinite": n_inf,
                "mean": float(vals.mean()),
                "sd": float(vals.std()),
            }
            if key in self.targets and np.isfinite(self.targets[key]):
                truth = self.targets[key]
                entry["truth"] = truth
                entry["bias"] = entry["mean"] - truth
                entry["rmse"] = rmse(vals, truth)
            out[key] = entry
        return out

    def values(self, key: str) -> np.ndarray:
        return np.array([r[key] for r in self.records if key in r])

    def rmse_of(self, key: str) -> float:
        return self.aggregates[key]["rmse"]

    @property
    def n_failed(self) -> int:
        return sum(1 for f in self.failures if f)

    def write_csv(self, out_dir: str | Path) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        long_path = out_dir / "realizations.csv"
        with long_path.open("w") as fh:
            fh.write("realization,key,value\n")
            for i, rec in enumerate(self.records):
                for k, v in sorted(rec.items()):
                    fh.write(f"{i},{k},{v!r}\n")
        agg_path = out_dir / "aggregate.csv"
        with agg_path.open("w") as fh:
            fh.write("key,n,mean,sd,truth,bias,rmse\n")
            for k, e in sorted(self.aggregates.items()):
                fh.write(",".join([
                    k, str(e.get("n", 0)),
                    *(f"{e[c]:.10g}" if c in e else ""
                      for c in ("mean", "sd", "truth", "bias", "rmse")),
                ]) + "\n")
        return [long_path, agg_path]


def _worker_count(config: ExperimentConfig) -> int:
    if config.workers:
        return config.workers
    return int(os.environ.get("PLEADERS_WORKERS", "1"))


def run_experiment(config: ExperimentConfig,
                   render_figures: bool = False) -> ResultSet:
    """Run (or resume) a Monte Carlo experiment.

    With ``out_dir`` set, each realization persists as
    ``real_<index>.json`` immediately after completion and existing shards
    are reused, so a resumed run equals an uninterrupted one.
    """
    out_dir = Path(config.out_dir) if config.out_dir else None
    shards: dict[int, dict] = {}
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "config.json").write_text(config.to_json())
        for path in out_dir.glob("real_*.json"):
            shard = json.loads(path.read_text())
            shards[shard["index"]] = shard

    todo = [i for i in range(config.n_realizations) if i not in shards]
    workers = _worker_count(config)
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for shard in pool.map(run_realization, [config] * len(todo), todo):
                shards[shard["index"]] = shard
                _persist_shard(out_dir, shard)
    else:
        for i in todo:
            shard = run_realization(config, i)
            shards[i] = shard
            _persist_shard(out_dir, shard)

    ordered = [_decode_shard(shards[i]) for i in range(config.n_realizations)]
    result = ResultSet(
        config=config,
        records=[s["record"] for s in ordered],
        failures=[s["failures"] for s in ordered],
        targets=oracle_targets(config),
    )
    if out_dir is not None:
        result.write_csv(out_dir)
        if render_figures:
            _render_experiment_figures(result, out_dir)
    return result


def _persist_shard(out_dir: Path | None, shard: dict) -> None:
    if out_dir is not None:
        path = out_dir / f"real_{shard['index']:04d}.json"
        path.write_text(json.dumps(shard))


def _render_experiment_figures(result: ResultSet, out_dir: Path) -> None:
    for m in (1, 2, 3, 4):
        rows = []
        for p in result.config.p_values:
            key = f"pleader_p{p_tag(p)}_c{m}"
            if key in result.aggregates and "rmse" in result.aggregates[key]:
                rows.append({"estimator": "pleader", "p": p,
                             "rmse": result.aggregates[key]["rmse"]})
        mk = f"mfdfa_c{m}"
        if mk in result.aggregates and "rmse" in result.aggregates[mk]:
            rows.append({"estimator": "mfdfa", "p": math.nan,
                         "rmse": result.aggregates[mk]["rmse"]})
        if rows:
            plots.save_rmse_plot(rows, out_dir / f"rmse_c{m}.png",
                                 target=f"c{m}")


def compare_rmse(result: ResultSet, tag_a: str, tag_b: str) -> list[dict]:
    """Paired rmse table between two estimator tags.

    Tags are record-key prefixes, e.g. ``pleader_p0.5``, ``pleader_pinf``
    or ``mfdfa``; rows pair targets both estimators produced.
    """
    rows = []
    for m in range(1, 5):
        ka, kb = f"{tag_a}_c{m}", f"{tag_b}_c{m}"
        ea = _rmse_or_none(result.aggregates.get(ka))
        eb = _rmse_or_none(result.aggregates.get(kb))
        if ea is None or eb is None:
            continue
        rows.append({
            "target": f"c{m}",
            tag_a: ea,
            tag_b: eb,
            "ratio": eb / ea if ea else math.inf,
        })
    return rows


def _rmse_or_none(entry):
    if entry and "rmse" in entry:
        return entry["rmse"]
    return None


# -- single-file analysis --------------------------------------------------------

def analyze_file(path: str | Path, options: AnalysisOptions | None = None,
                 out_dir: str | Path | None = None,
                 render_figures: bool = True) -> AnalysisBundle:
    """Analyze a signal or field file and (optionally) write the report.

    The report directory receives delimited tables (scaling estimates,
    structure functions, spectra), a machine-readable ``summary.json`` with
    h_min, the eta(p) curve, p0 and all warnings, and rendered figures.
    1D inputs whose length is not a power of two are truncated to the
    largest power of two (the periodized pyramid needs even lengths at
    every level).
    """
    opts = options or AnalysisOptions()
    data = read_signal(path)
    if data.ndim == 1:
        n_pow2 = 2 ** int(math.floor(math.log2(data.size)))
        if n_pow2 != data.size:
            data = data[:n_pow2]
        bundle = analyze_signal(data, opts)
    else:
        bundle = analyze_field(data, opts)

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_bundle_tables(bundle, out_dir)
        if render_figures:
            plots.render_bundle(bundle, out_dir)
    return bundle


def _write_bundle_tables(bundle: AnalysisBundle, out_dir: Path) -> None:
    with (out_dir / "cumulants.csv").open("w") as fh:
        fh.write("p,c1,c2,c3,c4,eta_p,corrected,j1,j2\n")
        for p, res in bundle.results.items():
            cm = list(res.estimates.cm) + [math.nan] * (4 - res.estimates.cm.size)
            fh.write(f"{p_tag(p)},{cm[0]!r},{cm[1]!r},{cm[2]!r},{cm[3]!r},"
                     f"{res.eta_p!r},{int(res.correction_applied)},"
                     f"{res.estimates.j1},{res.estimates.j2}\n")
    with (out_dir / "zeta.csv").open("w") as fh:
        fh.write("p,q,zeta\n")
        for p, res in bundle.results.items():
            for q, z in zip(res.estimates.q_grid, res.estimates.zeta):
                fh.write(f"{p_tag(p)},{q!r},{z!r}\n")
    with (out_dir / "spectrum.csv").open("w") as fh:
        fh.write("source,q,h,L\n")
        for p, res in bundle.results.items():
            for q, h, L in zip(res.spectrum.q_grid, res.spectrum.h,
                               res.spectrum.L):
                fh.write(f"pleader_p{p_tag(p)},{q!r},{h!r},{L!r}\n")
        if bundle.mfdfa is not None:
            _, spec = bundle.mfdfa
            for q, h, L in zip(spec.q_grid, spec.h, spec.L):
                fh.write(f"mfdfa,{q!r},{h!r},{L!r}\n")
    with (out_dir / "structure.csv").open("w") as fh:
        fh.write("p,j,q,log2S,n_j\n")
        for p, res in bundle.results.items():
            t = res.structure
            for i, j in enumerate(t.js):
                for iq, q in enumerate(t.q_grid):
                    fh.write(f"{p_tag(p)},{j},{q!r},"
                             f"{t.log2_values[i, iq]!r},{t.n_j[i]}\n")
    summary = {
        "n_samples": bundle.n_samples,
        "dim": bundle.dim,
        "n_octaves": bundle.n_octaves,
        "j1": bundle.j1,
        "j2": bundle.j2,
        "hmin": bundle.hmin,
        "p0": None if bundle.p0 is None else p_tag(bundle.p0),
        "eta_curve": (None if bundle.eta_curve is None else {
            "p": list(bundle.eta_curve.p_grid),
            "eta": list(bundle.eta_curve.eta),
        }),
        "eta_p": {p_tag(p): (None if math.isinf(p) else res.eta_p)
                  for p, res in bundle.results.items()},
        "corrected": {p_tag(p): bool(res.correction_applied)
                      for p, res in bundle.results.items()},
        "warnings": bundle.warnings,
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2))
