"""MSE comparison harness: paired quasi-random vs pseudo-random chains.

For each period exponent m the harness runs R quasi-random replicates
(fresh rotation shifts over one shared deterministic driving sequence) and
R pseudo-random replicates (independent baseline streams), evaluates the
test functions against ground truth, and reports the squared error
averaged over coordinates first, then over replicates, with a standard
error across replicates.  Every seed and shift derives deterministically
from (experiment seed, m, schedule index, replicate index), so reports are
byte-identical across runs and thread counts.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cud_core import (DEFAULT_OFFSET, Gf2Poly, LfsrConfig, PointSet,
                       builtin_config, factorize, generate_cud)
from .drive import build_drive_matrix, coprime_width
from .errors import ConfigurationError, DomainError
from .experiment import DEFAULT_TRUTH, ExperimentSpec
from .models import (GroundTruth, closed_form_posterior,
                     crossed_effects_potential, double_well_potential,
                     double_well_truth, linear_regression_potential,
                     logistic_potential, reference_ground_truth,
                     synthesize_data)
from .prng import BaselinePrng
from .samplers import (ChainConfig, ChainRun, ConstantSchedule,
                       PseudoRandomDrive, continue_chain, contraction_info,
                       run_chain)

KINDS = ("coordinate", "square", "indicator")

# Stream-id roles, combined as ((sched_idx * 8 + role) << 40) | (m << 20) | r.
_ROLE_SHIFT = 0
_ROLE_NOISE = 1
_ROLE_MINIBATCH_LQMC = 2
_ROLE_MINIBATCH_LMC = 3


def _stream(sched_idx: int, role: int, m: int, r: int) -> int:
    return ((sched_idx * 8 + role) << 40) | (m << 20) | r


# ---------------------------------------------------------------------------
# Test functions and the sample-average estimator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    """f(x) = x_j, x_j**2, or 1{x_j > 0}; ``index`` is the 1-based j."""

    kind: str
    index: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown test function kind {self.kind!r}")
        if self.index < 1:
            raise DomainError("coordinate index is 1-based and must be >= 1")

    def evaluate(self, states: np.ndarray) -> np.ndarray:
        x = states[:, self.index - 1]
        if self.kind == "coordinate":
            return x
        if self.kind == "square":
            return x * x
        return (x > 0).astype(np.float64)


def estimate(run: ChainRun, f: TestFunction, discard: int = 0) -> float:
    """Mean of f over theta_{discard+1}..theta_n."""
    if not 0 <= discard < run.n:
        raise DomainError(f"discard must be in [0, {run.n}), got {discard}")
    if f.index > run.trajectory.shape[1]:
        raise DomainError("test-function coordinate exceeds the chain dimension")
    return float(f.evaluate(run.trajectory[discard:]).mean())


def _trajectory_stats(traj: np.ndarray, discard: int) -> dict[str, np.ndarray]:
    """All-coordinate estimates of the three families in one pass."""
    tail = traj[discard:]
    return {
        "coordinate": tail.mean(axis=0),
        "square": (tail**2).mean(axis=0),
        "indicator": (tail > 0).mean(axis=0),
    }


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    model: str
    method: str
    m: int
    n: int
    schedule: str
    test_fn: str
    mse: float
    stderr: float
    replicates: int


@dataclass
class MseReport:
    rows: list[ReportRow]
    metadata: dict
    replicate_rows: list[tuple] = field(default_factory=list)

    CSV_HEADER = "model,method,m,n,schedule,test_fn,mse,stderr,replicates"

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for r in self.rows:
            lines.append(
                f"{r.model},{r.method},{r.m},{r.n},{r.schedule},{r.test_fn},"
                f"{r.mse:.12g},{r.stderr:.12g},{r.replicates}"
            )
        return "\n".join(lines) + "\n"

    def replicate_csv(self) -> str:
        lines = ["model,method,m,schedule,test_fn,replicate,sq_err"]
        for row in self.replicate_rows:
            model, method, m, sched, fn, rep, val = row
            lines.append(f"{model},{method},{m},{sched},{fn},{rep},{val:.12g}")
        return "\n".join(lines) + "\n"

    def mse(self, method: str, m: int, test_fn: str, schedule: str | None = None) -> float:
        for r in self.rows:
            if (r.method == method and r.m == m and r.test_fn == test_fn
                    and (schedule is None or r.schedule == schedule)):
                return r.mse
        raise KeyError((method, m, test_fn, schedule))

    def stderr_of(self, method: str, m: int, test_fn: str, schedule: str | None = None) -> float:
        for r in self.rows:
            if (r.method == method and r.m == m and r.test_fn == test_fn
                    and (schedule is None or r.schedule == schedule)):
                return r.stderr
        raise KeyError((method, m, test_fn, schedule))


# ---------------------------------------------------------------------------
# Model assembly and ground truth
# ---------------------------------------------------------------------------


def build_model(spec: ExperimentSpec):
    """(potential, dataset) for a spec; dataset is None for the double well."""
    if spec.model == "double_well":
        return double_well_potential(), None
    data = synthesize_data(
        spec.model, spec.n_obs, spec.dim, spec.data_seed, noise_var=spec.noise_var
    )
    if spec.model == "logistic":
        return logistic_potential(data), data
    if spec.model == "linear":
        return linear_regression_potential(data), data
    return crossed_effects_potential(data.y), data


def ground_truth_for(spec: ExperimentSpec, potential) -> GroundTruth:
    """Closed form, quadrature, or a long reference run, per model."""
    if spec.model == "linear":
        data = synthesize_data("linear", spec.n_obs, spec.dim, spec.data_seed,
                               noise_var=spec.noise_var)
        return closed_form_posterior(data)
    if spec.model == "double_well":
        return double_well_truth()
    ts = spec.truth or DEFAULT_TRUTH[spec.model]
    return reference_ground_truth(
        potential, h=ts.h, n_steps=ts.n_steps, n_chains=ts.chains, seed=ts.seed
    )


# ---------------------------------------------------------------------------
# The comparison itself
# ---------------------------------------------------------------------------


def _dump(run, trajectory_dir, method, m, label, r):
    if trajectory_dir is not None:
        path = f"{trajectory_dir}/{method}_m{m}_{label}_r{r}.csv"
        run.save_trajectory(path)


def _lqmc_estimates(potential, spec, seq, burn_seq, schedule, n_run,
                    sched_idx, m, r, label, trajectory_dir):
    d = potential.dim
    shift_rng = BaselinePrng(spec.seed, _stream(sched_idx, _ROLE_SHIFT, m, r))
    mb = dict(
        minibatch=spec.minibatch,
        minibatch_seed=spec.seed,
        minibatch_stream=_stream(sched_idx, _ROLE_MINIBATCH_LQMC, m, r),
    )
    theta0 = np.zeros(d)
    if burn_seq is None:
        cfg = ChainConfig(theta0=theta0, n_steps=n_run, schedule=schedule,
                          drive=build_drive_matrix(seq, d, rng=shift_rng), **mb)
        run = run_chain(potential, cfg)
        discard = 0
    else:
        burn_matrix = build_drive_matrix(burn_seq, d, rng=shift_rng)
        main_matrix = build_drive_matrix(seq, d, rng=shift_rng)
        cfg = ChainConfig(theta0=theta0, n_steps=burn_seq.n, schedule=schedule,
                          drive=burn_matrix, **mb)
        run = continue_chain(run_chain(potential, cfg), main_matrix, n_run)
        discard = burn_seq.n
    _dump(run, trajectory_dir, "lqmc", m, label, r)
    return _trajectory_stats(run.trajectory, discard)


def _lmc_estimates(potential, spec, burn_n, schedule, n_run, sched_idx, m, r,
                   label, trajectory_dir):
    d = potential.dim
    cfg = ChainConfig(
        theta0=np.zeros(d),
        n_steps=burn_n + n_run,
        schedule=schedule,
        drive=PseudoRandomDrive(spec.seed, _stream(sched_idx, _ROLE_NOISE, m, r)),
        minibatch=spec.minibatch,
        minibatch_seed=spec.seed,
        minibatch_stream=_stream(sched_idx, _ROLE_MINIBATCH_LMC, m, r),
    )
    run = run_chain(potential, cfg)
    _dump(run, trajectory_dir, "lmc", m, label, r)
    return _trajectory_stats(run.trajectory, burn_n)


def run_comparison(
    spec: ExperimentSpec,
    truth: GroundTruth | None = None,
    threads: int = 1,
    collect_replicates: bool = False,
    trajectory_dir: str | None = None,
) -> MseReport:
    """Execute the full comparison described by ``spec``.

    ``truth`` overrides the model's ground-truth oracle (useful when a
    reference run is cached).  ``threads`` parallelizes replicates; the
    reduction is keyed by replicate index, so results do not depend on the
    thread count.  ``trajectory_dir`` dumps every chain's trajectory as CSV
    (off by default: the files are large).
    """
    potential, _ = build_model(spec)
    if truth is None:
        truth = ground_truth_for(spec, potential)
    d = potential.dim

    override = Gf2Poly.from_mask(spec.poly_mask) if spec.poly_mask is not None else None
    configs = {}
    for m in spec.m_values:
        if override is not None and override.degree == m:
            configs[m] = LfsrConfig(
                override, DEFAULT_OFFSET if spec.offset is None else spec.offset
            )
        else:
            configs[m] = builtin_config(m, offset=spec.offset)

    burn_seq = generate_cud(builtin_config(spec.burn_in_m)) if spec.burn_in_m else None
    burn_n = burn_seq.n if burn_seq is not None else 0

    rows: list[ReportRow] = []
    replicate_rows: list[tuple] = []
    meta_drive: dict = {}
    meta_schedules: dict = {}
    diag: dict = {}

    for m in spec.m_values:
        n = (1 << m) - 1
        n_run = spec.n_override if spec.n_override is not None else n
        seq = generate_cud(configs[m])
        meta_drive[m] = {
            "n": n,
            "n_run": n_run,
            "poly_mask": hex(configs[m].poly.mask),
            "offset": configs[m].offset,
            "stored_width": coprime_width(n, d),
        }
        for sched_idx, sspec in enumerate(spec.schedules):
            schedule = sspec.resolve(burn_n + n_run)
            meta_schedules.setdefault(sspec.label, {})[m] = schedule.label()
            if (isinstance(schedule, ConstantSchedule)
                    and potential.smoothness is not None
                    and potential.strong_convexity is not None
                    and 0 < schedule.h * potential.strong_convexity < 1):
                info = contraction_info(potential.smoothness,
                                        potential.strong_convexity,
                                        schedule.h, d, n)
                diag[f"{sspec.label}/m{m}"] = {
                    "rho": info.rho, "ell": info.ell,
                    "gcd_d_ell_n": info.gcd_d_ell_n,
                }

            def lqmc_job(r):
                return _lqmc_estimates(potential, spec, seq, burn_seq, schedule,
                                       n_run, sched_idx, m, r, sspec.label,
                                       trajectory_dir)

            def lmc_job(r):
                return _lmc_estimates(potential, spec, burn_n, schedule,
                                      n_run, sched_idx, m, r, sspec.label,
                                      trajectory_dir)

            reps = range(spec.replicates)
            if threads > 1:
                with ThreadPoolExecutor(max_workers=threads) as pool:
                    lqmc_stats = list(pool.map(lqmc_job, reps))
                    lmc_stats = list(pool.map(lmc_job, reps))
            else:
                lqmc_stats = [lqmc_job(r) for r in reps]
                lmc_stats = [lmc_job(r) for r in reps]

            for method, stats in (("lmc", lmc_stats), ("lqmc", lqmc_stats)):
                for kind in spec.test_functions:
                    target = truth.values(kind)
                    errs = np.array(
                        [((s[kind] - target) ** 2).mean() for s in stats]
                    )
                    rows.append(ReportRow(
                        model=spec.model, method=method, m=m, n=n_run,
                        schedule=sspec.label, test_fn=kind,
                        mse=float(errs.mean()),
                        stderr=float(errs.std(ddof=1) / math.sqrt(len(errs))),
                        replicates=spec.replicates,
                    ))
                    if collect_replicates:
                        replicate_rows.extend(
                            (spec.model, method, m, sspec.label, kind, r, float(e))
                            for r, e in enumerate(errs)
                        )

    metadata = {
        "model": spec.model,
        "dim": d,
        "experiment_seed": spec.seed,
        "data_seed": spec.data_seed,
        "replicates": spec.replicates,
        "truth_provenance": truth.provenance,
        "burn_in_n": burn_n,
        "drive": meta_drive,
        "schedules": meta_schedules,
        "contraction": diag,
    }
    return MseReport(rows=rows, metadata=metadata, replicate_rows=replicate_rows)


# ---------------------------------------------------------------------------
# Full-period LCG demo (the classic small-generator comparison)
# ---------------------------------------------------------------------------


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def is_primitive_root(a: int, p: int) -> bool:
    """Whether a generates the multiplicative group mod prime p."""
    if a % p == 0:
        return False
    return all(pow(a, (p - 1) // q, p) != 1 for q in factorize(p - 1))


def smallest_primitive_root(p: int) -> int:
    for a in range(2, p):
        if is_primitive_root(a, p):
            return a
    raise DomainError(f"no primitive root found mod {p}")


def lcg_demo(modulus: int, multiplier: int, seed: int = 1) -> PointSet:
    """Overlapping pairs of a full-period multiplicative LCG.

    x_{i+1} = a * x_i mod p over one full period (p - 1 points, wrapping
    the final pair back to the start).  Requires p prime and a a primitive
    root mod p, so the state sequence visits every residue in 1..p-1.
    """
    p, a = modulus, multiplier
    if not _is_prime(p):
        raise ConfigurationError(f"modulus {p} is not prime")
    if not is_primitive_root(a, p):
        raise ConfigurationError(
            f"multiplier {a} is not a primitive root mod {p} (period would be short)"
        )
    if not 1 <= seed < p:
        raise ConfigurationError("seed must be in 1..p-1")
    xs = np.empty(p, dtype=np.int64)
    xs[0] = seed
    for i in range(1, p):
        xs[i] = (a * xs[i - 1]) % p
    pts = np.column_stack([xs[: p - 1], xs[1:]]) / p
    return PointSet(dimension=2, points=pts)


def iid_pointset(n: int, d: int, seed: int, stream: int = 0) -> PointSet:
    """Baseline-generator i.i.d. points, the comparison partner for demos."""
    u = BaselinePrng(seed, stream).uniform(n * d).reshape(n, d)
    return PointSet(dimension=d, points=u)
