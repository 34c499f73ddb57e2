"""Benchmark target distributions, synthetic data, and ground-truth oracles.

Each target is a ``Potential``: the negative log-density U with its
gradient (and, where available, per-datum gradients for stochastic
updates, a batched gradient for reference runs, and smoothness/convexity
constants).  Ground truth for the estimators comes from a closed form
(Gaussian posterior), adaptive quadrature (double well), or a long
small-step reference chain averaged over independent seeds.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc, expit

from .drive import clamped_normal
from .errors import ConfigurationError, DataError, DivergenceError, DomainError
from .prng import BaselinePrng


def _phi(z):
    return 0.5 * erfc(-z / np.sqrt(2.0))


# ---------------------------------------------------------------------------
# Potential and ground-truth containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Potential:
    """Negative log-density with gradient and optional extras.

    ``sgrad(theta, idx)`` must return an unbiased gradient estimate
    from the data subset ``idx``:  grad(prior) + (N/|idx|) * sum of the
    selected per-datum likelihood gradients.  ``grad_batch`` evaluates the
    exact gradient on a stack of points, used by the reference-chain
    oracle.  ``smoothness``/``strong_convexity`` are the (L, M) constants
    when known.
    """

    dim: int
    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    grad_batch: Callable[[np.ndarray], np.ndarray] | None = None
    sgrad: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    num_data: int | None = None
    smoothness: float | None = None
    strong_convexity: float | None = None
    name: str = ""


@dataclass(frozen=True)
class GroundTruth:
    """Expected values of the three test-function families per coordinate."""

    mean: np.ndarray
    second_moment: np.ndarray
    positive_prob: np.ndarray
    provenance: str  # closed-form | quadrature | long-reference-run
    mean_se: np.ndarray | None = None
    second_moment_se: np.ndarray | None = None
    positive_prob_se: np.ndarray | None = None
    error_estimate: float | None = None

    def values(self, kind: str) -> np.ndarray:
        return {
            "coordinate": self.mean,
            "square": self.second_moment,
            "indicator": self.positive_prob,
        }[kind]

    def se(self, kind: str) -> np.ndarray | None:
        return {
            "coordinate": self.mean_se,
            "square": self.second_moment_se,
            "indicator": self.positive_prob_se,
        }[kind]


# ---------------------------------------------------------------------------
# Synthetic data
# ---------------------------------------------------------------------------


def covariance_matrix(d: int) -> np.ndarray:
    """Feature covariance with geometric decay: Sigma_ij = 2**-|i-j|."""
    idx = np.arange(d)
    return 2.0 ** -np.abs(idx[:, None] - idx[None, :])


@dataclass(frozen=True)
class SyntheticDataset:
    """Seed-reproducible synthetic data for one model kind.

    For ``logistic``/``linear``: design ``X`` (N x d), responses ``y`` (N),
    true coefficients ``beta``.  For ``crossed``: ``y`` is the I x J
    observation matrix, ``beta`` packs the true latents
    (mu, a_1..a_I, b_1..b_J, log sa2, log sb2), and ``X`` is None.
    """

    kind: str
    X: np.ndarray | None
    y: np.ndarray
    beta: np.ndarray
    seed: int
    noise_var: float = 0.25

    def save(self, path) -> None:
        with open(path, "w") as fh:
            n, d = (self.y.shape[0], self.X.shape[1]) if self.X is not None else self.y.shape
            fh.write(f"# lqmc-dataset kind={self.kind} N={n} d={d} "
                     f"seed={self.seed} noise_var={self.noise_var:.17g}\n")
            fh.write(",".join("%.17g" % b for b in self.beta) + "\n")
            rows = np.column_stack([self.y, self.X]) if self.X is not None else self.y
            np.savetxt(fh, np.atleast_2d(rows), fmt="%.17g", delimiter=",")


def load_dataset(path) -> SyntheticDataset:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# lqmc-dataset "):
            raise DataError(f"{path}: not a dataset file")
        meta = dict(kv.split("=", 1) for kv in header.split()[2:])
        beta = np.array([float(v) for v in fh.readline().split(",")])
        body = np.loadtxt(io.StringIO(fh.read()), delimiter=",", ndmin=2)
    kind = meta["kind"]
    if kind == "crossed":
        X, y = None, body
    else:
        X, y = body[:, 1:], body[:, 0]
    return SyntheticDataset(kind=kind, X=X, y=y, beta=beta,
                            seed=int(meta["seed"]), noise_var=float(meta["noise_var"]))


def synthesize_data(kind: str, n_obs: int, dim: int, seed: int,
                    noise_var: float = 0.25) -> SyntheticDataset:
    """Draw a dataset from the generative model itself.

    ``logistic``/``linear``: beta ~ N(0, I_dim), rows of X ~ N(0, Sigma)
    via the Cholesky factor of ``covariance_matrix(dim)``, responses from
    the likelihood.  ``crossed``: n_obs = I, dim = J, all latents from
    their priors.  Byte-identical output for identical arguments.
    """
    if kind not in ("logistic", "linear", "crossed"):
        raise ConfigurationError(f"unknown dataset kind {kind!r}")
    if n_obs < 0 or dim < 1:
        raise ConfigurationError("sizes must be positive")
    rng = BaselinePrng(seed)
    if kind == "crossed":
        i_sz, j_sz = n_obs, dim
        mu = clamped_normal(rng.uniform(1))[0]
        lam = clamped_normal(rng.uniform(2))
        a = np.exp(lam[0] / 2.0) * clamped_normal(rng.uniform(i_sz))
        b = np.exp(lam[1] / 2.0) * clamped_normal(rng.uniform(j_sz))
        noise = clamped_normal(rng.uniform(i_sz * j_sz)).reshape(i_sz, j_sz)
        y = mu + a[:, None] + b[None, :] + noise
        beta = np.concatenate([[mu], a, b, lam])
        return SyntheticDataset(kind=kind, X=None, y=y, beta=beta, seed=seed)
    beta = clamped_normal(rng.uniform(dim))
    chol = np.linalg.cholesky(covariance_matrix(dim))
    X = clamped_normal(rng.uniform(n_obs * dim)).reshape(n_obs, dim) @ chol.T
    eta = X @ beta
    if kind == "logistic":
        y = (rng.uniform(n_obs) < expit(eta)).astype(np.float64)
        return SyntheticDataset(kind=kind, X=X, y=y, beta=beta, seed=seed)
    y = eta + np.sqrt(noise_var) * clamped_normal(rng.uniform(n_obs))
    return SyntheticDataset(kind=kind, X=X, y=y, beta=beta, seed=seed,
                            noise_var=noise_var)


# ---------------------------------------------------------------------------
# Bayesian logistic regression
# ---------------------------------------------------------------------------


def logistic_potential(data: SyntheticDataset) -> Potential:
    """U(b) = sum_i [log(1 + exp(x_i.b)) - y_i x_i.b] + ||b||^2 / 2.

    Labels must be 0/1.  The log term is evaluated as logaddexp(0, .) so
    large linear predictors cannot overflow.  Per-datum gradients are
    available for minibatch updates.
    """
    X, y = data.X, np.asarray(data.y, dtype=np.float64)
    if y.size and not np.all((y == 0.0) | (y == 1.0)):
        raise DataError("logistic labels must be 0 or 1")
    n_data, d = X.shape

    def value(beta):
        t = X @ beta
        return float(np.logaddexp(0.0, t).sum() - y @ t + 0.5 * beta @ beta)

    def grad(beta):
        return X.T @ (expit(X @ beta) - y) + beta

    def grad_batch(thetas):
        return (expit(thetas @ X.T) - y) @ X + thetas

    def sgrad(beta, idx):
        xb = X[idx]
        scale = n_data / len(idx)
        return beta + scale * (xb.T @ (expit(xb @ beta) - y[idx]))

    lam_max = float(np.linalg.eigvalsh(X.T @ X).max()) if n_data else 0.0
    return Potential(
        dim=d, value=value, grad=grad, grad_batch=grad_batch, sgrad=sgrad,
        num_data=n_data, smoothness=lam_max / 4.0 + 1.0, strong_convexity=1.0,
        name="logistic",
    )


# ---------------------------------------------------------------------------
# Bayesian linear regression
# ---------------------------------------------------------------------------


def linear_regression_potential(data: SyntheticDataset, noise_var: float | None = None) -> Potential:
    """U(b) = ||y - Xb||^2 / (2 s^2) + ||b||^2 / 2 with declared (L, M)."""
    sigma2 = data.noise_var if noise_var is None else noise_var
    if not sigma2 > 0:
        raise ConfigurationError("noise variance must be positive")
    X, y = data.X, data.y
    n_data, d = X.shape
    hess = X.T @ X / sigma2 + np.eye(d)
    eigs = np.linalg.eigvalsh(hess)

    def value(beta):
        r = X @ beta - y
        return float(0.5 * (r @ r) / sigma2 + 0.5 * beta @ beta)

    def grad(beta):
        return X.T @ (X @ beta - y) / sigma2 + beta

    def grad_batch(thetas):
        return (thetas @ X.T - y) @ X / sigma2 + thetas

    def sgrad(beta, idx):
        xb = X[idx]
        scale = n_data / len(idx)
        return beta + scale * (xb.T @ (xb @ beta - y[idx])) / sigma2

    return Potential(
        dim=d, value=value, grad=grad, grad_batch=grad_batch, sgrad=sgrad,
        num_data=n_data, smoothness=float(eigs[-1]), strong_convexity=float(eigs[0]),
        name="linear",
    )


def closed_form_posterior(data: SyntheticDataset, noise_var: float | None = None) -> GroundTruth:
    """Exact Gaussian posterior moments for the linear model.

    mean = (X'X/s^2 + I)^{-1} X'y / s^2, cov = (X'X/s^2 + I)^{-1};
    E[b_j^2] = mean_j^2 + cov_jj and P(b_j > 0) = Phi(mean_j / sqrt(cov_jj)).
    """
    sigma2 = data.noise_var if noise_var is None else noise_var
    X, y = data.X, data.y
    d = X.shape[1]
    cov = np.linalg.inv(X.T @ X / sigma2 + np.eye(d))
    mean = cov @ (X.T @ y) / sigma2
    var = np.diag(cov)
    return GroundTruth(
        mean=mean,
        second_moment=mean**2 + var,
        positive_prob=_phi(mean / np.sqrt(var)),
        provenance="closed-form",
    )


# ---------------------------------------------------------------------------
# Crossed random effects
# ---------------------------------------------------------------------------


def crossed_effects_potential(Y: np.ndarray) -> Potential:
    """Hierarchical Gaussian model on (mu, a_1..a_I, b_1..b_J, la, lb).

    Observations Y_ij ~ N(mu + a_i + b_j, 1); mu and both log-variances
    la = log sa^2, lb = log sb^2 have standard normal priors; the effects
    a_i ~ N(0, e^la), b_j ~ N(0, e^lb).  Sampling the log-variances keeps
    the state space unconstrained:

        U = sum r_ij^2/2 + mu^2/2
            + e^{-la} sum a_i^2/2 + (I/2) la + la^2/2
            + e^{-lb} sum b_j^2/2 + (J/2) lb + lb^2/2
    """
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2 or Y.shape[0] < 1 or Y.shape[1] < 1:
        raise ConfigurationError("Y must be a nonempty I x J matrix")
    i_sz, j_sz = Y.shape
    d = i_sz + j_sz + 3

    def unpack(th):
        return th[0], th[1 : 1 + i_sz], th[1 + i_sz : 1 + i_sz + j_sz], th[-2], th[-1]

    def value(th):
        mu, a, b, la, lb = unpack(th)
        r = Y - mu - a[:, None] - b[None, :]
        return float(
            0.5 * (r * r).sum() + 0.5 * mu * mu
            + 0.5 * np.exp(-la) * (a @ a) + 0.5 * i_sz * la + 0.5 * la * la
            + 0.5 * np.exp(-lb) * (b @ b) + 0.5 * j_sz * lb + 0.5 * lb * lb
        )

    def grad(th):
        mu, a, b, la, lb = unpack(th)
        r = Y - mu - a[:, None] - b[None, :]
        g = np.empty(d)
        g[0] = -r.sum() + mu
        g[1 : 1 + i_sz] = -r.sum(axis=1) + a * np.exp(-la)
        g[1 + i_sz : 1 + i_sz + j_sz] = -r.sum(axis=0) + b * np.exp(-lb)
        g[-2] = -0.5 * np.exp(-la) * (a @ a) + 0.5 * i_sz + la
        g[-1] = -0.5 * np.exp(-lb) * (b @ b) + 0.5 * j_sz + lb
        return g

    def grad_batch(thetas):
        mu = thetas[:, 0]
        a = thetas[:, 1 : 1 + i_sz]
        b = thetas[:, 1 + i_sz : 1 + i_sz + j_sz]
        la = thetas[:, -2]
        lb = thetas[:, -1]
        r = Y[None] - mu[:, None, None] - a[:, :, None] - b[:, None, :]
        g = np.empty_like(thetas)
        g[:, 0] = -r.sum(axis=(1, 2)) + mu
        g[:, 1 : 1 + i_sz] = -r.sum(axis=2) + a * np.exp(-la)[:, None]
        g[:, 1 + i_sz : 1 + i_sz + j_sz] = -r.sum(axis=1) + b * np.exp(-lb)[:, None]
        g[:, -2] = -0.5 * np.exp(-la) * (a * a).sum(axis=1) + 0.5 * i_sz + la
        g[:, -1] = -0.5 * np.exp(-lb) * (b * b).sum(axis=1) + 0.5 * j_sz + lb
        return g

    return Potential(dim=d, value=value, grad=grad, grad_batch=grad_batch,
                     name="crossed")


# ---------------------------------------------------------------------------
# Double well
# ---------------------------------------------------------------------------


def double_well_potential() -> Potential:
    """U(x) = x^2/4 - log(1 + x^2)/2: two wells at +-1, not convex."""

    def value(th):
        x = th[0]
        return float(0.25 * x * x - 0.5 * np.log1p(x * x))

    def grad(th):
        x = th[0]
        return np.array([0.5 * x - x / (1.0 + x * x)])

    def grad_batch(thetas):
        x = thetas[:, 0]
        return (0.5 * x - x / (1.0 + x * x))[:, None]

    return Potential(dim=1, value=value, grad=grad, grad_batch=grad_batch,
                     name="double_well")


_DW_RADIUS = 20.0  # exp(-R^2/4) ~ 4e-44: truncated tail mass far below 1e-12


def _dw_weight(x):
    return np.exp(-0.25 * x * x) * np.sqrt(1.0 + x * x)


def _dw_moment_quad() -> tuple[float, float, float]:
    """(E[x^2], normalizer, abs error estimate) by adaptive quadrature."""
    z, ze = quad(_dw_weight, -_DW_RADIUS, _DW_RADIUS, epsabs=1e-13, epsrel=1e-13)
    m2, me = quad(lambda x: x * x * _dw_weight(x), -_DW_RADIUS, _DW_RADIUS,
                  epsabs=1e-13, epsrel=1e-13)
    val = m2 / z
    return val, z, (me + abs(val) * ze) / z


def _dw_moment_hermite(order: int = 300) -> tuple[float, float]:
    """(E[x^2], normalizer) by Gauss-Hermite after x = 2t (weight exp(-t^2))."""
    t, w = np.polynomial.hermite.hermgauss(order)
    g = np.sqrt(1.0 + 4.0 * t * t)
    z = 2.0 * (w @ g)
    m2 = 2.0 * (w @ (4.0 * t * t * g))
    return m2 / z, z


def double_well_truth() -> GroundTruth:
    """E[x] = 0 and P(x > 0) = 1/2 by symmetry; E[x^2] by dual quadrature.

    The adaptive rule on the truncated interval and an independent
    Gauss-Hermite rule on the whole line must agree to 1e-8, including on
    the normalizer; their disagreement feeds the error estimate.
    """
    m2_q, z_q, err_q = _dw_moment_quad()
    m2_h, z_h = _dw_moment_hermite()
    if abs(m2_q - m2_h) > 1e-8 or abs(z_q - z_h) > 1e-8 * z_q:
        raise DomainError("quadrature schemes disagree; numerical environment suspect")
    return GroundTruth(
        mean=np.zeros(1),
        second_moment=np.array([m2_q]),
        positive_prob=np.full(1, 0.5),
        provenance="quadrature",
        error_estimate=max(err_q, abs(m2_q - m2_h)),
    )


# ---------------------------------------------------------------------------
# Helpers: quadratic target, gradient checking, reference chains
# ---------------------------------------------------------------------------


def standard_gaussian_potential(dim: int) -> Potential:
    """U = ||theta||^2 / 2 (L = M = 1): the exactly-contracting test target."""
    return Potential(
        dim=dim,
        value=lambda th: float(0.5 * th @ th),
        grad=lambda th: th,
        grad_batch=lambda ths: ths,
        smoothness=1.0,
        strong_convexity=1.0,
        name="gaussian",
    )


def finite_difference_gradient(value, theta: np.ndarray, rel_step: float = 1e-6) -> np.ndarray:
    """Central differences with step rel_step * (1 + ||theta||)."""
    theta = np.asarray(theta, dtype=np.float64)
    h = rel_step * (1.0 + np.linalg.norm(theta))
    g = np.empty_like(theta)
    for j in range(len(theta)):
        up, dn = theta.copy(), theta.copy()
        up[j] += h
        dn[j] -= h
        g[j] = (value(up) - value(dn)) / (2.0 * h)
    return g


def max_gradient_error(potential: Potential, n_probes: int = 100, seed: int = 0,
                       scale: float = 1.0) -> float:
    """Worst relative finite-difference mismatch over random probe points."""
    rng = BaselinePrng(seed, stream=915)
    worst = 0.0
    for _ in range(n_probes):
        theta = scale * clamped_normal(rng.uniform(potential.dim))
        g = potential.grad(theta)
        fd = finite_difference_gradient(potential.value, theta)
        worst = max(worst, float(np.linalg.norm(fd - g) / max(np.linalg.norm(g), 1.0)))
    return worst


def save_ground_truth(gt: GroundTruth, path) -> None:
    """JSON dump of a GroundTruth, `load_ground_truth` round-trips it."""
    import json

    payload = {"provenance": gt.provenance, "error_estimate": gt.error_estimate}
    for name in ("mean", "second_moment", "positive_prob",
                 "mean_se", "second_moment_se", "positive_prob_se"):
        arr = getattr(gt, name)
        payload[name] = None if arr is None else [float(v) for v in arr]
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_ground_truth(path) -> GroundTruth:
    import json

    with open(path) as fh:
        payload = json.load(fh)
    arrays = {
        name: None if payload[name] is None else np.array(payload[name])
        for name in ("mean", "second_moment", "positive_prob",
                     "mean_se", "second_moment_se", "positive_prob_se")
    }
    return GroundTruth(provenance=payload["provenance"],
                       error_estimate=payload["error_estimate"], **arrays)


def load_ground_truth_if_exists(path) -> GroundTruth | None:
    import os

    return load_ground_truth(path) if os.path.exists(path) else None


def reference_ground_truth(
    potential: Potential,
    h: float,
    n_steps: int,
    n_chains: int,
    seed: int,
    stream: int = 777,
    discard_fraction: float = 0.125,
    chunk: int = 4096,
) -> GroundTruth:
    """Long small-step chains as a ground-truth oracle.

    Runs ``n_chains`` independent plain-Langevin chains side by side from
    the origin (one baseline stream, partitioned by chain), discards the
    leading fraction, and averages the three test-function families over
    the rest.  Standard errors are across chains.  This is a separate
    vectorized implementation, not the sequential sampler under test.
    """
    if potential.grad_batch is None:
        raise ConfigurationError("reference runs need a batched gradient")
    d = potential.dim
    s = n_chains
    rng = BaselinePrng(seed, stream)
    theta = np.zeros((s, d))
    discard = int(discard_fraction * n_steps)
    sq2h = np.sqrt(2.0 * h)
    sums = np.zeros((3, s, d))
    kept = 0
    done = 0
    while done < n_steps:
        b = min(chunk, n_steps - done)
        xi = clamped_normal(rng.uniform(b * s * d)).reshape(b, s, d)
        block = np.empty((b, s, d))
        for k in range(b):
            theta = theta - h * potential.grad_batch(theta) + sq2h * xi[k]
            block[k] = theta
        if not np.all(np.abs(theta) < 1e8):
            raise DivergenceError(done + b, "reference chain diverged")
        done += b
        lo = max(0, discard - (done - b))
        if lo < b:
            tail = block[lo:]
            sums[0] += tail.sum(axis=0)
            sums[1] += (tail**2).sum(axis=0)
            sums[2] += (tail > 0).sum(axis=0)
            kept += b - lo
    per_chain = sums / kept  # (3, s, d)
    mean = per_chain.mean(axis=1)
    se = per_chain.std(axis=1, ddof=1) / np.sqrt(s)
    return GroundTruth(
        mean=mean[0], second_moment=mean[1], positive_prob=mean[2],
        provenance="long-reference-run",
        mean_se=se[0], second_moment_se=se[1], positive_prob_se=se[2],
    )
