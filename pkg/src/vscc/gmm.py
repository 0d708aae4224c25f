"""Gaussian mixtures fitted by EM, with BIC selection over (G, covariance model).

Six covariance structures are supported, crossing shape (spherical, diagonal,
full) with whether components share one covariance or each has its own:

=================  =======  ==========================
model              mclust   covariance parameters
=================  =======  ==========================
SphericalEqual     EII      1
SphericalVarying   VII      G
DiagonalEqual      EEI      p
DiagonalVarying    VVI      G p
FullEqual          EEE      p (p + 1) / 2
FullVarying        VVV      G p (p + 1) / 2
=================  =======  ==========================

BIC is reported as ``2 loglik - k log n`` so larger is better.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_triangular

from .data_model import Dataset, PartialPartition, SoftAssignment
from .errors import (
    AllFitsFailed,
    ConfigError,
    DegenerateFit,
    EmptyKnownGroupError,
    TooFewObservations,
)
from .kmeans import kmeans

LOG_2PI = math.log(2.0 * math.pi)


class CovarianceModel(enum.Enum):
    SPHERICAL_EQUAL = "SphericalEqual"
    SPHERICAL_VARYING = "SphericalVarying"
    DIAGONAL_EQUAL = "DiagonalEqual"
    DIAGONAL_VARYING = "DiagonalVarying"
    FULL_EQUAL = "FullEqual"
    FULL_VARYING = "FullVarying"

    @property
    def shape(self) -> str:
        return self.value.split("Equal")[0].split("Varying")[0].lower()

    @property
    def varying(self) -> bool:
        return self.value.endswith("Varying")

    @property
    def mclust_name(self) -> str:
        return {
            "SphericalEqual": "EII",
            "SphericalVarying": "VII",
            "DiagonalEqual": "EEI",
            "DiagonalVarying": "VVI",
            "FullEqual": "EEE",
            "FullVarying": "VVV",
        }[self.value]

    @classmethod
    def parse(cls, name: str) -> "CovarianceModel":
        for m in cls:
            if name in (m.value, m.name, m.mclust_name):
                return m
        raise ConfigError(f"unknown covariance model {name!r}")


ALL_MODELS = tuple(CovarianceModel)


def n_parameters(model: CovarianceModel, G: int, p: int) -> int:
    """Free parameters: mixing weights, means and the covariance structure."""
    cov = {
        CovarianceModel.SPHERICAL_EQUAL: 1,
        CovarianceModel.SPHERICAL_VARYING: G,
        CovarianceModel.DIAGONAL_EQUAL: p,
        CovarianceModel.DIAGONAL_VARYING: G * p,
        CovarianceModel.FULL_EQUAL: p * (p + 1) // 2,
        CovarianceModel.FULL_VARYING: G * p * (p + 1) // 2,
    }[model]
    return (G - 1) + G * p + cov


@dataclass(frozen=True)
class FitConfig:
    g_range: tuple[int, int] = (1, 9)
    models: tuple[CovarianceModel, ...] = ALL_MODELS
    max_iter: int = 500
    rel_tol: float = 1e-8
    n_restarts: int = 10
    seed: int = 0
    ridge: float = 1e-6
    kmeans_iter: int = 10
    screen_iter: int = 20

    def __post_init__(self):
        g_min, g_max = (int(g) for g in self.g_range)
        object.__setattr__(self, "g_range", (g_min, g_max))
        object.__setattr__(self, "models", tuple(CovarianceModel(m) if not isinstance(m, CovarianceModel) else m for m in self.models))
        if g_min < 1 or g_max < g_min:
            raise ConfigError(f"invalid g_range {self.g_range}")
        if not self.models:
            raise ConfigError("at least one covariance model is required")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be at least 1")
        if not self.rel_tol > 0:
            raise ConfigError("rel_tol must be positive")
        if self.n_restarts < 1:
            raise ConfigError("n_restarts must be at least 1")
        if self.ridge < 0:
            raise ConfigError("ridge must be non-negative")
        if self.screen_iter < 0:
            raise ConfigError("screen_iter must be non-negative")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in 64 unsigned bits")

    def with_g(self, g_min: int, g_max: int | None = None) -> "FitConfig":
        return replace(self, g_range=(g_min, g_min if g_max is None else g_max))

    @property
    def groups(self) -> range:
        return range(self.g_range[0], self.g_range[1] + 1)


@dataclass(frozen=True)
class FittedMixture:
    weights: np.ndarray
    means: np.ndarray  # G x p
    covariances: np.ndarray  # G x p x p, expanded from the model's parameterisation
    loglik: float
    bic: float
    assignment: SoftAssignment
    model: CovarianceModel
    G: int
    n_iter: int = 0
    converged: bool = True
    loglik_trace: tuple[float, ...] = ()
    n_params: int = 0

    @property
    def p(self) -> int:
        return self.means.shape[1]


# -- parameter containers -------------------------------------------------------


@dataclass
class _Params:
    weights: np.ndarray
    means: np.ndarray
    # spherical/diagonal: G x p variances; full: G x p x p lower Cholesky factors
    var: np.ndarray | None = None
    chol: np.ndarray | None = None

    def covariances(self) -> np.ndarray:
        if self.chol is not None:
            return np.einsum("gij,gkj->gik", self.chol, self.chol)
        return np.stack([np.diag(v) for v in self.var])


def _safe_cholesky(cov: np.ndarray, ridge: float) -> np.ndarray:
    try:
        L = np.linalg.cholesky(cov)
        if np.all(np.diag(L) > 0) and np.all(np.isfinite(L)):
            return L
    except np.linalg.LinAlgError:
        pass
    if ridge > 0:
        try:
            L = np.linalg.cholesky(cov + ridge * np.eye(cov.shape[0]))
            if np.all(np.diag(L) > 0) and np.all(np.isfinite(L)):
                return L
        except np.linalg.LinAlgError:
            pass
    raise DegenerateFit("covariance matrix is not positive definite even after regularisation")


def _floor_var(v: np.ndarray, ridge: float) -> np.ndarray:
    bad = ~(v > 0)
    if bad.any():
        if ridge <= 0:
            raise DegenerateFit("a component variance collapsed to zero")
        v = np.where(bad, np.maximum(v, 0.0) + ridge, v)
    return v


def _m_step(x: np.ndarray, z: np.ndarray, model: CovarianceModel, ridge: float) -> _Params:
    n, p = x.shape
    nk = z.sum(axis=0)
    if np.any(nk < 1.0) and z.shape[1] > 1:
        raise DegenerateFit("a component holds less than one observation's worth of mass")
    weights = nk / n
    means = (z.T @ x) / nk[:, None]
    G = z.shape[1]
    shape, varying = model.shape, model.varying

    if shape in ("spherical", "diagonal"):
        # per-component, per-variable scatter sums: G x p (x is centred by the caller)
        scatter = np.maximum(z.T @ (x * x) - nk[:, None] * means * means, 0.0)
        if shape == "spherical":
            if varying:
                lam = scatter.sum(1) / (p * nk)
            else:
                lam = np.full(G, scatter.sum() / (p * n))
            var = np.repeat(_floor_var(lam, ridge)[:, None], p, axis=1)
        else:
            if varying:
                var = scatter / nk[:, None]
            else:
                var = np.tile(scatter.sum(0) / n, (G, 1))
            var = _floor_var(var, ridge)
        return _Params(weights, means, var=var)

    # scatter about each component mean, via raw second moments of centred x
    if varying:
        c = np.matmul(z.T[:, None, :] * x.T[None, :, :], x) / nk[:, None, None]
        c -= means[:, :, None] * means[:, None, :]
        c = 0.5 * (c + c.transpose(0, 2, 1))
        try:
            chol = np.linalg.cholesky(c)
            ok = np.all(np.isfinite(chol)) and np.all(np.diagonal(chol, axis1=1, axis2=2) > 0)
        except np.linalg.LinAlgError:
            ok = False
        if not ok:
            chol = np.stack([_safe_cholesky(cg, ridge) for cg in c])
    else:
        pooled = (x.T @ x - (means * nk[:, None]).T @ means) / n
        L = _safe_cholesky(0.5 * (pooled + pooled.T), ridge)
        chol = np.repeat(L[None], G, axis=0)
    return _Params(weights, means, chol=chol)


def _log_density(x: np.ndarray, params: _Params, model: CovarianceModel) -> np.ndarray:
    """n x G matrix of log N(x_i | mu_g, Sigma_g)."""
    n, p = x.shape
    G = params.means.shape[0]
    if params.var is not None:
        var = params.var
        prec = 1.0 / var
        out = (x * x) @ prec.T - 2.0 * x @ (params.means * prec).T + (params.means**2 * prec).sum(1)[None, :]
        out = np.maximum(out, 0.0)
        return -0.5 * (p * LOG_2PI + np.log(var).sum(1)[None, :] + out)

    out = np.empty((n, G))
    if not model.varying:
        L = params.chol[0]
        y = solve_triangular(L, x.T, lower=True, check_finite=False)  # p x n
        m = solve_triangular(L, params.means.T, lower=True, check_finite=False)  # p x G
        logdet = 2.0 * np.log(np.diag(L)).sum()
        for g in range(G):
            out[:, g] = ((y - m[:, g : g + 1]) ** 2).sum(0)
        return -0.5 * (p * LOG_2PI + logdet + out)
    # one batched triangular inverse is far cheaper than G separate solves at small p
    linv = np.linalg.inv(params.chol)  # G x p x p
    y = np.matmul(x[None, :, :] - params.means[:, None, :], linv.transpose(0, 2, 1))
    out = (y * y).sum(-1).T
    logdets = 2.0 * np.log(np.diagonal(params.chol, axis1=1, axis2=2)).sum(1)
    return -0.5 * (p * LOG_2PI + logdets[None, :] + out)


def _e_step(x, params, model, clamp=None):
    """Posterior responsibilities and the observed-data log-likelihood.

    ``clamp`` is an (index array, one-hot rows) pair of labelled observations
    whose responsibilities are fixed; they contribute log(pi_g f_g(x_i)) for
    their known group instead of the mixture density.
    """
    with np.errstate(divide="ignore"):
        logw = np.log(params.weights)
    logp = _log_density(x, params, model) + logw[None, :]
    top = logp.max(axis=1, keepdims=True)
    if not np.all(np.isfinite(top)):
        raise DegenerateFit("an observation has zero density under every component")
    e = np.exp(logp - top)
    s = e.sum(axis=1, keepdims=True)
    lse = (top + np.log(s))[:, 0]
    z = e / s
    if clamp is None:
        ll = float(lse.sum())
    else:
        idx, onehot = clamp
        free = np.ones(x.shape[0], dtype=bool)
        free[idx] = False
        ll = float(lse[free].sum() + (logp[idx] * onehot).sum())
        z[idx] = onehot
    if not np.isfinite(ll):
        raise DegenerateFit("log-likelihood is not finite")
    return z, ll


class _EMRun:
    """One EM trajectory that can be advanced in instalments."""

    def __init__(self, x, z0, model, cfg: FitConfig, clamp=None):
        self.x, self.model, self.cfg, self.clamp = x, model, cfg, clamp
        self.params = _m_step(x, z0, model, cfg.ridge)
        self.z = z0
        self.trace: list[float] = []
        self.converged = False

    @property
    def loglik(self) -> float:
        return self.trace[-1]

    def advance(self, n_iter: int) -> "_EMRun":
        for _ in range(n_iter):
            if self.converged or len(self.trace) >= self.cfg.max_iter:
                break
            if self.trace:
                self.params = _m_step(self.x, self.z, self.model, self.cfg.ridge)
            self.z, ll = _e_step(self.x, self.params, self.model, self.clamp)
            self.trace.append(ll)
            if len(self.trace) > 1 and abs(ll - self.trace[-2]) <= self.cfg.rel_tol * abs(ll):
                self.converged = True
        return self

    def finish(self) -> "_EMRun":
        return self.advance(self.cfg.max_iter)


def _check_collapse(params: _Params, scale: np.ndarray, ridge: float) -> None:
    """Reject parameters in which some component covariance is (near) singular.

    Eigenvalues are measured after rescaling every variable by its overall
    variance, so the floor is unit-free.
    """
    floor = max(10.0 * ridge, 1e-12)
    if params.var is not None:
        smallest = (params.var / scale[None, :]).min()
    else:
        inv_sd = 1.0 / np.sqrt(scale)
        smallest = min(
            np.linalg.eigvalsh((L @ L.T) * inv_sd[:, None] * inv_sd[None, :])[0]
            for L in params.chol
        )
    if not smallest > floor:
        raise DegenerateFit("a component covariance collapsed onto a lower-dimensional set")


def _package(x, run: _EMRun, G, shift) -> FittedMixture:
    params, z, trace, converged, model = run.params, run.z, run.trace, run.converged, run.model
    n, p = x.shape
    k = n_parameters(model, G, p)
    ll = trace[-1]
    return FittedMixture(
        weights=params.weights.copy(),
        means=params.means + shift[None, :],
        covariances=params.covariances(),
        loglik=ll,
        bic=2.0 * ll - k * math.log(n),
        assignment=SoftAssignment(z),
        model=model,
        G=G,
        n_iter=len(trace),
        converged=converged,
        loglik_trace=tuple(trace),
        n_params=k,
    )


def _cell_rng(seed: int, G: int, restart: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(G), int(restart)]))


def initial_partitions(x: np.ndarray, G: int, cfg: FitConfig) -> list[np.ndarray]:
    """k-means starting partitions (0-based labels) for ``G`` components.

    Seeds depend only on ``(cfg.seed, G, restart)`` so every covariance model
    with the same ``G`` starts from the same partitions.
    """
    if G == 1:
        return [np.zeros(x.shape[0], dtype=np.int64)]
    starts, seen = [], set()
    for r in range(cfg.n_restarts):
        labels = kmeans(x, G, _cell_rng(cfg.seed, G, r), cfg.kmeans_iter)
        key = _canonical(labels)
        if key not in seen:
            seen.add(key)
            starts.append(labels)
    return starts


def _canonical(labels: np.ndarray) -> bytes:
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    remap = np.empty_like(order)
    remap[order] = np.arange(order.size)
    return remap[labels].tobytes()


def _onehot(labels: np.ndarray, G: int) -> np.ndarray:
    z = np.zeros((labels.size, G))
    z[np.arange(labels.size), labels] = 1.0
    return z


def fit_em(ds: Dataset, G: int, model: CovarianceModel, cfg: FitConfig | None = None,
           starts: list[np.ndarray] | None = None) -> FittedMixture:
    """Fit one (G, model) cell, keeping the restart with the highest log-likelihood."""
    cfg = cfg or FitConfig()
    model = CovarianceModel(model)
    shift = ds.values.mean(axis=0)
    x = ds.values - shift
    if G < 1:
        raise ConfigError("G must be at least 1")
    if ds.n <= G:
        raise TooFewObservations(f"{ds.n} observations cannot support {G} components")
    if starts is None:
        starts = initial_partitions(x, G, cfg)
    scale = x.var(axis=0)
    # screen every start with a short EM burst, then finish them best-first
    runs, failures = [], []
    for labels in starts:
        try:
            runs.append(_EMRun(x, _onehot(labels, G), model, cfg).advance(cfg.screen_iter))
        except DegenerateFit as exc:
            failures.append(exc)
    runs.sort(key=lambda r: -r.loglik)
    for run in runs:
        try:
            run.finish()
            _check_collapse(run.params, scale, cfg.ridge)
        except DegenerateFit as exc:
            failures.append(exc)
            continue
        return _package(x, run, G, shift)
    raise DegenerateFit(f"every start failed for G={G}, {model.value}: {failures[0] if failures else 'no starts'}")


@dataclass
class BicGrid:
    """Every attempted (G, model) cell with its fit or failure reason."""

    fits: dict[tuple[int, CovarianceModel], FittedMixture] = field(default_factory=dict)
    failures: dict[tuple[int, CovarianceModel], str] = field(default_factory=dict)

    def best(self) -> FittedMixture:
        if not self.fits:
            raise AllFitsFailed("no (G, model) combination could be fitted: "
                                + "; ".join(f"G={g} {m.value}: {r}" for (g, m), r in self.failures.items()))
        # dict order is grid order, so max() keeps the first of tied cells
        return max(self.fits.values(), key=lambda f: f.bic)


def bic_grid(ds: Dataset, cfg: FitConfig | None = None) -> BicGrid:
    cfg = cfg or FitConfig()
    grid = BicGrid()
    for G in cfg.groups:
        if ds.n <= G:
            for model in cfg.models:
                grid.failures[(G, model)] = "too few observations"
            continue
        starts = initial_partitions(ds.values - ds.values.mean(axis=0), G, cfg)
        for model in cfg.models:
            try:
                grid.fits[(G, model)] = fit_em(ds, G, model, cfg, starts=starts)
            except DegenerateFit as exc:
                grid.failures[(G, model)] = str(exc)
    return grid


def select_bic(ds: Dataset, cfg: FitConfig | None = None) -> FittedMixture:
    """Fit every (G, model) in the grid and return the one with the largest BIC."""
    return bic_grid(ds, cfg).best()


def fit_classification(ds: Dataset, known: PartialPartition, cfg: FitConfig | None = None) -> FittedMixture:
    """Mixture fit with labelled rows clamped to their known group.

    ``G`` is fixed to the number of declared groups; the covariance model is
    chosen by BIC among ``cfg.models``.
    """
    cfg = cfg or FitConfig()
    if known.n != ds.n:
        raise TooFewObservations(f"{known.n} labels for {ds.n} observations")
    counts = known.known_counts()
    for g in range(known.G):
        if counts[g] == 0:
            raise EmptyKnownGroupError(g + 1)
    G = known.G
    shift = ds.values.mean(axis=0)
    x = ds.values - shift
    idx = np.flatnonzero(known.known)
    onehot = _onehot(known.labels[idx] - 1, G)
    clamp = (idx, onehot)
    scale = x.var(axis=0)
    fits, failures = [], []
    for model in cfg.models:
        try:
            # start from the labelled rows alone
            params = _m_step(x[idx], onehot, model, cfg.ridge)
            z0, _ = _e_step(x, params, model, clamp)
            run_cfg = cfg if idx.size < ds.n else replace(cfg, max_iter=1)
            run = _EMRun(x, z0, model, run_cfg, clamp).finish()
            _check_collapse(run.params, scale, cfg.ridge)
        except DegenerateFit as exc:
            failures.append(f"{model.value}: {exc}")
            continue
        fits.append(_package(x, run, G, shift))
    if not fits:
        raise AllFitsFailed("classification failed for every model: " + "; ".join(failures))
    return max(fits, key=lambda f: f.bic)


def posterior(fit: FittedMixture, ds: Dataset) -> np.ndarray:
    """Recompute responsibilities of ``ds`` under the fitted parameters."""
    model = fit.model
    shift = ds.values.mean(axis=0)
    means = fit.means - shift[None, :]
    if model.shape == "full":
        chol = np.stack([np.linalg.cholesky(c) for c in fit.covariances])
        params = _Params(fit.weights, means, chol=chol)
    else:
        params = _Params(fit.weights, means, var=np.stack([np.diag(c) for c in fit.covariances]))
    z, _ = _e_step(ds.values - shift, params, model)
    return z
