"""Sparse reconstruction solvers.

Fiber and slice solvers (ISTA, FISTA), the hybrid l1 / 3D total-variation
tensor solver (split-Bregman with per-axis variable splitting), a shallow
TV-denoise enhancement stage, the light slice-wise-then-enhance pipeline,
and a toy learned ISTA with per-block scalar step/threshold parameters.

Every solver minimizes some specialization of

    1/2 ||Y - A(X)||_F^2 + lambda1 ||X||_1 + lambda2 TV(X)

where A acts fiber-wise through the steering matrix and TV is the
anisotropic 3D total variation of :func:`tomosar.tensor.tv_norm`.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from . import tensor
from ._pool import run_indexed
from .errors import ConfigurationError, DivergenceError
from .sensing import adjoint, forward, spectral_norm_sq


@dataclass
class SolverConfig:
    """User-facing solver knobs; ``None`` means derive the documented default.

    Defaults: alpha = alpha_factor / spectral_norm_sq(A), where the proximal
    gradient solvers use factor 0.9 (their descent argument needs a step
    <= 1 / L) and the splitting solver uses 1.8 (its data update is a plain
    gradient step, stable below 2 / L); lambda1 = 0.05 * max magnitude of
    the adjoint image of the data; lambda2 = 0.01 * lambda1; mu = 1;
    tau1 = 1 / (1/alpha + 8 mu) (safe step for the inner quadratic, since
    each difference operator has squared norm <= 4); tau2 = 1 / mu.
    """

    alpha: float | None = None
    lambda1: float | None = None
    lambda2: float | None = None
    mu: float = 1.0
    tau1: float | None = None
    tau2: float | None = None
    sigma: float = 1e-6
    max_outer: int = 300
    inner_iters: int = 3

    def merged(self, **overrides):
        vals = self.__dict__ | {k: v for k, v in overrides.items() if v is not None}
        return SolverConfig(**vals)


@dataclass(frozen=True)
class ResolvedConfig:
    alpha: float
    lambda1: float
    lambda2: float
    mu: float
    tau1: float
    tau2: float
    sigma: float
    max_outer: int
    inner_iters: int

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "mu": self.mu,
            "tau1": self.tau1,
            "tau2": self.tau2,
            "sigma": self.sigma,
            "max_outer": self.max_outer,
            "inner_iters": self.inner_iters,
        }


def resolve_config(cfg: SolverConfig | None, a: np.ndarray, y, alpha_factor=0.9) -> ResolvedConfig:
    """Fill every None field of ``cfg`` from the data-dependent defaults.

    ``y`` may be a fiber, slice, or tensor; only its adjoint image's maximum
    magnitude matters for the default lambda1.  ``alpha_factor`` scales the
    default step 1 / spectral_norm_sq(a) and is chosen per solver family;
    an explicit cfg.alpha always wins.
    """
    cfg = cfg or SolverConfig()
    y2d = np.asarray(y, dtype=np.complex128).reshape(a.shape[0], -1)
    alpha = cfg.alpha
    if alpha is None:
        alpha = alpha_factor / spectral_norm_sq(a)
    lam1 = cfg.lambda1
    if lam1 is None:
        lam1 = 0.05 * float(np.max(np.abs(a.conj().T @ y2d)))
    lam2 = cfg.lambda2
    if lam2 is None:
        lam2 = 0.01 * lam1
    mu = cfg.mu
    tau1 = cfg.tau1 if cfg.tau1 is not None else 1.0 / (1.0 / alpha + 8.0 * mu)
    tau2 = cfg.tau2 if cfg.tau2 is not None else 1.0 / mu
    r = ResolvedConfig(
        alpha=float(alpha),
        lambda1=float(lam1),
        lambda2=float(lam2),
        mu=float(mu),
        tau1=float(tau1),
        tau2=float(tau2),
        sigma=float(cfg.sigma),
        max_outer=int(cfg.max_outer),
        inner_iters=int(cfg.inner_iters),
    )
    if r.alpha <= 0 or r.mu <= 0 or r.tau1 <= 0 or r.tau2 <= 0:
        raise ConfigurationError("alpha, mu, tau1, tau2 must be positive")
    if r.lambda1 < 0 or r.lambda2 < 0:
        raise ConfigurationError("lambda1 and lambda2 must be nonnegative")
    if not (0.0 < r.sigma < 1.0):
        raise ConfigurationError(f"sigma must be in (0, 1), got {r.sigma}")
    if r.max_outer < 1 or r.inner_iters < 1:
        raise ConfigurationError("max_outer and inner_iters must be >= 1")
    return r


@dataclass
class SolverReport:
    iterations: int
    objective_trace: list
    rel_change_trace: list
    wall_time_s: float
    converged: bool
    feasibility_gap_trace: list | None = None

    def to_dict(self, include_timing=False, t_ag_s=None):
        d = {
            "iterations": self.iterations,
            "objective_trace": self.objective_trace,
            "rel_change_trace": self.rel_change_trace,
            "wall_time_s": self.wall_time_s if include_timing else None,
            "converged": self.converged,
            "t_ag_s": t_ag_s if include_timing else None,
        }
        if self.feasibility_gap_trace is not None:
            d["feasibility_gap_trace"] = self.feasibility_gap_trace
        return d


@dataclass
class BregmanState:
    """Per-axis split variables of the tensor solver.

    Arrays are stored in tensor layout; ``folded(axis)`` exposes the
    slices-as-columns matrix form of the underlying formulation.
    """

    x_i: list
    v_i: list
    b_i: list

    def folded(self, axis):
        return (
            tensor.fold(self.x_i[axis], axis),
            tensor.fold(self.v_i[axis], axis),
            tensor.fold(self.b_i[axis], axis),
        )


def soft_threshold(z, theta):
    """Proximal map of theta * l1: sign(z) * max(|z| - theta, 0).

    Complex sign is z/|z| with sign(0) = 0.  ``theta`` may be a scalar or an
    array broadcastable against z (used for per-column thresholds).
    """
    th = np.asarray(theta)
    if np.any(th < 0):
        raise ValueError("threshold must be nonnegative")
    arr = np.asarray(z)
    mag = np.abs(arr)
    shrunk = np.maximum(mag - th, 0.0)
    safe = np.where(mag > 0, mag, 1.0)
    out = arr * (shrunk / safe)
    if np.isscalar(z) or np.ndim(z) == 0:
        return out[()]
    return out


def _rel_change(x_new, x_old):
    num = float(np.sum(np.abs(x_new - x_old) ** 2))
    if num == 0.0:
        return 0.0
    den = float(np.sum(np.abs(x_new) ** 2))
    if den == 0.0:
        return math.inf
    return num / den


def _prox_step(x, y2d, a, ah, alpha, theta):
    """One gradient step on the data term followed by soft thresholding."""
    return soft_threshold(x + alpha * (ah @ (y2d - a @ x)), theta)


def _batch_objective(x, y2d, a, lam):
    resid = 0.5 * float(np.sum(np.abs(y2d - a @ x) ** 2))
    col_l1 = np.sum(np.abs(x), axis=0)
    return resid + float(np.sum(lam * col_l1))


def _ista_matrix(y2d, a, rcfg: ResolvedConfig, variant="ista", theta_cols=None):
    """Batched proximal-gradient solve on an (n_z, m) iterate.

    ``theta_cols`` optionally carries a per-column threshold array (shape
    (m,)); otherwise the scalar alpha * lambda1 is used.  Stopping uses the
    whole-batch relative change.
    """
    if variant not in ("ista", "fista"):
        raise ConfigurationError(f"unknown variant {variant!r}")
    ah = a.conj().T
    n_z = a.shape[1]
    m = y2d.shape[1]
    if theta_cols is None:
        theta = rcfg.alpha * rcfg.lambda1
        lam = rcfg.lambda1
    else:
        theta = np.asarray(theta_cols, dtype=np.float64).reshape(1, m)
        lam = theta[0] / rcfg.alpha
    x = np.zeros((n_z, m), dtype=np.complex128)
    z = x
    t_k = 1.0
    obj_trace = []
    rel_trace = []
    converged = False
    t0 = time.perf_counter()
    for _ in range(rcfg.max_outer):
        point = z if variant == "fista" else x
        x_new = _prox_step(point, y2d, a, ah, rcfg.alpha, theta)
        if variant == "fista":
            t_next = (1.0 + math.sqrt(1.0 + 4.0 * t_k * t_k)) / 2.0
            z = x_new + ((t_k - 1.0) / t_next) * (x_new - x)
            t_k = t_next
        rel = _rel_change(x_new, x)
        x = x_new
        obj_trace.append(_batch_objective(x, y2d, a, lam))
        rel_trace.append(rel)
        if rel < rcfg.sigma:
            converged = True
            break
    report = SolverReport(
        iterations=len(obj_trace),
        objective_trace=obj_trace,
        rel_change_trace=rel_trace,
        wall_time_s=time.perf_counter() - t0,
        converged=converged,
    )
    return x, report


def ista_fiber(y, a, cfg: SolverConfig | None = None, variant="ista", debias=False):
    """Solve the l1 problem on a single echo fiber.

    variant "fista" adds the standard two-point momentum with t_1 = 1,
    t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2.  With ``debias`` the recovered
    support gets a least-squares amplitude refit.  Returns (fiber, report);
    a run that hits max_outer returns its iterate with converged = False.
    """
    y = np.asarray(y, dtype=np.complex128).reshape(-1)
    if y.shape[0] != a.shape[0]:
        raise ValueError(f"fiber length {y.shape[0]} does not match matrix rows {a.shape[0]}")
    rcfg = resolve_config(cfg, a, y)
    x2d, report = _ista_matrix(y[:, None], a, rcfg, variant=variant)
    x = x2d[:, 0]
    if debias:
        support = np.abs(x) > 0
        if np.any(support):
            coef, *_ = np.linalg.lstsq(a[:, support], y, rcond=None)
            x = x.copy()
            x[support] = coef
    return x, report


def ista_slice(y_slice, a, cfg: SolverConfig | None = None):
    """Slice-wise ISTA: one gradient step plus a slice-global threshold.

    The default lambda1 is derived from the whole slice, so every column
    shares one threshold; with an explicit cfg the per-column math is
    identical to :func:`ista_fiber`.
    """
    y_slice = np.asarray(y_slice, dtype=np.complex128)
    if y_slice.ndim != 2:
        raise ValueError(f"expected a 2D echo slice, got shape {y_slice.shape}")
    if y_slice.shape[0] != a.shape[0]:
        raise ValueError(f"slice rows {y_slice.shape[0]} do not match matrix rows {a.shape[0]}")
    rcfg = resolve_config(cfg, a, y_slice)
    return _ista_matrix(y_slice, a, rcfg, variant="ista")


def objective_eval(x, y, a, lambda1, lambda2):
    """Exact hybrid objective 1/2||Y-A(X)||_F^2 + lambda1 l1 + lambda2 TV."""
    resid = y - forward(a, x)
    value = 0.5 * float(np.sum(np.abs(resid) ** 2))
    if lambda1:
        value += lambda1 * tensor.l1(x)
    if lambda2:
        value += lambda2 * tensor.tv_norm(x)
    return value


def split_bregman_l1tv(y, a, cfg: SolverConfig | None = None):
    """Hybrid l1 / 3D-TV tensor solver via per-axis split-Bregman.

    Each outer iteration takes a gradient step on the data term, then for
    each tensor axis runs ``inner_iters`` proximal-descent steps on the
    l1-regularized quadratic, ``inner_iters`` shrinkage steps on the TV
    split variable, a dual update, and finally averages the three per-axis
    iterates into the consensus tensor.  Stops when the consensus relative
    change drops below sigma.  The difference operators are applied
    operator-wise; no dense matrix is ever materialized.

    Raises DivergenceError (carrying the trace) if the objective exceeds
    ten times its initial value.
    """
    y = np.asarray(y, dtype=np.complex128)
    tensor._check3d(y)
    n_e, n_z = a.shape
    if y.shape[0] != n_e:
        raise ValueError(f"echo channel extent {y.shape[0]} does not match matrix rows {n_e}")
    dims = (n_z, y.shape[1], y.shape[2])
    rcfg = resolve_config(cfg, a, y, alpha_factor=1.8)

    x = np.zeros(dims, dtype=np.complex128)
    state = BregmanState(
        x_i=[np.zeros(dims, dtype=np.complex128) for _ in range(3)],
        v_i=[np.zeros(dims, dtype=np.complex128) for _ in range(3)],
        b_i=[np.zeros(dims, dtype=np.complex128) for _ in range(3)],
    )
    obj0 = objective_eval(x, y, a, rcfg.lambda1, rcfg.lambda2)
    obj_trace = []
    rel_trace = []
    gap_trace = []
    converged = False
    t0 = time.perf_counter()
    for _ in range(rcfg.max_outer):
        z = x - rcfg.alpha * adjoint(a, forward(a, x) - y)
        for ax in range(3):
            p = z / rcfg.alpha + rcfg.mu * tensor.diff_adjoint(state.v_i[ax] - state.b_i[ax], ax)
            u = state.x_i[ax]
            for _ in range(rcfg.inner_iters):
                grad = u / rcfg.alpha + rcfg.mu * tensor.diff_adjoint(tensor.diff(u, ax), ax) - p
                u = soft_threshold(u - rcfg.tau1 * grad, rcfg.lambda1 * rcfg.tau1)
            state.x_i[ax] = u
            du = tensor.diff(u, ax)
            w = state.v_i[ax]
            for _ in range(rcfg.inner_iters):
                w = soft_threshold(w - rcfg.tau2 * rcfg.mu * (w - du - state.b_i[ax]), rcfg.lambda2 * rcfg.tau2)
            state.v_i[ax] = w
            state.b_i[ax] = state.b_i[ax] + du - w
        x_new = (state.x_i[0] + state.x_i[1] + state.x_i[2]) / 3.0
        rel = _rel_change(x_new, x)
        x = x_new
        obj_trace.append(objective_eval(x, y, a, rcfg.lambda1, rcfg.lambda2))
        rel_trace.append(rel)
        gap_trace.append(
            sum(tensor.frobenius(tensor.diff(state.x_i[ax], ax) - state.v_i[ax]) for ax in range(3))
        )
        if obj0 > 0 and obj_trace[-1] > 10.0 * obj0:
            raise DivergenceError(
                f"objective {obj_trace[-1]:.3e} exceeded 10x its initial value {obj0:.3e}",
                objective_trace=obj_trace,
            )
        if rel < rcfg.sigma:
            converged = True
            break
    report = SolverReport(
        iterations=len(obj_trace),
        objective_trace=obj_trace,
        rel_change_trace=rel_trace,
        wall_time_s=time.perf_counter() - t0,
        converged=converged,
        feasibility_gap_trace=gap_trace,
    )
    return x, report


def tv_denoise_enhance(x, lambda2, inner_iters=3, mu=1.0, passes=10):
    """Shallow TV enhancement: approximately solve
    min_U 1/2 ||U - X||_F^2 + lambda2 TV(U) with the same per-axis
    split-Bregman machinery, the data term replaced by the quadratic anchor.

    lambda2 = 0 (or an already TV-free input) returns the input unchanged.
    ``inner_iters`` controls the sub-problem steps per pass and ``passes``
    the number of outer consensus passes.
    """
    x = np.asarray(x, dtype=np.complex128)
    tensor._check3d(x)
    if lambda2 < 0:
        raise ConfigurationError(f"lambda2 must be >= 0, got {lambda2}")
    if lambda2 == 0.0 or tensor.tv_norm(x) == 0.0:
        return x.copy()
    if inner_iters < 1 or passes < 1 or mu <= 0:
        raise ConfigurationError("inner_iters, passes must be >= 1 and mu > 0")
    tau1 = 1.0 / (1.0 + 8.0 * mu)
    tau2 = 1.0 / mu
    u_i = [x.copy() for _ in range(3)]
    v_i = [np.zeros_like(x) for _ in range(3)]
    b_i = [np.zeros_like(x) for _ in range(3)]
    out = x
    for _ in range(passes):
        for ax in range(3):
            p = x + mu * tensor.diff_adjoint(v_i[ax] - b_i[ax], ax)
            u = u_i[ax]
            for _ in range(inner_iters):
                grad = u + mu * tensor.diff_adjoint(tensor.diff(u, ax), ax) - p
                u = u - tau1 * grad
            u_i[ax] = u
            du = tensor.diff(u, ax)
            w = v_i[ax]
            for _ in range(inner_iters):
                w = soft_threshold(w - tau2 * mu * (w - du - b_i[ax]), lambda2 * tau2)
            v_i[ax] = w
            b_i[ax] = b_i[ax] + du - w
        out = (u_i[0] + u_i[1] + u_i[2]) / 3.0
    return out


def light_reconstruct_enhance(y, a, cfg: SolverConfig | None = None, threads=None):
    """Light pipeline: slice-wise ISTA over all frontal slices, then one
    TV-denoise enhancement pass on the assembled tensor.

    The config is resolved once against the whole echo tensor so all slices
    share the same thresholds.  Slices may be solved concurrently; results
    are independent of scheduling.  Returns (tensor, report); the report's
    two-entry traces cover the assembly stage and the enhancement stage.
    """
    y = np.asarray(y, dtype=np.complex128)
    tensor._check3d(y)
    n_e, n_z = a.shape
    if y.shape[0] != n_e:
        raise ValueError(f"echo channel extent {y.shape[0]} does not match matrix rows {n_e}")
    rcfg = resolve_config(cfg, a, y)
    n_y = y.shape[2]
    t0 = time.perf_counter()

    def solve_slice(k):
        return _ista_matrix(y[:, :, k], a, rcfg, variant="ista")

    results = run_indexed(solve_slice, range(n_y), workers=threads)
    x = np.stack([r[0] for r in results], axis=2)
    obj_pre = objective_eval(x, y, a, rcfg.lambda1, rcfg.lambda2)
    x_enh = tv_denoise_enhance(x, rcfg.lambda2, inner_iters=rcfg.inner_iters)
    obj_post = objective_eval(x_enh, y, a, rcfg.lambda1, rcfg.lambda2)
    report = SolverReport(
        iterations=2,
        objective_trace=[obj_pre, obj_post],
        rel_change_trace=[_rel_change(x, np.zeros_like(x)), _rel_change(x_enh, x)],
        wall_time_s=time.perf_counter() - t0,
        converged=all(r[1].converged for r in results),
    )
    return x_enh, report


@dataclass
class LearnedIstaParams:
    """Per-block scalars of the unrolled learned solver."""

    alpha: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=np.float64).reshape(-1)
        self.theta = np.asarray(self.theta, dtype=np.float64).reshape(-1)
        if self.alpha.size < 1 or self.alpha.shape != self.theta.shape:
            raise ConfigurationError("alpha and theta must be equal-length, nonempty vectors")
        if np.any(self.alpha < 0) or np.any(self.theta < 0):
            raise ConfigurationError("learned parameters must be nonnegative")

    @property
    def blocks(self):
        return int(self.alpha.size)

    @classmethod
    def equivalence(cls, k_blocks, alpha, lambda1):
        """Parameters that make lista_infer reproduce k_blocks ISTA steps."""
        return cls(alpha=np.full(k_blocks, alpha), theta=np.full(k_blocks, alpha * lambda1))


def _unrolled_infer(y2d, a, params: LearnedIstaParams):
    ah = a.conj().T
    x = np.zeros((a.shape[1], y2d.shape[1]), dtype=np.complex128)
    for k in range(params.blocks):
        x = _prox_step(x, y2d, a, ah, params.alpha[k], params.theta[k])
    return x


def lista_infer(y, a, params: LearnedIstaParams):
    """Run the K unrolled blocks on a fiber (1D) or fiber batch (2D)."""
    y = np.asarray(y, dtype=np.complex128)
    single = y.ndim == 1
    y2d = y[:, None] if single else y
    if y2d.ndim != 2 or y2d.shape[0] != a.shape[0]:
        raise ValueError(f"echo shape {y.shape} does not match matrix rows {a.shape[0]}")
    x = _unrolled_infer(y2d, a, params)
    return x[:, 0] if single else x


def _magnitude_mse(x_hat, x_true):
    return float(np.mean((np.abs(x_hat) - np.abs(x_true)) ** 2))


def lista_train(a, dataset, k_blocks=9, epochs=200, lr=0.1, seed=0):
    """Train the 2K scalars by projected gradient descent.

    ``dataset`` is a (Y, X) pair of matrices with fibers as columns, or a
    sequence of (echo fiber, truth fiber) pairs.  The loss is the mean
    squared magnitude error over all entries; gradients come from central
    finite differences (one-sided at the nonnegativity boundary), and each
    epoch backtracks the step until the loss does not increase, so the
    returned trace is monotone non-increasing.  Training is full-batch and
    deterministic; ``seed`` is reserved for stochastic variants.

    Returns (params, loss_trace) with loss_trace of length epochs + 1
    (initial loss first).
    """
    if isinstance(dataset, tuple) and len(dataset) == 2 and np.asarray(dataset[0]).ndim == 2:
        y2d = np.asarray(dataset[0], dtype=np.complex128)
        x2d = np.asarray(dataset[1], dtype=np.complex128)
    else:
        pairs = list(dataset)
        if not pairs:
            raise ConfigurationError("training dataset is empty")
        y2d = np.stack([np.asarray(p[0], dtype=np.complex128) for p in pairs], axis=1)
        x2d = np.stack([np.asarray(p[1], dtype=np.complex128) for p in pairs], axis=1)
    if y2d.size == 0 or x2d.size == 0:
        raise ConfigurationError("training dataset is empty")
    if y2d.shape[1] != x2d.shape[1]:
        raise ConfigurationError("echo and truth fiber counts differ")
    if k_blocks < 1:
        raise ConfigurationError("k_blocks must be >= 1")
    if epochs < 0 or lr <= 0:
        raise ConfigurationError("epochs must be >= 0 and lr > 0")

    alpha0 = 0.9 / spectral_norm_sq(a)
    lam0 = 0.05 * float(np.mean(np.max(np.abs(a.conj().T @ y2d), axis=0)))
    vec = np.concatenate([np.full(k_blocks, alpha0), np.full(k_blocks, alpha0 * lam0)])

    def loss_of(v):
        params = LearnedIstaParams(alpha=v[:k_blocks], theta=v[k_blocks:])
        return _magnitude_mse(_unrolled_infer(y2d, a, params), x2d)

    cur = loss_of(vec)
    trace = [cur]
    for _ in range(epochs):
        grad = np.zeros_like(vec)
        for i in range(vec.size):
            h = 1e-4 * max(abs(vec[i]), 1e-2)
            hi = vec.copy()
            hi[i] += h
            if vec[i] - h < 0.0:
                grad[i] = (loss_of(hi) - cur) / h
            else:
                lo = vec.copy()
                lo[i] -= h
                grad[i] = (loss_of(hi) - loss_of(lo)) / (2.0 * h)
        step = lr
        new_vec, new_loss = vec, cur
        while step > 1e-12:
            cand = np.maximum(vec - step * grad, 0.0)
            cand_loss = loss_of(cand)
            if cand_loss <= cur:
                new_vec, new_loss = cand, cand_loss
                break
            step *= 0.5
        vec, cur = new_vec, new_loss
        trace.append(cur)
    params = LearnedIstaParams(alpha=vec[:k_blocks], theta=vec[k_blocks:])
    return params, trace


def reconstruct_tensor(y, a, method, cfg: SolverConfig | None = None, lista_params=None, threads=None):
    """Dispatch a full echo tensor to one reconstruction method.

    Methods: "ista" / "fista" (batched over all fibers with a global
    threshold), "sb-tv", "light-tv", "lista" (requires ``lista_params``).
    Returns (scene tensor, SolverReport).
    """
    y = np.asarray(y, dtype=np.complex128)
    tensor._check3d(y)
    if method in ("ista", "fista"):
        rcfg = resolve_config(cfg, a, y)
        d1, d2 = y.shape[1], y.shape[2]
        x2d, report = _ista_matrix(y.reshape(y.shape[0], -1), a, rcfg, variant=method)
        return x2d.reshape(a.shape[1], d1, d2), report
    if method == "sb-tv":
        return split_bregman_l1tv(y, a, cfg)
    if method == "light-tv":
        return light_reconstruct_enhance(y, a, cfg, threads=threads)
    if method == "lista":
        if lista_params is None:
            raise ConfigurationError("method 'lista' requires trained parameters")
        t0 = time.perf_counter()
        d1, d2 = y.shape[1], y.shape[2]
        y2d = y.reshape(y.shape[0], -1)
        ah = a.conj().T
        x2d = np.zeros((a.shape[1], y2d.shape[1]), dtype=np.complex128)
        obj_trace = []
        rel_trace = []
        for k in range(lista_params.blocks):
            x_new = _prox_step(x2d, y2d, a, ah, lista_params.alpha[k], lista_params.theta[k])
            rel_trace.append(_rel_change(x_new, x2d))
            x2d = x_new
            # data-fit trace only: the unrolled blocks carry no single lambda pair
            obj_trace.append(0.5 * float(np.sum(np.abs(y2d - a @ x2d) ** 2)))
        report = SolverReport(
            iterations=lista_params.blocks,
            objective_trace=obj_trace,
            rel_change_trace=rel_trace,
            wall_time_s=time.perf_counter() - t0,
            converged=True,
        )
        return x2d.reshape(a.shape[1], d1, d2), report
    raise ConfigurationError(
        f"unknown method {method!r}; choose from ista, fista, sb-tv, light-tv, lista"
    )
