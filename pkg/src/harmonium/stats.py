"""OLS, random-intercept mixed models by maximum likelihood, and the
model-comparison machinery (likelihood-ratio tests, AIC, p-values).

The mixed model is y ~ N(X beta, sigma2 * (I + theta * Z Z^T)) with a
single grouping factor. beta and sigma2 are profiled out in closed form
(the per-group covariance inverse is a rank-one update), leaving a scalar
maximization over theta >= 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .special import reg_inc_beta, reg_upper_gamma


class RankDeficiencyError(ValueError):
    """Design matrix is rank deficient; carries the aliased column name."""

    def __init__(self, column: str):
        super().__init__(f"design matrix is rank deficient: column {column!r} "
                         "is collinear with earlier columns")
        self.column = column


class ConvergenceError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# tail probabilities


def chisq_sf(x: float, df: int) -> float:
    """Upper-tail probability of the chi-square distribution."""
    if x < 0:
        raise ValueError("x must be >= 0")
    if df <= 0:
        raise ValueError("df must be positive")
    return reg_upper_gamma(df / 2.0, x / 2.0)


def t_sf(t: float, df: float) -> float:
    """Upper-tail probability of Student's t."""
    if df <= 0:
        raise ValueError("df must be positive")
    p_half = 0.5 * reg_inc_beta(df / 2.0, 0.5, df / (df + t * t))
    return p_half if t >= 0 else 1.0 - p_half


def t_sf_two_sided(t: float, df: float) -> float:
    return 2.0 * t_sf(abs(t), df)


def f_sf(f: float, df1: float, df2: float) -> float:
    """Upper-tail probability of the F distribution."""
    if f < 0:
        raise ValueError("F must be >= 0")
    if df1 <= 0 or df2 <= 0:
        raise ValueError("degrees of freedom must be positive")
    return reg_inc_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f))


# ---------------------------------------------------------------------------
# design matrices


@dataclass
class DesignMatrix:
    y: np.ndarray
    X: np.ndarray
    columns: list[str]
    groups: np.ndarray | None = None  # integer group codes, len == n
    group_labels: list | None = None

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def drop_columns(self, names) -> "DesignMatrix":
        keep = [j for j, c in enumerate(self.columns) if c not in set(names)]
        return DesignMatrix(self.y, self.X[:, keep],
                            [self.columns[j] for j in keep],
                            self.groups, self.group_labels)


def build_design(rows, response: str, factors=(), covariates=(),
                 reference_levels=None, group: str | None = None) -> DesignMatrix:
    """Treatment-coded design matrix from a sequence of mappings.

    Each categorical factor with L observed levels contributes L-1
    indicator columns named Factor[T.level]; the reference level is the
    alphabetically first unless overridden.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("no observations")
    reference_levels = dict(reference_levels or {})
    y = np.array([float(r[response]) for r in rows])
    cols = [np.ones(len(rows))]
    names = ["(Intercept)"]
    for factor in factors:
        values = [str(r[factor]) for r in rows]
        levels = sorted(set(values))
        ref = reference_levels.get(factor, levels[0])
        if ref not in levels:
            raise ValueError(f"reference level {ref!r} for factor {factor!r} "
                             f"not among observed levels {levels}")
        for level in levels:
            if level == ref:
                continue
            cols.append(np.array([1.0 if v == level else 0.0 for v in values]))
            names.append(f"{factor}[T.{level}]")
    for cov in covariates:
        cols.append(np.array([float(r[cov]) for r in rows]))
        names.append(cov)
    X = np.column_stack(cols)
    _check_full_rank(X, names)
    groups = None
    group_labels = None
    if group is not None:
        raw = [r[group] for r in rows]
        group_labels = sorted(set(raw))
        index = {g: i for i, g in enumerate(group_labels)}
        groups = np.array([index[g] for g in raw], dtype=np.int64)
    return DesignMatrix(y=y, X=X, columns=names, groups=groups,
                        group_labels=group_labels)


def _check_full_rank(X: np.ndarray, names) -> None:
    n, p = X.shape
    if n < p:
        raise ValueError(f"more columns ({p}) than observations ({n})")
    rank = 0
    for j in range(p):
        new_rank = np.linalg.matrix_rank(X[:, :j + 1])
        if new_rank == rank:
            raise RankDeficiencyError(names[j])
        rank = new_rank


# ---------------------------------------------------------------------------
# ordinary least squares


@dataclass
class OlsFit:
    columns: list[str]
    beta: np.ndarray
    se: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    df_resid: int
    f_statistic: float
    f_df: tuple
    f_p_value: float
    r_squared: float
    adj_r_squared: float
    loglik: float
    n: int

    @property
    def k(self) -> int:
        """Parameter count for AIC/LRT: fixed effects plus the variance."""
        return len(self.columns) + 1

    @property
    def n_fixed(self) -> int:
        return len(self.columns)

    @property
    def aic(self) -> float:
        return 2.0 * self.k - 2.0 * self.loglik

    def coefficient(self, name: str) -> tuple:
        j = self.columns.index(name)
        return self.beta[j], self.se[j], self.t_values[j], self.p_values[j]


def ols_fit(design: DesignMatrix) -> OlsFit:
    y, X, names = design.y, design.X, design.columns
    n, p = X.shape
    if n <= p:
        raise ValueError(f"need n > p, got n={n}, p={p}")
    _check_full_rank(X, names)
    q, r = np.linalg.qr(X)
    beta = np.linalg.solve(r, q.T @ y)
    resid = y - X @ beta
    rss = float(resid @ resid)
    tss = float(np.sum((y - y.mean()) ** 2))
    df_resid = n - p
    r_inv = np.linalg.inv(r)
    xtx_inv = r_inv @ r_inv.T
    degenerate = rss <= 1e-12 * max(tss, 1.0) * n
    sigma2_hat = rss / df_resid
    se = np.sqrt(np.maximum(0.0, sigma2_hat * np.diag(xtx_inv)))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_values = np.where(se > 0, beta / np.where(se > 0, se, 1.0), 0.0)
    if degenerate:
        # zero residual variance: inference is vacuous, report p = 1
        p_values = np.ones(p)
        t_values = np.zeros(p)
        f_stat, f_p = 0.0, 1.0
    else:
        p_values = np.array([t_sf_two_sided(t, df_resid) for t in t_values])
        if p > 1 and tss > rss:
            f_stat = ((tss - rss) / (p - 1)) / (rss / df_resid)
            f_p = f_sf(f_stat, p - 1, df_resid)
        elif p > 1:
            f_stat, f_p = 0.0, 1.0
        else:
            f_stat, f_p = float("nan"), float("nan")
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    adj_r2 = 1.0 - (1.0 - r2) * (n - 1) / df_resid if tss > 0 else 1.0
    sigma2_ml = max(rss / n, 1e-300)
    loglik = -0.5 * n * (math.log(2.0 * math.pi * sigma2_ml) + 1.0)
    return OlsFit(columns=list(names), beta=beta, se=se, t_values=t_values,
                  p_values=p_values, df_resid=df_resid, f_statistic=f_stat,
                  f_df=(p - 1, df_resid), f_p_value=f_p, r_squared=r2,
                  adj_r_squared=adj_r2, loglik=loglik, n=n)


# ---------------------------------------------------------------------------
# linear mixed model, single random intercept, maximum likelihood


@dataclass
class LmmFit:
    columns: list[str]
    beta: np.ndarray
    se: np.ndarray
    t_values: np.ndarray
    sigma2: float
    sigma_b2: float
    theta: float
    loglik: float
    n: int
    n_groups: int
    converged: bool

    @property
    def k(self) -> int:
        return len(self.columns) + 2

    @property
    def n_fixed(self) -> int:
        return len(self.columns)

    @property
    def aic(self) -> float:
        return 2.0 * self.k - 2.0 * self.loglik


def _profiled_lmm(y, X, group_slices, theta):
    """Profiled ML loglik at fixed theta; beta and sigma2 in closed form."""
    n, p = X.shape
    xtvx = X.T @ X
    xtvy = X.T @ y
    ytvy = float(y @ y)
    logdet = 0.0
    for idx in group_slices:
        n_g = idx.size
        c = theta / (1.0 + theta * n_g)
        xs = X[idx].sum(axis=0)
        ys = float(y[idx].sum())
        xtvx = xtvx - c * np.outer(xs, xs)
        xtvy = xtvy - c * xs * ys
        ytvy -= c * ys * ys
        logdet += math.log1p(theta * n_g)
    beta = np.linalg.solve(xtvx, xtvy)
    rss_v = max(ytvy - float(beta @ xtvy), 1e-300)
    sigma2 = rss_v / n
    loglik = -0.5 * (n * math.log(2.0 * math.pi * sigma2) + n + logdet)
    return loglik, beta, sigma2, xtvx


def lmm_fit_ml(design: DesignMatrix, max_iter: int = 200,
               tol: float = 1e-8) -> LmmFit:
    if design.groups is None:
        raise ValueError("design has no grouping vector")
    y, X = design.y, design.X
    n, p = X.shape
    if n <= p:
        raise ValueError(f"need n > p, got n={n}, p={p}")
    n_groups = int(design.groups.max()) + 1
    if n_groups < 2:
        raise ValueError("need at least 2 groups")
    group_slices = [np.flatnonzero(design.groups == g) for g in range(n_groups)]

    def objective(theta):
        return _profiled_lmm(y, X, group_slices, theta)[0]

    # coarse scan pins down the basin; golden-section refines it
    grid = np.concatenate([[0.0], np.logspace(-6, 6, 97)])
    values = [objective(t) for t in grid]
    best = int(np.argmax(values))
    lo = grid[best - 1] if best > 0 else 0.0
    hi = grid[best + 1] if best + 1 < grid.size else grid[-1] * 10.0
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = objective(c), objective(d)
    converged = False
    for _ in range(max_iter):
        if b - a < tol:
            converged = True
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = objective(d)
    if not converged:
        raise ConvergenceError(
            f"theta search did not converge; bracket [{a}, {b}] after {max_iter} steps")
    theta = (a + b) / 2.0
    if objective(0.0) >= objective(theta):
        theta = 0.0  # boundary solution
    loglik, beta, sigma2, xtvx = _profiled_lmm(y, X, group_slices, theta)
    cov = sigma2 * np.linalg.inv(xtvx)
    se = np.sqrt(np.maximum(0.0, np.diag(cov)))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_values = np.where(se > 0, beta / np.where(se > 0, se, 1.0), 0.0)
    return LmmFit(columns=list(design.columns), beta=beta, se=se,
                  t_values=t_values, sigma2=sigma2,
                  sigma_b2=theta * sigma2, theta=theta, loglik=loglik,
                  n=n, n_groups=n_groups, converged=True)


# ---------------------------------------------------------------------------
# likelihood-ratio test


@dataclass
class LrtResult:
    chi2: float
    df: int
    p_value: float


def likelihood_ratio_test(full, null) -> LrtResult:
    """Compare two nested ML fits of the same kind on the same data."""
    if type(full) is not type(null):
        raise ValueError("full and null fits must be the same model kind")
    if full.n != null.n:
        raise ValueError(f"fits use different data: n={full.n} vs n={null.n}")
    if not set(null.columns) <= set(full.columns):
        extra = set(null.columns) - set(full.columns)
        raise ValueError(f"models are not nested; null has extra columns {extra}")
    df = full.n_fixed - null.n_fixed
    raw = 2.0 * (full.loglik - null.loglik)
    if raw < -1e-8:
        raise ValueError(
            f"full model loglik below null ({raw / 2:.3e}); fits inconsistent")
    chi2 = max(0.0, raw)
    if df == 0:
        if chi2 > 1e-8:
            raise ValueError(f"zero df but chi2 = {chi2:.3e} > 0")
        return LrtResult(chi2=chi2, df=0, p_value=1.0)
    return LrtResult(chi2=chi2, df=df, p_value=chisq_sf(chi2, df))
