"""OLS calibration of random-walk predictions on crowd predictions.

Fits x = beta0 + beta1 * crowd by least squares over daily paired samples
pooled across questions, with classical standard errors and t tests against
the unbiasedness null (intercept 0, slope 1).
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.special import stdtr

from .domain import ForecastSeries


@dataclass(frozen=True)
class PairedSample:
    """One (question, date) pair of random-walk and crowd probabilities."""

    question_id: str
    date: dt.date
    x: float
    crowd: float

    def __post_init__(self) -> None:
        for name in ("x", "crowd"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} value {v} outside [0, 1]")


@dataclass(frozen=True)
class RegressionResult:
    """Simple-regression estimates with classical errors and null-based t tests.

    t statistics are computed against the declared nulls: t_i = (beta_i -
    null_i) / se_i. On a perfect noiseless fit the standard errors collapse to
    zero and t is reported as signed infinity (zero when the estimate equals
    its null), with the corresponding p-value 0 (or 1).
    """

    beta0: float
    beta1: float
    se0: float
    se1: float
    t0: float
    t1: float
    p0: float
    p1: float
    r_squared: float
    n: int
    null0: float
    null1: float
    residuals: tuple[float, ...]


def align_series(
    rw: Iterable[ForecastSeries], crowd: Iterable[ForecastSeries]
) -> list[PairedSample]:
    """Inner-join two forecast sets on (question_id, date), pooled across questions."""
    rw_by_q: dict[str, ForecastSeries] = {}
    for s in rw:
        if s.question_id in rw_by_q:
            raise ValueError(f"duplicate random-walk series for {s.question_id!r}")
        rw_by_q[s.question_id] = s
    crowd_by_q: dict[str, ForecastSeries] = {}
    for s in crowd:
        if s.question_id in crowd_by_q:
            raise ValueError(f"duplicate crowd series for {s.question_id!r}")
        crowd_by_q[s.question_id] = s
    samples = []
    for qid in sorted(set(rw_by_q) & set(crowd_by_q)):
        crowd_map = dict(crowd_by_q[qid].points)
        for d, x in rw_by_q[qid].points:
            if d in crowd_map:
                samples.append(PairedSample(qid, d, x, crowd_map[d]))
    if not samples:
        raise ValueError("no overlapping (question, date) pairs to align")
    return samples


def t_test(estimate: float, se: float, null: float, df: int) -> tuple[float, float]:
    """t statistic against a null value and its two-sided Student-t p-value."""
    if se <= 0:
        raise ValueError("standard error must be positive")
    if df < 1:
        raise ValueError("degrees of freedom must be at least 1")
    t = (estimate - null) / se
    p = float(2.0 * stdtr(df, -abs(t)))
    return t, p


def _degenerate_t(estimate: float, null: float) -> tuple[float, float]:
    if estimate == null:
        return 0.0, 1.0
    return math.copysign(math.inf, estimate - null), 0.0


def ols_fit(
    samples: Iterable[PairedSample], null0: float = 0.0, null1: float = 1.0
) -> RegressionResult:
    """Least-squares fit of x on crowd with classical (homoskedastic) errors.

    Coefficients come from the centered closed form, standard errors from the
    usual residual-variance expressions with n-2 degrees of freedom, and
    p-values from the two-sided Student-t distribution. The pooled daily panel
    is serially correlated, so these errors are descriptive.
    """
    data = list(samples)
    n = len(data)
    if n < 3:
        raise ValueError(f"need at least 3 samples, have {n}")
    z = np.array([s.crowd for s in data], dtype=np.float64)
    y = np.array([s.x for s in data], dtype=np.float64)
    z_bar = float(z.mean())
    y_bar = float(y.mean())
    szz = float(((z - z_bar) ** 2).sum())
    if szz == 0.0:
        raise ValueError("singular design: crowd values are all identical")
    szy = float(((z - z_bar) * (y - y_bar)).sum())
    beta1 = szy / szz
    beta0 = y_bar - beta1 * z_bar
    resid = y - beta0 - beta1 * z
    sse = float((resid**2).sum())
    syy = float(((y - y_bar) ** 2).sum())
    s2 = sse / (n - 2)
    se1 = math.sqrt(s2 / szz)
    se0 = math.sqrt(s2 * (1.0 / n + z_bar**2 / szz))
    if se0 > 0 and se1 > 0:
        t0, p0 = t_test(beta0, se0, null0, n - 2)
        t1, p1 = t_test(beta1, se1, null1, n - 2)
    else:
        t0, p0 = _degenerate_t(beta0, null0)
        t1, p1 = _degenerate_t(beta1, null1)
    r_squared = 1.0 if syy == 0.0 else 1.0 - sse / syy
    r_squared = min(max(r_squared, 0.0), 1.0)
    return RegressionResult(
        beta0=beta0,
        beta1=beta1,
        se0=se0,
        se1=se1,
        t0=t0,
        t1=t1,
        p0=p0,
        p1=p1,
        r_squared=r_squared,
        n=n,
        null0=null0,
        null1=null1,
        residuals=tuple(float(r) for r in resid),
    )
