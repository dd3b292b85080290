"""Two-sample mean comparison without the equal-variance assumption."""

import math
from dataclasses import dataclass
from statistics import fmean, variance
from typing import Sequence

from scipy.stats import t as _t_dist


@dataclass(frozen=True)
class TestReport:
    group_a: str
    group_b: str
    t_statistic: float
    p_value: float
    df: float
    n_a: int
    n_b: int


def welch_t(a: Sequence[float], b: Sequence[float], label_a: str = "a", label_b: str = "b") -> TestReport:
    """Welch's two-sample t-test, two-tailed.

    Degrees of freedom come from the Welch-Satterthwaite approximation.
    When both samples are constant the report degenerates to p=1 for equal
    means and p=0 otherwise.
    """
    n_a, n_b = len(a), len(b)
    if n_a < 2 or n_b < 2:
        raise ValueError("each sample needs at least two values")
    mean_a, mean_b = fmean(a), fmean(b)
    var_a, var_b = variance(a, mean_a), variance(b, mean_b)

    if var_a == 0.0 and var_b == 0.0:
        if mean_a == mean_b:
            t_stat, p_value = 0.0, 1.0
        else:
            t_stat, p_value = math.copysign(math.inf, mean_a - mean_b), 0.0
        df = float(n_a + n_b - 2)
    else:
        se2 = var_a / n_a + var_b / n_b
        t_stat = (mean_a - mean_b) / math.sqrt(se2)
        df = se2 * se2 / (
            (var_a / n_a) ** 2 / (n_a - 1) + (var_b / n_b) ** 2 / (n_b - 1)
        )
        p_value = float(2.0 * _t_dist.sf(abs(t_stat), df))

    return TestReport(label_a, label_b, t_stat, p_value, df, n_a, n_b)
