"""Normal and chi-square quantiles via the inverse regularized incomplete gamma."""

import numpy as np
from scipy import special


def chi2_cdf(x, df):
    return special.gammainc(np.asarray(df) / 2.0, np.asarray(x) / 2.0)


def chi2_quantile(prob, df):
    return 2.0 * special.gammaincinv(np.asarray(df) / 2.0, prob)


def normal_cdf(x):
    return special.ndtr(x)


def normal_quantile(prob):
    return special.ndtri(prob)
