"""Pure numpy integration kernels.

Reference implementation of the hot loops; ``_ckernels.pyx`` mirrors these
signatures exactly.  Interaction matrices arrive in CSR form (row = node
receiving the effect).
"""
import numpy as np

CONVERGED, NOT_CONVERGED, DIVERGED = 0, 1, 2


def _csr_matvec(indptr, indices, data, v):
    out = np.zeros(len(indptr) - 1)
    rows = np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))
    np.add.at(out, rows, data * v[indices])
    return out


def mutualistic_rhs(x, guild, alpha, mu, beta_intra, beta_inter, h,
                    indptr, indices, data):
    benefit = _csr_matvec(indptr, indices, data, x)
    guild_total = np.array([x[guild == 0].sum(), x[guild == 1].sum()])
    competition = beta_intra * x + beta_inter * (guild_total[guild] - x)
    return x * (alpha - competition + benefit / (1.0 + h * benefit)) + mu


def gene_rhs(x, B, f, hill, C, indptr, indices, data):
    xh = x ** hill
    return -B * x ** f + C * _csr_matvec(indptr, indices, data, xh / (1.0 + xh))


def _steady(rhs, x0, dt, eps, max_steps, pin_index, pin_value):
    x = np.array(x0, dtype=float, copy=True)
    if pin_index >= 0:
        x[pin_index] = pin_value

    def f(y):
        d = rhs(y)
        if pin_index >= 0:
            d[pin_index] = 0.0
        return d

    steps = 0
    # overflow is reported through the DIVERGED status, not warnings
    with np.errstate(over="ignore", invalid="ignore"):
        while True:
            k1 = f(x)
            if np.max(np.abs(k1)) < eps:
                return x, CONVERGED, steps
            if steps >= max_steps:
                return x, NOT_CONVERGED, steps
            k2 = f(x + 0.5 * dt * k1)
            k3 = f(x + 0.5 * dt * k2)
            k4 = f(x + dt * k3)
            x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            np.maximum(x, 0.0, out=x)
            if pin_index >= 0:
                x[pin_index] = pin_value
            steps += 1
            if not np.isfinite(x).all():
                return x, DIVERGED, steps


def steady_mutualistic(x0, guild, alpha, mu, beta_intra, beta_inter, h,
                       indptr, indices, data, dt, eps, max_steps,
                       pin_index=-1, pin_value=0.0):
    guild = np.asarray(guild)
    rows = np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))
    dense = np.zeros((len(indptr) - 1,) * 2)
    dense[rows, indices] = data
    in_guild = [guild == 0, guild == 1]

    def rhs(x):
        benefit = dense @ x
        totals = np.where(in_guild[0], x[in_guild[0]].sum(), x[in_guild[1]].sum())
        competition = beta_intra * x + beta_inter * (totals - x)
        return x * (alpha - competition + benefit / (1.0 + h * benefit)) + mu

    return _steady(rhs, x0, dt, eps, max_steps, pin_index, pin_value)


def steady_gene(x0, B, f, hill, C, indptr, indices, data, dt, eps, max_steps,
                pin_index=-1, pin_value=0.0):
    rows = np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))
    dense = np.zeros((len(indptr) - 1,) * 2)
    dense[rows, indices] = data

    def rhs(x):
        xh = x ** hill
        return -B * x ** f + C * (dense @ (xh / (1.0 + xh)))

    return _steady(rhs, x0, dt, eps, max_steps, pin_index, pin_value)
