"""Pure-Python/numpy versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np


def send(y, s, sigma_y, sigma_s, i, denom):
    y[i] /= denom
    s[i] /= denom
    sigma_y[i] += y[i]
    sigma_s[i] += s[i]


def receive(y, s, sigma_y, sigma_s, rho_y, rho_s, src, dst, e):
    y[dst] += sigma_y[src] - rho_y[e]
    s[dst] += sigma_s[src] - rho_s[e]
    rho_y[e] = sigma_y[src]
    rho_s[e] = sigma_s[src]


def _energy(y, s):
    mask = s > 0.0
    if not mask.any():
        return 0.0
    x = y[mask] / s[mask, None]
    return float(np.sum(0.5 * s[mask] * np.einsum("ij,ij->i", x, x)))


def _sq_dist(y, s, x):
    mask = s > 0.0
    if not mask.any():
        return 0.0
    d = x - y[mask] / s[mask, None]
    return float(np.sum(0.5 * s[mask] * np.einsum("ij,ij->i", d, d)))


def node_energy(y, s):
    return _energy(y, s)


def edge_energy(sigma_y, sigma_s, rho_y, rho_s, src):
    return _energy(sigma_y[src] - rho_y, sigma_s[src] - rho_s)


def node_sq_dist(y, s, x):
    return _sq_dist(y, s, x)


def edge_sq_dist(sigma_y, sigma_s, rho_y, rho_s, src, x):
    return _sq_dist(sigma_y[src] - rho_y, sigma_s[src] - rho_s, x)


def inflight_totals(sigma_y, sigma_s, rho_y, rho_s, src, out_y):
    out_y[:] = np.sum(sigma_y[src] - rho_y, axis=0)
    return float(np.sum(sigma_s[src] - rho_s))


def node_spread(y, s):
    x = y / s[:, None]
    diff = x[:, None, :] - x[None, :, :]
    return float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", diff, diff))))
