"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written from the definitions with plain dense
algebra (numpy.linalg.inv, double loops, brute-force enumeration) and does NOT
import the package under test.  Slow and obvious beats fast and clever.
"""

from __future__ import annotations

import math

import numpy as np

# ---------------------------------------------------------------------------
# conjugate posterior (dense, no Cholesky tricks)
# ---------------------------------------------------------------------------


def mniw_posterior_dense(B0, Omega0, Psi0, nu0, Y, Z):
    """Posterior quadruple from the update equations, straight from the page.

    Omega0 is a full d x d prior covariance matrix.  Y/Z must already include
    any dummy rows.  Returns (Bbar, OmegaBar, PsiBar, nuBar).
    """
    K0 = np.linalg.inv(Omega0)
    omega_bar = np.linalg.inv(K0 + Z.T @ Z)
    b_bar = omega_bar @ (K0 @ B0 + Z.T @ Y)
    resid = Y - Z @ b_bar
    psi_bar = Psi0 + resid.T @ resid + (b_bar - B0).T @ K0 @ (b_bar - B0)
    nu_bar = nu0 + Z.shape[0]
    return b_bar, omega_bar, psi_bar, nu_bar


def ols_dense(Y, Z):
    """Equation-by-equation least squares via the pseudo-inverse."""
    return np.linalg.pinv(Z) @ Y


# ---------------------------------------------------------------------------
# stability of scalar AR(2) via polynomial roots
# ---------------------------------------------------------------------------


def ar2_max_root_modulus(phi1: float, phi2: float) -> float:
    """Largest root modulus of z^2 - phi1 z - phi2 (companion eigenvalues)."""
    roots = np.roots([1.0, -phi1, -phi2])
    return float(np.max(np.abs(roots)))


# ---------------------------------------------------------------------------
# shortest anchored window by exhaustive enumeration
# ---------------------------------------------------------------------------


def anchored_interval_bruteforce(values, pf: float, gamma: float):
    """All contiguous sorted windows with >= ceil(gamma*n) draws, stretched to
    contain pf; returns (min_width, set of optimal (lo, hi) pairs)."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    n = v.size
    k = max(int(math.ceil(gamma * n)), 1)
    best_w = np.inf
    best = set()
    for i in range(n):
        for j in range(i + k - 1, n):
            lo = min(v[i], pf)
            hi = max(v[j], pf)
            w = hi - lo
            if w < best_w - 1e-15:
                best_w = w
                best = {(lo, hi)}
            elif abs(w - best_w) <= 1e-15:
                best.add((lo, hi))
    return best_w, best


# ---------------------------------------------------------------------------
# chi-square upper tail from scratch (series / erfc recursion)
# ---------------------------------------------------------------------------


def chi2_sf_reference(x: float, k: int) -> float:
    """P(Chi2_k > x) without scipy.

    Even k: closed Poisson sum.  Odd k: start from Q(1/2, x/2) = erfc(sqrt(x/2))
    and climb with Q(a+1, y) = Q(a, y) + y^a e^{-y} / Gamma(a+1).
    """
    if x < 0:
        return 1.0
    y = x / 2.0
    if k % 2 == 0:
        # Q(n, y) = e^{-y} sum_{j<n} y^j / j!
        n = k // 2
        term = 1.0
        acc = 1.0
        for j in range(1, n):
            term *= y / j
            acc += term
        return float(min(1.0, math.exp(-y) * acc))
    a = 0.5
    q = math.erfc(math.sqrt(y))
    while 2 * a < k:
        # add the increment for Q(a+1, y)
        if y > 0:
            q += math.exp(a * math.log(y) - y - math.lgamma(a + 1.0))
        a += 1.0
    return float(min(1.0, max(0.0, q)))


# ---------------------------------------------------------------------------
# Newey-West variance of the mean, written as the obvious double loop
# ---------------------------------------------------------------------------


def nw_var_reference(d, lag: int) -> float:
    d = np.asarray(d, dtype=np.float64)
    n = d.size
    dbar = d.mean()
    total = 0.0
    for t in range(n):
        total += (d[t] - dbar) ** 2
    acc = total / n
    for j in range(1, lag + 1):
        g = 0.0
        for t in range(j, n):
            g += (d[t] - dbar) * (d[t - j] - dbar)
        acc += 2.0 * (1.0 - j / (lag + 1.0)) * g / n
    return acc / n


def extremal_score_reference(x: float, y: float, theta: float, alpha: float) -> float:
    if y <= theta < x:
        return (alpha - 1.0) * (y - theta)
    if x <= theta < y:
        return alpha * (y - theta)
    return 0.0


# ---------------------------------------------------------------------------
# direct (untruncated) Morlet CWT double loop
# ---------------------------------------------------------------------------


def morlet_cwt_direct(x, scales, dt: float) -> np.ndarray:
    """O(n^2) time-domain transform over the full kernel support."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    out = np.empty((len(scales), n), dtype=np.complex128)
    for si, s in enumerate(scales):
        norm = math.sqrt(dt / s)
        for tau in range(n):
            acc = 0.0 + 0.0j
            for tp in range(n):
                eta = (tp - tau) * dt / s
                psi = np.pi ** (-0.25) * np.exp(1j * 6.0 * eta - 0.5 * eta * eta)
                acc += x[tp] * np.conj(psi)
            out[si, tau] = norm * acc
    return out


# ---------------------------------------------------------------------------
# multiplicity corrections by hand
# ---------------------------------------------------------------------------


def bh_mask_reference(pvals, alpha: float):
    """Step-up BH on a 1-D p-value list (no NaN handling)."""
    p = np.asarray(pvals, dtype=np.float64)
    m = p.size
    order = np.argsort(p)
    k_star = 0
    for rank, idx in enumerate(order, start=1):
        if p[idx] <= rank * alpha / m:
            k_star = rank
    mask = np.zeros(m, dtype=bool)
    if k_star:
        cutoff = p[order[k_star - 1]]
        mask = p <= cutoff
    return mask


def by_qvalues_reference(pvals):
    p = np.asarray(pvals, dtype=np.float64)
    m = p.size
    c = sum(1.0 / i for i in range(1, m + 1))
    order = np.argsort(p)
    q = np.empty(m)
    running = np.inf
    for rank in range(m, 0, -1):
        idx = order[rank - 1]
        running = min(running, p[idx] * m * c / rank)
        q[idx] = min(running, 1.0)
    return q


# published two-tailed Nemenyi constants (infinite dof), alpha = 0.05
DEMSAR_Q05 = {
    2: 1.960, 3: 2.343, 4: 2.569, 5: 2.728, 6: 2.850,
    7: 2.949, 8: 3.031, 9: 3.102, 10: 3.164,
}


# ---------------------------------------------------------------------------
# small simulation helpers shared by tests
# ---------------------------------------------------------------------------


def simulate_varx(rng, T, mu, A, G=None, x=None, sigma_chol=None, burn=50):
    """Simulate y_t = mu + A y_{t-1} + G' x_t + L e_t; returns (T, m) array."""
    m = len(mu)
    mu = np.asarray(mu, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    if sigma_chol is None:
        sigma_chol = np.eye(m)
    total = T + burn
    if x is None:
        x_full = np.zeros((total, 0))
        G = np.zeros((0, m))
    else:
        x_full = np.vstack([np.tile(x[0], (burn, 1)), x])
        G = np.asarray(G, dtype=np.float64)
    y = np.zeros((total, m))
    for t in range(1, total):
        y[t] = (mu + A @ y[t - 1] + G.T @ x_full[t]
                + sigma_chol @ rng.standard_normal(m))
    return y[burn:]


def month_span(n, start_year=2000):
    return tuple(f"{start_year + i // 12:04d}-{i % 12 + 1:02d}" for i in range(n))
