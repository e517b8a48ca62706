"""Compiled numerical kernels shared by the sampler and the simulators.

The latent rank-constrained updates are inherently sequential scalar draws,
so the hot loops live here as numba kernels driven by a numpy Generator.
The Python modules wrap these with validation and nicer signatures; both
paths consume the same Generator, so wrapper-level and kernel-level
compositions of the same blocks are bit-identical.
"""

import math

import numpy as np
from numba import njit, vectorize

_SQRT1_2 = 0.7071067811865475244008443621048490393


@njit(cache=True)
def norm_cdf(x):
    return 0.5 * math.erfc(-x * _SQRT1_2)


@njit(cache=True)
def norm_sf(x):
    return 0.5 * math.erfc(x * _SQRT1_2)


@njit(cache=True)
def norm_ppf(p):
    """Standard normal quantile, Wichura's PPND16 rational approximation."""
    if p <= 0.0:
        return -np.inf
    if p >= 1.0:
        return np.inf
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                    + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                  + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
                + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                    + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                  + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
                + 4.2313330701600911252e1) * r + 1.0)
        return q * num / den
    r = p if q < 0.0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r = r - 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                  + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                + 2.05319162663775882187e0) * r + 1.0)
    else:
        r = r - 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                  + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                    + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                  + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                + 5.99832206555887937690e-1) * r + 1.0)
    x = num / den
    return -x if q < 0.0 else x


@vectorize(["float64(float64)"], cache=True)
def norm_cdf_v(x):
    return norm_cdf(x)


@vectorize(["float64(float64)"], cache=True)
def norm_ppf_v(p):
    return norm_ppf(p)


# ---------------------------------------------------------------------------
# truncated normal
# ---------------------------------------------------------------------------

_TAIL_CUT = 4.0  # beyond this the inverse CDF hands over to tail rejection


@njit(cache=True)
def _tn_tail(rng, a, b):
    # N(0,1) restricted to (a, b) with a > _TAIL_CUT: shifted-exponential
    # rejection (Robert 1995); falls back to survival-space inversion when
    # the interval is too narrow for rejection to terminate quickly.
    lam = 0.5 * (a + math.sqrt(a * a + 4.0))
    for _ in range(1000):
        x = a - math.log1p(-rng.random()) / lam
        if x >= b:
            continue
        d = x - lam
        if rng.random() <= math.exp(-0.5 * d * d):
            return x
    sa = norm_sf(a)
    sb = norm_sf(b)
    u = sb + (sa - sb) * rng.random()
    if u < 1e-300:
        u = 1e-300
    return -norm_ppf(u)


@njit(cache=True)
def tn_standard(rng, a, b):
    """One draw of N(0,1) conditioned on the interval (a, b), a < b."""
    if a > _TAIL_CUT:
        return _tn_tail(rng, a, b)
    if b < -_TAIL_CUT:
        return -_tn_tail(rng, -b, -a)
    if a >= 0.0:
        # right half-line: work in survival space to keep tail precision
        sa = norm_sf(a)
        sb = norm_sf(b)
        u = sb + (sa - sb) * rng.random()
        if u < 1e-300:
            u = 1e-300
        return -norm_ppf(u)
    if b <= 0.0:
        sa = norm_cdf(a)
        sb = norm_cdf(b)
        u = sa + (sb - sa) * rng.random()
        if u < 1e-300:
            u = 1e-300
        return norm_ppf(u)
    pa = norm_cdf(a)
    pb = norm_cdf(b)
    u = pa + (pb - pa) * rng.random()
    if u < 1e-300:
        u = 1e-300
    elif u > 1.0 - 1e-16:
        u = 1.0 - 1e-16
    return norm_ppf(u)


@njit(cache=True)
def tn_draw(rng, mu, sd, lo, hi):
    """N(mu, sd^2) conditioned on (lo, hi); result strictly inside the bounds."""
    a = (lo - mu) / sd
    b = (hi - mu) / sd
    x = mu + sd * tn_standard(rng, a, b)
    # float round-off can land exactly on a finite bound; nudge inward
    if x <= lo:
        x = np.nextafter(lo, hi)
    if x >= hi:
        x = np.nextafter(hi, lo)
    return x


@njit(cache=True)
def tn_draw_many(rng, mu, sd, lo, hi, out):
    for j in range(out.shape[0]):
        out[j] = tn_draw(rng, mu[j], sd[j], lo[j], hi[j])


# ---------------------------------------------------------------------------
# stationary VAR(1) covariance (discrete Lyapunov, direct Kronecker solve)
# ---------------------------------------------------------------------------

@njit(cache=True)
def lyapunov_kron(A, Q):
    """Solve S = A S A' + Q by the dense k^2 x k^2 Kronecker linear system."""
    k = A.shape[0]
    k2 = k * k
    M = np.empty((k2, k2))
    for i in range(k):
        for j in range(k):
            r = i * k + j
            for p in range(k):
                for q in range(k):
                    M[r, p * k + q] = -A[i, p] * A[j, q]
    for r in range(k2):
        M[r, r] += 1.0
    s = np.linalg.solve(M, Q.copy().reshape(k2))
    S = s.reshape((k, k))
    return 0.5 * (S + S.T)


@njit(cache=True)
def spectral_radius(A):
    ev = np.linalg.eigvals(A.astype(np.complex128))
    r = 0.0
    for e in ev:
        m = abs(e)
        if m > r:
            r = m
    return r


# ---------------------------------------------------------------------------
# Kalman filter / simulation smoother (diagonal observation noise)
# ---------------------------------------------------------------------------

@njit(cache=True)
def kf_smooth_mean(Lam, v, G, Sigma, Gamma0, x):
    """E[eta_{1:T} | x_{1:T}] by Kalman filtering plus the backward
    disturbance-smoothing recursion.

    Measurement updates are processed one series at a time, which is exact
    because the observation noise is diagonal; neither pass needs a matrix
    factorization. Returns (smoothed means, bad_t) where bad_t >= 0 flags a
    lost-positive-definiteness failure at that time index.
    """
    T, n = x.shape
    k = G.shape[0]
    apred = np.empty((T, k))
    Ppred = np.empty((T, k, k))
    Ks = np.empty((T, n, k))     # univariate gains P lam / f
    fs = np.empty((T, n))        # innovation variances; -1 marks "no info"
    vres = np.empty((T, n))      # innovations
    eh = np.empty((T, k))
    a = np.zeros(k)
    P = Gamma0.copy()
    work = np.empty(k)
    for t in range(T):
        for r in range(k):
            apred[t, r] = a[r]
            for c in range(k):
                Ppred[t, r, c] = P[r, c]
        for i in range(n):
            lam = Lam[i]
            f = v[i]
            for r in range(k):
                s = 0.0
                for c in range(k):
                    s += P[r, c] * lam[c]
                Ks[t, i, r] = s  # P lam, scaled below
                f += lam[r] * s
            if f < -1e-10:
                return eh, t
            if f <= 1e-300:
                fs[t, i] = -1.0
                vres[t, i] = 0.0
                continue
            fs[t, i] = f
            e = x[t, i]
            for r in range(k):
                e -= lam[r] * a[r]
            vres[t, i] = e
            for r in range(k):
                for c in range(k):
                    P[r, c] -= Ks[t, i, r] * Ks[t, i, c] / f
            for r in range(k):
                Ks[t, i, r] /= f
                a[r] += Ks[t, i, r] * e
        # time update: a = G a, P = G P G' + Sigma
        for r in range(k):
            s = 0.0
            for c in range(k):
                s += G[r, c] * a[c]
            work[r] = s
        for r in range(k):
            a[r] = work[r]
        GP = G @ P
        for r in range(k):
            for c in range(k):
                s = Sigma[r, c]
                for j in range(k):
                    s += GP[r, j] * G[c, j]
                P[r, c] = s
    rvec = np.zeros(k)
    for t in range(T - 1, -1, -1):
        for i in range(n - 1, -1, -1):
            f = fs[t, i]
            if f > 0.0:
                d = 0.0
                for c in range(k):
                    d += Ks[t, i, c] * rvec[c]
                coef = vres[t, i] / f - d
                for c in range(k):
                    rvec[c] += Lam[i, c] * coef
        for r in range(k):
            s = apred[t, r]
            for c in range(k):
                s += Ppred[t, r, c] * rvec[c]
            eh[t, r] = s
        if t > 0:
            for r in range(k):
                s = 0.0
                for c in range(k):
                    s += G[c, r] * rvec[c]
                work[r] = s
            for r in range(k):
                rvec[r] = work[r]
    return eh, -1


@njit(cache=True)
def sim_smoother_draw(rng, Lam, v, G, Sigma, Gamma0, x):
    """Exact draw from p(eta_{1:T} | x_{1:T}) by mean correction.

    Simulates an unconditional (eta+, x+) pair from the state space model,
    then adds the smoothed mean of the residual panel x - x+.
    """
    T, n = x.shape
    k = G.shape[0]
    Ls = np.linalg.cholesky(Sigma)
    Lg = np.linalg.cholesky(Gamma0)
    etap = np.empty((T, k))
    xd = np.empty((T, n))
    sd = np.empty(n)
    for i in range(n):
        sd[i] = math.sqrt(v[i])
    e = np.empty(k)
    z = np.empty(k)
    for r in range(k):
        z[r] = rng.standard_normal()
    for r in range(k):
        s = 0.0
        for c in range(r + 1):
            s += Lg[r, c] * z[c]
        e[r] = s
    for t in range(T):
        if t > 0:
            for r in range(k):
                z[r] = rng.standard_normal()
            for r in range(k):
                s = 0.0
                for c in range(k):
                    s += G[r, c] * etap[t - 1, c]
                for c in range(r + 1):
                    s += Ls[r, c] * z[c]
                e[r] = s
        for r in range(k):
            etap[t, r] = e[r]
        for i in range(n):
            xp = sd[i] * rng.standard_normal()
            for c in range(k):
                xp += Lam[i, c] * e[c]
            xd[t, i] = x[t, i] - xp
    eh, bad_t = kf_smooth_mean(Lam, v, G, Sigma, Gamma0, xd)
    return etap + eh, bad_t


# ---------------------------------------------------------------------------
# latent rank-constrained block
# ---------------------------------------------------------------------------

@njit(cache=True)
def latent_block(rng, x, eta, Lam, v, n_cls, offsets, members, class_of,
                 order, i0, i1):
    """One scan of truncated-normal updates for columns i0..i1-1 of x, in place.

    Bounds for a cell come from the current x values of the neighbouring
    value classes of its column (ties impose no mutual constraint), so the
    scan within a column is sequential by construction.
    """
    T = x.shape[0]
    k = eta.shape[1]
    for i in range(i0, i1):
        sd = math.sqrt(v[i])
        C = n_cls[i]
        for idx in range(T):
            t = order[idx]
            c = class_of[t, i]
            lo = -np.inf
            if c > 0:
                for s in range(offsets[i, c - 1], offsets[i, c]):
                    xv = x[members[i, s], i]
                    if xv > lo:
                        lo = xv
            hi = np.inf
            if c < C - 1:
                for s in range(offsets[i, c + 1], offsets[i, c + 2]):
                    xv = x[members[i, s], i]
                    if xv < hi:
                        hi = xv
            mu = 0.0
            for l in range(k):
                mu += Lam[i, l] * eta[t, l]
            if lo < hi:
                x[t, i] = tn_draw(rng, mu, sd, lo, hi)


# ---------------------------------------------------------------------------
# data-generating process simulators
# ---------------------------------------------------------------------------

@njit(cache=True)
def varma_sim(rng, b0, B, C, Lsig, mu, T, burn):
    """Simulate a VARMA(p, q) path of length T after discarding burn steps.

    B is (p, n, n), C is (q, n, n); Lsig is the Cholesky factor of the
    innovation covariance. Lags start at the stationary mean mu.
    """
    n = b0.shape[0]
    p = B.shape[0]
    q = C.shape[0]
    ylag = np.empty((max(p, 1), n))
    for l in range(max(p, 1)):
        ylag[l] = mu
    elag = np.zeros((max(q, 1), n))
    out = np.empty((T, n))
    for t in range(-burn, T):
        eps = Lsig @ rng.standard_normal(n)
        y = b0 + eps
        for l in range(p):
            y = y + B[l] @ ylag[l]
        for j in range(q):
            y = y + C[j] @ elag[j]
        for l in range(p - 1, 0, -1):
            ylag[l] = ylag[l - 1]
        if p > 0:
            ylag[0] = y
        for j in range(q - 1, 0, -1):
            elag[j] = elag[j - 1]
        if q > 0:
            elag[0] = eps
        if t >= 0:
            out[t] = y
    return out


@njit(cache=True)
def varch_sim(rng, A, nu, T, burn):
    """Simulate the multivariate-t conditional heteroskedasticity process."""
    n = A.shape[0]
    y = np.zeros(n)
    out = np.empty((T, n))
    for t in range(-burn, T):
        S = (A + np.outer(y, y)) / nu
        L = np.linalg.cholesky(S)
        w = 2.0 * rng.gamma(0.5 * nu, 1.0)  # chi-square_nu
        y = (L @ rng.standard_normal(n)) * math.sqrt(nu / w)
        if t >= 0:
            out[t] = y
    return out


@njit(cache=True)
def dfm_sim(rng, G, Ls, Lg0, Lam, v, T, burn):
    """Simulate (eta, x) from the latent dynamic factor model."""
    k = G.shape[0]
    n = Lam.shape[0]
    eta = np.empty((T, k))
    x = np.empty((T, n))
    e = Lg0 @ rng.standard_normal(k)
    for t in range(-burn, T):
        if t > -burn:
            e = G @ e + Ls @ rng.standard_normal(k)
        if t >= 0:
            eta[t] = e
            for i in range(n):
                x[t, i] = Lam[i] @ e + math.sqrt(v[i]) * rng.standard_normal()
    return eta, x


# ---------------------------------------------------------------------------
# pairwise Kendall statistic over stacked (u_t, u_{t+1}) blocks
# ---------------------------------------------------------------------------

@njit(cache=True)
def kendall_stacked(w):
    """Mean of sign-outer-products over all ordered pairs i < j of rows of w."""
    N, m = w.shape
    K = np.zeros((m, m))
    s = np.empty(m)
    for i in range(N - 1):
        for j in range(i + 1, N):
            for a in range(m):
                d = w[i, a] - w[j, a]
                if d > 0.0:
                    s[a] = 1.0
                elif d < 0.0:
                    s[a] = -1.0
                else:
                    s[a] = 0.0
            for a in range(m):
                if s[a] != 0.0:
                    for b in range(a, m):
                        K[a, b] += s[a] * s[b]
    npairs = 0.5 * (N - 1.0) * N
    for a in range(m):
        for b in range(a, m):
            K[a, b] /= npairs
            K[b, a] = K[a, b]
    return K
