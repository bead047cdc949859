# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scalar kernels; algorithmically identical to ``_pykernels``."""

from libc.math cimport sqrt, log, log1p, fabs, lgamma, M_PI, INFINITY

from ._debye import U_COEFFS, W_COEFFS

cdef enum:
    MAXTERMS = 16
    MAXDEG = 64

cdef double EPS = 1e-16
cdef double TINY = 1e-300
cdef long MAXIT = 1000000
cdef double DEBYE_NU = 200.0
cdef double DEBYE_ZMIN = 1e-3
cdef double SERIES_X = 20.0
cdef double HANKEL_X = 50.0
cdef double RESCALE = 1e250
cdef double LOG_RESCALE = log(1e250)
cdef double HALF_LOG_2PI = 0.5 * log(2.0 * M_PI)

cdef int n_terms = len(U_COEFFS)
cdef double u_tab[MAXTERMS][MAXDEG]
cdef double w_tab[MAXTERMS][MAXDEG]
cdef int u_len[MAXTERMS]
cdef int w_len[MAXTERMS]


cdef void _load_tables():
    cdef int k, j
    for k in range(n_terms):
        u_len[k] = len(U_COEFFS[k])
        w_len[k] = len(W_COEFFS[k])
        for j in range(u_len[k]):
            u_tab[k][j] = U_COEFFS[k][j]
        for j in range(w_len[k]):
            w_tab[k][j] = W_COEFFS[k][j]


_load_tables()


cdef inline double _max(double a, double b) nogil:
    return a if a > b else b


cdef double _series_sum(double nu, double x) nogil:
    cdef double q = 0.25 * x * x
    cdef double term = 1.0
    cdef double total = 0.0
    cdef long k = 0
    while True:
        k += 1
        term *= q / (k * (k + nu))
        total += term
        if term <= EPS * (1.0 + total) or k > MAXIT:
            break
    return total


cdef inline double _poly(double* c, int n, double t) nogil:
    cdef double acc = 0.0
    cdef int j
    for j in range(n - 1, -1, -1):
        acc = acc * t + c[j]
    return acc


cdef void _debye_parts(double nu, double x, double* out) nogil:
    # out = (z, sq, eta, u, w)
    cdef double z = x / nu
    cdef double sq = sqrt(1.0 + z * z)
    cdef double t = 1.0 / sq
    cdef double eta = sq + log(z) - log1p(sq)
    cdef double u = 1.0
    cdef double w = 0.0
    cdef double p = 1.0
    cdef double du, dw
    cdef int k
    for k in range(1, n_terms):
        p /= nu
        du = _poly(u_tab[k], u_len[k], t) * p
        dw = _poly(w_tab[k], w_len[k], t) * p
        u += du
        w += dw
        if fabs(du) <= EPS * fabs(u) and fabs(dw) <= EPS * fabs(w):
            break
    out[0] = z
    out[1] = sq
    out[2] = eta
    out[3] = u
    out[4] = w


cdef double _log_debye(double nu, double x) nogil:
    cdef double o[5]
    _debye_parts(nu, x, o)
    return nu * o[2] - 0.5 * log(nu) - HALF_LOG_2PI - 0.5 * log(o[1]) + log(o[3])


cdef double _ratio_debye(double nu, double x) nogil:
    cdef double o[5]
    _debye_parts(nu, x, o)
    return o[0] / (1.0 + o[1]) + o[1] * o[4] / (o[3] * o[0])


cdef double _hankel_sum(double nu, double x) nogil:
    cdef double mu = 4.0 * nu * nu
    cdef double term = 1.0
    cdef double total = 1.0
    cdef double last = INFINITY
    cdef double mag
    cdef int k
    for k in range(1, 500):
        term *= -(mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k * x)
        mag = fabs(term)
        if mag >= last:
            break
        total += term
        if mag <= EPS * fabs(total):
            break
        last = mag
    return total


cdef double _log_hankel(double nu, double x) nogil:
    return x - 0.5 * log(x) - HALF_LOG_2PI + log(_hankel_sum(nu, x))


cdef double _ratio_cf1(double nu, double x) nogil:
    cdef double f = TINY
    cdef double c = f
    cdef double d = 0.0
    cdef double xi2 = 2.0 / x
    cdef double b, delta
    cdef long k
    for k in range(1, MAXIT):
        b = (nu + k) * xi2
        d = b + d
        if d == 0.0:
            d = TINY
        d = 1.0 / d
        c = b + 1.0 / c
        if c == 0.0:
            c = TINY
        delta = c * d
        f *= delta
        if fabs(delta - 1.0) < EPS:
            break
    return f


cdef double _log_cf(double nu, double x) nogil:
    cdef long nl = <long>(nu + 0.5)
    cdef double mu = nu - nl
    cdef double r = _ratio_cf1(nu, x)
    cdef double xi = 1.0 / x
    cdef double b = 2.0 * (1.0 + x)
    cdef double d = 1.0 / b
    cdef double h = d
    cdef double delh = d
    cdef double q1 = 0.0
    cdef double q2 = 1.0
    cdef double a1 = 0.25 - mu * mu
    cdef double q = a1
    cdef double c = a1
    cdef double a = -a1
    cdef double s = 1.0 + q * delh
    cdef double qnew, dels, kmu, k1, knext
    cdef double scale = 0.0
    cdef long i
    for i in range(2, MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if fabs(dels / s) < EPS:
            break
    h = a1 * h
    kmu = sqrt(M_PI / (2.0 * x)) / s
    k1 = kmu * (mu + x + 0.5 - h) * xi
    for i in range(1, nl + 1):
        knext = (mu + i) * 2.0 * xi * k1 + kmu
        kmu = k1
        k1 = knext
        if k1 > RESCALE:
            k1 /= RESCALE
            kmu /= RESCALE
            scale += LOG_RESCALE
    return x - log(x) - log(k1 + r * kmu) - scale


cdef inline bint _use_debye(double nu, double x) nogil:
    return nu >= DEBYE_NU and x >= DEBYE_ZMIN * nu


cdef inline bint _use_series(double nu, double x) nogil:
    return x <= _max(SERIES_X, 0.5 * nu)


cdef inline bint _use_hankel(double nu, double x) nogil:
    return x >= _max(HANKEL_X, 2.0 * nu * nu)


cdef double c_log_bessel_i(double nu, double x) nogil:
    if x == 0.0:
        return 0.0 if nu == 0.0 else -INFINITY
    if _use_debye(nu, x):
        return _log_debye(nu, x)
    if _use_series(nu, x):
        return nu * log(0.5 * x) - lgamma(nu + 1.0) + log1p(_series_sum(nu, x))
    if _use_hankel(nu, x):
        return _log_hankel(nu, x)
    return _log_cf(nu, x)


cdef double c_bessel_i_ratio(double nu, double x) nogil:
    if _use_debye(nu, x):
        return _ratio_debye(nu, x)
    if _use_hankel(nu, x):
        return _hankel_sum(nu + 1.0, x) / _hankel_sum(nu, x)
    return _ratio_cf1(nu, x)


cdef double c_scaled_bessel_term(double nu, double z, double s) nogil:
    cdef double x = 0.5 * s * z
    cdef double tail
    if x == 0.0 or (not _use_debye(nu, x) and _use_series(nu, x)):
        tail = _series_sum(nu, x) if x > 0.0 else 0.0
        return (nu * log(0.25 * s) - lgamma(nu + 1.0) + log1p(tail)) / s
    return (-nu * log(z) + c_log_bessel_i(nu, x)) / s


cdef double c_ratio_over_z(double nu, double z, double s) nogil:
    if z == 0.0:
        return s / (4.0 * (nu + 1.0))
    return c_bessel_i_ratio(nu, 0.5 * s * z) / z


def log_bessel_i(double nu, double x):
    return c_log_bessel_i(nu, x)


def bessel_i_ratio(double nu, double x):
    return c_bessel_i_ratio(nu, x)


def scaled_bessel_term(double nu, double z, double s):
    return c_scaled_bessel_term(nu, z, s)


def ratio_over_z(double nu, double z, double s):
    return c_ratio_over_z(nu, z, s)


def dyn_value_grad(double a0, double a1, double a2, double c0, double c1,
                   double c2, double n, double t, double rho, double v,
                   double lam):
    cdef double big_a = a0 - 2.0 * rho * a1 + rho * rho * a2
    cdef double cc = c0 - 2.0 * rho * c1 + rho * rho * c2
    if cc < 0.0:
        cc = 0.0
    cdef double nu = 0.5 * (n - 2.0)
    cdef double z = 2.0 * sqrt(lam * cc / v)
    cdef double sterm = c_scaled_bessel_term(nu, z, n)
    cdef double value = -0.5 * log(v) - big_a / (2.0 * v * t) - 0.5 * lam + sterm / t
    cdef double rz = c_ratio_over_z(nu, z, n)
    cdef double d_a = -2.0 * a1 + 2.0 * rho * a2
    cdef double d_c = -2.0 * c1 + 2.0 * rho * c2
    cdef double g_rho = -d_a / (2.0 * v * t) + rz * lam * d_c / (v * t)
    cdef double g_v = -0.5 / v + big_a / (2.0 * v * v * t) - rz * lam * cc / (v * v * t)
    cdef double g_lam = -0.5 + rz * cc / (v * t)
    return value, g_rho, g_v, g_lam


def iv_value_grad(double p00, double p01, double p11, double m00, double m01,
                  double m11, double k, double n, double beta, double lam):
    cdef double s = p00 * beta * beta + 2.0 * p01 * beta + p11
    cdef double pq = m00 * beta * beta + 2.0 * m01 * beta + m11
    if pq < 0.0:
        pq = 0.0
    cdef double nu = 0.5 * (k - 2.0)
    cdef double z = 2.0 * sqrt(lam * pq)
    cdef double value = -0.5 * lam * s + c_scaled_bessel_term(nu, z, n)
    cdef double rz = c_ratio_over_z(nu, z, n)
    cdef double d_s = 2.0 * (p00 * beta + p01)
    cdef double d_p = 2.0 * (m00 * beta + m01)
    cdef double g_beta = -0.5 * lam * d_s + rz * lam * d_p
    cdef double g_lam = -0.5 * s + rz * pq
    return value, g_beta, g_lam
