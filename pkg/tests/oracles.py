"""High-precision reference values built directly from explicit formulas in mpmath."""
import mpmath as mp


def weight(lam, n):
    lam = mp.mpf(lam)
    return mp.gamma(lam) * mp.rf(2 * lam, n) * (n + lam) / (mp.sqrt(mp.pi) * mp.gamma(lam + 0.5) * mp.factorial(n))


def gegenbauer_P(lam, n, x):
    """Normalized Gegenbauer P_n(x) = C_n(x) / C_n(1) from the explicit finite sum."""
    with mp.workdps(30 + n):  # the alternating sum cancels about n digits
        lam, x = mp.mpf(lam), mp.mpf(x)
        C = mp.fsum((-1) ** k * mp.rf(lam, n - k) / (mp.factorial(k) * mp.factorial(n - 2 * k))
                    * (2 * x) ** (n - 2 * k) for k in range(n // 2 + 1))
        return +(C / (mp.rf(2 * lam, n) / mp.factorial(n)))


def p(lam, n, x):
    """Orthonormal polynomial for (1 - x^2)^(lam - 1/2)."""
    return gegenbauer_P(lam, n, x) * mp.sqrt(weight(lam, n))


def phi(lam, n, x):
    return p(lam, n, x) * (1 - mp.mpf(x) ** 2) ** (mp.mpf(lam) / 2 - mp.mpf(1) / 4)
