"""Small dense linear algebra over exact or float scalars.

Everything works on nested lists and plain Python arithmetic, so the same
code runs on ``Fraction`` (exact), ``float`` and sympy expressions.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Sequence

FLOAT_PIVOT_TOL = 1e-12


def _default_is_zero(x) -> bool:
    if isinstance(x, (float, complex)):
        return abs(x) <= FLOAT_PIVOT_TOL
    if type(x).__module__.startswith("sympy"):
        import sympy

        return sympy.simplify(x) == 0
    return x == 0


def _magnitude(x) -> float:
    try:
        return abs(complex(x))
    except TypeError:
        return 0.0 if _default_is_zero(x) else 1.0


def rref(rows: Sequence[Sequence], is_zero: Callable = _default_is_zero):
    """Reduced row echelon form.  Returns ``(matrix, pivot_columns)``.

    Partial pivoting by magnitude keeps the float path stable; exact
    entries take the first nonzero pivot.
    """
    a = [list(r) for r in rows]
    if not a:
        return a, []
    n_rows, n_cols = len(a), len(a[0])
    pivots = []
    r = 0
    for c in range(n_cols):
        if r >= n_rows:
            break
        candidates = [i for i in range(r, n_rows) if not is_zero(a[i][c])]
        if not candidates:
            continue
        p = max(candidates, key=lambda i: _magnitude(a[i][c]))
        a[r], a[p] = a[p], a[r]
        piv = a[r][c]
        a[r] = [x / piv for x in a[r]]
        for i in range(n_rows):
            if i != r and not is_zero(a[i][c]):
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def solve_affine(coeffs: Sequence[Sequence], rhs: Sequence, is_zero: Callable = _default_is_zero):
    """Solve ``coeffs @ x = rhs``.

    Returns ``None`` when inconsistent, else ``(particular, directions)`` where
    every solution is ``particular + sum(t_k * directions[k])``.
    """
    n = len(coeffs[0]) if coeffs else 0
    aug = [list(r) + [b] for r, b in zip(coeffs, rhs)]
    if not aug:
        zero = Fraction(0)
        return [zero] * n, [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    red, pivots = rref(aug, is_zero)
    if n in pivots:
        return None
    sample = aug[0][0]
    zero, one = sample * 0, sample * 0 + 1
    particular = [zero] * n
    for row, c in zip(red, pivots):
        particular[c] = row[n]
    free = [c for c in range(n) if c not in pivots]
    directions = []
    for f in free:
        d = [zero] * n
        d[f] = one
        for row, c in zip(red, pivots):
            d[c] = -row[f]
        directions.append(d)
    return particular, directions


def mat_inverse(a: Sequence[Sequence], is_zero: Callable = _default_is_zero):
    n = len(a)
    sample = a[0][0]
    zero, one = sample * 0, sample * 0 + 1
    aug = [list(r) + [one if i == j else zero for j in range(n)] for i, r in enumerate(a)]
    red, pivots = rref(aug, is_zero)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in red]


def matmul(a, b):
    cols = list(zip(*b))
    return [[sum((x * y for x, y in zip(r, c)), start=r[0] * 0) for c in cols] for r in a]


def matvec(a, v):
    return [sum((x * y for x, y in zip(r, v)), start=r[0] * 0) for r in a]


def identity(n: int, one=Fraction(1)):
    zero = one - one
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def eig2_hermitian(a, b, c):
    """Eigenvalues of ``[[a, b], [conj(b), c]]`` with real ``a, c``, ascending."""
    mean = (a + c) / 2
    rad = math.sqrt(((a - c) / 2) ** 2 + abs(b) ** 2)
    return [mean - rad, mean + rad]


def jacobi_eigenvalues(a, tol: float = 1e-14, max_sweeps: int = 100):
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations."""
    n = len(a)
    m = [[float(x) for x in row] for row in a]
    for _ in range(max_sweeps):
        off = sum(m[i][j] ** 2 for i in range(n) for j in range(n) if i != j)
        if off <= tol * tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p][q]
                if abs(apq) < 1e-300:
                    continue
                theta = (m[q][q] - m[p][p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                cs = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * cs
                for k in range(n):
                    mkp, mkq = m[k][p], m[k][q]
                    m[k][p] = cs * mkp - sn * mkq
                    m[k][q] = sn * mkp + cs * mkq
                for k in range(n):
                    mpk, mqk = m[p][k], m[q][k]
                    m[p][k] = cs * mpk - sn * mqk
                    m[q][k] = sn * mpk + cs * mqk
    else:
        raise ArithmeticError("Jacobi iteration did not converge")
    return sorted(m[i][i] for i in range(n))


def hermitian_eigenvalues(h) -> list[float]:
    """Ascending eigenvalues of a Hermitian matrix given as nested rows."""
    n = len(h)
    if n == 1:
        return [float(complex(h[0][0]).real)]
    if n == 2:
        a = complex(h[0][0]).real
        c = complex(h[1][1]).real
        return eig2_hermitian(a, complex(h[0][1]), c)
    cplx = [[complex(x) for x in row] for row in h]
    if all(abs(x.imag) == 0 for row in cplx for x in row):
        return jacobi_eigenvalues([[x.real for x in row] for row in cplx])
    # A + iB  ->  [[A, -B], [B, A]] has every eigenvalue of A + iB twice
    big = [[0.0] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        for j in range(n):
            re, im = cplx[i][j].real, cplx[i][j].imag
            big[i][j] = big[i + n][j + n] = re
            big[i][j + n] = -im
            big[i + n][j] = im
    return jacobi_eigenvalues(big)[::2]
