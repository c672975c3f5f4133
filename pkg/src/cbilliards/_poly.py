"""Dense bivariate polynomials and resultant elimination.

A polynomial is a 2-D complex array ``P`` with ``P[i, j]`` the coefficient of
``x**i * y**j``. Homogenization (with ``t``) is done by the caller.
"""

from __future__ import annotations

import numpy as np


class EliminationError(ValueError):
    """The bivariate system is degenerate (common factor) or elimination failed."""


def total_degree(P: np.ndarray) -> int:
    nz = np.argwhere(np.abs(P) > 0)
    if nz.size == 0:
        return -1
    return int(nz.sum(axis=1).max())


def trim(P: np.ndarray) -> np.ndarray:
    d = max(total_degree(P), 0)
    out = np.zeros((d + 1, d + 1), dtype=complex)
    n = min(P.shape[0], d + 1), min(P.shape[1], d + 1)
    out[: n[0], : n[1]] = P[: n[0], : n[1]]
    return out


def evaluate(P: np.ndarray, x, y):
    """Evaluate at scalars or broadcastable arrays."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    result = np.zeros(np.broadcast(x, y).shape, dtype=complex)
    # Horner in x over polynomials in y
    for i in range(P.shape[0] - 1, -1, -1):
        row = np.zeros_like(result)
        for j in range(P.shape[1] - 1, -1, -1):
            row = row * y + P[i, j]
        result = result * x + row
    return result


def deriv_x(P: np.ndarray) -> np.ndarray:
    if P.shape[0] == 1:
        return np.zeros_like(P)
    return P[1:, :] * np.arange(1, P.shape[0])[:, None]


def deriv_y(P: np.ndarray) -> np.ndarray:
    if P.shape[1] == 1:
        return np.zeros_like(P)
    return P[:, 1:] * np.arange(1, P.shape[1])[None, :]


def add(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    out = np.zeros((max(A.shape[0], B.shape[0]), max(A.shape[1], B.shape[1])), dtype=complex)
    out[: A.shape[0], : A.shape[1]] += A
    out[: B.shape[0], : B.shape[1]] += B
    return out


def mul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    out = np.zeros((A.shape[0] + B.shape[0] - 1, A.shape[1] + B.shape[1] - 1), dtype=complex)
    for i, j in zip(*np.nonzero(A)):
        out[i : i + B.shape[0], j : j + B.shape[1]] += A[i, j] * B
    return out


def compose_affine(P: np.ndarray, M: np.ndarray, shift) -> np.ndarray:
    """Coefficients of Q(x, y) = P(M @ (x, y) + shift)."""
    M = np.asarray(M, dtype=complex)
    sx, sy = np.asarray(shift, dtype=complex)
    X = np.array([[sx, M[0, 1]], [M[0, 0], 0]], dtype=complex)
    Y = np.array([[sy, M[1, 1]], [M[1, 0], 0]], dtype=complex)
    out = np.zeros((1, 1), dtype=complex)
    xpow = [np.ones((1, 1), dtype=complex)]
    for _ in range(1, P.shape[0]):
        xpow.append(mul(xpow[-1], X))
    ypow = [np.ones((1, 1), dtype=complex)]
    for _ in range(1, P.shape[1]):
        ypow.append(mul(ypow[-1], Y))
    for i, j in zip(*np.nonzero(P)):
        out = add(out, P[i, j] * mul(xpow[i], ypow[j]))
    return trim(out)


def _y_coeffs(P: np.ndarray, x0: complex) -> np.ndarray:
    """Coefficients (ascending in y) of P(x0, y)."""
    powers = x0 ** np.arange(P.shape[0])
    return powers @ P


def _y_degree(P: np.ndarray) -> int:
    cols = np.nonzero(np.any(np.abs(P) > 0, axis=0))[0]
    return int(cols.max()) if cols.size else -1


def _sylvester_det(f: np.ndarray, g: np.ndarray) -> complex:
    """Resultant in y of two univariate polynomials with ascending coefficients."""
    m, n = len(f) - 1, len(g) - 1
    size = m + n
    if size == 0:
        return complex(1.0)
    S = np.zeros((size, size), dtype=complex)
    fd, gd = f[::-1], g[::-1]
    for r in range(n):
        S[r, r : r + m + 1] = fd
    for r in range(m):
        S[n + r, r : r + n + 1] = gd
    return complex(np.linalg.det(S))


def resultant_y(F: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Resultant with respect to y, as ascending coefficients in x.

    Evaluated on roots of unity and interpolated by FFT, so the degree bound
    deg F * deg G must hold (true for total-degree inputs).
    """
    m, n = _y_degree(F), _y_degree(G)
    if m < 0 or n < 0:
        raise EliminationError("zero polynomial in elimination")
    bound = max(total_degree(F), 0) * max(total_degree(G), 0)
    N = bound + 1
    nodes = np.exp(2j * np.pi * np.arange(N) / N)
    values = np.array(
        [_sylvester_det(_y_coeffs(F, z)[: m + 1], _y_coeffs(G, z)[: n + 1]) for z in nodes]
    )
    return np.fft.fft(values) / N if N > 1 else values


def _cluster(points: list[np.ndarray], radius: float) -> list[np.ndarray]:
    groups: list[list[np.ndarray]] = []
    for p in points:
        for g in groups:
            if np.linalg.norm(g[0] - p) <= radius * (1 + np.linalg.norm(p)):
                g.append(p)
                break
        else:
            groups.append([p])
    return [np.mean(g, axis=0) for g in groups]


def _newton_polish(F, G, z, iters=8):
    Fx, Fy, Gx, Gy = deriv_x(F), deriv_y(F), deriv_x(G), deriv_y(G)
    for _ in range(iters):
        r = np.array([evaluate(F, *z), evaluate(G, *z)])
        J = np.array(
            [[evaluate(Fx, *z), evaluate(Fy, *z)], [evaluate(Gx, *z), evaluate(Gy, *z)]]
        )
        if abs(np.linalg.det(J)) < 1e-12 * max(np.abs(J).max(), 1.0) ** 2:
            break
        step = np.linalg.solve(J, r)
        z = z - step
        if np.linalg.norm(step) < 1e-15 * (1 + np.linalg.norm(z)):
            break
    return z


def _scale(P: np.ndarray, z) -> float:
    d = max(total_degree(P), 0)
    return float(np.abs(P).sum()) * max(1.0, float(np.linalg.norm(z))) ** d


def solve_bivariate(F: np.ndarray, G: np.ndarray, *, tol: float = 1e-8, cluster: float = 1e-6,
                    rotation: float = 0.6180339887) -> list[np.ndarray]:
    """Finite common zeros of F and G.

    A fixed generic real rotation puts the system in general position; the
    resultant in y gives candidate x values, whose y partners are found from
    F and checked against G, then polished by Newton and clustered.
    """
    F, G = trim(np.asarray(F, dtype=complex)), trim(np.asarray(G, dtype=complex))
    if total_degree(F) < 0 or total_degree(G) < 0:
        raise EliminationError("zero polynomial in system")
    c, s = np.cos(rotation), np.sin(rotation)
    R = np.array([[c, -s], [s, c]])
    Fr, Gr = compose_affine(F, R, (0, 0)), compose_affine(G, R, (0, 0))
    if total_degree(Fr) == 0 or total_degree(Gr) == 0:
        return []
    res = resultant_y(Fr, Gr)
    scale = np.abs(res).max()
    if scale == 0 or np.all(np.abs(res) <= 1e-11 * np.abs(F).sum() * np.abs(G).sum()):
        raise EliminationError("resultant vanishes identically: polynomials share a factor")
    res = np.where(np.abs(res) > 1e-13 * scale, res, 0)
    nz = np.nonzero(res)[0]
    coeffs = res[: nz.max() + 1]
    xs = np.roots(coeffs[::-1]) if len(coeffs) > 1 else np.array([])
    candidates = []
    for x0 in xs:
        fy = _y_coeffs(Fr, x0)
        gy = _y_coeffs(Gr, x0)
        pool = fy if _y_degree(Fr) >= 1 and np.abs(fy[1:]).max() > 0 else gy
        other = Gr if pool is fy else Fr
        nzp = np.nonzero(np.abs(pool) > 1e-14 * np.abs(pool).max())[0]
        if nzp.size == 0 or nzp.max() == 0:
            continue
        for y0 in np.roots(pool[: nzp.max() + 1][::-1]):
            z = np.array([x0, y0])
            z = _newton_polish(Fr, Gr, z)
            if (abs(evaluate(Fr, *z)) <= tol * _scale(Fr, z)
                    and abs(evaluate(Gr, *z)) <= tol * _scale(Gr, z)):
                candidates.append(z)
            elif abs(evaluate(other, x0, y0)) <= tol * _scale(other, (x0, y0)):
                candidates.append(np.array([x0, y0]))
    pts = _cluster(candidates, cluster)
    return [R @ p for p in pts]
