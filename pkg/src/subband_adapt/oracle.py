"""Brute-force references for the derivation chain. Test use only.

Everything here works with dense L x L algebra and plain loops on purpose:
it is slow, but it does not share any code path with the engine. The
engine never imports this module.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "AstState",
    "cost",
    "cost_function",
    "analytic_gradient",
    "analytic_hessian",
    "numeric_gradient",
    "numeric_hessian",
    "dense_newton_step",
    "q_domain_update",
    "newton_update_s",
    "dense_direction",
    "ptnsaf_sum_direction",
    "nlms_direction",
    "ptnlms_direction",
    "eigen_bank",
    "w_orthogonal_inputs",
    "gaussian_elimination_solve",
    "triple_loop_gram",
]


@dataclass(frozen=True, eq=False)
class AstState:
    """Affine-scaled variable q = diag(w_sqrt)^-1 s."""

    q: np.ndarray
    w_sqrt: np.ndarray

    @classmethod
    def from_taps(cls, s, w):
        w_sqrt = np.sqrt(np.asarray(w, dtype=np.float64))
        return cls(np.asarray(s, dtype=np.float64) / w_sqrt, w_sqrt)

    @property
    def taps(self):
        return self.w_sqrt * self.q


def cost(q, U, d, h, w, tau):
    """J(q) = sum_i (h_i^T (d - U^T W^(1/2) q))^2 + tau q^T q, by explicit loops."""
    L, N = U.shape
    M = h.shape[1]
    s = [np.sqrt(w[k]) * q[k] for k in range(L)]
    e = []
    for j in range(N):
        acc = 0.0
        for k in range(L):
            acc += U[k, j] * s[k]
        e.append(d[j] - acc)
    total = 0.0
    for i in range(M):
        ei = 0.0
        for j in range(N):
            ei += h[j, i] * e[j]
        total += ei * ei
    for k in range(L):
        total += tau * q[k] * q[k]
    return total


def cost_function(U, d, h, w, tau):
    """Vectorized J(q) closure, used to drive the finite differences."""
    w_sqrt = np.sqrt(w)

    def J(q):
        e_b = h.T @ (d - U.T @ (w_sqrt * q))
        return float(e_b @ e_b + tau * (q @ q))

    return J


def analytic_gradient(q, U, d, h, w, tau):
    """-2 W^(1/2) U_b e_b + 2 tau q."""
    w_sqrt = np.sqrt(w)
    u_b = U @ h
    e_b = h.T @ (d - U.T @ (w_sqrt * q))
    return -2.0 * w_sqrt * (u_b @ e_b) + 2.0 * tau * q


def analytic_hessian(U, h, w, tau):
    """2 W^(1/2) U_b U_b^T W^(1/2) + 2 tau I."""
    a = np.sqrt(w)[:, None] * (U @ h)
    return 2.0 * a @ a.T + 2.0 * tau * np.eye(a.shape[0])


def _steps(q, h):
    return h * np.maximum(1.0, np.abs(q))


def numeric_gradient(J, q, h=1e-5):
    """Central differences with per-coordinate step h * max(1, |q_i|)."""
    q = np.asarray(q, dtype=np.float64)
    steps = _steps(q, h)
    grad = np.empty_like(q)
    for i in range(q.size):
        qp = q.copy()
        qm = q.copy()
        qp[i] += steps[i]
        qm[i] -= steps[i]
        grad[i] = (J(qp) - J(qm)) / (2.0 * steps[i])
    return grad


def numeric_hessian(J, q, h=1e-4):
    q = np.asarray(q, dtype=np.float64)
    steps = _steps(q, h)
    n = q.size
    hess = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            vals = []
            for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                x = q.copy()
                x[i] += si * steps[i]
                x[j] += sj * steps[j]
                vals.append(J(x))
            hij = (vals[0] - vals[1] - vals[2] + vals[3]) / (4.0 * steps[i] * steps[j])
            hess[i, j] = hess[j, i] = hij
    return hess


def dense_newton_step(q, grad, hess, mu, delta):
    """q - mu [hess + 2 delta I]^-1 grad, with a dense solve."""
    n = q.size
    return q - mu * np.linalg.solve(hess + 2.0 * delta * np.eye(n), grad)


def q_domain_update(q, U, d, h, w, mu, delta, tau):
    """Woodbury-reduced q-domain update, spelled out with explicit Psi and Phi."""
    w_sqrt = np.sqrt(w)
    u_b = U @ h
    e_b = h.T @ (d - U.T @ (w_sqrt * q))
    M = u_b.shape[1]
    phi = np.linalg.inv((delta + tau) * np.eye(M) + u_b.T @ np.diag(w) @ u_b)
    a = np.diag(w_sqrt) @ u_b
    psi = a @ phi @ a.T
    eye = np.eye(q.size)
    return (eye - mu * tau / (delta + tau) * (eye - psi)) @ q + mu * a @ phi @ e_b


def newton_update_s(s, U, d, h, w, mu, delta, tau):
    """s(n+1) through the dense damped regularized Newton step in the q domain."""
    state = AstState.from_taps(s, w)
    grad = analytic_gradient(state.q, U, d, h, w, tau)
    hess = analytic_hessian(U, h, w, tau)
    q_next = dense_newton_step(state.q, grad, hess, mu, delta)
    return state.w_sqrt * q_next


def dense_direction(u_b, e_b, w, delta):
    """W^(1/2) [W^(1/2) U_b U_b^T W^(1/2) + delta I_L]^-1 W^(1/2) U_b e_b."""
    w_sqrt = np.sqrt(w)
    a = w_sqrt[:, None] * u_b
    big = a @ a.T + delta * np.eye(a.shape[0])
    return w_sqrt * np.linalg.solve(big, a @ e_b)


def ptnsaf_sum_direction(u_b, e_b, w, delta):
    """sum_i e_i W u_i / (u_i^T W u_i + delta)."""
    g = np.zeros(u_b.shape[0])
    for i in range(u_b.shape[1]):
        ui = u_b[:, i]
        g += e_b[i] / (ui @ (w * ui) + delta) * (w * ui)
    return g


def ptnlms_direction(u, e, w, delta):
    return e * (w * u) / (u @ (w * u) + delta)


def nlms_direction(u, e, delta):
    return e * u / (u @ u + delta)


def eigen_bank(U, w, num_bands=None):
    """Columns = eigenvectors of U^T W U, largest eigenvalues first."""
    vals, vecs = np.linalg.eigh(U.T @ (w[:, None] * U))
    order = np.argsort(vals)[::-1]
    vecs = vecs[:, order]
    if num_bands is not None:
        vecs = vecs[:, :num_bands]
    return vecs


def w_orthogonal_inputs(rng, length, num_bands, w):
    """Random L x M matrix whose columns are mutually W-orthogonal."""
    w_sqrt = np.sqrt(w)
    qmat, _ = np.linalg.qr(rng.standard_normal((length, num_bands)))
    scales = rng.uniform(0.5, 2.0, size=num_bands)
    return (qmat * scales) / w_sqrt[:, None]


def gaussian_elimination_solve(a, b):
    """Textbook elimination with partial pivoting."""
    a = np.array(a, dtype=np.float64)
    b = np.array(b, dtype=np.float64)
    n = b.size
    for col in range(n):
        piv = col + int(np.argmax(np.abs(a[col:, col])))
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            b[[col, piv]] = b[[piv, col]]
        for row in range(col + 1, n):
            f = a[row, col] / a[col, col]
            a[row, col:] -= f * a[col, col:]
            b[row] -= f * b[col]
    x = np.zeros(n)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - a[row, row + 1:] @ x[row + 1:]) / a[row, row]
    return x


def triple_loop_gram(u_b, w, ridge):
    L, M = u_b.shape
    out = np.zeros((M, M))
    for i in range(M):
        for j in range(M):
            acc = ridge if i == j else 0.0
            for k in range(L):
                acc += u_b[k, i] * w[k] * u_b[k, j]
            out[i, j] = acc
    return out
