"""Hot numeric kernels.

Every kernel exists twice: a loop-level version compiled with numba
(``*_nb``) and a vectorised numpy version (``*_np``). Both implement the
same algorithm with the same branch decisions; the public aliases at the
bottom pick one according to :mod:`tomocert._accel`.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
# points this close to the simplex are returned as-is (keeps P(P(v)) == P(v))
SIMPLEX_SUM_TOL = 1e-12


# ---------------------------------------------------------------------------
# cyclic Jacobi for complex Hermitian matrices


def _rotation(app, aqq, apq):
    """2x2 unitary (u00, u01, u10, u11) that annihilates ``apq``.

    The phase of ``apq`` is removed first, reducing the block to a real
    symmetric one, then the classic Jacobi angle is applied.
    """
    mag = abs(apq)
    phase = apq / mag
    theta = (aqq - app) / (2.0 * mag)
    if theta >= 0.0:
        t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
    else:
        t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    # U = diag(1, conj(phase)) @ [[c, s], [-s, c]]
    return c + 0j, s + 0j, -s * np.conj(phase), c * np.conj(phase)


def _offdiag_sq_nb(a):
    n = a.shape[0]
    acc = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                acc += a[i, j].real ** 2 + a[i, j].imag ** 2
    return acc


def _jacobi_eigh_nb(m):
    n = m.shape[0]
    a = m.copy()
    v = np.eye(n, dtype=np.complex128)
    norm_sq = 0.0
    for i in range(n):
        for j in range(n):
            norm_sq += a[i, j].real ** 2 + a[i, j].imag ** 2
    target = (JACOBI_TOL * JACOBI_TOL) * norm_sq
    sweeps = 0
    while sweeps < JACOBI_MAX_SWEEPS and _offdiag_sq_nb(a) > target:
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                u00, u01, u10, u11 = _rotation_nb(a[p, p].real, a[q, q].real, apq)
                # A <- A U on columns p, q
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = akp * u00 + akq * u10
                    a[k, q] = akp * u01 + akq * u11
                # A <- U^H A on rows p, q
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = np.conj(u00) * apk + np.conj(u10) * aqk
                    a[q, k] = np.conj(u01) * apk + np.conj(u11) * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = vkp * u00 + vkq * u10
                    v[k, q] = vkp * u01 + vkq * u11
        sweeps += 1
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i].real
    order = np.argsort(-w, kind="mergesort")
    return w[order], v[:, order], sweeps


def _jacobi_eigh_np(m):
    n = m.shape[0]
    a = np.array(m, dtype=np.complex128)
    v = np.eye(n, dtype=np.complex128)
    target = (JACOBI_TOL**2) * float(np.sum(np.abs(a) ** 2))
    offmask = ~np.eye(n, dtype=bool)
    sweeps = 0
    while sweeps < JACOBI_MAX_SWEEPS and float(np.sum(np.abs(a[offmask]) ** 2)) > target:
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                u00, u01, u10, u11 = _rotation(a[p, p].real, a[q, q].real, apq)
                u = np.array([[u00, u01], [u10, u11]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ u
                a[idx, :] = u.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ u
        sweeps += 1
    w = np.real(np.diag(a)).copy()
    order = np.argsort(-w, kind="mergesort")
    return w[order], v[:, order], sweeps


# ---------------------------------------------------------------------------
# Euclidean projection onto the probability simplex (sort and threshold)


def _on_simplex_nb(v):
    total = 0.0
    for i in range(v.shape[0]):
        if v[i] < 0.0:
            return False
        total += v[i]
    return abs(total - 1.0) <= SIMPLEX_SUM_TOL


def _project_simplex_nb(v):
    n = v.shape[0]
    if _on_simplex_nb(v):
        return v.copy()
    order = np.argsort(-v, kind="mergesort")
    cum = 0.0
    tau = 0.0
    for i in range(n):
        cum += v[order[i]]
        t = (cum - 1.0) / (i + 1)
        if v[order[i]] - t > 0.0:
            tau = t
    out = np.empty(n)
    for i in range(n):
        out[i] = max(v[i] - tau, 0.0)
    return out


def _project_simplex_np(v):
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[0]
    if np.all(v >= 0.0) and abs(v.sum() - 1.0) <= SIMPLEX_SUM_TOL:
        return v.copy()
    u = v[np.argsort(-v, kind="mergesort")]
    cum = np.cumsum(u)
    taus = (cum - 1.0) / np.arange(1, n + 1)
    k = np.nonzero(u - taus > 0.0)[0][-1]
    return np.maximum(v - taus[k], 0.0)


# ---------------------------------------------------------------------------
# inverse-CDF outcome counting


def _count_outcomes_nb(cdf, uniforms):
    m = cdf.shape[0]
    counts = np.zeros(m, dtype=np.int64)
    for i in range(uniforms.shape[0]):
        u = uniforms[i]
        k = 0
        while k < m - 1 and u >= cdf[k]:
            k += 1
        counts[k] += 1
    return counts


def _count_outcomes_np(cdf, uniforms):
    m = cdf.shape[0]
    idx = np.searchsorted(cdf, uniforms, side="right")
    np.minimum(idx, m - 1, out=idx)
    return np.bincount(idx, minlength=m).astype(np.int64)


# ---------------------------------------------------------------------------

_rotation_nb = njit(_rotation)
_offdiag_sq_nb = njit(_offdiag_sq_nb)
jacobi_eigh_nb = njit(_jacobi_eigh_nb)
_on_simplex_nb = njit(_on_simplex_nb)
project_simplex_nb = njit(_project_simplex_nb)
count_outcomes_nb = njit(_count_outcomes_nb)

jacobi_eigh_np = _jacobi_eigh_np
project_simplex_np = _project_simplex_np
count_outcomes_np = _count_outcomes_np

if USE_NUMBA:
    jacobi_eigh = jacobi_eigh_nb
    project_simplex = project_simplex_nb
    count_outcomes = count_outcomes_nb
else:
    jacobi_eigh = jacobi_eigh_np
    project_simplex = project_simplex_np
    count_outcomes = count_outcomes_np
