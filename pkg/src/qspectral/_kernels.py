"""Compiled inner loops for the check-loss interior-point solver.

One kernel fits one problem; the drivers at the bottom loop over rows of a
batch.  Nothing here depends on batch composition, so results are identical
whether a problem is solved alone or inside a larger sweep.  Formulas and
tolerances mirror the module docstring of ``regression``; keep the two in
sync when touching either.
"""

import math

import numpy as np
from numba import njit

GAP_TOL = 1e-10
FEAS_TOL = 1e-8
ZERO_RESIDUAL_REL = 1e-9
STEP_SCALE = 0.9995
PI_SNAP = 1e-12

STATUS_OK = 0
STATUS_DEGENERATE = 1

STRICT_GUARD = 1e-12   # relative determinant floor for the Cramer solves
CERT_CONVERGED = 1e-9  # per-observation subgradient slack that certifies a fit


@njit(cache=True)
def _solve_small(M, rhs, out, guard):
    """Cramer solve for p in {1, 2, 3}.

    Returns False when |det| falls below ``guard`` relative to the matrix
    scale.  An interior-point iteration that trips the guard stops where it
    is; the crossover and subgradient certificate decide whether that point
    is already optimal.
    """
    p = M.shape[0]
    if p == 1:
        det = M[0, 0]
        if abs(det) <= guard:
            return False
        out[0] = rhs[0] / det
        return True
    norm = 0.0
    for i in range(p):
        for j in range(p):
            v = abs(M[i, j])
            if v > norm:
                norm = v
    if p == 2:
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        if abs(det) <= guard * max(norm * norm, 1e-300):
            return False
        out[0] = (rhs[0] * M[1, 1] - rhs[1] * M[0, 1]) / det
        out[1] = (M[0, 0] * rhs[1] - M[1, 0] * rhs[0]) / det
        return True
    c00 = M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1]
    c01 = M[1, 2] * M[2, 0] - M[1, 0] * M[2, 2]
    c02 = M[1, 0] * M[2, 1] - M[1, 1] * M[2, 0]
    det = M[0, 0] * c00 + M[0, 1] * c01 + M[0, 2] * c02
    if abs(det) <= guard * max(norm * norm * norm, 1e-300):
        return False
    c10 = M[0, 2] * M[2, 1] - M[0, 1] * M[2, 2]
    c11 = M[0, 0] * M[2, 2] - M[0, 2] * M[2, 0]
    c12 = M[0, 1] * M[2, 0] - M[0, 0] * M[2, 1]
    c20 = M[0, 1] * M[1, 2] - M[0, 2] * M[1, 1]
    c21 = M[0, 2] * M[1, 0] - M[0, 0] * M[1, 2]
    c22 = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    out[0] = (rhs[0] * c00 + rhs[1] * c10 + rhs[2] * c20) / det
    out[1] = (rhs[0] * c01 + rhs[1] * c11 + rhs[2] * c21) / det
    out[2] = (rhs[0] * c02 + rhs[1] * c12 + rhs[2] * c22) / det
    return True


@njit(cache=True)
def _ip_fit(X, y, tau, max_iter, beta):
    """Mehrotra predictor-corrector on the bounded dual LP.

    Writes the coefficient estimate into ``beta``; returns
    (dual objective, iterations, converged, status).
    """
    n, p = X.shape

    M = np.empty((p, p))
    g = np.empty(p)
    db = np.empty(p)
    b0 = np.empty(p)
    rb = np.empty(p)

    # Gram matrix, determinant guard, least-squares warm start
    for i in range(p):
        for j in range(p):
            acc = 0.0
            for t in range(n):
                acc += X[t, i] * X[t, j]
            M[i, j] = acc
        acc = 0.0
        for t in range(n):
            acc += X[t, i] * y[t]
        g[i] = acc
    tr = 0.0
    for i in range(p):
        tr += M[i, i]
    scale_m = (tr / p) ** p
    ok = _solve_small(M, g, beta, STRICT_GUARD)
    if not ok:
        return 0.0, 0, False, STATUS_DEGENERATE
    det = 1.0
    if p == 3:
        det = (
            M[0, 0] * (M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
            - M[0, 1] * (M[1, 0] * M[2, 2] - M[1, 2] * M[2, 0])
            + M[0, 2] * (M[1, 0] * M[2, 1] - M[1, 1] * M[2, 0])
        )
    elif p == 2:
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    else:
        det = M[0, 0]
    if abs(det) <= 1e-12 * max(scale_m, 1e-300):
        return 0.0, 0, False, STATUS_DEGENERATE

    resid = np.empty(n)
    z = np.empty(n)
    w = np.empty(n)
    a = np.empty(n)
    s = np.empty(n)
    d = np.empty(n)
    za = np.empty(n)
    ws = np.empty(n)
    ru = np.empty(n)
    wrs = np.empty(n)
    rhs = np.empty(n)
    da = np.empty(n)
    dz = np.empty(n)
    ds = np.empty(n)
    dw = np.empty(n)
    cz = np.empty(n)
    cw = np.empty(n)

    scale_y = 0.0
    ysum = 0.0
    for t in range(n):
        v = abs(y[t])
        if v > scale_y:
            scale_y = v
        ysum += y[t]
    if scale_y < 1e-300:
        scale_y = 1e-300
    ytau = (1.0 - tau) * ysum

    mean_abs_r = 0.0
    for t in range(n):
        r = y[t]
        for k in range(p):
            r -= X[t, k] * beta[k]
        resid[t] = r
        mean_abs_r += abs(r)
    mean_abs_r /= n
    delta = 0.1 * mean_abs_r + 1e-4 * scale_y + 1e-8
    for t in range(n):
        r = resid[t]
        z[t] = (-r if r < 0.0 else 0.0) + delta
        w[t] = (r if r > 0.0 else 0.0) + delta
        a[t] = 1.0 - tau
        s[t] = tau
    for k in range(p):
        acc = 0.0
        for t in range(n):
            acc += X[t, k] * a[t]
        b0[k] = acc
    b0_scale = 1.0
    for k in range(p):
        if abs(b0[k]) > b0_scale:
            b0_scale = abs(b0[k])

    iterations = 0
    converged = False

    for _ in range(max_iter):
        # objectives and convergence test
        obj_p = 0.0
        obj_d = -ytau
        for t in range(n):
            r = y[t]
            for k in range(p):
                r -= X[t, k] * beta[k]
            resid[t] = r
            obj_p += r * (tau - (1.0 if r <= 0.0 else 0.0))
            obj_d += y[t] * a[t]
        feas = 0.0
        for k in range(p):
            acc = b0[k]
            for t in range(n):
                acc -= X[t, k] * a[t]
            rb[k] = acc
            if abs(acc) > feas:
                feas = abs(acc)
        if (obj_p - obj_d <= GAP_TOL * max(1.0, abs(obj_p))) and (
            feas <= FEAS_TOL * b0_scale
        ):
            converged = True
            break

        # scaling vector and normal matrix
        mu = 0.0
        for t in range(n):
            za_t = z[t] / a[t]
            ws_t = w[t] / s[t]
            dt = za_t + ws_t
            if dt > 1e300:
                dt = 1e300
            za[t] = za_t
            ws[t] = ws_t
            d[t] = dt
            ru_t = 1.0 - a[t] - s[t]
            ru[t] = ru_t
            wrs[t] = w[t] * ru_t / s[t]
            mu += a[t] * z[t] + s[t] * w[t]
        mu /= 2.0 * n
        for i in range(p):
            for j in range(i, p):
                acc = 0.0
                for t in range(n):
                    acc += X[t, i] * X[t, j] / d[t]
                M[i, j] = acc
                M[j, i] = acc
        tr = 0.0
        for i in range(p):
            tr += M[i, i]
        ridge = 1e-13 * tr / p
        for i in range(p):
            M[i, i] += ridge

        # predictor: rhs reduces to resid + w*ru/s
        for t in range(n):
            rhs[t] = resid[t] + wrs[t]
        for k in range(p):
            acc = -rb[k]
            for t in range(n):
                acc += X[t, k] * rhs[t] / d[t]
            g[k] = acc
        if not _solve_small(M, g, db, STRICT_GUARD):
            break
        finite = True
        for k in range(p):
            if not np.isfinite(db[k]):
                finite = False
        if not finite:
            break
        worst_p = 1.0
        worst_d = 1.0
        for t in range(n):
            xb = 0.0
            for k in range(p):
                xb += X[t, k] * db[k]
            da_t = (rhs[t] - xb) / d[t]
            ds_t = ru[t] - da_t
            dz_t = -(z[t] + za[t] * da_t)
            dw_t = -(w[t] + ws[t] * ds_t)
            da[t] = da_t
            ds[t] = ds_t
            dz[t] = dz_t
            dw[t] = dw_t
            q = -da_t / a[t]
            if q > worst_p:
                worst_p = q
            q = -ds_t / s[t]
            if q > worst_p:
                worst_p = q
            q = -dz_t / z[t]
            if q > worst_d:
                worst_d = q
            q = -dw_t / w[t]
            if q > worst_d:
                worst_d = q
        ap = 1.0 / worst_p
        ad = 1.0 / worst_d
        mu_aff = 0.0
        for t in range(n):
            mu_aff += (a[t] + ap * da[t]) * (z[t] + ad * dz[t])
            mu_aff += (s[t] + ap * ds[t]) * (w[t] + ad * dw[t])
        mu_aff /= 2.0 * n
        ratio = mu_aff / max(mu, 1e-300)
        sigma = ratio * ratio * ratio
        if sigma > 1.0:
            sigma = 1.0
        elif sigma < 0.0:
            sigma = 0.0
        smu = sigma * mu

        # corrector
        for t in range(n):
            cz_t = da[t] * dz[t] / a[t]
            cw_t = ds[t] * dw[t] / s[t]
            cz[t] = cz_t
            cw[t] = cw_t
            rhs[t] = resid[t] + smu / a[t] - smu / s[t] - cz_t + cw_t + wrs[t]
        for k in range(p):
            acc = -rb[k]
            for t in range(n):
                acc += X[t, k] * rhs[t] / d[t]
            g[k] = acc
        if not _solve_small(M, g, db, STRICT_GUARD):
            break
        finite = True
        for k in range(p):
            if not np.isfinite(db[k]):
                finite = False
        if not finite:
            break
        worst_p = 1.0
        worst_d = 1.0
        for t in range(n):
            xb = 0.0
            for k in range(p):
                xb += X[t, k] * db[k]
            da_t = (rhs[t] - xb) / d[t]
            ds_t = ru[t] - da_t
            dz_t = smu / a[t] - (z[t] + cz[t] + za[t] * da_t)
            dw_t = smu / s[t] - (w[t] + cw[t] + ws[t] * ds_t)
            da[t] = da_t
            ds[t] = ds_t
            dz[t] = dz_t
            dw[t] = dw_t
            q = -da_t / a[t]
            if q > worst_p:
                worst_p = q
            q = -ds_t / s[t]
            if q > worst_p:
                worst_p = q
            q = -dz_t / z[t]
            if q > worst_d:
                worst_d = q
            q = -dw_t / w[t]
            if q > worst_d:
                worst_d = q
        ap = STEP_SCALE / worst_p
        ad = STEP_SCALE / worst_d
        for t in range(n):
            a[t] += ap * da[t]
            s[t] += ap * ds[t]
            z[t] += ad * dz[t]
            w[t] += ad * dw[t]
        for k in range(p):
            beta[k] += ad * db[k]
        iterations += 1

    if not converged:
        obj_p = 0.0
        obj_d = -ytau
        for t in range(n):
            r = y[t]
            for k in range(p):
                r -= X[t, k] * beta[k]
            obj_p += r * (tau - (1.0 if r <= 0.0 else 0.0))
            obj_d += y[t] * a[t]
        feas = 0.0
        for k in range(p):
            acc = b0[k]
            for t in range(n):
                acc -= X[t, k] * a[t]
            if abs(acc) > feas:
                feas = abs(acc)
        if (obj_p - obj_d <= GAP_TOL * max(1.0, abs(obj_p))) and (
            feas <= FEAS_TOL * b0_scale
        ):
            converged = True

    obj_dual = -ytau
    for t in range(n):
        obj_dual += y[t] * a[t]
    return obj_dual, iterations, converged, STATUS_OK


@njit(cache=True)
def _check_objective(X, y, tau, beta):
    obj = 0.0
    n, p = X.shape
    for t in range(n):
        r = y[t]
        for k in range(p):
            r -= X[t, k] * beta[k]
        obj += r * (tau - (1.0 if r <= 0.0 else 0.0))
    return obj


@njit(cache=True)
def _vertex_polish(X, y, tau, subsets, beta, objective):
    """Crossover to the best interpolating vertex near the iterate.

    Candidates are the k observations with the smallest |residual| (ties
    resolve to the earlier index), kept in sorted order so the subset
    enumeration is deterministic.  Returns the possibly improved objective.
    """
    n, p = X.shape
    k = subsets.max() + 1 if subsets.size else 0
    if k <= 0 or n < p:
        return objective
    if k > n:
        return objective

    cand = np.empty(k, np.int64)
    cand_r = np.empty(k)
    count = 0
    for t in range(n):
        r = y[t]
        for j in range(p):
            r -= X[t, j] * beta[j]
        r = abs(r)
        if count < k:
            i = count
            while i > 0 and cand_r[i - 1] > r:
                cand_r[i] = cand_r[i - 1]
                cand[i] = cand[i - 1]
                i -= 1
            cand_r[i] = r
            cand[i] = t
            count += 1
        elif r < cand_r[k - 1]:
            i = k - 1
            while i > 0 and cand_r[i - 1] > r:
                cand_r[i] = cand_r[i - 1]
                cand[i] = cand[i - 1]
                i -= 1
            cand_r[i] = r
            cand[i] = t

    Msub = np.empty((p, p))
    ysub = np.empty(p)
    bc = np.empty(p)
    best = np.empty(p)
    S = subsets.shape[0]
    best_obj = np.inf
    found = False
    for si in range(S):
        for i in range(p):
            t = cand[subsets[si, i]]
            ysub[i] = y[t]
            for j in range(p):
                Msub[i, j] = X[t, j]
        if not _solve_small(Msub, ysub, bc, STRICT_GUARD):
            continue
        obj = _check_objective(X, y, tau, bc)
        if obj < best_obj:
            best_obj = obj
            for j in range(p):
                best[j] = bc[j]
            found = True
    if found and best_obj <= objective + 1e-10 * max(1.0, abs(objective)):
        for j in range(p):
            beta[j] = best[j]
        return best_obj
    return objective


@njit(cache=True)
def _certificate(X, y, tau, beta):
    """Objective, zero-residual count, subgradient gap at beta."""
    n, p = X.shape
    scale_y = 0.0
    for t in range(n):
        if abs(y[t]) > scale_y:
            scale_y = abs(y[t])
    if scale_y <= 0.0:
        scale_y = 1.0
    thr = ZERO_RESIDUAL_REL * scale_y
    maxside = tau if tau >= 1.0 - tau else 1.0 - tau
    objective = 0.0
    zero_count = 0
    gap = 0.0
    for kk in range(p):
        lhs = 0.0
        bound = 0.0
        for t in range(n):
            r = y[t]
            for j in range(p):
                r -= X[t, j] * beta[j]
            if kk == 0:
                objective += r * (tau - (1.0 if r <= 0.0 else 0.0))
            if abs(r) <= thr:
                if kk == 0:
                    zero_count += 1
                bound += abs(X[t, kk])
            else:
                lhs += X[t, kk] * (tau - (1.0 if r < 0.0 else 0.0))
        excess = abs(lhs) - bound * maxside
        if excess > gap:
            gap = excess
    if gap < 0.0:
        gap = 0.0
    return objective, zero_count, gap


@njit(cache=True)
def _fit_one(X, y, tau, max_iter, subsets, beta):
    obj_dual, iters, conv, status = _ip_fit(X, y, tau, max_iter, beta)
    if status != STATUS_OK:
        return 0.0, 0, 0.0, iters, False, status
    objective = _check_objective(X, y, tau, beta)
    objective = _vertex_polish(X, y, tau, subsets, beta, objective)
    if not conv and objective - obj_dual <= GAP_TOL * max(1.0, abs(objective)):
        conv = True
    objective, zero_count, gap = _certificate(X, y, tau, beta)
    # a (near-)exact subgradient certificate proves optimality even when the
    # dual iterate stalled; the slack here is far below the advertised bound
    if not conv and gap <= CERT_CONVERGED * X.shape[0]:
        conv = True
    return objective, zero_count, gap, iters, conv, status


@njit(cache=True)
def _build_design(X, omega, reduced):
    n = X.shape[0]
    if reduced:
        for t in range(n):
            X[t, 0] = 1.0
            X[t, 1] = math.cos(omega * (t + 1))
    else:
        for t in range(n):
            X[t, 0] = 1.0
            X[t, 1] = math.cos(omega * (t + 1))
            X[t, 2] = math.sin(omega * (t + 1))


@njit(cache=True)
def fit_grid(y, taus, omegas, max_iter, subsets3, subsets2):
    """Fit one shared series at many (tau, omega) rows."""
    F = omegas.size
    n = y.size
    X = np.empty((n, 3))
    beta = np.empty(3)
    out_beta = np.zeros((F, 3))
    objective = np.empty(F)
    zero_count = np.empty(F, np.int64)
    gap = np.empty(F)
    iterations = np.empty(F, np.int64)
    converged = np.empty(F, np.bool_)
    status = np.empty(F, np.int64)
    for f in range(F):
        reduced = abs(omegas[f] - np.pi) <= PI_SNAP
        p = 2 if reduced else 3
        Xv = X[:, :p]
        _build_design(Xv, omegas[f], reduced)
        bv = beta[:p]
        subs = subsets2 if reduced else subsets3
        obj, zc, gp, it, conv, st = _fit_one(Xv, y, taus[f], max_iter, subs, bv)
        for k in range(p):
            out_beta[f, k] = bv[k]
        objective[f] = obj
        zero_count[f] = zc
        gap[f] = gp
        iterations[f] = it
        converged[f] = conv
        status[f] = st
    return out_beta, objective, zero_count, gap, iterations, converged, status


@njit(cache=True)
def fit_rows(ys, taus, omegas, max_iter, subsets3, subsets2):
    """Fit many series rows, one (tau, omega) pair per row."""
    F = ys.shape[0]
    n = ys.shape[1]
    X = np.empty((n, 3))
    beta = np.empty(3)
    out_beta = np.zeros((F, 3))
    objective = np.empty(F)
    zero_count = np.empty(F, np.int64)
    gap = np.empty(F)
    iterations = np.empty(F, np.int64)
    converged = np.empty(F, np.bool_)
    status = np.empty(F, np.int64)
    f_prev = -1.0
    reduced = False
    for f in range(F):
        if f == 0 or omegas[f] != f_prev:
            reduced = abs(omegas[f] - np.pi) <= PI_SNAP
            _build_design(X[:, : (2 if reduced else 3)], omegas[f], reduced)
            f_prev = omegas[f]
        p = 2 if reduced else 3
        Xv = X[:, :p]
        bv = beta[:p]
        subs = subsets2 if reduced else subsets3
        obj, zc, gp, it, conv, st = _fit_one(Xv, ys[f], taus[f], max_iter, subs, bv)
        for k in range(p):
            out_beta[f, k] = bv[k]
        objective[f] = obj
        zero_count[f] = zc
        gap[f] = gp
        iterations[f] = it
        converged[f] = conv
        status[f] = st
    return out_beta, objective, zero_count, gap, iterations, converged, status


@njit(cache=True)
def fit_design(X, y, tau, max_iter, subsets):
    """Fit a single problem with an explicit design (p <= 3)."""
    p = X.shape[1]
    beta = np.empty(p)
    obj, zc, gp, it, conv, st = _fit_one(X, y, tau, max_iter, subsets, beta)
    return beta, obj, zc, gp, it, conv, st
