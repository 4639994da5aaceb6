# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# cython: language_level=3
"""Compiled kernels for the cone solvers.

Self-contained: eigendecompositions use a cyclic Jacobi sweep for complex
Hermitian matrices, so the extension only links against libm. The Python
entry points mirror duosec.solvers.reference exactly.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs, hypot, log2, sqrt

cnp.import_array()

cdef double LOG2E = 1.4426950408889634


# ---------------------------------------------------------------------------
# dense Hermitian eigensolver (cyclic Jacobi)
# ---------------------------------------------------------------------------

cdef void _jacobi(double complex[:, ::1] a, double[::1] w,
                  double complex[:, ::1] v, int m) noexcept nogil:
    cdef int p, q, k, sweep
    cdef double app, aqq, absb, tau, t, c, s, fro, off, thresh
    cdef double complex b, alpha, akp, akq, vkp, vkq
    for p in range(m):
        for q in range(m):
            v[p, q] = 0.0
        v[p, p] = 1.0
    if m == 1:
        w[0] = a[0, 0].real
        return
    fro = 0.0
    for p in range(m):
        for q in range(m):
            fro += a[p, q].real * a[p, q].real + a[p, q].imag * a[p, q].imag
    fro = sqrt(fro)
    thresh = 1e-14 * (fro + 1.0)
    for sweep in range(60):
        off = 0.0
        for p in range(m - 1):
            for q in range(p + 1, m):
                off += a[p, q].real * a[p, q].real + a[p, q].imag * a[p, q].imag
        if sqrt(2.0 * off) <= thresh:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                b = a[p, q]
                absb = hypot(b.real, b.imag)
                if absb <= 1e-18 * (fro + 1.0):
                    continue
                alpha = b / absb
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * absb)
                if tau >= 0.0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                for k in range(m):
                    if k == p or k == q:
                        continue
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * alpha.conjugate() * akq
                    a[k, q] = s * alpha * akp + c * akq
                    a[p, k] = a[k, p].conjugate()
                    a[q, k] = a[k, q].conjugate()
                a[p, p] = app * c * c + aqq * s * s - 2.0 * c * s * absb
                a[q, q] = app * s * s + aqq * c * c + 2.0 * c * s * absb
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(m):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * alpha.conjugate() * vkq
                    v[k, q] = s * alpha * vkp + c * vkq
    for p in range(m):
        w[p] = a[p, p].real


def eigh_hermitian(mat):
    """Eigenvalues/eigenvectors of a Hermitian matrix (unordered)."""
    a = np.array(mat, dtype=complex, order="C")
    m = a.shape[0]
    a = 0.5 * (a + a.conj().T)
    w = np.empty(m, dtype=float)
    v = np.empty((m, m), dtype=complex)
    _jacobi(a, w, v, m)
    return w, v


# ---------------------------------------------------------------------------
# capped-simplex + grouped PSD/trace projection
# ---------------------------------------------------------------------------

cdef void _cap_simplex(double* vals, int n, double budget, double* out,
                       double* scratch) noexcept nogil:
    cdef int i, j, k
    cdef double total = 0.0
    cdef double key, csum, theta
    if budget <= 0.0:
        for i in range(n):
            out[i] = 0.0
        return
    for i in range(n):
        out[i] = vals[i] if vals[i] > 0.0 else 0.0
        total += out[i]
    if total <= budget:
        return
    for i in range(n):
        scratch[i] = vals[i]
    for i in range(1, n):  # insertion sort, descending
        key = scratch[i]
        j = i - 1
        while j >= 0 and scratch[j] < key:
            scratch[j + 1] = scratch[j]
            j -= 1
        scratch[j + 1] = key
    # k = 1 always qualifies in exact arithmetic once budget > 0, so seed the
    # water level there and only move it when a later level strictly qualifies
    csum = scratch[0]
    theta = csum - budget
    k = 0
    for i in range(1, n):
        csum += scratch[i]
        if scratch[i] - (csum - budget) / (i + 1) > 0.0:
            theta = (csum - budget) / (i + 1)
            k = i
    for i in range(n):
        out[i] = vals[i] - theta if vals[i] - theta > 0.0 else 0.0


cdef void _project_groups_c(double complex[:, :, ::1] src,
                            double complex[:, :, ::1] dst,
                            long[::1] gids, long[::1] gstarts,
                            double[::1] gbudgets,
                            double complex[:, ::1] work,
                            double complex[:, :, ::1] vecs,
                            double[::1] evals, double[::1] evout,
                            double[::1] scratch, int m) noexcept nogil:
    cdef int g, j, i, r, c, k, lo, hi, nv
    cdef double lam
    cdef double complex acc
    for g in range(gstarts.shape[0] - 1):
        lo = gstarts[g]
        hi = gstarts[g + 1]
        nv = hi - lo
        for j in range(nv):
            i = gids[lo + j]
            for r in range(m):
                for c in range(m):
                    work[r, c] = 0.5 * (src[i, r, c] + src[i, c, r].conjugate())
            _jacobi(work, evals[j * m:(j + 1) * m], vecs[j], m)
        _cap_simplex(&evals[0], nv * m, gbudgets[g], &evout[0], &scratch[0])
        for j in range(nv):
            i = gids[lo + j]
            for r in range(m):
                for c in range(m):
                    dst[i, r, c] = 0.0
            for k in range(m):
                lam = evout[j * m + k]
                if lam == 0.0:
                    continue
                for r in range(m):
                    for c in range(m):
                        dst[i, r, c] = dst[i, r, c] + lam * vecs[j, r, k] * vecs[j, c, k].conjugate()


def project_psd_trace(mat, double trace_budget):
    """Project a Hermitian matrix onto {X >= 0, tr(X) <= trace_budget}."""
    a = np.array(mat, dtype=complex, order="C")
    m = a.shape[0]
    src = a.reshape(1, m, m)
    dst = np.empty_like(src)
    gids = np.zeros(1, dtype=np.int64)
    gstarts = np.array([0, 1], dtype=np.int64)
    gbudgets = np.array([trace_budget], dtype=float)
    work = np.empty((m, m), dtype=complex)
    vecs = np.empty((1, m, m), dtype=complex)
    evals = np.empty(m, dtype=float)
    evout = np.empty(m, dtype=float)
    scratch = np.empty(m, dtype=float)
    _project_groups_c(src, dst, gids, gstarts, gbudgets, work, vecs,
                      evals, evout, scratch, m)
    return dst[0]


# ---------------------------------------------------------------------------
# projected gradient ascent for the log-affine SDP
# ---------------------------------------------------------------------------

cdef double _pair_trace(double complex[:, ::1] coeff,
                        double complex[:, ::1] x, int m) noexcept nogil:
    # both Hermitian -> tr(CX) = sum Re(conj(C_ij) X_ij)
    cdef int r, c
    cdef double s = 0.0
    for r in range(m):
        for c in range(m):
            s += coeff[r, c].real * x[r, c].real + coeff[r, c].imag * x[r, c].imag
    return s


cdef double _eval_objective(double[::1] off, double complex[:, :, :, ::1] logc,
                            double complex[:, :, ::1] linc,
                            double complex[:, :, :, ::1] gainc,
                            double[::1] gthr, double[::1] gmult, double grho,
                            double complex[:, :, ::1] x,
                            double[::1] args, double[::1] active,
                            int m) noexcept nogil:
    cdef int t, v, r
    cdef double arg, val, slack
    cdef int T = off.shape[0]
    cdef int R = gthr.shape[0]
    cdef int V = linc.shape[0]
    val = 0.0
    for t in range(T):
        arg = off[t]
        for v in range(V):
            arg += _pair_trace(logc[t, v], x[v], m)
        if arg <= 0.0:
            return -INFINITY
        args[t] = arg
        val += log2(arg)
    for v in range(V):
        val += _pair_trace(linc[v], x[v], m)
    for r in range(R):
        arg = 0.0
        for v in range(V):
            arg += _pair_trace(gainc[r, v], x[v], m)
        slack = gmult[r] + grho * (gthr[r] - arg)
        active[r] = slack if slack > 0.0 else 0.0
        val -= (active[r] * active[r] - gmult[r] * gmult[r]) / (2.0 * grho)
    return val


cdef void _eval_gradient(double complex[:, :, :, ::1] logc,
                         double complex[:, :, ::1] linc,
                         double complex[:, :, :, ::1] gainc,
                         double[::1] args, double[::1] active,
                         double complex[:, :, ::1] grad, int m) noexcept nogil:
    cdef int t, v, r, i, j
    cdef double w
    cdef int T = args.shape[0]
    cdef int R = active.shape[0]
    cdef int V = linc.shape[0]
    for v in range(V):
        for i in range(m):
            for j in range(m):
                grad[v, i, j] = linc[v, i, j]
    for t in range(T):
        w = LOG2E / args[t]
        for v in range(V):
            for i in range(m):
                for j in range(m):
                    grad[v, i, j] = grad[v, i, j] + w * logc[t, v, i, j]
    for r in range(R):
        if active[r] == 0.0:
            continue
        for v in range(V):
            for i in range(m):
                for j in range(m):
                    grad[v, i, j] = grad[v, i, j] + active[r] * gainc[r, v, i, j]


def pga_log_affine(x, log_offsets, log_coeffs, lin_coeffs, gain_coeffs,
                   gain_thresholds, gain_multipliers, double gain_rho,
                   groups, double tol, long max_iters):
    """Armijo projected gradient ascent; same contract as the reference."""
    cdef double complex[:, :, ::1] xv = x
    cdef int V = x.shape[0]
    cdef int m = x.shape[1]
    cdef double[::1] off = np.ascontiguousarray(log_offsets, dtype=float)
    cdef double complex[:, :, :, ::1] logc = np.ascontiguousarray(log_coeffs, dtype=complex)
    cdef double complex[:, :, ::1] linc = np.ascontiguousarray(lin_coeffs, dtype=complex)
    cdef double complex[:, :, :, ::1] gainc = np.ascontiguousarray(gain_coeffs, dtype=complex)
    cdef double[::1] gthr = np.ascontiguousarray(gain_thresholds, dtype=float)
    cdef double[::1] gmult = np.ascontiguousarray(gain_multipliers, dtype=float)

    ids_list = []
    starts_list = [0]
    budget_list = []
    for idxs, budget in groups:
        ids_list.extend(int(i) for i in idxs)
        starts_list.append(len(ids_list))
        budget_list.append(float(budget))
    cdef long[::1] gids = np.asarray(ids_list, dtype=np.int64)
    cdef long[::1] gstarts = np.asarray(starts_list, dtype=np.int64)
    cdef double[::1] gbudgets = np.asarray(budget_list, dtype=float)

    cdef int T = off.shape[0]
    cdef int R = gthr.shape[0]
    cdef double[::1] args = np.empty(T, dtype=float)
    cdef double[::1] active = np.empty(R, dtype=float)
    cdef double[::1] args_t = np.empty(T, dtype=float)
    cdef double[::1] active_t = np.empty(R, dtype=float)
    grad_arr = np.empty((V, m, m), dtype=complex)
    trial_arr = np.empty((V, m, m), dtype=complex)
    shifted_arr = np.empty((V, m, m), dtype=complex)
    probe_arr = np.empty((V, m, m), dtype=complex)
    cdef double complex[:, :, ::1] grad = grad_arr
    cdef double complex[:, :, ::1] trial = trial_arr
    cdef double complex[:, :, ::1] shifted = shifted_arr
    cdef double complex[:, :, ::1] probe = probe_arr
    cdef double complex[:, ::1] work = np.empty((m, m), dtype=complex)
    cdef double complex[:, :, ::1] vecs = np.empty((V, m, m), dtype=complex)
    cdef double[::1] evals = np.empty(V * m, dtype=float)
    cdef double[::1] evout = np.empty(V * m, dtype=float)
    cdef double[::1] scratch = np.empty(V * m, dtype=float)

    cdef double f_cur, f_trial, alpha, inner, step_norm, stat
    cdef double dre, dim_
    cdef long it = 0
    cdef int bt, v, i, j, stepped, status, small_step
    cdef long check_every = 25

    f_cur = _eval_objective(off, logc, linc, gainc, gthr, gmult, gain_rho,
                            xv, args, active, m)
    _eval_gradient(logc, linc, gainc, args, active, grad, m)
    alpha = 1.0
    stat = INFINITY
    status = 1  # max_iters
    step_norm = 0.0
    for it in range(1, max_iters + 1):
        stepped = 0
        for bt in range(60):
            inner = 0.0
            step_norm = 0.0
            for v in range(V):
                for i in range(m):
                    for j in range(m):
                        shifted[v, i, j] = xv[v, i, j] + alpha * grad[v, i, j]
            _project_groups_c(shifted, trial, gids, gstarts, gbudgets,
                              work, vecs, evals, evout, scratch, m)
            for v in range(V):
                for i in range(m):
                    for j in range(m):
                        dre = trial[v, i, j].real - xv[v, i, j].real
                        dim_ = trial[v, i, j].imag - xv[v, i, j].imag
                        inner += grad[v, i, j].real * dre + grad[v, i, j].imag * dim_
                        step_norm += dre * dre + dim_ * dim_
            step_norm = sqrt(step_norm)
            if step_norm == 0.0:
                break
            f_trial = _eval_objective(off, logc, linc, gainc, gthr, gmult,
                                      gain_rho, trial, args_t, active_t, m)
            if f_trial >= f_cur + 1e-4 * inner and f_trial > -INFINITY:
                for v in range(V):
                    for i in range(m):
                        for j in range(m):
                            xv[v, i, j] = trial[v, i, j]
                f_cur = f_trial
                alpha *= 1.25
                stepped = 1
                break
            alpha *= 0.5
            if alpha < 1e-18:
                break
        small_step = 1 if (stepped == 0 or step_norm <= tol) else 0
        if small_step == 1 or it % check_every == 0:
            for v in range(V):
                for i in range(m):
                    for j in range(m):
                        shifted[v, i, j] = xv[v, i, j] + grad[v, i, j]
            _project_groups_c(shifted, probe, gids, gstarts, gbudgets,
                              work, vecs, evals, evout, scratch, m)
            stat = 0.0
            for v in range(V):
                for i in range(m):
                    for j in range(m):
                        dre = probe[v, i, j].real - xv[v, i, j].real
                        dim_ = probe[v, i, j].imag - xv[v, i, j].imag
                        stat += dre * dre + dim_ * dim_
            stat = sqrt(stat)
            if stat <= tol:
                status = 0  # success
                break
            if stepped == 0:
                status = 2  # stalled
                break
        if stepped == 1:
            f_cur = _eval_objective(off, logc, linc, gainc, gthr, gmult,
                                    gain_rho, xv, args, active, m)
            _eval_gradient(logc, linc, gainc, args, active, grad, m)
    return f_cur, int(it), stat, int(status)


# ---------------------------------------------------------------------------
# flight-chain projection (Dykstra) + linear ascent
# ---------------------------------------------------------------------------

cdef double _chain_viol_c(double[:, ::1] u, double edge_limit,
                          double[:, ::1] centers, double[::1] radii) noexcept nogil:
    cdef int n, n1 = u.shape[0]
    cdef double viol = 0.0, d
    for n in range(1, n1):
        d = hypot(u[n, 0] - u[n - 1, 0], u[n, 1] - u[n - 1, 1]) - edge_limit
        if d > viol:
            viol = d
    for n in range(1, n1 - 1):
        if radii[n] != INFINITY:
            d = hypot(u[n, 0] - centers[n, 0], u[n, 1] - centers[n, 1]) - radii[n]
            if d > viol:
                viol = d
    return viol


cdef int _dykstra_c(double[:, ::1] u, double edge_limit,
                    double[:, ::1] centers, double[::1] radii,
                    double ftol, int max_sweeps,
                    double[:, :, ::1] corr, double[:, ::1] w,
                    double[:, ::1] before) noexcept nogil:
    cdef int n1 = u.shape[0]
    cdef int sweep, fam, n, start, free_prev, free_cur
    cdef double dx, dy, dist, excess, ux, uy, sp, sc, change, d
    for fam in range(3):
        for n in range(n1):
            corr[fam, n, 0] = 0.0
            corr[fam, n, 1] = 0.0
    for sweep in range(1, max_sweeps + 1):
        for n in range(n1):
            before[n, 0] = u[n, 0]
            before[n, 1] = u[n, 1]
        for fam in range(3):
            for n in range(n1):
                w[n, 0] = u[n, 0] + corr[fam, n, 0]
                w[n, 1] = u[n, 1] + corr[fam, n, 1]
            if fam < 2:
                start = 1 + fam
                n = start
                while n < n1:
                    dx = w[n, 0] - w[n - 1, 0]
                    dy = w[n, 1] - w[n - 1, 1]
                    dist = hypot(dx, dy)
                    if dist > edge_limit:
                        excess = dist - edge_limit
                        ux = dx / dist
                        uy = dy / dist
                        free_prev = 1 if n - 1 >= 1 else 0
                        free_cur = 1 if n <= n1 - 2 else 0
                        if free_prev == 1 and free_cur == 1:
                            sp = 0.5
                            sc = 0.5
                        elif free_prev == 1:
                            sp = 1.0
                            sc = 0.0
                        else:
                            sp = 0.0
                            sc = 1.0
                        w[n - 1, 0] += sp * excess * ux
                        w[n - 1, 1] += sp * excess * uy
                        w[n, 0] -= sc * excess * ux
                        w[n, 1] -= sc * excess * uy
                    n += 2
            else:
                for n in range(1, n1 - 1):
                    if radii[n] != INFINITY:
                        dx = w[n, 0] - centers[n, 0]
                        dy = w[n, 1] - centers[n, 1]
                        dist = hypot(dx, dy)
                        if dist > radii[n]:
                            w[n, 0] = centers[n, 0] + dx * radii[n] / dist
                            w[n, 1] = centers[n, 1] + dy * radii[n] / dist
            for n in range(n1):
                corr[fam, n, 0] = u[n, 0] + corr[fam, n, 0] - w[n, 0]
                corr[fam, n, 1] = u[n, 1] + corr[fam, n, 1] - w[n, 1]
                u[n, 0] = w[n, 0]
                u[n, 1] = w[n, 1]
        change = 0.0
        for n in range(n1):
            d = fabs(u[n, 0] - before[n, 0])
            if d > change:
                change = d
            d = fabs(u[n, 1] - before[n, 1])
            if d > change:
                change = d
        if change <= ftol and _chain_viol_c(u, edge_limit, centers, radii) <= ftol:
            return sweep
    return -1


def chain_socp(u, objective, double edge_limit, centers, radii,
               double tol, long max_iters):
    """Linear ascent over the flight chain; same contract as the reference."""
    cdef double[:, ::1] uv = u
    cdef int n1 = u.shape[0]
    grad_arr = np.ascontiguousarray(objective, dtype=float).copy()
    grad_arr[0] = 0.0
    grad_arr[-1] = 0.0
    cdef double[:, ::1] grad = grad_arr
    if centers is None:
        centers = np.zeros((n1, 2), dtype=float)
    cdef double[:, ::1] cv = np.ascontiguousarray(centers, dtype=float)
    cdef double[::1] rv = np.ascontiguousarray(radii, dtype=float)

    corr = np.zeros((3, n1, 2), dtype=float)
    wbuf = np.empty((n1, 2), dtype=float)
    before = np.empty((n1, 2), dtype=float)
    trial_arr = np.empty((n1, 2), dtype=float)
    cdef double[:, :, ::1] corrv = corr
    cdef double[:, ::1] wv = wbuf
    cdef double[:, ::1] bv = before
    cdef double[:, ::1] trial = trial_arr

    cdef double tol_u = tol * (1.0 if edge_limit < 1.0 else edge_limit)
    cdef double ftol = 0.01 * tol_u
    cdef int n, sweeps
    cdef double gnorm = 0.0, scale, alpha, alpha_hi, inner, obj, stat, viol, d, f_mark, f_now
    cdef long it = 0
    cdef long next_probe = 1
    cdef int status = 1  # max_iters
    if ftol < 1e-14:
        ftol = 1e-14

    sweeps = _dykstra_c(uv, edge_limit, cv, rv, ftol, 2000, corrv, wv, bv)
    viol = _chain_viol_c(uv, edge_limit, cv, rv)
    if sweeps < 0 and viol > 10.0 * ftol:
        obj = 0.0
        for n in range(n1):
            obj += grad[n, 0] * uv[n, 0] + grad[n, 1] * uv[n, 1]
        return obj, 0, INFINITY, viol, 3  # infeasible

    for n in range(n1):
        gnorm += grad[n, 0] * grad[n, 0] + grad[n, 1] * grad[n, 1]
    gnorm = sqrt(gnorm)
    if gnorm == 0.0:
        obj = 0.0
        for n in range(n1):
            obj += grad[n, 0] * uv[n, 0] + grad[n, 1] * uv[n, 1]
        return obj, 0, 0.0, viol, 0

    scale = edge_limit / gnorm
    alpha = scale
    alpha_hi = 4.0 * (n1 - 1) * scale  # beyond set diameter, larger steps add nothing
    stat = INFINITY
    next_probe = 1
    f_mark = 0.0
    for n in range(n1):
        f_mark += grad[n, 0] * uv[n, 0] + grad[n, 1] * uv[n, 1]
    for it in range(1, max_iters + 1):
        for n in range(n1):
            trial[n, 0] = uv[n, 0] + alpha * grad[n, 0]
            trial[n, 1] = uv[n, 1] + alpha * grad[n, 1]
        _dykstra_c(trial, edge_limit, cv, rv, ftol, 2000, corrv, wv, bv)
        inner = 0.0
        for n in range(n1):
            inner += grad[n, 0] * (trial[n, 0] - uv[n, 0])
            inner += grad[n, 1] * (trial[n, 1] - uv[n, 1])
            uv[n, 0] = trial[n, 0]
            uv[n, 1] = trial[n, 1]
        if inner > 0.5 * alpha * gnorm * gnorm:
            alpha *= 2.0
        else:
            alpha *= 0.7
        if alpha < 1e-4 * scale:
            alpha = 1e-4 * scale
        if alpha > alpha_hi:
            alpha = alpha_hi
        if it >= next_probe and (it % 8 == 0 or inner <= 0.1 * tol_u * gnorm):
            for n in range(n1):
                trial[n, 0] = uv[n, 0] + scale * grad[n, 0]
                trial[n, 1] = uv[n, 1] + scale * grad[n, 1]
            _dykstra_c(trial, edge_limit, cv, rv, ftol, 2000, corrv, wv, bv)
            stat = 0.0
            for n in range(n1):
                d = fabs(trial[n, 0] - uv[n, 0])
                if d > stat:
                    stat = d
                d = fabs(trial[n, 1] - uv[n, 1])
                if d > stat:
                    stat = d
            if stat <= tol_u:
                status = 0
                break
            next_probe = it + 8
        if it % 64 == 0:
            f_now = 0.0
            for n in range(n1):
                f_now += grad[n, 0] * uv[n, 0] + grad[n, 1] * uv[n, 1]
            if f_now - f_mark <= tol_u * gnorm:  # one tol-sized move along grad
                status = 0
                break
            f_mark = f_now
    obj = 0.0
    for n in range(n1):
        obj += grad[n, 0] * uv[n, 0] + grad[n, 1] * uv[n, 1]
    viol = _chain_viol_c(uv, edge_limit, cv, rv)
    return obj, int(it), stat, viol, status
