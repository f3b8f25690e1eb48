"""Primal-dual interior-point solver for small dense SDPs.

Solves the standard-form pair

    min <c, x>   s.t.  A(x) = b,  x in K            (primal)
    max <b, y>   s.t.  A*(y) + s = c,  s in K       (dual)

over a product of real symmetric PSD blocks, via the homogeneous self-dual
embedding with Nesterov-Todd scaling and a Mehrotra predictor-corrector.
The embedding yields certificates: on infeasible problems a Farkas-type dual
ray, on unbounded ones an improving primal ray.

Problems enter through :class:`~cohsim.sdp.problem.SdpProblem`; presolve
converts inequalities to slack blocks, eliminates free scalars by pivoting
them out of equalities (largest coefficient wins, first on ties), embeds
Hermitian blocks as real symmetric ones, and drops linearly dependent
equality rows (QR with column pivoting on A^T; dropped rows are checked for
consistency against the kept ones).  All of this is undone when the solution
is packaged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .embed import embed_matrix, extract_matrix
from .problem import LinFunc, SdpProblem

__all__ = ["SdpSolution", "SolverError", "solve", "DEFAULT_TOL"]

DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 200
STEP_FRACTION = 0.98


class SolverError(RuntimeError):
    """Raised by callers that require an optimal solution and did not get one."""

    def __init__(self, message: str, solution: "SdpSolution | None" = None):
        super().__init__(message)
        self.solution = solution


@dataclass
class SdpSolution:
    """Outcome of one solve.

    ``status`` is one of ``optimal``, ``infeasible``, ``unbounded``,
    ``numeric-failure``.  On ``optimal``, ``block_values`` maps every declared
    block label to its (Hermitian or real symmetric) value and
    ``scalar_values`` carries the recovered free scalars.  ``diagnostics``
    records residuals, the final barrier parameter and, for infeasible or
    unbounded problems, the certificate for the presolved system.
    """

    status: str
    primal_value: float = float("nan")
    dual_value: float = float("nan")
    gap: float = float("nan")
    block_values: dict = field(default_factory=dict)
    scalar_values: dict = field(default_factory=dict)
    iterations: int = 0
    diagnostics: dict = field(default_factory=dict)

    def require_optimal(self) -> "SdpSolution":
        if self.status != "optimal":
            raise SolverError(f"SDP solve ended with status {self.status!r}", self)
        return self


def solve(problem: SdpProblem, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> SdpSolution:
    """Solve an :class:`SdpProblem` to relative accuracy ``tol``."""
    if not (1e-12 < tol < 1e-2):
        raise ValueError(f"tol must lie in (1e-12, 1e-2), got {tol}")
    pre = _presolve(problem)
    if pre.status is not None:
        return _package(pre, None, problem)
    raw = _hsde(pre, tol, max_iter)
    return _package(pre, raw, problem)


# ---------------------------------------------------------------------------
# presolve
# ---------------------------------------------------------------------------


@dataclass
class _Pre:
    status: str | None = None            # early verdict from presolve
    diag: dict = field(default_factory=dict)
    sense_sign: float = 1.0
    user_offset: float = 0.0
    elim_offset: float = 0.0
    elim: list = field(default_factory=list)       # (scalar, g, target, Q) in order
    labels: list = field(default_factory=list)     # embedded block labels
    dims: list = field(default_factory=list)       # embedded block dims
    complex_flags: dict = field(default_factory=dict)
    A: list = field(default_factory=list)          # per block (m, n, n)
    b: np.ndarray | None = None
    C: list = field(default_factory=list)          # per block (n, n)
    kept_rows: np.ndarray | None = None
    n_rows_full: int = 0


def _scale_func(f: LinFunc, c: float) -> LinFunc:
    return LinFunc({k: v * c for k, v in f.mats.items()}, {k: v * c for k, v in f.scal.items()})


def _axpy(f: LinFunc, g: LinFunc, c: float) -> None:
    """f += c * g in place (matrix and scalar parts)."""
    for k, v in g.mats.items():
        f.mats[k] = f.mats.get(k, 0) + c * v
    for k, v in g.scal.items():
        f.scal[k] = f.scal.get(k, 0.0) + c * v


def _presolve(p: SdpProblem) -> _Pre:
    pre = _Pre()
    pre.sense_sign = 1.0 if p.sense == "min" else -1.0
    pre.user_offset = p.obj_offset

    obj = p.objective.copy()
    if pre.sense_sign < 0:
        obj = _scale_func(obj, -1.0)
    eqs = [[f.copy(), float(t)] for f, t in p.equalities]

    block_meta = [(b.label, b.dim, b.complex) for b in p.blocks.values()]
    for idx, (f, rel, t) in enumerate(p.inequalities):
        lbl = f"_ineq{idx}"
        block_meta.append((lbl, 1, False))
        g = f.copy()
        g.mats[lbl] = np.array([[1.0 if rel == "<=" else -1.0]])
        eqs.append([g, float(t)])

    # free scalars: pivot them out of the equalities
    for s in p.scalars:
        pivot, best = None, 0.0
        for i, (f, _t) in enumerate(eqs):
            c = abs(f.scal.get(s, 0.0))
            if c > best * (1 + 1e-12) and c > 1e-12:
                best, pivot = c, i
        if pivot is None:
            if abs(obj.scal.get(s, 0.0)) > 1e-12:
                pre.status = "unbounded"
                pre.diag["reason"] = f"free scalar {s!r} appears in no equality but in the objective"
                return pre
            obj.scal.pop(s, None)
            pre.elim.append((s, 1.0, 0.0, LinFunc()))
            continue
        fp, tp = eqs.pop(pivot)
        g = fp.scal.pop(s)
        q = fp  # pivot equality minus its scalar term:  g*s + Q(x) = tp
        pre.elim.append((s, g, tp, q.copy()))
        for row in eqs:
            h = row[0].scal.pop(s, None)
            if h:
                _axpy(row[0], q, -h / g)
                row[1] -= (h / g) * tp
        h = obj.scal.pop(s, None)
        if h:
            _axpy(obj, q, -h / g)
            pre.elim_offset += (h / g) * tp

    leftover = set()
    for f, _t in eqs:
        leftover |= set(f.scal)
    leftover |= set(obj.scal)
    if leftover:
        raise ValueError(f"internal presolve error: scalars {leftover} not eliminated")

    # embed complex blocks as real symmetric ones
    pre.labels = [lbl for lbl, _d, _c in block_meta]
    pre.dims = [2 * d if c else d for _lbl, d, c in block_meta]
    pre.complex_flags = {lbl: c for lbl, _d, c in block_meta}
    dim_of = {lbl: n for (lbl, _d, _c), n in zip(block_meta, pre.dims)}

    def emb(f: LinFunc, lbl: str, cplx: bool) -> np.ndarray:
        m = f.mats.get(lbl)
        if m is None:
            return np.zeros((dim_of[lbl], dim_of[lbl]))
        if cplx:
            return embed_matrix(np.asarray(m, dtype=complex)) / 2
        m = np.asarray(m).real
        return (m + m.T) / 2

    m_rows = len(eqs)
    pre.n_rows_full = m_rows
    pre.b = np.array([t for _f, t in eqs], dtype=float)
    pre.A = []
    pre.C = []
    for (lbl, _d, cplx), n in zip(block_meta, pre.dims):
        arr = np.zeros((m_rows, n, n))
        for i, (f, _t) in enumerate(eqs):
            arr[i] = emb(f, lbl, cplx)
        pre.A.append(arr)
        pre.C.append(emb(obj, lbl, cplx))

    _reduce_rows(pre)
    if pre.status is None and pre.b.size == 0:
        # no constraints left: min <C, X> over the cone is 0 iff every C block
        # is PSD (attained at X = 0), otherwise unbounded below
        wmin = min((float(np.linalg.eigvalsh(c).min()) if c.size else 0.0) for c in pre.C)
        if wmin < -1e-12:
            pre.status = "unbounded"
            pre.diag["reason"] = "objective has conic descent direction and no constraints"
        else:
            pre.status = "trivial-optimal"
    return pre


def _reduce_rows(pre: _Pre) -> None:
    """Normalize rows, drop dependent ones, detect inconsistent duplicates."""
    m = pre.n_rows_full
    if m == 0:
        pre.kept_rows = np.zeros(0, dtype=int)
        return
    flat = np.concatenate([a.reshape(m, -1) for a in pre.A], axis=1)
    norms = np.linalg.norm(flat, axis=1)
    zero = norms < 1e-14
    if np.any(zero & (np.abs(pre.b) > 1e-10)):
        pre.status = "infeasible"
        pre.diag["reason"] = "empty equality row with nonzero target"
        pre.diag["certificate"] = {"type": "presolve", "row": int(np.argmax(zero & (np.abs(pre.b) > 1e-10)))}
        return
    scale = np.where(norms > 1e-14, norms, 1.0)
    flat = flat / scale[:, None]
    b = pre.b / scale

    _q, r, piv = scipy.linalg.qr(flat.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    thresh = max(flat.shape) * np.finfo(float).eps * (diag[0] if diag.size else 0.0)
    thresh = max(thresh, 1e-10)
    rank = int((diag > thresh).sum())
    keep = np.sort(piv[:rank])
    drop = np.setdiff1d(np.arange(m), keep)
    if drop.size:
        coef, *_ = np.linalg.lstsq(flat[keep].T, flat[drop].T, rcond=None)
        mismatch = b[drop] - coef.T @ b[keep]
        bad = np.abs(mismatch) > 1e-7 * (1.0 + np.abs(b).max())
        if np.any(bad):
            pre.status = "infeasible"
            row = int(drop[np.argmax(np.abs(mismatch))])
            pre.diag["reason"] = "equality rows are linearly dependent but inconsistent"
            pre.diag["certificate"] = {"type": "presolve", "row": row, "mismatch": float(np.abs(mismatch).max())}
            return
    pre.kept_rows = keep
    pre.b = b[keep]
    pre.A = [a[keep] / scale[keep, None, None] for a in pre.A]


# ---------------------------------------------------------------------------
# homogeneous self-dual interior-point core
# ---------------------------------------------------------------------------


class _Raw:
    def __init__(self):
        self.status = "numeric-failure"
        self.X = self.S = None
        self.y = None
        self.tau = self.kappa = 1.0
        self.iterations = 0
        self.diag = {}


def _chol(m: np.ndarray) -> np.ndarray:
    scale = max(np.trace(m) / m.shape[0], 1e-300)
    jitter = 0.0
    for _ in range(6):
        try:
            return np.linalg.cholesky(m + jitter * np.eye(m.shape[0]))
        except np.linalg.LinAlgError:
            jitter = max(jitter * 100, 1e-14 * scale)
    raise np.linalg.LinAlgError("Cholesky failed after regularization")


def _spd_solver(h: np.ndarray):
    """Factor the Schur complement and return a refining solver.

    Jacobi scaling plus two rounds of iterative refinement keep the Newton
    directions accurate late in the run, when H picks up condition numbers of
    order 1/mu and a plain Cholesky solve would leak feasibility error back
    into the iterates.
    """
    d = np.sqrt(np.maximum(np.diag(h), 1e-300))
    dinv = 1.0 / d
    hn = h * dinv[:, None] * dinv[None, :]
    eye = np.eye(h.shape[0])
    jitter = 0.0
    chol = None
    for _ in range(8):
        try:
            chol = np.linalg.cholesky(hn + jitter * eye)
            break
        except np.linalg.LinAlgError:
            jitter = max(jitter * 100, 1e-14)
    if chol is None:
        raise np.linalg.LinAlgError("Schur complement factorization failed")

    def solve_once(v):
        z = scipy.linalg.solve_triangular(chol, v * dinv, lower=True)
        w = scipy.linalg.solve_triangular(chol.T, z, lower=False)
        return w * dinv

    def solver(v):
        x = solve_once(v)
        scale = float(np.linalg.norm(v)) + 1e-300
        for _ in range(4):
            r = v - h @ x
            if np.linalg.norm(r) <= 1e-13 * scale:
                break
            x = x + solve_once(r)
        return x

    return solver


def _hsde(pre: _Pre, tol: float, max_iter: int) -> _Raw:
    dims = pre.dims
    A, b, C = pre.A, pre.b, pre.C
    m = b.size
    nu = float(sum(dims)) + 1.0

    def op_A(Xs):
        out = np.zeros(m)
        for a, x in zip(A, Xs):
            out += np.tensordot(a, x, axes=([1, 2], [1, 0]))
        return out

    def op_AT(y):
        return [np.tensordot(y, a, axes=(0, 0)) for a in A]

    def ip_C(Xs):
        return float(sum(np.tensordot(c, x, axes=2) for c, x in zip(C, Xs)))

    norm_b = 1.0 + float(np.linalg.norm(b))
    norm_c = 1.0 + float(np.sqrt(sum(np.linalg.norm(c) ** 2 for c in C)))

    Xs = [np.eye(n) for n in dims]
    Ss = [np.eye(n) for n in dims]
    y = np.zeros(m)
    tau = kappa = 1.0

    raw = _Raw()
    pres = dres = gap = mu = float("nan")
    pobj = dobj = float("nan")

    for it in range(max_iter):
        raw.iterations = it
        # residuals of the homogeneous model
        r_p = op_A(Xs) - b * tau
        ATy = op_AT(y)
        r_d = [-aty + c * tau - s for aty, c, s in zip(ATy, C, Ss)]
        cx = ip_C(Xs)
        by = float(b @ y)
        r_g = by - cx - kappa

        comp = float(sum(np.tensordot(x, s, axes=2) for x, s in zip(Xs, Ss)))
        mu = (comp + tau * kappa) / nu

        # convergence tests
        pres = float(np.linalg.norm(r_p)) / tau / norm_b
        dres = float(np.sqrt(sum(np.linalg.norm(rd) ** 2 for rd in r_d))) / tau / norm_c
        pobj = cx / tau
        dobj = by / tau
        gap = abs(pobj - dobj)
        if pres <= tol and dres <= tol and gap <= tol * (1.0 + abs(pobj)):
            raw.status = "optimal"
            break
        # infeasibility certificates (only once tau is clearly losing to kappa)
        if kappa > 10.0 * tau:
            if by > 0:
                res = np.sqrt(sum(np.linalg.norm(aty + s) ** 2 for aty, s in zip(ATy, Ss)))
                if res <= tol * by * norm_c / norm_b:
                    raw.status = "infeasible"
                    raw.diag["certificate"] = {"type": "farkas-dual", "y": (y / by).tolist()}
                    break
            if cx < 0:
                res = float(np.linalg.norm(op_A(Xs)))
                if res <= tol * (-cx) * norm_b / norm_c:
                    raw.status = "unbounded"
                    raw.diag["certificate"] = {"type": "improving-ray", "objective": cx / tau}
                    break
        if tau <= 1e-12 * max(1.0, kappa) and mu <= 1e-12:
            raw.status = "numeric-failure"
            raw.diag["reason"] = "ill-posed: tau and mu collapsed without certificate"
            break

        # Nesterov-Todd scalings
        try:
            Rs, Rinvs, lams = [], [], []
            for x, s in zip(Xs, Ss):
                lx = _chol(x)
                ls = _chol(s)
                u, sig, vt = np.linalg.svd(ls.T @ lx)
                isq = 1.0 / np.sqrt(sig)
                Rs.append(lx @ vt.T * isq[None, :])
                Rinvs.append((isq[:, None] * u.T) @ ls.T)
                lams.append(sig)
        except np.linalg.LinAlgError as exc:
            raw.diag["reason"] = f"scaling factorization failed: {exc}"
            break

        wt = np.sqrt(tau / kappa)

        # Schur complement H = sum_k B_k B_k^T, B rows = vec(R^T A_e R)
        H = np.zeros((m, m))
        wc = []
        for a, c, r in zip(A, C, Rs):
            g = np.einsum("ip,mij,jq->mpq", r, a, r, optimize=True)
            bmat = g.reshape(m, -1)
            H += bmat @ bmat.T
            wc.append(r @ (r.T @ c @ r) @ r.T)
        try:
            hsolve = _spd_solver(H)
        except np.linalg.LinAlgError as exc:
            raw.diag["reason"] = f"Schur factorization failed: {exc}"
            break

        chat = op_A(wc)
        u_vec = chat + b
        q_dir = hsolve(u_vec)
        cwc = float(sum(np.tensordot(c, w, axes=2) for c, w in zip(C, wc)))

        def direction(r1, r2s, r3, dcs, dt):
            """Newton direction for given residual and complementarity targets."""
            wrw = []
            for r2, dc, r, rinv in zip(r2s, dcs, Rs, Rinvs):
                rhat = r2 + rinv.T @ dc @ rinv
                wrw.append(r @ (r.T @ rhat @ r) @ r.T)
            h1 = r1 - op_A(wrw)
            p_dir = hsolve(h1)
            c_wrw = float(sum(np.tensordot(c, w, axes=2) for c, w in zip(C, wrw)))
            bmc = b - chat
            den = float(bmc @ q_dir) + cwc + kappa / tau
            num = r3 + c_wrw + dt / tau - float(bmc @ p_dir)
            dtau = num / den
            dy = p_dir + q_dir * dtau
            ATdy = op_AT(dy)
            dX, dS, dXbar, dSbar = [], [], [], []
            for k, (w, aty, wcb, r2, r, rinv) in enumerate(zip(wrw, ATdy, wc, r2s, Rs, Rinvs)):
                dx = w + r @ (r.T @ aty @ r) @ r.T - wcb * dtau
                dx = (dx + dx.T) / 2
                ds = -aty + C[k] * dtau - r2
                ds = (ds + ds.T) / 2
                dX.append(dx)
                dS.append(ds)
                dXbar.append(rinv @ dx @ rinv.T)
                dSbar.append(r.T @ ds @ r)
            dkappa = (dt - kappa * dtau) / tau
            return dX, dS, dy, dtau, dkappa, dXbar, dSbar

        def max_step(dXbar, dSbar, dtau, dkappa):
            alpha = np.inf
            for lam, dxb, dsb in zip(lams, dXbar, dSbar):
                isq = 1.0 / np.sqrt(lam)
                for d in (dxb, dsb):
                    g = d * isq[:, None] * isq[None, :]
                    wmin = float(np.linalg.eigvalsh((g + g.T) / 2)[0])
                    if wmin < 0:
                        alpha = min(alpha, -1.0 / wmin)
            if dtau < 0:
                alpha = min(alpha, -tau / dtau)
            if dkappa < 0:
                alpha = min(alpha, -kappa / dkappa)
            return alpha

        # predictor
        dcs_aff = [-np.diag(lam) for lam in lams]
        aff = direction(-r_p, [-rd for rd in r_d], -r_g, dcs_aff, -tau * kappa)
        dXa, dSa, dya, dtaua, dkappaa, dXbara, dSbara = aff
        alpha_aff = min(1.0, max_step(dXbara, dSbara, dtaua, dkappaa))

        comp_aff = sum(
            float(np.tensordot(x + alpha_aff * dx, s + alpha_aff * ds, axes=2))
            for x, s, dx, ds in zip(Xs, Ss, dXa, dSa)
        )
        mu_aff = (comp_aff + (tau + alpha_aff * dtaua) * (kappa + alpha_aff * dkappaa)) / nu
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3))

        # corrector
        eta = 1.0 - sigma
        dcs = []
        for lam, dxb, dsb in zip(lams, dXbara, dSbara):
            corr = (dxb @ dsb + dsb @ dxb) / 2
            d = sigma * mu * np.eye(lam.size) - np.diag(lam**2) - corr
            dcs.append(_lyap_inv(d, lam))
        dt = sigma * mu - tau * kappa - dtaua * dkappaa
        comb = direction(-eta * r_p, [-eta * rd for rd in r_d], -eta * r_g, dcs, dt)
        dX, dS, dy, dtau, dkappa, dXbar, dSbar = comb

        alpha = min(1.0, STEP_FRACTION * max_step(dXbar, dSbar, dtau, dkappa))
        if not np.isfinite(alpha) or alpha < 1e-13:
            raw.diag["reason"] = f"step length collapsed (alpha={alpha:.2e})"
            break

        Xs = [(x + alpha * dx + (x + alpha * dx).T) / 2 for x, dx in zip(Xs, dX)]
        Ss = [(s + alpha * ds + (s + alpha * ds).T) / 2 for s, ds in zip(Ss, dS)]
        y = y + alpha * dy
        tau += alpha * dtau
        kappa += alpha * dkappa
    else:
        raw.diag["reason"] = f"iteration cap {max_iter} reached"
        raw.iterations = max_iter

    raw.X, raw.S, raw.y = Xs, Ss, y
    raw.tau, raw.kappa = tau, kappa
    raw.diag["mu"] = mu
    raw.diag["primal_residual"] = pres
    raw.diag["dual_residual"] = dres
    raw.diag["pobj_internal"] = pobj
    raw.diag["dobj_internal"] = dobj
    return raw


def _lyap_inv(d: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Solve (Lam M + M Lam)/2 = d for M with diagonal Lam = diag(lam)."""
    return 2.0 * d / (lam[:, None] + lam[None, :])


# ---------------------------------------------------------------------------
# solution packaging
# ---------------------------------------------------------------------------


def _package(pre: _Pre, raw: _Raw | None, problem: SdpProblem) -> SdpSolution:
    if pre.status == "trivial-optimal":
        values = {}
        for lbl, n in zip(pre.labels, pre.dims):
            d = n // 2 if pre.complex_flags[lbl] else n
            values[lbl] = np.zeros((d, d), dtype=complex if pre.complex_flags[lbl] else float)
        scalars = {}
        for s, g, tgt, q in reversed(pre.elim):
            qval = sum(c * scalars[k] for k, c in q.scal.items())
            scalars[s] = (tgt - qval) / g
        val = pre.sense_sign * pre.elim_offset + pre.user_offset
        user_values = {lbl: values[lbl] for lbl in problem.blocks}
        return SdpSolution(status="optimal", primal_value=val, dual_value=val, gap=0.0,
                           block_values=user_values, scalar_values=scalars, diagnostics=dict(pre.diag))
    if pre.status is not None:
        return SdpSolution(status=pre.status, diagnostics=dict(pre.diag))
    assert raw is not None
    diag = dict(raw.diag)
    if raw.status != "optimal":
        return SdpSolution(status=raw.status, iterations=raw.iterations, diagnostics=diag)

    tau = raw.tau
    values = {}
    for lbl, n, x in zip(pre.labels, pre.dims, raw.X):
        xv = x / tau
        if pre.complex_flags[lbl]:
            values[lbl] = extract_matrix(xv)
        else:
            values[lbl] = (xv + xv.T) / 2

    # recover eliminated scalars in reverse order
    scalars = {}
    for s, g, tgt, q in reversed(pre.elim):
        qval = 0.0
        for lbl, f in q.mats.items():
            v = values[lbl]
            if pre.complex_flags[lbl]:
                qval += float(np.tensordot(np.conj(f), v, axes=2).real)
            else:
                qval += float(np.tensordot(np.asarray(f).real, v.real, axes=2))
        for lbl, c in q.scal.items():
            qval += c * scalars[lbl]
        scalars[s] = (tgt - qval) / g

    pobj_int = diag.pop("pobj_internal")
    dobj_int = diag.pop("dobj_internal")
    primal = pre.sense_sign * (pobj_int + pre.elim_offset) + pre.user_offset
    dual = pre.sense_sign * (dobj_int + pre.elim_offset) + pre.user_offset

    user_values = {lbl: values[lbl] for lbl in problem.blocks}
    return SdpSolution(
        status="optimal",
        primal_value=float(primal),
        dual_value=float(dual),
        gap=float(abs(pobj_int - dobj_int)),
        block_values=user_values,
        scalar_values=scalars,
        iterations=raw.iterations,
        diagnostics=diag,
    )
