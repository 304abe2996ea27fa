"""Primal-dual interior-point method for dense, moderately sized NLPs.

Solves::

    min f(x)  s.t.  c(x) = 0,  d_L <= d(x) <= d_U,  x_L <= x <= x_U

following the barrier scheme popularized by Ipopt: monotone barrier updates,
fraction-to-the-boundary rule, inertia-corrected symmetric indefinite KKT
factorizations (LAPACK Bunch-Kaufman) and an l1-merit backtracking line search
with a second-order correction. Inequalities get slack variables that are
eliminated from the linear system before factorization.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np
from scipy.linalg import lapack

__all__ = ["NLP", "IPMOptions", "IPMResult", "solve_nlp"]

log = logging.getLogger(__name__)

ZERO_PIVOT = 1e-13


class NLP(Protocol):
    """Problem interface consumed by :func:`solve_nlp`. Jacobians and Hessians are dense."""

    n: int
    m_eq: int
    m_ineq: int
    x_lower: np.ndarray
    x_upper: np.ndarray
    d_lower: np.ndarray
    d_upper: np.ndarray

    def objective(self, x: np.ndarray) -> float: ...
    def gradient(self, x: np.ndarray) -> np.ndarray: ...
    def constraints(self, x: np.ndarray) -> np.ndarray: ...
    def jacobian(self, x: np.ndarray) -> np.ndarray: ...
    def inequalities(self, x: np.ndarray) -> np.ndarray: ...
    def inequality_jacobian(self, x: np.ndarray) -> np.ndarray: ...
    def hessian(self, x: np.ndarray, obj_factor: float, lam_eq: np.ndarray, lam_ineq: np.ndarray) -> np.ndarray: ...


@dataclass
class IPMOptions:
    """Solver settings.

    Attributes:
        tol: Tolerance on the scaled optimality error.
        constr_viol_tol: Absolute tolerance on the unscaled constraint violation.
        max_iter: Iteration cap.
        mu_init: Initial barrier parameter.
        bound_push: Relative push of the starting point into the bounds.
        obj_scaling_max_gradient: Objective is scaled so its initial gradient max-norm is at most this.
    """

    tol: float = 1e-8
    constr_viol_tol: float = 1e-9
    max_iter: int = 300
    mu_init: float = 0.1
    mu_min: float = 1e-11
    kappa_mu: float = 0.2
    theta_mu: float = 1.5
    kappa_eps: float = 10.0
    tau_min: float = 0.99
    bound_push: float = 1e-2
    obj_scaling_max_gradient: float = 100.0
    delta_c_base: float = 1e-8
    delta_c_max: float = 1e-4
    delta_w_init: float = 1e-4
    delta_w_max: float = 1e40
    armijo: float = 1e-4
    alpha_min: float = 1e-12
    multiplier_max_init: float = 1e3
    kappa_sigma: float = 1e10
    stall_iter: int = 40


@dataclass
class IPMResult:
    x: np.ndarray
    status: str
    iterations: int
    objective: float
    constraint_violation: float
    dual_infeasibility: float
    lam_eq: np.ndarray = field(repr=False)
    lam_ineq: np.ndarray = field(repr=False)
    message: str = ""


class _Factorization:
    """Bunch-Kaufman factorization with inertia count."""

    def __init__(self, K: np.ndarray):
        self.ldu, self.ipiv, info = lapack.dsytrf(K, lower=1, overwrite_a=True)
        self.ok = info >= 0
        self.pos = self.neg = self.zero = 0
        if not self.ok:
            return
        if info > 0:
            self.zero = 1
        d = self.ldu
        n = len(self.ipiv)
        # absolute threshold: barrier terms make the pivot range span many decades, while
        # the smallest regularization (delta_c at mu_min) stays far above it
        eps = ZERO_PIVOT
        k = 0
        while k < n:
            if self.ipiv[k] > 0:
                v = d[k, k]
                if abs(v) <= eps:
                    self.zero += 1
                elif v > 0:
                    self.pos += 1
                else:
                    self.neg += 1
                k += 1
            else:
                a, b, c = d[k, k], d[k + 1, k], d[k + 1, k + 1]
                ev = np.linalg.eigvalsh(np.array([[a, b], [b, c]]))
                for v in ev:
                    if abs(v) <= eps:
                        self.zero += 1
                    elif v > 0:
                        self.pos += 1
                    else:
                        self.neg += 1
                k += 2

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        x, info = lapack.dsytrs(self.ldu, self.ipiv, rhs, lower=1)
        return x


def _bound_sets(lo, hi):
    return np.isfinite(lo), np.isfinite(hi)


def _push_inside(x, lo, hi, kappa):
    x = x.copy()
    hasL, hasU = np.isfinite(lo), np.isfinite(hi)
    both = hasL & hasU
    pL = np.where(hasL, kappa * np.maximum(1.0, np.abs(np.where(hasL, lo, 0.0))), 0.0)
    pU = np.where(hasU, kappa * np.maximum(1.0, np.abs(np.where(hasU, hi, 0.0))), 0.0)
    width = np.where(both, hi - lo, np.inf)
    pL = np.where(both, np.minimum(pL, kappa * width), pL)
    pU = np.where(both, np.minimum(pU, kappa * width), pU)
    x = np.where(hasL, np.maximum(x, lo + pL), x)
    x = np.where(hasU, np.minimum(x, hi - pU), x)
    return x


def solve_nlp(problem: NLP, x0: np.ndarray, options: IPMOptions | None = None) -> IPMResult:
    """Run the interior-point method from ``x0`` (projected strictly inside the bounds)."""
    o = options or IPMOptions()
    n, me, mi = problem.n, problem.m_eq, problem.m_ineq
    xL, xU = np.asarray(problem.x_lower, float), np.asarray(problem.x_upper, float)
    dL, dU = np.asarray(problem.d_lower, float), np.asarray(problem.d_upper, float)
    # combined primal vector w = (x, s); s are inequality slacks
    wL, wU = np.concatenate([xL, dL]), np.concatenate([xU, dU])
    hasL, hasU = _bound_sets(wL, wU)
    nw = n + mi

    x = _push_inside(np.asarray(x0, float), xL, xU, o.bound_push)
    d0 = problem.inequalities(x) if mi else np.zeros(0)
    s = _push_inside(d0, dL, dU, o.bound_push)
    w = np.concatenate([x, s])
    zL = np.where(hasL, 1.0, 0.0)
    zU = np.where(hasU, 1.0, 0.0)

    g0 = problem.gradient(x)
    gmax = float(np.max(np.abs(g0))) if n else 0.0
    sigma_f = min(1.0, o.obj_scaling_max_gradient / gmax) if gmax > 0 else 1.0

    def evaluate(w):
        x, s = w[:n], w[n:]
        c = problem.constraints(x) if me else np.zeros(0)
        cd = (problem.inequalities(x) - s) if mi else np.zeros(0)
        return c, cd

    def slacks(w):
        return np.where(hasL, w - np.where(hasL, wL, 0.0), 1.0), np.where(hasU, np.where(hasU, wU, 0.0) - w, 1.0)

    def barrier(w, f, mu):
        sl, su = slacks(w)
        if np.any(sl[hasL] <= 0) or np.any(su[hasU] <= 0):
            return np.inf
        return sigma_f * f - mu * (np.sum(np.log(sl[hasL])) + np.sum(np.log(su[hasU])))

    f = problem.objective(x)
    c, cd = evaluate(w)
    Ac = problem.jacobian(x) if me else np.zeros((0, n))
    Ad = problem.inequality_jacobian(x) if mi else np.zeros((0, n))
    g = np.concatenate([sigma_f * problem.gradient(x), np.zeros(mi)])

    def full_jac_T(Ac, Ad, lam_c, lam_d):
        """(A^T lambda) for the (x, s) variables."""
        top = Ac.T @ lam_c + Ad.T @ lam_d
        return np.concatenate([top, -lam_d])

    # least-squares multiplier estimate
    lam_c, lam_d = np.zeros(me), np.zeros(mi)
    if me + mi:
        A_full = np.zeros((me + mi, nw))
        A_full[:me, :n] = Ac
        A_full[me:, :n] = Ad
        A_full[me:, n:] = -np.eye(mi)
        rhs = -(g - zL + zU)
        lam, *_ = np.linalg.lstsq(A_full.T, rhs, rcond=None)
        if np.max(np.abs(lam)) <= o.multiplier_max_init:
            lam_c, lam_d = lam[:me], lam[me:]

    mu = o.mu_init
    nu_pen = 1.0
    delta_w_last = 0.0
    it = 0
    status, message = "max_iterations", "iteration limit reached"
    W_cache = None
    best_theta, stall = np.inf, 0

    def errors(mu, g, Ac, Ad, c, cd, lam_c, lam_d, zL, zU, w):
        grad_L = g + full_jac_T(Ac, Ad, lam_c, lam_d) - zL + zU
        sl, su = slacks(w)
        comp = np.concatenate([(zL * sl - mu)[hasL], (zU * su - mu)[hasU]])
        nb = int(hasL.sum() + hasU.sum())
        mtot = me + mi
        smax = 100.0
        sd = max(smax, (np.sum(np.abs(lam_c)) + np.sum(np.abs(lam_d)) + np.sum(np.abs(zL)) + np.sum(np.abs(zU))) / max(1, mtot + nb)) / smax
        sc = max(smax, (np.sum(np.abs(zL)) + np.sum(np.abs(zU))) / max(1, nb)) / smax
        dual = float(np.max(np.abs(grad_L))) if nw else 0.0
        primal = float(max(np.max(np.abs(c)) if me else 0.0, np.max(np.abs(cd)) if mi else 0.0))
        compl = float(np.max(np.abs(comp))) if comp.size else 0.0
        return max(dual / sd, primal, compl / sc), dual, primal, compl

    while True:
        E0, dual0, primal0, compl0 = errors(0.0, g, Ac, Ad, c, cd, lam_c, lam_d, zL, zU, w)
        if E0 <= o.tol and primal0 <= o.constr_viol_tol:
            status, message = "solved", "optimal solution found"
            break
        if it >= o.max_iter:
            break
        # barrier update
        while True:
            Emu, *_ = errors(mu, g, Ac, Ad, c, cd, lam_c, lam_d, zL, zU, w)
            if Emu > o.kappa_eps * mu or mu <= o.mu_min:
                break
            mu = max(o.mu_min, min(o.kappa_mu * mu, mu**o.theta_mu))
        tau = max(o.tau_min, 1.0 - mu)

        x = w[:n]
        W = problem.hessian(x, sigma_f, lam_c, lam_d) if W_cache is None else W_cache
        W_cache = None
        sl, su = slacks(w)
        SigL = np.where(hasL, zL / sl, 0.0)
        SigU = np.where(hasU, zU / su, 0.0)
        Sig = SigL + SigU
        grad_phi = g - np.where(hasL, mu / sl, 0.0) + np.where(hasU, mu / su, 0.0)
        r_w = grad_phi + full_jac_T(Ac, Ad, lam_c, lam_d)
        r_x, r_s = r_w[:n], r_w[n:]

        delta_c = o.delta_c_base * mu**0.25 if me else 0.0
        delta_w = 0.0
        attempts = 0
        fact = None
        while True:
            Sig_s = Sig[n:] + delta_w
            K_s = Sig_s / (1.0 + delta_c * Sig_s)
            H = W + np.diag(Sig[:n] + delta_w)
            if mi:
                H = H + Ad.T @ (K_s[:, None] * Ad)
            K = np.empty((n + me, n + me))
            K[:n, :n] = H
            K[n:, :n] = Ac
            K[:n, n:] = Ac.T
            K[n:, n:] = -delta_c * np.eye(me)
            fact = _Factorization(K)
            if fact.ok and fact.zero == 0 and fact.pos == n and fact.neg == me:
                break
            attempts += 1
            if me and (fact.zero or fact.neg < me) and delta_c < o.delta_c_max:
                # singular constraint block: regularize the equalities harder
                delta_c = min(o.delta_c_max, max(10.0 * delta_c, 1e-10))
            if delta_w == 0.0:
                delta_w = o.delta_w_init if delta_w_last == 0.0 else max(1e-20, delta_w_last / 3.0)
            else:
                delta_w *= 8.0 if delta_w_last else 100.0
            if delta_w > o.delta_w_max or attempts > 60:
                fact = None
                break
        if fact is None:
            status, message = "infeasible", "could not correct KKT inertia"
            break
        if delta_w > 0:
            delta_w_last = delta_w

        Sig_s = Sig[n:] + delta_w
        denom = 1.0 + delta_c * Sig_s
        K_s = Sig_s / denom

        def direction(rc, rd):
            rhs_x = r_x + (Ad.T @ (K_s * rd + r_s / denom) if mi else 0.0)
            sol = fact.solve(-np.concatenate([rhs_x, rc]))
            dx, dlc = sol[:n], sol[n:]
            dld = K_s * (Ad @ dx + rd) + r_s / denom if mi else np.zeros(0)
            ds = (Ad @ dx + rd - delta_c * dld) if mi else np.zeros(0)
            return np.concatenate([dx, ds]), dlc, dld

        dw, dlc, dld = direction(c, cd)

        def frac_to_boundary(v, dv, mask):
            m = mask & (dv < 0)
            if not np.any(m):
                return 1.0
            return float(min(1.0, np.min(-tau * v[m] / dv[m])))

        alpha_max = min(frac_to_boundary(sl, dw, hasL), frac_to_boundary(su, -dw, hasU))
        dzL = np.where(hasL, (mu - zL * sl) / sl - SigL * dw, 0.0)
        dzU = np.where(hasU, (mu - zU * su) / su + SigU * dw, 0.0)
        alpha_z = min(frac_to_boundary(zL, dzL, hasL), frac_to_boundary(zU, dzU, hasU))

        # l1 merit line search
        infeas = float(np.sum(np.abs(c)) + np.sum(np.abs(cd)))
        dgrad = float(grad_phi @ dw)
        curv = float(dw[:n] @ (W @ dw[:n]) + dw @ (Sig * dw))
        if infeas > 1e-14:
            nu_req = (dgrad + 0.5 * max(curv, 0.0)) / (0.9 * infeas)
            if nu_pen < nu_req:
                nu_pen = nu_req + 1.0
        phi0 = barrier(w, f, mu) + nu_pen * infeas
        Dphi = dgrad - nu_pen * infeas

        def merit(wt):
            ft = problem.objective(wt[:n])
            ct, cdt = evaluate(wt)
            return barrier(wt, ft, mu) + nu_pen * float(np.sum(np.abs(ct)) + np.sum(np.abs(cdt))), ft, ct, cdt

        alpha = alpha_max
        accepted = None
        first = True
        while alpha >= o.alpha_min:
            wt = w + alpha * dw
            phit, ft, ct, cdt = merit(wt)
            if np.isfinite(phit) and phit <= phi0 + o.armijo * alpha * min(Dphi, 0.0) + 1e-12 * abs(phi0):
                accepted = (wt, ft, ct, cdt, alpha)
                break
            if first and infeas > 0 and np.isfinite(phit):
                # second-order correction for the full step
                dws, _, _ = direction(alpha * c + ct, alpha * cd + cdt)
                a_soc = min(frac_to_boundary(sl, dws, hasL), frac_to_boundary(su, -dws, hasU))
                ws = w + a_soc * dws
                phis, fs, cs, cds = merit(ws)
                if np.isfinite(phis) and phis <= phi0 + o.armijo * alpha * min(Dphi, 0.0):
                    accepted = (ws, fs, cs, cds, alpha)
                    dw = dws
                    break
            first = False
            alpha *= 0.5
        if accepted is None:
            status, message = "infeasible", "line search failed"
            break
        w, f, c, cd, alpha = accepted
        lam_c = lam_c + alpha * dlc
        lam_d = lam_d + alpha * dld if mi else lam_d
        zL = zL + alpha_z * dzL
        zU = zU + alpha_z * dzU
        # keep bound multipliers consistent with the barrier
        sl, su = slacks(w)
        zL = np.where(hasL, np.clip(zL, mu / (o.kappa_sigma * sl), o.kappa_sigma * mu / sl), 0.0)
        zU = np.where(hasU, np.clip(zU, mu / (o.kappa_sigma * su), o.kappa_sigma * mu / su), 0.0)
        x = w[:n]
        Ac = problem.jacobian(x) if me else Ac
        Ad = problem.inequality_jacobian(x) if mi else Ad
        g = np.concatenate([sigma_f * problem.gradient(x), np.zeros(mi)])
        it += 1
        if not (np.isfinite(f) and np.all(np.isfinite(w))):
            status, message = "infeasible", "non-finite iterate"
            break
        log.debug("it %3d mu %.1e f %.6e inf %.2e alpha %.2e dw %.1e", it, mu, f, infeas, alpha, delta_w)
        theta = float(max(np.max(np.abs(c)) if me else 0.0, np.max(np.abs(cd)) if mi else 0.0))
        if theta < 0.99 * best_theta:
            best_theta, stall = theta, 0
        else:
            stall += 1
        if stall >= o.stall_iter and theta > 10.0 * o.constr_viol_tol:
            status, message = "infeasible", f"constraint violation stalled at {theta:.2e} (locally infeasible)"
            break

    c, cd = evaluate(w)
    viol = float(max(np.max(np.abs(c)) if me else 0.0, np.max(np.abs(cd)) if mi else 0.0))
    E0, dual0, primal0, _ = errors(0.0, g, Ac, Ad, c, cd, lam_c, lam_d, zL, zU, w)
    return IPMResult(
        x=w[:n].copy(),
        status=status,
        iterations=it,
        objective=float(problem.objective(w[:n])),
        constraint_violation=viol,
        dual_infeasibility=dual0 / sigma_f,
        lam_eq=lam_c / sigma_f,
        lam_ineq=lam_d / sigma_f,
        message=message,
    )
