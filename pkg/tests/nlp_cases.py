"""Small reference NLPs with known solutions for exercising the interior-point solver."""

import numpy as np


class DenseNLP:
    def __init__(self, n, f, g, H, c=None, A=None, Hc=None, d=None, Ad=None, Hd=None, xl=None, xu=None, dl=None, du=None):
        self.n = n
        self._f, self._g, self._H = f, g, H
        self._c, self._A, self._Hc = c, A, Hc
        self._d, self._Ad, self._Hd = d, Ad, Hd
        self.m_eq = 0 if c is None else len(c(np.zeros(n) + 1.0))
        self.m_ineq = 0 if d is None else len(d(np.zeros(n) + 1.0))
        self.x_lower = np.full(n, -np.inf) if xl is None else np.asarray(xl, float)
        self.x_upper = np.full(n, np.inf) if xu is None else np.asarray(xu, float)
        self.d_lower = np.full(self.m_ineq, -np.inf) if dl is None else np.asarray(dl, float)
        self.d_upper = np.full(self.m_ineq, np.inf) if du is None else np.asarray(du, float)

    def objective(self, x):
        return float(self._f(x))

    def gradient(self, x):
        return np.asarray(self._g(x), float)

    def constraints(self, x):
        return np.asarray(self._c(x), float)

    def jacobian(self, x):
        return np.asarray(self._A(x), float).reshape(self.m_eq, self.n)

    def inequalities(self, x):
        return np.asarray(self._d(x), float)

    def inequality_jacobian(self, x):
        return np.asarray(self._Ad(x), float).reshape(self.m_ineq, self.n)

    def hessian(self, x, sf, lc, ld):
        H = sf * np.asarray(self._H(x), float)
        if self.m_eq:
            H = H + self._Hc(x, lc)
        if self.m_ineq:
            H = H + self._Hd(x, ld)
        return H


def hs071():
    f = lambda x: x[0] * x[3] * (x[0] + x[1] + x[2]) + x[2]
    g = lambda x: np.array([
        x[3] * (2 * x[0] + x[1] + x[2]), x[0] * x[3], x[0] * x[3] + 1, x[0] * (x[0] + x[1] + x[2])
    ])
    H = lambda x: np.array([
        [2 * x[3], x[3], x[3], 2 * x[0] + x[1] + x[2]],
        [x[3], 0, 0, x[0]],
        [x[3], 0, 0, x[0]],
        [2 * x[0] + x[1] + x[2], x[0], x[0], 0],
    ])
    c = lambda x: np.array([x @ x - 40.0])
    A = lambda x: 2 * x
    Hc = lambda x, l: 2 * l[0] * np.eye(4)
    d = lambda x: np.array([np.prod(x)])
    Ad = lambda x: np.array([np.prod(x) / x])

    def Hd(x, l):
        M = np.zeros((4, 4))
        for i in range(4):
            for j in range(4):
                if i != j:
                    M[i, j] = np.prod([x[k] for k in range(4) if k not in (i, j)])
        return l[0] * M

    return DenseNLP(4, f, g, H, c, A, Hc, d, Ad, Hd, xl=[1] * 4, xu=[5] * 4, dl=[25.0], du=[np.inf]), np.array([1, 5, 5, 1.0])


HS071_SOLUTION = np.array([1.0, 4.74299963, 3.82114998, 1.37940829])
HS071_OBJECTIVE = 17.0140173


def rosenbrock():
    f = lambda x: 100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2
    g = lambda x: np.array([-400 * x[0] * (x[1] - x[0] ** 2) - 2 * (1 - x[0]), 200 * (x[1] - x[0] ** 2)])
    H = lambda x: np.array([[1200 * x[0] ** 2 - 400 * x[1] + 2, -400 * x[0]], [-400 * x[0], 200]])
    return DenseNLP(2, f, g, H), np.array([-1.2, 1.0])


def redundant_equalities():
    """min |x|^2 s.t. x0 + x1 = 1 written three times (twice scaled), plus x2 - x0 = 0."""
    f = lambda x: x @ x
    g = lambda x: 2 * x
    H = lambda x: 2 * np.eye(3)
    Aconst = np.array([[1, 1, 0], [2, 2, 0], [1, 1, 0], [-1, 0, 1.0]])
    c = lambda x: Aconst @ x - np.array([1, 2, 1, 0.0])
    return DenseNLP(3, f, g, H, c, lambda x: Aconst, lambda x, l: np.zeros((3, 3))), np.array([3.0, -1.0, 2.0])


def infeasible():
    """x0^2 + x1^2 = 1 together with x0 >= 2."""
    f = lambda x: x[0] + x[1]
    g = lambda x: np.ones(2)
    H = lambda x: np.zeros((2, 2))
    c = lambda x: np.array([x @ x - 1.0])
    return DenseNLP(2, f, g, H, c, lambda x: 2 * x, lambda x, l: 2 * l[0] * np.eye(2), xl=[2.0, -10.0], xu=[10.0, 10.0]), np.array([3.0, 0.0])


def bounded_qp():
    """min (x0-3)^2 + (x1+1)^2 with 0 <= x <= 2 and linear inequality x0 + x1 <= 1.5."""
    f = lambda x: (x[0] - 3) ** 2 + (x[1] + 1) ** 2
    g = lambda x: np.array([2 * (x[0] - 3), 2 * (x[1] + 1)])
    H = lambda x: 2 * np.eye(2)
    d = lambda x: np.array([x[0] + x[1]])
    return DenseNLP(2, f, g, H, d=d, Ad=lambda x: np.array([[1.0, 1.0]]), Hd=lambda x, l: np.zeros((2, 2)), xl=[0, 0], xu=[2, 2], dl=[-np.inf], du=[1.5]), np.array([1.0, 1.0])
