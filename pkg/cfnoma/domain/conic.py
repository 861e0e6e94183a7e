"""
Second-order cone programs and a primal-dual interior-point solver for them.

A ConicProgram is built from affine expressions over a flat variable vector:

    minimize    c'x
    subject to  f_i(x) <= 0, g_j(x) == 0          (affine)
                || A_k x + b_k ||_2 <= c_k'x + d_k  (second-order cones)

solve_conic works on the standard form  G x + s = h, A x = b, s in K  with K a
product of a nonnegative orthant and Lorentz cones. It runs a homogeneous
self-dual embedding with Nesterov-Todd scaling and a Mehrotra
predictor-corrector, so infeasible programs end with a certificate instead of
diverging.
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from ..core.config import settings
from ..core.errors import InvalidInputError
from ..core.logger import error_logger, msg_logger

Number = Union[int, float]
Status = Literal["optimal", "infeasible", "unbounded", "max_iters"]


# ------------------
# Affine Expressions
# ------------------
class Affine:
    """Sparse affine expression sum_i a_i x_i + const."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs: Optional[Dict[int, float]] = None, const: float = 0.0):
        self.coeffs: Dict[int, float] = dict(coeffs or {})
        self.const = float(const)

    @classmethod
    def var(cls, index: int, coeff: float = 1.0) -> "Affine":
        return cls({int(index): float(coeff)})

    @classmethod
    def total(cls, terms: Sequence["Affine"]) -> "Affine":
        out = cls()
        for t in terms:
            out._accumulate(t, 1.0)
        return out

    def _accumulate(self, other: "Affine", scale: float) -> None:
        for i, a in other.coeffs.items():
            self.coeffs[i] = self.coeffs.get(i, 0.0) + scale * a
        self.const += scale * other.const

    def __add__(self, other: Union["Affine", Number]) -> "Affine":
        out = Affine(self.coeffs, self.const)
        if isinstance(other, Affine):
            out._accumulate(other, 1.0)
        else:
            out.const += float(other)
        return out

    __radd__ = __add__

    def __neg__(self) -> "Affine":
        return Affine({i: -a for i, a in self.coeffs.items()}, -self.const)

    def __sub__(self, other: Union["Affine", Number]) -> "Affine":
        return self + (-other)

    def __rsub__(self, other: Number) -> "Affine":
        return (-self) + other

    def __mul__(self, scale: Number) -> "Affine":
        s = float(scale)
        return Affine({i: s * a for i, a in self.coeffs.items()}, s * self.const)

    __rmul__ = __mul__

    def value(self, x: np.ndarray) -> float:
        return self.const + sum(a * x[i] for i, a in self.coeffs.items())

    def row(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        for i, a in self.coeffs.items():
            out[i] += a
        return out


@dataclass
class LinearConstraint:
    expr: Affine                       # expr <= 0 or expr == 0
    sense: Literal["<=", "=="]
    name: str = ""


@dataclass
class SocConstraint:
    rows: List[Affine]                 # || rows || <= bound
    bound: Affine
    name: str = ""


@dataclass
class StandardForm:
    c: np.ndarray
    G: np.ndarray
    h: np.ndarray
    A: np.ndarray
    b: np.ndarray
    orthant: int
    socs: List[int]
    offset: float = 0.0


# -------------
# Conic Program
# -------------
class ConicProgram:
    """
    Container for one second-order cone program.

    Members:
    - names: label of every scalar variable
    - variables: index arrays of the named variable groups
    - objective: affine expression to minimize
    - linear: affine inequalities and equalities
    - socs: second-order cone constraints
    - meta: builder data needed to read a solution back (scales, pair order)

    Methods:
    - add_variables: register a group of variables and return their indices
    - add_linear / add_soc / add_squares_bound: append constraints
    - standard_form: dense (c, G, h, A, b, cones) for the interior-point solver
    - violation: largest constraint violation of a candidate point
    - constraint_families: constraint counts grouped by name
    - dump: canonical plain-text rendering
    """

    def __init__(self):
        self.names: List[str] = []
        self.variables: Dict[str, np.ndarray] = {}
        self.objective: Affine = Affine()
        self.linear: List[LinearConstraint] = []
        self.socs: List[SocConstraint] = []
        self.meta: Dict[str, object] = {}

    @property
    def num_vars(self) -> int:
        return len(self.names)

    @property
    def num_constraints(self) -> int:
        return len(self.linear) + len(self.socs)

    def constraint_families(self) -> Dict[str, int]:
        """Constraint count per family, the family being a name up to its first underscore."""
        return dict(Counter(con.name.split("_")[0] for con in [*self.linear, *self.socs]))

    def add_variables(self, name: str, shape: Union[int, Tuple[int, ...]]) -> np.ndarray:
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        count = int(np.prod(shape)) if shape else 1
        start = self.num_vars
        idx = np.arange(start, start + count).reshape(shape)
        for pos in np.ndindex(*shape):
            self.names.append(f"{name}[{','.join(map(str, pos))}]")
        self.variables[name] = idx
        return idx

    def assemble(self, values: Dict[str, np.ndarray]) -> np.ndarray:
        """Flat vector from per-group values; every group must be given."""
        x = np.zeros(self.num_vars)
        for name, idx in self.variables.items():
            x[idx] = np.asarray(values[name], dtype=float).reshape(idx.shape)
        return x

    def extract(self, x: np.ndarray, name: str) -> np.ndarray:
        return np.asarray(x)[self.variables[name]]

    def minimize(self, expr: Affine) -> None:
        self.objective = expr

    def add_linear(self, expr: Affine, sense: Literal["<=", "=="] = "<=", name: str = "") -> None:
        self.linear.append(LinearConstraint(expr, sense, name))

    def add_soc(self, rows: Sequence[Affine], bound: Affine, name: str = "") -> None:
        self.socs.append(SocConstraint(list(rows), bound, name))

    def add_squares_bound(self, squares: Sequence[Tuple[float, Affine]], bound: Affine, name: str = "") -> None:
        """
        sum_i w_i q_i(x)^2 <= t(x) with w_i >= 0, written as || (2 sqrt(w_i) q_i, t - 1) || <= t + 1.
        """
        rows = [2.0 * np.sqrt(w) * q for w, q in squares if w > 0]
        rows.append(bound - 1.0)
        self.add_soc(rows, bound + 1.0, name)

    # -------------
    # Solver Format
    # -------------
    def standard_form(self) -> StandardForm:
        n = self.num_vars
        le = [c for c in self.linear if c.sense == "<="]
        eq = [c for c in self.linear if c.sense == "=="]

        g_rows: List[np.ndarray] = []
        h_vals: List[float] = []
        for con in le:
            g_rows.append(con.expr.row(n))
            h_vals.append(-con.expr.const)
        socs: List[int] = []
        for con in self.socs:
            g_rows.append(-con.bound.row(n))
            h_vals.append(con.bound.const)
            for r in con.rows:
                g_rows.append(-r.row(n))
                h_vals.append(r.const)
            socs.append(1 + len(con.rows))

        G = np.array(g_rows).reshape(len(g_rows), n)
        A = np.array([con.expr.row(n) for con in eq]).reshape(len(eq), n)
        b = np.array([-con.expr.const for con in eq])
        return StandardForm(
            c=self.objective.row(n),
            G=G,
            h=np.array(h_vals),
            A=A,
            b=b,
            orthant=len(le),
            socs=socs,
            offset=self.objective.const,
        )

    def violation(self, x: np.ndarray) -> float:
        """Largest violation, each measured relative to 1 + the magnitude of its right-hand side."""
        worst = 0.0
        for con in self.linear:
            v = con.expr.value(x)
            scale = 1.0 + abs(con.expr.const) + sum(abs(a * x[i]) for i, a in con.expr.coeffs.items())
            worst = max(worst, (abs(v) if con.sense == "==" else max(v, 0.0)) / scale)
        for con in self.socs:
            lhs = float(np.linalg.norm([r.value(x) for r in con.rows]))
            rhs = con.bound.value(x)
            worst = max(worst, max(lhs - rhs, 0.0) / (1.0 + abs(rhs)))
        return worst

    def dump(self) -> str:
        def fmt(expr: Affine) -> str:
            terms = [f"{a!r}*x{i}" for i, a in sorted(expr.coeffs.items()) if a != 0.0]
            terms.append(repr(expr.const))
            return " + ".join(terms)

        lines = [f"vars {self.num_vars}"]
        lines += [f"var x{i} {name}" for i, name in enumerate(self.names)]
        lines.append(f"minimize {fmt(self.objective)}")
        for con in self.linear:
            lines.append(f"{'le' if con.sense == '<=' else 'eq'} {con.name}: {fmt(con.expr)} {con.sense} 0")
        for con in self.socs:
            inner = "; ".join(fmt(r) for r in con.rows)
            lines.append(f"soc {con.name}: ||[{inner}]|| <= {fmt(con.bound)}")
        return "\n".join(lines) + "\n"


@dataclass
class ConicSolution:
    x: np.ndarray
    objective_value: float
    status: Status
    duality_gap: float
    primal_residual: float = float("inf")
    dual_residual: float = float("inf")
    iterations: int = 0
    s: np.ndarray = field(default_factory=lambda: np.zeros(0))
    z: np.ndarray = field(default_factory=lambda: np.zeros(0))
    y: np.ndarray = field(default_factory=lambda: np.zeros(0))
    orthant: int = 0
    socs: List[int] = field(default_factory=list)

    def complementarity(self) -> List[float]:
        """s'z of every cone block (orthant entries individually)."""
        out = list(self.s[: self.orthant] * self.z[: self.orthant])
        start = self.orthant
        for size in self.socs:
            out.append(float(self.s[start:start + size] @ self.z[start:start + size]))
            start += size
        return out


# -------------
# Cone Algebra
# -------------
class _Cones:
    def __init__(self, orthant: int, socs: Sequence[int]):
        self.l = orthant
        self.blocks: List[slice] = []
        start = orthant
        for size in socs:
            self.blocks.append(slice(start, start + size))
            start += size
        self.dim = start
        self.degree = orthant + len(socs)

    def unit(self) -> np.ndarray:
        e = np.zeros(self.dim)
        e[: self.l] = 1.0
        for blk in self.blocks:
            e[blk.start] = 1.0
        return e

    def min_eig(self, v: np.ndarray) -> float:
        vals = [np.min(v[: self.l])] if self.l else []
        vals += [v[blk][0] - np.linalg.norm(v[blk][1:]) for blk in self.blocks]
        return float(min(vals))

    def product(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        out = np.empty_like(u)
        out[: self.l] = u[: self.l] * v[: self.l]
        for blk in self.blocks:
            a, b = u[blk], v[blk]
            out[blk.start] = a @ b
            out[blk.start + 1:blk.stop] = a[0] * b[1:] + b[0] * a[1:]
        return out

    def divide(self, lam: np.ndarray, v: np.ndarray) -> np.ndarray:
        """x with lam o x = v."""
        out = np.empty_like(v)
        out[: self.l] = v[: self.l] / lam[: self.l]
        for blk in self.blocks:
            l0, l1 = lam[blk][0], lam[blk][1:]
            v0, v1 = v[blk][0], v[blk][1:]
            x0 = (l0 * v0 - l1 @ v1) / _lorentz_det(lam[blk])
            out[blk.start] = x0
            out[blk.start + 1:blk.stop] = (v1 - x0 * l1) / l0
        return out

    def max_step(self, x: np.ndarray, dx: np.ndarray) -> float:
        alpha = np.inf
        if self.l:
            neg = dx[: self.l] < 0
            if np.any(neg):
                alpha = min(alpha, float(np.min(-x[: self.l][neg] / dx[: self.l][neg])))
        for blk in self.blocks:
            alpha = min(alpha, _soc_step(x[blk], dx[blk]))
        return alpha

    def nt_scaling(self, s: np.ndarray, z: np.ndarray) -> Tuple["_Scaling", np.ndarray]:
        """Nesterov-Todd scaling W (W z = W^-1 s = lambda) and lambda."""
        d = np.sqrt(s[: self.l] / z[: self.l])
        blocks = [_soc_nt(s[blk], z[blk]) for blk in self.blocks]
        scaling = _Scaling(self, d, blocks)
        return scaling, scaling.apply(z)


class _Scaling:
    """
    Block-diagonal symmetric scaling: a diagonal on the orthant and
    beta (2 v v' - J) on every Lorentz block, never formed densely.
    """

    def __init__(self, cones: _Cones, d: np.ndarray, blocks: List[Tuple[float, np.ndarray]]):
        self.cones = cones
        self.d = d
        self.blocks = blocks

    @classmethod
    def identity(cls, cones: _Cones) -> "_Scaling":
        blocks = []
        for blk in cones.blocks:
            v = np.zeros(blk.stop - blk.start)
            v[0] = 1.0
            blocks.append((1.0, v))
        return cls(cones, np.ones(cones.l), blocks)

    def apply(self, x: np.ndarray, inverse: bool = False) -> np.ndarray:
        """W x (or W^-1 x); x is a vector or a matrix whose rows follow the cone layout."""
        out = np.empty_like(x, dtype=float)
        l = self.cones.l
        d = 1.0 / self.d if inverse else self.d
        out[:l] = d.reshape((-1,) + (1,) * (x.ndim - 1)) * x[:l]
        for blk, (beta, v) in zip(self.cones.blocks, self.blocks):
            xb = x[blk]
            jx = xb.copy()
            jx[1:] *= -1.0
            if inverse:
                jv = -v
                jv[0] = v[0]
                out[blk] = (2.0 * np.multiply.outer(jv, jv @ xb) - jx) / beta
            else:
                out[blk] = beta * (2.0 * np.multiply.outer(v, v @ xb) - jx)
        return out


def _lorentz_det(v: np.ndarray) -> float:
    # v0^2 - ||v1||^2 without the cancellation of the direct form
    r = float(np.linalg.norm(v[1:]))
    return (v[0] - r) * (v[0] + r)


def _soc_step(x: np.ndarray, dx: np.ndarray) -> float:
    # largest alpha keeping x + alpha dx in the cone, x strictly inside
    a = dx[0] ** 2 - dx[1:] @ dx[1:]
    b = x[0] * dx[0] - x[1:] @ dx[1:]
    c = max(_lorentz_det(x), 0.0)
    if abs(a) < 1e-300:
        return -c / (2.0 * b) if b < 0 else np.inf
    disc = b * b - a * c
    if disc < 0:
        return np.inf
    q = -(b + np.copysign(np.sqrt(disc), b))
    roots = [r for r in (q / a, c / q if q != 0 else np.inf) if r > 0]
    return min(roots) if roots else np.inf


def _soc_nt(s: np.ndarray, z: np.ndarray) -> Tuple[float, np.ndarray]:
    s_norm = np.sqrt(max(_lorentz_det(s), 1e-300))
    z_norm = np.sqrt(max(_lorentz_det(z), 1e-300))
    s_bar = s / s_norm
    z_bar = z / z_norm
    gamma = np.sqrt(max((1.0 + z_bar @ s_bar) / 2.0, 1e-300))
    jz = z_bar.copy()
    jz[1:] *= -1.0
    w_bar = (s_bar + jz) / (2.0 * gamma)
    v = w_bar.copy()
    v[0] += 1.0
    v /= np.sqrt(2.0 * (w_bar[0] + 1.0))
    return float(np.sqrt(s_norm / z_norm)), v


# ----------
# KKT Solver
# ----------
class _KKT:
    """
    Solves [[0, A', G'], [A, 0, 0], [G, 0, -W'W]] [x; y; z] = [rx; ry; rz]
    through the reduced system [[G'W^-2 G, A'], [A, 0]], factorized once per
    iteration with a small quasi-definite regularization and refined iteratively.
    """

    def __init__(self, A: np.ndarray, G: np.ndarray, scaling: _Scaling, reg: float = 1e-10, refine: int = 3):
        self.A, self.G, self.scaling = A, G, scaling
        n, p = G.shape[1], A.shape[0]
        self.n, self.p = n, p
        scaled = scaling.apply(G, inverse=True)
        K = np.zeros((n + p, n + p))
        K[:n, :n] = scaled.T @ scaled
        K[:n, n:] = A.T
        K[n:, :n] = A
        self.K = K
        scale = max(1.0, float(np.max(np.abs(np.diag(K[:n, :n])))) if n else 1.0)
        shift = np.concatenate([np.full(n, reg * scale), np.full(p, -reg * scale)])
        self.lu = lu_factor(K + np.diag(shift))
        self.refine = refine

    def _h_inv(self, v: np.ndarray) -> np.ndarray:
        return self.scaling.apply(self.scaling.apply(v, inverse=True), inverse=True)

    def solve(self, rx: np.ndarray, ry: np.ndarray, rz: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        rhs = np.concatenate([rx + self.G.T @ self._h_inv(rz), ry])
        sol = lu_solve(self.lu, rhs)
        for _ in range(self.refine):
            sol += lu_solve(self.lu, rhs - self.K @ sol)
        x, y = sol[: self.n], sol[self.n:]
        z = self._h_inv(self.G @ x - rz)
        return x, y, z

# ------------
# Solve Conic
# ------------
@dataclass
class _Iterate:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    s: np.ndarray
    tau: float
    primal_residual: float
    dual_residual: float
    gap: float
    merit: float


def solve_conic(
    program: ConicProgram,
    tol: Optional[float] = None,
    max_iters: Optional[int] = None,
    reltol: Optional[float] = None,
) -> ConicSolution:
    """
    Solve a ConicProgram with a homogeneous self-dual interior-point method.

    The run stops as optimal once the primal and dual residuals are below tol
    and either the absolute gap is below tol or the gap relative to the
    objective is below reltol.

    Parameters:
    - program (ConicProgram): the program; it needs at least one inequality or cone
    - tol (float, optional): feasibility and absolute duality-gap tolerance (settings.SOLVER_TOL)
    - max_iters (int, optional): iteration cap (settings.SOLVER_MAX_ITERS)
    - reltol (float, optional): relative duality-gap tolerance (settings.SOLVER_RELTOL)

    Returns:
    - solution (ConicSolution): status "optimal", "infeasible", "unbounded" or "max_iters";
      x holds the best iterate seen in the latter case
    """
    tol = settings.SOLVER_TOL if tol is None else tol
    reltol = settings.SOLVER_RELTOL if reltol is None else reltol
    max_iters = settings.SOLVER_MAX_ITERS if max_iters is None else max_iters
    sf = program.standard_form()
    c, G, h, A, b = sf.c, sf.G, sf.h, sf.A, sf.b
    n, m = c.size, h.size
    if m == 0:
        raise InvalidInputError("the program has no inequality or cone constraint")
    cones = _Cones(sf.orthant, sf.socs)
    e = cones.unit()
    res_x0 = max(1.0, float(np.linalg.norm(c)))
    res_y0 = max(1.0, float(np.linalg.norm(b))) if b.size else 1.0
    res_z0 = max(1.0, float(np.linalg.norm(h)))

    # ----------------
    # Starting Points
    # ----------------
    kkt = _KKT(A, G, _Scaling.identity(cones))
    x, _, zz = kkt.solve(np.zeros(n), b, h)
    s = -zz
    _, y, z = kkt.solve(-c, np.zeros(A.shape[0]), np.zeros(m))
    for v in (s, z):
        shift = -cones.min_eig(v)
        if shift >= -1e-8 * max(float(np.linalg.norm(v)), 1.0):
            v += (1.0 + shift) * e
    tau, kappa = 1.0, 1.0

    status: Status = "max_iters"
    best: Optional[_Iterate] = None
    it = 0
    for it in range(max_iters + 1):
        rx = A.T @ y + G.T @ z + c * tau
        ry = -A @ x + b * tau
        rz = -G @ x + h * tau - s
        cx, by_hz = c @ x, b @ y + h @ z
        rt = -cx - by_hz - kappa

        gap = float(s @ z)
        mu = (gap + tau * kappa) / (cones.degree + 1)
        pres = max(np.linalg.norm(ry) / res_y0 if b.size else 0.0, np.linalg.norm(rz) / res_z0) / tau
        dres = np.linalg.norm(rx) / res_x0 / tau
        abs_gap = gap / tau ** 2
        pcost = cx / tau + sf.offset
        dcost = -by_hz / tau + sf.offset
        if pcost < 0:
            rel_gap = abs_gap / -pcost
        elif dcost > 0:
            rel_gap = abs_gap / dcost
        else:
            rel_gap = np.inf

        merit = max(pres / tol, dres / tol, min(abs_gap / tol, rel_gap / reltol))
        if np.isfinite(merit) and (best is None or merit < best.merit):
            best = _Iterate(x.copy(), y.copy(), z.copy(), s.copy(), tau, float(pres), float(dres), float(abs_gap), merit)

        if pres <= tol and dres <= tol and (abs_gap <= tol or rel_gap <= reltol):
            status = "optimal"
            best = _Iterate(x, y, z, s, tau, float(pres), float(dres), float(abs_gap), merit)
            break
        if by_hz < 0 and np.linalg.norm(A.T @ y + G.T @ z) / res_x0 / (-by_hz) <= tol:
            status = "infeasible"
            break
        if cx < 0:
            ray = max(np.linalg.norm(A @ x) / res_y0 if b.size else 0.0, np.linalg.norm(G @ x + s) / res_z0)
            if ray / (-cx) <= tol:
                status = "unbounded"
                break
        if it == max_iters:
            break
        if min(cones.min_eig(s), cones.min_eig(z)) <= 1e-13 * mu:
            error_logger.warning("conic solver: iterate reached the cone boundary at iteration %d", it)
            break

        try:
            scaling, lam = cones.nt_scaling(s, z)
            kkt = _KKT(A, G, scaling)
            vx, vy, vz = kkt.solve(c, -b, -h)
            v_dot = c @ vx + b @ vy + h @ vz

            def newton(eta: float, ds_target: np.ndarray, dk: float):
                ds_hat = cones.divide(lam, ds_target)
                ux, uy, uz = kkt.solve(-eta * rx, eta * ry, eta * rz - scaling.apply(ds_hat))
                dtau = (-eta * rt + dk / tau + c @ ux + b @ uy + h @ uz) / (kappa / tau + v_dot)
                dx, dy, dz = ux - dtau * vx, uy - dtau * vy, uz - dtau * vz
                ds = scaling.apply(ds_hat - scaling.apply(dz))
                dkap = (dk - kappa * dtau) / tau
                return dx, dy, dz, ds, dtau, dkap

            def step_length(ds, dz, dtau, dkap) -> float:
                alpha = min(cones.max_step(s, ds), cones.max_step(z, dz))
                if dtau < 0:
                    alpha = min(alpha, -tau / dtau)
                if dkap < 0:
                    alpha = min(alpha, -kappa / dkap)
                return alpha

            # predictor
            aff = newton(1.0, -cones.product(lam, lam), -tau * kappa)
            alpha_aff = min(1.0, step_length(aff[3], aff[2], aff[4], aff[5]))
            sigma = (1.0 - alpha_aff) ** 3

            # corrector
            second_order = cones.product(scaling.apply(aff[3], inverse=True), scaling.apply(aff[2]))
            dx, dy, dz, ds, dtau, dkap = newton(
                1.0 - sigma,
                -cones.product(lam, lam) - second_order + sigma * mu * e,
                -tau * kappa - aff[4] * aff[5] + sigma * mu,
            )
            alpha = min(1.0, 0.99 * step_length(ds, dz, dtau, dkap))
        except (np.linalg.LinAlgError, ValueError, FloatingPointError, ZeroDivisionError) as exc:
            error_logger.warning("conic solver: Newton step failed at iteration %d: %s", it, exc)
            break
        if not np.isfinite(alpha) or alpha <= 0:
            error_logger.warning("conic solver: no progress possible at iteration %d", it)
            break

        x, y, z, s = x + alpha * dx, y + alpha * dy, z + alpha * dz, s + alpha * ds
        tau, kappa = tau + alpha * dtau, kappa + alpha * dkap
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z)) and np.isfinite(tau) and tau > 0):
            error_logger.warning("conic solver: non-finite iterate at iteration %d", it)
            break

    if status in ("infeasible", "unbounded"):
        msg_logger.debug("conic solver: %s after %d iterations", status, it)
        return ConicSolution(
            x=x, objective_value=np.nan, status=status, duality_gap=np.nan,
            iterations=it, s=s, z=z, y=y, orthant=cones.l, socs=list(sf.socs),
        )
    if best is None:
        # no finite iterate at all; report the starting point
        best = _Iterate(x, y, z, s, tau, float("inf"), float("inf"), float("inf"), float("inf"))
    msg_logger.debug(
        "conic solver: %s after %d iterations (pres=%.2e dres=%.2e gap=%.2e)",
        status, it, best.primal_residual, best.dual_residual, best.gap,
    )
    return ConicSolution(
        x=best.x / best.tau,
        objective_value=float(c @ best.x / best.tau + sf.offset),
        status=status,
        duality_gap=best.gap,
        primal_residual=best.primal_residual,
        dual_residual=best.dual_residual,
        iterations=it,
        s=best.s / best.tau,
        z=best.z / best.tau,
        y=best.y / best.tau,
        orthant=cones.l,
        socs=list(sf.socs),
    )
