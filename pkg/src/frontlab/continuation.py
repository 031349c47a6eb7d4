"""Boundary-value problems and pseudo-arclength continuation for trigger fronts.

Two discretized problems are supported:

  qcgl_tw: steady profiles of the co-moving qcGL equation,
      0 = (1+i*alpha) u'' + c u' + (chi - i*omega) u
          + (rho + i*gamma) u|u|^2 - (1+i*beta) u|u|^4,
    on [xi_min, xi_max] with homogeneous Dirichlet at xi_max and wave-train
    closure at xi_min (Im u = 0, d|u|^2/dxi = 0, d Im(conj(u) u')/dxi = 0).

  ch_mtw: modulated traveling waves of the triggered Cahn-Hilliard equation,
      omega u_tau = -(u_xixi + ftilde(xi,u))_xixi + c u_xi,
    tau-periodic on [0, 2pi), spectral in tau, second-order centered and
    periodic in xi with the last two xi-columns pinned to zero (u = u_xi = 0
    ahead of the trigger; the plateau trigger's stable strip makes the wrap
    through xi_min harmless).

Unknowns are stored xi-major (all tau values of one xi-node contiguous; for
qcgl_tw the two real components of one node are contiguous), with the free
parameters appended last.  newton_solve is a damped Newton iteration with an
analytic sparse Jacobian; continue_branch wraps it in pseudo-arclength
stepping with a tangent-secant predictor and adaptive step control.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .models import ModelSpec, trigger_profile


class ContinuationError(RuntimeError):
    pass


class LayoutError(ContinuationError):
    """Unknown vector does not match the problem layout."""


@dataclass(frozen=True)
class BvpProblem:
    kind: str                      # "qcgl_tw" | "ch_mtw"
    spec: ModelSpec
    domain: tuple
    n_xi: int
    n_tau: int = 1
    free_params: tuple = ("omega",)
    phase_target: float = 0.0

    def __post_init__(self):
        if self.kind not in ("qcgl_tw", "ch_mtw"):
            raise ValueError(f"unknown BVP kind {self.kind!r}")
        if self.n_xi < 4:
            raise ValueError("n_xi must be >= 4")
        if self.kind == "qcgl_tw" and self.n_tau != 1:
            raise ValueError("qcgl_tw is steady: n_tau must be 1")
        if self.kind == "ch_mtw" and self.n_tau < 4:
            raise ValueError("ch_mtw needs n_tau >= 4")
        bad = set(self.free_params) - {"c", "omega"}
        if bad:
            raise ValueError(f"unknown free parameters {bad}")

    @property
    def dx(self) -> float:
        lo, hi = self.domain
        return (hi - lo) / self.n_xi

    @property
    def xi(self) -> np.ndarray:
        lo, _ = self.domain
        return lo + self.dx * np.arange(self.n_xi)

    @property
    def n_field(self) -> int:
        comp = 2 if self.kind == "qcgl_tw" else 1
        return comp * self.n_xi * self.n_tau

    @property
    def n_unknowns(self) -> int:
        return self.n_field + len(self.free_params)

    def split(self, unknowns: np.ndarray):
        """-> (field part, {param name: value}) with fixed params from spec."""
        unknowns = np.asarray(unknowns, dtype=float)
        if unknowns.shape != (self.n_unknowns,):
            raise LayoutError(
                f"expected {self.n_unknowns} unknowns, got {unknowns.shape}")
        u = unknowns[:self.n_field]
        params = {"c": self.spec.c, "omega": self.spec.omega}
        for name, value in zip(self.free_params, unknowns[self.n_field:]):
            params[name] = float(value)
        return u, params

    def pack(self, fieldvec: np.ndarray, params: dict) -> np.ndarray:
        tail = [params[name] for name in self.free_params]
        return np.concatenate([np.ravel(fieldvec), tail])


@dataclass
class BranchPoint:
    c: float
    omega: float
    k: float
    l2_norm: float
    front_distance: float
    solution: np.ndarray
    fold_flag: bool = False
    residual_norm: float = np.nan


@dataclass
class Branch:
    points: list = field(default_factory=list)
    center_estimate: Optional[tuple] = None


@dataclass
class NewtonResult:
    converged: bool
    unknowns: np.ndarray
    residual_norm: float
    history: list


# ---------------------------------------------------------------- operators

def _circulant_d1(n: int, dx: float) -> sp.csr_matrix:
    e = np.ones(n)
    m = sp.diags([e, -e], [1, -1], shape=(n, n), format="lil")
    m[0, n - 1] = -1.0
    m[n - 1, 0] = 1.0
    return (m / (2.0 * dx)).tocsr()


def _circulant_d2(n: int, dx: float) -> sp.csr_matrix:
    e = np.ones(n)
    m = sp.diags([e, -2.0 * e, e], [1, 0, -1], shape=(n, n), format="lil")
    m[0, n - 1] = 1.0
    m[n - 1, 0] = 1.0
    return (m / dx**2).tocsr()


def _spectral_dtau(nt: int) -> np.ndarray:
    """Dense spectral differentiation matrix on the 2pi-periodic tau grid."""
    col = np.zeros(nt)
    j = np.arange(1, nt)
    if nt % 2 == 0:
        col[1:] = 0.5 * (-1.0) ** j / np.tan(np.pi * j / nt)
    else:
        col[1:] = 0.5 * (-1.0) ** j / np.sin(np.pi * j / nt)
    return -np.array([np.roll(col, i) for i in range(nt)]).T


# ---------------------------------------------------------------- ch_mtw

class _ChMtw:
    """Assembled operators for a ch_mtw problem (cached per problem)."""

    def __init__(self, problem: BvpProblem):
        self.problem = problem
        nx, nt = problem.n_xi, problem.n_tau
        dx = problem.dx
        self.chi = trigger_profile(problem.spec.trigger, problem.xi)
        d1 = _circulant_d1(nx, dx)
        d2 = _circulant_d2(nx, dx)
        eye_t = sp.identity(nt, format="csr")
        self.D1 = sp.kron(d1, eye_t, format="csr")
        self.D2 = sp.kron(d2, eye_t, format="csr")
        self.K4 = (self.D2 @ self.D2).tocsr()
        self.Dtau = sp.kron(sp.identity(nx, format="csr"),
                            sp.csr_matrix(_spectral_dtau(nt)), format="csr")
        # rows of the two pinned xi-columns (Dirichlet u = u_xi = 0 ahead)
        pin = []
        for i in (nx - 2, nx - 1):
            pin.extend(range(i * nt, (i + 1) * nt))
        self.pinned = np.array(pin, dtype=int)
        self.interior = np.setdiff1d(np.arange(nx * nt), self.pinned)
        self.chi_full = np.repeat(self.chi, nt)

    def ftilde(self, u):
        g = self.problem.spec.ch.gamma
        return self.chi_full * u + g * u**3 - u**5

    def ftilde_prime(self, u):
        g = self.problem.spec.ch.gamma
        return self.chi_full + 3.0 * g * u**2 - 5.0 * u**4

    def pde_residual(self, u, c, omega):
        r = (omega * (self.Dtau @ u) + self.K4 @ u + self.D2 @ self.ftilde(u)
             - c * (self.D1 @ u))
        r[self.pinned] = u[self.pinned]
        return r

    def pde_jacobian(self, u, c, omega):
        j = (omega * self.Dtau + self.K4
             + self.D2 @ sp.diags(self.ftilde_prime(u)) - c * self.D1).tolil()
        for row in self.pinned:
            j.rows[row] = [row]
            j.data[row] = [1.0]
        return j.tocsr()

    def dres_domega(self, u):
        d = self.Dtau @ u
        d[self.pinned] = 0.0
        return d

    def dres_dc(self, u):
        d = -(self.D1 @ u)
        d[self.pinned] = 0.0
        return d

    def phase_row(self, u_prev):
        """Gradient of the phase condition <d_tau u_prev, u> = target."""
        w = self.Dtau @ u_prev
        return w * (self.problem.dx * 2.0 * np.pi / self.problem.n_tau)


# ---------------------------------------------------------------- qcgl_tw

class _QcglTw:
    def __init__(self, problem: BvpProblem):
        self.problem = problem
        self.chi = trigger_profile(problem.spec.trigger, problem.xi)

    def _components(self, u):
        return u[0::2], u[1::2]

    def pde_residual(self, u, c, omega):
        """Rows: [phase pin, flat modulus, flat wavenumber flux,
        interior collocation (re, im interleaved), right Dirichlet (re, im)].
        2*n_xi + 1 rows for the 2*n_xi field unknowns; the extra row is
        balanced by the free omega."""
        p = self.problem.spec.qcgl
        nx, dx = self.problem.n_xi, self.problem.dx
        x, y = self._components(u)
        z = x + 1j * y
        zxx = (z[2:] - 2.0 * z[1:-1] + z[:-2]) / dx**2
        zx = (z[2:] - z[:-2]) / (2.0 * dx)
        zi = z[1:-1]
        s = np.abs(zi) ** 2
        f = ((1.0 + 1j * p.alpha) * zxx + c * zx
             + (self.chi[1:-1] - 1j * omega) * zi
             + (p.rho + 1j * p.gamma) * zi * s
             - (1.0 + 1j * p.beta) * zi * s**2)
        res = np.empty(2 * nx + 1)
        res[0] = y[0]                                   # phase pin
        res[1] = (np.abs(z[1]) ** 2 - np.abs(z[0]) ** 2) / dx   # flat modulus
        qflux = np.imag(np.conj(z[:2]) * (z[1:3] - z[0:2])) / dx
        res[2] = (qflux[1] - qflux[0]) / dx             # flat wavenumber flux
        res[3:3 + 2 * (nx - 2):2] = f.real
        res[4:3 + 2 * (nx - 2):2] = f.imag
        res[-2] = x[-1]
        res[-1] = y[-1]
        return res

    def pde_jacobian(self, u, c, omega):
        """Analytic Jacobian wrt the 2*nx field unknowns (sparse lil)."""
        p = self.problem.spec.qcgl
        nx, dx = self.problem.n_xi, self.problem.dx
        x, y = self._components(u)
        z = x + 1j * y
        n_rows = 2 * nx + 1
        j = sp.lil_matrix((n_rows, 2 * nx))

        def put_complex(row, col_node, dfdz, dfdzbar):
            """Write d(f)/d(x_col, y_col) for complex f into rows (row,row+1)."""
            # f = f(z, zbar): df/dx = dfdz + dfdzbar ; df/dy = i(dfdz - dfdzbar)
            dfx = dfdz + dfdzbar
            dfy = 1j * (dfdz - dfdzbar)
            j[row, 2 * col_node] += dfx.real
            j[row + 1, 2 * col_node] += dfx.imag
            j[row, 2 * col_node + 1] += dfy.real
            j[row + 1, 2 * col_node + 1] += dfy.imag

        A = 1.0 + 1j * p.alpha
        B = p.rho + 1j * p.gamma
        C = 1.0 + 1j * p.beta
        for i in range(1, nx - 1):
            row = 3 + 2 * (i - 1)
            s = np.abs(z[i]) ** 2
            # neighbors via linear operators
            put_complex(row, i - 1, A / dx**2 - c / (2 * dx), 0.0)
            put_complex(row, i + 1, A / dx**2 + c / (2 * dx), 0.0)
            dfdz = (-2.0 * A / dx**2 + (self.chi[i] - 1j * omega)
                    + B * 2.0 * s - C * 3.0 * s**2)
            dfdzbar = B * z[i] ** 2 - C * 2.0 * z[i] ** 2 * s
            put_complex(row, i, dfdz, dfdzbar)
        # boundary rows (real scalars; fill directly)
        j[0, 1] = 1.0
        # d/du of (|z1|^2 - |z0|^2)/dx
        j[1, 2] = 2.0 * x[1] / dx
        j[1, 3] = 2.0 * y[1] / dx
        j[1, 0] = -2.0 * x[0] / dx
        j[1, 1] = -2.0 * y[0] / dx
        # row 2: res = (q1 - q0)/dx with q_i = Im(conj(z_i)(z_{i+1}-z_i))/dx
        #            = (x_i (y_{i+1}-y_i) - y_i (x_{i+1}-x_i))/dx
        inv = 1.0 / dx**2
        j[2, 0] = -y[1] * inv
        j[2, 1] = x[1] * inv
        j[2, 2] = (y[2] + y[0]) * inv
        j[2, 3] = -(x[2] + x[0]) * inv
        j[2, 4] = -y[1] * inv
        j[2, 5] = x[1] * inv
        j[-2, 2 * (nx - 1)] = 1.0
        j[-1, 2 * (nx - 1) + 1] = 1.0
        return j

    def dres_domega(self, u, c, omega):
        nx = self.problem.n_xi
        x, y = self._components(u)
        z = x + 1j * y
        d = np.zeros(2 * nx + 1)
        f = -1j * z[1:-1]
        d[3:3 + 2 * (nx - 2):2] = f.real
        d[4:3 + 2 * (nx - 2):2] = f.imag
        return d

    def dres_dc(self, u, c, omega):
        nx, dx = self.problem.n_xi, self.problem.dx
        x, y = self._components(u)
        z = x + 1j * y
        d = np.zeros(2 * nx + 1)
        f = (z[2:] - z[:-2]) / (2.0 * dx)
        d[3:3 + 2 * (nx - 2):2] = f.real
        d[4:3 + 2 * (nx - 2):2] = f.imag
        return d


def _operator(problem: BvpProblem):
    if problem.kind == "ch_mtw":
        return _ChMtw(problem)
    return _QcglTw(problem)


# ---------------------------------------------------------------- residual

@dataclass(frozen=True)
class ArclengthData:
    """Pseudo-arclength constraint: <tangent, X - ref> = ds."""
    tangent: np.ndarray
    reference: np.ndarray
    ds: float


def residual(problem: BvpProblem, unknowns: np.ndarray,
             previous_solution: Optional[np.ndarray] = None,
             arc: Optional[ArclengthData] = None,
             op=None) -> np.ndarray:
    """Full residual: PDE rows, then phase row (ch_mtw with free omega),
    then the arclength row when continuing."""
    if op is None:
        op = _operator(problem)
    u, params = problem.split(unknowns)
    rows = [op.pde_residual(u, params["c"], params["omega"])]
    if problem.kind == "ch_mtw" and "omega" in problem.free_params:
        if previous_solution is None:
            raise ContinuationError(
                "ch_mtw with free omega needs previous_solution for the "
                "phase condition")
        u_prev, _ = problem.split(previous_solution)
        w = op.phase_row(u_prev)
        rows.append(np.array([w @ u - problem.phase_target]))
    if arc is not None:
        rows.append(np.array([arc.tangent @ (unknowns - arc.reference)
                              - arc.ds]))
    return np.concatenate(rows)


def jacobian(problem: BvpProblem, unknowns: np.ndarray,
             previous_solution: Optional[np.ndarray] = None,
             arc: Optional[ArclengthData] = None,
             op=None) -> sp.csr_matrix:
    if op is None:
        op = _operator(problem)
    u, params = problem.split(unknowns)
    c, omega = params["c"], params["omega"]
    j_field = op.pde_jacobian(u, c, omega)
    cols = [sp.csr_matrix(j_field)]
    for name in problem.free_params:
        if name == "omega":
            d = (op.dres_domega(u) if problem.kind == "ch_mtw"
                 else op.dres_domega(u, c, omega))
        else:
            d = (op.dres_dc(u) if problem.kind == "ch_mtw"
                 else op.dres_dc(u, c, omega))
        cols.append(sp.csr_matrix(d.reshape(-1, 1)))
    j = sp.hstack(cols, format="csr")
    extra = []
    if problem.kind == "ch_mtw" and "omega" in problem.free_params:
        u_prev, _ = problem.split(previous_solution)
        w = op.phase_row(u_prev)
        row = np.concatenate([w, np.zeros(len(problem.free_params))])
        extra.append(sp.csr_matrix(row.reshape(1, -1)))
    if arc is not None:
        extra.append(sp.csr_matrix(arc.tangent.reshape(1, -1)))
    if extra:
        j = sp.vstack([j] + extra, format="csr")
    return j.tocsc()


# ---------------------------------------------------------------- Newton

def _newton_step_ch(problem: BvpProblem, x, previous_solution, arc, op, r):
    """Bordered elimination for ch_mtw: factor only the square field block.

    [[A, B], [C, D]] [du, dp] = -[r_f, r_b]; A is block-banded and cheap to
    factor, the borders (parameter columns, phase/arclength rows) are handled
    through an m x m Schur complement.
    """
    u, params = problem.split(x)
    n = problem.n_field
    A = op.pde_jacobian(u, params["c"], params["omega"]).tocsc()
    bcols = []
    for name in problem.free_params:
        bcols.append(op.dres_domega(u) if name == "omega" else op.dres_dc(u))
    B = np.column_stack(bcols)
    crows, drows = [], []
    if "omega" in problem.free_params:
        u_prev, _ = problem.split(previous_solution)
        crows.append(op.phase_row(u_prev))
        drows.append(np.zeros(len(problem.free_params)))
    if arc is not None:
        crows.append(arc.tangent[:n])
        drows.append(arc.tangent[n:])
    C = np.vstack(crows)
    D = np.vstack(drows)
    r_f, r_b = r[:n], r[n:]
    lu = splu(A, permc_spec="MMD_AT_PLUS_A")
    y = lu.solve(r_f)
    Z = lu.solve(B)
    S = D - C @ Z
    dp = np.linalg.solve(S, C @ y - r_b)
    du = -y - Z @ dp
    return np.concatenate([du, dp])


def newton_solve(problem: BvpProblem, guess: np.ndarray,
                 previous_solution: Optional[np.ndarray] = None,
                 arc: Optional[ArclengthData] = None,
                 tol: float = 1e-8, max_iter: int = 25,
                 op=None) -> NewtonResult:
    """Damped Newton with analytic sparse Jacobian.

    Converged when both the residual inf-norm and the last step inf-norm
    fall below tol.  Failure returns the last iterate with the residual
    history attached.
    """
    if op is None:
        op = _operator(problem)
    x = np.array(guess, dtype=float)
    if previous_solution is None and problem.kind == "ch_mtw" \
            and "omega" in problem.free_params:
        previous_solution = x.copy()
    history = []
    step_norm = np.inf
    for _ in range(max_iter):
        r = residual(problem, x, previous_solution, arc, op=op)
        rnorm = float(np.max(np.abs(r)))
        history.append(rnorm)
        if rnorm <= tol and step_norm <= tol:
            return NewtonResult(True, x, rnorm, history)
        try:
            if problem.kind == "ch_mtw":
                dx = _newton_step_ch(problem, x, previous_solution, arc, op, r)
            else:
                j = jacobian(problem, x, previous_solution, arc, op=op)
                dx = splu(j).solve(-r)
        except (RuntimeError, np.linalg.LinAlgError):
            return NewtonResult(False, x, rnorm, history + [np.inf])
        # backtracking damping on the residual norm
        lam = 1.0
        for _ in range(8):
            x_try = x + lam * dx
            r_try = residual(problem, x_try, previous_solution, arc, op=op)
            if np.max(np.abs(r_try)) < rnorm or rnorm <= tol:
                break
            lam *= 0.5
        x = x + lam * dx
        step_norm = float(np.max(np.abs(lam * dx)))
    r = residual(problem, x, previous_solution, arc, op=op)
    rnorm = float(np.max(np.abs(r)))
    history.append(rnorm)
    converged = rnorm <= tol and step_norm <= tol
    return NewtonResult(converged, x, rnorm, history)


# ---------------------------------------------------------------- branch

def _branch_point(problem: BvpProblem, unknowns: np.ndarray,
                  residual_norm: float, op=None) -> BranchPoint:
    from .measure import MeasureError, front_position, wake_window, \
        wavenumber_estimate
    from .sim import FieldState, Grid1D

    u, params = problem.split(unknowns)
    if problem.kind == "ch_mtw":
        slice0 = u.reshape(problem.n_xi, problem.n_tau)[:, 0]
        values = slice0
    else:
        values = u[0::2] + 1j * u[1::2]
    lo, hi = problem.domain
    grid = Grid1D(problem.n_xi, hi - lo)
    state = FieldState(grid, np.array(values), 0.0, params["c"])
    k = np.nan
    distance = np.nan
    try:
        fp = front_position(state)
        k = wavenumber_estimate(state, wake_window(state, fp),
                                kind=problem.spec.kind)
        trig = problem.spec.trigger
        if trig is not None:
            distance = fp + lo - trig.primary_interface
    except MeasureError:
        pass
    weight = problem.dx * (2.0 * np.pi / problem.n_tau
                           if problem.kind == "ch_mtw" else 1.0)
    l2 = float(np.sqrt(np.sum(u**2) * weight))
    return BranchPoint(c=params["c"], omega=params["omega"], k=float(k),
                       l2_norm=l2, front_distance=float(distance),
                       solution=unknowns.copy(),
                       residual_norm=residual_norm)


@dataclass
class StepControl:
    ds: float = 0.02
    ds_min: float = 1e-6
    ds_max: float = 0.2
    max_points: int = 400
    grow_after: int = 3
    grow_factor: float = 1.3
    param_weight: float = 1.0   # weight of (c, omega) in the arclength metric
    field_weight: float = 0.01  # weight of field unknowns (keeps turns sharp)
    center_window: int = 60
    center_radius: float = 2e-4


def _weights(problem: BvpProblem, control: StepControl) -> np.ndarray:
    w = np.full(problem.n_field + len(problem.free_params),
                control.field_weight)
    w[problem.n_field:] = control.param_weight
    return w


def continue_branch(problem: BvpProblem, seed: np.ndarray,
                    control: Optional[StepControl] = None,
                    direction: float = 1.0) -> Branch:
    """Trace a branch by pseudo-arclength continuation from a converged seed.

    The problem must have free_params = ("c", "omega") (ch_mtw) or
    ("omega", "c")-style two-parameter layout; the phase condition plus the
    arclength equation square the system.  Terminates on point budget, step
    underflow, or when the (c, omega) trace has collapsed onto a point (the
    spiral center).
    """
    if control is None:
        control = StepControl()
    op = _operator(problem)
    if len(problem.free_params) != 2:
        raise ContinuationError(
            "continue_branch needs two free parameters (c and omega)")
    # converge the seed at fixed c (the arclength row pins c - c_seed = 0)
    pin_c = np.zeros(problem.n_unknowns)
    pin_c[problem.n_field + problem.free_params.index("c")] = 1.0
    res0 = newton_solve(problem, seed, previous_solution=seed,
                        arc=ArclengthData(pin_c, seed.copy(), 0.0), op=op)
    if not res0.converged:
        raise ContinuationError(
            f"seed failed to converge: residual {res0.residual_norm:.3e}")
    if problem.kind == "ch_mtw":
        res0 = NewtonResult(True, normalize_orientation(problem,
                                                        res0.unknowns),
                            res0.residual_norm, res0.history)
    branch = Branch()
    x = res0.unknowns
    branch.points.append(_branch_point(problem, x, res0.residual_norm, op=op))
    w = _weights(problem, control)

    # first tangent: pure c-direction, unit length in the weighted metric
    tangent = np.zeros_like(x)
    tangent[problem.n_field + problem.free_params.index("c")] = \
        direction / control.param_weight
    ds = control.ds
    easy = 0
    x_prev = x
    n_fail_first = 0
    while len(branch.points) < control.max_points:
        # tangent is kept unit-length in the weighted metric <a,b> = sum w^2 ab
        pred = x + ds * tangent
        arc = ArclengthData(tangent=tangent * w**2, reference=x, ds=ds)
        res = newton_solve(problem, pred, previous_solution=x, arc=arc, op=op)
        if not res.converged:
            if len(branch.points) == 1:
                n_fail_first += 1
                if n_fail_first > 12:
                    raise ContinuationError("first continuation step failed")
            ds *= 0.5
            easy = 0
            if ds < control.ds_min:
                break
            continue
        x_new = res.unknowns
        secant = x_new - x
        nrm = float(np.linalg.norm(secant * w))
        if nrm > 0:
            tangent = secant / nrm
        x_prev, x = x, x_new
        branch.points.append(_branch_point(problem, x, res.residual_norm,
                                           op=op))
        easy += 1
        if easy >= control.grow_after:
            ds = min(ds * control.grow_factor, control.ds_max)
            easy = 0
        # center detection: recent (c, omega) contained in a tiny ball
        if len(branch.points) >= control.center_window:
            tail = branch.points[-control.center_window // 2:]
            cs = np.array([p.c for p in tail])
            oms = np.array([p.omega for p in tail])
            if np.ptp(cs) < control.center_radius and \
                    np.ptp(oms) < control.center_radius:
                branch.center_estimate = (float(cs.mean()), float(oms.mean()))
                break
    if branch.center_estimate is None and len(branch.points) >= 8:
        tail = branch.points[-max(4, len(branch.points) // 5):]
        branch.center_estimate = (float(np.mean([p.c for p in tail])),
                                  float(np.mean([p.omega for p in tail])))
    detect_folds(branch)
    return branch


def normalize_orientation(problem: BvpProblem, unknowns: np.ndarray
                          ) -> np.ndarray:
    """Pick the omega > 0 representative of the tau-reflection symmetry
    (ch_mtw is invariant under (tau, omega) -> (-tau, -omega))."""
    if problem.kind != "ch_mtw" or "omega" not in problem.free_params:
        return unknowns
    u, params = problem.split(unknowns)
    if params["omega"] >= 0:
        return unknowns
    flipped = u.reshape(problem.n_xi, problem.n_tau)[:, ::-1]
    params["omega"] = -params["omega"]
    return problem.pack(flipped, params)


def seed_from_timestepping(problem: BvpProblem, dt: float = 0.01,
                           t_settle: float = 500.0,
                           perturbation=None) -> np.ndarray:
    """Build a BVP seed by time-stepping a locked trigger front.

    Evolves the co-moving system at the problem's (c, trigger) until locked,
    measures the temporal frequency at a wake probe, then samples one period
    into the n_tau slices.  Returns packed unknowns with omega from the probe
    (and c appended when it is a free parameter).
    """
    from . import measure
    from .sim import Grid1D, Perturbation, RunConfig, evolve, make_stepper

    lo, hi = problem.domain
    grid = Grid1D(problem.n_xi, hi - lo)
    spec = problem.spec
    if perturbation is None:
        ref = (spec.trigger.primary_interface if spec.trigger is not None
               else 0.5 * (lo + hi))
        perturbation = Perturbation(location=ref - 10.0, amplitude=0.3,
                                    width=3.0)
    probe = (spec.trigger.primary_interface - 50.0
             if spec.trigger is not None else 0.5 * (lo + hi))
    config = RunConfig(spec=spec, grid=grid, dt=dt, t_end=t_settle,
                       record_every=5.0, perturbation=perturbation,
                       probe_xi=probe, floor=1e-10)
    record = evolve(config)
    if record.error is not None:
        raise ContinuationError(f"seeding run failed: {record.error}")
    omega = measure.temporal_frequency_estimate(record)
    if problem.kind == "qcgl_tw":
        state = record.final_state
        u = np.empty(2 * problem.n_xi)
        u[0::2] = state.values.real
        u[1::2] = state.values.imag
        params = {"c": spec.c, "omega": omega}
        return problem.pack(u, params)
    period = 2.0 * np.pi / omega
    stepper = make_stepper(spec, grid, dt)
    state = record.final_state
    slices = np.empty((problem.n_xi, problem.n_tau))
    steps_per_slice = period / problem.n_tau / dt
    acc = 0.0
    for j in range(problem.n_tau):
        slices[:, j] = np.real(state.values)
        acc += steps_per_slice
        n = int(round(acc))
        acc -= n
        for _ in range(n):
            state = stepper.step(state)
    params = {"c": spec.c, "omega": omega}
    return problem.pack(slices, params)


def detect_folds(branch: Branch) -> list:
    """Indices where dc/ds changes sign along the ordered branch."""
    pts = branch.points
    if len(pts) < 3:
        return []
    c = np.array([p.c for p in pts])
    dc = np.diff(c)
    idx = []
    for i in range(1, len(dc)):
        if dc[i] == 0.0:
            continue
        if dc[i - 1] * dc[i] < 0:
            idx.append(i)
            pts[i].fold_flag = True
    return idx
