# optim.py
# Solvers convexos pequenos: SDP denso (ponto interior primal-dual), LP e fatoração PSD

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla
from scipy import sparse
from scipy.optimize import linprog

from config import MAX_ITER, SOLVER_TOL
from errors import InvalidParameterError, NotPsdError

logger = logging.getLogger(__name__)

STATUS_OPTIMAL = "optimal"
STATUS_MAX_ITER = "max-iterations"
STATUS_INFEASIBLE = "infeasible-detected"

# teto de memória (em doubles) para os produtos externos do complemento de Schur
_SCHUR_CHUNK = 2_000_000


# ---------------------------------------------------------------------------
# Tipos
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SdpConstraint:
    """
    Uma restrição ⟨S, X⟩ = rhs. `entries` guarda a matriz simétrica S em forma
    esparsa: (bloco, p, q, valor) com p <= q, valendo S[p,q] = S[q,p] = valor.
    """
    entries: tuple[tuple[int, int, int, float], ...]
    rhs: float


@dataclass(frozen=True)
class SdpProblem:
    """maximize ⟨G, X⟩  s.t.  ⟨S_i, X⟩ = s_i,  X ⪰ 0 (bloco-diagonal)."""
    blocks: tuple[int, ...]
    objective: tuple[np.ndarray, ...]
    constraints: tuple[SdpConstraint, ...] = ()

    def __post_init__(self):
        blocks = tuple(int(b) for b in self.blocks)
        if not blocks or any(b < 1 for b in blocks):
            raise InvalidParameterError(f"Blocos inválidos: {blocks}")
        object.__setattr__(self, "blocks", blocks)
        objective = tuple(np.asarray(G, dtype=float) for G in self.objective)
        if len(objective) != len(blocks):
            raise InvalidParameterError("Um bloco de objetivo por bloco de matriz")
        for k, (G, n) in enumerate(zip(objective, blocks)):
            if G.shape != (n, n):
                raise InvalidParameterError(f"Objetivo do bloco {k} com forma {G.shape}, esperado {(n, n)}")
            if not np.allclose(G, G.T, atol=1e-12):
                raise InvalidParameterError(f"Objetivo do bloco {k} não é simétrico")
        object.__setattr__(self, "objective", objective)
        for i, c in enumerate(self.constraints):
            for blk, p, q, _ in c.entries:
                if not (0 <= blk < len(blocks)) or not (0 <= p <= q < blocks[blk]):
                    raise InvalidParameterError(f"Restrição {i}: entrada ({blk}, {p}, {q}) fora do bloco")

    @classmethod
    def from_dense(cls, objective: np.ndarray, eq_constraints) -> "SdpProblem":
        """Forma de bloco único a partir de matrizes densas (G, [(S_i, s_i), ...])."""
        G = np.asarray(objective, dtype=float)
        constraints = []
        for S, s in eq_constraints:
            S = np.asarray(S, dtype=float)
            if S.shape != G.shape:
                raise InvalidParameterError(f"S_i com forma {S.shape}, esperado {G.shape}")
            if not np.allclose(S, S.T, atol=1e-12):
                raise InvalidParameterError("S_i não é simétrica")
            p_idx, q_idx = np.nonzero(np.triu(S))
            entries = tuple((0, int(p), int(q), float(S[p, q])) for p, q in zip(p_idx, q_idx))
            constraints.append(SdpConstraint(entries, float(s)))
        return cls((G.shape[0],), (G,), tuple(constraints))

    @property
    def dim(self) -> int:
        return sum(self.blocks)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    @cached_property
    def rhs(self) -> np.ndarray:
        return np.array([c.rhs for c in self.constraints], dtype=float)

    def constraint_matrix(self, i: int) -> list[np.ndarray]:
        S = [np.zeros((n, n)) for n in self.blocks]
        for blk, p, q, val in self.constraints[i].entries:
            S[blk][p, q] = val
            S[blk][q, p] = val
        return S

    def objective_value(self, X: list[np.ndarray]) -> float:
        return float(sum(np.vdot(G, Xk) for G, Xk in zip(self.objective, X)))

    def residuals(self, X: list[np.ndarray]) -> np.ndarray:
        return _Operator(self).apply(X) - self.rhs


@dataclass
class SdpSolution:
    primal: list[np.ndarray]
    dual: np.ndarray
    slack: list[np.ndarray]
    primal_value: float
    dual_value: float
    gap: float
    status: str
    iterations: int = 0
    primal_infeasibility: float = 0.0
    dual_infeasibility: float = 0.0

    @property
    def X(self) -> np.ndarray:
        """Matriz primal completa (bloco-diagonal)."""
        return sla.block_diag(*self.primal) if len(self.primal) > 1 else self.primal[0]

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OPTIMAL


@dataclass
class LpProblem:
    """maximize cᵀx  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  0 <= x <= upper."""
    c: np.ndarray
    a_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    upper: np.ndarray | None = None
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        n = self.c.shape[0]
        for name, rows, rhs in (("ub", self.a_ub, self.b_ub), ("eq", self.a_eq, self.b_eq)):
            if (rows is None) != (rhs is None):
                raise InvalidParameterError(f"a_{name} e b_{name} devem vir juntos")
            if rows is not None:
                rows_arr = np.atleast_2d(np.asarray(rows, dtype=float))
                rhs_arr = np.atleast_1d(np.asarray(rhs, dtype=float))
                if rows_arr.shape[1] != n or rows_arr.shape[0] != rhs_arr.shape[0]:
                    raise InvalidParameterError(
                        f"Dimensões inconsistentes em a_{name}: {rows_arr.shape} vs c {n}, b {rhs_arr.shape}"
                    )
                setattr(self, f"a_{name}", rows_arr)
                setattr(self, f"b_{name}", rhs_arr)
        if self.upper is not None:
            self.upper = np.broadcast_to(np.asarray(self.upper, dtype=float), (n,)).copy()


@dataclass(frozen=True)
class LpResult:
    value: float
    x: np.ndarray = field(repr=False)
    status: str


# ---------------------------------------------------------------------------
# Operador A: X -> (⟨S_i, X⟩)_i, guardado como esparso sobre blocos vetorizados
# ---------------------------------------------------------------------------

class _Operator:
    def __init__(self, problem: SdpProblem):
        self.blocks = problem.blocks
        m = problem.n_constraints
        self.m = m
        coo: list[tuple[list, list, list]] = [([], [], []) for _ in self.blocks]
        for i, c in enumerate(problem.constraints):
            for blk, p, q, val in c.entries:
                n = self.blocks[blk]
                rows, cols, vals = coo[blk]
                rows.append(i)
                cols.append(p * n + q)
                vals.append(val)
                if p != q:
                    rows.append(i)
                    cols.append(q * n + p)
                    vals.append(val)
        self.mats = [
            sparse.csr_matrix((vals, (rows, cols)), shape=(m, n * n))
            for (rows, cols, vals), n in zip(coo, self.blocks)
        ]
        for mat in self.mats:
            mat.sum_duplicates()
            mat.sort_indices()

    def apply(self, X: list[np.ndarray]) -> np.ndarray:
        out = np.zeros(self.m)
        for mat, Xk in zip(self.mats, X):
            out += mat @ Xk.ravel()
        return out

    def adjoint(self, y: np.ndarray) -> list[np.ndarray]:
        return [(mat.T @ y).reshape(n, n) for mat, n in zip(self.mats, self.blocks)]

    def row_norms(self) -> np.ndarray:
        sq = np.zeros(self.m)
        for mat in self.mats:
            sq += np.asarray(mat.multiply(mat).sum(axis=1)).ravel()
        return np.sqrt(sq)

    def schur(self, Zinv: list[np.ndarray], X: list[np.ndarray]) -> np.ndarray:
        """M[i, j] = Tr(S_i Z⁻¹ S_j X), montado em fatias de linhas."""
        M = np.zeros((self.m, self.m))
        for mat, Zi, Xk, n in zip(self.mats, Zinv, X, self.blocks):
            if mat.nnz == 0:
                continue
            coo = mat.tocoo()
            order = np.lexsort((coo.col, coo.row))
            rows, cols, vals = coo.row[order], coo.col[order], coo.data[order]
            p_idx, q_idx = np.divmod(cols, n)
            budget = max(1, _SCHUR_CHUNK // (n * n))
            start = 0
            while start < len(rows):
                stop = min(len(rows), start + budget)
                # não corta uma linha ao meio
                while stop < len(rows) and rows[stop] == rows[stop - 1]:
                    stop += 1
                r0, r1 = rows[start], rows[stop - 1] + 1
                ne = stop - start
                left = Zi[:, p_idx[start:stop]].T * vals[start:stop, None]
                right = Xk[q_idx[start:stop], :]
                outer = np.einsum("ea,eb->eab", left, right).reshape(ne, n * n)
                gather = sparse.csr_matrix(
                    (np.ones(ne), (rows[start:stop] - r0, np.arange(ne))), shape=(r1 - r0, ne)
                )
                G = gather @ outer
                M[:, r0:r1] += mat @ G.T
                start = stop
        return 0.5 * (M + M.T)


# ---------------------------------------------------------------------------
# Álgebra auxiliar
# ---------------------------------------------------------------------------

def _inner(A: list[np.ndarray], B: list[np.ndarray]) -> float:
    return float(sum(np.vdot(a, b) for a, b in zip(A, B)))


def _fro(A: list[np.ndarray]) -> float:
    return float(np.sqrt(sum(np.vdot(a, a) for a in A)))


def _sym(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.T)


def _inverse_pd(A: np.ndarray) -> np.ndarray:
    c = sla.cho_factor(A, lower=True)
    return _sym(sla.cho_solve(c, np.eye(A.shape[0])))


def _max_step(X: np.ndarray, dX: np.ndarray) -> float:
    """Maior α com X + α dX ⪰ 0."""
    try:
        L = sla.cholesky(X, lower=True)
    except sla.LinAlgError:
        return 0.0
    W = sla.solve_triangular(L, dX, lower=True)
    W = sla.solve_triangular(L, W.T, lower=True)
    lam = sla.eigvalsh(_sym(W), subset_by_index=[0, 0])[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _schur_solver(M: np.ndarray):
    try:
        c = sla.cho_factor(M, lower=True)
        return lambda rhs: sla.cho_solve(c, rhs)
    except sla.LinAlgError:
        pass
    reg = 1e-13 * max(1.0, float(np.max(np.abs(np.diag(M)))))
    try:
        c = sla.cho_factor(M + reg * np.eye(M.shape[0]), lower=True)
        logger.debug("[solve_sdp] Schur regularizado com %.1e", reg)
        return lambda rhs: sla.cho_solve(c, rhs)
    except sla.LinAlgError:
        logger.debug("[solve_sdp] Schur singular, usando lstsq")
        return lambda rhs: sla.lstsq(M, rhs)[0]


# ---------------------------------------------------------------------------
# SDP
# ---------------------------------------------------------------------------

def solve_sdp(
    problem: SdpProblem,
    tol: float = SOLVER_TOL,
    max_iter: int = MAX_ITER,
    infeasibility_tol: float = 1e-8,
) -> SdpSolution:
    """
    Ponto interior primal-dual de início inviável (direção HKM com
    preditor-corretor de Mehrotra). Internamente resolve a forma de minimização
    min ⟨C, X⟩ com C = −G; o dual devolvido é o da forma de maximização:
    min Σ λ_i s_i  s.t.  Σ λ_i S_i − G ⪰ 0.

    Nunca levanta por não convergência: devolve o melhor iterado com status.
    """
    if tol <= 0:
        raise InvalidParameterError(f"tol deve ser > 0 (recebido {tol})")
    if max_iter < 1:
        raise InvalidParameterError(f"max_iter deve ser >= 1 (recebido {max_iter})")

    op = _Operator(problem)
    b = problem.rhs
    C = [-G for G in problem.objective]
    blocks = problem.blocks
    n_tot = sum(blocks)
    m = op.m

    norm_b = float(np.linalg.norm(b))
    norm_C = _fro(C)
    row_norms = op.row_norms() if m else np.zeros(0)

    xi = max(10.0, np.sqrt(n_tot))
    eta = max(10.0, np.sqrt(n_tot), norm_C)
    if m:
        xi = max(xi, n_tot * float(np.max((1.0 + np.abs(b)) / (1.0 + row_norms))))
        eta = max(eta, float(np.max(row_norms)))
    X = [xi * np.eye(n) for n in blocks]
    Z = [eta * np.eye(n) for n in blocks]
    y = np.zeros(m)

    best = None
    status = STATUS_MAX_ITER
    it = 0
    for it in range(1, max_iter + 1):
        rp = b - op.apply(X)
        ATy = op.adjoint(y)
        Rd = [Ck - Zk - Ak for Ck, Zk, Ak in zip(C, Z, ATy)]
        pobj = _inner(C, X)
        dobj = float(b @ y)
        mu = _inner(X, Z) / n_tot
        pinf = float(np.linalg.norm(rp)) / (1.0 + norm_b)
        dinf = _fro(Rd) / (1.0 + norm_C)
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))

        merit = max(pinf, dinf, gap)
        if best is None or merit < best[0]:
            best = (merit, [x.copy() for x in X], y.copy(), [z.copy() for z in Z], pobj, dobj, gap, pinf, dinf)

        logger.debug(
            "[solve_sdp] iter %3d pobj=% .10e dobj=% .10e gap=%.2e pinf=%.2e dinf=%.2e mu=%.2e",
            it, -pobj, -dobj, gap, pinf, dinf, mu,
        )
        if merit <= tol:
            status = STATUS_OPTIMAL
            break

        # certificados de inviabilidade (forma de minimização)
        if dobj > 0 and _fro([Ck - Rk for Ck, Rk in zip(C, Rd)]) / dobj < infeasibility_tol:
            status = STATUS_INFEASIBLE
            logger.info("[solve_sdp] primal inviável detectado na iteração %d", it)
            break
        if pobj < 0 and float(np.linalg.norm(b - rp)) / -pobj < infeasibility_tol:
            status = STATUS_INFEASIBLE
            logger.info("[solve_sdp] dual inviável (primal ilimitado) detectado na iteração %d", it)
            break

        try:
            Zinv = [_inverse_pd(Zk) for Zk in Z]
        except sla.LinAlgError:
            logger.warning("[solve_sdp] Z perdeu definição positiva na iteração %d", it)
            break

        solve = _schur_solver(op.schur(Zinv, X)) if m else (lambda rhs: rhs)
        ZRdX = [Zi @ Rk @ Xk for Zi, Rk, Xk in zip(Zinv, Rd, X)]
        A_ZRdX = op.apply(ZRdX)

        # preditor (σ = 0)
        dy = solve(b + A_ZRdX)
        ATdy = op.adjoint(dy)
        dZ_a = [Rk - Ak for Rk, Ak in zip(Rd, ATdy)]
        dX_a = [_sym(-Xk - Zi @ dZk @ Xk) for Xk, Zi, dZk in zip(X, Zinv, dZ_a)]
        ap = min(1.0, min(_max_step(Xk, dk) for Xk, dk in zip(X, dX_a)))
        ad = min(1.0, min(_max_step(Zk, dk) for Zk, dk in zip(Z, dZ_a)))
        mu_aff = _inner(
            [Xk + ap * dk for Xk, dk in zip(X, dX_a)],
            [Zk + ad * dk for Zk, dk in zip(Z, dZ_a)],
        ) / n_tot
        sigma = float(np.clip((mu_aff / mu) ** 3, 0.0, 1.0)) if mu > 0 else 0.0

        # corretor
        corr = [Zi @ dZk @ dXk for Zi, dZk, dXk in zip(Zinv, dZ_a, dX_a)]
        rhs = b - sigma * mu * op.apply(Zinv) + A_ZRdX + op.apply(corr)
        dy = solve(rhs)
        ATdy = op.adjoint(dy)
        dZ = [Rk - Ak for Rk, Ak in zip(Rd, ATdy)]
        dX = [
            _sym(sigma * mu * Zi - Xk - Zi @ dZk @ Xk - ck)
            for Zi, Xk, dZk, ck in zip(Zinv, X, dZ, corr)
        ]

        step_frac = 0.9 + 0.09 * min(ap, ad)
        ap = min(1.0, step_frac * min(_max_step(Xk, dk) for Xk, dk in zip(X, dX)))
        ad = min(1.0, step_frac * min(_max_step(Zk, dk) for Zk, dk in zip(Z, dZ)))
        if ap < 1e-12 and ad < 1e-12:
            logger.warning("[solve_sdp] passo nulo na iteração %d, parando", it)
            break

        X = [_sym(Xk + ap * dk) for Xk, dk in zip(X, dX)]
        Z = [_sym(Zk + ad * dk) for Zk, dk in zip(Z, dZ)]
        y = y + ad * dy

    if status == STATUS_INFEASIBLE:
        chosen = (None, X, y, Z, _inner(C, X), float(b @ y), gap, pinf, dinf)
    else:
        chosen = best
    _, Xb, yb, Zb, pobj, dobj, gap, pinf, dinf = chosen

    sol = SdpSolution(
        primal=Xb,
        dual=-yb,
        slack=Zb,
        primal_value=-pobj,
        dual_value=-dobj,
        gap=gap,
        status=status,
        iterations=it,
        primal_infeasibility=pinf,
        dual_infeasibility=dinf,
    )
    logger.info(
        "[solve_sdp] %s em %d iterações: valor=%.10g gap=%.2e (dim=%d, m=%d)",
        status, it, sol.primal_value, gap, n_tot, m,
    )
    return sol


# ---------------------------------------------------------------------------
# LP
# ---------------------------------------------------------------------------

def solve_lp(problem: LpProblem, tol: float = 1e-9) -> LpResult:
    """Maximiza via HiGHS (scipy.optimize.linprog). Status: optimal, infeasible, unbounded, failed."""
    if tol <= 0:
        raise InvalidParameterError(f"tol deve ser > 0 (recebido {tol})")
    n = problem.c.shape[0]
    upper = problem.upper if problem.upper is not None else np.full(n, np.inf)
    bounds = [(0.0, None if np.isinf(u) else float(u)) for u in upper]
    res = linprog(
        -problem.c,
        A_ub=problem.a_ub,
        b_ub=problem.b_ub,
        A_eq=problem.a_eq,
        b_eq=problem.b_eq,
        bounds=bounds,
        method="highs",
        options={"primal_feasibility_tolerance": tol, "dual_feasibility_tolerance": tol},
    )
    status = {0: "optimal", 2: "infeasible", 3: "unbounded"}.get(res.status, "failed")
    if status != "optimal":
        logger.warning("[solve_lp] linprog terminou com %s: %s", status, res.message)
        return LpResult(np.nan, np.full(n, np.nan), status)
    return LpResult(float(-res.fun), np.asarray(res.x, dtype=float), status)


# ---------------------------------------------------------------------------
# Fatoração PSD
# ---------------------------------------------------------------------------

def psd_factor(X: np.ndarray, rank_tol: float = 1e-9) -> np.ndarray:
    """
    Vetores u_v (linhas) com ⟨u_v, u_w⟩ ≈ X_vw. Autovalores em [−rank_tol, rank_tol]
    são descartados; abaixo de −rank_tol a matriz não é PSD.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise InvalidParameterError(f"Matriz quadrada esperada, recebida forma {X.shape}")
    if not np.allclose(X, X.T, atol=max(rank_tol, 1e-12)):
        raise InvalidParameterError("Matriz não simétrica")
    w, V = np.linalg.eigh(_sym(X))
    if w.size and w[0] < -rank_tol:
        raise NotPsdError(f"Autovalor mínimo {w[0]:.3e} < -{rank_tol:.1e}")
    keep = w > rank_tol
    return V[:, keep] * np.sqrt(w[keep])
