"""AC power flow and the operating-safety predicate.

Newton-Raphson in polar form with PV-to-PQ switching on generator
reactive limits.  Loads are constant power; the slack bus absorbs the
system imbalance.  Networks small enough for dense linear algebra are
solved densely, larger ones through scipy.sparse.

A solved state is "safe" when the solver converged, no in-service branch
is loaded above 100 percent of its MVA rating, and every energized bus
hosting a load sits inside its voltage band.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .model import Network

# below this bus count the Jacobian is assembled dense
_SPARSE_THRESHOLD = 256


class PowerFlowError(ValueError):
    """The network cannot be solved as posed (structural problem)."""


@dataclass(frozen=True)
class SolverOptions:
    """Newton-Raphson settings.

    ``max_iterations`` bounds each solution attempt; clamping a generator
    to a reactive limit restarts the count from the warm state.  When
    ``flat_start`` is false a caller-provided previous solution seeds the
    iteration instead of the flat profile.
    """

    tolerance: float = 1e-8
    max_iterations: int = 30
    flat_start: bool = True


@dataclass(frozen=True, eq=False)
class PowerFlowSolution:
    """Solved network state.  Arrays are aligned with ``bus_ids`` and
    ``line_ids``; de-energized buses carry zero magnitude and flows."""

    converged: bool
    iterations: int
    max_mismatch: float
    bus_ids: tuple[int, ...]
    v_mag: np.ndarray
    v_ang: np.ndarray
    energized: np.ndarray
    line_ids: tuple[int, ...]
    s_from_mva: np.ndarray
    s_to_mva: np.ndarray
    line_loading_pct: np.ndarray
    slack_p_mw: float
    slack_q_mvar: float

    def voltage(self, bus_id: int) -> complex:
        i = self.bus_ids.index(bus_id)
        return complex(self.v_mag[i] * np.exp(1j * self.v_ang[i]))


@dataclass(frozen=True, eq=False)
class SafetyReport:
    """Outcome of the safety predicate for one network state."""

    safe: bool
    converged: bool
    line_violations: tuple[tuple[int, float], ...]
    voltage_violations: tuple[tuple[int, float], ...]
    worst_line_loading: float
    v_extremes: tuple[float, float] | None
    solution: PowerFlowSolution


@dataclass(frozen=True, eq=False)
class AdmittanceMatrix:
    """Sparse complex bus admittance matrix, rows/cols in ``bus_ids`` order."""

    bus_ids: tuple[int, ...]
    y: sp.csr_matrix

    @property
    def n(self) -> int:
        return len(self.bus_ids)

    def toarray(self) -> np.ndarray:
        return self.y.toarray()


def _branch_admittances(net: Network):
    """Per-branch pi-model admittances; zero for out-of-service branches."""
    nl = len(net.lines)
    ys = np.zeros(nl, dtype=complex)
    bc = np.zeros(nl, dtype=complex)
    status = np.zeros(nl)
    for i, ln in enumerate(net.lines):
        if not ln.in_service:
            continue
        ys[i] = 1.0 / complex(ln.r, ln.x)
        bc[i] = 0.5j * ln.b
        status[i] = 1.0
    yff = ys + bc
    ytt = ys + bc
    yft = -ys
    ytf = -ys
    return yff, yft, ytf, ytt, status


def build_ybus(net: Network) -> AdmittanceMatrix:
    """Assemble the bus admittance matrix from in-service branches and
    fixed shunts (shunt MW/MVAr are taken at 1 pu voltage)."""
    n = len(net.buses)
    pos = net.bus_index
    yff, yft, ytf, ytt, _ = _branch_admittances(net)
    f = np.array([pos[ln.from_bus] for ln in net.lines], dtype=int)
    t = np.array([pos[ln.to_bus] for ln in net.lines], dtype=int)
    ysh = np.zeros(n, dtype=complex)
    for s in net.shunts:
        ysh[pos[s.bus]] += complex(s.g_mw, s.b_mvar) / net.base_mva
    nl = len(net.lines)
    rows = np.concatenate([f, f, t, t, np.arange(n)])
    cols = np.concatenate([f, t, f, t, np.arange(n)])
    data = np.concatenate([yff, yft, ytf, ytt, ysh])
    y = sp.csr_matrix((data, (rows, cols)), shape=(n, n)) if nl or n else None
    return AdmittanceMatrix(bus_ids=tuple(b.id for b in net.buses), y=y)


@dataclass
class _RawSolution:
    converged: bool
    V: np.ndarray
    iterations: int
    max_mismatch: float


class CompiledCase:
    """Per-network solver state reused across many load scalings.

    Building the admittance matrix, bus classification and generator
    aggregates once makes repeated chromosome evaluations cheap; the
    results are bit-identical to solving the equivalently scaled network
    from scratch.
    """

    def __init__(self, net: Network, options: SolverOptions | None = None):
        self.net = net
        self.options = options or SolverOptions()
        self.base = net.base_mva
        n = len(net.buses)
        self.n = n
        pos = net.bus_index

        live_ids = net.energized_buses()
        self.live_mask = np.array([b.id in live_ids for b in net.buses])
        self.live_pos = np.flatnonzero(self.live_mask)
        self.n_live = len(self.live_pos)

        ybus = build_ybus(net)
        self.dense = n < _SPARSE_THRESHOLD
        y_live = ybus.y[self.live_pos][:, self.live_pos]
        self.y_live = y_live.toarray() if self.dense else y_live.tocsr()
        self.ybus = ybus

        # branch arrays for flow recovery on the full bus set
        self.f_pos = np.array([pos[l.from_bus] for l in net.lines], dtype=int)
        self.t_pos = np.array([pos[l.to_bus] for l in net.lines], dtype=int)
        self.yff, self.yft, self.ytf, self.ytt, self.line_status = (
            _branch_admittances(net)
        )
        self.ratings = np.array([l.rating_mva for l in net.lines])
        self.line_ids = tuple(l.id for l in net.lines)

        # generators: fixed P, aggregated reactive limits, first setpoint
        p_gen = np.zeros(n)
        q_min = np.zeros(n)
        q_max = np.zeros(n)
        has_gen = np.zeros(n, dtype=bool)
        v_set = np.full(n, np.nan)
        for g in net.generators:
            if not g.in_service:
                continue
            p = pos[g.bus]
            if not self.live_mask[p]:
                continue
            p_gen[p] += g.p_mw
            q_min[p] += g.q_min_mvar
            q_max[p] += g.q_max_mvar
            if not has_gen[p]:
                v_set[p] = g.v_setpoint
            has_gen[p] = True
        self.p_gen_pu = p_gen / self.base
        self.q_min_pu = q_min / self.base
        self.q_max_pu = q_max / self.base
        self.has_gen = has_gen

        # reduced-numbering bus classes; pv demotes to pq without a source
        red_of = np.full(n, -1, dtype=int)
        red_of[self.live_pos] = np.arange(self.n_live)
        self.red_of = red_of
        ref = pv = None
        pv_list = []
        pq_list = []
        vm0 = np.ones(self.n_live)
        for p in self.live_pos:
            bus = net.buses[p]
            r = red_of[p]
            if bus.kind == "slack":
                ref = r
                vm0[r] = _setpoint(bus, v_set[p])
            elif bus.kind == "pv" and has_gen[p]:
                pv_list.append(r)
                vm0[r] = _setpoint(bus, v_set[p])
            else:
                pq_list.append(r)
        if ref is None:
            raise PowerFlowError("slack bus is not energized")
        self.ref = ref
        self.pv0 = np.array(pv_list, dtype=int)
        self.pq0 = np.array(pq_list, dtype=int)
        self.vm0 = vm0

        # loads: gene order equals id order equals document order
        self.load_pos = np.array([pos[ld.bus] for ld in net.loads], dtype=int)
        self.p_load_base = np.array([ld.p_mw for ld in net.loads])
        self.q_load_base = np.array([ld.q_mvar for ld in net.loads])
        host = sorted({p for p in self.load_pos if self.live_mask[p]})
        self.host_pos = np.array(host, dtype=int)
        self.host_vmin = np.array([net.buses[p].v_min for p in host])
        self.host_vmax = np.array([net.buses[p].v_max for p in host])
        self.dead_load_idx = np.flatnonzero(~self.live_mask[self.load_pos])

    # -- load assembly -------------------------------------------------

    def load_s_mva(self, genes=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-bus complex load in MVA plus the per-load scaled P and Q."""
        if genes is None:
            p = self.p_load_base.copy()
            q = self.q_load_base.copy()
        else:
            genes = np.asarray(genes, dtype=float)
            if genes.shape != self.p_load_base.shape:
                raise ValueError(
                    f"expected {len(self.p_load_base)} gene values, got {genes.shape}"
                )
            p = self.p_load_base * genes
            q = self.q_load_base * genes
        bus_p = np.zeros(self.n)
        bus_q = np.zeros(self.n)
        np.add.at(bus_p, self.load_pos, p)
        np.add.at(bus_q, self.load_pos, q)
        return bus_p + 1j * bus_q, p, q

    # -- solving ---------------------------------------------------------

    def solve(self, genes=None, warm: PowerFlowSolution | None = None):
        """Solve the case (optionally with per-load scale factors applied)
        and return ``(solution, scaled per-load P, scaled per-load Q)``."""
        s_load, p, q = self.load_s_mva(genes)
        for i in self.dead_load_idx:
            if p[i] != 0.0 or q[i] != 0.0:
                ld = self.net.loads[i]
                raise PowerFlowError(
                    f"load {ld.id} at bus {ld.bus} is de-energized but has demand"
                )
        raw = self._solve_raw(s_load, warm)
        return self._make_solution(raw, s_load), p, q

    def _solve_raw(self, s_load_mva: np.ndarray, warm=None) -> _RawSolution:
        opts = self.options
        s_load = s_load_mva[self.live_pos] / self.base
        sbus = self.p_gen_pu[self.live_pos] + 0j - s_load

        if warm is not None and not opts.flat_start:
            vm = warm.v_mag[self.live_pos].copy()
            va = warm.v_ang[self.live_pos].copy()
            vm[vm == 0.0] = 1.0
        else:
            vm = self.vm0.copy()
            va = np.zeros(self.n_live)
        V = vm * np.exp(1j * va)

        pv = self.pv0.copy()
        pq = self.pq0.copy()
        total_iters = 0
        raw = _RawSolution(False, V, 0, np.inf)
        # each pass may clamp generators to a reactive limit; a bus is
        # switched at most once per solve
        for _ in range(len(self.pv0) + 1):
            conv, V, iters, mism = _newton(
                self.y_live, V, sbus, pv, pq, opts.tolerance, opts.max_iterations
            )
            total_iters += iters
            raw = _RawSolution(conv, V, total_iters, mism)
            if not conv or len(pv) == 0:
                break
            q_inj = (V * np.conj(_matvec(self.y_live, V))).imag
            q_gen = q_inj[pv] + s_load[pv].imag
            lo = self.q_min_pu[self.live_pos][pv]
            hi = self.q_max_pu[self.live_pos][pv]
            over = q_gen > hi
            under = q_gen < lo
            if not (over.any() or under.any()):
                break
            clamped = np.where(over, hi, np.where(under, lo, q_gen))
            switching = over | under
            for r, qv in zip(pv[switching], clamped[switching]):
                sbus[r] = self.p_gen_pu[self.live_pos][r] + 1j * qv - s_load[r]
            pq = np.sort(np.concatenate([pq, pv[switching]]))
            pv = pv[~switching]
        return raw

    def _make_solution(self, raw: _RawSolution, s_load_mva) -> PowerFlowSolution:
        v_full = np.zeros(self.n, dtype=complex)
        v_full[self.live_pos] = raw.V
        vf = v_full[self.f_pos]
        vt = v_full[self.t_pos]
        s_from = vf * np.conj(self.yff * vf + self.yft * vt) * self.base
        s_to = vt * np.conj(self.ytf * vf + self.ytt * vt) * self.base
        with np.errstate(invalid="ignore"):
            loading = (
                100.0
                * np.maximum(np.abs(s_from), np.abs(s_to))
                / self.ratings
                * self.line_status
            )
        s_inj = raw.V * np.conj(_matvec(self.y_live, raw.V))
        s_slack = s_inj[self.ref] * self.base + s_load_mva[self.live_pos[self.ref]]
        return PowerFlowSolution(
            converged=raw.converged,
            iterations=raw.iterations,
            max_mismatch=float(raw.max_mismatch),
            bus_ids=tuple(b.id for b in self.net.buses),
            v_mag=np.abs(v_full),
            v_ang=np.where(self.live_mask, np.angle(v_full), 0.0),
            energized=self.live_mask.copy(),
            line_ids=self.line_ids,
            s_from_mva=s_from,
            s_to_mva=s_to,
            line_loading_pct=loading,
            slack_p_mw=float(s_slack.real),
            slack_q_mvar=float(s_slack.imag),
        )

    # -- safety ----------------------------------------------------------

    def assess(self, solution: PowerFlowSolution) -> SafetyReport:
        """Apply the safety predicate to a solved state of this case."""
        in_service = self.line_status > 0
        loading = solution.line_loading_pct
        line_viol = [
            (self.line_ids[i], float(loading[i]))
            for i in np.flatnonzero(in_service & (loading > 100.0))
        ]
        vm = solution.v_mag[self.host_pos]
        bad = (vm < self.host_vmin) | (vm > self.host_vmax)
        volt_viol = [
            (self.net.buses[self.host_pos[i]].id, float(vm[i]))
            for i in np.flatnonzero(bad)
        ]
        worst = float(loading[in_service].max()) if in_service.any() else 0.0
        extremes = (float(vm.min()), float(vm.max())) if len(vm) else None
        safe = solution.converged and not line_viol and not volt_viol
        return SafetyReport(
            safe=safe,
            converged=solution.converged,
            line_violations=tuple(line_viol),
            voltage_violations=tuple(volt_viol),
            worst_line_loading=worst,
            v_extremes=extremes,
            solution=solution,
        )


def _setpoint(bus, gen_setpoint: float) -> float:
    if not np.isnan(gen_setpoint):
        return gen_setpoint
    if bus.v_setpoint is not None:
        return bus.v_setpoint
    return 1.0


def _matvec(y, v):
    return y @ v


def _newton(Y, V, sbus, pv, pq, tol, max_it):
    """Newton-Raphson in polar coordinates.  Returns (converged, V,
    iterations, max mismatch)."""
    pvpq = np.concatenate([pv, pq])
    npv = len(pv)
    npq = len(pq)
    vm = np.abs(V)
    va = np.angle(V)

    def mismatch(V):
        mis = V * np.conj(_matvec(Y, V)) - sbus
        return np.concatenate([mis[pvpq].real, mis[pq].imag])

    F = mismatch(V)
    norm = float(np.max(np.abs(F))) if F.size else 0.0
    it = 0
    dense = isinstance(Y, np.ndarray)
    while norm > tol and it < max_it:
        J = _jacobian_dense(Y, V, pvpq, pq) if dense else _jacobian_sparse(
            Y, V, pvpq, pq
        )
        try:
            dx = np.linalg.solve(J, F) if dense else spsolve(J, F)
        except np.linalg.LinAlgError:
            return False, V, it, norm
        if not np.all(np.isfinite(dx)):
            return False, V, it, norm
        va[pvpq] -= dx[: npv + npq]
        vm[pq] -= dx[npv + npq :]
        V = vm * np.exp(1j * va)
        it += 1
        F = mismatch(V)
        norm = float(np.max(np.abs(F))) if F.size else 0.0
        if not np.isfinite(norm):
            return False, V, it, norm
    return norm <= tol, V, it, norm


def _jacobian_dense(Y, V, pvpq, pq):
    Ibus = Y @ V
    vnorm = V / np.abs(V)
    m = Y * V[None, :]
    dS_dVa = -1j * V[:, None] * np.conj(m)
    idx = np.arange(len(V))
    dS_dVa[idx, idx] += 1j * V * np.conj(Ibus)
    dS_dVm = V[:, None] * np.conj(Y * vnorm[None, :])
    dS_dVm[idx, idx] += np.conj(Ibus) * vnorm
    j11 = dS_dVa[np.ix_(pvpq, pvpq)].real
    j12 = dS_dVm[np.ix_(pvpq, pq)].real
    j21 = dS_dVa[np.ix_(pq, pvpq)].imag
    j22 = dS_dVm[np.ix_(pq, pq)].imag
    return np.block([[j11, j12], [j21, j22]])


def _jacobian_sparse(Y, V, pvpq, pq):
    Ibus = Y @ V
    diagV = sp.diags(V)
    diagI = sp.diags(Ibus)
    diagVnorm = sp.diags(V / np.abs(V))
    dS_dVm = diagV @ (Y @ diagVnorm).conjugate() + sp.diags(np.conj(Ibus)) @ diagVnorm
    dS_dVa = 1j * diagV @ (diagI - Y @ diagV).conjugate()
    dS_dVa = dS_dVa.tocsr()
    dS_dVm = dS_dVm.tocsr()
    j11 = dS_dVa[pvpq][:, pvpq].real
    j12 = dS_dVm[pvpq][:, pq].real
    j21 = dS_dVa[pq][:, pvpq].imag
    j22 = dS_dVm[pq][:, pq].imag
    return sp.bmat([[j11, j12], [j21, j22]], format="csc")


def solve(
    net: Network,
    options: SolverOptions | None = None,
    warm: PowerFlowSolution | None = None,
) -> PowerFlowSolution:
    """Solve the AC power flow for a network.

    Non-convergence is reported through ``solution.converged``, not an
    exception.  Structural problems (no energized slack, demand on a
    de-energized bus) raise :class:`PowerFlowError`.
    """
    solution, _, _ = CompiledCase(net, options).solve(warm=warm)
    return solution


def line_loading_percent(solution: PowerFlowSolution, line_id: int) -> float:
    """Loading of one line in percent of its MVA rating (0 when switched
    out or de-energized)."""
    try:
        i = solution.line_ids.index(line_id)
    except ValueError:
        raise ValueError(f"unknown line id {line_id}") from None
    return float(solution.line_loading_pct[i])


def evaluate_safety(
    net: Network, options: SolverOptions | None = None
) -> SafetyReport:
    """Solve the network and apply the safety predicate.

    A non-converged power flow yields ``safe=False`` (with ``converged``
    False); only structural errors raise.
    """
    case = CompiledCase(net, options)
    solution, _, _ = case.solve()
    return case.assess(solution)
