"""Command-line driver: verify, invariant, evolve, spectrum, powerlaw."""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy

from . import algebra, evolution, invariant, oracle, states
from .config import ConfigError, RunConfig
from .errors import DomainError, Su11Error, TruncationError
from .io import complex_columns, write_sidecar, write_table

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


@dataclass
class Check:
    suite: str
    name: str
    measured: float
    threshold: float
    passed: bool
    note: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        note = f"  ({self.note})" if self.note else ""
        return f"{status}  {self.suite:<10} {self.name:<40} {self.measured:.3e} <= {self.threshold:.1e}{note}"


def _check(suite, name, measured, threshold, note=""):
    measured = float(measured)
    return Check(suite, name, measured, threshold, bool(measured <= threshold), note)


def _failed(suite, name, threshold, note):
    return Check(suite, name, float("nan"), threshold, False, note)


def _versions():
    try:
        pkg = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"package": pkg, "numpy": np.__version__, "scipy": scipy.__version__}


def _sidecar(cfg, command, out_path, seed=None, **extra):
    meta = {"command": command, "config": cfg.to_dict(), "seed": seed, "versions": _versions()}
    meta.update(extra)
    return write_sidecar(Path(out_path).with_suffix(".json"), meta)


def _span_times(cfg):
    return np.linspace(cfg.t0, cfg.t1, cfg.samples)


def _g_init(cfg, profile):
    return np.array([1.0, 0.0, cfg.rep_omega(profile) ** 2])


# ---------------------------------------------------------------------------
# verify


def _suite_algebra(cfg, k0):
    out = []
    rep = algebra.build_discrete_series(k0, cfg.truncation)
    out.append(_check("algebra", "structure residual (interior)", algebra.verify_su11_structure(rep, 2), 1e-12))
    cas = algebra.casimir_value(rep)
    out.append(_check("algebra", "Casimir - (8c-3)/16", abs(cas - states.casimir_eigenvalue(cfg.c)), 1e-12))
    coarse, fine = (algebra.build_grid_operators(algebra.RadialGrid(12.0, n), 0.0) for n in (512, 1024))
    r0 = algebra.l_basis_residuals(coarse)["[L+,L-]-iL0"]
    r1 = algebra.l_basis_residuals(fine)["[L+,L-]-iL0"]
    ratio = max(algebra.l_basis_residuals(coarse).values()) / max(algebra.l_basis_residuals(fine).values())
    out.append(_check("algebra", "grid relations: 1/(halving ratio)", 1.0 / ratio, 1 / 3.5,
                      f"[L+,L-] residual {r0:.1e} -> {r1:.1e}"))
    return out


def _suite_invariant(cfg, profile):
    if cfg.t1 == cfg.t0:
        return []
    times = _span_times(cfg)
    g0 = _g_init(cfg, profile)
    tol = cfg.tol_ode
    ode = invariant.integrate_invariant_ode(profile, g0, cfg.t0, cfg.t1, tol, times)
    erm = invariant.invariant_via_ermakov(profile, g0, cfg.t0, cfg.t1, tol, times)
    prop = invariant.invariant_via_propagation(profile, g0, cfg.t0, cfg.t1, tol, times)
    out = [
        _check("invariant", "ODE vs Ermakov", ode.max_deviation(erm), 1e-7),
        _check("invariant", "ODE vs propagation", ode.max_deviation(prop), 1e-7),
        _check("invariant", "Ermakov vs propagation", erm.max_deviation(prop), 1e-7),
        _check("invariant", "g+g- - g0^2 drift", ode.conservation_drift(), 1e-8),
    ]
    if profile.kind == "power_law":
        out.append(_check("invariant", "closed-form ODE residual", _closed_form_residual(profile, cfg), 1e-6))
    return out


def _closed_form_residual(profile, cfg):
    a, w = profile.alpha, profile.omega0
    t = np.linspace(cfg.t0, cfg.t1, 41)[1:-1] if cfg.t1 > cfg.t0 else np.array([cfg.t0 + 0.5])
    h = 1e-4 * np.maximum(t, 1.0)
    c1 = invariant.power_law_c1(w, a, cfg.t0)
    g = invariant.power_law_invariant(w, a, c1, t)
    dg = (invariant.power_law_invariant(w, a, c1, t + h) - invariant.power_law_invariant(w, a, c1, t - h)) / (2 * h)
    w2 = profile.omega_sq(t)
    rhs = np.array([-2 * g[1], w2 * g[0] - g[2], 2 * w2 * g[1]])
    return float(np.max(np.abs(dg - rhs) / np.maximum(1.0, np.abs(g).max(axis=0))))


def _suite_evolution(cfg, profile, k0):
    if cfg.t1 == cfg.t0:
        return []
    w0 = cfg.rep_omega(profile)
    N = cfg.truncation
    m = max(2, N // 8)
    rep = algebra.build_discrete_series(k0, N)
    wn = evolution.integrate_wei_norman_K(profile, cfg.t0, cfg.t1, cfg.tol_ode, w0,
                                          times=[cfg.t0, cfg.t1], allow_direct=True)
    UK = evolution.assemble_U_K(rep, wn, cfg.t1)
    UD = evolution.direct_evolution(rep, profile, w0, cfg.t0, cfg.t1, min(cfg.tol_operator, 1e-8), n_interior=m)
    g = invariant.integrate_invariant_ode(profile, _g_init(cfg, profile), cfg.t0, cfg.t1, cfg.tol_ode,
                                          times=[cfg.t0, cfg.t1]).array[:, -1]
    sc = evolution.squeeze_coefficients(g, w0)
    xi = evolution.squeeze_parameter(sc.u0, sc.uplus)
    return [
        _check("evolution", f"Wei-Norman ({wn.method}) vs direct", evolution.interior_norm(UK - UD, m),
               cfg.tol_operator, f"interior {m}"),
        _check("evolution", "unitarity of assembled U", evolution.unitarity_defect(UK, m), 1e-8),
        _check("evolution", "unitarity of direct U", evolution.unitarity_defect(UD, m), 1e-8),
        _check("squeeze", "S^dag K0 S vs u-expansion", evolution.conjugation_residual(rep, g, w0, m),
               cfg.tol_operator, f"|xi| = {xi.r:.4f}"),
        _check("squeeze", "U K0 U^dag vs S^dag K0 S", evolution.squeeze_duality_residual(rep, UD, xi, m),
               cfg.tol_operator),
    ]


def _suite_spectrum(cfg, k0, k_plus):
    if k0 != k_plus:
        return []
    grid = algebra.RadialGrid(cfg.q_max, cfg.n_points)
    ops = algebra.build_grid_operators(grid, cfg.c)
    w0 = cfg.rep_omega()
    H = ops.hamiltonian(w0**2)
    levels = cfg.levels
    exact = 2 * w0 * (np.arange(levels) + k0)
    evals, _ = algebra.lowest_eigenpairs(H, levels)
    out = [_check("spectrum", f"eigenvalues n<{levels} (relative)", np.max(np.abs(evals - exact) / exact), 1e-5)]
    try:
        res = max(states.eigen_residual(H, states.eigenfunction(n, k0, w0, grid), exact[n])
                  for n in range(levels))
        out.append(_check("spectrum", f"eigenfunction residual n<{levels}", res, 1e-5))
        F = np.array([states.eigenfunction(n, k0, w0, grid) for n in range(min(levels, 6))])
        gram = grid.h * (F @ F.T)
        out.append(_check("spectrum", "orthonormality", np.max(np.abs(gram - np.eye(len(F)))), 1e-8))
    except Su11Error as exc:
        out.append(_failed("spectrum", "eigenfunction residual", 1e-5, str(exc)))
    return out


def _suite_coherent(cfg, k0, rng):
    rep = algebra.build_discrete_series(k0, cfg.truncation)
    zs = [cfg.z_abs * np.exp(1j * cfg.z_phase)]
    zs += list(0.5 * np.sqrt(rng.uniform(0, 1, 2)) * np.exp(2j * np.pi * rng.uniform(0, 1, 2)))
    out = []
    for z in zs:
        tag = f"z={z.real:+.3f}{z.imag:+.3f}i"
        try:
            a = states.barut_girardello_state(rep, z).amplitudes
            out.append(_check("coherent", f"K- eigenstate {tag}", np.max(np.abs((rep.Kminus @ a - z * a)[:-1])), 1e-10))
        except TruncationError as exc:
            out.append(_failed("coherent", f"K- eigenstate {tag}", 1e-10, f"truncation tail: {exc}"))
        if abs(z) < 1:
            try:
                p = states.perelomov_state(rep, z).amplitudes
                S = evolution.squeeze_operator(rep, states.zeta_from_z(z))
                out.append(_check("coherent", f"S(zeta)|0> infidelity {tag}", abs(1 - abs(np.vdot(p, S[:, 0])) ** 2), 1e-8))
            except TruncationError as exc:
                out.append(_failed("coherent", f"S(zeta)|0> {tag}", 1e-8, f"truncation tail: {exc}"))
    return out


def cmd_verify(cfg, seed=None):
    """Run every property suite; returns (exit status, checks)."""
    rng = np.random.default_rng(seed)
    profile = cfg.profile()
    k0 = cfg.bargmann_index()
    k_plus = states.bargmann_indices(cfg.c)[1]
    checks = []
    for suite in (
        lambda: _suite_algebra(cfg, k0),
        lambda: _suite_invariant(cfg, profile),
        lambda: _suite_evolution(cfg, profile, k0),
        lambda: _suite_spectrum(cfg, k0, k_plus),
        lambda: _suite_coherent(cfg, k0, rng),
    ):
        checks.extend(suite())
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    text = "\n".join(c.line() for c in checks)
    n_fail = sum(not c.passed for c in checks)
    summary = f"{len(checks) - n_fail}/{len(checks)} checks passed"
    (out / "verify_report.txt").write_text(text + "\n" + summary + "\n")
    _sidecar(cfg, "verify", out / "verify_report.txt", seed,
             checks=[c.__dict__ for c in checks], summary=summary)
    print(text)
    print(summary)
    return (EXIT_OK if n_fail == 0 else EXIT_FAIL), checks


# ---------------------------------------------------------------------------
# table commands


def cmd_invariant(cfg, seed=None):
    profile = cfg.profile()
    times = _span_times(cfg)
    g0 = _g_init(cfg, profile)
    if cfg.t1 == cfg.t0:
        routes = {name: g0[:, None] * np.ones((1, times.size)) for name in ("ode", "ermakov", "propagation")}
    else:
        routes = {
            "ode": invariant.integrate_invariant_ode(profile, g0, cfg.t0, cfg.t1, cfg.tol_ode, times).array,
            "ermakov": invariant.invariant_via_ermakov(profile, g0, cfg.t0, cfg.t1, cfg.tol_ode, times).array,
            "propagation": invariant.invariant_via_propagation(profile, g0, cfg.t0, cfg.t1, cfg.tol_ode, times).array,
        }
    cols = {"t": times}
    for name, g in routes.items():
        cols.update({f"{name}_gminus": g[0], f"{name}_g0": g[1], f"{name}_gplus": g[2]})
    ode = routes["ode"]
    cols["omega0_sq"] = ode[2] * ode[0] - ode[1] ** 2
    cols["dev_ode_ermakov"] = np.abs(ode - routes["ermakov"]).max(axis=0)
    cols["dev_ode_propagation"] = np.abs(ode - routes["propagation"]).max(axis=0)
    cols["dev_ermakov_propagation"] = np.abs(routes["ermakov"] - routes["propagation"]).max(axis=0)
    path = write_table(Path(cfg.out_dir) / "invariant.csv", cols)
    _sidecar(cfg, "invariant", path, seed, integrator="DOP853", rtol=cfg.tol_ode, atol=cfg.tol_ode)
    return EXIT_OK


def cmd_evolve(cfg, seed=None):
    profile = cfg.profile()
    w0 = cfg.rep_omega(profile)
    k0 = cfg.bargmann_index()
    k_plus = states.bargmann_indices(cfg.c)[1]
    L = cfg.levels
    if 2 * L > cfg.truncation:
        raise ConfigError("evolve levels must be <= N/2")
    times = _span_times(cfg)
    rep = algebra.build_discrete_series(k0, cfg.truncation)
    g_init = _g_init(cfg, profile)
    out = Path(cfg.out_dir)

    if cfg.t1 > cfg.t0:
        fine = np.linspace(cfg.t0, cfg.t1, 20 * (cfg.samples - 1) + 1)
        traj = invariant.integrate_invariant_ode(profile, g_init, cfg.t0, cfg.t1, cfg.tol_ode, fine)
        g = traj.array[:, ::20]
        pf = states.phase_factors(traj, profile, w0)
        wn = evolution.integrate_wei_norman_K(profile, cfg.t0, cfg.t1, cfg.tol_ode, w0, times, allow_direct=True)
        method = wn.method
        U_list = [evolution.assemble_U_K(rep, wn, t) for t in times]
        kp, k0c, km = wn.kplus, wn.k0, wn.kminus
    else:
        g = g_init[:, None] * np.ones((1, times.size))
        pf = None
        method = "trivial"
        U_list = [np.eye(rep.dim, dtype=complex)]
        kp = k0c = km = np.zeros(1, complex)

    xis = []
    for col in g.T:
        sc = evolution.squeeze_coefficients(col, w0)
        xis.append(evolution.squeeze_parameter(sc.u0, sc.uplus).xi)
    xis = np.array(xis)
    pops = np.array([np.abs(U[:L, 0]) ** 2 for U in U_list])
    cols = {"t": times, "xi_abs": np.abs(xis), "xi_arg": np.angle(xis)}
    for n in range(L):
        cols[f"pop_{n}"] = pops[:, n]

    extra = {"wei_norman_method": method}
    if k0 == k_plus:
        grid = algebra.RadialGrid(cfg.q_max, cfg.n_points)
        ops = algebra.build_grid_operators(grid, cfg.c)
        psi0 = states.eigenfunction(0, k0, w0, grid).astype(complex)
        _, snaps = oracle.schrodinger_grid_evolution(ops, profile, psi0, cfg.t0, cfg.t1, cfg.dt, record_times=times)
        grid_pops = np.array([oracle.populations(grid, s, k0, w0, L, tail_tol=1e-3) for s in snaps])
        for n in range(L):
            cols[f"grid_pop_{n}"] = grid_pops[:, n]
        cols["max_pop_dev"] = np.abs(grid_pops - pops).max(axis=1)
        cols["grid_invariant"] = [oracle.invariant_expectation(ops, gc, s) for gc, s in zip(g.T, snaps)]
        n_steps = int(np.ceil(abs(cfg.t1 - cfg.t0) / cfg.dt - 1e-12))
        extra.update(crank_nicolson_steps=n_steps, grid_points=cfg.n_points)
    path = write_table(out / "evolve.csv", cols)
    _sidecar(cfg, "evolve", path, seed, **extra)

    if cfg.t1 > cfg.t0:
        wcols = {"t": times}
        wcols.update(complex_columns("kplus", kp))
        wcols.update(complex_columns("k0", k0c))
        wcols.update(complex_columns("kminus", km))
        path = write_table(out / "wei_norman.csv", wcols)
        _sidecar(cfg, "evolve", path, seed, **extra)
        pcols = {"t": pf.times[::20], "h": pf.h[::20], "eps": pf.eps[::20]}
        for n in range(L):
            pcols[f"phase_{n}"] = pf.phase(n, k0)[::20]
        path = write_table(out / "phases.csv", pcols)
        _sidecar(cfg, "evolve", path, seed, quadrature="trapezoid", quadrature_points=pf.times.size)
    return EXIT_OK


def cmd_spectrum(cfg, seed=None):
    k0 = cfg.bargmann_index()
    k_plus = states.bargmann_indices(cfg.c)[1]
    w0 = cfg.rep_omega()
    L = cfg.levels
    grid = algebra.RadialGrid(cfg.q_max, cfg.n_points)
    n = np.arange(L)
    exact = 2 * w0 * (n + k0)
    if k0 == k_plus:
        ops = algebra.build_grid_operators(grid, cfg.c)
        E_grid, _ = algebra.lowest_eigenpairs(ops.hamiltonian(w0**2), L)
    else:
        # the Dirichlet grid only carries the plus branch
        E_grid = np.full(L, np.nan)
    out = Path(cfg.out_dir)
    path = write_table(out / "spectrum.csv", {"n": n, "E_exact": exact, "E_grid": E_grid,
                                             "rel_dev": np.abs(E_grid - exact) / exact})
    _sidecar(cfg, "spectrum", path, seed)
    stride = max(1, grid.n_points // 2000)
    cols = {"q": grid.q[::stride]}
    for j in range(L):
        cols[f"phi_{j}"] = states.eigenfunction(j, k0, w0, grid)[::stride]
    path = write_table(out / "eigenfunctions.csv", cols)
    _sidecar(cfg, "spectrum", path, seed, stride=stride)
    return EXIT_OK


def cmd_powerlaw(cfg, seed=None):
    profile = cfg.profile()
    if profile.kind != "power_law":
        raise ConfigError("powerlaw needs [profile] kind = power_law")
    w, a = profile.omega0, profile.alpha
    times = _span_times(cfg)
    c1 = invariant.power_law_c1(w, a, cfg.t0)
    closed = invariant.power_law_invariant(w, a, c1, times)
    cols = {"t": times, "closed_gminus": closed[0], "closed_g0": closed[1], "closed_gplus": closed[2]}
    if cfg.t1 > cfg.t0:
        ode = invariant.integrate_invariant_ode(profile, closed[:, 0], cfg.t0, cfg.t1, cfg.tol_ode, times).array
    else:
        ode = closed.copy()
    cols.update({"ode_gminus": ode[0], "ode_g0": ode[1], "ode_gplus": ode[2]})
    cols["dev"] = np.abs(ode - closed).max(axis=0)
    cols["omega0_sq"] = closed[2] * closed[0] - closed[1] ** 2
    path = write_table(Path(cfg.out_dir) / "powerlaw.csv", cols)
    _sidecar(cfg, "powerlaw", path, seed, c1=c1, residual=_closed_form_residual(profile, cfg))
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


COMMANDS = {
    "verify": lambda cfg, seed: cmd_verify(cfg, seed)[0],
    "invariant": cmd_invariant,
    "evolve": cmd_evolve,
    "spectrum": cmd_spectrum,
    "powerlaw": cmd_powerlaw,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="su11osc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "verify": "run the property suites and write a pass/fail report",
        "invariant": "invariant coefficients from every route, with deviations",
        "evolve": "populations, squeeze parameter, phases and grid oracle",
        "spectrum": "energies and radial eigenfunctions",
        "powerlaw": "Bessel-function invariant for omega^2 = omega0^2 t^alpha",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", metavar="PATH", help="INI run configuration")
        p.add_argument("--out", metavar="DIR", help="output directory (overrides the config)")
        p.add_argument("--tol", type=float, metavar="X", help="ODE tolerance (overrides the config)")
        p.add_argument("--seed", type=int, help="seed for randomised test instances")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config) if args.config else RunConfig()
        changes = {}
        if args.out is not None:
            changes["out_dir"] = args.out
        if args.tol is not None:
            changes["tol_ode"] = args.tol
        cfg = cfg.replace(**changes).validate()
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Su11Error as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
