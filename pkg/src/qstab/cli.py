"""Command-line front end.

Exit codes: 0 affirmative result, 2 analysis ran but was inconclusive or
infeasible, 1 error.
"""
import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .certificates import PGrid, certify
from .errors import ConfigError, QstabError
from .frequency import FrequencyGrid
from .model import DoubledMatrix, build_realization, frequency_response, kerr_plant
from .popov import check_popov, popov_plot, search_theta
from .smallgain import Verdict, check_small_gain, spectral_abscissa
from . import io as qio

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2
DEFAULT_OUT = "qstab_out"


def _threads():
    raw = os.environ.get("QSTAB_THREADS")
    if raw is None or raw == "":
        return min(8, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError("QSTAB_THREADS", f"expected a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("QSTAB_THREADS", f"expected a positive integer, got {raw!r}")
    return n


def _outdir(args, cfg=None):
    out = args.out or (cfg.output if cfg is not None else None) or DEFAULT_OUT
    os.makedirs(out, exist_ok=True)
    return out


def _load(args):
    if not args.config:
        raise ConfigError("--config", "a configuration file is required for this command")
    return qio.load_config(args.config)


def _figures(args):
    return not args.no_figures


def _grid(cfg):
    return FrequencyGrid(per_decade=cfg.popov.per_decade)


def cmd_smallgain(args):
    cfg = _load(args)
    out = _outdir(args, cfg)
    report = check_small_gain(cfg.plant, cfg.bounds)
    qio.write_json(os.path.join(out, "smallgain.json"), report.to_dict())
    if _figures(args) and report.hurwitz:
        from .plotting import plot_gain

        ss = build_realization(cfg.plant)
        omega = FrequencyGrid(per_decade=100).positive(abs(spectral_abscissa(ss.F)))
        plot_gain(omega, np.abs(frequency_response(ss, omega)), cfg.bounds.gamma,
                  os.path.join(out, "smallgain_gain.png"))
    print(f"smallgain: {report.verdict.value} (hinf={report.hinf}, gamma={report.gamma})")
    return EXIT_OK if report.verdict is Verdict.STABLE else EXIT_INCONCLUSIVE


def _parse_kappas(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError("--sweep-kappa", f"expected comma-separated numbers, got {text!r}") from None
    if not vals or any(not v > 0 for v in vals):
        raise ConfigError("--sweep-kappa", "values must be positive")
    return vals


def cmd_popov(args):
    cfg = _load(args)
    out = _outdir(args, cfg)
    grid = _grid(cfg)
    kw = dict(theta_max=cfg.popov.theta_max, steps=cfg.popov.theta_steps, grid=grid)
    if args.sweep_kappa:
        kappas = _parse_kappas(args.sweep_kappa)
        with ThreadPoolExecutor(max_workers=_threads()) as pool:
            reports = list(pool.map(lambda k: check_popov(kerr_plant(k), cfg.bounds, **kw), kappas))
        rows = [dict(kappa=k, **r.to_dict()) for k, r in zip(kappas, reports)]
        qio.write_json(os.path.join(out, "popov_sweep.json"), {"reports": rows})
        for row in rows:
            print(f"popov: kappa={row['kappa']:g} theta={row['theta']} margin={row['margin']} {row['verdict']}")
        stable = all(r.verdict is Verdict.STABLE for r in reports)
        return EXIT_OK if stable else EXIT_INCONCLUSIVE
    report = check_popov(cfg.plant, cfg.bounds, **kw)
    doc = report.to_dict()
    if report.hurwitz:
        ss = build_realization(cfg.plant)
        data = popov_plot(ss, report.theta, cfg.bounds.gamma, grid)
        plot_min = float(np.min(data.margins()))
        doc["plot_margin_min"] = plot_min
        doc["plot_consistent"] = bool(report.margin <= plot_min + 1e-12 * (1.0 + abs(plot_min)))
        doc["line"] = {"slope": None if data.vertical else data.slope, "x_intercept": data.x_intercept,
                       "vertical": data.vertical}
        qio.write_csv(os.path.join(out, "popov_plot.csv"), ("omega", "re_G", "omega_im_G"),
                      np.column_stack([data.omega, data.x, data.y]))
        if _figures(args):
            from .plotting import plot_popov

            plot_popov(data, os.path.join(out, "popov_plot.png"))
    qio.write_json(os.path.join(out, "popov.json"), doc)
    print(f"popov: {report.verdict.value} (theta={report.theta}, margin={report.margin})")
    return EXIT_OK if report.verdict is Verdict.STABLE else EXIT_INCONCLUSIVE


def cmd_certify(args):
    cfg = _load(args)
    out = _outdir(args, cfg)
    if cfg.plant.n != 1:
        raise QstabError("certify supports single-mode plants only (unsupported dimension)")
    opts = cfg.certify
    theta = opts.theta
    if theta is None:
        theta, _ = search_theta(build_realization(cfg.plant), cfg.bounds.gamma,
                                cfg.popov.theta_max, cfg.popov.theta_steps, _grid(cfg))
    grid = PGrid(p1_lo=opts.p1_lo, p1_hi=opts.p1_hi, p1_steps=opts.p1_steps,
                 ratio_max=opts.ratio_max, ratio_steps=opts.ratio_steps)
    cert = certify(cfg.plant, theta, cfg.bounds, grid, opts.convention)
    path = os.path.join(out, "certificate.json")
    if cert is None:
        qio.write_json(path, {"feasible": False, "reason": "no feasible P on grid", "theta": theta,
                              "gamma": cfg.bounds.gamma, "convention": opts.convention})
        print("certify: no feasible P on grid")
        return EXIT_INCONCLUSIVE
    doc = cert.to_dict()
    doc["feasible"] = True
    qio.write_json(path, doc)
    print(f"certify: feasible (lmi_max_eig={cert.lmi_max_eig:.6g}, c1={cert.c1:.6g}, "
          f"c2={cert.c2:.6g}, c3={cert.c3:.6g})")
    return EXIT_OK


def cmd_verify(args):
    from .focklab.conditions import check_membership
    from .focklab.lemmas import random_instance, verify_expansion_identities, verify_lemma_constants
    from .focklab.operators import build_z, pure_kerr, saturated_kerr

    cfg = _load(args)
    out = _outdir(args, cfg)
    opts = cfg.verify
    if cfg.plant.n != 1:
        raise QstabError("verify supports single-mode plants only (unsupported dimension)")
    P = DoubledMatrix.scalar(opts.P[0], opts.P[1])
    tables = {"pure_kerr": pure_kerr(), "saturated_kerr": saturated_kerr(opts.saturation, opts.order)}
    lemmas = {"constants": verify_lemma_constants(cfg.plant, P, opts.dim).to_dict(), "expansions": {}}
    worst = lemmas["constants"]["max_residual"]
    for name, table in tables.items():
        rep = verify_expansion_identities(table, cfg.plant, P, opts.theta, opts.dim).to_dict()
        lemmas["expansions"][name] = rep
        worst = max(worst, rep["max_residual"])
    rng = np.random.default_rng(args.seed)
    randoms = []
    for _ in range(opts.random_instances):
        plant, Pr, table = random_instance(rng)
        theta = float(rng.uniform(0.0, 2.0))
        a = verify_lemma_constants(plant, Pr, opts.dim).max_residual
        b = verify_expansion_identities(table, plant, Pr, theta, opts.dim).max_residual
        randoms.append({"constants": a, "expansions": b})
        worst = max(worst, a, b)
    lemmas["random"] = {"seed": args.seed, "instances": randoms}
    lemmas["max_residual"] = worst
    tol = 1e-8
    lemmas["passed"] = bool(worst <= tol)
    qio.write_json(os.path.join(out, "lemmas.json"), lemmas)

    E = cfg.plant.E_tilde
    z = build_z(E[0], E[1], opts.membership_dim)
    membership = {name: check_membership(t, z, cfg.bounds, opts.membership_dim).to_dict()
                  for name, t in tables.items()}
    membership["bounds"] = {"gamma": cfg.bounds.gamma, "beta": cfg.bounds.beta,
                            "delta1": cfg.bounds.delta1, "delta2": cfg.bounds.delta2,
                            "delta3": cfg.bounds.delta3}
    qio.write_json(os.path.join(out, "membership.json"), membership)
    print(f"verify: max lemma residual {worst:.3e} ({'pass' if worst <= tol else 'fail'})")
    return EXIT_OK if worst <= tol else EXIT_INCONCLUSIVE


def _initial_state(init, dim):
    from .focklab.operators import coherent_state, fock_state, thermal_state

    if init["kind"] == "fock":
        return fock_state(init["n"], dim)
    if init["kind"] == "coherent":
        return coherent_state(qio.parse_complex(init["alpha"], "simulation.initial.alpha"), dim)
    return thermal_state(init["nbar"], dim)


def build_simulation(cfg):
    """Hamiltonian, couplings, initial state and step from the config."""
    from .focklab.lemmas import doubled_linear, doubled_quadratic
    from .focklab.operators import build_poly_op, build_z, pure_kerr, saturated_kerr

    plant, opts = cfg.plant, cfg.simulation
    if plant.n != 1:
        raise QstabError("simulate supports single-mode plants only (unsupported dimension)")
    dim = opts.dim
    E = plant.E_tilde
    H = 0.5 * doubled_quadratic(plant.M.full(), dim)
    if opts.hamiltonian != "none":
        table = pure_kerr() if opts.hamiltonian == "kerr" else saturated_kerr(opts.saturation, opts.order)
        H = H + build_poly_op(table, build_z(E[0], E[1], dim)).matrix
    H = 0.5 * (H + H.conj().T)
    Ls = [doubled_linear([plant.N1[j, 0], plant.N2[j, 0]], dim) for j in range(plant.m)]
    kappa = float(np.sum(np.abs(plant.N1) ** 2) + np.sum(np.abs(plant.N2) ** 2))
    dt = opts.dt
    if dt is None:
        if not kappa > 0:
            raise ConfigError("simulation.dt", "required when the plant has no coupling")
        dt = 0.01 / kappa
    return H, Ls, _initial_state(opts.initial, dim), dt


def cmd_simulate(args):
    from .focklab.lindblad import fit_envelope, lindblad_simulate

    cfg = _load(args)
    out = _outdir(args, cfg)
    H, Ls, rho0, dt = build_simulation(cfg)
    opts = cfg.simulation
    traj = lindblad_simulate(H, Ls, rho0, opts.t_end, dt, method=opts.method,
                             record_every=opts.record_every)
    qio.write_csv(os.path.join(out, "trajectory.csv"), ("t", "n_expect", "vquad_expect", "trace", "purity"),
                  traj.rows())
    fit = fit_envelope(traj)
    doc = fit.to_dict()
    doc.update({"dim": traj.dim, "dt": dt, "t_end": opts.t_end, "samples": len(traj)})
    qio.write_json(os.path.join(out, "envelope.json"), doc)
    if _figures(args):
        from .plotting import plot_trajectory

        plot_trajectory(traj, fit, os.path.join(out, "trajectory.png"))
    print(f"simulate: {fit.reason} (c1={fit.c1:.6g}, c2={fit.c2:.6g}, c3={fit.c3:.6g})")
    return EXIT_OK if fit.witnessed else EXIT_INCONCLUSIVE


def cmd_init(args):
    doc = qio.example_config(args.example, kappa=args.kappa, gamma=args.gamma)
    text = qio.json_dumps(doc)
    if args.config:
        qio.atomic_write_text(args.config, text)
        print(f"init: wrote {args.config}")
    elif args.out:
        path = os.path.join(_outdir(args), "config.json")
        qio.atomic_write_text(path, text)
        print(f"init: wrote {path}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _add_globals(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", metavar="PATH", default=default, help="JSON configuration file")
    parser.add_argument("--out", metavar="DIR", default=default, help="output directory")
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS if suppress else 0,
                        help="seed for randomised checks (default 0)")
    parser.add_argument("--no-figures", action="store_true",
                        default=argparse.SUPPRESS if suppress else False,
                        help="skip PNG figures")


def build_parser():
    parser = argparse.ArgumentParser(prog="qstab", description="Robust stability analysis of linear "
                                     "quantum systems with non-quadratic perturbations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    specs = [
        ("smallgain", cmd_smallgain, "bounded-real (small-gain) test"),
        ("popov", cmd_popov, "Popov test, theta search and Popov-plot data"),
        ("certify", cmd_certify, "search for an LMI certificate and bound constants"),
        ("verify", cmd_verify, "commutator identities and perturbation-class membership"),
        ("simulate", cmd_simulate, "master-equation simulation and envelope fit"),
        ("init", cmd_init, "write an example configuration"),
    ]
    for name, func, help_ in specs:
        p = sub.add_parser(name, help=help_)
        _add_globals(p, suppress=True)
        p.set_defaults(func=func)
        if name == "popov":
            p.add_argument("--sweep-kappa", metavar="K1,K2,...",
                           help="run the Kerr cavity at each decay rate instead of the configured plant")
        if name == "init":
            p.add_argument("--example", default="kerr", choices=["kerr"])
            p.add_argument("--kappa", type=float, default=2.0)
            p.add_argument("--gamma", type=float, default=0.1)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (QstabError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
