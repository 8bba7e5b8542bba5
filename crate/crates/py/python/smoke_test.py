"""Smoke test for the qpartial extension module.

Build with `cargo build -p qpartial-py --features extension-module --release`,
copy target/release/libqpartial.so to qpartial.so somewhere on PYTHONPATH,
then run this script.
"""

import math

import qpartial


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    opt = qpartial.optimum_closed_form(4.0)
    assert close(opt.alpha_tilde, math.acos(1 / 3) / 2, 1e-12), opt
    assert close(opt.eta_tilde, math.atan(math.sqrt(2)), 1e-12), opt
    assert 0 < opt.saved_coefficient < 1

    try:
        qpartial.optimum_closed_form(1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("Ktilde=1 accepted")

    g = qpartial.Geometry(N=1024, K=4)
    assert (g.b, g.z, g.k_tilde) == (256, 1, 4.0)
    assert qpartial.integer_schedule(g) == (10, 10)

    full = qpartial.simulate(g, 10, 10, engine="full", seed=1)
    reduced = qpartial.simulate(g, 10, 10, engine="reduced")
    assert all(close(a, b, 1e-12) for a, b in zip(full.marginals, reduced.marginals))
    assert full.target_mass > 0.999
    assert full.sampled_block == 0

    amps = qpartial.statevector(qpartial.Geometry(64, 4), 2, 1)
    assert close(sum(abs(a) ** 2 for a in amps), 1.0, 1e-12)

    run, sol = qpartial.surephase(qpartial.Geometry(256, 16, t=2, tau=2))
    assert (sol.j1, sol.j2, sol.total_queries) == (5, 0, 6), sol
    assert run.residual <= 1e-10 and close(run.target_mass, 1.0, 1e-12), run

    print("qpartial", qpartial.__version__, "smoke test ok")


if __name__ == "__main__":
    main()
