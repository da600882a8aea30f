"""Smoke test for the aniso_eq extension module.

Run after `maturin develop -m crates/py/Cargo.toml`, or after
`cargo build --release -p aniso-eq-py`, in which case the shared library is
loaded straight from target/release.
"""

import importlib.machinery
import importlib.util
import json
import math
import pathlib
import sys


def load():
    try:
        import aniso_eq

        return aniso_eq
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parent.parent
    for name in ("libaniso_eq_py.so", "libaniso_eq_py.dylib", "aniso_eq_py.dll"):
        lib = root / "target" / "release" / name
        if lib.exists():
            loader = importlib.machinery.ExtensionFileLoader("aniso_eq", str(lib))
            spec = importlib.util.spec_from_loader("aniso_eq", loader)
            mod = importlib.util.module_from_spec(spec)
            loader.exec_module(mod)
            return mod
    sys.exit("aniso_eq not found; build it with maturin or cargo build --release -p aniso-eq-py")


def main():
    ae = load()

    p = ae.KernelParams(0.5)
    e = ae.candidate_axes(p)
    assert abs(e.a - math.sqrt(0.5)) < 1e-14 and abs(e.b - math.sqrt(1.5)) < 1e-14
    cz, czb = ae.grad_p_coefficients(p, e)
    assert abs(cz) < 1e-14 and abs(czb) < 1e-14
    assert e.contains((0.0, 0.0)) == "interior"
    assert e.contains((2.0, 0.0)) == "exterior"

    disk = ae.candidate_axes(ae.KernelParams(0.0))
    assert abs(ae.c0(ae.KernelParams(0.0)) - 0.5) < 1e-9
    assert abs(ae.potential(ae.KernelParams(0.0), disk, (2.0, 0.0)) - (2.0 - math.log(2.0))) < 1e-9

    c0 = ae.c0(p)
    for z in [(0.1, 0.2), (-0.3, 0.5), (0.4, -0.6)]:
        assert abs(ae.potential(p, e, z) - c0) < 2e-5

    try:
        ae.KernelParams(float("nan"))
    except ValueError:
        pass
    else:
        raise AssertionError("nan alpha accepted")

    start = ae.ParticleConfig.uniform_square(60, 2.0, 1)
    res = ae.minimize(p, start, max_iters=5000)
    assert res.converged, res.diagnostic
    trace = res.energy_trace
    assert all(b <= a + 1e-12 * abs(a) for a, b in zip(trace, trace[1:]))
    stats = json.loads(ae.empirical_stats(res.final_config))
    assert stats["ex2"] < stats["ey2"]

    report = json.loads(ae.run_check("el1", ae.KernelParams(0.0)))
    assert report["status"] == "pass", report
    assert "plemelj" in ae.CHECK_NAMES

    print("aniso_eq smoke test passed")


if __name__ == "__main__":
    main()
