"""Smoke test for the Python bindings.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/restricted_orbits_py-*.whl
"""

import math

import restricted_orbits_py as ro


def main():
    primaries = ro.Primaries(ro.Masses(1.0, 1.0, 1.0), T=1.0)
    bounds = primaries.bounds()
    assert abs(bounds["d1"] - 11.523843) < 1e-6, bounds

    d3 = ro.action_circular(primaries, 0.33, math.pi / 2)
    assert d3 < bounds["d1"], d3

    init = ro.FourierLoop.circular(primaries, 0.33, math.pi / 2, K=16)
    assert init.degree(primaries) == 1
    assert abs(ro.action(init, primaries)["total"] - d3) < 1e-6
    run = ro.minimize(init, primaries, options={"grad_tol": 1e-9})
    assert run.converged and run.action < d3, (run.status, run.action)
    report = run.certify(primaries, 1)
    assert report["passes"], report["failures"]

    again = ro.FourierLoop.from_json(run.orbit.to_json())
    assert again.to_vector() == run.orbit.to_vector()
    check = ro.verify(again, primaries, expected_degree=1)
    assert check["passes"]

    zero = ro.verify(ro.FourierLoop.zero(1.0, 4), primaries)
    assert not zero["passes"]

    try:
        ro.Masses(1.0, -1.0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative mass accepted")

    rows = ro.table(4)
    assert len(rows) == 22 and all(r["certified"] for r in rows)

    print(f"ok: d1 = {bounds['d1']:.6f}, minimized action = {run.action:.10f}")


if __name__ == "__main__":
    main()
