import numpy as np

from cohsim import figures as fg


def test_fig4_monotone_and_exact_endpoint():
    sweep = fg.fig4(steps=6)
    assert sweep.schema == ["theta", "resource_c_r", "diamond_error"]
    thetas = sorted(set(sweep.column("theta")))
    assert len(thetas) == 3
    for theta in thetas:
        mask = sweep.column("theta") == theta
        cs = sweep.column("resource_c_r")[mask]
        errs = sweep.column("diamond_error")[mask]
        order = np.argsort(cs)
        diffs = np.diff(errs[order])
        assert np.all(diffs <= 1e-6)  # non-increasing in resource coherence
        assert errs[order][-1] <= 1e-6  # exact at the cosbit


def test_fig5_reference_curves():
    sweep = fg.fig5(resolution=0.25)
    cols = sweep.schema
    assert "gate_fidelity" in cols and "cosdit_overlap" in cols
    px = sweep.column("p_x")
    py = sweep.column("p_y")
    pz = sweep.column("p_z")
    fid = sweep.column("gate_fidelity")
    # the cosdit grid point is exact
    idx = np.where((np.abs(px - 1 / 4) < 0.26) & (np.abs(px - py) < 1e-9) & (np.abs(py - pz) < 0.26))[0]
    cos_idx = np.argmin((px - 1 / 3) ** 2 + (py - 1 / 3) ** 2 + (pz - 1 / 3) ** 2)
    assert fid[cos_idx] >= 1.0 - 1e-4
    # overlap column is sum sqrt(p)/sqrt(3)
    k = len(px) // 2
    expect = (np.sqrt(px[k]) + np.sqrt(py[k]) + np.sqrt(pz[k])) / np.sqrt(3)
    assert abs(sweep.column("cosdit_overlap")[k] - expect) < 1e-12
    # the incoherent corner is flagged as a flagpole and is far from exact
    corner = np.argmin(px + py)
    assert sweep.column("is_flagpole")[corner] == 1
    assert fid[corner] < 1.0 - 1e-3


def test_fig6_closed_form_and_monotone():
    sweep = fg.fig6(steps=5)
    eps0 = sweep.column("epsilon") == 0.0
    thetas = sweep.column("theta")[eps0]
    bits = sweep.column("amortized_bits")[eps0]
    assert np.abs(bits - np.log2(1 + np.sin(2 * thetas))).max() < 1e-5
    for theta in thetas:
        mask = np.abs(sweep.column("theta") - theta) < 1e-12
        eps = sweep.column("epsilon")[mask]
        vals = sweep.column("amortized_bits")[mask]
        order = np.argsort(eps)
        assert np.all(np.diff(vals[order]) <= 1e-6)


def test_fig7_columns_and_monotonicity():
    sweep = fg.fig7(steps=2)
    assert sweep.schema[-1] == "coherence_left_bound"
    assert "feasible" in sweep.schema
    # cosbit input is always feasible; more allowed error leaves more coherence
    mask = sweep.column("input_c_r") == 1.0
    assert np.all(sweep.column("feasible")[mask] == 1)
    theta0 = sweep.column("theta")[0]
    mask &= np.abs(sweep.column("theta") - theta0) < 1e-12
    eps = sweep.column("epsilon")[mask]
    vals = sweep.column("coherence_left_bound")[mask]
    order = np.argsort(eps)
    assert np.all(np.diff(vals[order]) >= -1e-6)
    # weak resources at tight budgets are reported infeasible, rows complete
    weak = sweep.column("input_c_r") == 0.25
    assert np.any(sweep.column("feasible")[weak] == 0)


def test_csv_deterministic_and_meta():
    a = fg.fig6(steps=3).to_csv()
    b = fg.fig6(steps=3).to_csv()
    assert a == b
    assert "# figure=fig6" in a
    assert "# tol=" in a
    assert "# version=" in a
    header = [line for line in a.splitlines() if not line.startswith("#")][0]
    assert header == "theta,theta_over_pi,epsilon,amortized_bits"


def test_worker_pool_matches_serial():
    serial = fg.fig6(steps=3, jobs=1)
    parallel = fg.fig6(steps=3, jobs=2)
    assert serial.rows == parallel.rows


def test_qubit_resource_with_robustness():
    for c in (0.0, 0.5, 1.0):
        w = fg.qubit_resource_with_robustness(c)
        q = abs(w[0]) ** 2
        assert abs(2 * np.sqrt(q * (1 - q)) - c) < 1e-12
