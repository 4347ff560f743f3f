import cmath
import math

import pytest

import vgpqmc

COMPLEX_TRIANGLE = [[0, 1j, 1], [-1j, 0, 1], [1, 1, 0]]


def test_load_forms_agree():
    dense = vgpqmc.load_hamiltonian({"format": "dense", "matrix": [[[0, 0], [0, -1]], [[0, 1], [0, 0]]]})
    sparse = vgpqmc.load_hamiltonian({"format": "sparse", "dim": 2, "entries": [[0, 1, 0, -1]]})
    pauli = vgpqmc.load_hamiltonian({"format": "pauli", "n_qubits": 1, "terms": [{"coeff": [1, 0], "word": "Y"}]})
    for h in (dense, sparse, pauli):
        assert h.entry(0, 1) == -1j
        assert h.entry(1, 0) == 1j


def test_errors_map_to_python():
    with pytest.raises(vgpqmc.HermiticityError):
        vgpqmc.load_hamiltonian({"format": "sparse", "dim": 2, "entries": [[0, 1, 1, 0], [1, 0, 2, 0]]})
    with pytest.raises(vgpqmc.ParseError):
        vgpqmc.load_hamiltonian("{not json")
    with pytest.raises(vgpqmc.Error):
        vgpqmc.cure_phases(vgpqmc.from_dense([[0, 1, 1], [1, 0, 1], [1, 1, 0]]))


def test_minus_x_partition_function():
    h = vgpqmc.from_dense([[0, -1], [-1, 0]])
    series = vgpqmc.partition_function_series(vgpqmc.decompose_pmr(h), 1.0)
    assert series["Z"] == pytest.approx(2 * math.cosh(1.0), rel=1e-8)
    assert vgpqmc.partition_function_exact(h, 1.0) == pytest.approx(2 * math.cosh(1.0), rel=1e-12)


def test_triangle_is_not_vgp():
    report = vgpqmc.is_vgp(vgpqmc.from_dense([[0, 1, 1], [1, 0, 1], [1, 1, 0]]))
    assert not report.is_vgp
    assert report.theta is None
    assert len(report.violations) == 1
    assert abs(report.violations[0].phase) == pytest.approx(math.pi)


def test_cure_spf_instance():
    h, _ = vgpqmc.generate_spf(6, 0.7, 11)
    report = vgpqmc.is_vgp(h)
    assert report.is_vgp
    cured = vgpqmc.apply_rotation(h, vgpqmc.cure_phases(h))
    assert vgpqmc.is_stoquastic(cured, 1e-9)


def test_complex_triangle_signs():
    pmr = vgpqmc.decompose_pmr(vgpqmc.from_dense(COMPLEX_TRIANGLE))
    r = vgpqmc.weighted_signs(pmr, 1.0)
    z_true = 1 + 2 * math.cosh(math.sqrt(3))
    z_stoq = math.exp(2) + 2 * math.exp(-1)
    assert r["Z"] == pytest.approx(z_true, rel=1e-7)
    assert r["sgn_stoq"] == pytest.approx(z_true / z_stoq, rel=1e-7)
    assert r["sgn_abs"] > r["sgn_stoq"]


def test_divdiff():
    sign, log_mag = vgpqmc.divdiff_exp(1.0, [0.0, 1.0])
    assert sign * math.exp(log_mag) == pytest.approx(math.exp(-1) - 1, rel=1e-12)


def test_sampler_runs():
    pmr = vgpqmc.decompose_pmr(vgpqmc.from_dense([[0, -1], [-1, 0]]))
    est = vgpqmc.mcmc_weighted_sign(pmr, 1.0, "stoq", 20000, 1000, 3)
    assert est["mean"] == 1.0
    assert est["n_samples"] == 19000


def test_negative_cos_multiple():
    assert vgpqmc.first_negative_cos_multiple(math.pi, 10) == 1
    assert vgpqmc.first_negative_cos_multiple(0.0, 1000) is None
    assert cmath.isclose(vgpqmc.from_pauli(1, [(1, "Y")]).entry(0, 1), -1j)
