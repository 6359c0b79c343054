import math

import pytest

import robustde as r

CROSSED_CSV = (
    "a,w,y\n"
    "0,0,0\n0,0,0\n0,0,0\n0,1,0\n"
    "1,0,0\n1,1,1\n1,1,1\n1,1,1\n"
)


def options(K=5, seed=0):
    opts = r.EstimateOptions()
    opts.K = K
    opts.seed = seed
    return opts


def columns():
    spec = r.ColumnSpec()
    spec.a = "a"
    spec.w = "w"
    spec.y = "y"
    return spec


def test_population_values():
    t = r.truth(r.DgpSpec.standard(1))
    assert math.isclose(t.psi, 1.2539699589366451, abs_tol=1e-12)
    assert math.isclose(t.lambda_, 1.0757599578541786, abs_tol=1e-12)
    assert r.truth(r.DgpSpec.standard(2)).method == "closed-form"


def test_plugin_exactness(tmp_path):
    path = tmp_path / "crossed.csv"
    path.write_text(CROSSED_CSV)
    d = r.load_csv(str(path), columns())
    assert d.n() == 8
    psi = r.estimate_psi(d, options(K=1))
    lam = r.estimate_lambda(d, options(K=1))
    assert abs(psi.point - 0.5) < 1e-12
    assert abs(lam.point - 0.25) < 1e-12
    assert lam.se is None


def test_cross_fitted_estimate_recovers_the_effect():
    d = r.draw(r.DgpSpec.standard(2), 2000, 11)
    res = r.estimate_psi(d, options(seed=12))
    assert abs(res.point - 0.8) < 4 * res.se
    assert res.ci_lo < res.point < res.ci_hi


def test_union_test_is_strict_at_the_level():
    assert r.union_test(0.01, 0.04, 0.05).reject
    assert not r.union_test(0.01, 0.05, 0.05).reject
    assert r.union_test(0.01, 0.04, 0.05).p_max == 0.04


def test_sensitivity_report_defaults_gamma_to_the_interaction():
    d = r.draw(r.DgpSpec.standard(3), 3000, 21)
    rep = r.sensitivity_report(d, r.SensitivityOptions())
    assert not rep.gamma_supplied
    assert rep.lo < rep.psi.point < rep.hi
    assert rep.gap is not None


def test_survey_bootstrap_smoke():
    base = r.draw(r.DgpSpec.standard(3), 200, 31)
    d = r.Dataset()
    d.x = base.x
    d.a = base.a
    d.w = base.w
    d.y = base.y
    d.weight = [1.0] * base.n()
    d.stratum = ["s0"] * base.n()
    d.psu = ["p%d" % (i % 10) for i in range(base.n())]
    d.validate()

    opts = r.BootstrapOptions()
    opts.B = 30
    opts.seed = 32
    opts.estimate = options(seed=33)
    opts.targets = [r.BootTarget.psi]
    res = r.psu_bootstrap(d, opts)
    assert res.skipped == 0
    assert len(res.targets[0].replicates) == 30
    assert res.targets[0].ci_lo <= res.targets[0].ci_hi


def test_error_taxonomy(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,w,y\n2,0,1.0\n0,1,0.5\n")
    with pytest.raises(r.DataError):
        r.load_csv(str(path), columns())
    spec = columns()
    spec.a = "missing"
    with pytest.raises(r.ConfigError):
        r.load_csv(str(path), spec)
