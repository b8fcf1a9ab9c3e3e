import pytest

from sage_weyl.helpers.enums import (
    BoundarySide,
    CertificateRoute,
    Experiment,
    ModelKind,
    ParameterKind,
    SelfAdjointCriterion,
    Verdict,
)


def test_parameter_kind_values():
    assert ParameterKind.SCALAR == "scalar"
    assert ParameterKind.LOCAL == "local"
    assert ParameterKind.NONLOCAL == "nonlocal"


def test_certificate_route_values():
    assert CertificateRoute.DECAY == "decay"
    assert CertificateRoute.NEGATIVITY == "negativity"
    assert CertificateRoute.FORM == "form"


def test_verdict_and_variant_values():
    assert Verdict.PASS == "pass"
    assert Verdict.FAIL == "fail"
    assert Verdict.VACUOUS == "vacuous"
    assert SelfAdjointCriterion.COMPLEX_PAIR == "complex-pair"
    assert SelfAdjointCriterion.REAL_POINT == "real-point"


def test_model_kind_values():
    assert [str(kind) for kind in ModelKind] == ["discrete", "halfline", "random"]


@pytest.mark.parametrize(
    "name",
    [
        "triple-check",
        "green-check",
        "krein-check",
        "hypotheses",
        "decay-fit",
        "bound-certify",
        "sweep",
    ],
)
def test_experiment_lookup(name):
    assert str(Experiment(name)) == name


def test_unknown_experiment():
    with pytest.raises(ValueError):
        Experiment("plot")


def test_boundary_sides():
    assert BoundarySide("x0") is BoundarySide.X0
    assert {str(side) for side in BoundarySide} == {"x0", "x1", "y0", "y1"}
