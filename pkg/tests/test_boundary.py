import pytest

from rnet.boundary import (PathToInfinity, boundary_classes, functional_eval, model_paths, path_equivalent,
                           probe_test_set, sup_norm, validate_path)
from rnet.errors import DepthExhausted, NotAPath, NotConverged
from rnet.models import GEO_INT, HARMONIC, ModelSpec, closed_forms
from rnet.solver import kernel_families

from conftest import model


def test_validate_path():
    net = model(GEO_INT)
    plus, minus = model_paths(net)
    assert validate_path(net, plus, 10)
    wobble = PathToInfinity(lambda n: n % 2, "wobble")
    assert validate_path(net, wobble, 10) is False
    jump = PathToInfinity(lambda n: 2 * n, "jump")
    with pytest.raises(NotAPath) as err:
        validate_path(net, jump, 5)
    assert err.value.index == 1


def test_path_equivalence_on_closed_form():
    net = model(GEO_INT)
    h = {cf.kind: cf for cf in closed_forms(ModelSpec(GEO_INT))}[HARMONIC]
    plus, minus = model_paths(net)
    shifted = PathToInfinity(lambda n: n + 3, "+inf shifted")
    assert path_equivalent(net, plus, shifted, {"h": h}, 20)
    assert not path_equivalent(net, plus, minus, {"h": h}, 20)
    with pytest.raises(DepthExhausted):
        path_equivalent(net, plus, shifted, {"h": h}, 10, tol=0.99 * 0.5 ** 10)


def test_star_classes_and_contradiction_free():
    net = model("STAR", m=3)
    probes = [y for y in net.ball(2) if y != net.origin]
    tests = probe_test_set(net, probes, 25)
    rep = boundary_classes(net, model_paths(net), tests, 20)
    assert rep.count == 3 and not rep.warnings
    assert "w[o]" in rep.probes


def test_functional_eval_and_nonconvergence():
    net = model(GEO_INT)
    plus, minus = model_paths(net)
    beta = functional_eval(net, plus, {1: 1.0}, 20)
    assert beta.value == pytest.approx(0.25, abs=1e-5)
    fams = kernel_families(net, [1], 20)
    with pytest.raises(NotConverged):
        functional_eval(net, plus, {1: 1.0}, 6, tol=1e-6, kernels=fams)


def test_sup_norm_of_harmonic_is_bounded():
    net = model(GEO_INT)
    h = {cf.kind: cf for cf in closed_forms(ModelSpec(GEO_INT))}[HARMONIC]
    rep = sup_norm(net, h, 30)
    assert rep["bounded_conjecture"] and rep["value"] == pytest.approx(1.0, abs=1e-6)
    grow = sup_norm(model("SIMPLE_LINE"), lambda n: float(n), 10)
    assert not grow["bounded_conjecture"]


def test_model_paths_unavailable():
    with pytest.raises(ValueError):
        model_paths(model("LATTICE_JOIN"))
