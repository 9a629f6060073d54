import numpy as np
import pytest

from rnet.errors import NotHarmonic
from rnet.models import GEO_INT, HARMONIC, ModelSpec, closed_forms
from rnet.potential_theory import (charge_balance, check_harmonic, classify, gauss_green_split, gram_rank,
                                   harmonic_boundary_repr, representative_shift)
from rnet.solver import kernel_families, monopole

from conftest import model


def test_split_on_generated_with_closed_forms():
    net = model(GEO_INT)
    w, h = (cf.evaluator for cf in closed_forms(ModelSpec(GEO_INT)))
    for k in (1, 4, 9):
        s = gauss_green_split(net, h, w, k)
        assert s.residual < 1e-12
        # h is harmonic, w has unit charge at 0 where h vanishes
        assert s.interior_sum == pytest.approx(0.0, abs=1e-12)


def test_charge_balance_of_dipole():
    net = model("STAR", m=3)
    fam = kernel_families(net, [(0, 2)], 20)[(0, 2)]
    for k in (3, 6, 9):
        cb = charge_balance(net, fam.v, k)
        assert cb["lhs"] == pytest.approx(0.0, abs=1e-10)
        assert cb["lhs"] == pytest.approx(cb["rhs"], abs=1e-10)


def test_check_harmonic():
    net = model(GEO_INT)
    w, h = (cf.evaluator for cf in closed_forms(ModelSpec(GEO_INT)))
    assert check_harmonic(net, h, range(-10, 11)) < 1e-12
    with pytest.raises(NotHarmonic):
        check_harmonic(net, w, range(-2, 3))


def test_boundary_representation_rejects_nonharmonic():
    net = model(GEO_INT)
    w = closed_forms(ModelSpec(GEO_INT))[0].evaluator
    with pytest.raises(NotHarmonic):
        harmonic_boundary_repr(net, w, 1, k_max=5)


def test_boundary_representation_at_negative_vertex():
    net = model(GEO_INT)
    h = {cf.kind: cf for cf in closed_forms(ModelSpec(GEO_INT))}[HARMONIC]
    rep = harmonic_boundary_repr(net, h, -2)
    assert rep.value == pytest.approx(-0.75, abs=1e-5)
    assert rep.extra["target"] == -0.75


def test_gram_rank():
    a = np.array([1.0, 2.0, 3.0])
    G = np.outer(a, a) + np.outer([1.0, 0, 0], [1.0, 0, 0])
    rank, ev = gram_rank(G, 1e-9)
    assert rank == 2 and ev[0] >= ev[-1]


def test_representative_shift_moves_boundary_term():
    net = model(GEO_INT)
    mono = monopole(net)
    rs = representative_shift(net, mono, 6)
    assert rs["boundary_change"] == pytest.approx(-1.0, abs=1e-9)


def test_classify_simple_cases():
    line = classify(model("SIMPLE_LINE"))
    assert line.transient is False and line.harm_dim_estimate == 0
    geo = classify(model(GEO_INT))
    assert geo.transient is True and geo.harm_dim_estimate == 1
    assert not geo.caveats
    ranks = geo.evidence["harm"]["ranks"]
    assert all(r["rank"] == 1 for r in ranks)
