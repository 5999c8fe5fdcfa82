import json
from pathlib import Path

import numpy as np
import pytest

from dirackit.dirac_fields import (
    DiracField,
    FieldKind,
    dirac_field_from_json,
    involutivity_check,
    random_points,
    spanning_fields,
)
from dirackit.fields import bivector, one_form, two_form
from dirackit.poly import Chart, Poly

SPECS = Path(__file__).resolve().parents[1] / "specs"
CH = Chart.euclidean(3)
X1 = Poly.var(0, 3)


def samples(chart, n=8, seed=0):
    return random_points(chart, n, np.random.default_rng(seed))


def load(name):
    return dirac_field_from_json(json.loads((SPECS / name).read_text()))


def test_closed_two_form_graph_is_involutive():
    D = DiracField.from_two_form(two_form(CH, {(0, 1): 1.0, (1, 2): Poly.var(1, 3)}))
    rep = involutivity_check(D, samples(CH))
    assert rep.involutive and rep.pointwise_certified
    assert rep.witness is None


def test_non_closed_two_form_witness():
    D = DiracField.from_two_form(two_form(CH, {(1, 2): X1}))
    rep = involutivity_check(D, samples(CH))
    assert not rep.involutive
    assert rep.witness["source"] == "frame"
    assert rep.witness["value"] == pytest.approx(1.0)


def test_non_poisson_bivector_witness():
    D = DiracField.from_bivector(bivector(CH, {(0, 1): 1.0, (0, 2): X1}))
    rep = involutivity_check(D, samples(CH))
    assert rep.verdict == "NotInvolutive"
    assert abs(rep.witness["value"]) == pytest.approx(1.0)


def test_constant_bivector_is_involutive():
    D = DiracField.from_bivector(bivector(CH, {(0, 1): 2.0, (1, 2): -1.0}))
    assert involutivity_check(D, samples(CH)).involutive


def test_disk_distribution_spanning_fields():
    D = load("rolling_disk_distribution.json")
    assert D.kind is FieldKind.DISTRIBUTION
    fields = D.spanning
    assert len(fields) == 2
    # each spanning field is annihilated by both constraint forms everywhere
    for p in samples(D.chart):
        for X in fields:
            for w in D.forms:
                assert abs(float(np.asarray(w.at(p)) @ np.asarray(X.at(p)))) <= 1e-12


def test_disk_distribution_is_not_involutive_and_criteria_agree():
    D = load("rolling_disk_distribution.json")
    rep = involutivity_check(D, samples(D.chart))
    assert not rep.involutive
    assert rep.distribution["closes_under_bracket"] is False
    assert rep.distribution["criterion_consistent"]


def test_integrable_distribution_is_involutive():
    rep = involutivity_check(load("closed_distribution.json"), samples(Chart.euclidean(2)))
    assert rep.involutive
    assert rep.distribution["closes_under_bracket"]


def test_spanning_fields_of_single_form_in_three_dimensions():
    fields = spanning_fields(CH, [one_form(CH, [1.0, 0, X1])])
    assert len(fields) == 2


def test_pointwise_subspace_is_lagrangian():
    D = DiracField.from_two_form(two_form(CH, {(1, 2): X1}))
    for p in samples(CH, 3):
        ld = D.linear_at(p)
        assert ld.certified and ld.D.dim == 3


def test_report_is_json_serialisable():
    D = DiracField.from_bivector(bivector(CH, {(0, 1): 1.0, (0, 2): X1}))
    json.dumps(involutivity_check(D, samples(CH, 3), section_budget=3).to_json())
