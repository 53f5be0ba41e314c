import math

import numpy as np
import pytest

from orbit_metrics.atomic import from_spectrum
from orbit_metrics.errors import InconsistentInterval, MissingLabel, ResolutionTooCoarse, ValidationError
from orbit_metrics.k1 import (
    K1Labeling,
    RhoValues,
    complement_components,
    mt2_bounds,
    mt3_interval,
    rho,
    trivial_labeling,
)
from orbit_metrics.metrics import compute_metrics

CIRCLE = np.exp(2j * np.pi * np.arange(64) / 64)
INNER = K1Labeling({"component-1": (1,)}, {"component-1": (0,)})


def test_circle_has_one_hole_containing_origin():
    cm = complement_components(CIRCLE, CIRCLE, 0.15)
    assert cm.bounded_ids() == ["component-1"]
    assert cm.component_of(0j) == "component-1"
    assert cm.component_of(5 + 5j) == "component-0"
    assert not cm.bounded[0]


def test_collinear_and_figure_eight():
    assert complement_components([0, 1, 2], [0, 1, 2], 0.1).bounded_ids() == []
    eight = np.concatenate([1 + CIRCLE, -1 + CIRCLE])
    assert len(complement_components(eight, eight, 0.05).bounded_ids()) == 2


def test_resolution_too_coarse():
    with pytest.raises(ResolutionTooCoarse):
        complement_components([0, 1], [0, 1], 0.5)


def test_rho_circle():
    cm = complement_components(CIRCLE, CIRCLE, 0.05)
    r = rho(cm, INNER, CIRCLE, CIRCLE)
    assert r.rho_1 == pytest.approx(2, abs=2 * 0.05)
    assert r.rho_x == pytest.approx(1, abs=0.1) and r.rho_y == pytest.approx(1, abs=0.1)
    big = 2 * CIRCLE
    r2 = rho(complement_components(big, big, 0.1), INNER, big, big)
    assert r2.rho_1 == pytest.approx(4, abs=0.2)


def test_rho_equal_labels_reduce_to_hausdorff():
    x, y = CIRCLE, CIRCLE * np.exp(0.01j)
    cm = complement_components(x, y, 0.05)
    r = rho(cm, trivial_labeling(cm), x, y)
    assert r.rho_1 == r.rho_x == r.rho_y == 0
    assert r.rho == pytest.approx(abs(x[0] - y[0]))


def test_labels_validation():
    cm = complement_components(CIRCLE, CIRCLE, 0.05)
    with pytest.raises(MissingLabel):
        rho(cm, K1Labeling({}, {}), CIRCLE, CIRCLE)
    with pytest.raises(ValidationError):
        rho(cm, K1Labeling({"component-9": (1,)}, {"component-9": (0,)}), CIRCLE, CIRCLE)
    with pytest.raises(ValidationError):
        rho(cm, K1Labeling({"component-0": (1,), "component-1": (0,)},
                           {"component-0": (0,), "component-1": (0,)}), CIRCLE, CIRCLE)


def test_labeling_json_round_trip():
    obj = {"labels": {"component-1": {"x": [1], "y": [0]}}}
    assert K1Labeling.from_json(obj).to_json() == obj


def test_mt_bounds_circle():
    h = from_spectrum(CIRCLE, [1] * 64)
    report = compute_metrics(h, h, pitch=0.05)
    cm = complement_components(CIRCLE, CIRCLE, 0.05)
    r = rho(cm, INNER, CIRCLE, CIRCLE)
    mt2 = mt2_bounds(report, r.rho_x, r.rho_y)
    assert mt2.D_1 == pytest.approx(2, abs=0.12)
    assert mt2.D_2[0] == pytest.approx(2, abs=0.12) and mt2.D_2[1] == pytest.approx(2, abs=0.12)
    iv = mt3_interval(report, r)
    assert iv.lower == pytest.approx(2, abs=0.12) and iv.upper == pytest.approx(2, abs=0.12)


def test_mt_bounds_trivial_labels(m3_pair):
    x, y = m3_pair
    report = compute_metrics(x, y, pitch=0.01)
    zero = RhoValues(0.0, 0.0, 0.0, report.hausdorff, 0.0)
    mt2 = mt2_bounds(report, 0, 0)
    assert mt2.D_1 == pytest.approx(math.sqrt(2))
    assert mt2.D_2[0] == pytest.approx(math.sqrt(2))
    assert mt2.D_2[1] <= 2 * math.sqrt(2) + 1e-12
    iv = mt3_interval(report, zero)
    assert iv.lower == pytest.approx(1, abs=0.02) and iv.upper == pytest.approx(math.sqrt(2))
    same = compute_metrics(x, x)
    iv = mt3_interval(same, RhoValues(0.0, 0.0, 0.0, 0.0, 0.0))
    assert iv.lower == 0 and iv.upper == 0


def test_inconsistent_labels_raise():
    h = from_spectrum([0, 1], [1, 1])
    report = compute_metrics(h, h)
    with pytest.raises(InconsistentInterval):
        mt3_interval(report, RhoValues(0.0, 0.0, 5.0, 5.0, 0.1))


@pytest.mark.parametrize("s", [0.5, 3.0])
def test_scaling_covariance(s):
    h = 0.05
    r1 = rho(complement_components(CIRCLE, CIRCLE, h), INNER, CIRCLE, CIRCLE)
    r2 = rho(complement_components(s * CIRCLE, s * CIRCLE, s * h), INNER, s * CIRCLE, s * CIRCLE)
    assert r2.rho_1 == pytest.approx(s * r1.rho_1, abs=2 * s * h)
    assert r1.rho_1 <= r1.rho_x + r1.rho_y + 1e-12
