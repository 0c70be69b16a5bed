from __future__ import annotations

import pytest

from qbplab import acceptance
from qbplab.graph import relabel_sinks


@pytest.mark.parametrize("index", sorted(acceptance.CRITERIA))
def test_criterion(index, capsys):
    result = acceptance.run_criterion(index, jobs=4)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.measured


def test_sink_flip_is_detected(monkeypatch):
    original = acceptance.build_mws_qbp
    monkeypatch.setattr(acceptance, "build_mws_qbp", lambda n, strict=True: relabel_sinks(original(n, strict)))
    result = acceptance.run_criterion(1)
    assert not result.passed


def test_csv_has_one_row_per_criterion():
    rows = [acceptance.CriterionResult(i, "t", True, "m", "1e-9", 0.0) for i in (1, 2)]
    text = acceptance.results_csv(rows)
    assert text.splitlines() == ["criterion,title,passed,measured,tolerance", "1,t,true,m,1e-9", "2,t,true,m,1e-9"]
