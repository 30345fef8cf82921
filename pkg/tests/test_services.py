"""
Tests for ScenarioService: payload checks, report lines and exit codes

Сервис создаётся через фабрику с тестовыми настройками (без окружения)
"""

import pytest

from vertexforge.application.factories import get_scenario_service
from vertexforge.domain.exceptions import ScenarioError
from vertexforge.infrastructure.loader import parse_scenario

BETAGAMMA = {"kind": "zf", "preset": "betagamma", "maxdeg": 3}


def run(settings, command, payload, max_cells=None, **envelope):
    scenario = parse_scenario({"command": command, "payload": payload, **envelope})
    return get_scenario_service(settings, max_cells).run(scenario)


def schema_error(settings, command, payload, **envelope) -> ScenarioError:
    with pytest.raises(ScenarioError) as info:
        run(settings, command, payload, **envelope)
    return info.value


# ============================================
# SERIES COMMANDS
# ============================================

def test_expand_passes(settings):
    payload = {"expr": "1/(1 - x)", "domain": "x@0", "window": [0, 5], "expect": [1] * 6}
    result = run(settings, "expand", payload)
    (line,) = result.lines
    assert result.exit_code == 0
    assert line["command"] == "expand"
    assert line["coefficients"] == ["1"] * 6


def test_expand_mismatch_fails(settings):
    payload = {"expr": "1/(1 - x)", "domain": "x@0", "window": [0, 5], "expect": [1, 1, 2, 1, 1, 1]}
    result = run(settings, "expand", payload)
    assert result.exit_code == 1
    assert result.lines[0]["witness"] == {"x": 2}


def test_expand_with_constants(settings):
    payload = {"expr": "1/(lam - x)", "domain": "x@0", "window": [0, 2], "expect": ["1/2", "1/4", "1/8"]}
    result = run(settings, "expand", payload, constants={"lam": 2})
    assert result.exit_code == 0


def test_three_term_delta(settings):
    result = run(settings, "delta-check", {"kind": "three_term", "window": [-4, 4]})
    assert result.lines[0]["identity"] == "three_term_delta"
    assert result.exit_code == 0


def test_qyb_deformed_betagamma(settings):
    result = run(settings, "qyb-check", {"matrix": {"preset": "deformed_betagamma", "lambda": 1}})
    assert [line["identity"] for line in result.lines] == ["qyb_unitarity", "qyb_ybe"]
    assert result.exit_code == 0


# ============================================
# MODULE COMMANDS
# ============================================

def test_zf_build_dimensions(settings):
    payload = {"preset": "betagamma", "maxdeg": 3, "expect_dimensions": [1, 2, 5, 10]}
    result = run(settings, "zf-build", payload)
    assert result.lines[0]["dimensions"] == [[0, 1], [1, 2], [2, 5], [3, 10]]
    assert result.exit_code == 0


def test_zf_build_wrong_dimensions(settings):
    payload = {"preset": "betagamma", "maxdeg": 3, "expect_dimensions": [1, 2, 6]}
    result = run(settings, "zf-build", payload)
    assert result.lines[0]["verdict"] == "fail"
    assert result.lines[0]["witness"] == {"degree": 2}
    assert result.exit_code == 1


def test_zf_build_vertex_checks_with_explicit_window(settings):
    """An explicit relation window still leaves D and the vacuum axioms inside maxdeg"""
    payload = {"preset": "betagamma", "maxdeg": 3, "relation_window": {"degree_bound": 2, "modes": [-2, 1]},
               "vertex_checks": True}
    result = run(settings, "zf-build", payload)
    assert all("kind" not in line for line in result.lines)
    identities = [line["identity"] for line in result.lines]
    assert "vacuum_axioms" in identities
    assert "d_operator[u(-1)1]" in identities
    assert "d_operator[v(-1)1]" in identities
    assert result.exit_code == 0


def test_zf_build_dimension_above_dropped_relations(settings):
    """At the top degree some relations need longer words: a smaller expected value is undetermined"""
    payload = {"preset": "betagamma", "maxdeg": 2, "expect_dimensions": [1, 2, 4]}
    (line,) = run(settings, "zf-build", payload).lines
    assert 2 in line["undetermined_degrees"]
    assert line["verdict"] == "undetermined"
    assert line["witness"] == {"degree": 2}


def test_zf_build_q_system(settings):
    payload = {"preset": "q_system", "Q": [["1", "(1 - x)/(1 + x)"], ["(1 - x)/(1 + x)", "1"]], "maxdeg": 3,
               "expect_dimensions": [1, 4, 14, 40]}
    result = run(settings, "zf-build", payload)
    assert result.lines[0]["dimensions"] == [[0, 1], [1, 4], [2, 14], [3, 40]]
    assert result.exit_code == 0


def test_label_is_copied(settings):
    payload = {"preset": "free_boson", "maxdeg": 2}
    result = run(settings, "zf-build", payload, options={"label": "boson"})
    assert all(line["scenario"] == "boson" for line in result.lines)


# ============================================
# ORDER SEARCH BOUND
# ============================================

def test_order_search_bound_from_settings(settings):
    """u(x1) v(x2) needs (x1 - x2)^1; a bound of 0 leaves the pair non-local"""
    payload = {"structure": BETAGAMMA, "a": "u", "b": "v", "window": {"degree_bound": 1}}
    found = run(settings, "slocal-check", payload)
    assert found.lines[0]["smallest_order"] == 1
    bounded = run(settings.model_copy(update={"max_order": 0}), "slocal-check", payload)
    assert bounded.lines[0]["verdict"] == "fail"
    assert bounded.exit_code == 1


def test_order_search_bound_from_options(settings):
    payload = {"structure": BETAGAMMA, "a": "u", "b": "v", "window": {"degree_bound": 1}}
    result = run(settings, "slocal-check", payload, options={"max_order": 0})
    assert result.lines[0]["verdict"] == "fail"


# ============================================
# RESOURCE GUARD AND ERRORS
# ============================================

def test_resource_line_from_options(settings):
    result = run(settings, "zf-build", {"preset": "betagamma", "maxdeg": 3}, options={"max_cells": 5})
    (line,) = result.lines
    assert line["kind"] == "resource"
    assert line["max_cells"] == 5
    assert result.exit_code == 1


def test_command_line_guard_wins(settings):
    result = run(settings, "zf-build", {"preset": "betagamma", "maxdeg": 3}, max_cells=5,
                 options={"max_cells": 1_000_000})
    assert result.lines[0]["kind"] == "resource"
    assert result.lines[0]["max_cells"] == 5


def test_domain_error_line(settings):
    """An empty candidate pool is reported, not raised"""
    payload = {"structure": BETAGAMMA, "u": "u", "v": "v", "window": {"degree_bound": 1}, "pool": []}
    result = run(settings, "braiding-solve", payload)
    assert result.lines[0]["kind"] == "error"
    assert result.lines[0]["error"] == "EvidenceError"
    assert result.exit_code == 1


# ============================================
# SCHEMA ERRORS
# ============================================

def test_unknown_payload_key(settings):
    error = schema_error(settings, "expand", {"expr": "x", "domain": "x@0", "window": [0, 1], "extra": 1})
    assert error.pointer == "/payload/extra"


def test_bad_expression_pointer(settings):
    error = schema_error(settings, "expand", {"expr": "x +", "domain": "x@0", "window": [0, 1]})
    assert error.pointer == "/payload/expr"


def test_empty_window_pointer(settings):
    error = schema_error(settings, "expand", {"expr": "x", "domain": "x@0", "window": [3, 1]})
    assert error.pointer == "/payload/window"


def test_non_unitary_q_system(settings):
    payload = {"preset": "q_system", "Q": [["2"]], "maxdeg": 2}
    error = schema_error(settings, "zf-build", payload)
    assert error.pointer == "/payload/Q"


def test_datum_required_for_words(settings):
    payload = {"structure": BETAGAMMA, "a": [["u", -1]], "b": "v", "window": {"degree_bound": 1}}
    error = schema_error(settings, "slocal-check", payload)
    assert error.pointer == "/payload/datum"


def test_unknown_generator(settings):
    payload = {"structure": BETAGAMMA, "a": "w", "b": "v", "window": {"degree_bound": 1}}
    error = schema_error(settings, "slocal-check", payload)
    assert error.pointer == "/payload/a"


def test_unknown_pair_element(settings):
    payload = {"maxdeg": 2, "window": {"degree_bound": 1}, "pairs": [["e", "z"]], "axioms": False}
    error = schema_error(settings, "borcherds-check", payload)
    assert error.pointer == "/payload/pairs/0"


def test_constant_shadowing_variable(settings):
    with pytest.raises(ScenarioError) as info:
        parse_scenario({"command": "expand", "constants": {"x": 1}, "payload": {}})
    assert info.value.pointer.startswith("/constants")


def test_unknown_command():
    with pytest.raises(ScenarioError) as info:
        parse_scenario({"command": "frobnicate"})
    assert info.value.pointer == "/command"
