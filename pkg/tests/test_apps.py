import pytest

from rtosmc import explorer
from rtosmc.apps import (APP_NAMES, build_app, evaluate_checks, lookup, properties, starred)
from rtosmc.matrix import POLICIES
from rtosmc.model import UnknownApp, make_config

ALL_PROPS = {f"S{i}" for i in range(7)}


def test_eight_apps_in_table_order():
    assert APP_NAMES == ("PollQ", "Semtest", "BlockQ", "QPeek", "Dynamic", "Countsem",
                         "Recmutex", "GenQTest")


def test_lookup_is_case_insensitive():
    assert lookup("blockq").NAME == "BlockQ"
    assert lookup(" GENQTEST ").NAME == "GenQTest"
    with pytest.raises(UnknownApp):
        lookup("Flop")


@pytest.mark.parametrize("name", APP_NAMES)
def test_declared_properties_match_embedded_checks(name):
    props = properties(name)
    assert props and props <= ALL_PROPS
    sys = build_app(name, make_config())
    assert {c.kind for c in sys.checks} == set(props)
    assert sys.properties == props


@pytest.mark.parametrize("name", APP_NAMES)
@pytest.mark.parametrize("policy", POLICIES)
def test_apps_build_with_small_unit_counts(name, policy):
    sys = build_app(name, make_config(policy))
    assert sys.name == name
    assert sys.ntasks <= 7
    assert all(p.progress_labels for p in sys.programs[1:sys.ntasks])


@pytest.mark.parametrize("name", [n for n in APP_NAMES if starred(n)])
def test_starred_apps_are_live_under_cooperative(name):
    # every loop of a starred app yields or blocks when scheduling is cooperative
    v = explorer.check_liveness(build_app(name, make_config("cooperative")))
    assert v.kind == "LivenessPass"


def test_evaluate_checks_reports_first_failure():
    sys = build_app("PollQ", make_config())
    st = sys.initial_state()
    s3 = next(c for c in sys.checks if c.kind == "S3")
    st.set_var("expect", 1)
    out = evaluate_checks(st, [s3])
    assert out is not None and out.kind == "S3" and "consumer" in out.detail


def test_with_check_task_adds_a_task():
    plain = build_app("Dynamic", make_config("preemptive"))
    extra = build_app("Dynamic", make_config("preemptive", with_check_task=True))
    assert extra.ntasks == plain.ntasks + 1


def test_app_constants_can_be_overridden():
    cfg = make_config(overrides=(("pollq.capacity", 3),))
    assert build_app("PollQ", cfg).queues[0].capacity == 3
