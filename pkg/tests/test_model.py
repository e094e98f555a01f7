import pytest

from rtosmc.model import (NONE, READY, SUSPENDED, GlobalState, ModelError, Program, SchedKind,
                          System, TaskSpec, make_config, parse_policy)

from systems import idle_program, tiny


@pytest.mark.parametrize("name,kind", [
    ("coop", SchedKind.COOPERATIVE), ("Cooperative", SchedKind.COOPERATIVE),
    ("preemptive", SchedKind.PREEMPTIVE_NO_SLICE),
    ("preemptive-no-slice", SchedKind.PREEMPTIVE_NO_SLICE),
    (" timeslice ", SchedKind.PREEMPTIVE_SLICE), ("PreemptiveSlice", SchedKind.PREEMPTIVE_SLICE),
    (SchedKind.PREEMPTIVE_SLICE, SchedKind.PREEMPTIVE_SLICE),
])
def test_parse_policy(name, kind):
    assert parse_policy(name) is kind


def test_parse_policy_rejects_unknown():
    with pytest.raises(ValueError):
        parse_policy("round-robin")


def test_only_cooperative_is_not_preemptive():
    assert [k.preemptive for k in SchedKind] == [False, True, True]


def test_config_overrides_and_dict():
    cfg = make_config("timeslice", idle_yields=False, overrides=(("a.b", 3),))
    assert cfg.override("a.b", 1) == 3 and cfg.override("a.c", 1) == 1
    d = cfg.as_dict()
    assert d["policy"] == "timeslice" and d["idle_yields"] is False
    assert d["overrides"] == {"a.b": 3}


def test_program_rules():
    p = Program("x").add("a", lambda st, t: None)
    with pytest.raises(ModelError):
        p.add("a", lambda st, t: None)
    with pytest.raises(ModelError):
        Program("empty").seal()
    p.add("b", lambda st, t: None, progress=True).seal()
    assert [c.next for c in p.commands] == [1, 0]
    assert p.progress_labels == ["b"]


def test_system_validation():
    with pytest.raises(ModelError):
        System("bad", make_config(), [], idle_program=idle_program("idle"),
               masked_lines=frozenset({"NMI"}))


def test_layout_is_compact_bytes():
    sys = tiny(queues=[("Q", 2)], locks=[("M", 1, 1, True)])
    st = sys.initial_state()
    assert len(st.key) == sys.size
    assert all(0 <= b <= NONE for b in st.v)
    assert sys.unit_names == ["idle", "t1", "t2", "PendSV", "SysTick"]
    assert sys.pendsv == 3 and sys.systick == 4
    assert sys.is_task(0) and sys.is_handler(4) and not sys.is_task(3)


def test_key_round_trip_and_equality():
    st = tiny().initial_state()
    back = GlobalState.from_key(st.sys, st.key)
    assert back == st and hash(back) == hash(st)
    assert back.hexdigest() == st.hexdigest() and len(st.hexdigest()) == 16
    other = st.copy()
    other.set_pending(1)
    assert other != st and other.digest() != st.digest()


def test_start_suspended_and_masked_lines():
    tasks = [TaskSpec("a", 1, idle_program("a"), start_suspended=True),
             TaskSpec("b", 1, idle_program("b"))]
    sys = System("s", make_config("preemptive"), tasks, masked_lines=frozenset({"SysTick"}))
    st = sys.initial_state()
    assert st.life(1) == SUSPENDED and st.ep == 2
    assert st.masked(1) and not st.masked(0)


def test_idle_gets_the_cpu_when_all_tasks_start_suspended():
    tasks = [TaskSpec("a", 1, idle_program("a"), start_suspended=True)]
    st = System("s", make_config(), tasks).initial_state()
    assert st.ep == 0 and st.life(1) == SUSPENDED


def test_variables_are_range_checked():
    sys = System("v", make_config(), [TaskSpec("a", 1, idle_program("a"))],
                 variables={"x": 1})
    st = sys.initial_state()
    st.set_var("x", 254)
    assert st.var("x") == 254
    with pytest.raises(ModelError):
        st.set_var("x", 255)


def test_describe_is_readable():
    d = tiny(queues=[("Q", 1)]).initial_state().describe()
    assert d["ep"] == "t1" and d["stack"] == []
    assert d["tasks"]["t2"]["life"] == "Ready"
    assert d["queues"] == {"Q": []}


def test_current_task_through_handler():
    from rtosmc import hw
    st = hw.exception_entry(tiny().initial_state(), 1)
    assert st.current_task() == 1
    assert st.life(2) == READY
