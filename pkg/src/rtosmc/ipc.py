"""Thread-safe queues and locks with waiting-task queues.

All operations mutate the state passed in.  Each returns ``OK`` or ``EXPIRED``
when the call completes immediately, or ``None`` when the caller blocked; the
outcome is also left in the caller's outcome slot, which is where a task that
blocked finds it after being woken.

Object codes stored in a blocked task's record: for queue ``q`` the codes are
``3q`` (send), ``3q+1`` (receive) and ``3q+2`` (peek); lock ``l`` is
``3*len(queues) + l``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .kernel import preempt_if_due, request_switch
from .model import (BLOCKED, EXPIRED, FOREVER, NO_OUTCOME, NONE, OK, READY, GlobalState,
                    ModelError, MutexGiveByNonHolder)


@dataclass(frozen=True)
class MsgQueue:
    capacity: int
    buffer: tuple
    send_waiters: tuple
    recv_waiters: tuple


@dataclass(frozen=True)
class CountLock:
    count: int
    max_count: int
    take_waiters: tuple
    holder: Optional[int]
    holder_base_priority: Optional[int]


def queue_view(st: GlobalState, qi: int) -> MsgQueue:
    return MsgQueue(st.sys.queues[qi].capacity, st.queue_buffer(qi),
                    st.queue_waiters(qi, "send"), st.queue_waiters(qi, "recv"))


def lock_view(st: GlobalState, li: int) -> CountLock:
    h = st.lock_holder(li)
    return CountLock(st.lock_count(li), st.sys.locks[li].max_count, st.lock_waiters(li),
                     None if h == NONE else h,
                     None if h == NONE else st.sys.base_priority[h])


# waiter lists: a count slot followed by ntasks id slots ------------------------

def _wait_insert(st: GlobalState, at: int, t: int) -> None:
    v = st.v
    n = v[at]
    pos = n
    if st.sys.config.waiter_order == "priority":
        p = st.eff(t)
        for i in range(n):
            if st.eff(v[at + 1 + i]) < p:
                pos = i
                break
    for i in range(n, pos, -1):
        v[at + 1 + i] = v[at + i]
    v[at + 1 + pos] = t
    v[at] = n + 1


def _wait_pop(st: GlobalState, at: int) -> int:
    v = st.v
    n = v[at]
    t = v[at + 1]
    for i in range(n - 1):
        v[at + 1 + i] = v[at + 2 + i]
    v[at + n] = NONE
    v[at] = n - 1
    return t


def _wait_remove(st: GlobalState, at: int, t: int) -> None:
    v = st.v
    n = v[at]
    members = [v[at + 1 + i] for i in range(n)]
    if t not in members:
        raise ModelError(f"task {t} missing from waiter list")
    members.remove(t)
    for i in range(n):
        v[at + 1 + i] = members[i] if i < n - 1 else NONE
    v[at] = n - 1


def _queue_slots(st: GlobalState, qi: int):
    o = st.sys.QUEUES[qi]
    cap = st.sys.queues[qi].capacity
    send_at = o + 1 + cap
    recv_at = send_at + 1 + st.sys.ntasks
    return o, cap, send_at, recv_at


def _wake(st: GlobalState, t: int, outcome: int) -> None:
    st.set_life(t, READY)
    st.set_outcome(t, outcome)
    preempt_if_due(st, t)


def _block(st: GlobalState, t: int, obj: int, delay: int, at: int) -> None:
    ticks = FOREVER if delay == FOREVER else min(delay, st.sys.config.delay_max)
    st.set_life(t, BLOCKED, ticks, obj)
    st.set_outcome(t, NO_OUTCOME)
    _wait_insert(st, at, t)
    request_switch(st)


# queues -----------------------------------------------------------------------

def _push(st: GlobalState, qi: int, msg: int) -> None:
    o, cap, send_at, recv_at = _queue_slots(st, qi)
    v = st.v
    n = v[o]
    v[o + 1 + n] = msg
    v[o] = n + 1
    # hand the head to blocked readers; peekers copy it and leave it in place
    while v[recv_at] and v[o]:
        w = _wait_pop(st, recv_at)
        st.set_msg(w, v[o + 1])
        if st.blocked_on(w) == 3 * qi + 1:
            _pop_head(st, qi)
        _wake(st, w, OK)


def _pop_head(st: GlobalState, qi: int) -> int:
    o, cap, _, _ = _queue_slots(st, qi)
    v = st.v
    n = v[o]
    head = v[o + 1]
    for i in range(n - 1):
        v[o + 1 + i] = v[o + 2 + i]
    v[o + n] = NONE
    v[o] = n - 1
    return head


def send(st: GlobalState, qi: int, t: int, msg: int, delay: int) -> Optional[int]:
    o, cap, send_at, recv_at = _queue_slots(st, qi)
    if st.v[o] < cap:
        st.set_outcome(t, OK)
        _push(st, qi, msg)
        return OK
    if delay == 0:
        st.set_outcome(t, EXPIRED)
        return EXPIRED
    st.set_msg(t, msg)
    _block(st, t, 3 * qi, delay, send_at)
    return None


def receive(st: GlobalState, qi: int, t: int, delay: int, peek: bool = False) -> Optional[int]:
    o, cap, send_at, recv_at = _queue_slots(st, qi)
    v = st.v
    if v[o]:
        st.set_msg(t, v[o + 1])
        st.set_outcome(t, OK)
        if not peek:
            _pop_head(st, qi)
            if v[send_at]:
                w = _wait_pop(st, send_at)
                _push(st, qi, st.msg(w))
                _wake(st, w, OK)
        return OK
    if delay == 0:
        st.set_outcome(t, EXPIRED)
        return EXPIRED
    _block(st, t, 3 * qi + (2 if peek else 1), delay, recv_at)
    return None


def peek(st: GlobalState, qi: int, t: int, delay: int) -> Optional[int]:
    return receive(st, qi, t, delay, peek=True)


# locks ------------------------------------------------------------------------

def _lock_of(st: GlobalState, obj: int) -> int:
    return obj - 3 * len(st.sys.queues)


def refresh_priority(st: GlobalState, t: int) -> None:
    """Effective priority = base raised to the highest waiter on any mutex ``t`` holds."""
    s = st.sys
    p = s.base_priority[t]
    for li, lk in enumerate(s.locks):
        if lk.mutex and st.lock_holder(li) == t:
            for w in st.lock_waiters(li):
                if st.eff(w) > p:
                    p = st.eff(w)
    st.set_eff(t, p)


def take(st: GlobalState, li: int, t: int, delay: int) -> Optional[int]:
    s = st.sys
    o = s.LOCKS[li]
    v = st.v
    if v[o] > 0:
        v[o] -= 1
        if s.locks[li].mutex:
            v[o + 1] = t
        st.set_outcome(t, OK)
        return OK
    if delay == 0:
        st.set_outcome(t, EXPIRED)
        return EXPIRED
    _block(st, t, 3 * len(s.queues) + li, delay, o + 2)
    if s.locks[li].mutex and v[o + 1] != NONE:
        refresh_priority(st, v[o + 1])
    return None


def give(st: GlobalState, li: int, t: int) -> int:
    s = st.sys
    lk = s.locks[li]
    o = s.LOCKS[li]
    v = st.v
    if lk.mutex:
        if v[o + 1] != t:
            raise MutexGiveByNonHolder(f"{s.unit_names[t]} gave mutex {lk.name} it does not hold")
        if v[o + 2]:
            w = _wait_pop(st, o + 2)
            v[o + 1] = w
            refresh_priority(st, t)
            refresh_priority(st, w)
            st.set_outcome(t, OK)
            _wake(st, w, OK)
            return OK
        v[o] = 1
        v[o + 1] = NONE
        refresh_priority(st, t)
        st.set_outcome(t, OK)
        return OK
    if v[o + 2]:
        w = _wait_pop(st, o + 2)
        if s.is_task(t):
            st.set_outcome(t, OK)
        _wake(st, w, OK)
        return OK
    if v[o] >= lk.max_count:
        if s.is_task(t):
            st.set_outcome(t, EXPIRED)
        return EXPIRED
    v[o] += 1
    if s.is_task(t):
        st.set_outcome(t, OK)
    return OK


# timeouts -----------------------------------------------------------------------

def expire(st: GlobalState, t: int) -> None:
    """A blocked task's timeout elapsed before its object became ready."""
    s = st.sys
    obj = st.blocked_on(t)
    nq = len(s.queues)
    if obj < 3 * nq:
        qi, kind = divmod(obj, 3)
        _, _, send_at, recv_at = _queue_slots(st, qi)
        _wait_remove(st, send_at if kind == 0 else recv_at, t)
        holder = NONE
    else:
        li = obj - 3 * nq
        _wait_remove(st, s.LOCKS[li] + 2, t)
        holder = st.lock_holder(li) if s.locks[li].mutex else NONE
    st.set_life(t, READY)
    st.set_outcome(t, EXPIRED)
    if holder != NONE:
        refresh_priority(st, holder)


# pure wrappers ---------------------------------------------------------------------

def _pure(fn):
    def wrapper(state: GlobalState, *args, **kw):
        st = state.copy()
        out = fn(st, *args, **kw)
        return st, out
    wrapper.__name__ = fn.__name__ + "_pure"
    wrapper.__doc__ = f"Copying form of :func:`{fn.__name__}`; returns ``(state, outcome)``."
    return wrapper


send_pure = _pure(send)
receive_pure = _pure(receive)
peek_pure = _pure(peek)
give_pure = _pure(give)
take_pure = _pure(take)
