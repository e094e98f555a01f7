# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled hot kernels: state digest and per-label SCC cycle search."""
from array import array
from cpython cimport array as carray
from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free


def digest64(const unsigned char[:] data):
    cdef uint64_t h = 0xCBF29CE484222325ULL
    cdef Py_ssize_t i
    for i in range(data.shape[0]):
        h ^= data[i]
        h *= 0x100000001B3ULL
    return h


def scc_find_cycle(int n, const int[:] offsets, const int[:] dst, const signed char[:] tag,
                   int exclude, int want):
    cdef carray.array comp_arr = array("i", [-1]) * n
    cdef int[:] comp = comp_arr
    cdef int *index = <int *> malloc(n * sizeof(int))
    cdef int *low = <int *> malloc(n * sizeof(int))
    cdef int *stack = <int *> malloc(n * sizeof(int))
    cdef int *wv = <int *> malloc(n * sizeof(int))
    cdef int *we = <int *> malloc(n * sizeof(int))
    cdef char *onstack = <char *> malloc(n)
    cdef int sp = 0, wp = 0, counter = 0, ncomp = 0
    cdef int root, v, ei, end, w, u, found = -1
    cdef bint pushed
    if not (index and low and stack and wv and we and onstack):
        raise MemoryError()
    try:
        for v in range(n):
            index[v] = -1
            onstack[v] = 0
        for root in range(n):
            if index[root] != -1:
                continue
            index[root] = counter
            low[root] = counter
            counter += 1
            stack[sp] = root; sp += 1
            onstack[root] = 1
            wv[wp] = root; we[wp] = offsets[root]; wp += 1
            while wp > 0:
                v = wv[wp - 1]
                ei = we[wp - 1]
                end = offsets[v + 1]
                pushed = False
                while ei < end:
                    if tag[ei] == exclude:
                        ei += 1
                        continue
                    w = dst[ei]
                    ei += 1
                    if index[w] == -1:
                        we[wp - 1] = ei
                        index[w] = counter
                        low[w] = counter
                        counter += 1
                        stack[sp] = w; sp += 1
                        onstack[w] = 1
                        wv[wp] = w; we[wp] = offsets[w]; wp += 1
                        pushed = True
                        break
                    if onstack[w] and index[w] < low[v]:
                        low[v] = index[w]
                if pushed:
                    continue
                wp -= 1
                if low[v] == index[v]:
                    while True:
                        sp -= 1
                        w = stack[sp]
                        onstack[w] = 0
                        comp[w] = ncomp
                        if w == v:
                            break
                    ncomp += 1
                if wp > 0:
                    u = wv[wp - 1]
                    if low[v] < low[u]:
                        low[u] = low[v]
        for v in range(n):
            for ei in range(offsets[v], offsets[v + 1]):
                if tag[ei] == want and comp[dst[ei]] == comp[v]:
                    found = ei
                    break
            if found != -1:
                break
    finally:
        free(index); free(low); free(stack); free(wv); free(we); free(onstack)
    return comp_arr, found
