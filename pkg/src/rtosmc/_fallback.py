"""Pure-Python versions of the hot kernels in ``_speedups.pyx``."""
from array import array

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK64 = 0xFFFFFFFFFFFFFFFF


def digest64(data: bytes) -> int:
    """64-bit FNV-1a over a canonical state encoding."""
    h = FNV_OFFSET
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & MASK64
    return h


def scc_find_cycle(n, offsets, dst, tag, exclude, want):
    """Tarjan SCC over a CSR graph, skipping edges tagged ``exclude``.

    Returns ``(comp, edge)`` where ``comp[v]`` is the component of node ``v``
    and ``edge`` is the index of the first edge tagged ``want`` whose ends lie
    in the same component (a cycle through it exists), or -1.
    """
    index = array("i", [-1]) * n
    low = array("i", [0]) * n
    comp = array("i", [-1]) * n
    onstack = bytearray(n)
    stack = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, offsets[root])]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        onstack[root] = 1
        while work:
            v, ei = work[-1]
            end = offsets[v + 1]
            pushed = False
            while ei < end:
                if tag[ei] == exclude:
                    ei += 1
                    continue
                w = dst[ei]
                ei += 1
                if index[w] == -1:
                    work[-1] = (v, ei)
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    onstack[w] = 1
                    work.append((w, offsets[w]))
                    pushed = True
                    break
                if onstack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if pushed:
                continue
            work.pop()
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    onstack[w] = 0
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
    found = -1
    for v in range(n):
        cv = comp[v]
        for ei in range(offsets[v], offsets[v + 1]):
            if tag[ei] == want and comp[dst[ei]] == cv:
                found = ei
                break
        if found != -1:
            break
    return comp, found
