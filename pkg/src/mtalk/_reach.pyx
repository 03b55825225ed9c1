# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled reachability kernel over CSR adjacency (see _reach_py for the contract)."""

from cpython.bytearray cimport PyByteArray_AS_STRING


def reachable(int[::1] indptr, int[::1] indices, int[::1] seeds, int n):
    """Multi-source reachability. Returns a flag per node (seeds included)."""
    out = bytearray(n)
    cdef char* visited = PyByteArray_AS_STRING(out)
    cdef int[::1] stack_view
    import array
    stack = array.array("i", bytes(4 * n)) if n else array.array("i")
    cdef int top = 0
    cdef int i, v, w
    if n == 0:
        return out
    stack_view = stack
    for i in range(seeds.shape[0]):
        v = seeds[i]
        if not visited[v]:
            visited[v] = 1
            stack_view[top] = v
            top += 1
    while top > 0:
        top -= 1
        v = stack_view[top]
        for i in range(indptr[v], indptr[v + 1]):
            w = indices[i]
            if not visited[w]:
                visited[w] = 1
                stack_view[top] = w
                top += 1
    return out
