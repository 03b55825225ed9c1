"""Pure-Python reachability kernel over CSR adjacency.

Fallback for the compiled extension; identical contract.
"""

from __future__ import annotations


def reachable(indptr, indices, seeds, n: int) -> bytearray:
    """Multi-source reachability. Returns a flag per node (seeds included)."""
    visited = bytearray(n)
    stack = []
    for s in seeds:
        if not visited[s]:
            visited[s] = 1
            stack.append(s)
    while stack:
        v = stack.pop()
        for i in range(indptr[v], indptr[v + 1]):
            w = indices[i]
            if not visited[w]:
                visited[w] = 1
                stack.append(w)
    return visited
