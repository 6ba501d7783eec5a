# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled token kernels; same contracts as ``_pykernels``."""

from libc.stdint cimport uint64_t


def loose_match(mask, tokens):
    cdef Py_ssize_t i, n = len(mask)
    if n != len(tokens):
        return False
    for i in range(n):
        lit = mask[i]
        if lit is not None and lit != tokens[i]:
            return False
    return True


def literal_overlap(mask, tokens):
    cdef Py_ssize_t i, n = len(mask)
    cdef long count = 0
    if n != len(tokens):
        return -1
    for i in range(n):
        lit = mask[i]
        if lit is not None and lit == tokens[i]:
            count += 1
    return count


def generalize(mask, tokens):
    cdef Py_ssize_t i, n = len(mask)
    out = [None] * n
    for i in range(n):
        lit = mask[i]
        if lit is not None and lit == tokens[i]:
            out[i] = lit
    return out


def walk(root, tokens):
    cdef Py_ssize_t n = len(tokens)
    cdef Py_ssize_t depth
    cdef dict children
    found = set()
    stack = [(root, 0)]
    while stack:
        node, depth = stack.pop()
        if depth == n:
            found.update(node.cluster_refs)
            continue
        children = node.children
        nxt = children.get(tokens[depth])
        if nxt is not None:
            stack.append((nxt, depth + 1))
        nxt = children.get(None)
        if nxt is not None:
            stack.append((nxt, depth + 1))
    return found


def fnv1a_64(str text):
    cdef bytes data = text.encode("utf-8")
    cdef const unsigned char[:] view = data
    cdef uint64_t h = 0xCBF29CE484222325ULL
    cdef Py_ssize_t i
    for i in range(len(data)):
        h ^= view[i]
        h *= 0x100000001B3ULL
    return h
