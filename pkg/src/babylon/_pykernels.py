"""Pure-Python token kernels.

A mask is a sequence where a string is a literal token and ``None`` is a
wildcard. Tree nodes are any objects exposing ``children`` (dict keyed by
token text, ``None`` for the wildcard branch) and ``cluster_refs`` (set).
"""

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def loose_match(mask, tokens):
    if len(mask) != len(tokens):
        return False
    for lit, tok in zip(mask, tokens):
        if lit is not None and lit != tok:
            return False
    return True


def literal_overlap(mask, tokens):
    """Number of literal positions equal to the token at that position."""
    if len(mask) != len(tokens):
        return -1
    n = 0
    for lit, tok in zip(mask, tokens):
        if lit is not None and lit == tok:
            n += 1
    return n


def generalize(mask, tokens):
    return [lit if lit is not None and lit == tok else None for lit, tok in zip(mask, tokens)]


def walk(root, tokens):
    """Cluster ids referenced at every node reached by consuming all tokens."""
    found = set()
    n = len(tokens)
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


def fnv1a_64(text):
    h = FNV_OFFSET
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * FNV_PRIME) & _MASK64
    return h
