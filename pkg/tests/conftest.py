"""Shared test helpers: the random affine loop-nest generator."""

import random


def random_nest(rng: random.Random) -> str:
    """Random SSA loop nest: depth <= 3, bounds <= 16, integer data.

    Loads live in the innermost loop; with some probability a pointer
    descends through phi chains from outer levels (strided rows), which
    exercises multi-dimension stream patterns. Results reach memory
    through a streamed output pointer or a plain top-level store.
    """
    depth = rng.randint(1, 3)
    bounds = []
    total = 1
    for _ in range(depth):
        b = rng.randint(1, 16)
        while total * b > 1500:
            b = max(1, b // 2)
        bounds.append(b)
        total *= b
    n_loads = rng.randint(1, 3)
    out_stream = rng.random() < 0.5

    decls = [[] for _ in range(depth)]  # per-level value definitions
    for li in range(n_loads):
        base = 0x1000 + 0x400 * li
        chain = depth if (depth >= 2 and rng.random() < 0.4) else 1
        ptr = None
        for lev in range(depth - chain, depth):
            # stride shrinks toward the inner level to stay in range
            stride = 4 * rng.randint(1, 4) * (4 if lev < depth - 1 else 1)
            name = f"p{li}_{lev}"
            init = ptr if ptr is not None else base
            decls[lev].append(f"({name} (phi {init} (add {name} {stride})))")
            ptr = name
        decls[depth - 1].append(f"(v{li} (load {ptr}))")

    expr = "v0"
    for li in range(1, n_loads):
        op = rng.choice(["add", "xor", "mul"])
        expr = f"({op} {expr} v{li})"
    if rng.random() < 0.6:
        decls[depth - 1].append(f"(acc (phi 0 (add acc {expr})))")
        result = "acc"
    else:
        decls[depth - 1].append(f"(r (add {expr} 7))")
        result = "r"
    if out_stream:
        decls[depth - 1].append(f"(po (phi 0x2800 (add po 4)))")
        decls[depth - 1].append(f"(store po {result})")

    lines = []
    indent = ""
    for lev, b in enumerate(bounds):
        lines.append(f"{indent}(loop {b}")
        indent += "  "
        lines.extend(indent + d for d in decls[lev])
    for _ in range(depth):
        indent = indent[:-2]
        lines.append(f"{indent})")
    if not out_stream:
        lines.append(f"(store 0x3ffc {result})")
    return "\n".join(lines)
