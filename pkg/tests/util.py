"""Independent brute-force oracles used to pin expected values.

These deliberately avoid the package's arithmetic: weight sets are
enumerated element by element under the nested-sharing convention, so
containment, weight counts, and shared counts can all be checked against
literal set operations.
"""

from regnas import Architecture, SearchSpaceDef
from regnas.space import input_channels


def weight_elements(space: SearchSpaceDef, a: Architecture) -> frozenset:
    """Every individual weight as (stage, slot, dy, dx, c_in, c_out).

    Kernels share their centered window, channels their leading slice, so a
    weight is identified by its kernel offset and channel indices.
    """
    elems = set()
    for s in range(space.n_stages):
        for j in range(a.depths[s]):
            k = a.kernels[s][j]
            half = k // 2
            cin = input_channels(space, a, s, j)
            cout = a.widths[s][j]
            for dy in range(-half, half + 1):
                for dx in range(-half, half + 1):
                    for ci in range(cin):
                        for co in range(cout):
                            elems.add((s, j, dy, dx, ci, co))
    return frozenset(elems)


def arch_from_seed(space: SearchSpaceDef, seed: int) -> Architecture:
    from regnas import random_sample

    return random_sample(space, seed)
