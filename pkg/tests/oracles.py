"""Independent reference models used by the tests.

The end-space oracle represents a countable compact space as a sorted tuple
of clusters: "pt" is an isolated point, ("lim", S) is one point approached by
infinitely many disjoint copies of the space S.  The derived set is computed
directly on this nested structure, with no ordinal arithmetic.
"""
from fractions import Fraction

PT = "pt"


def _canon(clusters):
    return tuple(sorted(clusters, key=repr))


def block(e):
    """omega^e + 1 for finite e."""
    return PT if e == 0 else ("lim", _canon([block(e - 1)]))


def space_of_cnf(terms):
    """[0, gamma) for gamma = sum w^e * c with finite exponents, gamma a successor.

    ``terms`` is a list of (e, c) with decreasing finite e and last e == 0.
    """
    infinite = [(e, c) for e, c in terms if e > 0]
    finite = sum(c for e, c in terms if e == 0)
    out = []
    for e, c in infinite:
        out.extend([block(e)] * c)
    out.extend([PT] * (finite - 1 if infinite else finite))
    return _canon(out)


def derived(space):
    out = []
    for cl in space:
        if cl == PT:
            continue
        inner = derived(cl[1])
        out.append(("lim", inner) if inner else PT)
    return _canon(out)


def is_finite(space):
    return all(cl == PT for cl in space)


# -- two-plane slit complex, developed by hand -----------------------------------
# Planes A and B each carry the slit (0,0)-(1,0); the two slits are glued.
# Entries: (plane, start, direction, max_length, expected segments, termination).

F = Fraction
HAND_RAYS = [
    ("A", (F(1, 2), F(-1)), (0, 1), 3,
     [("A", (F(1, 2), F(-1)), (F(1, 2), F(0))), ("B", (F(1, 2), F(0)), (F(1, 2), F(2)))], "length_bound"),
    ("A", (F(2), F(-1)), (0, 1), 3,
     [("A", (F(2), F(-1)), (F(2), F(2)))], "length_bound"),
    ("A", (F(-1), F(-1)), (1, 1), 5,
     [("A", (F(-1), F(-1)), (F(0), F(0)))], "cone_point"),
    ("A", (F(1, 2), F(1)), (0, -1), 3,
     [("A", (F(1, 2), F(1)), (F(1, 2), F(0))), ("B", (F(1, 2), F(0)), (F(1, 2), F(-2)))], "length_bound"),
    ("B", (F(0), F(-1, 2)), (3, 4), F(5, 4),
     [("B", (F(0), F(-1, 2)), (F(3, 8), F(0))), ("A", (F(3, 8), F(0)), (F(3, 4), F(1, 2)))], "length_bound"),
    ("A", (F(-1), F(0)), (1, 0), 5,
     [("A", (F(-1), F(0)), (F(0), F(0)))], "cone_point"),
    ("A", (F(2), F(0)), (-1, 0), 5,
     [("A", (F(2), F(0)), (F(1), F(0)))], "cone_point"),
    ("A", (F(1, 2), F(-1)), (3, 4), 5,
     [("A", (F(1, 2), F(-1)), (F(7, 2), F(3)))], "length_bound"),
    ("A", (F(1), F(1)), (0, -1), 5,
     [("A", (F(1), F(1)), (F(1), F(0)))], "cone_point"),
    ("B", (F(1), F(1)), (-3, -4), F(5, 2),
     [("B", (F(1), F(1)), (F(1, 4), F(0))), ("A", (F(1, 4), F(0)), (F(-1, 2), F(-1)))], "length_bound"),
]
