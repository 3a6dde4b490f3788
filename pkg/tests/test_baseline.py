import pytest

from crossclone.baseline import (
    NormNode,
    ast_type3_clones,
    normalize,
    tree_edit_distance,
    tree_size,
    type3_equal,
)
from crossclone.errors import ConfigError
from crossclone.model import PYTHON, TYPESCRIPT
from crossclone.segmenter import parse_functions, segment


def whole_body(src, language=PYTHON):
    for unit in parse_functions(src, language):
        for s in segment(unit, 2):
            if s.is_whole_body:
                return s
    raise AssertionError("no whole-body snippet")


def leaf(label):
    return NormNode(label)


# --- tree edit distance oracle ------------------------------------------------


def test_ted_identical_is_zero():
    t = NormNode("a", (leaf("b"), NormNode("c", (leaf("d"),))))
    assert tree_edit_distance(t, t) == 0


def test_ted_single_relabel():
    t1 = NormNode("a", (leaf("b"), leaf("c")))
    t2 = NormNode("a", (leaf("b"), leaf("x")))
    assert tree_edit_distance(t1, t2) == 1


def test_ted_single_insert_delete():
    t1 = NormNode("a", (leaf("b"),))
    t2 = NormNode("a", (leaf("b"), leaf("c")))
    assert tree_edit_distance(t1, t2) == 1
    assert tree_edit_distance(t2, t1) == 1


def test_ted_known_two():
    t1 = NormNode("a", (leaf("b"), leaf("c")))
    t2 = NormNode("a", (leaf("x"), leaf("y")))
    assert tree_edit_distance(t1, t2) == 2


def test_ted_symmetric_random():
    import random

    rng = random.Random(5)

    def rand_tree(depth=0):
        label = rng.choice("abcd")
        if depth >= 3 or rng.random() < 0.4:
            return leaf(label)
        return NormNode(
            label, tuple(rand_tree(depth + 1) for _ in range(rng.randint(1, 3)))
        )

    for _ in range(25):
        t1, t2 = rand_tree(), rand_tree()
        d12 = tree_edit_distance(t1, t2)
        assert d12 == tree_edit_distance(t2, t1)
        assert d12 <= tree_size(t1) + tree_size(t2)
        assert d12 >= abs(tree_size(t1) - tree_size(t2))


# --- normalization ---------------------------------------------------------------


def test_renamed_variable_twins_cluster():
    a = whole_body("def f(a):\n    x = a + 1\n    return x\n")
    b = whole_body("def g(value):\n    res = value + 1\n    return res\n")
    assert normalize(a) == normalize(b)
    clusters = ast_type3_clones([a, b])
    assert len(clusters) == 1 and len(clusters[0]) == 2


def test_different_literals_still_type2_cluster():
    a = whole_body("def f(a):\n    x = a + 1\n    return x\n")
    b = whole_body("def g(a):\n    x = a + 999\n    return x\n")
    assert normalize(a) == normalize(b)


def test_two_node_difference_not_clustered():
    a = whole_body("def f(a):\n    x = a + 1\n    return x\n")
    b = whole_body("def g(a):\n    x = a + 1 + 2 + 3\n    return x\n")
    assert not type3_equal(normalize(a), normalize(b))
    assert ast_type3_clones([a, b]) == []


SUM_LOOP = """\
def func_db8e(a):
    n = len(a)
    sum0 = [0] * (n + 1)
    for i in range(n):
        sum0[i + 1] = sum0[i] + a[i]
    allv = sum0[-1]
    return allv
"""

SUM_BUILTIN = """\
def func_43df(items):
    _sum = sum(items)
    j = len(items) - 1
    return _sum
"""


def test_behavioral_pair_is_not_type3():
    a = whole_body(SUM_LOOP)
    b = whole_body(SUM_BUILTIN)
    assert tree_edit_distance(normalize(a), normalize(b)) > 1
    assert ast_type3_clones([a, b]) == []


def test_static_language_normalization():
    src1 = """\
type int = number;
export function f(a: int): int {
    let x: int = a + 1;
    return x;
}
"""
    src2 = """\
type int = number;
export function g(v: int): int {
    let out: int = v + 7;
    return out;
}
"""
    a = whole_body(src1, TYPESCRIPT)
    b = whole_body(src2, TYPESCRIPT)
    assert normalize(a) == normalize(b)
    assert len(ast_type3_clones([a, b])) == 1


def test_cross_language_rejected():
    a = whole_body("def f(a):\n    x = a + 1\n    return x\n")
    b = whole_body(
        "export function f(a: number): number { let x = a + 1; return x; }",
        TYPESCRIPT,
    )
    with pytest.raises(ConfigError):
        ast_type3_clones([a, b])
