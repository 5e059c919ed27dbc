import itertools

import pytest

from segal_cobar.ring_linear import QQ, FormalSum, square_zero_check
from segal_cobar.simplicial_chains import (
    aw_diagonal, aw_iterate, aw_product, boundary, chains, connection_max, connection_min,
    em_shuffle, format_simplex, interval_basis, nondegenerate_simplices, parse_simplex,
)


def fs(d):
    return FormalSum(QQ, d)


def test_boundary_examples():
    assert boundary((0, 1)) == fs({(1,): 1, (0,): -1})
    assert boundary((0,)).is_zero()
    assert boundary((0, 1, 2)) == fs({(1, 2): 1, (0, 2): -1, (0, 1): 1})


def test_chains_square_zero():
    for q in range(5):
        assert square_zero_check(chains(q)).ok


def test_aw_examples():
    assert aw_diagonal((0, 1)) == fs({((0,), (0, 1)): 1, ((0, 1), (1,)): 1})
    assert aw_diagonal((3,)) == fs({((3,), (3,)): 1})
    assert aw_diagonal((0, 1, 2)) == fs({((0,), (0, 1, 2)): 1, ((0, 1), (1, 2)): 1, ((0, 1, 2), (2,)): 1})


def test_em_examples():
    assert em_shuffle((0,), (0, 1)) == fs({((0, 0), (0, 1)): 1})
    assert em_shuffle((0, 1), (0,)) == fs({((0, 1), (0, 0)): 1})
    assert em_shuffle((0, 1), (0, 1)) == fs({((0, 1, 1), (0, 0, 1)): 1, ((0, 0, 1), (0, 1, 1)): -1})


def test_label_syntax():
    assert format_simplex((0, 1, 1)) == "d[0,1,1]"
    assert parse_simplex("d[0,1,1]") == (0, 1, 1)
    with pytest.raises(ValueError):
        parse_simplex("d[1,0]")


def _tensor_apply(f, x, slot):
    out = FormalSum(x.ring)
    for lab, c in x.terms.items():
        for y, cy in f(lab[slot]).terms.items():
            out.add_term(lab[:slot] + y + lab[slot + 1:], c * cy)
    return out


def test_aw_coassociative_up_to_dim_4():
    for q in range(5):
        for s in nondegenerate_simplices(q):
            d = aw_diagonal(s)
            left = _tensor_apply(aw_diagonal, d, 0)
            right = _tensor_apply(aw_diagonal, d, 1)
            assert left == right == aw_iterate(s, 3)


def _boundary_tensor(x):
    out = FormalSum(x.ring)
    for (a, b), c in x.terms.items():
        for y, cy in boundary(a).terms.items():
            out.add_term((y, b), c * cy)
        for y, cy in boundary(b).terms.items():
            out.add_term((a, y), c * cy * (-1) ** (len(a) - 1))
    return out


def _boundary_product(x):
    out = FormalSum(x.ring)
    for (a, b), c in x.terms.items():
        if len(a) == 1:
            continue
        for i in range(len(a)):
            face = (a[:i] + a[i + 1:], b[:i] + b[i + 1:])
            cols = list(zip(*face))
            if all(u != v for u, v in zip(cols, cols[1:])):
                out.add_term(face, c * (-1) ** i)
    return out


def test_aw_em_identity_and_chain_maps():
    for p, q in itertools.product(range(4), repeat=2):
        s, t = tuple(range(p + 1)), tuple(range(q + 1))
        e = em_shuffle(s, t)
        back = FormalSum(QQ)
        for lab, c in e.terms.items():
            back.add_scaled(aw_product(lab), c)
        assert back == fs({(s, t): 1})
        # EM is a chain map
        lhs = _boundary_product(e)
        rhs = FormalSum(QQ)
        for (a, b), c in _boundary_tensor(fs({(s, t): 1})).terms.items():
            rhs.add_scaled(em_shuffle(a, b), c)
        assert lhs == rhs


def test_connection_table():
    I = interval_basis()
    table = {(a, b): connection_min(a, b) for a in I for b in I}
    one, zero, e = (1,), (0,), (0, 1)
    assert table[(one, e)] == fs({e: 1})
    assert table[(e, one)] == fs({e: 1})
    assert table[(e, e)].is_zero()
    assert table[(zero, e)].is_zero() and table[(e, zero)].is_zero()
    assert table[(zero, zero)] == fs({zero: 1})
    assert table[(one, zero)] == fs({zero: 1}) and table[(zero, one)] == fs({zero: 1})
    assert table[(one, one)] == fs({one: 1})
    assert len(table) == 9
    assert connection_max(one, e).is_zero()
    assert connection_max(one, zero) == fs({one: 1}) and connection_max(one, one) == fs({one: 1})
