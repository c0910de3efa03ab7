"""Ordered parallel map."""

import time

from bloch_wco.utils import parallel_map


def test_parallel_map_keeps_input_order():
    def slow_square(n):
        time.sleep(0.01 * (5 - n))
        return n * n

    assert parallel_map(slow_square, range(5), workers=4) == [0, 1, 4, 9, 16]
    assert parallel_map(slow_square, range(5), workers=1) == [0, 1, 4, 9, 16]
    assert parallel_map(slow_square, [], workers=4) == []
