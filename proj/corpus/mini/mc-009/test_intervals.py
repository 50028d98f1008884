import sys

failures = 0


def check(name, got, want):
    global failures
    if got != want:
        print("FAIL %s: got %r, want %r" % (name, got, want))
        failures += 1

from intervals import merge_intervals

check("test_contained", merge_intervals([[1, 10], [2, 3]]), [[1, 10]])
check("test_unsorted", merge_intervals([[5, 6], [1, 2]]), [[1, 2], [5, 6]])
check("test_chain", merge_intervals([[1, 3], [2, 4], [4, 5]]), [[1, 5]])
sys.exit(1 if failures else 0)
