#cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: per-bin period sampling and the classical collector.

Pulls raw doubles from the NumPy bit generator exposed by the caller, in
the same order as the pure-Python backend, so results are bit-identical
across backends for a given seed.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.stdlib cimport calloc, free
from numpy.random cimport bitgen_t

BACKEND = "compiled"


cdef bitgen_t *_bitgen(bit_generator) except NULL:
    return <bitgen_t *> PyCapsule_GetPointer(bit_generator.capsule, "BitGenerator")


def period_chunk_counts(bit_generator, double[::1] thresholds,
                        unsigned char[::1] is_missing, Py_ssize_t m,
                        Py_ssize_t count):
    """Simulate `count` periods of per-bin Bernoulli clicks.

    Returns (accepted, correct); see the Python backend for semantics.
    """
    cdef bitgen_t *rng = _bitgen(bit_generator)
    cdef Py_ssize_t n = thresholds.shape[0]
    cdef Py_ssize_t period, j, total, miss_hits
    cdef long long accepted = 0, correct = 0
    cdef double u
    with nogil:
        for period in range(count):
            total = 0
            miss_hits = 0
            for j in range(n):
                u = rng.next_double(rng.state)
                if u < thresholds[j]:
                    total += 1
                    if is_missing[j]:
                        miss_hits += 1
            if total == m:
                accepted += 1
                if miss_hits == m:
                    correct += 1
    return int(accepted), int(correct)


def collector_run(bit_generator, Py_ssize_t k, long long max_draws=0):
    """Uniform draws with replacement until all k coupons are seen.

    Returns the draw count, or -1 when `max_draws` > 0 and collection is
    incomplete at that budget.
    """
    cdef bitgen_t *rng = _bitgen(bit_generator)
    cdef unsigned char *seen = <unsigned char *> calloc(k, 1)
    if seen == NULL:
        raise MemoryError()
    cdef Py_ssize_t found = 0, idx
    cdef long long draws = 0
    cdef long long result = -1
    cdef double u
    try:
        with nogil:
            while max_draws <= 0 or draws < max_draws:
                u = rng.next_double(rng.state)
                draws += 1
                idx = <Py_ssize_t> (u * k)
                if idx >= k:
                    idx = k - 1
                if seen[idx] == 0:
                    seen[idx] = 1
                    found += 1
                    if found == k:
                        result = draws
                        break
        return int(result)
    finally:
        free(seen)
