# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled pivot kernel; same arithmetic as ``_pykernel.pivot``."""


def pivot(double[:, ::1] T, Py_ssize_t r, Py_ssize_t q):
    cdef Py_ssize_t i, j
    cdef Py_ssize_t nrow = T.shape[0]
    cdef Py_ssize_t ncol = T.shape[1]
    cdef double p = T[r, q]
    cdef double f
    for j in range(ncol):
        T[r, j] = T[r, j] / p
    for i in range(nrow):
        if i == r:
            continue
        f = T[i, q]
        if f == 0.0:
            continue
        for j in range(ncol):
            T[i, j] = T[i, j] - f * T[r, j]
