# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled aggregation kernels (hot lane).

Mirrors ``_support_py`` exactly: method-major accumulation, ascending-label
emission, stable descending-score ranking with label-index tie-break, and
max-subtracted softmax summed in rank order. Any change here must keep the
two lanes bit-identical; the test suite enforces that.
"""

from libc.math cimport exp

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


def support_scores(
    double[::1] weights,
    long long[::1] cell_starts,
    int[::1] cell_labels,
    Py_ssize_t n_images,
    Py_ssize_t n_labels,
):
    """Weighted support per (image, label), sparse over predicted labels."""
    cdef Py_ssize_t n_methods = weights.shape[0]
    cdef Py_ssize_t total = cell_labels.shape[0]

    sup_ptr_arr = np.zeros(n_images + 1, dtype=np.int64)
    out_labels_arr = np.empty(total, dtype=np.int32)
    out_scores_arr = np.empty(total, dtype=np.float64)
    acc_arr = np.zeros(n_labels, dtype=np.float64)
    touched_arr = np.zeros(n_labels, dtype=np.uint8)

    cdef long long[::1] sup_ptr = sup_ptr_arr
    cdef int[::1] out_labels = out_labels_arr
    cdef double[::1] out_scores = out_scores_arr
    cdef double[::1] acc = acc_arr
    cdef unsigned char[::1] touched = touched_arr

    cdef Py_ssize_t j, i, p, lbl, base, start, stop
    cdef Py_ssize_t nnz = 0
    cdef double w

    for j in range(n_images):
        base = j * n_methods
        for i in range(n_methods):
            w = weights[i]
            start = <Py_ssize_t> cell_starts[base + i]
            stop = <Py_ssize_t> cell_starts[base + i + 1]
            for p in range(start, stop):
                lbl = <Py_ssize_t> cell_labels[p]
                acc[lbl] += w
                touched[lbl] = 1
        for lbl in range(n_labels):
            if touched[lbl]:
                out_labels[nnz] = <int> lbl
                out_scores[nnz] = acc[lbl]
                nnz += 1
                acc[lbl] = 0.0
                touched[lbl] = 0
        sup_ptr[j + 1] = nnz

    return sup_ptr_arr, out_labels_arr[:nnz].copy(), out_scores_arr[:nnz].copy()


def filter_topk_softmax(
    long long[::1] sup_ptr,
    int[::1] sup_labels,
    double[::1] sup_scores,
    double cutoff,
    Py_ssize_t top_k,
):
    """Threshold, rank, truncate, and softmax-normalize per image."""
    cdef Py_ssize_t n_images = sup_ptr.shape[0] - 1
    cdef Py_ssize_t total = sup_labels.shape[0]

    kept_ptr_arr = np.zeros(n_images + 1, dtype=np.int64)
    out_labels_arr = np.empty(total, dtype=np.int32)
    out_scores_arr = np.empty(total, dtype=np.float64)
    out_like_arr = np.empty(total, dtype=np.float64)
    cand_labels_arr = np.empty(total, dtype=np.int32)
    cand_scores_arr = np.empty(total, dtype=np.float64)

    cdef long long[::1] kept_ptr = kept_ptr_arr
    cdef int[::1] out_labels = out_labels_arr
    cdef double[::1] out_scores = out_scores_arr
    cdef double[::1] out_like = out_like_arr
    cdef int[::1] cand_labels = cand_labels_arr
    cdef double[::1] cand_scores = cand_scores_arr

    cdef Py_ssize_t j, p, q, n_cand, n_keep, start, stop, out = 0
    cdef double s, peak, denom, e
    cdef int lbl

    for j in range(n_images):
        start = <Py_ssize_t> sup_ptr[j]
        stop = <Py_ssize_t> sup_ptr[j + 1]
        n_cand = 0
        for p in range(start, stop):
            s = sup_scores[p]
            if s >= cutoff:
                cand_labels[n_cand] = sup_labels[p]
                cand_scores[n_cand] = s
                n_cand += 1
        # stable insertion sort, descending score; input is ascending by
        # label index, so equal scores stay label-ordered
        for p in range(1, n_cand):
            s = cand_scores[p]
            lbl = cand_labels[p]
            q = p - 1
            while q >= 0 and cand_scores[q] < s:
                cand_scores[q + 1] = cand_scores[q]
                cand_labels[q + 1] = cand_labels[q]
                q -= 1
            cand_scores[q + 1] = s
            cand_labels[q + 1] = lbl
        n_keep = n_cand if n_cand < top_k else top_k
        if n_keep > 0:
            peak = cand_scores[0]
            denom = 0.0
            for p in range(n_keep):
                denom += exp(cand_scores[p] - peak)
            for p in range(n_keep):
                e = exp(cand_scores[p] - peak)
                out_labels[out] = cand_labels[p]
                out_scores[out] = cand_scores[p]
                out_like[out] = e / denom
                out += 1
        kept_ptr[j + 1] = out

    return (
        kept_ptr_arr,
        out_labels_arr[:out].copy(),
        out_scores_arr[:out].copy(),
        out_like_arr[:out].copy(),
    )
