// Copyright (c) 2026 trimodal authors
// SPDX-License-Identifier: Apache-2.0
//
// Independent reference computations used by the test suites. Everything here
// works on plain std::vector<double> and long double accumulators, with no
// dependency on the library's tape or op implementations.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;

// Plain triple-loop matrix product.
inline Mat matmul(const Mat& a, const Mat& b) {
    std::size_t m = a.size(), k = b.size(), n = b[0].size();
    Mat c(m, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t l = 0; l < k; ++l) c[i][j] += a[i][l] * b[l][j];
    return c;
}

// exp-normalize at extended precision.
inline std::vector<double> softmax(const std::vector<double>& x) {
    long double mx = x[0];
    for (double v : x) mx = std::max<long double>(mx, v);
    long double denom = 0.0L;
    std::vector<long double> e(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        e[i] = std::exp(static_cast<long double>(x[i]) - mx);
        denom += e[i];
    }
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = static_cast<double>(e[i] / denom);
    return out;
}

// Softmax cross-entropy over given logits (negative log-prob of the label).
inline double softmax_cross_entropy(const std::vector<double>& logits, std::size_t label) {
    long double mx = logits[0];
    for (double v : logits) mx = std::max<long double>(mx, v);
    long double denom = 0.0L;
    for (double v : logits) denom += std::exp(static_cast<long double>(v) - mx);
    long double logp = static_cast<long double>(logits[label]) - mx - std::log(denom);
    return static_cast<double>(-logp);
}

// k-th central moments per coordinate, direct summation.
inline std::vector<double> central_moment(const Mat& x, int k) {
    std::size_t n = x.size(), d = x[0].size();
    std::vector<long double> mean(d, 0.0L);
    for (const auto& row : x)
        for (std::size_t c = 0; c < d; ++c) mean[c] += row[c];
    for (auto& v : mean) v /= static_cast<long double>(n);
    std::vector<long double> mom(d, 0.0L);
    for (const auto& row : x)
        for (std::size_t c = 0; c < d; ++c) {
            long double delta = row[c] - mean[c];
            long double p = 1.0L;
            for (int i = 0; i < k; ++i) p *= delta;
            mom[c] += p;
        }
    std::vector<double> out(d);
    for (std::size_t c = 0; c < d; ++c) out[c] = static_cast<double>(mom[c] / n);
    return out;
}

inline double l2_of_difference(const std::vector<double>& a, const std::vector<double>& b) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
        long double d = static_cast<long double>(a[i]) - b[i];
        s += d * d;
    }
    return static_cast<double>(std::sqrt(s));
}

// CMD by direct per-coordinate moment summation. Mean term normalized by
// |b - a|, moment k by |b - a|^k.
inline double cmd(const Mat& x, const Mat& y, int order, double lo, double hi) {
    double span = std::fabs(hi - lo);
    auto mean = [](const Mat& m) {
        std::size_t d = m[0].size();
        std::vector<double> out(d, 0.0);
        for (const auto& row : m)
            for (std::size_t c = 0; c < d; ++c) out[c] += row[c];
        for (auto& v : out) v /= static_cast<double>(m.size());
        return out;
    };
    double total = l2_of_difference(mean(x), mean(y)) / span;
    double scale = span;
    for (int k = 2; k <= order; ++k) {
        scale *= span;
        total += l2_of_difference(central_moment(x, k), central_moment(y, k)) / scale;
    }
    return total;
}

// Term-by-term Jensen-Shannon divergence, natural log, 0 log(0/x) == 0.
inline double jsd(const std::vector<double>& p, const std::vector<double>& q) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < p.size(); ++i) {
        long double m = 0.5L * (static_cast<long double>(p[i]) + q[i]);
        if (p[i] > 0.0) s += 0.5L * p[i] * std::log(static_cast<long double>(p[i]) / m);
        if (q[i] > 0.0) s += 0.5L * q[i] * std::log(static_cast<long double>(q[i]) / m);
    }
    return static_cast<double>(s);
}

inline double mean_of(const std::vector<double>& v) {
    long double s = 0.0L;
    for (double x : v) s += x;
    return static_cast<double>(s / static_cast<long double>(v.size()));
}

// Pearson correlation, direct formula.
inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    double ma = mean_of(a), mb = mean_of(b);
    long double num = 0.0L, da = 0.0L, db = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma) * (a[i] - ma);
        db += (b[i] - mb) * (b[i] - mb);
    }
    if (da == 0.0L || db == 0.0L) return 0.0;
    return static_cast<double>(num / std::sqrt(da * db));
}

inline double mae(const std::vector<double>& pred, const std::vector<double>& label) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < pred.size(); ++i) s += std::fabs(pred[i] - label[i]);
    return static_cast<double>(s / static_cast<long double>(pred.size()));
}

// Accuracy over paired class assignments.
inline double accuracy(const std::vector<int>& pred, const std::vector<int>& label) {
    if (pred.empty()) return 0.0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == label[i]) ++hit;
    return static_cast<double>(hit) / static_cast<double>(pred.size());
}

// Support-weighted mean of per-class F1, brute force over class ids.
inline double weighted_f1(const std::vector<int>& pred, const std::vector<int>& label,
                          const std::vector<int>& classes) {
    double total = 0.0;
    for (int cls : classes) {
        std::size_t tp = 0, fp = 0, fn = 0, support = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            if (label[i] == cls) ++support;
            if (pred[i] == cls && label[i] == cls) ++tp;
            if (pred[i] == cls && label[i] != cls) ++fp;
            if (pred[i] != cls && label[i] == cls) ++fn;
        }
        double f1 = 0.0;
        if (2 * tp + fp + fn > 0) {
            f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
        }
        total += f1 * static_cast<double>(support) / static_cast<double>(pred.size());
    }
    return total;
}

// Least-squares linear probe fit on a train slice, Pearson measured on the
// rest. Normal equations with a small ridge, Gaussian elimination.
inline double probe_holdout_pearson(const Mat& features, const std::vector<double>& targets,
                                    double train_fraction = 0.7, double ridge = 1e-3) {
    std::size_t n = features.size(), d = features[0].size();
    std::size_t ntr = static_cast<std::size_t>(static_cast<double>(n) * train_fraction);
    std::size_t dim = d + 1;  // bias column
    std::vector<std::vector<long double>> ata(dim, std::vector<long double>(dim, 0.0L));
    std::vector<long double> atb(dim, 0.0L);
    for (std::size_t i = 0; i < ntr; ++i) {
        std::vector<long double> row(dim);
        for (std::size_t c = 0; c < d; ++c) row[c] = features[i][c];
        row[d] = 1.0L;
        for (std::size_t a = 0; a < dim; ++a) {
            for (std::size_t b = 0; b < dim; ++b) ata[a][b] += row[a] * row[b];
            atb[a] += row[a] * targets[i];
        }
    }
    for (std::size_t a = 0; a < dim; ++a) ata[a][a] += ridge;
    // Gaussian elimination with partial pivoting.
    for (std::size_t col = 0; col < dim; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < dim; ++r)
            if (std::fabs(static_cast<double>(ata[r][col])) >
                std::fabs(static_cast<double>(ata[piv][col])))
                piv = r;
        std::swap(ata[piv], ata[col]);
        std::swap(atb[piv], atb[col]);
        for (std::size_t r = 0; r < dim; ++r) {
            if (r == col || ata[col][col] == 0.0L) continue;
            long double factor = ata[r][col] / ata[col][col];
            for (std::size_t c = col; c < dim; ++c) ata[r][c] -= factor * ata[col][c];
            atb[r] -= factor * atb[col];
        }
    }
    std::vector<double> w(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i)
        if (ata[i][i] != 0.0L) w[i] = static_cast<double>(atb[i] / ata[i][i]);
    std::vector<double> pred, truth;
    for (std::size_t i = ntr; i < n; ++i) {
        double y = w[d];
        for (std::size_t c = 0; c < d; ++c) y += w[c] * features[i][c];
        pred.push_back(y);
        truth.push_back(targets[i]);
    }
    return pearson(pred, truth);
}

}  // namespace oracle
