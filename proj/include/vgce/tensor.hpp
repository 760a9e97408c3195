#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace vgce {

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dense row-major matrix of doubles. All in-memory arithmetic is 64-bit;
// 32-bit floats appear only in the on-disk formats.
struct Tensor2D {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Tensor2D() = default;
    Tensor2D(int r, int c) : rows(r), cols(c) {
        if (r < 0 || c < 0) throw error("Tensor2D: negative shape");
        data.assign(static_cast<size_t>(r) * c, 0.0);
    }

    static Tensor2D zeros(int r, int c) { return Tensor2D(r, c); }

    static Tensor2D full(int r, int c, double v) {
        Tensor2D t(r, c);
        std::fill(t.data.begin(), t.data.end(), v);
        return t;
    }

    static Tensor2D scalar(double v) {
        Tensor2D t(1, 1);
        t.data[0] = v;
        return t;
    }

    // Row vector from a literal list.
    static Tensor2D row(std::initializer_list<double> v) {
        Tensor2D t(1, static_cast<int>(v.size()));
        std::copy(v.begin(), v.end(), t.data.begin());
        return t;
    }

    static Tensor2D from_rows(int r, int c, std::initializer_list<double> v) {
        if (static_cast<size_t>(r) * c != v.size())
            throw error("Tensor2D::from_rows: size mismatch");
        Tensor2D t(r, c);
        std::copy(v.begin(), v.end(), t.data.begin());
        return t;
    }

    double& at(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    double at(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

    size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    bool same_shape(const Tensor2D& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    double scalar_value() const {
        if (rows != 1 || cols != 1) throw error("Tensor2D: not a scalar");
        return data[0];
    }
};

inline std::string shape_str(const Tensor2D& t) {
    return std::to_string(t.rows) + "x" + std::to_string(t.cols);
}

// c = a * b
inline Tensor2D matmul_value(const Tensor2D& a, const Tensor2D& b) {
    if (a.cols != b.rows)
        throw error("matmul: shape mismatch " + shape_str(a) + " * " + shape_str(b));
    Tensor2D c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = &a.data[static_cast<size_t>(i) * a.cols];
        double* crow = &c.data[static_cast<size_t>(i) * b.cols];
        for (int k = 0; k < a.cols; ++k) {
            const double av = arow[k];
            if (av == 0.0) continue;
            const double* brow = &b.data[static_cast<size_t>(k) * b.cols];
            for (int j = 0; j < b.cols; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

// c = a * b^T
inline Tensor2D matmul_nt_value(const Tensor2D& a, const Tensor2D& b) {
    if (a.cols != b.cols)
        throw error("matmul_nt: shape mismatch " + shape_str(a) + " * " + shape_str(b) + "^T");
    Tensor2D c(a.rows, b.rows);
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = &a.data[static_cast<size_t>(i) * a.cols];
        for (int j = 0; j < b.rows; ++j) {
            const double* brow = &b.data[static_cast<size_t>(j) * b.cols];
            double s = 0.0;
            for (int k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
            c.at(i, j) = s;
        }
    }
    return c;
}

// c = a^T * b
inline Tensor2D matmul_tn_value(const Tensor2D& a, const Tensor2D& b) {
    if (a.rows != b.rows)
        throw error("matmul_tn: shape mismatch " + shape_str(a) + "^T * " + shape_str(b));
    Tensor2D c(a.cols, b.cols);
    for (int k = 0; k < a.rows; ++k) {
        const double* arow = &a.data[static_cast<size_t>(k) * a.cols];
        const double* brow = &b.data[static_cast<size_t>(k) * b.cols];
        for (int i = 0; i < a.cols; ++i) {
            const double av = arow[i];
            if (av == 0.0) continue;
            double* crow = &c.data[static_cast<size_t>(i) * c.cols];
            for (int j = 0; j < b.cols; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

inline Tensor2D transpose_value(const Tensor2D& a) {
    Tensor2D t(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
    return t;
}

// Numerically stable scalar helpers shared by ops and oracles.
inline double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double softplus(double x) {
    // log(1 + e^x) without overflow
    return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

} // namespace vgce
