#include "sartts/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "sartts/errors.hpp"

namespace sartts {

namespace {

void check_finite(const std::vector<double>& d, const char* what) {
    for (double v : d) {
        if (!std::isfinite(v)) {
            throw ValidationError(std::string(what) + " contains a non-finite entry");
        }
    }
}

}  // namespace

Matrix::Matrix(std::size_t r, std::size_t c, double fill)
    : rows(r), cols(c), data(r * c, fill) {}

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> d)
    : rows(r), cols(c), data(std::move(d)) {
    if (data.size() != rows * cols) {
        throw DimensionError("matrix data length does not match rows*cols");
    }
    check_finite(data, "matrix");
}

Vector::Vector(std::size_t n, double fill) : dim(n), data(n, fill) {}

Vector::Vector(std::vector<double> d) : dim(d.size()), data(std::move(d)) {
    check_finite(data, "vector");
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw DimensionError("matmul: " + std::to_string(a.cols) + " != " +
                             std::to_string(b.rows));
    }
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) {
                out.at(i, j) += aik * b.at(k, j);
            }
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) out.at(j, i) = m.at(i, j);
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionError("add: shape mismatch");
    Matrix out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

Matrix scale(const Matrix& m, double s) {
    Matrix out = m;
    for (double& v : out.data) v *= s;
    return out;
}

Matrix softmax_rows(const Matrix& m) {
    if (m.rows == 0 || m.cols == 0) throw EmptyInputError("softmax_rows: empty matrix");
    Matrix out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        double mx = m.at(i, 0);
        for (std::size_t j = 1; j < m.cols; ++j) mx = std::max(mx, m.at(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) {
            const double e = std::exp(m.at(i, j) - mx);
            out.at(i, j) = e;
            sum += e;
        }
        for (std::size_t j = 0; j < m.cols; ++j) out.at(i, j) /= sum;
    }
    return out;
}

Vector mean_pool_rows(const Matrix& m) {
    if (m.rows == 0) throw EmptyInputError("mean_pool_rows: zero rows");
    Vector out(m.cols);
    for (std::size_t j = 0; j < m.cols; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.rows; ++i) s += m.at(i, j);
        out.data[j] = s / static_cast<double>(m.rows);
    }
    return out;
}

double norm(const Vector& v) {
    double s = 0.0;
    for (double x : v.data) s += x * x;
    return std::sqrt(s);
}

double dot(const Vector& a, const Vector& b) {
    if (a.dim != b.dim) throw DimensionError("dot: dim mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim; ++i) s += a.data[i] * b.data[i];
    return s;
}

double cosine_similarity(const Vector& a, const Vector& b) {
    if (a.dim != b.dim) throw DimensionError("cosine_similarity: dim mismatch");
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw ZeroNormError("cosine_similarity: zero-norm input");
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

std::uint64_t Rng::next_u64() {
    // splitmix64
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::uniform(double lo, double hi) {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

std::size_t Rng::below(std::size_t n) {
    return static_cast<std::size_t>(next_u64() % n);
}

}  // namespace sartts
