#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>

namespace bergman {

using cplx = std::complex<double>;

/// Largest supported complex dimension. Desk-scale work uses n <= 3.
inline constexpr int kMaxDim = 8;

/// Fixed-capacity complex n-vector with value semantics and no heap traffic.
class CVector {
public:
    CVector() = default;

    explicit CVector(int dim) : dim_(check_dim(dim)) {}

    CVector(std::initializer_list<cplx> values) : dim_(check_dim(static_cast<int>(values.size()))) {
        int k = 0;
        for (const auto& v : values) data_[k++] = v;
    }

    explicit CVector(std::span<const cplx> values) : dim_(check_dim(static_cast<int>(values.size()))) {
        for (int k = 0; k < dim_; ++k) data_[k] = values[k];
    }

    static CVector basis(int dim, int k) {
        CVector e(dim);
        e[k] = 1.0;
        return e;
    }

    int dim() const { return dim_; }

    cplx& operator[](int k) { return data_[k]; }
    const cplx& operator[](int k) const { return data_[k]; }

    std::span<const cplx> span() const { return {data_.data(), static_cast<std::size_t>(dim_)}; }
    const cplx* begin() const { return data_.data(); }
    const cplx* end() const { return data_.data() + dim_; }

    double norm_sq() const {
        double s = 0.0;
        for (int k = 0; k < dim_; ++k) s += std::norm(data_[k]);
        return s;
    }
    double norm() const { return std::sqrt(norm_sq()); }

    CVector& operator+=(const CVector& o) {
        for (int k = 0; k < dim_; ++k) data_[k] += o.data_[k];
        return *this;
    }
    CVector& operator-=(const CVector& o) {
        for (int k = 0; k < dim_; ++k) data_[k] -= o.data_[k];
        return *this;
    }
    CVector& operator*=(cplx s) {
        for (int k = 0; k < dim_; ++k) data_[k] *= s;
        return *this;
    }
    CVector& operator*=(double s) {
        for (int k = 0; k < dim_; ++k) data_[k] *= s;
        return *this;
    }

    friend CVector operator+(CVector a, const CVector& b) { return a += b; }
    friend CVector operator-(CVector a, const CVector& b) { return a -= b; }
    friend CVector operator-(CVector a) { return a *= -1.0; }
    friend CVector operator*(cplx s, CVector a) { return a *= s; }
    friend CVector operator*(double s, CVector a) { return a *= s; }

    friend bool operator==(const CVector& a, const CVector& b) {
        if (a.dim_ != b.dim_) return false;
        for (int k = 0; k < a.dim_; ++k)
            if (a.data_[k] != b.data_[k]) return false;
        return true;
    }

private:
    static int check_dim(int dim) {
        if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension must be in [1, 8]");
        return dim;
    }

    std::array<cplx, kMaxDim> data_{};
    int dim_ = 0;
};

}  // namespace bergman
