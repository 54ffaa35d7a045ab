#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "akcy/errors.hpp"

namespace akcy {

/// Uniform periodic grid on the 4-torus R^4 / (L0 Z x L1 Z x L2 Z x L3 Z).
/// Storage order for all fields is C order with axis 0 slowest.
struct GridSpec {
    std::array<int, 4> dims{16, 16, 16, 16};
    std::array<double, 4> periods{2 * M_PI, 2 * M_PI, 2 * M_PI, 2 * M_PI};

    GridSpec() = default;
    GridSpec(std::array<int, 4> d, std::array<double, 4> p) : dims(d), periods(p) { validate(); }

    void validate() const {
        std::int64_t total = 1;
        for (int a = 0; a < 4; ++a) {
            if (dims[a] < 4 || dims[a] % 2 != 0)
                fail(ErrorCode::ValidationError,
                     "grid dims must be even and >= 4 (axis " + std::to_string(a) + " has " +
                         std::to_string(dims[a]) + ")");
            if (!(periods[a] > 0.0))
                fail(ErrorCode::ValidationError, "grid periods must be positive");
            total *= dims[a];
            if (total > std::numeric_limits<std::int32_t>::max())
                fail(ErrorCode::ValidationError, "grid point count exceeds addressable range");
        }
    }

    std::size_t points() const {
        return std::size_t(dims[0]) * dims[1] * dims[2] * dims[3];
    }
    double spacing(int axis) const { return periods[axis] / dims[axis]; }
    /// Volume of one grid cell in coordinate measure.
    double cell_volume() const {
        return spacing(0) * spacing(1) * spacing(2) * spacing(3);
    }
    /// Coordinate of grid node i along an axis.
    double coord(int axis, int i) const { return periods[axis] * i / dims[axis]; }

    std::size_t index(int i0, int i1, int i2, int i3) const {
        return ((std::size_t(i0) * dims[1] + i1) * dims[2] + i2) * dims[3] + i3;
    }

    bool operator==(const GridSpec& o) const { return dims == o.dims && periods == o.periods; }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

/// Multi-component field over a grid: `ncomp` contiguous scalar blocks.
template <int NComp>
struct FieldN {
    static constexpr int ncomp = NComp;

    GridSpec grid;
    std::vector<double> data; // ncomp blocks of grid.points() doubles

    FieldN() = default;
    explicit FieldN(const GridSpec& g) : grid(g), data(g.points() * NComp, 0.0) {}

    double* comp(int c) { return data.data() + std::size_t(c) * grid.points(); }
    const double* comp(int c) const { return data.data() + std::size_t(c) * grid.points(); }

    double& at(int c, std::size_t p) { return data[std::size_t(c) * grid.points() + p]; }
    double at(int c, std::size_t p) const { return data[std::size_t(c) * grid.points() + p]; }
};

/// Scalar function on the grid (houses potentials and right-hand sides).
struct ScalarField : FieldN<1> {
    using FieldN<1>::FieldN;
    double& operator[](std::size_t p) { return data[p]; }
    double operator[](std::size_t p) const { return data[p]; }
};

/// Real 1-form, coefficients in the coordinate cobasis dx^0..dx^3.
struct OneForm : FieldN<4> {
    using FieldN<4>::FieldN;
};

/// Real 2-form in the ordered basis dx^a ^ dx^b, a<b:
/// components (01, 02, 03, 12, 13, 23).
struct TwoForm : FieldN<6> {
    using FieldN<6>::FieldN;
};

/// Real 3-form, components in the ordered basis (012, 013, 023, 123).
struct ThreeForm : FieldN<4> {
    using FieldN<4>::FieldN;
};

/// Top-degree form: density relative to dx^0 ^ dx^1 ^ dx^2 ^ dx^3.
struct FourForm : FieldN<1> {
    using FieldN<1>::FieldN;
    double& operator[](std::size_t p) { return data[p]; }
    double operator[](std::size_t p) const { return data[p]; }
};

/// Field of 4x4 matrices, row-major blocks: comp(4*a + b) = entry (a,b).
struct MatrixField : FieldN<16> {
    using FieldN<16>::FieldN;
    double& at_ab(int a, int b, std::size_t p) { return at(4 * a + b, p); }
    double at_ab(int a, int b, std::size_t p) const { return at(4 * a + b, p); }
};

// Index maps for the fixed 2-form / 3-form component orderings.
inline constexpr int kTwoFormPairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
inline constexpr int kThreeFormTriples[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};

/// Component slot of dx^a ^ dx^b (a != b) together with its sign.
inline int two_form_slot(int a, int b, double& sign) {
    if (a < b) {
        sign = 1.0;
    } else {
        std::swap(a, b);
        sign = -1.0;
    }
    static constexpr int slot[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
    return slot[a][b];
}

// --- small field utilities -------------------------------------------------

template <int N>
void require_same_grid(const FieldN<N>& x, const GridSpec& g, const char* who) {
    if (x.grid != g) fail(ErrorCode::GridMismatch, std::string(who) + ": fields live on different grids");
}

template <int N, int M>
void require_same_grid(const FieldN<N>& x, const FieldN<M>& y, const char* who) {
    require_same_grid(x, y.grid, who);
}

template <int N>
bool all_finite(const FieldN<N>& x) {
    for (double v : x.data)
        if (!std::isfinite(v)) return false;
    return true;
}

template <int N>
void require_finite(const FieldN<N>& x, const char* who) {
    if (!all_finite(x)) fail(ErrorCode::InvalidField, std::string(who) + ": non-finite values in input");
}

template <int N>
double max_abs(const FieldN<N>& x) {
    double m = 0.0;
    for (double v : x.data) m = std::max(m, std::abs(v));
    return m;
}

template <int N>
FieldN<N>& axpy(FieldN<N>& y, double a, const FieldN<N>& x) {
    require_same_grid(y, x, "axpy");
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += a * x.data[i];
    return y;
}

template <int N>
FieldN<N>& scale(FieldN<N>& y, double a) {
    for (double& v : y.data) v *= a;
    return y;
}

inline double mean(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.data) s += v;
    return s / double(f.grid.points());
}

inline void subtract_mean(ScalarField& f) {
    double m = mean(f);
    for (double& v : f.data) v -= m;
}

} // namespace akcy
