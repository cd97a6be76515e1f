#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace swirl {

struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct construction_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;

// C1 ramp used for mesh-density blending and spectral cutoffs.
inline double smoothstep(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return x * x * (3.0 - 2.0 * x);
}

inline double sqr(double x) { return x * x; }

// Shortest decimal string that round-trips to the same double.
inline std::string fmt_double(double x) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v{};
    auto first = s.data();
    auto last = s.data() + s.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{}) throw config_error("invalid number: '" + s + "'");
    return v;
}

// Cubic Lagrange weights for 4 equispaced nodes at offsets {-1,0,1,2} from
// the base node; s in [0,1] is the fractional position past the base node.
inline std::array<double, 4> lagrange4_weights(double s) {
    const double s2 = s * s, s3 = s2 * s;
    return {
        -s3 / 6.0 + s2 / 2.0 - s / 3.0,
        s3 / 2.0 - s2 - s / 2.0 + 1.0,
        -s3 / 2.0 + s2 / 2.0 + s,
        s3 / 6.0 - s / 6.0,
    };
}

// Golden-section maximization of f on [a,b], refined to ~tol in x.
template <class F>
double golden_max(F&& f, double a, double b, double tol = 1e-13, int max_iter = 200) {
    const double gr = 0.6180339887498949;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Safeguarded Newton root find for monotone F on [lo,hi]; |F| <= ftol on exit.
template <class F, class DF>
double newton_bisect(F&& func, DF&& dfunc, double lo, double hi, double ftol = 1e-13,
                     int max_iter = 100) {
    double flo = func(lo), fhi = func(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) throw numerical_error("newton_bisect: root not bracketed");
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        double fx = func(x);
        if (std::abs(fx) <= ftol) return x;
        if ((fx < 0.0) == (flo < 0.0)) {
            lo = x;
        } else {
            hi = x;
        }
        double dfx = dfunc(x);
        double step = dfx != 0.0 ? fx / dfx : 0.0;
        double xn = x - step;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        x = xn;
    }
    return x;
}

inline std::uint32_t crc32(const void* data, std::size_t len, std::uint32_t seed = 0) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t c = seed ^ 0xFFFFFFFFu;
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) c = table[(c ^ p[i]) & 0xFFu] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a64_doubles(const std::vector<double>& v, std::uint64_t h = 1469598103934665603ull) {
    return v.empty() ? h : fnv1a64(v.data(), v.size() * sizeof(double), h);
}

}  // namespace swirl
