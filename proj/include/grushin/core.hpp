#ifndef GRUSHIN_CORE_HPP
#define GRUSHIN_CORE_HPP

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace grushin
{

using complex = std::complex<double>;

inline constexpr int max_dim = 4;
inline constexpr double pi = std::numbers::pi;

/// Thrown when an operation is asked to run outside the hypotheses under which
/// its result is meaningful (divergent integrals, exceeded caps, ...).
class refusal : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical self-check fails (tail energy, support leakage, ...).
class numerical_failure : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Fixed-capacity vector for multi-indices and coordinate tuples (dimension <= 4).
template <typename T>
class small_vec
{
public:
    using value_type = T;

    small_vec() = default;

    explicit small_vec(int dim, T fill = T{}) : dim_(dim)
    {
        if (dim < 0 || dim > max_dim) {
            throw std::invalid_argument("small_vec: dimension out of range");
        }
        data_.fill(T{});
        for (int i = 0; i < dim; ++i) {
            data_[i] = fill;
        }
    }

    small_vec(std::initializer_list<T> init) : dim_(static_cast<int>(init.size()))
    {
        if (dim_ > max_dim) {
            throw std::invalid_argument("small_vec: dimension out of range");
        }
        data_.fill(T{});
        std::copy(init.begin(), init.end(), data_.begin());
    }

    static small_vec from(std::span<const T> values)
    {
        small_vec v(static_cast<int>(values.size()));
        std::copy(values.begin(), values.end(), v.data_.begin());
        return v;
    }

    static small_vec unit(int dim, int axis, T scale = T{1})
    {
        small_vec v(dim);
        v[axis] = scale;
        return v;
    }

    int size() const { return dim_; }
    T& operator[](int i) { return data_[i]; }
    const T& operator[](int i) const { return data_[i]; }
    T* begin() { return data_.data(); }
    T* end() { return data_.data() + dim_; }
    const T* begin() const { return data_.data(); }
    const T* end() const { return data_.data() + dim_; }
    std::span<const T> span() const { return {data_.data(), static_cast<std::size_t>(dim_)}; }

    small_vec& operator+=(const small_vec& o)
    {
        for (int i = 0; i < dim_; ++i) data_[i] += o.data_[i];
        return *this;
    }
    small_vec& operator-=(const small_vec& o)
    {
        for (int i = 0; i < dim_; ++i) data_[i] -= o.data_[i];
        return *this;
    }
    small_vec& operator*=(T s)
    {
        for (int i = 0; i < dim_; ++i) data_[i] *= s;
        return *this;
    }
    friend small_vec operator+(small_vec a, const small_vec& b) { return a += b; }
    friend small_vec operator-(small_vec a, const small_vec& b) { return a -= b; }
    friend small_vec operator*(T s, small_vec a) { return a *= s; }
    friend small_vec operator-(small_vec a)
    {
        for (int i = 0; i < a.dim_; ++i) a.data_[i] = -a.data_[i];
        return a;
    }

    friend bool operator==(const small_vec& a, const small_vec& b)
    {
        return a.dim_ == b.dim_ && std::equal(a.begin(), a.end(), b.begin());
    }
    friend auto operator<=>(const small_vec& a, const small_vec& b)
    {
        if (auto c = a.dim_ <=> b.dim_; c != 0) return c;
        return std::lexicographical_compare_three_way(a.begin(), a.end(), b.begin(), b.end());
    }

private:
    std::array<T, max_dim> data_{};
    int dim_ = 0;
};

/// Element of Z^d: Hermite indices, shifts, multi-exponents.
using multi_index = small_vec<int>;
using real_vec = small_vec<double>;

inline int norm1(const multi_index& m)
{
    int s = 0;
    for (int v : m) s += std::abs(v);
    return s;
}

inline double norm1(const real_vec& v)
{
    double s = 0;
    for (double x : v) s += std::abs(x);
    return s;
}

inline double norm2(std::span<const double> v)
{
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double norm2(const real_vec& v) { return norm2(v.span()); }

inline double norm_inf(std::span<const double> v)
{
    double s = 0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

/// Componentwise a <= b.
inline bool leq(const multi_index& a, const multi_index& b)
{
    for (int i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
    }
    return true;
}

inline bool nonnegative(const multi_index& m)
{
    return std::all_of(m.begin(), m.end(), [](int v) { return v >= 0; });
}

/// Calls f(idx) for every multi-index lo <= idx <= hi (inclusive), last axis fastest.
template <typename F>
void for_each_in_box(const multi_index& lo, const multi_index& hi, F&& f)
{
    const int d = lo.size();
    for (int i = 0; i < d; ++i) {
        if (lo[i] > hi[i]) return;
    }
    multi_index idx = lo;
    while (true) {
        f(static_cast<const multi_index&>(idx));
        int axis = d - 1;
        while (axis >= 0) {
            if (++idx[axis] <= hi[axis]) break;
            idx[axis] = lo[axis];
            --axis;
        }
        if (axis < 0) break;
    }
}

inline std::uint64_t binomial(int n, int k)
{
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    }
    return r;
}

/// Number of worker threads used by parallel loops. Results never depend on it.
inline unsigned& worker_count()
{
    static unsigned n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

/// Runs body(i) for i in [0, n). Each index is processed exactly once and writes
/// only its own slot, so results are independent of the schedule.
template <typename Body>
void parallel_for(std::size_t n, Body&& body)
{
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

/// Pairwise summation with a fixed reduction tree.
template <typename T>
T pairwise_sum(std::span<const T> v)
{
    if (v.size() <= 8) {
        T s{};
        for (const T& x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// Exact rational with 64-bit parts, always normalized (den > 0, gcd 1).
class rational
{
public:
    rational() = default;
    rational(std::int64_t n) : num_(n), den_(1) {}
    rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalize(); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    bool is_zero() const { return num_ == 0; }

    friend rational operator+(const rational& a, const rational& b)
    {
        return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
    }
    friend rational operator-(const rational& a, const rational& b)
    {
        return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
    }
    friend rational operator*(const rational& a, const rational& b)
    {
        return {a.num_ * b.num_, a.den_ * b.den_};
    }
    friend rational operator-(const rational& a) { return {-a.num_, a.den_}; }
    friend bool operator==(const rational&, const rational&) = default;

    std::string str() const
    {
        return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
    }

private:
    void normalize()
    {
        if (den_ == 0) throw std::domain_error("rational: zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// Uniform grid helper: n points from lo to hi inclusive.
inline std::vector<double> linspace(double lo, double hi, int n)
{
    std::vector<double> v(static_cast<std::size_t>(n));
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (int i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    }
    return v;
}

/// Log-spaced grid with `per_decade` points per factor of ten.
inline std::vector<double> logspace(double lo, double hi, int per_decade)
{
    const double decades = std::log10(hi / lo);
    const int n = std::max(2, static_cast<int>(std::ceil(decades * per_decade)) + 1);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = lo * std::pow(10.0, decades * i / (n - 1));
    }
    return v;
}

} // namespace grushin

#endif // GRUSHIN_CORE_HPP
