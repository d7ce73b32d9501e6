#include "shiftlab/series.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace shiftlab {

void CoeffVec::set(long n, cplx v) {
  if (c.empty()) {
    n_lo = n;
    c.push_back(v);
    return;
  }
  if (n < n_lo) {
    c.insert(c.begin(), static_cast<size_t>(n_lo - n), cplx(0.0));
    n_lo = n;
  } else if (n > n_hi()) {
    c.resize(static_cast<size_t>(n - n_lo + 1), cplx(0.0));
  }
  c[static_cast<size_t>(n - n_lo)] = v;
}

CoeffVec CoeffVec::trimmed(double tol) const {
  long lo = n_lo, hi = n_hi();
  while (lo < hi && std::abs(at(lo)) <= tol) ++lo;
  while (hi > lo && std::abs(at(hi)) <= tol) --hi;
  std::vector<cplx> out;
  out.reserve(static_cast<size_t>(hi - lo + 1));
  for (long n = lo; n <= hi; ++n) out.push_back(at(n));
  return CoeffVec(lo, std::move(out));
}

CoeffVec CoeffVec::scaled(cplx a) const {
  CoeffVec out(*this);
  for (auto& v : out.c) v *= a;
  return out;
}

CoeffVec CoeffVec::plus_part() const {
  if (n_hi() < 0) return CoeffVec(0, {});
  const long lo = std::max<long>(n_lo, 0);
  std::vector<cplx> out(c.begin() + (lo - n_lo), c.end());
  return CoeffVec(lo, std::move(out));
}

CoeffVec CoeffVec::minus_part() const {
  if (n_lo >= 0) return CoeffVec(-1, {});
  const long hi = std::min<long>(n_hi(), -1);
  std::vector<cplx> out(c.begin(), c.begin() + (hi - n_lo + 1));
  return CoeffVec(n_lo, std::move(out));
}

double CoeffVec::max_abs() const {
  double m = 0.0;
  for (const auto& v : c) m = std::max(m, std::abs(v));
  return m;
}

double CoeffVec::l2_dist(const CoeffVec& other) const {
  const long lo = std::min(n_lo, other.n_lo);
  const long hi = std::max(n_hi(), other.n_hi());
  double s = 0.0;
  for (long n = lo; n <= hi; ++n) s += std::norm(at(n) - other.at(n));
  return std::sqrt(s);
}

CoeffVec CoeffVec::from_json(const nlohmann::json& j) {
  CoeffVec f;
  f.n_lo = j.at("n_lo").get<long>();
  for (const auto& pair : j.at("coeffs")) {
    if (!pair.is_array() || pair.size() != 2)
      throw std::invalid_argument("coeffs entries must be [re, im] pairs");
    f.c.emplace_back(pair[0].get<double>(), pair[1].get<double>());
  }
  if (f.c.empty()) f.c.push_back(cplx(0.0));
  return f;
}

nlohmann::json CoeffVec::to_json() const {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& v : c) coeffs.push_back({v.real(), v.imag()});
  return nlohmann::json{{"n_lo", n_lo}, {"coeffs", coeffs}};
}

Hyperfunction::Hyperfunction(CoeffVec p, CoeffVec m)
    : plus(std::move(p)), minus(std::move(m)) {
  if (!plus.c.empty() && plus.n_lo < 0)
    throw std::invalid_argument("plus part must live on Z+");
  if (!minus.c.empty() && minus.n_hi() >= 0)
    throw std::invalid_argument("minus part must vanish at infinity (window in Z-)");
}

CoeffVec Hyperfunction::merged() const {
  if (minus.c.empty()) return plus;
  CoeffVec out(minus.n_lo, minus.c);
  for (long n = minus.n_hi() + 1; n < plus.n_lo; ++n) out.c.push_back(cplx(0.0));
  // gap between minus.n_hi and plus.n_lo is zero-filled
  for (const auto& v : plus.c) out.c.push_back(v);
  return out;
}

Hyperfunction Hyperfunction::from_coeffs(const CoeffVec& c) {
  return Hyperfunction(c.plus_part(), c.minus_part());
}

Hyperfunction Hyperfunction::from_json(const nlohmann::json& j) {
  if (j.contains("plus") || j.contains("minus")) {
    Hyperfunction f;
    if (j.contains("plus")) f.plus = CoeffVec::from_json(j.at("plus"));
    if (j.contains("minus")) f.minus = CoeffVec::from_json(j.at("minus"));
    return Hyperfunction(f.plus, f.minus);
  }
  return from_coeffs(CoeffVec::from_json(j));
}

nlohmann::json Hyperfunction::to_json() const {
  return nlohmann::json{{"plus", plus.to_json()}, {"minus", minus.to_json()}};
}

CoeffVec add(const CoeffVec& a, const CoeffVec& b) {
  const long lo = std::min(a.n_lo, b.n_lo);
  const long hi = std::max(a.n_hi(), b.n_hi());
  std::vector<cplx> out;
  out.reserve(static_cast<size_t>(hi - lo + 1));
  for (long n = lo; n <= hi; ++n) out.push_back(a.at(n) + b.at(n));
  return CoeffVec(lo, std::move(out));
}

CoeffVec sub(const CoeffVec& a, const CoeffVec& b) {
  return add(a, b.scaled(cplx(-1.0)));
}

cplx eval(const CoeffVec& f, cplx z) {
  // Horner on the nonnegative part, plus Horner in 1/z on the negative part.
  cplx pos(0.0);
  for (long n = f.n_hi(); n >= std::max<long>(f.n_lo, 0); --n)
    pos = pos * z + f.at(n);
  if (f.n_lo >= 0) {
    for (long k = 0; k < f.n_lo; ++k) pos *= z;
    return pos;
  }
  if (z == cplx(0.0))
    throw std::invalid_argument("Laurent window with negative indices at z=0");
  const cplx w = cplx(1.0) / z;
  const long hi = std::min<long>(f.n_hi(), -1);
  cplx neg(0.0);
  for (long n = f.n_lo; n <= hi; ++n) neg = (neg + f.at(n)) * w;
  // the loop yields sum c(n) w^{hi-n+1}; shift to w^{-n}
  for (long k = 0; k < -hi - 1; ++k) neg *= w;
  return pos + neg;
}

cplx eval(const Hyperfunction& f, cplx z) {
  const double az = std::abs(z);
  if (std::abs(az - 1.0) <= 1e-12)
    throw std::invalid_argument("circle evaluation undefined for hyperfunctions");
  if (az < 1.0) return eval(f.plus, z);
  return f.minus.c.empty() ? cplx(0.0) : eval(f.minus, z);
}

cplx pair_with(const Hyperfunction& f, const CoeffVec& h) {
  cplx s(0.0);
  for (long n = h.n_lo; n <= h.n_hi(); ++n) {
    const long m = -n - 1;  // f index paired with h index n
    s += f.at(m) * h.at(n);
  }
  return s;
}

CoeffVec convolve(const CoeffVec& a, const CoeffVec& b) {
  const long lo = a.n_lo + b.n_lo;
  std::vector<cplx> out(a.c.size() + b.c.size() - 1, cplx(0.0));
  for (size_t i = 0; i < a.c.size(); ++i)
    for (size_t j = 0; j < b.c.size(); ++j) out[i + j] += a.c[i] * b.c[j];
  return CoeffVec(lo, std::move(out));
}

void fft(std::vector<cplx>& a, bool inverse) {
  const size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft size must be a power of two");
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) *
                       (inverse ? 1.0 : -1.0);
    const cplx wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      cplx w(1.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const cplx u = a[i + k], v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (auto& x : a) x /= static_cast<double>(n);
}

namespace {
std::vector<cplx> sample_callable(const std::function<cplx(cplx)>& f, double r,
                                  size_t K) {
  std::vector<cplx> out(K);
  for (size_t k = 0; k < K; ++k) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(k) /
                      static_cast<double>(K);
    out[k] = f(r * cplx(std::cos(th), std::sin(th)));
  }
  return out;
}
}  // namespace

std::vector<cplx> circle_samples(const CoeffVec& f, double r, size_t K) {
  if (K == 0 || (K & (K - 1)) != 0)
    throw std::invalid_argument("sample count must be a power of two");
  return sample_callable([&](cplx z) { return eval(f, z); }, r, K);
}

std::vector<cplx> circle_samples(const Hyperfunction& f, double r, size_t K) {
  if (K == 0 || (K & (K - 1)) != 0)
    throw std::invalid_argument("sample count must be a power of two");
  return sample_callable([&](cplx z) { return eval(f, z); }, r, K);
}

CoeffVec circle_coeffs(const std::vector<cplx>& samples, double r, long n_lo,
                       long n_hi, double alias_tol) {
  const size_t K = samples.size();
  if (K == 0 || (K & (K - 1)) != 0)
    throw std::invalid_argument("sample count must be a power of two");
  if (n_hi - n_lo + 1 > static_cast<long>(K))
    throw std::invalid_argument("window longer than sample count");
  std::vector<cplx> bins(samples);
  fft(bins, false);
  for (auto& b : bins) b /= static_cast<double>(K);
  // bin j holds sum of c(n) r^n over n = j mod K; map window indices to bins.
  std::vector<bool> used(K, false);
  std::vector<cplx> out(static_cast<size_t>(n_hi - n_lo + 1));
  for (long n = n_lo; n <= n_hi; ++n) {
    const size_t j = static_cast<size_t>(((n % static_cast<long>(K)) +
                                          static_cast<long>(K)) %
                                         static_cast<long>(K));
    used[j] = true;
    out[static_cast<size_t>(n - n_lo)] = bins[j] * std::pow(r, -static_cast<double>(n));
  }
  double in_band = 0.0, out_band = 0.0;
  for (size_t j = 0; j < K; ++j)
    (used[j] ? in_band : out_band) += std::norm(bins[j]);
  if (out_band > alias_tol * std::max(in_band, 1e-300))
    throw std::runtime_error("aliasing: out-of-band energy above tolerance");
  return CoeffVec(n_lo, std::move(out));
}

CauchyBound cauchy_coeff_bound(const CoeffVec& f, double r, long n,
                               size_t samples) {
  if (f.n_lo < 0) throw std::invalid_argument("cauchy bound needs a Z+ window");
  if (!(r > 0.0 && r < 1.0))
    throw std::invalid_argument("cauchy bound needs 0 < r < 1");
  double m_r = 0.0;
  for (size_t k = 0; k < samples; ++k) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(k) /
                      static_cast<double>(samples);
    m_r = std::max(m_r, std::abs(eval(f, r * cplx(std::cos(th), std::sin(th)))));
  }
  CauchyBound b;
  b.bound = std::pow(r, -static_cast<double>(n)) * m_r;
  b.satisfied = std::abs(f.at(n)) <= b.bound * (1.0 + 1e-9) + 1e-300;
  return b;
}

}  // namespace shiftlab
