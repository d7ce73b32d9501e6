#ifndef SHIFTLAB_SERIES_HPP
#define SHIFTLAB_SERIES_HPP

#include <complex>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace shiftlab {

using cplx = std::complex<double>;

/// Dense coefficient window of a Laurent series: c(n) for n in [n_lo, n_hi].
struct CoeffVec {
  long n_lo = 0;
  std::vector<cplx> c;

  CoeffVec() = default;
  CoeffVec(long lo, std::vector<cplx> coeffs) : n_lo(lo), c(std::move(coeffs)) {}

  static CoeffVec zero() { return CoeffVec(0, {cplx(0.0)}); }
  static CoeffVec delta(long n, cplx v = cplx(1.0)) { return CoeffVec(n, {v}); }

  long n_hi() const { return n_lo + static_cast<long>(c.size()) - 1; }
  long size() const { return static_cast<long>(c.size()); }
  bool empty_window() const { return c.empty(); }

  cplx at(long n) const {
    if (n < n_lo || n > n_hi()) return cplx(0.0);
    return c[static_cast<size_t>(n - n_lo)];
  }
  void set(long n, cplx v);  // grows the window as needed

  /// Drops zero coefficients at both window ends (keeps at least one entry).
  CoeffVec trimmed(double tol = 0.0) const;
  CoeffVec scaled(cplx a) const;
  CoeffVec shifted(long k) const { return CoeffVec(n_lo + k, c); }
  CoeffVec plus_part() const;   // indices >= 0
  CoeffVec minus_part() const;  // indices <= -1

  double max_abs() const;
  double l2_dist(const CoeffVec& other) const;

  static CoeffVec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

CoeffVec add(const CoeffVec& a, const CoeffVec& b);
CoeffVec sub(const CoeffVec& a, const CoeffVec& b);

/// Pair (f+, f-): f+ holomorphic on the disc, f- off the closed disc and
/// vanishing at infinity.
struct Hyperfunction {
  CoeffVec plus;   // window in Z+
  CoeffVec minus;  // window in Z-, empty allowed

  Hyperfunction() : plus(CoeffVec::zero()), minus(-1, {}) {}
  Hyperfunction(CoeffVec p, CoeffVec m);

  /// Merged coefficient view c(n) over both windows.
  cplx at(long n) const { return n >= 0 ? plus.at(n) : minus.at(n); }
  CoeffVec merged() const;
  static Hyperfunction from_coeffs(const CoeffVec& c);

  static Hyperfunction from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Horner evaluation; |z| < 1 uses the plus part, |z| > 1 the minus part.
/// Throws on |z| = 1 (up to 1e-12).
cplx eval(const Hyperfunction& f, cplx z);
cplx eval(const CoeffVec& f, cplx z);  // full Laurent window at z != 0

/// <f, h> = sum_n fhat(n) hhat(-n-1); bilinear, no conjugation.
cplx pair_with(const Hyperfunction& f, const CoeffVec& h);

/// Exact Cauchy product on finite windows.
CoeffVec convolve(const CoeffVec& a, const CoeffVec& b);

/// In-place radix-2 FFT (size must be a power of two); inverse divides by n.
void fft(std::vector<cplx>& a, bool inverse);

/// Samples f(r e^{i 2 pi k / K}) for k = 0..K-1; K a power of two.
std::vector<cplx> circle_samples(const CoeffVec& f, double r, size_t K);
std::vector<cplx> circle_samples(const Hyperfunction& f, double r, size_t K);

/// Recovers coefficients on [n_lo, n_hi] from circle samples at radius r:
/// c(n) = r^{-n} (DFT bin). Requires n_hi - n_lo + 1 <= K; the energy in
/// bins outside the window must stay below alias_tol relative, else throws.
CoeffVec circle_coeffs(const std::vector<cplx>& samples, double r, long n_lo,
                       long n_hi, double alias_tol = 1e-9);

struct CauchyBound {
  double bound = 0.0;   // r^{-n} max_{|z|=r} |f(z)|
  bool satisfied = true;
};

/// |fhat(n)| <= r^{-n} M_r for f holomorphic on the disc, 0 < r < 1.
CauchyBound cauchy_coeff_bound(const CoeffVec& f, double r, long n,
                               size_t samples = 4096);

}  // namespace shiftlab

#endif
