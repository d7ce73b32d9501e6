#include "shiftlab/hyperlab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "shiftlab/logdomain.hpp"

namespace shiftlab {

namespace {

cplx ipow(cplx z, long e) {
  if (e < 0) return cplx(1.0) / ipow(z, -e);
  cplx r(1.0), b = z;
  for (long k = e; k > 0; k >>= 1) {
    if (k & 1) r *= b;
    b *= b;
  }
  return r;
}

cplx integrate_cplx(const std::function<cplx(double)>& f, double a, double b,
                    double abs_tol = 1e-11, double rel_tol = 1e-10) {
  const double re = integrate([&](double t) { return f(t).real(); }, a, b,
                              abs_tol, rel_tol);
  const double im = integrate([&](double t) { return f(t).imag(); }, a, b,
                              abs_tol, rel_tol);
  return cplx(re, im);
}

}  // namespace

RadialProfile RadialProfile::from_function(std::function<double(double)> phi2) {
  RadialProfile p;
  p.fn_ = std::move(phi2);
  return p;
}

RadialProfile RadialProfile::from_panels(std::vector<Panel> panels) {
  RadialProfile p;
  for (const auto& pn : panels) {
    if (!(pn.a >= 0.0 && pn.b <= 1.0 && pn.a < pn.b) || pn.c < 0.0)
      throw std::invalid_argument("invalid radial panel");
  }
  p.panels_ = std::move(panels);
  return p;
}

RadialProfile RadialProfile::one() { return from_panels({{0.0, 1.0, 1.0}}); }

double RadialProfile::phi2(double t) const {
  if (!panels_.empty()) {
    double v = 0.0;
    for (const auto& pn : panels_)
      if (t >= pn.a && t <= pn.b) v += pn.c;
    return v;
  }
  return fn_(t);
}

double RadialProfile::m_n(long n, double s) const {
  if (n < 0) throw std::invalid_argument("moment index must be >= 0");
  s = std::clamp(s, 0.0, 1.0);
  if (s == 0.0) return 0.0;
  const double e = 2.0 * static_cast<double>(n) + 2.0;
  if (!panels_.empty()) {
    double acc = 0.0;
    for (const auto& pn : panels_) {
      const double hi = std::min(pn.b, s);
      if (hi <= pn.a) continue;
      acc += pn.c * 2.0 * (std::pow(hi, e) - std::pow(pn.a, e)) / e;
    }
    return acc;
  }
  return integrate(
      [&](double t) { return 2.0 * fn_(t) * std::pow(t, e - 1.0); }, 0.0, s,
      1e-14, 1e-11);
}

double RadialProfile::tau2(long n) const {
  auto it = tau_cache_.find(n);
  if (it != tau_cache_.end()) return it->second;
  const double v = m_n(n, 1.0);
  if (!(v > 0.0)) throw std::runtime_error("degenerate radial profile moment");
  tau_cache_.emplace(n, v);
  return v;
}

double tau_phi(const RadialProfile& phi, long n) {
  return std::sqrt(phi.tau2(n));
}

namespace {

// Lawson-Hanson nonnegative least squares: min ||A x - b||, x >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const long n = a.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<size_t>(n), false);
  const double tol = 1e-12 * a.norm();
  for (int outer = 0; outer < 8 * n; ++outer) {
    Eigen::VectorXd w = a.transpose() * (b - a * x);
    long best = -1;
    double best_w = tol;
    for (long j = 0; j < n; ++j)
      if (!passive[static_cast<size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    if (best < 0) break;
    passive[static_cast<size_t>(best)] = true;
    for (int inner = 0; inner < 8 * n; ++inner) {
      std::vector<long> idx;
      for (long j = 0; j < n; ++j)
        if (passive[static_cast<size_t>(j)]) idx.push_back(j);
      Eigen::MatrixXd ap(a.rows(), static_cast<long>(idx.size()));
      for (size_t j = 0; j < idx.size(); ++j) ap.col(static_cast<long>(j)) = a.col(idx[j]);
      Eigen::VectorXd z =
          ap.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
      bool all_pos = true;
      for (long j = 0; j < z.size(); ++j)
        if (z(j) <= 0.0) all_pos = false;
      if (all_pos) {
        x.setZero();
        for (size_t j = 0; j < idx.size(); ++j) x(idx[j]) = z(static_cast<long>(j));
        break;
      }
      // step back to the feasibility boundary and drop zeroed variables
      double alpha = 1.0;
      for (size_t j = 0; j < idx.size(); ++j) {
        const double xj = x(idx[j]), zj = z(static_cast<long>(j));
        if (zj <= 0.0 && xj - zj > 0.0)
          alpha = std::min(alpha, xj / (xj - zj));
      }
      for (size_t j = 0; j < idx.size(); ++j)
        x(idx[j]) += alpha * (z(static_cast<long>(j)) - x(idx[j]));
      for (long j = 0; j < n; ++j)
        if (passive[static_cast<size_t>(j)] && x(j) <= tol) {
          passive[static_cast<size_t>(j)] = false;
          x(j) = 0.0;
        }
    }
  }
  return x;
}

}  // namespace

PhiFit fit_phi(const Weight& target, const PhiFitConfig& cfg) {
  if (target.support() != Support::ZPlus)
    throw std::invalid_argument("fit_phi expects a Z+ weight (sigma*)");
  const auto rep = classify(target);
  auto it = rep.verdicts.find("eventually_log_convex");
  if (it != rep.verdicts.end() && it->second == Verdict::Fail)
    throw std::invalid_argument("target weight is not eventually log-convex");

  // panel dictionary refined toward t = 1
  const int J = std::max(4, cfg.panel_count);
  std::vector<RadialProfile::Panel> panels;
  std::vector<double> edges;
  for (int j = 0; j < J; ++j)
    edges.push_back(1.0 - std::pow(2.0, -8.0 * j / (J - 1)));
  edges[0] = 0.0;
  edges.push_back(1.0);
  for (int j = 0; j < J; ++j) panels.push_back({edges[j], edges[j + 1], 1.0});

  const long n_fit = std::min<long>(target.n_hi(), 48);
  Eigen::MatrixXd a(n_fit + 1, J);
  Eigen::VectorXd b = Eigen::VectorXd::Ones(n_fit + 1);
  for (long n = 0; n <= n_fit; ++n) {
    const double e = 2.0 * static_cast<double>(n) + 2.0;
    const double target2 = std::exp(2.0 * target.log_at(n));
    for (int j = 0; j < J; ++j)
      a(n, j) = 2.0 *
                (std::pow(panels[static_cast<size_t>(j)].b, e) -
                 std::pow(panels[static_cast<size_t>(j)].a, e)) /
                e / target2;
  }
  const Eigen::VectorXd c = nnls(a, b);
  std::vector<RadialProfile::Panel> fitted;
  for (int j = 0; j < J; ++j)
    if (c(j) > 0.0)
      fitted.push_back({panels[static_cast<size_t>(j)].a,
                        panels[static_cast<size_t>(j)].b, c(j)});
  if (fitted.empty())
    throw std::runtime_error("no equivalent profile found at this resolution");
  PhiFit out{RadialProfile::from_panels(fitted), 0.0, 0.0};
  out.ratio_inf = std::numeric_limits<double>::infinity();
  for (long n = 0; n <= n_fit; ++n) {
    const double ratio = tau_phi(out.phi, n) / std::exp(target.log_at(n));
    out.ratio_inf = std::min(out.ratio_inf, ratio);
    out.ratio_sup = std::max(out.ratio_sup, ratio);
  }
  if (!(out.ratio_inf > 0.0) || out.ratio_sup / out.ratio_inf > cfg.equiv_max)
    throw std::runtime_error("no equivalent profile found at this resolution");
  return out;
}

nlohmann::json PhiFit::to_json() const {
  nlohmann::json ps = nlohmann::json::array();
  if (phi.panels())
    for (const auto& pn : *phi.panels())
      ps.push_back({{"a", pn.a}, {"b", pn.b}, {"c", pn.c}});
  return nlohmann::json{
      {"panels", ps}, {"ratio_inf", ratio_inf}, {"ratio_sup", ratio_sup}};
}

DynkinValue dynkin_extend(const CoeffVec& h, const RadialProfile& phi,
                          cplx lambda) {
  const double al = std::abs(lambda);
  if (al >= 1.0) throw std::invalid_argument("dynkin_extend needs |lambda| < 1");
  DynkinValue out{cplx(0.0), cplx(0.0)};
  const cplx conj_l = std::conj(lambda);
  for (long n = 0;; ++n) {
    const long idx = -n - 1;
    if (idx < h.n_lo) break;
    const cplx hc = h.at(idx);
    if (hc == cplx(0.0)) continue;
    const double t2 = phi.tau2(n);
    out.density += hc / t2 * ipow(conj_l, n);
    if (lambda != cplx(0.0))
      out.d += hc * ipow(lambda, -n - 1) * phi.m_n(n, al) / t2;
  }
  out.density *= phi.phi2(al);
  return out;
}

cplx cauchy_mode(long m, const std::function<double(double)>& rho, cplx lambda) {
  const double s = std::min(std::abs(lambda), 1.0);
  if (m <= 0) {
    if (s == 0.0) return cplx(0.0);
    const cplx val = integrate_cplx(
        [&](double t) { return cplx(rho(t) * std::pow(t, 1.0 - m)); }, 0.0, s);
    return 2.0 * ipow(lambda, m - 1) * val;
  }
  if (s >= 1.0) return cplx(0.0);
  const cplx val = integrate_cplx(
      [&](double t) { return cplx(rho(t) * std::pow(t, 1.0 - m)); }, s, 1.0);
  return -2.0 * ipow(lambda, m - 1) * val;
}

cplx cauchy_transform(const std::function<cplx(cplx)>& density, cplx lambda,
                      size_t K) {
  if (K == 0 || (K & (K - 1)) != 0)
    throw std::invalid_argument("mode count must be a power of two");
  const double s = std::min(std::abs(lambda), 1.0);
  const auto modes_at = [&](double t) {
    std::vector<cplx> v(K);
    for (size_t k = 0; k < K; ++k) {
      const double th = 2.0 * std::numbers::pi * static_cast<double>(k) /
                        static_cast<double>(K);
      v[k] = density(t * cplx(std::cos(th), std::sin(th)));
    }
    fft(v, false);
    for (auto& x : v) x /= static_cast<double>(K);
    return v;  // v[j] = mode m: m = j (j < K/2) or j - K
  };
  const auto mode_of = [&](size_t j) {
    return j < K / 2 ? static_cast<long>(j)
                     : static_cast<long>(j) - static_cast<long>(K);
  };
  cplx result(0.0);
  if (s > 0.0) {
    result += 2.0 * integrate_cplx(
                        [&](double t) {
                          const auto v = modes_at(t);
                          cplx acc(0.0);
                          for (size_t j = 0; j < K; ++j) {
                            const long m = mode_of(j);
                            if (m > 0) continue;
                            acc += v[j] * std::pow(t, 1.0 - m) *
                                   ipow(lambda, m - 1);
                          }
                          return acc;
                        },
                        0.0, s, 1e-10, 1e-9);
  }
  if (s < 1.0) {
    result -= 2.0 * integrate_cplx(
                        [&](double t) {
                          const auto v = modes_at(t);
                          cplx acc(0.0);
                          for (size_t j = 0; j < K; ++j) {
                            const long m = mode_of(j);
                            if (m < 1) continue;
                            acc += v[j] * std::pow(t, 1.0 - m) *
                                   ipow(lambda, m - 1);
                          }
                          return acc;
                        },
                        s, 1.0, 1e-10, 1e-9);
  }
  return result;
}

cplx cauchy_minus_density(const CoeffVec& h, const RadialProfile& phi, cplx mu) {
  if (std::abs(mu) <= 1.0)
    throw std::invalid_argument("cauchy_minus_density needs |mu| > 1");
  cplx acc(0.0);
  for (long n = 0;; ++n) {
    const long idx = -n - 1;
    if (idx < h.n_lo) break;
    const cplx hc = h.at(idx);
    if (hc == cplx(0.0)) continue;
    const auto rho = [&, n](double t) {
      return phi.phi2(t) * std::pow(t, static_cast<double>(n));
    };
    acc += hc / phi.tau2(n) * cauchy_mode(-n, rho, mu);
  }
  return acc;
}

DbarBound dbar_bound_check(const CoeffVec& h, const RadialProfile& phi,
                           const Weight& sigma, double delta,
                           const std::vector<cplx>& grid) {
  if (sigma.support() != Support::ZMinus)
    throw std::invalid_argument("dbar_bound_check needs a Z- weight");
  DbarBound out;
  double log_h2 = kNegInf;
  for (long n = h.n_lo; n <= std::min<long>(h.n_hi(), -1); ++n) {
    const double a = std::abs(h.at(n));
    if (a > 0.0 && sigma.contains(n))
      log_h2 = log_add(log_h2, 2.0 * (std::log(a) + sigma.log_at(n)));
  }
  const double h_norm = std::exp(0.5 * log_h2);
  for (const cplx& lam : grid) {
    const double al = std::abs(lam);
    if (al >= 1.0 || al <= 0.0) continue;
    const DynkinValue dv = dynkin_extend(h, phi, lam);
    const double log_l = legendre(sigma, al).log_value;
    const double ratio =
        h_norm > 0.0
            ? std::abs(dv.density) * std::exp(delta * log_l) / h_norm
            : 0.0;
    out.table.emplace_back(al, ratio);
    out.k_delta = std::max(out.k_delta, ratio);
  }
  return out;
}

nlohmann::json DbarBound::to_json() const {
  nlohmann::json t = nlohmann::json::array();
  for (const auto& [r, ratio] : table) t.push_back({{"r", r}, {"ratio", ratio}});
  return nlohmann::json{{"k_delta", k_delta}, {"table", t}};
}

namespace {

// exp of a one-sided coefficient window via the derivative recurrence
// E_0 = exp(a_0), n E_n = sum_{k=1..n} k a_k E_{n-k}
std::vector<cplx> exp_series(const std::vector<cplx>& a, size_t len) {
  std::vector<cplx> e(len, cplx(0.0));
  e[0] = std::exp(a.empty() ? cplx(0.0) : a[0]);
  for (size_t n = 1; n < len; ++n) {
    cplx acc(0.0);
    for (size_t k = 1; k <= n && k < a.size(); ++k)
      acc += static_cast<double>(k) * a[k] * e[n - k];
    e[n] = acc / static_cast<double>(n);
  }
  return e;
}

}  // namespace

FactorizationResult annulus_factorize(const Hyperfunction& f, double r,
                                      size_t K, const FactorizeConfig& cfg) {
  if (!(r > 0.0 && r < 1.0))
    throw std::invalid_argument("annulus_factorize needs r in (0,1)");
  if (K == 0 || (K & (K - 1)) != 0)
    throw std::invalid_argument("sample count must be a power of two");
  const CoeffVec fc = f.merged();

  std::vector<cplx> samples;
  std::vector<double> jumps;
  for (;; K *= 2) {
    if (K > (1u << 20))
      throw std::runtime_error("branch tracking failed: phase jumps too large");
    samples = circle_samples(fc, r, K);
    double min_abs = std::numeric_limits<double>::infinity();
    for (const auto& v : samples) min_abs = std::min(min_abs, std::abs(v));
    if (min_abs < cfg.zero_margin)
      throw std::runtime_error("zeros on the factorization contour");
    jumps.assign(K, 0.0);
    double max_jump = 0.0;
    for (size_t k = 0; k < K; ++k) {
      jumps[k] = std::arg(samples[(k + 1) % K] / samples[k]);
      max_jump = std::max(max_jump, std::abs(jumps[k]));
    }
    if (max_jump < std::numbers::pi / 4.0) break;
  }
  double total = 0.0;
  for (double j : jumps) total += j;
  const double winding = total / (2.0 * std::numbers::pi);
  const long k = std::lround(-winding);
  FactorizationResult out;
  out.samples_used = K;
  out.winding_snap = std::abs(winding + static_cast<double>(k));
  if (out.winding_snap > cfg.snap_tol)
    throw std::runtime_error("winding number failed to snap to an integer");
  out.k = k;

  // branch-continuous log of zeta^k f on the contour
  std::vector<cplx> logs(K);
  double phase = std::arg(samples[0] * ipow(cplx(r, 0.0), k));
  for (size_t j = 0; j < K; ++j) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(j) /
                      static_cast<double>(K);
    const cplx z = r * cplx(std::cos(th), std::sin(th));
    const cplx q = samples[j] * ipow(z, k);
    if (j > 0) {
      const size_t prev = j - 1;
      const double thp = 2.0 * std::numbers::pi * static_cast<double>(prev) /
                         static_cast<double>(K);
      const cplx zp = r * cplx(std::cos(thp), std::sin(thp));
      phase += std::arg(q / (samples[prev] * ipow(zp, k)));
    }
    logs[j] = cplx(std::log(std::abs(q)), phase);
  }

  // Laurent coefficients of the log on |zeta| = r
  std::vector<cplx> bins(logs);
  fft(bins, false);
  for (auto& bj : bins) bj /= static_cast<double>(K);
  const auto coeff_at = [&](long n) {
    const long kk = static_cast<long>(K);
    const size_t j = static_cast<size_t>(((n % kk) + kk) % kk);
    return bins[j] * std::pow(r, -static_cast<double>(n));
  };
  const long hw = std::min<long>(cfg.h_window, static_cast<long>(K) / 2 - 1);
  const long gw = std::min<long>(cfg.g_window, static_cast<long>(K) / 2 - 1);
  std::vector<cplx> a_coeffs(static_cast<size_t>(gw) + 1);
  for (long n = 0; n <= gw; ++n) a_coeffs[static_cast<size_t>(n)] = coeff_at(n);
  std::vector<cplx> h_desc(static_cast<size_t>(hw) + 1, cplx(0.0));
  for (long n = 1; n <= hw; ++n) h_desc[static_cast<size_t>(n)] = coeff_at(-n);

  // g = exp(a) on Z+, h kept as the negative-index part
  const std::vector<cplx> g = exp_series(a_coeffs, a_coeffs.size());
  out.g = CoeffVec(0, g).trimmed(0.0);
  std::vector<cplx> h_rev(static_cast<size_t>(hw), cplx(0.0));
  for (long n = 1; n <= hw; ++n)
    h_rev[static_cast<size_t>(hw - n)] = h_desc[static_cast<size_t>(n)];
  out.h = hw > 0 ? CoeffVec(-hw, std::move(h_rev)).trimmed(0.0)
                 : CoeffVec(-1, {});

  // reconstruction residual on two circles
  const std::vector<cplx> eh = exp_series(h_desc, h_desc.size());  // in 1/zeta
  double f_scale = 0.0;
  for (const auto& v : samples) f_scale = std::max(f_scale, std::abs(v));
  for (double rr : {r, 0.5 * (1.0 + r)}) {
    for (size_t j = 0; j < 128; ++j) {
      const double th = 2.0 * std::numbers::pi * static_cast<double>(j) / 128.0;
      const cplx z = rr * cplx(std::cos(th), std::sin(th));
      const cplx w = cplx(1.0) / z;
      cplx ehz(0.0);
      for (size_t n = eh.size(); n-- > 0;) ehz = ehz * w + eh[n];
      const cplx recon = ipow(w, out.k) * ehz * eval(out.g, z);
      out.residual = std::max(
          out.residual, std::abs(eval(fc, z) - recon) / std::max(f_scale, 1.0));
    }
  }
  return out;
}

nlohmann::json FactorizationResult::to_json() const {
  return nlohmann::json{{"k", k},
                        {"h", h.to_json()},
                        {"g", g.to_json()},
                        {"residual", residual},
                        {"winding_snap", winding_snap},
                        {"samples_used", samples_used}};
}

std::vector<TrendPoint> lemma82_trend(const GrowthProfile& profile,
                                      const Weight& tail, long n_max,
                                      const Weight* domain) {
  if (tail.support() != Support::ZMinus)
    throw std::invalid_argument("lemma82_trend needs a Z- tail weight");
  std::vector<TrendPoint> out;
  const long lim = std::min<long>(n_max, std::min<long>(profile.n_max(), -tail.n_lo()));
  for (long n = 1; n <= lim; ++n) {
    // ||S^{-n}|| = max( ||T^n||, ||R_n||, ||S^{-n}|| on the weighted tail )
    double log_rn = kNegInf;
    for (long m = 0; m < n; ++m) {
      const double dom = domain ? domain->log_at(m) : 0.0;
      log_rn = std::max(log_rn, tail.log_at(m - n) - dom);
    }
    const double log_tail_op = envelope(tail, EnvelopeKind::Bar, n).log_value;
    const double log_s =
        std::max({profile.log_t_norms[static_cast<size_t>(n)], log_rn,
                  log_tail_op});
    const double denom = tail.log_at(-n);
    out.push_back({n, log_s, denom != 0.0 ? log_s / denom : 0.0});
  }
  return out;
}

AnnihilatorPair build_annihilator(const CoeffVec& g, const CoeffVec& h,
                                  long n_test, long v_len, long theta_len) {
  if (n_test < 1 || v_len < 1 || theta_len < 1)
    throw std::invalid_argument("build_annihilator: sizes must be positive");
  if (v_len + theta_len <= n_test)
    throw std::invalid_argument(
        "annihilation system infeasible: too few unknowns");
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n_test, v_len + theta_len);
  for (long n = 1; n <= n_test; ++n) {
    for (long m = 0; m < v_len; ++m) a(n - 1, m) = g.at(m + n);
    for (long j = 0; j < theta_len; ++j) {
      cplx e = (n - 1 - j >= 0) ? g.at(n - 1 - j) : cplx(0.0);
      if (j >= n) e += h.at(n - j - 1);
      a(n - 1, v_len + j) = e;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXcd x = svd.matrixV().col(v_len + theta_len - 1);
  AnnihilatorPair out;
  out.v.assign(x.data(), x.data() + v_len);
  std::vector<cplx> th(x.data() + v_len, x.data() + v_len + theta_len);
  out.theta = CoeffVec(0, std::move(th));
  out.system_residual = (a * x).norm();
  return out;
}

Prop84Result prop84_residual(const CoeffVec& g_seed, const CoeffVec& h_seed,
                             const RadialProfile& phi,
                             const std::vector<cplx>& grid, long n_test) {
  if (g_seed.max_abs() == 0.0 && h_seed.max_abs() == 0.0)
    throw std::invalid_argument("prop84_residual needs a nonzero seed pair");
  // fixed nontrivial functional l = (v, theta); the pair (g, h) is projected
  // into its annihilator so that <S^{-n}(g,h), l> = 0 holds for every n >= 1
  Prop84Result out;
  out.l.v = {cplx(0.8), cplx(-0.3), cplx(0.1)};
  out.l.theta = CoeffVec(0, {cplx(1.0), cplx(-0.5), cplx(0.25)});
  const auto& l = out.l;
  const long deg_th = l.theta.n_hi();
  const long gg = std::max<long>(g_seed.trimmed().n_hi(), 4);
  const long pp = std::max<long>(-h_seed.trimmed().n_lo, deg_th + 2);
  const long n_con = gg + deg_th + 1;  // all constraints beyond vanish
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n_con, gg + 1 + pp);
  for (long n = 1; n <= n_con; ++n) {
    for (long k = 0; k <= gg; ++k) {
      cplx e(0.0);
      const long m = k - n;
      if (m >= 0 && m < static_cast<long>(l.v.size()))
        e += l.v[static_cast<size_t>(m)];
      e += l.theta.at(n - 1 - k);
      a(n - 1, k) = e;
    }
    for (long p = 0; p < pp; ++p) a(n - 1, gg + 1 + p) = l.theta.at(p + n);
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = 1e-12 * (sv.size() ? sv(0) : 1.0);
  long rank = 0;
  while (rank < sv.size() && sv(rank) > cut) ++rank;
  const long nullity = gg + 1 + pp - rank;
  if (nullity < 1) throw std::runtime_error("annihilator has trivial kernel");
  const Eigen::MatrixXcd v0 =
      svd.matrixV().rightCols(nullity);
  Eigen::VectorXcd seed = Eigen::VectorXcd::Zero(gg + 1 + pp);
  for (long k = 0; k <= gg; ++k) seed(k) = g_seed.at(k);
  for (long p = 0; p < pp; ++p) seed(gg + 1 + p) = h_seed.at(-p - 1);
  Eigen::VectorXcd x = v0 * (v0.adjoint() * seed);
  if (x.norm() < 1e-10) x = v0.col(0);
  x /= x.cwiseAbs().maxCoeff();
  std::vector<cplx> gc(x.data(), x.data() + gg + 1);
  const CoeffVec g(0, std::move(gc));
  std::vector<cplx> hc(static_cast<size_t>(pp));
  for (long p = 0; p < pp; ++p) hc[static_cast<size_t>(pp - 1 - p)] = x(gg + 1 + p);
  const CoeffVec h(-pp, std::move(hc));
  out.l.system_residual = (a * x).norm();
  const long deg_g = gg;
  (void)n_test;

  // <T^{n+1} g, v> for the resolvent series
  std::vector<cplx> tgv(static_cast<size_t>(std::max<long>(deg_g, 1)), cplx(0.0));
  for (long n = 0; n < static_cast<long>(tgv.size()); ++n)
    for (long m = 0; m < static_cast<long>(l.v.size()); ++m)
      tgv[static_cast<size_t>(n)] += g.at(m + n + 1) * l.v[static_cast<size_t>(m)];

  const long h_depth = -h.n_lo;
  for (const cplx& lam : grid) {
    const double al = std::abs(lam);
    if (al >= 1.0) continue;
    const DynkinValue dv = dynkin_extend(h, phi, lam);
    const cplx lhs = eval(l.theta, lam) * (eval(g, lam) + dv.d);
    // C^+(theta L_phi(h)) in closed per-mode form
    cplx cplus(0.0);
    for (long kk = 0; kk <= l.theta.n_hi(); ++kk) {
      const cplx tc = l.theta.at(kk);
      if (tc == cplx(0.0)) continue;
      for (long n = 0; n < h_depth; ++n) {
        const cplx hc = h.at(-n - 1);
        if (hc == cplx(0.0)) continue;
        const double t2 = phi.tau2(n);
        const double mval = phi.m_n(n, al);
        const double radial = mval - (kk > n ? t2 : 0.0);
        if (radial == 0.0) continue;
        cplus += tc * hc / t2 * ipow(lam, kk - n - 1) * radial;
      }
    }
    cplx gdot(0.0);  // <g_lambda, v> = sum lambda^n <T^{n+1} g, v>
    for (size_t n = tgv.size(); n-- > 0;) gdot = gdot * lam + tgv[n];
    const cplx rhs = cplus - gdot;
    out.max_residual = std::max(out.max_residual, std::abs(lhs - rhs));
  }
  return out;
}

nlohmann::json Prop84Result::to_json() const {
  nlohmann::json vj = nlohmann::json::array();
  for (const auto& c : l.v) vj.push_back({c.real(), c.imag()});
  return nlohmann::json{{"v", vj},
                        {"theta", l.theta.to_json()},
                        {"system_residual", l.system_residual},
                        {"max_residual", max_residual}};
}

}  // namespace shiftlab
