#include "shiftlab/growth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "shiftlab/logdomain.hpp"

namespace shiftlab {

namespace {

// Gauss-Kronrod 7-15 nodes and weights on [-1,1] (positive half; symmetric).
constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
// Gauss-7 weights matching Kronrod nodes 1,3,5,7 (odd positions).
constexpr double kGaussWeights[4] = {0.129484966168870, 0.279705391489277,
                                     0.381830050505119, 0.417959183673469};

struct GkEstimate {
  double kronrod = 0.0;
  double error = 0.0;
};

GkEstimate gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double gauss = 0.0, kron = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double x = h * kKronrodNodes[i];
    const double fv = (i == 7) ? f(c) : f(c - x) + f(c + x);
    kron += kKronrodWeights[i] * fv;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * fv;
  }
  GkEstimate e;
  e.kronrod = kron * h;
  const double diff = std::abs((kron - gauss) * h);
  e.error = std::pow(200.0 * diff, 1.5);
  if (!std::isfinite(e.error)) e.error = diff;
  return e;
}

double integrate_rec(const std::function<double(double)>& f, double a, double b,
                     double tol, int depth, int max_depth) {
  const GkEstimate e = gk15(f, a, b);
  if (e.error <= tol || depth >= max_depth) return e.kronrod;
  const double c = 0.5 * (a + b);
  return integrate_rec(f, a, c, 0.5 * tol, depth + 1, max_depth) +
         integrate_rec(f, c, b, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, double rel_tol, int max_depth) {
  if (a == b) return 0.0;
  const GkEstimate first = gk15(f, a, b);
  const double tol =
      std::max(abs_tol, rel_tol * std::abs(first.kronrod));
  if (first.error <= tol) return first.kronrod;
  const double c = 0.5 * (a + b);
  return integrate_rec(f, a, c, 0.5 * tol, 1, max_depth) +
         integrate_rec(f, c, b, 0.5 * tol, 1, max_depth);
}

GrowthProfile GrowthProfile::from_weight(const Weight& w, long n_max) {
  GrowthProfile p;
  p.log_t_norms.reserve(static_cast<size_t>(n_max + 1));
  for (long n = 0; n <= n_max; ++n)
    p.log_t_norms.push_back(envelope(w, EnvelopeKind::Bar, n).log_value);
  return p;
}

GrowthProfile GrowthProfile::from_json(const nlohmann::json& j) {
  GrowthProfile p;
  p.log_t_norms = j.at("log_t_norms").get<std::vector<double>>();
  if (p.log_t_norms.empty())
    throw std::invalid_argument("profile must contain at least ||T^0||");
  return p;
}

nlohmann::json GrowthProfile::to_json() const {
  return nlohmann::json{{"log_t_norms", log_t_norms}};
}

std::string to_string(DivergenceClass c) {
  switch (c) {
    case DivergenceClass::Convergent: return "convergent";
    case DivergenceClass::Divergent: return "divergent";
    case DivergenceClass::Undecided: return "undecided";
  }
  return "?";
}

DeltaResult delta(const GrowthProfile& profile, double r, double tail_tol) {
  if (!(r >= 0.0 && r < 1.0))
    throw std::invalid_argument("delta needs r in [0,1)");
  const auto& t = profile.log_t_norms;
  const long N = profile.n_max();
  DeltaResult res;
  if (r == 0.0) {
    res.log_value = t[0];
    res.log_tail_bound = kNegInf;
    return res;
  }
  const double log_r = std::log(r);
  std::vector<double> terms(t.size());
  for (size_t n = 0; n < t.size(); ++n)
    terms[n] = static_cast<double>(n) * log_r + t[n];
  res.log_value = log_sum_exp(terms);
  // worst consecutive growth of ||T^n|| caps the dropped tail geometrically
  double log_rho = 0.0;
  for (size_t n = 0; n + 1 < t.size(); ++n)
    log_rho = std::max(log_rho, t[n + 1] - t[n]);
  const double log_q = log_r + log_rho;
  if (log_q >= 0.0) {
    res.log_tail_bound = std::numeric_limits<double>::infinity();
  } else {
    res.log_tail_bound = static_cast<double>(N + 1) * log_r + t.back() +
                         log_rho - std::log1p(-std::exp(log_q));
  }
  if (res.log_tail_bound > res.log_value + std::log(tail_tol))
    throw std::runtime_error("profile too short for this r");
  return res;
}

MmIntegral mm_integral(const GrowthProfile& profile, double r_up) {
  if (!(r_up >= 0.0 && r_up < 1.0))
    throw std::invalid_argument("mm_integral needs r_up in [0,1)");
  MmIntegral out;
  if (r_up == 0.0) {
    out.value = 0.0;
  } else {
    // substitute t = 1 - v^2: integrand becomes 2 sqrt(Delta(1-v^2))
    const auto g = [&](double v) {
      return 2.0 * std::exp(0.5 * delta(profile, 1.0 - v * v).log_value);
    };
    out.value = integrate(g, std::sqrt(1.0 - r_up), 1.0);
  }
  // divergence class from the integrand's log-log slope near t=1, on the
  // region where the profile's tail bound still holds
  std::vector<double> xs, ys;
  for (int j = 1; j <= 60; ++j) {
    const double one_minus_t = std::pow(2.0, -j);
    const double t = 1.0 - one_minus_t;
    if (t >= 1.0) break;  // 1 - 2^-j rounds to 1 past j ~ 53
    try {
      const DeltaResult d = delta(profile, t, 1e-3);
      xs.push_back(std::log(one_minus_t));
      ys.push_back(0.5 * (d.log_value - std::log(one_minus_t)));
    } catch (const std::runtime_error&) {
      break;
    }
  }
  if (xs.size() >= 6) {
    const size_t k = std::min<size_t>(8, xs.size());
    const size_t off = xs.size() - k;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = off; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
    }
    const double mx = sx / k, my = sy / k;
    for (size_t i = off; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxy / sxx;  // integrand ~ (1-t)^slope
    double ss = 0;
    for (size_t i = off; i < xs.size(); ++i) {
      const double r = ys[i] - (my + slope * (xs[i] - mx));
      ss += r * r;
    }
    out.fitted_exponent = slope;
    const double rms = std::sqrt(ss / k);
    if (rms > 0.1)
      out.divergence = DivergenceClass::Undecided;
    else if (slope <= -0.97)
      out.divergence = DivergenceClass::Divergent;
    else if (slope >= -0.90)
      out.divergence = DivergenceClass::Convergent;
  }
  return out;
}

double c_eps(double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("c_eps needs eps > 0");
  const double big = (26.0 * std::numbers::pi + 1.5) * (2.0 + 1.0 / eps);
  return std::log(54.0 / std::numbers::pi) - 3.0 * std::log(eps) +
         std::log1p(eps) + 2.0 * std::log1p(2.0 * eps / 3.0) +
         log_add(0.0, std::log(44.0 / 5.0) + big);
}

double l_eps(const GrowthProfile& profile, double eps, double r) {
  if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("l_eps needs r in (0,1)");
  if (!(eps > 0.0)) throw std::invalid_argument("l_eps needs eps > 0");
  const double upper = std::pow(r, 1.0 / (1.0 + eps));
  // integrate in w = 1 - v: sqrt(1 - upper) rounds to 1 for tiny upper,
  // while the width below is computed stably
  const double w_max = upper / (1.0 + std::sqrt(std::max(0.0, 1.0 - upper)));
  const auto gw = [&](double w) {
    const double t = w * (2.0 - w);  // 1 - (1 - w)^2
    return 2.0 * std::exp(0.5 * delta(profile, t).log_value);
  };
  const double integral = integrate(gw, 0.0, w_max);
  if (integral <= 0.0) return kNegInf;
  return log_add(c_eps(eps), 0.0) - std::log1p(-r) + 2.0 * std::log(integral);
}

namespace {
constexpr double kGolden = 0.6180339887498949;

// golden-section minimum of f on [a,b], tolerance in x
double golden_min(const std::function<double(double)>& f, double a, double b,
                  double tol_x) {
  double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol_x) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}
}  // namespace

TailSynthesis tail_weight(const GrowthProfile& profile, double eps, long n_max) {
  if (n_max < 1) throw std::invalid_argument("tail_weight needs n_max >= 1");
  // The profile is finite, so Delta (hence L_eps) is only trustworthy up to
  // the radius where the geometric tail bound holds; cap the search there.
  double t_max = 0.0;
  for (int j = 1; j <= 60; ++j) {
    const double t = 1.0 - std::pow(2.0, -j);
    try {
      (void)delta(profile, t);
      t_max = t;
    } catch (const std::runtime_error&) {
      break;
    }
  }
  if (t_max <= 0.0)
    throw std::runtime_error("profile too short for tail synthesis");
  const double x_lo = -700.0,
               x_hi = (1.0 + eps) * std::log(t_max);
  const int grid_pts = 64;
  // L(e^x) cached on the bracketing grid
  std::vector<double> grid_x(grid_pts), grid_l(grid_pts);
  for (int i = 0; i < grid_pts; ++i) {
    grid_x[i] = x_lo + (x_hi - x_lo) * static_cast<double>(i) /
                           static_cast<double>(grid_pts - 1);
    grid_l[i] = std::exp(l_eps(profile, eps, std::exp(grid_x[i])));
  }
  const auto objective = [&](long n, double x) {
    return -static_cast<double>(n) * x +
           std::exp(l_eps(profile, eps, std::exp(x)));
  };

  TailSynthesis out{Weight::constant(Support::ZMinus, -1, -1),
                    Weight::constant(Support::ZMinus, -1, -1),
                    {}, {}, {}};
  std::vector<double> log_sigma(static_cast<size_t>(n_max) + 1, 0.0);
  out.r_n.assign(static_cast<size_t>(n_max) + 1, 0.0);
  out.boundary_infimum.assign(static_cast<size_t>(n_max) + 1, false);
  for (long n = 0; n <= n_max; ++n) {
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_pts; ++i) {
      const double v = -static_cast<double>(n) * grid_x[i] + grid_l[i];
      if (v < best_val) {
        best_val = v;
        best = i;
      }
    }
    double x_star;
    if (best == 0 || best == grid_pts - 1) {
      out.boundary_infimum[static_cast<size_t>(n)] = true;
      x_star = grid_x[best];
    } else {
      x_star = golden_min([&](double x) { return objective(n, x); },
                          grid_x[best - 1], grid_x[best + 1], 1e-10);
    }
    out.r_n[static_cast<size_t>(n)] = std::exp(x_star);
    log_sigma[static_cast<size_t>(n)] = objective(n, x_star);
  }
  // Z- weights: index -n holds sigma(n), n = 1..n_max (sigma(0) at r_n[0])
  std::vector<double> vals(static_cast<size_t>(n_max)), vals_check(vals.size());
  for (long n = 1; n <= n_max; ++n) {
    vals[static_cast<size_t>(n_max - n)] = log_sigma[static_cast<size_t>(n)];
    vals_check[static_cast<size_t>(n_max - n)] =
        2.0 * std::log(static_cast<double>(n + 1)) +
        log_sigma[static_cast<size_t>(n)];
  }
  out.sigma = Weight(Support::ZMinus, -n_max, std::move(vals));
  out.sigma_check = Weight(Support::ZMinus, -n_max, std::move(vals_check));
  out.report = classify(out.sigma);
  return out;
}

nlohmann::json TailSynthesis::to_json() const {
  return nlohmann::json{{"sigma", sigma.to_json()},
                        {"sigma_check", sigma_check.to_json()},
                        {"r_n", r_n},
                        {"boundary_infimum", boundary_infimum},
                        {"classify", report.to_json()}};
}

SummabilityReport summability_62(std::span<const double> log_l_norms,
                                 std::span<const double> log_u_norms) {
  if (log_l_norms.size() != log_u_norms.size())
    throw std::invalid_argument("summability_62 needs sequences of equal length");
  SummabilityReport rep;
  std::vector<double> log_terms(log_l_norms.size());
  double acc = kNegInf;
  const size_t stride = std::max<size_t>(1, log_terms.size() / 32);
  for (size_t p = 0; p < log_terms.size(); ++p) {
    log_terms[p] = log_l_norms[p] + log_u_norms[p];
    acc = log_add(acc, log_terms[p]);
    if (p % stride == 0 || p + 1 == log_terms.size())
      rep.partial_log_sums.push_back(acc);
  }
  rep.series = classify_series_sum(log_terms, 1);
  return rep;
}

nlohmann::json SummabilityReport::to_json() const {
  return nlohmann::json{{"verdict", to_string(series.verdict)},
                        {"fitted_slope", series.fitted_slope},
                        {"fit_level", series.level},
                        {"partial_log_sums", partial_log_sums}};
}

HypothesisReport hypothesis_report(const GrowthProfile& profile,
                                   const Weight& tail) {
  if (tail.support() != Support::ZMinus)
    throw std::invalid_argument("hypothesis_report needs a Z- tail weight");
  HypothesisReport rep;
  const long n_hi = std::min<long>(profile.n_max(), -tail.n_lo());
  if (n_hi < 8) {
    rep.verdicts["prop75_limsup_lt_1"] = Verdict::Undecided;
    return rep;
  }
  std::vector<double> ratio, sqrt_ratio;
  for (long n = 1; n <= n_hi; ++n) {
    const double ls = tail.log_at(-n);
    if (ls > 0.0) {
      ratio.push_back(profile.log_t_norms[static_cast<size_t>(n)] / ls);
      sqrt_ratio.push_back(ls / std::sqrt(static_cast<double>(n)));
    }
  }
  auto limsup_check = [&](double threshold, const std::string& key) {
    if (ratio.size() < 8) {
      rep.verdicts[key] = Verdict::Undecided;
      return;
    }
    const size_t q = (3 * ratio.size()) / 4;
    double last_max = -1e300, mid_max = -1e300;
    for (size_t i = q; i < ratio.size(); ++i) last_max = std::max(last_max, ratio[i]);
    for (size_t i = ratio.size() / 2; i < q; ++i)
      mid_max = std::max(mid_max, ratio[i]);
    rep.witnesses[key] = last_max;
    if (last_max <= 0.95 * threshold && last_max <= mid_max + 0.05 * threshold)
      rep.verdicts[key] = Verdict::Pass;
    else if (last_max >= threshold)
      rep.verdicts[key] = Verdict::Fail;
    else
      rep.verdicts[key] = Verdict::Undecided;
  };
  limsup_check(1.0, "prop75_limsup_lt_1");
  limsup_check(rep.threshold_83, "thm83_iv_lt_1_64");
  limsup_check(rep.threshold_85, "thm85_iv_lt_1_200");

  // liminf log(sigma(-n))/sqrt(n) = +inf: quartile-median growth trend
  if (sqrt_ratio.size() >= 16) {
    auto median_of = [&](size_t a, size_t b) {
      std::vector<double> seg(sqrt_ratio.begin() + a, sqrt_ratio.begin() + b);
      std::nth_element(seg.begin(), seg.begin() + seg.size() / 2, seg.end());
      return seg[seg.size() / 2];
    };
    const size_t n = sqrt_ratio.size();
    const double early = median_of(n / 4, n / 2);
    const double late = median_of((3 * n) / 4, n);
    rep.witnesses["alpha_liminf_sqrt"] = late;
    if (late >= 1.5 * std::max(early, 1e-12) && late > 1.0)
      rep.verdicts["alpha_liminf_sqrt"] = Verdict::Pass;
    else if (late <= 1.05 * std::max(early, 1e-12))
      rep.verdicts["alpha_liminf_sqrt"] = Verdict::Fail;
    else
      rep.verdicts["alpha_liminf_sqrt"] = Verdict::Undecided;
  } else {
    rep.verdicts["alpha_liminf_sqrt"] = Verdict::Undecided;
  }
  return rep;
}

nlohmann::json HypothesisReport::to_json() const {
  nlohmann::json vs;
  for (const auto& [k, v] : verdicts) vs[k] = to_string(v);
  return nlohmann::json{{"verdicts", vs},
                        {"witnesses", witnesses},
                        {"threshold_83", threshold_83},
                        {"threshold_85", threshold_85},
                        {"nqa_exponent", nqa_exponent}};
}

double coeff_growth_bound(double a, double b, long n) {
  if (n < 2) throw std::invalid_argument("coeff_growth_bound needs n >= 2");
  const double s = std::sqrt(static_cast<double>(n));
  const double r = 1.0 - 1.0 / s;
  return a + b * s - static_cast<double>(n) * std::log(r);
}

std::pair<double, double> fit_inverse_gap(std::span<const double> abs_lambda,
                                          std::span<const double> log_norms) {
  if (abs_lambda.size() != log_norms.size() || abs_lambda.size() < 2)
    throw std::invalid_argument("fit_inverse_gap needs matched samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(abs_lambda.size());
  for (size_t i = 0; i < abs_lambda.size(); ++i) {
    const double x = 1.0 / (1.0 - abs_lambda[i]);
    sx += x;
    sy += log_norms[i];
    sxx += x * x;
    sxy += x * log_norms[i];
  }
  const double denom = n * sxx - sx * sx;
  const double b = (n * sxy - sx * sy) / denom;
  const double a = (sy - b * sx) / n;
  return {a, b};
}

}  // namespace shiftlab
