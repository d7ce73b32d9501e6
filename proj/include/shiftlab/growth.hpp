#ifndef SHIFTLAB_GROWTH_HPP
#define SHIFTLAB_GROWTH_HPP

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "shiftlab/weight.hpp"

namespace shiftlab {

/// Adaptive Gauss-Kronrod (7-15) quadrature on [a,b]; subdivides until the
/// local error estimate meets abs_tol + rel_tol * |integral|.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-9, double rel_tol = 1e-8,
                 int max_depth = 48);

/// The sequence log ||T^n||, n = 0..N_g.
struct GrowthProfile {
  std::vector<double> log_t_norms;

  long n_max() const { return static_cast<long>(log_t_norms.size()) - 1; }

  /// Closed-form profile ||T^n|| = sigma-bar(n) of a disc weight.
  static GrowthProfile from_weight(const Weight& w, long n_max);
  static GrowthProfile from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct DeltaResult {
  double log_value = 0.0;       // log sum_{n<=N_g} r^n ||T^n||
  double log_tail_bound = 0.0;  // geometric bound on the dropped tail
};

/// Delta(r) = sum r^n ||T^n||; the tail beyond the profile is bounded by a
/// geometric series with the worst consecutive norm ratio. Throws if the
/// bound exceeds tail_tol relative to the partial sum.
DeltaResult delta(const GrowthProfile& profile, double r, double tail_tol = 1e-6);

enum class DivergenceClass { Convergent, Divergent, Undecided };
std::string to_string(DivergenceClass c);

struct MmIntegral {
  double value = 0.0;  // integral of sqrt(Delta(t)/(1-t)) over [0, r_up]
  DivergenceClass divergence = DivergenceClass::Undecided;
  double fitted_exponent = 0.0;  // log-log slope of the integrand near t=1
};

/// The growth dichotomy integral; divergence decided by the integrand's
/// log-log slope against (1-t), on the region where the profile tail bound
/// is still trustworthy.
MmIntegral mm_integral(const GrowthProfile& profile, double r_up);

/// log C(eps): the explicit constant
/// (54/pi) eps^-3 (1+eps) (1+2eps/3)^2 (1 + (44/5) e^{(26 pi + 3/2)(2 + 1/eps)}),
/// evaluated fully in the log domain.
double c_eps(double eps);

/// log L_eps(r) = log(C+1) - log(1-r) + 2 log integral_0^{r^{1/(1+eps)}}
/// sqrt(Delta(t)/(1-t)) dt.
double l_eps(const GrowthProfile& profile, double eps, double r);

struct TailSynthesis {
  Weight sigma;        // Z- weight: sigma(-n) = inf_r r^{-n} e^{L_eps(r)}
  Weight sigma_check;  // the (n+1)^2-boosted variant
  std::vector<double> r_n;  // argmin radius per n (r_0 ~ 0 by convention)
  std::vector<bool> boundary_infimum;  // bracketing fell to an interval end
  WeightClassReport report;            // classify() on the output
  nlohmann::json to_json() const;
};

/// Synthesizes the tail weight sigma(n) = inf_{0<r<1} r^{-n} e^{L_eps(r)}
/// for n = 0..n_max by golden-section search on log r after a grid bracket.
TailSynthesis tail_weight(const GrowthProfile& profile, double eps, long n_max);

struct SummabilityReport {
  SeriesVerdict series;                 // Pass = convergent
  std::vector<double> partial_log_sums; // log-domain partial sums (checkpoints)
  nlohmann::json to_json() const;
};

/// Convergence of sum_p ||L_{-p}|| ||U_0^p pi(1)||, both inputs log-domain.
SummabilityReport summability_62(std::span<const double> log_l_norms,
                                 std::span<const double> log_u_norms);

struct HypothesisReport {
  std::map<std::string, Verdict> verdicts;
  std::map<std::string, double> witnesses;
  double threshold_83 = 1.0 / 64.0;   // growth-ratio bound, strong variant
  double threshold_85 = 1.0 / 200.0;  // growth-ratio bound, weak variant
  double nqa_exponent = 1.5;          // denominator exponent of the
                                      // nonquasianalyticity series
  nlohmann::json to_json() const;
};

/// Named hypothesis checks tying a growth profile to a Z- tail weight:
/// limsup log||T^n|| / log sigma(-n) < 1 (and against the 1/64 and 1/200
/// thresholds), liminf log(sigma(-n))/sqrt(n) = +inf.
HypothesisReport hypothesis_report(const GrowthProfile& profile,
                                   const Weight& tail);

/// From a bound log||g(lambda)|| <= a + b/(1-|lambda|), the Cauchy estimate
/// at r = 1 - 1/sqrt(n) gives log|ghat(n)| <= a + b sqrt(n) - n log(1-1/sqrt(n))
/// = O(sqrt(n)). Returns that bound.
double coeff_growth_bound(double a, double b, long n);

/// Least-squares fit of (a, b) in log||g|| ~ a + b/(1-|lambda|) from samples.
std::pair<double, double> fit_inverse_gap(std::span<const double> abs_lambda,
                                          std::span<const double> log_norms);

}  // namespace shiftlab

#endif
