#ifndef SHIFTLAB_HYPERLAB_HPP
#define SHIFTLAB_HYPERLAB_HPP

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "shiftlab/growth.hpp"
#include "shiftlab/series.hpp"
#include "shiftlab/weight.hpp"

namespace shiftlab {

/// Radial profile phi on [0,1], held either as a callable phi^2 or as a
/// nonnegative piecewise-constant panel combination (closed-form moments).
class RadialProfile {
 public:
  struct Panel {
    double a, b, c;  // phi^2 += c on [a,b]
  };

  static RadialProfile from_function(std::function<double(double)> phi2);
  static RadialProfile from_panels(std::vector<Panel> panels);
  static RadialProfile one();  // phi == 1

  double phi2(double t) const;
  /// tau_phi(n)^2 = 2 int_0^1 phi^2 t^{2n+1} dt (cached).
  double tau2(long n) const;
  /// m_n(s) = 2 int_0^s phi^2 t^{2n+1} dt; m_n(1) = tau2(n).
  double m_n(long n, double s) const;

  const std::vector<Panel>* panels() const {
    return panels_.empty() ? nullptr : &panels_;
  }

 private:
  std::function<double(double)> fn_;
  std::vector<Panel> panels_;
  mutable std::map<long, double> tau_cache_;
};

double tau_phi(const RadialProfile& phi, long n);

struct PhiFit {
  RadialProfile phi;
  double ratio_inf = 0.0;  // inf tau_phi(n)/sigma*(n) over the fit window
  double ratio_sup = 0.0;
  nlohmann::json to_json() const;
};

struct PhiFitConfig {
  int panel_count = 24;
  double equiv_max = 1e3;  // max tolerated ratio spread
};

/// Nonnegative panel fit of phi with tau_phi equivalent to the target weight
/// sigma* (Z+, certified eventually log-convex by classify()).
PhiFit fit_phi(const Weight& target, const PhiFitConfig& cfg = {});

struct DynkinValue {
  cplx d;        // D_phi(h)(lambda)
  cplx density;  // L_phi(h)(lambda) = dbar D_phi(h)
};

/// D_phi(h)(lambda) = sum_n hhat(-n-1) lambda^{-n-1} m_n(|lambda|)/tau2(n),
/// density L_phi(h)(zeta) = phi^2(|zeta|) sum_n (hhat(-n-1)/tau2(n)) conj(zeta)^n.
DynkinValue dynkin_extend(const CoeffVec& h, const RadialProfile& phi, cplx lambda);

/// Exact per-mode Cauchy transform: C(rho(t) e^{im theta})(lambda) =
///   2 lambda^{m-1} int_0^{min(|l|,1)} rho t^{1-m} dt          (m <= 0)
///  -2 lambda^{m-1} int_{min(|l|,1)}^1 rho t^{1-m} dt          (m >= 1).
cplx cauchy_mode(long m, const std::function<double(double)>& rho, cplx lambda);

/// Quadrature Cauchy transform of a general density on the disc, by angular
/// discrete-Fourier splitting into K modes (exact for band-limited F).
cplx cauchy_transform(const std::function<cplx(cplx)>& density, cplx lambda,
                      size_t K = 64);

/// C^-(L_phi(h))(mu) for |mu| > 1 in closed form (the reproduction identity
/// evaluates to eval(h, mu) exactly; exposed for oracle comparisons).
cplx cauchy_minus_density(const CoeffVec& h, const RadialProfile& phi, cplx mu);

struct DbarBound {
  double k_delta = 0.0;
  std::vector<std::pair<double, double>> table;  // (|lambda|, ratio)
  nlohmann::json to_json() const;
};

/// Empirical fit of |L_phi(h)(lambda)| <= k_delta ||h|| L^{-delta}(|lambda|),
/// L the Legendre transform of the Z- weight sigma.
DbarBound dbar_bound_check(const CoeffVec& h, const RadialProfile& phi,
                           const Weight& sigma, double delta,
                           const std::vector<cplx>& grid);

struct FactorizationResult {
  long k = 0;                 // winding number: f = zeta^{-k} e^h g
  CoeffVec h;                 // Z- window, h(inf) = 0
  CoeffVec g;                 // Z+ window
  double residual = 0.0;      // max reconstruction error on test circles
  double winding_snap = 0.0;  // distance of the phase sum from 2 pi k
  size_t samples_used = 0;
  nlohmann::json to_json() const;
};

struct FactorizeConfig {
  double zero_margin = 1e-9;
  double snap_tol = 0.01;
  long h_window = 64;  // tail coefficients kept for h
  long g_window = 64;
};

/// Annulus factorization f = zeta^{-k} e^{h} g on |zeta| = r: winding number
/// by phase tracking (K doubled until adjacent jumps < pi/4), branch-continuous
/// logarithm split into h (negative indices) and exp-series g.
FactorizationResult annulus_factorize(const Hyperfunction& f, double r,
                                      size_t K, const FactorizeConfig& cfg = {});

struct TrendPoint {
  long n;
  double log_s_inv_norm;  // log max(||T^n||, ||R_n||, ||S^{-n}|| on the tail)
  double ratio;           // log||S^{-n}|| / log sigma(-n)
};

/// Lemma-8.2-style three-way norm of S^{-n} on E + tail against log sigma(-n).
std::vector<TrendPoint> lemma82_trend(const GrowthProfile& profile,
                                      const Weight& tail, long n_max,
                                      const Weight* domain = nullptr);

struct AnnihilatorPair {
  std::vector<cplx> v;      // functional coefficients on the E window
  CoeffVec theta;                // Z+ window
  double system_residual = 0.0;  // norm of the annihilation equations at l
};

/// Solves <S^{-n}(g,h), l> = 0 for n = 1..n_test with l = (v, theta):
/// sum_m ghat(m+n) v(m) + (g theta)^(n-1) + sum_p thetahat(p+n) hhat(-p-1) = 0.
AnnihilatorPair build_annihilator(const CoeffVec& g, const CoeffVec& h,
                                  long n_test, long v_len, long theta_len);

struct Prop84Result {
  AnnihilatorPair l;
  double max_residual = 0.0;  // worst |LHS - RHS| over the lambda grid
  nlohmann::json to_json() const;
};

/// Checks theta (g + D_phi(h)) = C^+(theta dbar D_phi(h)) - <g_., v> on a
/// lambda grid. A fixed nontrivial functional l = (v, theta) is used and the
/// seed pair (g, h) is projected into its annihilator, so the annihilation
/// equations hold for every n >= 1 (they vanish identically beyond the
/// constructed window).
Prop84Result prop84_residual(const CoeffVec& g, const CoeffVec& h,
                             const RadialProfile& phi,
                             const std::vector<cplx>& grid, long n_test = 24);

}  // namespace shiftlab

#endif
