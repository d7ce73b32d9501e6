#ifndef SHIFTLAB_OPERATORS_HPP
#define SHIFTLAB_OPERATORS_HPP

#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "shiftlab/series.hpp"
#include "shiftlab/weight.hpp"

namespace shiftlab {

enum class SpaceKind { Disc, Tail, Hyper };
std::string to_string(SpaceKind k);
SpaceKind space_kind_from_string(const std::string& s);

/// Weighted sequence-space model: window [0,N] (disc), [-N,-1] (tail) or
/// [-N,N] (hyper), norm (sum |c(n)|^p sigma(n)^p)^{1/p}.
struct SpaceModel {
  Weight weight;
  double p = 2.0;
  long N = 0;
  SpaceKind kind = SpaceKind::Disc;

  SpaceModel(Weight w, double exponent, long trunc, SpaceKind k);

  long win_lo() const { return kind == SpaceKind::Disc ? 0 : -N; }
  long win_hi() const { return kind == SpaceKind::Tail ? -1 : N; }
  bool in_window(long n) const { return n >= win_lo() && n <= win_hi(); }

  /// log of the weighted p-norm over the space window (coefficients outside
  /// the window are ignored; callers needing spill accounting use func_calc).
  double log_norm(const CoeffVec& f) const;

  static SpaceModel from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

enum class OpName { S, T, BiS, BiSInv, Pplus, Pminus };
std::string to_string(OpName op);
OpName op_from_string(const std::string& s);

/// Exact coefficient re-indexing, including the cross terms at index 0/-1:
/// biS maps c(-1) to the constant term, biS_inv maps c(0) to index -1.
Hyperfunction shift(const Hyperfunction& f, OpName which);

/// (I - lambda T)^{-1} f on a polynomial window: coefficient n of the result
/// is sum_{k>=0} lambda^k fhat(n+k) (finite within the window).
CoeffVec resolvent_T(const CoeffVec& f, cplx lambda);

/// f_lambda = (f - f(lambda))/(z - lambda), computed both by synthetic
/// division and by T(I - lambda T)^{-1}; throws if the two paths disagree
/// beyond 1e-12 relative.
CoeffVec divide(const CoeffVec& f, cplx lambda);

struct BoundedOpReport {
  std::optional<double> log_closed_form;
  double log_matrix_estimate = 0.0;
  long truncation = 0;
  double relative_gap = 0.0;  // (closed - estimate)/closed in linear scale
  bool edge_attained = false; // closed-form sup sits at the window edge
  nlohmann::json to_json() const;
};

/// Norm of op^m on the model: closed form from weight envelopes, matrix
/// estimate from power iteration on the truncated coefficient matrix (p=2)
/// or a coordinate-vector lower bound (p != 2).
BoundedOpReport power_norm(const SpaceModel& space, OpName op, long m);

struct FunctionalSpec {
  enum class Kind { DeltaLambda, LZero } kind = Kind::DeltaLambda;
  cplx lambda;  // for DeltaLambda
  long n = 0;   // L_n = coefficient functional at index n
};

/// Norms of the point evaluation delta_lambda and the coefficient
/// functionals L_n; closed forms at p=2, bracketed otherwise.
BoundedOpReport functional_norm(const SpaceModel& space, const FunctionalSpec& which);

struct FuncCalcResult {
  Hyperfunction value;
  double discarded_mass = 0.0;   // l2 mass dropped outside the space window
  double log_norm_bound = 0.0;   // log sum |what(n)| ||S^n||
};

/// w(S)f = convolution of coefficient windows, restricted to the space
/// window. The summability guard bounds sum |what(n)| ||S^n|| by the weight
/// envelopes; throws if the bound overflows max_log_gain.
FuncCalcResult func_calc(const CoeffVec& w, const SpaceModel& space,
                         const Hyperfunction& f, double max_log_gain = 600.0);

struct RnResult {
  CoeffVec tail;               // sum_{m<n} ghat(m) zeta^{m-n}
  double log_norm = 0.0;       // operator norm of R_n as a map into the tail space
};

/// R_n(g) = sum_{m=0}^{n-1} ghat(m) S^{m-n} 1 with the l2 tail weight `tail`
/// on the range and `domain` on g (default: unweighted).
RnResult r_n_op(const CoeffVec& g, long n, const Weight& tail,
                const Weight* domain = nullptr);

}  // namespace shiftlab

#endif
