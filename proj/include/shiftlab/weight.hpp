#ifndef SHIFTLAB_WEIGHT_HPP
#define SHIFTLAB_WEIGHT_HPP

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace shiftlab {

enum class Support { Z, ZPlus, ZMinus };
enum class ExtensionRule { Error, ExtrapolateLogLinear };

std::string to_string(Support s);
Support support_from_string(const std::string& s);

/// A positive weight sequence on Z, Z+ or Z-, stored in the natural-log
/// domain on a contiguous index window. Values are immutable after
/// construction.
class Weight {
 public:
  Weight(Support support, long n_lo, std::vector<double> log_values,
         ExtensionRule ext = ExtensionRule::Error);

  static Weight constant(Support support, long n_lo, long n_hi,
                         double log_value = 0.0);
  static Weight from_log_fn(Support support, long n_lo, long n_hi,
                            const std::function<double(long)>& log_sigma);

  Support support() const { return support_; }
  long n_lo() const { return n_lo_; }
  long n_hi() const { return n_lo_ + static_cast<long>(log_values_.size()) - 1; }
  long size() const { return static_cast<long>(log_values_.size()); }
  bool contains(long n) const { return n >= n_lo() && n <= n_hi(); }

  /// log sigma(n); throws std::out_of_range outside the window unless the
  /// extension rule allows log-linear extrapolation.
  double log_at(long n) const;

  const std::vector<double>& log_values() const { return log_values_; }

  Weight power(double s) const;
  Weight product(const Weight& other) const;
  /// sigma*(n) = 1/sigma(-n-1); an involution up to index reflection.
  Weight dual() const;
  /// sigma-check(-n) = (n+1)^2 sigma(n); maps a Z+ window onto Z-.
  Weight check_variant() const;

  static Weight from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static Weight from_csv(std::istream& in, Support support);

 private:
  Support support_;
  long n_lo_;
  std::vector<double> log_values_;
  ExtensionRule ext_;
};

enum class EnvelopeKind { Bar, Tilde };

struct EnvelopeResult {
  double log_value = 0.0;
  long arg_n = 0;        // index n attaining the sup (smallest such)
  bool edge_attained = false;  // sup sits at a window edge: truncation-sensitive
};

/// Windowed submultiplicative envelopes: Bar -> sup_n sigma(n)/sigma(n+m),
/// Tilde -> sup_n sigma(n+m)/sigma(n).
EnvelopeResult envelope(const Weight& w, EnvelopeKind kind, long m);

struct SupResult {
  double log_value = 0.0;
  long arg_n = 0;
  bool truncation_dominated = false;  // objective still rising at the window edge
};

/// log L(r), L(r) = sup_{n>=0} r^n sigma(-n-1); requires Z- support.
SupResult legendre(const Weight& w, double r);

/// log Lambda(r), Lambda(r) = sup_{n>=0} r^n (n+1)^2 u_n, u given in log domain.
SupResult lambda_envelope(std::span<const double> log_u, double r);

enum class Verdict { Pass, Fail, Undecided };
std::string to_string(Verdict v);

struct ClassifyConfig {
  long min_window = 16;
  double root_pass_tol = 0.05;   // |log root| below this counts as -> 1
  double root_fail_tol = 0.20;
  double concavity_tol = 1e-12;
  std::vector<double> monotone_exponents = {0.5};
};

struct RootTrendPoint {
  long m;
  double bar_root;    // windowed sigma-bar(m)^(1/m)
  double tilde_root;  // windowed sigma-tilde(m)^(1/m)
};

struct WeightClassReport {
  double ratio_inf = 0.0;  // inf sigma(n+1)/sigma(n) over the window
  double ratio_sup = 0.0;
  std::vector<RootTrendPoint> envelope_root_trend;
  /// Least k (in the positive-axis parametrization of the sequence) from
  /// which second differences of log sigma are <= 0; nullopt if none.
  std::optional<long> log_concave_from;
  std::optional<long> log_convex_from;
  std::map<std::string, long> monotone_from;  // "a=0.5" -> start index
  std::vector<double> nqa_partial_sums;       // checkpoints of Eq-(20)-style sums
  std::map<std::string, Verdict> verdicts;
  std::map<std::string, double> witnesses;    // numeric evidence per verdict

  nlohmann::json to_json() const;
};

WeightClassReport classify(const Weight& w, const ClassifyConfig& cfg = {});

/// Heuristic classification of sum_{n>=n0} exp(log_terms[n-n0]): slope fit of
/// the term sequence against iterated-log scales, three levels deep.
/// Exposed for the growth module's summability checks.
struct SeriesVerdict {
  Verdict verdict = Verdict::Undecided;
  double fitted_slope = 0.0;
  int level = 0;           // scale at which the fit decided
  double fit_residual = 0.0;
};
SeriesVerdict classify_series_sum(std::span<const double> log_terms, long n0);

}  // namespace shiftlab

#endif
