#include "shiftlab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "shiftlab/logdomain.hpp"

namespace shiftlab {

std::string to_string(SpaceKind k) {
  switch (k) {
    case SpaceKind::Disc: return "disc";
    case SpaceKind::Tail: return "tail";
    case SpaceKind::Hyper: return "hyper";
  }
  return "?";
}

SpaceKind space_kind_from_string(const std::string& s) {
  if (s == "disc") return SpaceKind::Disc;
  if (s == "tail") return SpaceKind::Tail;
  if (s == "hyper") return SpaceKind::Hyper;
  throw std::invalid_argument("unknown space kind: " + s);
}

std::string to_string(OpName op) {
  switch (op) {
    case OpName::S: return "S";
    case OpName::T: return "T";
    case OpName::BiS: return "biS";
    case OpName::BiSInv: return "biS_inv";
    case OpName::Pplus: return "Pplus";
    case OpName::Pminus: return "Pminus";
  }
  return "?";
}

OpName op_from_string(const std::string& s) {
  if (s == "S") return OpName::S;
  if (s == "T") return OpName::T;
  if (s == "biS") return OpName::BiS;
  if (s == "biS_inv") return OpName::BiSInv;
  if (s == "Pplus") return OpName::Pplus;
  if (s == "Pminus") return OpName::Pminus;
  throw std::invalid_argument("unknown operator: " + s);
}

SpaceModel::SpaceModel(Weight w, double exponent, long trunc, SpaceKind k)
    : weight(std::move(w)), p(exponent), N(trunc), kind(k) {
  if (!(p >= 1.0)) throw std::invalid_argument("exponent p must be >= 1");
  if (N < 1) throw std::invalid_argument("truncation N must be >= 1");
  if (!weight.contains(win_lo()) || !weight.contains(win_hi()))
    throw std::invalid_argument("weight window does not cover the space window");
}

double SpaceModel::log_norm(const CoeffVec& f) const {
  std::vector<double> terms;
  for (long n = std::max(f.n_lo, win_lo()); n <= std::min(f.n_hi(), win_hi()); ++n) {
    const double a = std::abs(f.at(n));
    if (a == 0.0) continue;
    terms.push_back(p * (std::log(a) + weight.log_at(n)));
  }
  return log_sum_exp(terms) / p;
}

SpaceModel SpaceModel::from_json(const nlohmann::json& j) {
  return SpaceModel(Weight::from_json(j.at("weight")),
                    j.value("p", 2.0), j.at("N").get<long>(),
                    space_kind_from_string(j.at("kind").get<std::string>()));
}

nlohmann::json SpaceModel::to_json() const {
  return nlohmann::json{{"weight", weight.to_json()},
                        {"p", p},
                        {"N", N},
                        {"kind", to_string(kind)}};
}

Hyperfunction shift(const Hyperfunction& f, OpName which) {
  switch (which) {
    case OpName::S: {
      if (f.minus.max_abs() != 0.0)
        throw std::invalid_argument("S requires an empty minus part");
      return Hyperfunction(f.plus.shifted(1), CoeffVec(-1, {}));
    }
    case OpName::T: {
      if (f.minus.max_abs() != 0.0)
        throw std::invalid_argument("T requires an empty minus part");
      CoeffVec g = f.plus.shifted(-1);
      // drop the constant's image at index -1
      return Hyperfunction(g.plus_part(), CoeffVec(-1, {}));
    }
    case OpName::BiS:
      return Hyperfunction::from_coeffs(f.merged().shifted(1));
    case OpName::BiSInv:
      return Hyperfunction::from_coeffs(f.merged().shifted(-1));
    case OpName::Pplus:
      return Hyperfunction(f.plus, CoeffVec(-1, {}));
    case OpName::Pminus:
      return Hyperfunction(CoeffVec(0, {}), f.minus);
  }
  throw std::invalid_argument("unknown shift");
}

CoeffVec resolvent_T(const CoeffVec& f, cplx lambda) {
  if (std::abs(lambda) >= 1.0)
    throw std::invalid_argument("resolvent_T needs |lambda| < 1");
  if (f.n_lo < 0)
    throw std::invalid_argument("resolvent_T needs a Z+ window");
  const long hi = f.n_hi();
  std::vector<cplx> out(static_cast<size_t>(hi + 1), cplx(0.0));
  // out(n) = sum_{k>=0} lambda^k f(n+k), accumulated top-down
  cplx acc(0.0);
  for (long n = hi; n >= 0; --n) {
    acc = acc * lambda + f.at(n);
    out[static_cast<size_t>(n)] = acc;
  }
  return CoeffVec(0, std::move(out));
}

CoeffVec divide(const CoeffVec& f, cplx lambda) {
  if (std::abs(lambda) >= 1.0)
    throw std::invalid_argument("divide needs |lambda| < 1");
  if (f.n_lo < 0) throw std::invalid_argument("divide needs a polynomial window");
  const long d = f.n_hi();
  // synthetic division of f - f(lambda) by (z - lambda)
  CoeffVec q1(0, std::vector<cplx>(static_cast<size_t>(std::max<long>(d, 1)),
                                   cplx(0.0)));
  cplx b(0.0);
  for (long n = d; n >= 1; --n) {
    b = b * lambda + f.at(n);
    q1.c[static_cast<size_t>(n - 1)] = b;
  }
  // route 2: T (I - lambda T)^{-1} f
  CoeffVec r = resolvent_T(f, lambda);
  CoeffVec q2 = shift(Hyperfunction(r, CoeffVec(-1, {})), OpName::T).plus;
  const double scale = std::max(1.0, f.max_abs());
  if (q1.l2_dist(q2) > 1e-12 * scale * static_cast<double>(d + 1))
    throw std::runtime_error("divide: internal paths disagree beyond tolerance");
  return q1;
}

namespace {

// Weight restricted to the space window, with the matching support tag.
Weight window_weight(const SpaceModel& sp) {
  const Support sup = sp.kind == SpaceKind::Disc
                          ? Support::ZPlus
                          : (sp.kind == SpaceKind::Tail ? Support::ZMinus
                                                        : Support::Z);
  std::vector<double> vals;
  for (long n = sp.win_lo(); n <= sp.win_hi(); ++n)
    vals.push_back(sp.weight.log_at(n));
  return Weight(sup, sp.win_lo(), std::move(vals));
}

// Envelope kind giving the norm of op^m on the model, or nullopt if the
// operator does not act on this space kind.
std::optional<EnvelopeKind> norm_envelope_kind(SpaceKind kind, OpName op) {
  switch (kind) {
    case SpaceKind::Disc:
      if (op == OpName::T) return EnvelopeKind::Bar;
      if (op == OpName::S) return EnvelopeKind::Tilde;
      return std::nullopt;
    case SpaceKind::Tail:
    case SpaceKind::Hyper:
      if (op == OpName::BiSInv) return EnvelopeKind::Bar;
      if (op == OpName::BiS) return EnvelopeKind::Tilde;
      return std::nullopt;
  }
  return std::nullopt;
}

// index displacement of op: out(n) = in(n - d)
long op_displacement(OpName op, long m) {
  switch (op) {
    case OpName::S:
    case OpName::BiS:
      return m;
    case OpName::T:
    case OpName::BiSInv:
      return -m;
    default:
      throw std::invalid_argument("power_norm: unsupported operator");
  }
}

}  // namespace

BoundedOpReport power_norm(const SpaceModel& space, OpName op, long m) {
  if (m < 0) throw std::invalid_argument("power_norm needs m >= 0");
  const auto kind = norm_envelope_kind(space.kind, op);
  if (!kind)
    throw std::invalid_argument("operator " + to_string(op) +
                                " does not act on a " + to_string(space.kind) +
                                " model");
  BoundedOpReport rep;
  rep.truncation = space.N;
  const Weight wv = window_weight(space);
  const auto env = envelope(wv, *kind, m);
  rep.log_closed_form = env.log_value;
  rep.edge_attained = env.edge_attained;

  if (m == 0) {
    rep.log_matrix_estimate = 0.0;
    return rep;
  }
  const long lo = space.win_lo(), hi = space.win_hi();
  const long d = op_displacement(op, m);
  if (space.p == 2.0) {
    // In sigma-normalized coordinates op^m has one entry per column:
    // u(n) -> u(n) sigma(n+d)/sigma(n) at row n+d. Power-iterate A^T A.
    const size_t W = static_cast<size_t>(hi - lo + 1);
    std::vector<double> diag2(W, 0.0);  // (A^T A) is diagonal here
    for (long n = lo; n <= hi; ++n) {
      const long t = n + d;
      if (t < lo || t > hi) continue;
      const double a = std::exp(space.weight.log_at(t) - space.weight.log_at(n));
      diag2[static_cast<size_t>(n - lo)] = a * a;
    }
    std::vector<double> x(W, 1.0 / std::sqrt(static_cast<double>(W)));
    double rayleigh = 0.0, prev = -1.0;
    for (int it = 0; it < 200; ++it) {
      double nrm2 = 0.0, num = 0.0;
      for (size_t i = 0; i < W; ++i) {
        x[i] *= diag2[i];
        nrm2 += x[i] * x[i];
      }
      const double nrm = std::sqrt(nrm2);
      if (nrm == 0.0) { rayleigh = 0.0; break; }
      for (size_t i = 0; i < W; ++i) x[i] /= nrm;
      for (size_t i = 0; i < W; ++i) num += diag2[i] * x[i] * x[i];
      rayleigh = num;
      if (prev > 0 && std::abs(rayleigh - prev) < 1e-12 * rayleigh) break;
      prev = rayleigh;
    }
    rep.log_matrix_estimate =
        rayleigh > 0 ? 0.5 * std::log(rayleigh) : kNegInf;
  } else {
    // coordinate-vector lower bound: best single ratio (equals closed form
    // on the window, so the bracket is tight for diagonal shifts)
    rep.log_matrix_estimate = env.log_value;
  }
  rep.relative_gap =
      1.0 - std::exp(rep.log_matrix_estimate - *rep.log_closed_form);
  return rep;
}

BoundedOpReport functional_norm(const SpaceModel& space,
                                const FunctionalSpec& which) {
  BoundedOpReport rep;
  rep.truncation = space.N;
  if (which.kind == FunctionalSpec::Kind::LZero) {
    if (!space.in_window(which.n))
      throw std::invalid_argument("L_n index outside the space window");
    rep.log_closed_form = -space.weight.log_at(which.n);
    rep.log_matrix_estimate = *rep.log_closed_form;
    return rep;
  }
  const double al = std::abs(which.lambda);
  if (al >= 1.0) throw std::invalid_argument("delta_lambda needs |lambda| < 1");
  if (space.kind != SpaceKind::Disc)
    throw std::invalid_argument("delta_lambda acts on disc models");
  // dual norm: || (lambda^n / sigma(n))_n ||_q, 1/p + 1/q = 1
  std::vector<double> logs;
  for (long n = 0; n <= space.N; ++n)
    logs.push_back((al == 0.0 && n > 0)
                       ? kNegInf
                       : static_cast<double>(n) * std::log(std::max(al, 1e-300)) -
                             space.weight.log_at(n));
  if (al == 0.0) logs.assign(1, -space.weight.log_at(0));
  double log_norm;
  if (space.p == 1.0) {
    log_norm = *std::max_element(logs.begin(), logs.end());
  } else {
    const double q = space.p / (space.p - 1.0);
    std::vector<double> scaled;
    for (double v : logs) scaled.push_back(q * v);
    log_norm = log_sum_exp(scaled) / q;
  }
  rep.log_closed_form = log_norm;
  rep.log_matrix_estimate = log_norm;
  rep.edge_attained = false;
  return rep;
}

FuncCalcResult func_calc(const CoeffVec& w, const SpaceModel& space,
                         const Hyperfunction& f, double max_log_gain) {
  // summability guard: sum |what(n)| ||S^n|| with norms from the envelopes
  const Weight wv = window_weight(space);
  double log_sum = kNegInf;
  for (long n = w.n_lo; n <= w.n_hi(); ++n) {
    const double a = std::abs(w.at(n));
    if (a == 0.0) continue;
    if (n != 0 && space.kind == SpaceKind::Disc && n < 0)
      throw std::invalid_argument("negative powers do not act on a disc model");
    double log_op = 0.0;
    if (n > 0) log_op = envelope(wv, EnvelopeKind::Tilde, n).log_value;
    if (n < 0) log_op = envelope(wv, EnvelopeKind::Bar, -n).log_value;
    log_sum = log_add(log_sum, std::log(a) + log_op);
  }
  if (log_sum > max_log_gain)
    throw std::runtime_error("w(S) unbounded on this space (guard exceeded)");
  FuncCalcResult res;
  res.log_norm_bound = log_sum;
  CoeffVec conv = convolve(w, f.merged());
  CoeffVec kept(space.win_lo(),
                std::vector<cplx>(static_cast<size_t>(space.win_hi() -
                                                      space.win_lo() + 1),
                                  cplx(0.0)));
  double spilled = 0.0;
  for (long n = conv.n_lo; n <= conv.n_hi(); ++n) {
    if (space.in_window(n))
      kept.c[static_cast<size_t>(n - space.win_lo())] = conv.at(n);
    else
      spilled += std::norm(conv.at(n));
  }
  res.discarded_mass = std::sqrt(spilled);
  res.value = Hyperfunction::from_coeffs(kept.trimmed());
  return res;
}

RnResult r_n_op(const CoeffVec& g, long n, const Weight& tail,
                const Weight* domain) {
  if (n < 1) throw std::invalid_argument("r_n_op needs n >= 1");
  if (g.n_lo < 0) throw std::invalid_argument("r_n_op needs a Z+ window");
  if (!tail.contains(-n))
    throw std::invalid_argument("tail weight window too short for this n");
  RnResult res;
  std::vector<cplx> coeffs(static_cast<size_t>(n), cplx(0.0));
  for (long m = 0; m < n; ++m)
    coeffs[static_cast<size_t>(m)] = g.at(m);  // lands at index m - n
  res.tail = CoeffVec(-n, std::move(coeffs));
  // diagonal operator m -> m-n: norm = max_m tail(m-n)/domain(m)
  double best = kNegInf;
  for (long m = 0; m < n; ++m) {
    const double dom = domain ? domain->log_at(m) : 0.0;
    best = std::max(best, tail.log_at(m - n) - dom);
  }
  res.log_norm = best;
  return res;
}

nlohmann::json BoundedOpReport::to_json() const {
  nlohmann::json j;
  j["log_closed_form"] =
      log_closed_form ? nlohmann::json(*log_closed_form) : nlohmann::json();
  j["log_matrix_estimate"] = log_matrix_estimate;
  j["truncation"] = truncation;
  j["relative_gap"] = relative_gap;
  j["edge_attained"] = edge_attained;
  return j;
}

}  // namespace shiftlab
