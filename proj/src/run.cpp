#include "shiftlab/run.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <numbers>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "shiftlab/growth.hpp"
#include "shiftlab/hyperlab.hpp"
#include "shiftlab/logdomain.hpp"
#include "shiftlab/operators.hpp"
#include "shiftlab/series.hpp"
#include "shiftlab/subspaces.hpp"
#include "shiftlab/weight.hpp"

namespace shiftlab {

using ordered_json = nlohmann::ordered_json;

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("invalid JSON in " + path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// verify: the assembled invariant suite
// ---------------------------------------------------------------------------

struct CheckResult {
  bool pass = false;
  double witness = 0.0;
  std::string note;
};

struct Check {
  std::string name;
  std::function<CheckResult()> fn;
};

CheckResult ok(double witness, const std::string& note = "") {
  return {true, witness, note};
}
CheckResult leq(double value, double tol) {
  return {value <= tol, value, ""};
}
CheckResult expect(bool cond, double witness, const std::string& note = "") {
  return {cond, witness, note};
}

CoeffVec random_poly(std::mt19937& rng, long deg, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cplx> c(static_cast<size_t>(deg) + 1);
  for (auto& x : c) x = scale * cplx(u(rng), u(rng));
  return CoeffVec(0, std::move(c));
}

// exp of a pure tail sum_{n>=1} a_n zeta^{-n}, coefficients of zeta^{-n}
std::vector<cplx> exp_tail(const std::vector<cplx>& a_desc, size_t len) {
  std::vector<cplx> e(len, cplx(0.0));
  e[0] = cplx(1.0);
  for (size_t n = 1; n < len; ++n) {
    cplx acc(0.0);
    for (size_t k = 1; k <= n && k < a_desc.size(); ++k)
      acc += static_cast<double>(k) * a_desc[k] * e[n - k];
    e[n] = acc / static_cast<double>(n);
  }
  return e;
}

Hyperfunction make_factorable(long k, const std::vector<cplx>& h_desc,
                              const CoeffVec& g) {
  const std::vector<cplx> e = exp_tail(h_desc, 128);
  CoeffVec eh(-static_cast<long>(e.size()) + 1,
              std::vector<cplx>(e.rbegin(), e.rend()));
  return Hyperfunction::from_coeffs(convolve(eh, g).shifted(-k).trimmed(1e-300));
}

std::vector<Check> build_checks(unsigned seed, long n_trunc) {
  std::vector<Check> checks;
  auto add = [&](const std::string& name, std::function<CheckResult()> fn) {
    checks.push_back({name, std::move(fn)});
  };
  auto rng_for = [seed](unsigned salt) {
    return std::mt19937(seed * 7919u + salt);
  };
  const long N = std::max<long>(n_trunc, 8);

  // ---- weights ----
  add("weight.envelope_const_bar", [=] {
    const Weight w = Weight::constant(Support::ZPlus, 0, 256);
    return leq(std::abs(envelope(w, EnvelopeKind::Bar, 5).log_value), 1e-14);
  });
  add("weight.envelope_geometric", [=] {
    const Weight w = Weight::from_log_fn(Support::ZPlus, 0, 64, [](long n) {
      return static_cast<double>(n) * std::log(2.0);
    });
    const double tilde = envelope(w, EnvelopeKind::Tilde, 3).log_value;
    const double bar = envelope(w, EnvelopeKind::Bar, 3).log_value;
    return leq(std::abs(tilde - 3 * std::log(2.0)) +
                   std::abs(bar + 3 * std::log(2.0)),
               1e-13);
  });
  add("weight.dual_involution", [=] {
    const Weight w = Weight::from_log_fn(Support::Z, -10, 10, [](long n) {
      return 2.0 * std::sin(static_cast<double>(n));
    });
    const Weight d2 = w.dual().dual();
    double err = std::abs(static_cast<double>(d2.n_lo() - w.n_lo()));
    for (long n = w.n_lo(); n <= w.n_hi(); ++n)
      err = std::max(err, std::abs(d2.log_at(n) - w.log_at(n)));
    return leq(err, 1e-15);
  });
  add("weight.power_product", [=] {
    const Weight w = Weight::from_log_fn(Support::ZPlus, 0, 32, [](long n) {
      return std::sqrt(static_cast<double>(n));
    });
    const Weight a = w.power(2.0), b = w.product(w);
    double err = 0.0;
    for (long n = 0; n <= 32; ++n)
      err = std::max(err, std::abs(a.log_at(n) - b.log_at(n)));
    return leq(err, 1e-13);
  });
  add("weight.classify_geometric", [=] {
    const auto flat = classify(Weight::constant(Support::ZPlus, 0, 200));
    const Weight two = Weight::from_log_fn(Support::ZPlus, 0, 200, [](long n) {
      return static_cast<double>(n) * std::log(2.0);
    });
    const auto geo = classify(two);
    return expect(flat.verdicts.at("class_membership") == Verdict::Pass &&
                      geo.verdicts.at("class_membership") == Verdict::Fail,
                  geo.witnesses.at("class_membership"));
  });
  add("weight.legendre_flat", [=] {
    const Weight w = Weight::constant(Support::ZMinus, -40, -1);
    return leq(std::abs(legendre(w, 0.5).log_value), 1e-15);
  });
  add("weight.series_sum_classifier", [=] {
    std::vector<double> conv(400), div(400, 0.0);
    for (size_t n = 0; n < conv.size(); ++n)
      conv[n] = -static_cast<double>(n) * static_cast<double>(n);
    const auto a = classify_series_sum(conv, 0);
    const auto b = classify_series_sum(div, 0);
    return expect(a.verdict == Verdict::Pass && b.verdict == Verdict::Fail,
                  a.fitted_slope);
  });
  add("weight.check_variant", [=] {
    const Weight w = Weight::from_log_fn(Support::ZPlus, 0, 30, [](long n) {
      return 0.1 * static_cast<double>(n);
    });
    const Weight cv = w.check_variant();
    double err = 0.0;
    for (long n = 1; n <= 30; ++n)
      err = std::max(err, std::abs(cv.log_at(-n) -
                                   (2.0 * std::log(n + 1.0) + 0.1 * n)));
    return leq(err, 1e-13);
  });

  // ---- series ----
  add("series.convolve_oracle", [=]() mutable {
    auto rng = rng_for(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CoeffVec a(-3, {}), b(-2, {});
    for (int i = 0; i < 8; ++i) a.c.emplace_back(u(rng), u(rng));
    for (int i = 0; i < 8; ++i) b.c.emplace_back(u(rng), u(rng));
    const CoeffVec got = convolve(a, b);
    double err = 0.0;
    for (long n = -5; n <= 10; ++n) {
      cplx direct(0.0);
      for (long k = a.n_lo; k <= a.n_hi(); ++k) direct += a.at(k) * b.at(n - k);
      err = std::max(err, std::abs(got.at(n) - direct));
    }
    return leq(err, 1e-13);
  });
  add("series.fft_roundtrip", [=]() mutable {
    auto rng = rng_for(12);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<cplx> x(64);
    for (auto& v : x) v = cplx(u(rng), u(rng));
    auto y = x;
    fft(y, false);
    fft(y, true);
    double err = 0.0;
    for (size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(x[i] - y[i]));
    return leq(err, 1e-12);
  });
  add("series.eval_laurent", [=] {
    const CoeffVec f(-2, {cplx(1.0), cplx(0.0), cplx(3.0), cplx(2.0)});
    return leq(std::abs(eval(f, cplx(2.0)) - cplx(7.25)), 1e-14);
  });
  add("series.circle_roundtrip", [=]() mutable {
    auto rng = rng_for(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CoeffVec f(-8, {});
    for (int i = 0; i < 16; ++i) f.c.emplace_back(u(rng), u(rng));
    const auto samples = circle_samples(f, 0.8, 64);
    const CoeffVec back = circle_coeffs(samples, 0.8, -8, 7);
    return leq(back.l2_dist(f), 1e-10);
  });
  add("series.pairing_oracle", [=]() mutable {
    auto rng = rng_for(14);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Hyperfunction f(random_poly(rng, 6), CoeffVec(-1, {}));
    CoeffVec h(-8, {});
    for (int i = 0; i < 8; ++i) h.c.emplace_back(u(rng), u(rng));
    cplx direct(0.0);
    for (long n = 0; n <= 6; ++n) direct += f.at(n) * h.at(-n - 1);
    return leq(std::abs(pair_with(f, h) - direct), 1e-13);
  });
  add("series.cauchy_coeff_bound", [=]() mutable {
    auto rng = rng_for(15);
    const CoeffVec f = random_poly(rng, 10);
    const auto cb = cauchy_coeff_bound(f, 0.9, 4);
    return expect(std::abs(f.at(4)) <= cb.bound * (1.0 + 1e-9) && cb.satisfied,
                  cb.bound);
  });

  // ---- operators ----
  add("op.eq1_resolvent_identity", [=]() mutable {
    auto rng = rng_for(21);
    double worst = 0.0;
    const std::vector<cplx> lambdas{cplx(0.0), cplx(0.5), cplx(-0.3, 0.4)};
    for (int trial = 0; trial < 20; ++trial) {
      const CoeffVec f = random_poly(rng, std::min<long>(N - 8, 120));
      const Hyperfunction hf(f, CoeffVec(-1, {}));
      for (const cplx lam : lambdas) {
        // T (I - lambda T)^{-1} (S - lambda) f = f
        const CoeffVec sf =
            sub(shift(hf, OpName::S).plus, f.scaled(lam));
        const CoeffVec back =
            shift(Hyperfunction(resolvent_T(sf, lam), CoeffVec(-1, {})),
                  OpName::T)
                .plus;
        worst = std::max(worst, back.l2_dist(f));
      }
    }
    return leq(worst, 1e-11);
  });
  add("op.eq2_point_evaluation", [=]() mutable {
    auto rng = rng_for(22);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const CoeffVec f = random_poly(rng, 40);
      for (const cplx lam : {cplx(0.5), cplx(-0.3, 0.4)}) {
        const CoeffVec rf = resolvent_T(f, lam);
        // (I - S T) g = g(0) * 1 exactly
        worst = std::max(worst, std::abs(rf.at(0) - eval(f, lam)));
      }
    }
    return leq(worst, 1e-11);
  });
  add("op.divide_reconstruction", [=]() mutable {
    auto rng = rng_for(23);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const CoeffVec f = random_poly(rng, 30);
      const cplx lam(0.3, -0.2);
      const CoeffVec q = divide(f, lam);  // throws if the two paths disagree
      // (z - lambda) q + f(lambda) = f
      CoeffVec recon = sub(q.shifted(1), q.scaled(lam));
      recon.set(0, recon.at(0) + eval(f, lam));
      worst = std::max(worst, recon.l2_dist(f));
    }
    return leq(worst, 1e-11);
  });
  add("op.shift_identities", [=]() mutable {
    auto rng = rng_for(24);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const CoeffVec p = random_poly(rng, 6);
    CoeffVec m(-5, {});
    for (int i = 0; i < 5; ++i) m.c.emplace_back(u(rng), u(rng));
    const Hyperfunction f(p, m);
    // TS = I on the plus part; biS_inv biS = I on hyperfunctions
    const Hyperfunction fp(p, CoeffVec(-1, {}));
    const CoeffVec ts = shift(shift(fp, OpName::S), OpName::T).plus;
    const Hyperfunction round = shift(shift(f, OpName::BiS), OpName::BiSInv);
    double err = ts.l2_dist(p);
    err = std::max(err, round.merged().l2_dist(f.merged()));
    // S T f = f - f(0) 1
    CoeffVec st = shift(shift(fp, OpName::T), OpName::S).plus;
    st.set(0, st.at(0) + p.at(0));
    err = std::max(err, st.l2_dist(p));
    return leq(err, 1e-15);
  });
  add("op.norm_const_T", [=] {
    const SpaceModel space(Weight::constant(Support::ZPlus, 0, 256), 2.0, 256,
                           SpaceKind::Disc);
    const auto rep = power_norm(space, OpName::T, 5);
    const double closed = rep.log_closed_form.value_or(1e9);
    return leq(std::abs(closed) + std::abs(rep.relative_gap), 0.01);
  });
  add("op.norm_geometric_S", [=] {
    const Weight w = Weight::from_log_fn(Support::ZPlus, 0, 256, [](long n) {
      return static_cast<double>(n) * std::log(2.0);
    });
    const SpaceModel space(w, 2.0, 256, SpaceKind::Disc);
    const auto s3 = power_norm(space, OpName::S, 3);
    const auto t3 = power_norm(space, OpName::T, 3);
    const double e1 = std::abs(s3.log_closed_form.value_or(0) - 3 * std::log(2.0));
    const double e2 = std::abs(t3.log_closed_form.value_or(0) + 3 * std::log(2.0));
    return leq(e1 + e2 + std::abs(s3.relative_gap) + std::abs(t3.relative_gap),
               0.02);
  });
  add("op.functional_norm_delta", [=] {
    const Weight w = Weight::from_log_fn(Support::ZPlus, 0, 128, [](long n) {
      return std::log(n + 1.0);
    });
    const SpaceModel space(w, 2.0, 128, SpaceKind::Disc);
    FunctionalSpec spec;
    spec.kind = FunctionalSpec::Kind::DeltaLambda;
    spec.lambda = cplx(0.5);
    const auto rep = functional_norm(space, spec);
    double s = 0.0;
    for (long n = 0; n <= 128; ++n)
      s += std::pow(0.5, 2.0 * n) / std::pow(n + 1.0, 2.0);
    return leq(std::abs(rep.log_closed_form.value_or(1e9) - 0.5 * std::log(s)),
               1e-12);
  });
  add("op.r_n_diagonal_norm", [=]() mutable {
    auto rng = rng_for(25);
    const CoeffVec g = random_poly(rng, 6);
    const Weight tail = Weight::from_log_fn(Support::ZMinus, -20, -1, [](long n) {
      return static_cast<double>(-n);
    });
    const auto rep = r_n_op(g, 4, tail);
    double direct = kNegInf;
    for (long m = 0; m < 4; ++m) direct = std::max(direct, tail.log_at(m - 4));
    return leq(std::abs(rep.log_norm - direct), 1e-13);
  });
  add("op.func_calc_truncation", [=]() mutable {
    auto rng = rng_for(26);
    const CoeffVec w(0, {cplx(1.0), cplx(0.5)});
    const SpaceModel space(Weight::constant(Support::ZPlus, 0, 32), 2.0, 32,
                           SpaceKind::Disc);
    const CoeffVec f = random_poly(rng, 32);
    const auto res = func_calc(w, space, Hyperfunction(f, CoeffVec(-1, {})));
    const CoeffVec full = convolve(w, f);
    double err = 0.0;
    for (long n = 0; n <= 32; ++n)
      err = std::max(err, std::abs(res.value.at(n) - full.at(n)));
    const double spill = std::abs(full.at(33));
    return expect(err <= 1e-13 && std::abs(res.discarded_mass - spill) <= 1e-13,
                  err);
  });

  // ---- growth ----
  add("growth.quadrature_poly", [=] {
    const double v = integrate([](double t) { return t * t; }, 0.0, 1.0, 1e-13,
                               1e-13);
    return leq(std::abs(v - 1.0 / 3.0), 1e-12);
  });
  add("growth.mm_constant_closed_form", [=] {
    GrowthProfile prof;  // Delta(t) = 1: a spike at n = 0
    prof.log_t_norms.assign(512, -1e4);
    prof.log_t_norms[0] = 0.0;
    const auto mm = mm_integral(prof, 0.9);
    const double exact = 2.0 * (1.0 - std::sqrt(0.1));
    return leq(std::abs(mm.value - exact), 1e-9);
  });
  add("growth.dichotomy", [=] {
    GrowthProfile flat;
    flat.log_t_norms.assign(512, 0.0);
    GrowthProfile dec;
    for (long n = 0; n < 512; ++n)
      dec.log_t_norms.push_back(-2.0 * std::log(n + 1.0));
    const auto a = mm_integral(flat, 0.9);
    const auto b = mm_integral(dec, 0.9);
    return expect(a.divergence == DivergenceClass::Divergent &&
                      b.divergence == DivergenceClass::Convergent,
                  a.fitted_exponent);
  });
  add("growth.c_eps_oracle", [=] {
    const double ref = 256.278031290294834273669633178;  // 60-digit evaluation
    return leq(std::abs(c_eps(1.0) - ref) / ref, 1e-10);
  });
  add("growth.c_eps_decreasing", [=] {
    double prev = c_eps(0.25);
    bool mono = true;
    for (const double e : {0.5, 1.0, 2.0, 4.0, 10.0}) {
      const double v = c_eps(e);
      mono = mono && v < prev;
      prev = v;
    }
    return expect(mono, prev);
  });
  add("growth.delta_flat", [=] {
    GrowthProfile prof;
    prof.log_t_norms.assign(128, 0.0);
    const auto d = delta(prof, 0.5);
    return leq(std::abs(d.log_value - std::log(2.0)), 1e-9);
  });
  add("growth.tail_synthesis_shape", [=] {
    GrowthProfile prof;
    prof.log_t_norms.assign(64, 0.0);
    const auto tail = tail_weight(prof, 1.0, 40);
    bool r_mono = true;
    for (size_t i = 2; i < tail.r_n.size(); ++i)
      r_mono = r_mono && tail.r_n[i] >= tail.r_n[i - 1] - 1e-12;
    // log sigma(-n) viewed on the positive axis must be concave (an infimum
    // of affine functions of n)
    bool concave = true;
    for (long n = 2; n <= 40 - 1; ++n) {
      const double d2 = tail.sigma.log_at(-n - 1) - 2 * tail.sigma.log_at(-n) +
                        tail.sigma.log_at(-n + 1);
      concave = concave && d2 <= 1e-7 * std::abs(tail.sigma.log_at(-n));
    }
    return expect(r_mono && concave, tail.r_n.back());
  });
  add("growth.summability_62", [=] {
    std::vector<double> log_l(64), zero(64, 0.0);
    for (size_t p = 0; p < log_l.size(); ++p)
      log_l[p] = -static_cast<double>(p) * static_cast<double>(p);
    const auto conv = summability_62(log_l, zero);
    const auto div = summability_62(zero, zero);
    return expect(conv.series.verdict == Verdict::Pass &&
                      div.series.verdict == Verdict::Fail,
                  conv.partial_log_sums.back());
  });
  add("growth.hypothesis_thresholds", [=] {
    GrowthProfile prof;
    prof.log_t_norms.assign(256, 0.0);
    const Weight tail = Weight::from_log_fn(Support::ZMinus, -256, -1, [](long n) {
      return std::pow(static_cast<double>(-n), 1.5);
    });
    const auto rep = hypothesis_report(prof, tail);
    const bool thresholds = rep.threshold_83 == 1.0 / 64.0 &&
                            rep.threshold_85 == 1.0 / 200.0 &&
                            rep.nqa_exponent == 1.5;
    return expect(thresholds &&
                      rep.verdicts.at("prop75_limsup_lt_1") == Verdict::Pass,
                  rep.witnesses.at("prop75_limsup_lt_1"));
  });
  add("growth.coeff_bound_formula", [=] {
    const long n = 100;
    const double direct =
        2.0 + 3.0 * std::sqrt(100.0) - 100.0 * std::log(1.0 - 0.1);
    return leq(std::abs(coeff_growth_bound(2.0, 3.0, n) - direct), 1e-12);
  });
  add("growth.fit_inverse_gap", [=] {
    std::vector<double> r, y;
    for (double x : {0.1, 0.3, 0.5, 0.7, 0.9, 0.95}) {
      r.push_back(x);
      y.push_back(2.0 + 3.0 / (1.0 - x));
    }
    const auto [a, b] = fit_inverse_gap(r, y);
    return leq(std::abs(a - 2.0) + std::abs(b - 3.0), 1e-9);
  });

  // ---- subspaces ----
  const SpaceModel disc48(Weight::constant(Support::ZPlus, 0, 48), 2.0, 48,
                          SpaceKind::Disc);
  add("subspace.division_zero_free", [=] {
    const CoeffVec g(0, {cplx(1.0), cplx(-0.5)});
    const TruncSubspace m = from_generator(g, disc48);
    bool all = m.z_invariant();
    double witness = 0.0;
    for (const cplx lam : {cplx(0.0), cplx(0.3), cplx(-0.2, 0.4), cplx(0.0, 0.5)}) {
      const auto rep = division_check(m, lam);
      all = all && rep.has_division && rep.index == 1;
      witness = std::max(witness, rep.max_residual);
    }
    return expect(all && witness <= 1e-9, witness);
  });
  add("subspace.division_vanishing_generator", [=] {
    // g(0.5) = 0: division must fail exactly at the common zero
    const CoeffVec g = convolve(CoeffVec(0, {cplx(-0.5), cplx(1.0)}),
                                CoeffVec(0, {cplx(1.0), cplx(0.2)}));
    const TruncSubspace m = from_generator(g, disc48);
    const auto at_zero = division_check(m, cplx(0.5));
    const auto away = division_check(m, cplx(0.3));
    const auto probes = zero_set(m, {cplx(0.5), cplx(0.3)});
    return expect(!at_zero.has_division && at_zero.kernel_dim >= 1 &&
                      away.has_division && away.index == 1 &&
                      probes[0].flagged && !probes[1].flagged,
                  at_zero.max_residual);
  });
  add("subspace.resolvent_identity", [=] {
    const CoeffVec g(0, {cplx(1.0), cplx(-0.5)});
    const TruncSubspace m = from_generator(g, disc48);
    return leq(resolvent_identity_residual(m, cplx(0.1), cplx(0.2, 0.1)), 1e-9);
  });
  add("subspace.quotient_intertwine", [=] {
    const CoeffVec g(0, {cplx(1.0), cplx(-0.5)});
    const TruncSubspace m = from_generator(g, disc48);
    const QuotientModel q0 = quotient_U(m, cplx(0.0));
    return leq(quotient_intertwine_residual(m, q0), 1e-10);
  });
  add("subspace.recursion_identity", [=]() mutable {
    auto rng = rng_for(31);
    CoeffVec u = random_poly(rng, 8, 0.5);
    u.set(0, cplx(1.0));
    const auto res = recursion_basis(u, 12);
    return expect(res.max_residual <= 1e-12 && res.alpha[0] == cplx(1.0),
                  res.max_residual);
  });
  add("subspace.glue_construction", [=] {
    const CoeffVec g(0, {cplx(1.0), cplx(-0.5)});
    const SpaceModel space(Weight::constant(Support::ZPlus, 0, 24), 2.0, 24,
                           SpaceKind::Disc);
    const TruncSubspace m = from_generator(g, space);
    const Weight tail = Weight::from_log_fn(Support::ZMinus, -12, -1, [](long n) {
      return static_cast<double>(n) * static_cast<double>(n);
    });
    const auto rep = glue_test(m, tail, 10);
    return expect(rep.summability.series.verdict == Verdict::Pass &&
                      rep.plus_half_max_residual <= 1e-8 &&
                      rep.span_max_residual <= 1e-8,
                  std::max(rep.plus_half_max_residual, rep.span_max_residual));
  });
  add("subspace.boundary_functional", [=] {
    const Weight w = Weight::from_log_fn(Support::ZPlus, 0, 40, [](long n) {
      return 2.0 * std::log(n + 1.0);
    });
    const SpaceModel space(w, 2.0, 40, SpaceKind::Disc);
    const auto rep = boundary_functional(space, cplx(1.0));
    return expect(rep.phi_one <= 1e-12 && rep.intertwine_residual <= 1e-9 &&
                      rep.division_at_0.has_division &&
                      rep.division_sample.has_division,
                  rep.intertwine_residual);
  });

  // ---- hyperfunction laboratory ----
  add("hyper.tau_flat_profile", [=] {
    const RadialProfile one = RadialProfile::one();
    double err = 0.0;
    for (long n = 0; n <= 20; ++n)
      err = std::max(err, std::abs(tau_phi(one, n) - 1.0 / std::sqrt(n + 1.0)));
    return leq(err, 1e-14);
  });
  add("hyper.dynkin_flat_conjugate", [=] {
    const RadialProfile one = RadialProfile::one();
    const CoeffVec h = CoeffVec::delta(-1);
    double err = 0.0;
    for (const cplx lam : {cplx(0.3), cplx(-0.2, 0.4), cplx(0.1, -0.6)})
      err = std::max(err,
                     std::abs(dynkin_extend(h, one, lam).d - std::conj(lam)));
    return leq(err, 1e-10);
  });
  add("hyper.cauchy_mode_vs_quadrature", [=] {
    const auto rho = [](double t) { return t * t * (1.0 - t * t); };
    const auto density = [&](cplx z) {
      const double t = std::abs(z);
      if (t == 0.0) return cplx(0.0);
      const cplx phase = std::conj(z) / t;
      return cplx(rho(t)) * phase * phase;  // rho(t) e^{-2 i theta}
    };
    const cplx lam(0.4, 0.3);
    const cplx a = cauchy_mode(-2, rho, lam);
    const cplx b = cauchy_transform(density, lam, 16);
    return leq(std::abs(a - b), 1e-7);
  });
  add("hyper.minus_reproduction", [=]() mutable {
    auto rng = rng_for(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CoeffVec h(-12, {});
    for (int i = 0; i < 12; ++i) h.c.emplace_back(u(rng), u(rng));
    const RadialProfile phi =
        RadialProfile::from_panels({{0.0, 1.0, 1.0}, {0.5, 1.0, 0.5}});
    double err = 0.0;
    for (const cplx mu : {cplx(1.5), cplx(-1.2, 0.9), cplx(0.0, 2.0)})
      err = std::max(err, std::abs(cauchy_minus_density(h, phi, mu) - eval(h, mu)));
    return leq(err, 1e-8);
  });
  add("hyper.fit_phi_bergman", [=] {
    const Weight target = Weight::from_log_fn(Support::ZPlus, 0, 48, [](long n) {
      return -0.5 * std::log(n + 1.0);
    });
    const PhiFit fit = fit_phi(target);
    return expect(fit.ratio_sup / fit.ratio_inf <= 10.0, fit.ratio_sup / fit.ratio_inf);
  });
  add("hyper.dbar_bound_finite", [=]() mutable {
    auto rng = rng_for(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CoeffVec h(-6, {});
    for (int i = 0; i < 6; ++i) h.c.emplace_back(u(rng), u(rng));
    const Weight sigma = Weight::from_log_fn(Support::ZMinus, -64, -1, [](long n) {
      return 0.1 * static_cast<double>(n) * static_cast<double>(n);
    });
    std::vector<cplx> grid;
    for (int i = 1; i <= 10; ++i) grid.emplace_back(0.09 * i, 0.0);
    const auto rep = dbar_bound_check(h, RadialProfile::one(), sigma, 0.5, grid);
    return expect(std::isfinite(rep.k_delta) && rep.k_delta > 0.0 &&
                      rep.table.size() == grid.size(),
                  rep.k_delta);
  });
  add("hyper.factorize_constructed", [=] {
    const std::vector<cplx> h_desc{cplx(0.0), cplx(0.3), cplx(-0.2)};
    const CoeffVec g(0, {cplx(1.0), cplx(0.4), cplx(0.1)});
    const Hyperfunction f = make_factorable(3, h_desc, g);
    const auto res = annulus_factorize(f, 0.7, 256);
    return expect(res.k == 3 && res.residual <= 1e-9, res.residual);
  });
  add("hyper.factorize_randomized", [=]() mutable {
    auto rng = rng_for(43);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    bool all = true;
    double worst = 0.0;
    for (const long k : {0L, 1L, 5L}) {
      // decaying h keeps the zeros of the truncated exponential factor well
      // away from the contour; small g keeps its log analytic past |z| = 1
      std::vector<cplx> h_desc{cplx(0.0)};
      for (int i = 1; i <= 5; ++i)
        h_desc.push_back(0.3 * std::pow(0.5, i - 1) * cplx(u(rng), u(rng)));
      CoeffVec g(0, {cplx(1.0)});
      for (int i = 0; i < 3; ++i) g.c.push_back(0.1 * cplx(u(rng), u(rng)));
      const auto res = annulus_factorize(make_factorable(k, h_desc, g), 0.7, 256);
      all = all && res.k == k;
      worst = std::max(worst, res.residual);
    }
    return expect(all && worst <= 1e-9, worst);
  });
  add("hyper.lemma82_trend", [=] {
    GrowthProfile prof;
    prof.log_t_norms.assign(221, 0.0);
    const Weight tail = Weight::from_log_fn(Support::ZMinus, -260, -1, [](long n) {
      return std::pow(static_cast<double>(-n), 0.7);
    });
    const auto trend = lemma82_trend(prof, tail, 220);
    bool in_band = true;
    for (const auto& pt : trend)
      if (pt.n >= 100) in_band = in_band && pt.ratio >= 0.85 && pt.ratio <= 1.15;
    return expect(in_band, trend.back().ratio);
  });
  add("hyper.prop84_identity", [=]() mutable {
    auto rng = rng_for(44);
    const CoeffVec g = random_poly(rng, 6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CoeffVec h(-5, {});
    for (int i = 0; i < 5; ++i) h.c.emplace_back(u(rng), u(rng));
    std::vector<cplx> grid;
    for (int i = 0; i < 32; ++i) {
      const double th = 2.0 * std::numbers::pi * i / 32.0;
      const double r = (i % 2 == 0) ? 0.4 : 0.7;
      grid.emplace_back(r * std::cos(th), r * std::sin(th));
    }
    const auto res = prop84_residual(g, h, RadialProfile::one(), grid);
    return expect(res.max_residual <= 1e-7 && res.l.system_residual <= 1e-10,
                  res.max_residual);
  });
  add("hyper.annihilator_system", [=]() mutable {
    auto rng = rng_for(45);
    const CoeffVec g = random_poly(rng, 5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CoeffVec h(-4, {});
    for (int i = 0; i < 4; ++i) h.c.emplace_back(u(rng), u(rng));
    const auto pair = build_annihilator(g, h, 8, 6, 4);
    return leq(pair.system_residual, 1e-10);
  });

  return checks;
}

ordered_json run_verify(unsigned seed, long n_trunc, int& exit_code) {
  auto checks = build_checks(seed, n_trunc);
  std::vector<CheckResult> results(checks.size());

  long threads = 1;
  if (const char* env = std::getenv("SHIFTLAB_THREADS"))
    threads = std::max(1L, std::atol(env));
  threads = std::min<long>(threads, static_cast<long>(checks.size()));

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= checks.size()) return;
      try {
        results[i] = checks[i].fn();
      } catch (const std::exception& e) {
        results[i] = {false, std::nan(""), std::string("exception: ") + e.what()};
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (long t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ordered_json matrix = ordered_json::array();
  size_t passed = 0;
  for (size_t i = 0; i < checks.size(); ++i) {
    ordered_json row;
    row["name"] = checks[i].name;
    row["pass"] = results[i].pass;
    row["witness"] = results[i].witness;
    if (!results[i].note.empty()) row["note"] = results[i].note;
    matrix.push_back(row);
    if (results[i].pass) ++passed;
  }
  exit_code = passed == checks.size() ? 0 : 1;
  ordered_json out;
  out["checks"] = matrix;
  out["passed"] = passed;
  out["total"] = checks.size();
  return out;
}

}  // namespace

RunResult run_cli(int argc, const char* const* argv) {
  RunResult res;
  CLI::App app{"numerical laboratory for weighted shifts and hyperfunctions"};
  app.require_subcommand(1);
  std::string out_path;
  app.add_option("--out", out_path, "write the JSON report to this file");

  // weights
  auto* weights = app.add_subcommand("weights", "weight sequence analysis");
  auto* w_classify = weights->add_subcommand("classify", "class membership report");
  std::string w_file;
  w_classify->add_option("--weight", w_file, "weight JSON file")->required();
  auto* w_env = weights->add_subcommand("envelope", "shift-power envelope");
  std::string we_file, we_kind = "bar";
  long we_m = 1;
  w_env->add_option("--weight", we_file)->required();
  w_env->add_option("--kind", we_kind, "bar or tilde");
  w_env->add_option("--m", we_m, "power");

  // series
  auto* series = app.add_subcommand("series", "coefficient window operations");
  auto* s_eval = series->add_subcommand("eval", "evaluate at a point");
  std::string se_file;
  double se_re = 0.0, se_im = 0.0;
  s_eval->add_option("--series", se_file)->required();
  s_eval->add_option("--re", se_re)->required();
  s_eval->add_option("--im", se_im);
  auto* s_conv = series->add_subcommand("convolve", "Cauchy product");
  std::string sc_a, sc_b;
  s_conv->add_option("--a", sc_a)->required();
  s_conv->add_option("--b", sc_b)->required();
  auto* s_pair = series->add_subcommand("pair", "bilinear pairing <f, h>");
  std::string sp_f, sp_h;
  s_pair->set_help_flag("--help", "print help");  // frees -h for the option
  s_pair->add_option("--f", sp_f)->required();
  s_pair->add_option("--h", sp_h)->required();

  // op
  auto* op = app.add_subcommand("op", "shift operators on weighted models");
  auto* op_norm = op->add_subcommand("norm", "norm of an operator power");
  std::string on_space, on_op = "T";
  long on_m = 1;
  op_norm->add_option("--space", on_space)->required();
  op_norm->add_option("--op", on_op, "S, T, biS or biS_inv");
  op_norm->add_option("--m", on_m);
  auto* op_div = op->add_subcommand("divide", "(f - f(lambda))/(z - lambda)");
  std::string od_file;
  double od_re = 0.0, od_im = 0.0;
  op_div->add_option("--series", od_file)->required();
  op_div->add_option("--re", od_re);
  op_div->add_option("--im", od_im);

  // growth
  auto* growth = app.add_subcommand("growth", "growth estimates and tail synthesis");
  auto* g_report = growth->add_subcommand("report", "synthesize the tail weight");
  std::string gr_profile;
  double gr_eps = 1.0;
  long gr_nmax = 64;
  g_report->add_option("--profile", gr_profile)->required();
  g_report->add_option("--eps", gr_eps);
  g_report->add_option("--n-max", gr_nmax);
  auto* g_mm = growth->add_subcommand("mm", "dichotomy integral");
  std::string gm_profile;
  double gm_rup = 0.9;
  g_mm->add_option("--profile", gm_profile)->required();
  g_mm->add_option("--r-up", gm_rup);
  auto* g_hyp = growth->add_subcommand("hypotheses", "named hypothesis checks");
  std::string gh_profile, gh_tail;
  g_hyp->add_option("--profile", gh_profile)->required();
  g_hyp->add_option("--tail", gh_tail)->required();

  // subspace
  auto* subspace = app.add_subcommand("subspace", "z-invariant subspace checks");
  auto* sub_check = subspace->add_subcommand("check", "division and index report");
  std::string uc_space, uc_gen;
  double uc_re = 0.0, uc_im = 0.0;
  sub_check->add_option("--space", uc_space)->required();
  sub_check->add_option("--generator", uc_gen)->required();
  sub_check->add_option("--re", uc_re);
  sub_check->add_option("--im", uc_im);
  auto* sub_glue = subspace->add_subcommand("glue", "half-plane gluing test");
  std::string ug_space, ug_gen, ug_tail;
  long ug_pmax = 6;
  sub_glue->add_option("--space", ug_space)->required();
  sub_glue->add_option("--generator", ug_gen)->required();
  sub_glue->add_option("--tail", ug_tail)->required();
  sub_glue->add_option("--p-max", ug_pmax);

  // factorize
  auto* factorize = app.add_subcommand("factorize", "annulus factorization");
  std::string fz_file;
  double fz_r = 0.7;
  long fz_k = 256;
  factorize->add_option("--series", fz_file)->required();
  factorize->add_option("--r", fz_r);
  factorize->add_option("--K", fz_k);

  // dynkin
  auto* dynkin = app.add_subcommand("dynkin", "area-density extension");
  std::string dk_h, dk_phi;
  double dk_re = 0.3, dk_im = 0.0;
  dynkin->set_help_flag("--help", "print help");  // frees -h for the option
  dynkin->add_option("--h", dk_h)->required();
  dynkin->add_option("--phi", dk_phi, "panel profile JSON (default: phi == 1)");
  dynkin->add_option("--re", dk_re);
  dynkin->add_option("--im", dk_im);

  for (CLI::App* grp : {weights, series, op, growth, subspace})
    grp->require_subcommand(1);

  // verify
  auto* verify = app.add_subcommand("verify", "full invariant suite");
  unsigned vf_seed = 42;
  long vf_n = 128;
  verify->add_option("--seed", vf_seed);
  verify->add_option("--N", vf_n)->check(CLI::Range(8L, 1L << 20));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    res.exit_code = 0;
    res.json = app.help();
    return res;
  } catch (const CLI::ParseError& e) {
    res.exit_code = 2;
    res.error = e.what();
    return res;
  }

  ordered_json report;
  report["version"] = SHIFTLAB_VERSION;
  ordered_json config;
  try {
    ordered_json result;
    std::string command;
    int exit_code = 0;

    if (app.got_subcommand(weights)) {
      if (weights->got_subcommand(w_classify)) {
        command = "weights classify";
        config["weight"] = w_file;
        result = classify(Weight::from_json(load_json(w_file))).to_json();
      } else if (weights->got_subcommand(w_env)) {
        command = "weights envelope";
        config = {{"weight", we_file}, {"kind", we_kind}, {"m", we_m}};
        const auto kind = we_kind == "tilde" ? EnvelopeKind::Tilde
                          : we_kind == "bar"
                              ? EnvelopeKind::Bar
                              : throw std::invalid_argument(
                                    "field --kind must be bar or tilde");
        const auto env = envelope(Weight::from_json(load_json(we_file)), kind, we_m);
        result = {{"log_value", env.log_value},
                  {"arg_n", env.arg_n},
                  {"edge_attained", env.edge_attained}};
      } else {
        throw std::logic_error("unreachable: subcommand required");
      }
    } else if (app.got_subcommand(series)) {
      if (series->got_subcommand(s_eval)) {
        command = "series eval";
        config = {{"series", se_file}, {"re", se_re}, {"im", se_im}};
        const cplx v = eval(Hyperfunction::from_json(load_json(se_file)),
                            cplx(se_re, se_im));
        result = {{"value", {v.real(), v.imag()}}};
      } else if (series->got_subcommand(s_conv)) {
        command = "series convolve";
        config = {{"a", sc_a}, {"b", sc_b}};
        result = convolve(CoeffVec::from_json(load_json(sc_a)),
                          CoeffVec::from_json(load_json(sc_b)))
                     .to_json();
      } else if (series->got_subcommand(s_pair)) {
        command = "series pair";
        config = {{"f", sp_f}, {"h", sp_h}};
        const cplx v = pair_with(Hyperfunction::from_json(load_json(sp_f)),
                                 CoeffVec::from_json(load_json(sp_h)));
        result = {{"value", {v.real(), v.imag()}}};
      } else {
        throw std::logic_error("unreachable: subcommand required");
      }
    } else if (app.got_subcommand(op)) {
      if (op->got_subcommand(op_norm)) {
        command = "op norm";
        config = {{"space", on_space}, {"op", on_op}, {"m", on_m}};
        result = power_norm(SpaceModel::from_json(load_json(on_space)),
                            op_from_string(on_op), on_m)
                     .to_json();
      } else if (op->got_subcommand(op_div)) {
        command = "op divide";
        config = {{"series", od_file}, {"re", od_re}, {"im", od_im}};
        result = divide(CoeffVec::from_json(load_json(od_file)),
                        cplx(od_re, od_im))
                     .to_json();
      } else {
        throw std::logic_error("unreachable: subcommand required");
      }
    } else if (app.got_subcommand(growth)) {
      if (growth->got_subcommand(g_report)) {
        command = "growth report";
        config = {{"profile", gr_profile}, {"eps", gr_eps}, {"n_max", gr_nmax}};
        result = tail_weight(GrowthProfile::from_json(load_json(gr_profile)),
                             gr_eps, gr_nmax)
                     .to_json();
      } else if (growth->got_subcommand(g_mm)) {
        command = "growth mm";
        config = {{"profile", gm_profile}, {"r_up", gm_rup}};
        const auto mm =
            mm_integral(GrowthProfile::from_json(load_json(gm_profile)), gm_rup);
        result = {{"value", mm.value},
                  {"divergence", to_string(mm.divergence)},
                  {"fitted_exponent", mm.fitted_exponent}};
      } else if (growth->got_subcommand(g_hyp)) {
        command = "growth hypotheses";
        config = {{"profile", gh_profile}, {"tail", gh_tail}};
        const auto rep =
            hypothesis_report(GrowthProfile::from_json(load_json(gh_profile)),
                              Weight::from_json(load_json(gh_tail)));
        result = rep.to_json();
        for (const auto& [k, v] : rep.verdicts)
          if (v == Verdict::Fail) exit_code = 1;
      } else {
        throw std::logic_error("unreachable: subcommand required");
      }
    } else if (app.got_subcommand(subspace)) {
      if (subspace->got_subcommand(sub_check)) {
        command = "subspace check";
        config = {{"space", uc_space},
                  {"generator", uc_gen},
                  {"re", uc_re},
                  {"im", uc_im}};
        const TruncSubspace m =
            from_generator(CoeffVec::from_json(load_json(uc_gen)),
                           SpaceModel::from_json(load_json(uc_space)));
        const auto rep = division_check(m, cplx(uc_re, uc_im));
        result = rep.to_json();
        result["z_invariant"] = m.z_invariant();
        if (!rep.has_division) exit_code = 1;
      } else if (subspace->got_subcommand(sub_glue)) {
        command = "subspace glue";
        config = {{"space", ug_space},
                  {"generator", ug_gen},
                  {"tail", ug_tail},
                  {"p_max", ug_pmax}};
        const TruncSubspace m =
            from_generator(CoeffVec::from_json(load_json(ug_gen)),
                           SpaceModel::from_json(load_json(ug_space)));
        const auto rep =
            glue_test(m, Weight::from_json(load_json(ug_tail)), ug_pmax);
        result = rep.to_json();
        if (rep.summability.series.verdict == Verdict::Fail) exit_code = 1;
      } else {
        throw std::logic_error("unreachable: subcommand required");
      }
    } else if (app.got_subcommand(factorize)) {
      command = "factorize";
      config = {{"series", fz_file}, {"r", fz_r}, {"K", fz_k}};
      if (fz_k < 2 || (fz_k & (fz_k - 1)) != 0)
        throw std::invalid_argument("field --K must be a power of two");
      result = annulus_factorize(Hyperfunction::from_json(load_json(fz_file)),
                                 fz_r, static_cast<size_t>(fz_k))
                   .to_json();
    } else if (app.got_subcommand(dynkin)) {
      command = "dynkin";
      config = {{"h", dk_h}, {"phi", dk_phi}, {"re", dk_re}, {"im", dk_im}};
      RadialProfile phi = RadialProfile::one();
      if (!dk_phi.empty()) {
        std::vector<RadialProfile::Panel> panels;
        for (const auto& p : load_json(dk_phi).at("panels"))
          panels.push_back({p.at("a").get<double>(), p.at("b").get<double>(),
                            p.at("c").get<double>()});
        phi = RadialProfile::from_panels(panels);
      }
      const auto dv = dynkin_extend(CoeffVec::from_json(load_json(dk_h)), phi,
                                    cplx(dk_re, dk_im));
      result = {{"d", {dv.d.real(), dv.d.imag()}},
                {"density", {dv.density.real(), dv.density.imag()}}};
    } else if (app.got_subcommand(verify)) {
      command = "verify";
      config = {{"seed", vf_seed}, {"N", vf_n}};
      result = run_verify(vf_seed, vf_n, exit_code);
    }

    report["command"] = command;
    report["config"] = config;
    report["result"] = result;
    res.exit_code = exit_code;
    if (exit_code == 1) res.error = "one or more checks failed";
  } catch (const std::invalid_argument& e) {
    res.exit_code = 2;
    res.error = e.what();
    report["error"] = e.what();
  } catch (const std::exception& e) {
    res.exit_code = 1;
    res.error = e.what();
    report["error"] = e.what();
  }

  res.json = report.dump(2) + "\n";
  if (!out_path.empty() && res.exit_code != 2) {
    std::ofstream out(out_path);
    if (!out) {
      res.exit_code = 2;
      res.error = "cannot write file: " + out_path;
    } else {
      out << res.json;
    }
  }
  return res;
}

}  // namespace shiftlab
